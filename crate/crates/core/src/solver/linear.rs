//! Direct solve of the linear system induced by a fixed policy.
//!
//! With unknowns ordered node-major, the policy system is block tridiagonal:
//! continuation rows couple a pair to its own neighbors at adjacent nodes
//! (diagonal inter-block coupling), while switch rows couple different pairs
//! at the same node (inside the diagonal block). Blocks are dense q²×q²
//! matrices, so block Thomas elimination with a dense LU per node solves the
//! whole coupled system in O(n·q⁶).

use super::SolverError;
use crate::field::{Action, PairIndex, PolicyTable, ValueField};
use crate::game::GameSpec;
use crate::generator::DiscreteGenerator;
use nalgebra::{DMatrix, DVector, Dyn};

type BlockLu = nalgebra::linalg::LU<f64, Dyn, Dyn>;

/// The policy-induced system `A·u = rhs` in matrix-free form.
pub(crate) struct PolicySystem<'a> {
    pub spec: &'a GameSpec,
    pub gen: &'a DiscreteGenerator,
    pub policy: &'a PolicyTable,
}

impl<'a> PolicySystem<'a> {
    fn n(&self) -> usize {
        self.gen.n()
    }

    fn n_pairs(&self) -> usize {
        self.gen.q() * self.gen.q()
    }

    /// Right-hand side, node-major (`idx = k·P + p`).
    pub fn rhs(&self) -> Vec<f64> {
        let (n, np) = (self.n(), self.n_pairs());
        let q = self.gen.q();
        let mut rhs = vec![0.0; n * np];
        for k in 0..n {
            for p in 0..np {
                let pair = PairIndex(p);
                rhs[k * np + p] = match self.policy.get(pair, k) {
                    Action::Continue => self.gen.payoff(pair, k),
                    Action::SwitchI(target) => {
                        let (i, _) = pair.split(q);
                        -self.spec.costs.c(i, target)
                    }
                    Action::SwitchII(target) => {
                        let (_, j) = pair.split(q);
                        self.spec.costs.chi(j, target)
                    }
                };
            }
        }
        rhs
    }

    /// Applies `A` to `u` (node-major), writing into `out`. Continuation rows
    /// are evaluated in difference form to avoid magnifying rounding.
    pub fn apply(&self, u: &[f64], out: &mut [f64]) {
        let (n, np) = (self.n(), self.n_pairs());
        let q = self.gen.q();
        let r = self.spec.discount();
        for k in 0..n {
            for p in 0..np {
                let pair = PairIndex(p);
                let uk = u[k * np + p];
                out[k * np + p] = match self.policy.get(pair, k) {
                    Action::Continue => {
                        let op = self.gen.op(pair);
                        let mut lu = 0.0;
                        if op.sub[k] != 0.0 {
                            lu += op.sub[k] * (u[(k - 1) * np + p] - uk);
                        }
                        if op.sup[k] != 0.0 {
                            lu += op.sup[k] * (u[(k + 1) * np + p] - uk);
                        }
                        r * uk - lu
                    }
                    Action::SwitchI(target) => {
                        let (_, j) = pair.split(q);
                        uk - u[k * np + PairIndex::new(target, j, q).0]
                    }
                    Action::SwitchII(target) => {
                        let (i, _) = pair.split(q);
                        uk - u[k * np + PairIndex::new(i, target, q).0]
                    }
                };
            }
        }
    }
}

/// Block Thomas factorization of a policy system.
pub(crate) struct BlockFactor {
    n: usize,
    np: usize,
    lus: Vec<BlockLu>,
    /// Sub-diagonal coupling `−sub` per (node, pair), zero on switch rows.
    sub: Vec<f64>,
    /// Super-diagonal coupling `−sup` per (node, pair), zero on switch rows.
    sup: Vec<f64>,
}

impl BlockFactor {
    pub fn factor(system: &PolicySystem<'_>) -> Result<Self, SolverError> {
        let n = system.n();
        let np = system.n_pairs();
        let q = system.gen.q();
        let r = system.spec.discount();

        let mut sub = vec![0.0; n * np];
        let mut sup = vec![0.0; n * np];
        let mut blocks: Vec<DMatrix<f64>> = Vec::with_capacity(n);
        for k in 0..n {
            let mut d = DMatrix::<f64>::zeros(np, np);
            for p in 0..np {
                let pair = PairIndex(p);
                match system.policy.get(pair, k) {
                    Action::Continue => {
                        let op = system.gen.op(pair);
                        d[(p, p)] = r + op.sub[k] + op.sup[k];
                        sub[k * np + p] = -op.sub[k];
                        sup[k * np + p] = -op.sup[k];
                    }
                    Action::SwitchI(target) => {
                        let (_, j) = pair.split(q);
                        d[(p, p)] = 1.0;
                        d[(p, PairIndex::new(target, j, q).0)] = -1.0;
                    }
                    Action::SwitchII(target) => {
                        let (i, _) = pair.split(q);
                        d[(p, p)] = 1.0;
                        d[(p, PairIndex::new(i, target, q).0)] = -1.0;
                    }
                }
            }
            blocks.push(d);
        }

        // Forward block elimination: S_k = D_k − A_k S_{k−1}⁻¹ B_{k−1} where
        // A_k = diag(sub_k) and B_{k−1} = diag(sup_{k−1}).
        let mut lus: Vec<BlockLu> = Vec::with_capacity(n);
        for k in 0..n {
            let mut s = blocks[k].clone();
            if k > 0 {
                let prev = &lus[k - 1];
                for c in 0..np {
                    let b = sup[(k - 1) * np + c];
                    if b == 0.0 {
                        continue;
                    }
                    let mut e = DVector::<f64>::zeros(np);
                    e[c] = 1.0;
                    let col = prev
                        .solve(&e)
                        .ok_or(SolverError::SingularBlock { node: k - 1 })?;
                    for rr in 0..np {
                        let a = sub[k * np + rr];
                        if a != 0.0 {
                            s[(rr, c)] -= a * col[rr] * b;
                        }
                    }
                }
            }
            let lu = s.lu();
            if !lu.is_invertible() {
                return Err(SolverError::SingularBlock { node: k });
            }
            lus.push(lu);
        }

        Ok(BlockFactor { n, np, lus, sub, sup })
    }

    /// Solves `A·u = rhs` with the stored factorization.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, SolverError> {
        let (n, np) = (self.n, self.np);
        // forward: g_k = rhs_k − A_k S_{k−1}⁻¹ g_{k−1}
        let mut g = vec![DVector::<f64>::zeros(np); n];
        for k in 0..n {
            let mut gk = DVector::from_column_slice(&rhs[k * np..(k + 1) * np]);
            if k > 0 {
                let z = self.lus[k - 1]
                    .solve(&g[k - 1])
                    .ok_or(SolverError::SingularBlock { node: k - 1 })?;
                for p in 0..np {
                    let a = self.sub[k * np + p];
                    if a != 0.0 {
                        gk[p] -= a * z[p];
                    }
                }
            }
            g[k] = gk;
        }
        // back substitution: u_k = S_k⁻¹ (g_k − B_k u_{k+1})
        let mut u = vec![0.0; n * np];
        let mut next = self.lus[n - 1]
            .solve(&g[n - 1])
            .ok_or(SolverError::SingularBlock { node: n - 1 })?;
        for p in 0..np {
            u[(n - 1) * np + p] = next[p];
        }
        for k in (0..n - 1).rev() {
            let mut gk = g[k].clone();
            for p in 0..np {
                let b = self.sup[k * np + p];
                if b != 0.0 {
                    gk[p] -= b * next[p];
                }
            }
            next = self.lus[k]
                .solve(&gk)
                .ok_or(SolverError::SingularBlock { node: k })?;
            for p in 0..np {
                u[k * np + p] = next[p];
            }
        }
        Ok(u)
    }
}

/// Solves the policy system directly, then applies iterative refinement so
/// the matrix-free residual reaches the evaluation noise floor.
pub(crate) fn solve_policy_system(system: &PolicySystem<'_>) -> Result<Vec<f64>, SolverError> {
    let factor = BlockFactor::factor(system)?;
    let rhs = system.rhs();
    let mut u = factor.solve(&rhs)?;
    let mut res = vec![0.0; rhs.len()];
    for _ in 0..2 {
        system.apply(&u, &mut res);
        for (&bi, ai) in rhs.iter().zip(res.iter_mut()) {
            *ai = bi - *ai;
        }
        let worst = res.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if worst == 0.0 {
            break;
        }
        let du = factor.solve(&res)?;
        for (ui, di) in u.iter_mut().zip(du) {
            *ui += di;
        }
    }
    Ok(u)
}

/// Copies a node-major solution vector into a pair-major value field.
pub(crate) fn vector_to_field(u: &[f64], q: usize, n: usize) -> ValueField {
    let np = q * q;
    ValueField::from_fn(q, n, |pair, k| u[k * np + pair.0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PolicyTable;
    use crate::game::{CoefficientModel, CostMatrices, GameSpec, GbmPair, RegimeIndex};
    use crate::grid::Grid;

    fn gbm_spec() -> GameSpec {
        let mk = |payoff| GbmPair {
            drift: 0.01,
            vol: 0.2,
            payoff_slope: payoff,
        };
        let coeff = CoefficientModel::gbm_from_pairs(
            2,
            &[(1, 1, mk(5.0)), (1, 2, mk(1.0)), (2, 1, mk(-1.0)), (2, 2, mk(-4.0))],
        )
        .unwrap();
        GameSpec::new(coeff, CostMatrices::two_regime(2.0, 5.0, 2.0, 5.0).unwrap(), 0.15).unwrap()
    }

    #[test]
    fn all_continue_system_solves_to_small_residual() {
        let spec = gbm_spec();
        let grid = Grid::new(-5.0, 5.0, 201).unwrap();
        let gen = DiscreteGenerator::assemble(&spec, &grid).unwrap();
        let policy = PolicyTable::all_continue(2, grid.n());
        let system = PolicySystem { spec: &spec, gen: &gen, policy: &policy };
        let u = solve_policy_system(&system).unwrap();
        let rhs = system.rhs();
        let mut au = vec![0.0; u.len()];
        system.apply(&u, &mut au);
        let worst = rhs
            .iter()
            .zip(&au)
            .map(|(b, a)| (b - a).abs())
            .fold(0.0_f64, f64::max);
        assert!(worst < 1e-10, "residual {worst}");
    }

    #[test]
    fn switch_rows_enforce_exact_offsets() {
        let spec = gbm_spec();
        let grid = Grid::new(-5.0, 5.0, 101).unwrap();
        let gen = DiscreteGenerator::assemble(&spec, &grid).unwrap();
        let mut policy = PolicyTable::all_continue(2, grid.n());
        // force pair (1,1) to take player I's switch to regime 2 at node 0
        let p11 = PairIndex::new(RegimeIndex::unchecked(1), RegimeIndex::unchecked(1), 2);
        policy.set(p11, 0, Action::SwitchI(RegimeIndex::unchecked(2)));
        let system = PolicySystem { spec: &spec, gen: &gen, policy: &policy };
        let u = solve_policy_system(&system).unwrap();
        // node-major layout: node 0 occupies the first q² entries
        let p21 = PairIndex::new(RegimeIndex::unchecked(2), RegimeIndex::unchecked(1), 2);
        let diff = u[p11.0] - (u[p21.0] - 2.0);
        assert!(diff.abs() < 1e-12, "switch identity violated by {diff}");
    }

    #[test]
    fn cyclic_switch_rows_are_reported_singular() {
        let spec = gbm_spec();
        let grid = Grid::new(-1.0, 1.0, 3).unwrap();
        let gen = DiscreteGenerator::assemble(&spec, &grid).unwrap();
        let mut policy = PolicyTable::all_continue(2, grid.n());
        let r1 = RegimeIndex::unchecked(1);
        let r2 = RegimeIndex::unchecked(2);
        // (1,1) -> (2,1) and (2,1) -> (1,1): a two-cycle of switch rows
        policy.set(PairIndex::new(r1, r1, 2), 1, Action::SwitchI(r2));
        policy.set(PairIndex::new(r2, r1, 2), 1, Action::SwitchI(r1));
        let system = PolicySystem { spec: &spec, gen: &gen, policy: &policy };
        let err = BlockFactor::factor(&system)
            .and_then(|f| f.solve(&system.rhs()))
            .unwrap_err();
        assert!(matches!(err, SolverError::SingularBlock { node: 1 }));
    }
}
