//! Brute-force Gauss–Seidel fixed point of the discrete system, kept
//! independent of the policy-iteration path so the two can cross-validate.

use super::SolverError;
use crate::field::{PairIndex, ValueField};
use crate::game::{obstacle_m, obstacle_n, GameSpec};
use crate::generator::DiscreteGenerator;
use crate::grid::Grid;

/// Solves the obstacle-capped fixed point by plain Gauss–Seidel sweeps
///
/// ```text
/// V^{ij}(x_k) ← max( min( relax(x_k), N[V](x_k) ), M[V](x_k) )
/// ```
///
/// where `relax` solves the single row of `(rI − L)V = f` for `V^{ij}(x_k)`
/// holding the neighbor values fixed. Sweeps run until the sup-norm change
/// drops below `tol`.
pub fn value_iteration_oracle(
    spec: &GameSpec,
    grid: &Grid,
    tol: f64,
    max_sweeps: usize,
) -> Result<ValueField, SolverError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let gen = DiscreteGenerator::assemble(spec, grid)?;
    let q = spec.q();
    let n = grid.n();
    let r = spec.discount();

    let mut field = ValueField::from_fn(q, n, |p, k| gen.payoff(p, k) / r);
    let mut history: Vec<f64> = Vec::new();
    let mut update = f64::INFINITY;

    for sweep in 1..=max_sweeps {
        update = 0.0;
        for p in 0..q * q {
            let pair = PairIndex(p);
            let (i, j) = pair.split(q);
            let op = gen.op(pair);
            for k in 0..n {
                let v = field.get(pair, k);
                let relaxed = {
                    let values = field.pair_values(pair);
                    // one-row solve in increment form: large weights multiply
                    // small neighbor differences
                    v + (gen.payoff(pair, k) + op.apply_row(values, k) - r * v)
                        / (r + op.sub[k] + op.sup[k])
                };
                let (m, _) = obstacle_m(&field, spec, k, i, j);
                let (nn, _) = obstacle_n(&field, spec, k, i, j);
                let new = m.max(relaxed.min(nn));
                update = update.max((new - v).abs());
                field.set(pair, k, new);
            }
        }
        if update < tol {
            return Ok(field);
        }
        if history.len() == 16 {
            history.remove(0);
        }
        history.push(update);
        let _ = sweep;
    }

    Err(SolverError::OracleNotConverged {
        sweeps: max_sweeps,
        last_update: update,
        history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{AffinePair, CoefficientModel, CostMatrices};

    #[test]
    fn prohibitive_constant_instance_matches_closed_form() {
        let mk = |payoff| AffinePair {
            drift_const: 0.0,
            drift_slope: 0.0,
            vol_const: 0.0,
            vol_slope: 0.0,
            payoff_const: payoff,
            payoff_slope: 0.0,
        };
        let coeff = CoefficientModel::affine_from_pairs(
            2,
            &[(1, 1, mk(5.0)), (1, 2, mk(1.0)), (2, 1, mk(-1.0)), (2, 2, mk(-4.0))],
        )
        .unwrap();
        let spec = GameSpec::new(
            coeff,
            CostMatrices::uniform(2, 100.0, 100.0).unwrap(),
            0.15,
        )
        .unwrap();
        let grid = Grid::new(-5.0, 5.0, 51).unwrap();
        let field = value_iteration_oracle(&spec, &grid, 1e-13, 10_000).unwrap();
        let expect = [5.0 / 0.15, 1.0 / 0.15, -1.0 / 0.15, -4.0 / 0.15];
        for (p, &want) in expect.iter().enumerate() {
            for k in 0..grid.n() {
                assert!((field.get(PairIndex(p), k) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn reports_non_convergence_with_history() {
        // nonzero drift on a linear payoff: the f/r initializer is not the
        // fixed point, so sweeps genuinely have to iterate
        let mk = AffinePair {
            drift_const: 0.5,
            drift_slope: 0.0,
            vol_const: 1.0,
            vol_slope: 0.0,
            payoff_const: 0.0,
            payoff_slope: 1.0,
        };
        let coeff = CoefficientModel::uniform_affine(2, mk).unwrap();
        let spec =
            GameSpec::new(coeff, CostMatrices::uniform(2, 1.0, 1.0).unwrap(), 0.1).unwrap();
        let grid = Grid::new(-1.0, 1.0, 101).unwrap();
        // two sweeps cannot reach 1e-13
        let err = value_iteration_oracle(&spec, &grid, 1e-13, 2).unwrap_err();
        match err {
            SolverError::OracleNotConverged { sweeps, history, .. } => {
                assert_eq!(sweeps, 2);
                assert!(!history.is_empty());
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
