//! Howard policy iteration for the discrete Isaacs system of
//! quasi-variational inequalities, with residual diagnostics and an
//! independent value-iteration oracle for cross-validation.
//!
//! The discrete system requires, at every node and regime pair,
//!
//! ```text
//! V = max( min( continuation, N[V] ), M[V] ),
//! ```
//!
//! where `continuation` solves the row of `(rI − L)V = f`. Howard iteration
//! alternates (a) solving the linear system induced by the current action
//! table — switch rows become identities `V^{ij} = V^{kj} − C(i,k)` or
//! `V^{ij} = V^{il} + χ(j,l)` — over all pairs jointly, and (b) re-greedying
//! the action table, until the table is stable and the sup-norm update is
//! below tolerance. If the table revisits a previous state or stops making
//! progress, damped value-iteration sweeps pull the field toward the fixed
//! point and policy iteration resumes from there.

mod linear;
mod oracle;
mod residual;

pub use oracle::value_iteration_oracle;
pub use residual::{check_sandwich, isaacs_residual, QviOrdering};

use crate::field::{Action, PairIndex, PolicyTable, ValueField};
use crate::game::{obstacle_m, obstacle_n, GameSpec};
use crate::generator::{DiscreteGenerator, GeneratorError, PairOperator};
use crate::grid::Grid;
use linear::{solve_policy_system, vector_to_field, PolicySystem};
use std::collections::HashSet;
use std::time::{Duration, Instant};
use thiserror::Error;

/// Sweep budget for the damped value-iteration fallback.
const DAMPED_SWEEP_CAP: usize = 200_000;

/// Tolerance for declaring a realized switch cycle's cost sum zero.
const FREE_LOOP_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Generator(#[from] GeneratorError),

    #[error("free loop realized at node {node} (x = {x}): switch cycle {} has zero cost sum", format_cycle(.cycle))]
    FreeLoopRealized {
        node: usize,
        x: f64,
        cycle: Vec<(usize, usize)>,
    },

    #[error("policy system is singular at node {node}")]
    SingularBlock { node: usize },

    #[error("policy iteration produced a non-finite value at iteration {iteration}")]
    NonFiniteIterate { iteration: usize },

    #[error("policy iteration did not converge in {iterations} iterations (last update {last_update:.3e}, residual {residual:.3e})")]
    NotConverged {
        iterations: usize,
        last_update: f64,
        residual: f64,
    },

    #[error("value iteration did not converge in {sweeps} sweeps (last update {last_update:.3e}, history tail {history:?})")]
    OracleNotConverged {
        sweeps: usize,
        last_update: f64,
        history: Vec<f64>,
    },
}

fn format_cycle(cycle: &[(usize, usize)]) -> String {
    let parts: Vec<String> = cycle.iter().map(|(i, j)| format!("({i},{j})")).collect();
    parts.join("->")
}

/// Convergence diagnostics of a solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Howard iterations performed (linear solves).
    pub iterations: usize,
    /// Damped value-iteration sweeps, nonzero only if the fallback ran.
    pub fallback_sweeps: usize,
    /// Transient greedy switch cycles broken during iteration.
    pub demoted_cycles: usize,
    pub final_residual_hjbi1: f64,
    pub final_residual_hjbi2: f64,
    pub converged: bool,
    pub wall_time: Duration,
}

/// A solved game: the value field, the final action table and diagnostics.
#[derive(Debug, Clone)]
pub struct Solved {
    pub field: ValueField,
    pub policy: PolicyTable,
    pub report: SolveReport,
}

/// One-point relaxation of the continuation row at node `k`: the value the
/// PDE row would assign holding the neighbor values fixed.
#[inline]
fn continuation_relaxation(op: &PairOperator, f: f64, r: f64, values: &[f64], k: usize) -> f64 {
    let v = values[k];
    v + (f + op.apply_row(values, k) - r * v) / (r + op.sub[k] + op.sup[k])
}

/// Greedy action table for the current field, using the ordering with the
/// minimizer's obstacle inside the min and the maximizer's as the outer max.
/// Keeping the previous action on exact value ties stabilizes the iteration.
fn greedy_policy(
    spec: &GameSpec,
    gen: &DiscreteGenerator,
    field: &ValueField,
    previous: Option<&PolicyTable>,
) -> PolicyTable {
    let q = spec.q();
    let n = gen.n();
    let r = spec.discount();
    let mut policy = PolicyTable::all_continue(q, n);
    for p in field.iter_pairs() {
        let (i, j) = p.split(q);
        let op = gen.op(p);
        let values = field.pair_values(p);
        for k in 0..n {
            let c = continuation_relaxation(op, gen.payoff(p, k), r, values, k);
            let (m, k_star) = obstacle_m(field, spec, k, i, j);
            let (nn, l_star) = obstacle_n(field, spec, k, i, j);
            let target = m.max(c.min(nn));
            let action = if m > c.min(nn) {
                Action::SwitchI(k_star)
            } else if c <= nn {
                Action::Continue
            } else {
                Action::SwitchII(l_star)
            };
            let action = match previous.map(|prev| prev.get(p, k)) {
                Some(prev_action) if prev_action != action => {
                    let prev_value = match prev_action {
                        Action::Continue => c,
                        Action::SwitchI(t) => field.at(t, j, k) - spec.costs.c(i, t),
                        Action::SwitchII(t) => field.at(i, t, k) + spec.costs.chi(j, t),
                    };
                    if prev_value == target {
                        prev_action
                    } else {
                        action
                    }
                }
                _ => action,
            };
            policy.set(p, k, action);
        }
    }
    policy
}

/// The three candidate values of a triple under the HJBI ordering, with
/// switch kinds optionally banned: `max( min(c, N?), M? )`.
struct Candidates {
    c: f64,
    m: f64,
    m_target: crate::game::RegimeIndex,
    nn: f64,
    n_target: crate::game::RegimeIndex,
}

impl Candidates {
    fn compute(
        spec: &GameSpec,
        gen: &DiscreteGenerator,
        field: &ValueField,
        pair: PairIndex,
        k: usize,
    ) -> Self {
        let (i, j) = pair.split(spec.q());
        let op = gen.op(pair);
        let values = field.pair_values(pair);
        let c = continuation_relaxation(op, gen.payoff(pair, k), spec.discount(), values, k);
        let (m, m_target) = obstacle_m(field, spec, k, i, j);
        let (nn, n_target) = obstacle_n(field, spec, k, i, j);
        Candidates { c, m, m_target, nn, n_target }
    }

    /// Greedy action with the given switch kinds allowed.
    fn select(&self, allow_i: bool, allow_ii: bool) -> (Action, f64) {
        let min_part = if allow_ii { self.c.min(self.nn) } else { self.c };
        if allow_i && self.m > min_part {
            (Action::SwitchI(self.m_target), self.m)
        } else if !allow_ii || self.c <= self.nn {
            (Action::Continue, self.c)
        } else {
            (Action::SwitchII(self.n_target), self.nn)
        }
    }
}

/// Breaks switch-action cycles that a transient greedy table can form at a
/// node. A cycle whose cost sum is zero is a realized free loop and aborts
/// the solve; otherwise the member whose switch has the smallest advantage
/// over its next-best action is demoted to that action (its switch kind is
/// banned at the node for this pass). Returns the number of demotions.
fn sanitize_policy(
    policy: &mut PolicyTable,
    spec: &GameSpec,
    gen: &DiscreteGenerator,
    field: &ValueField,
    grid: &Grid,
) -> Result<usize, SolverError> {
    let q = spec.q();
    let np = q * q;
    let mut demoted = 0usize;
    // per (pair) bans at the current node: (player I banned, player II banned)
    let mut bans = vec![(false, false); np];
    for k in 0..policy.n_nodes() {
        bans.iter_mut().for_each(|b| *b = (false, false));
        loop {
            let next = |p: usize| -> Option<usize> {
                let pair = PairIndex(p);
                let (i, j) = pair.split(q);
                match policy.get(pair, k) {
                    Action::Continue => None,
                    Action::SwitchI(t) => Some(PairIndex::new(t, j, q).0),
                    Action::SwitchII(t) => Some(PairIndex::new(i, t, q).0),
                }
            };
            let mut cycle: Option<Vec<usize>> = None;
            // colors: 0 unvisited, 1 on current chain, 2 finished
            let mut color = vec![0u8; np];
            'outer: for start in 0..np {
                if color[start] != 0 {
                    continue;
                }
                let mut chain = vec![start];
                color[start] = 1;
                let mut cur = start;
                while let Some(nxt) = next(cur) {
                    if color[nxt] == 1 {
                        let pos = chain.iter().position(|&v| v == nxt).unwrap();
                        cycle = Some(chain[pos..].to_vec());
                        break 'outer;
                    }
                    if color[nxt] == 2 {
                        break;
                    }
                    color[nxt] = 1;
                    chain.push(nxt);
                    cur = nxt;
                }
                for &v in &chain {
                    color[v] = 2;
                }
            }
            let Some(cycle) = cycle else { break };

            let mut cost_sum = 0.0;
            for &p in &cycle {
                let pair = PairIndex(p);
                let (i, j) = pair.split(q);
                match policy.get(pair, k) {
                    Action::SwitchI(t) => cost_sum -= spec.costs.c(i, t),
                    Action::SwitchII(t) => cost_sum += spec.costs.chi(j, t),
                    Action::Continue => unreachable!("cycle member must switch"),
                }
            }
            if cost_sum.abs() <= FREE_LOOP_TOL {
                let mut pairs: Vec<(usize, usize)> = cycle
                    .iter()
                    .map(|&p| {
                        let (i, j) = PairIndex(p).split(q);
                        (i.get(), j.get())
                    })
                    .collect();
                pairs.push(pairs[0]);
                return Err(SolverError::FreeLoopRealized {
                    node: k,
                    x: grid.node(k),
                    cycle: pairs,
                });
            }

            // Demote the member with the smallest margin between its current
            // switch and the best action with that switch kind banned.
            let mut weakest: Option<(f64, usize, Action)> = None;
            for &p in &cycle {
                let pair = PairIndex(p);
                let (i, j) = pair.split(q);
                let cand = Candidates::compute(spec, gen, field, pair, k);
                let (allow_i, allow_ii) = (!bans[p].0, !bans[p].1);
                let (cur_value, alt) = match policy.get(pair, k) {
                    Action::SwitchI(t) => (
                        field.at(t, j, k) - spec.costs.c(i, t),
                        cand.select(false, allow_ii),
                    ),
                    Action::SwitchII(t) => (
                        field.at(i, t, k) + spec.costs.chi(j, t),
                        cand.select(allow_i, false),
                    ),
                    Action::Continue => unreachable!("cycle member must switch"),
                };
                let margin = cur_value - alt.1;
                let better = match &weakest {
                    None => true,
                    Some((best, idx, _)) => margin < *best || (margin == *best && p < *idx),
                };
                if better {
                    weakest = Some((margin, p, alt.0));
                }
            }
            let (_, p, replacement) = weakest.expect("cycle is nonempty");
            match policy.get(PairIndex(p), k) {
                Action::SwitchI(_) => bans[p].0 = true,
                Action::SwitchII(_) => bans[p].1 = true,
                Action::Continue => {}
            }
            policy.set(PairIndex(p), k, replacement);
            demoted += 1;
        }
    }
    Ok(demoted)
}

/// In-place damped Gauss–Seidel sweeps `V ← V + ½(T(V) − V)` of the
/// obstacle-capped relaxation. Returns `(sweeps, last update, converged)`.
fn damped_sweeps(
    field: &mut ValueField,
    spec: &GameSpec,
    gen: &DiscreteGenerator,
    tol: f64,
    max_sweeps: usize,
) -> (usize, f64, bool) {
    let q = spec.q();
    let n = gen.n();
    let r = spec.discount();
    let mut update = f64::INFINITY;
    for sweep in 1..=max_sweeps {
        update = 0.0;
        for p in 0..q * q {
            let pair = PairIndex(p);
            let (i, j) = pair.split(q);
            let op = gen.op(pair);
            for k in 0..n {
                let c = {
                    let values = field.pair_values(pair);
                    continuation_relaxation(op, gen.payoff(pair, k), r, values, k)
                };
                let (m, _) = obstacle_m(field, spec, k, i, j);
                let (nn, _) = obstacle_n(field, spec, k, i, j);
                let target = m.max(c.min(nn));
                let old = field.get(pair, k);
                let new = old + 0.5 * (target - old);
                update = update.max((new - old).abs());
                field.set(pair, k, new);
            }
        }
        if update < tol {
            return (sweep, update, true);
        }
    }
    (max_sweeps, update, false)
}

/// Solves the discrete Isaacs system by Howard policy iteration.
///
/// Returns the value field satisfying the obstacle-capped fixed point at
/// every node, the final action table, and convergence diagnostics. The
/// solve fails if a zero-cost switch cycle is realized at a node, if the
/// induced linear system is singular, or if neither policy iteration nor
/// the damped fallback converges within budget.
pub fn howard_solve(
    spec: &GameSpec,
    grid: &Grid,
    tol: f64,
    max_iter: usize,
) -> Result<Solved, SolverError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let start = Instant::now();
    let gen = DiscreteGenerator::assemble(spec, grid)?;
    let q = spec.q();
    let n = grid.n();
    let r = spec.discount();

    let mut field = ValueField::from_fn(q, n, |p, k| gen.payoff(p, k) / r);
    let mut policy = greedy_policy(spec, &gen, &field, None);
    let mut demoted = sanitize_policy(&mut policy, spec, &gen, &field, grid)?;

    let mut seen = HashSet::new();
    seen.insert(policy.hash_value());

    let mut iterations = 0usize;
    let mut fallback_sweeps = 0usize;
    let mut rescues = 0usize;
    let mut last_update = f64::INFINITY;
    let mut best_update = f64::INFINITY;
    let mut stagnation = 0usize;
    let mut converged = false;

    while iterations < max_iter {
        iterations += 1;
        let system = PolicySystem {
            spec,
            gen: &gen,
            policy: &policy,
        };
        let u = solve_policy_system(&system)?;
        let new_field = vector_to_field(&u, q, n);
        if !new_field.is_finite() {
            return Err(SolverError::NonFiniteIterate { iteration: iterations });
        }
        last_update = new_field.sup_distance(&field);
        field = new_field;

        let mut new_policy = greedy_policy(spec, &gen, &field, Some(&policy));
        demoted += sanitize_policy(&mut new_policy, spec, &gen, &field, grid)?;
        let stable = new_policy == policy;
        if stable && last_update < tol {
            converged = true;
            break;
        }
        if last_update < 0.5 * best_update {
            best_update = last_update;
            stagnation = 0;
        } else {
            stagnation += 1;
        }
        let revisited = !stable && !seen.insert(new_policy.hash_value());
        if revisited || stagnation >= 12 {
            // Howard revisited an action table or stopped making progress.
            // Escape with damped sweeps toward the fixed point, then resume
            // policy iteration from the improved field.
            if rescues == 3 {
                break;
            }
            rescues += 1;
            stagnation = 0;
            best_update = f64::INFINITY;
            let (sweeps, _, _) = damped_sweeps(&mut field, spec, &gen, tol, DAMPED_SWEEP_CAP);
            fallback_sweeps += sweeps;
            new_policy = greedy_policy(spec, &gen, &field, None);
            demoted += sanitize_policy(&mut new_policy, spec, &gen, &field, grid)?;
            seen.clear();
            seen.insert(new_policy.hash_value());
        }
        policy = new_policy;
    }

    if !converged {
        return Err(SolverError::NotConverged {
            iterations,
            last_update,
            residual: residual::residual_with_gen(&field, spec, &gen, QviOrdering::Hjbi1),
        });
    }

    let res1 = residual::residual_with_gen(&field, spec, &gen, QviOrdering::Hjbi1);
    let res2 = residual::residual_with_gen(&field, spec, &gen, QviOrdering::Hjbi2);
    let report = SolveReport {
        iterations,
        fallback_sweeps,
        demoted_cycles: demoted,
        final_residual_hjbi1: res1,
        final_residual_hjbi2: res2,
        converged: res1 <= tol,
        wall_time: start.elapsed(),
    };
    Ok(Solved {
        field,
        policy,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{AffinePair, CoefficientModel, CostMatrices};

    /// Constant payoffs {5, 1, −1, −4}, prohibitive costs, zero dynamics.
    fn prohibitive_constant_spec() -> GameSpec {
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
        GameSpec::new(coeff, CostMatrices::uniform(2, 100.0, 100.0).unwrap(), 0.15).unwrap()
    }

    #[test]
    fn prohibitive_costs_give_f_over_r() {
        let spec = prohibitive_constant_spec();
        let grid = Grid::new(-5.0, 5.0, 101).unwrap();
        let solved = howard_solve(&spec, &grid, 1e-9, 200).unwrap();
        assert!(solved.report.converged);
        let expect = [5.0 / 0.15, 1.0 / 0.15, -1.0 / 0.15, -4.0 / 0.15];
        for (p, &want) in expect.iter().enumerate() {
            for k in 0..grid.n() {
                let got = solved.field.get(PairIndex(p), k);
                assert!(
                    (got - want).abs() < 1e-12,
                    "pair {p} node {k}: {got} vs {want}"
                );
            }
        }
        // policy is Continue everywhere
        for p in 0..4 {
            for k in 0..grid.n() {
                assert_eq!(solved.policy.get(PairIndex(p), k), Action::Continue);
            }
        }
    }

    #[test]
    fn minimal_three_node_grid_solves() {
        let spec = prohibitive_constant_spec();
        let grid = Grid::new(-1.0, 1.0, 3).unwrap();
        let solved = howard_solve(&spec, &grid, 1e-12, 50).unwrap();
        assert!(solved.report.converged);
        for p in 0..4 {
            for k in 0..3 {
                let want = [5.0, 1.0, -1.0, -4.0][p] / 0.15;
                assert!((solved.field.get(PairIndex(p), k) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_payoffs_solve_to_zero() {
        let mk = AffinePair {
            drift_const: 0.1,
            drift_slope: 0.0,
            vol_const: 0.3,
            vol_slope: 0.0,
            payoff_const: 0.0,
            payoff_slope: 0.0,
        };
        let coeff = CoefficientModel::uniform_affine(2, mk).unwrap();
        let spec =
            GameSpec::new(coeff, CostMatrices::uniform(2, 1.0, 1.0).unwrap(), 0.5).unwrap();
        let grid = Grid::new(-1.0, 1.0, 51).unwrap();
        let solved = howard_solve(&spec, &grid, 1e-10, 200).unwrap();
        for p in 0..4 {
            for k in 0..grid.n() {
                assert!(solved.field.get(PairIndex(p), k).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn report_invariant_converged_implies_residual_within_tol() {
        let spec = prohibitive_constant_spec();
        let grid = Grid::new(-2.0, 2.0, 51).unwrap();
        let solved = howard_solve(&spec, &grid, 1e-9, 200).unwrap();
        if solved.report.converged {
            assert!(solved.report.final_residual_hjbi1 <= 1e-9);
        }
    }

    #[test]
    fn free_loop_costs_error_out_when_realized() {
        // Zero dynamics, r = 1, payoffs chosen so the greedy step selects the
        // mixed 4-cycle (1,1)→(2,1)→(2,2)→(1,2)→(1,1) at every node. With
        // C = (2, 5) and χ = (−15, 22) the cycle's cost sum is exactly zero
        // even though the pairwise cost conditions hold.
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
            &[(1, 1, mk(0.0)), (1, 2, mk(30.0)), (2, 1, mk(10.0)), (2, 2, mk(20.0))],
        )
        .unwrap();
        let costs = CostMatrices::two_regime(2.0, 5.0, -15.0, 22.0).unwrap();
        assert!(crate::game::validate_costs(&costs).passed());
        let spec = GameSpec::new(coeff, costs, 1.0).unwrap();
        let grid = Grid::new(-1.0, 1.0, 11).unwrap();
        let result = howard_solve(&spec, &grid, 1e-9, 50);
        match result {
            Err(SolverError::FreeLoopRealized { cycle, .. }) => {
                assert_eq!(cycle.len(), 5, "expected a closed 4-cycle: {cycle:?}");
                assert_eq!(cycle.first(), cycle.last());
            }
            other => panic!("expected a realized free loop, got {other:?}"),
        }
    }
}
