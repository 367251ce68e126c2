//! Euler–Maruyama simulation of the controlled diffusion under the feedback
//! strategies read off a solved value field, and the Monte Carlo estimate of
//! the game payoff
//!
//! ```text
//! J = E[ ∫₀^∞ e^{−rs} f^{a b}(X_s) ds − Σ e^{−rτ_m} C(ξ_{m−1},ξ_m)
//!                                     + Σ e^{−rρ_n} χ(η_{n−1},η_n) ],
//! ```
//!
//! which the verification theorem equates to `V^{i0 j0}(x0)` under the
//! optimal strategies. The infinite horizon is truncated at `T` with a
//! reported discount-tail bound.
//!
//! Per-path randomness comes from a counter-based stream seeded with
//! `(base_seed, path_index)`, so estimates are independent of scheduling and
//! the degree of parallelism.

use crate::field::{Action, ValueField};
use crate::game::{estimate_growth_rate, GameSpec, RegimeIndex};
use crate::grid::Grid;
use crate::strategy::{policy_lookup, switch_ii_target};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum McError {
    #[error("{n_invalid} of {n_paths} paths diverged (more than 1% invalid)")]
    TooManyInvalid { n_invalid: usize, n_paths: usize },

    #[error("simulation needs at least one path")]
    NoPaths,
}

/// Simulation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    /// Truncation horizon `T`.
    pub horizon: f64,
    pub n_paths: usize,
    pub base_seed: u64,
    pub x0: f64,
    pub i0: RegimeIndex,
    pub j0: RegimeIndex,
    /// Obstacle-activity tolerance for the feedback policy.
    pub tol_active: f64,
}

impl SimConfig {
    pub fn n_steps(&self) -> usize {
        (self.horizon / self.dt).round().max(1.0) as usize
    }

    /// Stability guideline `dt ≤ h / max|b|`; returns the bound when the
    /// configured `dt` exceeds it.
    pub fn dt_guideline(&self, spec: &GameSpec, grid: &Grid) -> Option<f64> {
        let mut max_drift = 0.0_f64;
        for (i, j) in spec.pairs() {
            for k in 0..grid.n() {
                max_drift = max_drift.max(spec.coefficients.drift(i, j, grid.node(k)).abs());
            }
        }
        if max_drift == 0.0 {
            return None;
        }
        let bound = grid.h() / max_drift;
        (self.dt > bound).then_some(bound)
    }
}

/// Which player a ledger entry belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Player {
    I,
    II,
}

/// One switching-cost event on a path: signed and already discounted
/// (negative for player I's costs, positive for player II's).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerEntry {
    pub time: f64,
    pub player: Player,
    pub from: RegimeIndex,
    pub to: RegimeIndex,
    pub signed_discounted_cost: f64,
}

/// One simulated trajectory's discounted payoff decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPayoff {
    /// `∫ e^{−rs} f ds`: the integrand is frozen at the left endpoint of each
    /// step while the discount factor is integrated exactly over the step.
    pub discounted_running: f64,
    pub cost_ledger: Vec<LedgerEntry>,
    /// `discounted_running + Σ signed ledger entries`.
    pub total: f64,
    /// Policy lookups that had to clamp an out-of-domain state.
    pub clamped_lookups: usize,
}

/// Outcome of simulating one path.
#[derive(Debug, Clone, PartialEq)]
pub enum PathResult {
    Valid(PathPayoff),
    /// The Euler state became non-finite at the given step.
    Diverged { step: usize },
}

/// Simulates one path under the feedback strategies of the solved field.
///
/// Before each Euler step the policy is evaluated at the nearest node:
/// player I's switch is applied first, then player II's obstacle is
/// re-examined in the (possibly new) pair at the same instant — at most one
/// switch per player per step. Identical `(base_seed, path_index)` inputs
/// produce bitwise-identical results.
pub fn simulate_path(
    spec: &GameSpec,
    field: &ValueField,
    grid: &Grid,
    cfg: &SimConfig,
    path_index: u64,
) -> PathResult {
    let r = spec.discount();
    let dt = cfg.dt;
    let sqrt_dt = dt.sqrt();
    let disc_step = (-r * dt).exp();
    // exact per-step discount integral: ∫_t^{t+dt} e^{−r(s−t)} ds
    let quad_w = (1.0 - disc_step) / r;
    let n_steps = cfg.n_steps();

    let mut rng = ChaCha12Rng::seed_from_u64(cfg.base_seed);
    rng.set_stream(path_index);

    let mut x = cfg.x0;
    let mut regime_i = cfg.i0;
    let mut regime_j = cfg.j0;
    let mut disc = 1.0_f64;
    let mut running = 0.0_f64;
    let mut ledger: Vec<LedgerEntry> = Vec::new();
    let mut clamped = 0usize;

    for step in 0..n_steps {
        let t = step as f64 * dt;

        let lookup = policy_lookup(field, spec, grid, x, regime_i, regime_j, cfg.tol_active);
        if lookup.clamped {
            clamped += 1;
        }
        match lookup.action {
            Action::SwitchI(k) => {
                ledger.push(LedgerEntry {
                    time: t,
                    player: Player::I,
                    from: regime_i,
                    to: k,
                    signed_discounted_cost: -disc * spec.costs.c(regime_i, k),
                });
                regime_i = k;
                // player II re-examined in the new pair at the same instant
                let (node, _) = grid.nearest_node(x);
                if let Some(l) = switch_ii_target(field, spec, node, regime_i, regime_j, cfg.tol_active)
                {
                    ledger.push(LedgerEntry {
                        time: t,
                        player: Player::II,
                        from: regime_j,
                        to: l,
                        signed_discounted_cost: disc * spec.costs.chi(regime_j, l),
                    });
                    regime_j = l;
                }
            }
            Action::SwitchII(l) => {
                ledger.push(LedgerEntry {
                    time: t,
                    player: Player::II,
                    from: regime_j,
                    to: l,
                    signed_discounted_cost: disc * spec.costs.chi(regime_j, l),
                });
                regime_j = l;
            }
            Action::Continue => {}
        }

        running += disc * quad_w * spec.coefficients.payoff(regime_i, regime_j, x);

        let z: f64 = StandardNormal.sample(&mut rng);
        x += spec.coefficients.drift(regime_i, regime_j, x) * dt
            + spec.coefficients.vol(regime_i, regime_j, x) * sqrt_dt * z;
        if !x.is_finite() {
            return PathResult::Diverged { step };
        }
        disc *= disc_step;
    }

    let switch_total: f64 = pairwise_sum(
        &ledger
            .iter()
            .map(|e| e.signed_discounted_cost)
            .collect::<Vec<_>>(),
    );
    PathResult::Valid(PathPayoff {
        discounted_running: running,
        total: running + switch_total,
        cost_ledger: ledger,
        clamped_lookups: clamped,
    })
}

/// Monte Carlo estimate of the game value at `(x0, i0, j0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_valid: usize,
    pub n_invalid: usize,
    /// Analytic bound on the truncated discount tail.
    pub tail_bound: f64,
}

/// Simulates all configured paths in parallel, results indexed by path so
/// the output does not depend on scheduling.
pub fn simulate_paths(
    spec: &GameSpec,
    field: &ValueField,
    grid: &Grid,
    cfg: &SimConfig,
) -> Vec<PathResult> {
    (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|path| simulate_path(spec, field, grid, cfg, path))
        .collect()
}

/// Reduces simulated paths to a mean and standard error with pairwise
/// summation. More than 1% divergent paths aborts the estimate.
pub fn estimate_from_results(
    results: &[PathResult],
    tail_bound: f64,
) -> Result<ValueEstimate, McError> {
    if results.is_empty() {
        return Err(McError::NoPaths);
    }
    let totals: Vec<f64> = results
        .iter()
        .filter_map(|r| match r {
            PathResult::Valid(p) => Some(p.total),
            PathResult::Diverged { .. } => None,
        })
        .collect();
    let n_valid = totals.len();
    let n_invalid = results.len() - n_valid;
    if n_invalid * 100 > results.len() {
        return Err(McError::TooManyInvalid {
            n_invalid,
            n_paths: results.len(),
        });
    }

    let mean = pairwise_sum(&totals) / n_valid as f64;
    let sq_dev: Vec<f64> = totals.iter().map(|t| (t - mean) * (t - mean)).collect();
    let std_error = if n_valid > 1 {
        (pairwise_sum(&sq_dev) / (n_valid - 1) as f64 / n_valid as f64).sqrt()
    } else {
        0.0
    };

    Ok(ValueEstimate {
        mean,
        std_error,
        n_valid,
        n_invalid,
        tail_bound,
    })
}

/// Simulates `n_paths` independent paths and reduces them to a mean and
/// standard error; the estimate is invariant to the degree of parallelism.
pub fn estimate_value(
    spec: &GameSpec,
    field: &ValueField,
    grid: &Grid,
    cfg: &SimConfig,
) -> Result<ValueEstimate, McError> {
    if cfg.n_paths == 0 {
        return Err(McError::NoPaths);
    }
    let results = simulate_paths(spec, field, grid, cfg);
    estimate_from_results(&results, tail_bound(spec, grid, cfg))
}

/// Analytic bound on the payoff mass beyond the truncation horizon:
/// `∫_T^∞ e^{−rs} C_f (1 + E|X_s|) ds` with `E|X_s| ≤ e^{ρs}(1+|x0|)`,
/// using the grid-sampled growth constant of `f` and growth rate `ρ`.
pub fn tail_bound(spec: &GameSpec, grid: &Grid, cfg: &SimConfig) -> f64 {
    let r = spec.discount();
    let nodes = grid.nodes();
    let growth_f = spec.coefficients.report(&nodes).growth;
    let rho = estimate_growth_rate(spec, &nodes);
    if r <= rho {
        return f64::INFINITY;
    }
    let t = cfg.n_steps() as f64 * cfg.dt;
    growth_f
        * ((-r * t).exp() / r
            + (1.0 + cfg.x0.abs()) * (-(r - rho) * t).exp() / (r - rho))
}

/// Sum with pairwise splitting: deterministic and accurate regardless of how
/// the inputs were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}
