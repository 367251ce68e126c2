//! Region decomposition of a solved field, switching-threshold extraction,
//! and the feedback realization of the optimal strategies.
//!
//! For each pair `(i, j)` the grid splits into four regions by obstacle
//! activity: the continuation region `𝒞` (neither obstacle binds and the PDE
//! row holds), `ℐ₁` (only the maximizer's obstacle `M` binds — player I
//! switches), `ℐ₂` (only `N` binds — player II switches) and `ℐ₃` (both
//! bind). Where both bind, player I's switch is applied first and player II's
//! obstacle is re-examined in the new pair at the same instant, so an `ℐ₃`
//! node realizes a combined jump that changes both coordinates.

use crate::field::{Action, ValueField};
use crate::game::{obstacle_m, obstacle_n, GameSpec, RegimeIndex};
use crate::generator::DiscreteGenerator;
use crate::grid::Grid;

/// Default absolute tolerance for treating an obstacle as active: three
/// orders of magnitude above the default solver tolerance.
pub const DEFAULT_TOL_ACTIVE: f64 = 1e-6;

/// Region label of one `(i, j, node)` triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionLabel {
    /// Neither obstacle active; the PDE row holds.
    Continuation,
    /// Only `M` active: player I switches.
    PlayerISwitch,
    /// Only `N` active: player II switches.
    PlayerIISwitch,
    /// Both obstacles active.
    BothSwitch,
}

impl RegionLabel {
    pub fn short(self) -> &'static str {
        match self {
            RegionLabel::Continuation => "continuation",
            RegionLabel::PlayerISwitch => "switch_i",
            RegionLabel::PlayerIISwitch => "switch_ii",
            RegionLabel::BothSwitch => "both",
        }
    }
}

/// Region classification of every `(i, j, node)` triple of a solved field.
#[derive(Debug, Clone)]
pub struct RegionMap {
    q: usize,
    n: usize,
    labels: Vec<RegionLabel>,
    /// Realized transition target per triple; `None` on continuation nodes.
    targets: Vec<Option<(RegimeIndex, RegimeIndex)>>,
    /// Largest `|rV − LV − f|` observed on continuation nodes.
    pub max_continuation_residual: f64,
}

impl RegionMap {
    fn idx(&self, pair: crate::field::PairIndex, node: usize) -> usize {
        pair.0 * self.n + node
    }

    pub fn label(&self, pair: crate::field::PairIndex, node: usize) -> RegionLabel {
        self.labels[self.idx(pair, node)]
    }

    /// The transition `(k, l)` realized at the node, combining both players'
    /// moves on `ℐ₃` nodes; `None` where the game continues.
    pub fn target(
        &self,
        pair: crate::field::PairIndex,
        node: usize,
    ) -> Option<(RegimeIndex, RegimeIndex)> {
        self.targets[self.idx(pair, node)]
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }
}

/// Obstacle activity of one triple under an absolute tolerance.
struct Activity {
    m_active: bool,
    m_target: RegimeIndex,
    n_active: bool,
    n_target: RegimeIndex,
}

fn activity(
    field: &ValueField,
    spec: &GameSpec,
    node: usize,
    i: RegimeIndex,
    j: RegimeIndex,
    tol: f64,
) -> Activity {
    let v = field.at(i, j, node);
    let (m, m_target) = obstacle_m(field, spec, node, i, j);
    let (nn, n_target) = obstacle_n(field, spec, node, i, j);
    Activity {
        m_active: v - m <= tol,
        m_target,
        n_active: nn - v <= tol,
        n_target,
    }
}

/// Labels every node of every pair by obstacle activity within `tol_active`
/// and records the realized transition target.
pub fn classify_regions(
    field: &ValueField,
    spec: &GameSpec,
    grid: &Grid,
    tol_active: f64,
) -> RegionMap {
    let q = spec.q();
    let n = grid.n();
    let gen = DiscreteGenerator::assemble(spec, grid).expect("coefficients must be finite");
    let r = spec.discount();
    let mut labels = vec![RegionLabel::Continuation; q * q * n];
    let mut targets: Vec<Option<(RegimeIndex, RegimeIndex)>> = vec![None; q * q * n];
    let mut max_cont_residual = 0.0_f64;

    for p in field.iter_pairs() {
        let (i, j) = p.split(q);
        let op = gen.op(p);
        let values = field.pair_values(p);
        for k in 0..n {
            let act = activity(field, spec, k, i, j, tol_active);
            let idx = p.0 * n + k;
            let (label, target) = match (act.m_active, act.n_active) {
                (false, false) => {
                    let pde = r * values[k] - op.apply_row(values, k) - gen.payoff(p, k);
                    max_cont_residual = max_cont_residual.max(pde.abs());
                    (RegionLabel::Continuation, None)
                }
                (true, false) => (RegionLabel::PlayerISwitch, Some((act.m_target, j))),
                (false, true) => (RegionLabel::PlayerIISwitch, Some((i, act.n_target))),
                (true, true) => {
                    // player I moves first, player II re-examined at (k*, j)
                    let after = activity(field, spec, k, act.m_target, j, tol_active);
                    let to = if after.n_active {
                        (act.m_target, after.n_target)
                    } else {
                        (act.m_target, j)
                    };
                    (RegionLabel::BothSwitch, Some(to))
                }
            };
            labels[idx] = label;
            targets[idx] = target;
        }
    }

    RegionMap {
        q,
        n,
        labels,
        targets,
        max_continuation_residual: max_cont_residual,
    }
}

/// Maximal intervals on which one transition is the realized action.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchSet {
    pub from: (RegimeIndex, RegimeIndex),
    pub to: (RegimeIndex, RegimeIndex),
    /// Disjoint, sorted `[lo, hi]` intervals of grid nodes (as coordinates).
    pub intervals: Vec<(f64, f64)>,
}

impl SwitchSet {
    /// True when some interval reaches the left (resp. right) end of the grid.
    pub fn touches_boundary(&self, grid: &Grid) -> (bool, bool) {
        let left = self
            .intervals
            .first()
            .is_some_and(|&(lo, _)| lo <= grid.x_min() + grid.h() / 2.0);
        let right = self
            .intervals
            .last()
            .is_some_and(|&(_, hi)| hi >= grid.x_max() - grid.h() / 2.0);
        (left, right)
    }
}

/// Extracts the realized switch sets of a solved field: for every source pair
/// and transition target, the maximal node intervals where that transition is
/// the acted one (player I's target on `ℐ₁`, player II's on `ℐ₂`, and the
/// combined two-coordinate jump on `ℐ₃`). Interval endpoints are reported at
/// grid resolution.
///
/// Note the distinction from [`equality_intervals`]: the defining equality
/// `V^{ij} = V^{kl} − C(i,k) + χ(j,l)` can hold by transitivity through a
/// chain of active obstacles on nodes where the transition is not the one
/// acted, so raw equality sets can strictly contain the acted sets.
pub fn extract_switch_sets(
    field: &ValueField,
    spec: &GameSpec,
    grid: &Grid,
    tol_active: f64,
) -> Vec<SwitchSet> {
    let regions = classify_regions(field, spec, grid, tol_active);
    let q = spec.q();
    let mut sets: Vec<SwitchSet> = Vec::new();
    for p in field.iter_pairs() {
        let from = p.split(q);
        let mut run: Option<((RegimeIndex, RegimeIndex), usize, usize)> = None;
        for k in 0..=grid.n() {
            let target = if k < grid.n() { regions.target(p, k) } else { None };
            match (&mut run, target) {
                (Some((to, _, hi)), Some(t)) if *to == t => *hi = k,
                (run_slot, t) => {
                    if let Some((to, lo, hi)) = run_slot.take() {
                        push_interval(&mut sets, from, to, grid.node(lo), grid.node(hi));
                    }
                    *run_slot = t.map(|to| (to, k, k));
                }
            }
        }
    }
    sets.sort_by_key(|s| {
        (
            s.from.0.get(),
            s.from.1.get(),
            s.to.0.get(),
            s.to.1.get(),
        )
    });
    sets
}

fn push_interval(
    sets: &mut Vec<SwitchSet>,
    from: (RegimeIndex, RegimeIndex),
    to: (RegimeIndex, RegimeIndex),
    lo: f64,
    hi: f64,
) {
    if let Some(set) = sets.iter_mut().find(|s| s.from == from && s.to == to) {
        set.intervals.push((lo, hi));
        set.intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    } else {
        sets.push(SwitchSet {
            from,
            to,
            intervals: vec![(lo, hi)],
        });
    }
}

/// Maximal intervals where the raw defining equality
/// `V^{from} = V^{to} − C(i,k) + χ(j,l)` holds within `tol` (zero-diagonal
/// convention for an unchanged coordinate).
pub fn equality_intervals(
    field: &ValueField,
    spec: &GameSpec,
    grid: &Grid,
    from: (RegimeIndex, RegimeIndex),
    to: (RegimeIndex, RegimeIndex),
    tol: f64,
) -> Vec<(f64, f64)> {
    let (i, j) = from;
    let (k, l) = to;
    let c = if i != k { spec.costs.c(i, k) } else { 0.0 };
    let chi = if j != l { spec.costs.chi(j, l) } else { 0.0 };
    let mut intervals = Vec::new();
    let mut run: Option<(usize, usize)> = None;
    for node in 0..=grid.n() {
        let holds = node < grid.n() && {
            let lhs = field.at(i, j, node);
            let rhs = field.at(k, l, node) - c + chi;
            (lhs - rhs).abs() <= tol
        };
        match (&mut run, holds) {
            (Some((_, hi)), true) => *hi = node,
            (slot, holds) => {
                if let Some((lo, hi)) = slot.take() {
                    intervals.push((grid.node(lo), grid.node(hi)));
                }
                if holds {
                    *slot = Some((node, node));
                }
            }
        }
    }
    intervals
}

/// Feedback policy decision at a state, evaluated at the nearest grid node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lookup {
    pub action: Action,
    /// Set when `x` lay outside the grid and was clamped.
    pub clamped: bool,
}

/// Evaluates the obstacles at the node nearest to `x`: if `M` binds the
/// action is player I's switch to the argmax; otherwise if `N` binds it is
/// player II's switch to the argmin; otherwise the game continues. Player I
/// is checked first, which realizes the `ℐ₃` precedence.
pub fn policy_lookup(
    field: &ValueField,
    spec: &GameSpec,
    grid: &Grid,
    x: f64,
    i: RegimeIndex,
    j: RegimeIndex,
    tol_active: f64,
) -> Lookup {
    let (node, clamped) = grid.nearest_node(x);
    let act = activity(field, spec, node, i, j, tol_active);
    let action = if act.m_active {
        Action::SwitchI(act.m_target)
    } else if act.n_active {
        Action::SwitchII(act.n_target)
    } else {
        Action::Continue
    };
    Lookup { action, clamped }
}

/// Player II's switch target at the node if the upper obstacle binds.
/// Used by the simulation to re-examine player II after a player-I switch
/// at the same instant.
pub fn switch_ii_target(
    field: &ValueField,
    spec: &GameSpec,
    node: usize,
    i: RegimeIndex,
    j: RegimeIndex,
    tol_active: f64,
) -> Option<RegimeIndex> {
    let act = activity(field, spec, node, i, j, tol_active);
    act.n_active.then_some(act.n_target)
}
