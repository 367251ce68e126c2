//! Node-indexed value fields and action tables over regime pairs.
//!
//! A [`ValueField`] stores one real value per `(i, j, node)` triple, i.e. the
//! q×q family of grid functions approximating the game value `V^{ij}`. A
//! [`PolicyTable`] stores the action chosen at each triple by the policy
//! iteration.

use crate::game::RegimeIndex;

/// Flat index of a regime pair `(i, j)` in row-major order (`i` outer).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairIndex(pub usize);

impl PairIndex {
    pub fn new(i: RegimeIndex, j: RegimeIndex, q: usize) -> Self {
        PairIndex((i.get() - 1) * q + (j.get() - 1))
    }

    /// Recovers the `(i, j)` regime indices for regime count `q`.
    pub fn split(self, q: usize) -> (RegimeIndex, RegimeIndex) {
        (
            RegimeIndex::unchecked(self.0 / q + 1),
            RegimeIndex::unchecked(self.0 % q + 1),
        )
    }

    /// Column label in the `V{i}{j}` style used by CSV headers and plots.
    pub fn label(self, q: usize) -> String {
        let (i, j) = self.split(q);
        format!("V{}{}", i.get(), j.get())
    }
}

/// Per-node, per-pair values of the q×q family of functions on a grid.
///
/// Layout is pair-major: the `n` values of a pair are contiguous, which keeps
/// tridiagonal sweeps over one pair cache-friendly.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueField {
    q: usize,
    n: usize,
    data: Vec<f64>,
}

impl ValueField {
    /// A field of zeros for `q` regimes over `n` nodes.
    pub fn zeros(q: usize, n: usize) -> Self {
        ValueField {
            q,
            n,
            data: vec![0.0; q * q * n],
        }
    }

    pub fn from_fn(q: usize, n: usize, mut f: impl FnMut(PairIndex, usize) -> f64) -> Self {
        let mut field = ValueField::zeros(q, n);
        for p in 0..q * q {
            for k in 0..n {
                field.data[p * n + k] = f(PairIndex(p), k);
            }
        }
        field
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn n_pairs(&self) -> usize {
        self.q * self.q
    }

    #[inline]
    pub fn get(&self, pair: PairIndex, node: usize) -> f64 {
        self.data[pair.0 * self.n + node]
    }

    #[inline]
    pub fn set(&mut self, pair: PairIndex, node: usize, value: f64) {
        self.data[pair.0 * self.n + node] = value;
    }

    #[inline]
    pub fn at(&self, i: RegimeIndex, j: RegimeIndex, node: usize) -> f64 {
        self.get(PairIndex::new(i, j, self.q), node)
    }

    /// The `n` values of one pair as a slice.
    pub fn pair_values(&self, pair: PairIndex) -> &[f64] {
        &self.data[pair.0 * self.n..(pair.0 + 1) * self.n]
    }

    pub fn iter_pairs(&self) -> impl Iterator<Item = PairIndex> {
        (0..self.q * self.q).map(PairIndex)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Sup-norm distance to another field of identical shape.
    pub fn sup_distance(&self, other: &ValueField) -> f64 {
        assert_eq!(self.data.len(), other.data.len(), "field shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest discrete slope `|V(x_{k+1}) − V(x_k)| / h` over all pairs.
    pub fn max_slope(&self, h: f64) -> f64 {
        let mut worst = 0.0_f64;
        for p in 0..self.q * self.q {
            let row = &self.data[p * self.n..(p + 1) * self.n];
            for w in row.windows(2) {
                worst = worst.max((w[1] - w[0]).abs() / h);
            }
        }
        worst
    }
}

/// Action of the discrete control problem at one `(i, j, node)` triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    /// Stay in the current pair; the PDE row applies.
    Continue,
    /// Player I switches the first coordinate to the given regime.
    SwitchI(RegimeIndex),
    /// Player II switches the second coordinate to the given regime.
    SwitchII(RegimeIndex),
}

/// Per-node, per-pair action table produced by the policy iteration.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolicyTable {
    q: usize,
    n: usize,
    actions: Vec<Action>,
}

impl PolicyTable {
    pub fn all_continue(q: usize, n: usize) -> Self {
        PolicyTable {
            q,
            n,
            actions: vec![Action::Continue; q * q * n],
        }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, pair: PairIndex, node: usize) -> Action {
        self.actions[pair.0 * self.n + node]
    }

    #[inline]
    pub fn set(&mut self, pair: PairIndex, node: usize, action: Action) {
        self.actions[pair.0 * self.n + node] = action;
    }

    /// Checks that switch targets always differ from the current coordinate.
    pub fn targets_valid(&self) -> bool {
        (0..self.q * self.q).all(|p| {
            let (i, j) = PairIndex(p).split(self.q);
            (0..self.n).all(|k| match self.get(PairIndex(p), k) {
                Action::Continue => true,
                Action::SwitchI(t) => t != i && t.get() <= self.q,
                Action::SwitchII(t) => t != j && t.get() <= self.q,
            })
        })
    }

    pub fn hash_value(&self) -> u64 {
        use std::collections::hash_map::DefaultHasher;
        use std::hash::{Hash, Hasher};
        let mut hasher = DefaultHasher::new();
        self.actions.hash(&mut hasher);
        hasher.finish()
    }
}
