//! Domain types for the switching game and validators for its standing
//! assumptions: Lipschitz/linear-growth coefficients, triangular and
//! back-and-forth cost conditions, and the no-free-loop property.

mod coefficients;
mod costs;
mod obstacles;
mod spec;

pub use coefficients::{AffinePair, CoefficientModel, CoefficientReport, GbmPair, TabulatedPair};
pub use costs::{
    validate_costs, validate_no_free_loop, CostMatrices, Finding, Severity, ValidationReport,
};
pub use obstacles::{obstacle_m, obstacle_n};
pub use spec::{estimate_growth_rate, GameSpec};

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Errors raised while building or validating a game specification.
#[derive(Debug, Error)]
pub enum GameError {
    #[error("regime count q={0} is invalid: the game needs at least two regimes")]
    TooFewRegimes(usize),

    #[error("regime index {value} out of range 1..={q}")]
    RegimeOutOfRange { value: usize, q: usize },

    #[error("cost matrix {name} has shape {rows}x{cols}, expected {q}x{q}")]
    CostShape {
        name: &'static str,
        rows: usize,
        cols: usize,
        q: usize,
    },

    #[error("cost matrix {name} has nonzero diagonal entry {value} at ({i},{i})")]
    NonzeroDiagonal {
        name: &'static str,
        i: usize,
        value: f64,
    },

    #[error("cost matrix {name} entry ({i},{j}) is not finite")]
    NonFiniteCost {
        name: &'static str,
        i: usize,
        j: usize,
    },

    #[error("discount rate r={0} must be positive and finite")]
    BadDiscount(f64),

    #[error("coefficient table misses regime pair ({i},{j})")]
    MissingPair { i: usize, j: usize },

    #[error("coefficient table key {key:?} is not a valid \"i,j\" pair for q={q}")]
    BadPairKey { key: String, q: usize },

    #[error("tabulated coefficients for pair ({i},{j}): {reason}")]
    BadTable { i: usize, j: usize, reason: String },
}

/// One-based regime index in `{1, …, q}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RegimeIndex(usize);

impl RegimeIndex {
    /// Validates `1 ≤ value ≤ q` (and `q ≥ 2`).
    pub fn new(value: usize, q: usize) -> Result<Self, GameError> {
        if q < 2 {
            return Err(GameError::TooFewRegimes(q));
        }
        if value < 1 || value > q {
            return Err(GameError::RegimeOutOfRange { value, q });
        }
        Ok(RegimeIndex(value))
    }

    /// Wraps a value that is known to be in range.
    pub fn unchecked(value: usize) -> Self {
        debug_assert!(value >= 1);
        RegimeIndex(value)
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// Zero-based index for array addressing.
    pub fn index0(self) -> usize {
        self.0 - 1
    }

    /// All regimes `1..=q`.
    pub fn all(q: usize) -> impl Iterator<Item = RegimeIndex> {
        (1..=q).map(RegimeIndex)
    }

    /// All regimes other than `self`.
    pub fn others(self, q: usize) -> impl Iterator<Item = RegimeIndex> {
        let me = self.0;
        (1..=q).filter(move |&r| r != me).map(RegimeIndex)
    }
}

impl fmt::Display for RegimeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
