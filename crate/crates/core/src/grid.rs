//! Truncated uniform 1-D mesh on which all fields live.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid bounds [{x_min}, {x_max}] are not finite and increasing")]
    BadBounds { x_min: f64, x_max: f64 },

    #[error("grid needs at least 3 nodes, got {0}")]
    TooFewNodes(usize),
}

/// Uniform grid `x_k = x_min + k·h`, `k = 0..n−1`, `h = (x_max−x_min)/(n−1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n: usize,
    h: f64,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self, GridError> {
        if !x_min.is_finite() || !x_max.is_finite() || x_min >= x_max {
            return Err(GridError::BadBounds { x_min, x_max });
        }
        if n < 3 {
            return Err(GridError::TooFewNodes(n));
        }
        let h = (x_max - x_min) / (n - 1) as f64;
        Ok(Grid { x_min, x_max, n, h })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Mesh spacing `h > 0`.
    pub fn h(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn node(&self, k: usize) -> f64 {
        debug_assert!(k < self.n);
        self.x_min + k as f64 * self.h
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.node(k)).collect()
    }

    /// Index of the node nearest to `x`, clamping to the domain.
    /// The flag reports whether `x` lay outside `[x_min, x_max]`.
    pub fn nearest_node(&self, x: f64) -> (usize, bool) {
        if x < self.x_min {
            return (0, true);
        }
        if x > self.x_max {
            return (self.n - 1, true);
        }
        let k = ((x - self.x_min) / self.h).round() as usize;
        (k.min(self.n - 1), false)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }
}
