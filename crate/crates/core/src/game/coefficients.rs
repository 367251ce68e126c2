//! Per-regime-pair drift, volatility and payoff coefficients.
//!
//! The state follows `dX = b^{ij}(X) dt + σ^{ij}(X) dW` while the regime pair
//! is `(i, j)`, and the running payoff accrues at rate `f^{ij}(X)`. All three
//! families must be Lipschitz with linear growth on the truncated domain;
//! [`CoefficientModel::report`] estimates the constants on a node sample.

use super::{GameError, RegimeIndex};
use crate::field::PairIndex;

/// Affine coefficients `g(x) = g0 + g1·x` for one regime pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffinePair {
    pub drift_const: f64,
    pub drift_slope: f64,
    pub vol_const: f64,
    pub vol_slope: f64,
    pub payoff_const: f64,
    pub payoff_slope: f64,
}

/// Geometric-Brownian coefficients `b(x) = b·x`, `σ(x) = σ·x`, `f(x) = c·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmPair {
    pub drift: f64,
    pub vol: f64,
    pub payoff_slope: f64,
}

/// Sampled coefficients on a strictly increasing abscissa table.
///
/// Evaluation interpolates linearly inside the table and extrapolates with
/// the boundary value outside, which preserves the Lipschitz bound.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedPair {
    pub xs: Vec<f64>,
    pub drift: Vec<f64>,
    pub vol: Vec<f64>,
    pub payoff: Vec<f64>,
}

impl TabulatedPair {
    fn check(&self, i: usize, j: usize) -> Result<(), GameError> {
        let m = self.xs.len();
        let bad = |reason: &str| GameError::BadTable {
            i,
            j,
            reason: reason.to_string(),
        };
        if m < 2 {
            return Err(bad("needs at least two abscissae"));
        }
        if self.drift.len() != m || self.vol.len() != m || self.payoff.len() != m {
            return Err(bad("drift/vol/payoff length must match xs"));
        }
        if !self.xs.windows(2).all(|w| w[0] < w[1]) {
            return Err(bad("xs must be strictly increasing"));
        }
        let all = self
            .xs
            .iter()
            .chain(&self.drift)
            .chain(&self.vol)
            .chain(&self.payoff);
        if !all.clone().all(|v| v.is_finite()) {
            return Err(bad("all entries must be finite"));
        }
        Ok(())
    }

    fn eval(&self, values: &[f64], x: f64) -> f64 {
        let xs = &self.xs;
        if x <= xs[0] {
            return values[0];
        }
        if x >= xs[xs.len() - 1] {
            return values[values.len() - 1];
        }
        let hi = xs.partition_point(|&t| t <= x);
        let (x0, x1) = (xs[hi - 1], xs[hi]);
        let w = (x - x0) / (x1 - x0);
        values[hi - 1] * (1.0 - w) + values[hi] * w
    }
}

/// The coefficient family of a game, one entry per regime pair.
#[derive(Debug, Clone, PartialEq)]
pub enum CoefficientModel {
    AffineDrift { q: usize, pairs: Vec<AffinePair> },
    GeometricBrownian { q: usize, pairs: Vec<GbmPair> },
    Tabulated { q: usize, pairs: Vec<TabulatedPair> },
}

/// Grid-sampled Lipschitz and growth constants of a coefficient model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientReport {
    /// `max_{ij} max_k |b(x_{k+1}) − b(x_k)| / h`.
    pub lipschitz_drift: f64,
    pub lipschitz_vol: f64,
    pub lipschitz_payoff: f64,
    /// Smallest `C` with `|b|, |σ|, |f| ≤ C(1+|x|)` on the sample.
    pub growth: f64,
}

impl CoefficientModel {
    /// Uniform affine coefficients: every pair shares the same dynamics.
    pub fn uniform_affine(q: usize, pair: AffinePair) -> Result<Self, GameError> {
        if q < 2 {
            return Err(GameError::TooFewRegimes(q));
        }
        Ok(CoefficientModel::AffineDrift {
            q,
            pairs: vec![pair; q * q],
        })
    }

    /// Builds an affine model from `(i, j, params)` entries covering all pairs.
    pub fn affine_from_pairs(
        q: usize,
        entries: &[(usize, usize, AffinePair)],
    ) -> Result<Self, GameError> {
        let pairs = collect_pairs(q, entries)?;
        Ok(CoefficientModel::AffineDrift { q, pairs })
    }

    pub fn gbm_from_pairs(q: usize, entries: &[(usize, usize, GbmPair)]) -> Result<Self, GameError> {
        let pairs = collect_pairs(q, entries)?;
        Ok(CoefficientModel::GeometricBrownian { q, pairs })
    }

    pub fn tabulated_from_pairs(
        q: usize,
        entries: &[(usize, usize, TabulatedPair)],
    ) -> Result<Self, GameError> {
        let pairs = collect_pairs(q, entries)?;
        if let Some((p, pair)) = pairs.iter().enumerate().next() {
            let _ = (p, pair);
        }
        for (p, pair) in pairs.iter().enumerate() {
            let (i, j) = PairIndex(p).split(q);
            pair.check(i.get(), j.get())?;
        }
        Ok(CoefficientModel::Tabulated { q, pairs })
    }

    pub fn q(&self) -> usize {
        match self {
            CoefficientModel::AffineDrift { q, .. } => *q,
            CoefficientModel::GeometricBrownian { q, .. } => *q,
            CoefficientModel::Tabulated { q, .. } => *q,
        }
    }

    /// Drift `b^{ij}(x)`.
    #[inline]
    pub fn drift(&self, i: RegimeIndex, j: RegimeIndex, x: f64) -> f64 {
        let p = PairIndex::new(i, j, self.q()).0;
        match self {
            CoefficientModel::AffineDrift { pairs, .. } => {
                let c = &pairs[p];
                c.drift_const + c.drift_slope * x
            }
            CoefficientModel::GeometricBrownian { pairs, .. } => pairs[p].drift * x,
            CoefficientModel::Tabulated { pairs, .. } => pairs[p].eval(&pairs[p].drift, x),
        }
    }

    /// Volatility `σ^{ij}(x)`.
    #[inline]
    pub fn vol(&self, i: RegimeIndex, j: RegimeIndex, x: f64) -> f64 {
        let p = PairIndex::new(i, j, self.q()).0;
        match self {
            CoefficientModel::AffineDrift { pairs, .. } => {
                let c = &pairs[p];
                c.vol_const + c.vol_slope * x
            }
            CoefficientModel::GeometricBrownian { pairs, .. } => pairs[p].vol * x,
            CoefficientModel::Tabulated { pairs, .. } => pairs[p].eval(&pairs[p].vol, x),
        }
    }

    /// Running payoff rate `f^{ij}(x)`.
    #[inline]
    pub fn payoff(&self, i: RegimeIndex, j: RegimeIndex, x: f64) -> f64 {
        let p = PairIndex::new(i, j, self.q()).0;
        match self {
            CoefficientModel::AffineDrift { pairs, .. } => {
                let c = &pairs[p];
                c.payoff_const + c.payoff_slope * x
            }
            CoefficientModel::GeometricBrownian { pairs, .. } => pairs[p].payoff_slope * x,
            CoefficientModel::Tabulated { pairs, .. } => pairs[p].eval(&pairs[p].payoff, x),
        }
    }

    /// Estimates Lipschitz and linear-growth constants on the given nodes.
    pub fn report(&self, nodes: &[f64]) -> CoefficientReport {
        let q = self.q();
        let mut lip = [0.0_f64; 3];
        let mut growth = 0.0_f64;
        for i in RegimeIndex::all(q) {
            for j in RegimeIndex::all(q) {
                for w in nodes.windows(2) {
                    let h = w[1] - w[0];
                    let fns = [
                        (self.drift(i, j, w[0]), self.drift(i, j, w[1])),
                        (self.vol(i, j, w[0]), self.vol(i, j, w[1])),
                        (self.payoff(i, j, w[0]), self.payoff(i, j, w[1])),
                    ];
                    for (slot, (a, b)) in fns.iter().enumerate() {
                        lip[slot] = lip[slot].max((b - a).abs() / h);
                    }
                }
                for &x in nodes {
                    let scale = 1.0 + x.abs();
                    growth = growth
                        .max(self.drift(i, j, x).abs() / scale)
                        .max(self.vol(i, j, x).abs() / scale)
                        .max(self.payoff(i, j, x).abs() / scale);
                }
            }
        }
        CoefficientReport {
            lipschitz_drift: lip[0],
            lipschitz_vol: lip[1],
            lipschitz_payoff: lip[2],
            growth,
        }
    }
}

fn collect_pairs<T: Clone>(q: usize, entries: &[(usize, usize, T)]) -> Result<Vec<T>, GameError> {
    if q < 2 {
        return Err(GameError::TooFewRegimes(q));
    }
    let mut slots: Vec<Option<T>> = vec![None; q * q];
    for (i, j, value) in entries {
        let ri = RegimeIndex::new(*i, q)?;
        let rj = RegimeIndex::new(*j, q)?;
        slots[PairIndex::new(ri, rj, q).0] = Some(value.clone());
    }
    slots
        .into_iter()
        .enumerate()
        .map(|(p, slot)| {
            slot.ok_or_else(|| {
                let (i, j) = PairIndex(p).split(q);
                GameError::MissingPair {
                    i: i.get(),
                    j: j.get(),
                }
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: usize) -> RegimeIndex {
        RegimeIndex::unchecked(v)
    }

    #[test]
    fn gbm_evaluates_linearly() {
        let model = CoefficientModel::gbm_from_pairs(
            2,
            &[
                (1, 1, GbmPair { drift: 0.01, vol: 0.2, payoff_slope: 5.0 }),
                (1, 2, GbmPair { drift: 0.01, vol: 0.2, payoff_slope: 1.0 }),
                (2, 1, GbmPair { drift: 0.01, vol: 0.2, payoff_slope: -1.0 }),
                (2, 2, GbmPair { drift: 0.01, vol: 0.2, payoff_slope: -4.0 }),
            ],
        )
        .unwrap();
        assert_eq!(model.drift(r(1), r(1), 2.0), 0.02);
        assert_eq!(model.vol(r(2), r(1), -1.0), -0.2);
        assert_eq!(model.payoff(r(2), r(2), 0.5), -2.0);
    }

    #[test]
    fn missing_pair_is_rejected() {
        let err = CoefficientModel::gbm_from_pairs(
            2,
            &[(1, 1, GbmPair { drift: 0.0, vol: 0.0, payoff_slope: 0.0 })],
        )
        .unwrap_err();
        assert!(matches!(err, GameError::MissingPair { .. }));
    }

    #[test]
    fn tabulated_interpolates_and_clamps() {
        let pair = TabulatedPair {
            xs: vec![0.0, 1.0, 2.0],
            drift: vec![0.0, 1.0, 0.0],
            vol: vec![1.0, 1.0, 1.0],
            payoff: vec![0.0, 2.0, 4.0],
        };
        let entries: Vec<(usize, usize, TabulatedPair)> = [(1, 1), (1, 2), (2, 1), (2, 2)]
            .iter()
            .map(|&(i, j)| (i, j, pair.clone()))
            .collect();
        let model = CoefficientModel::tabulated_from_pairs(2, &entries).unwrap();
        assert_eq!(model.drift(r(1), r(1), 0.5), 0.5);
        assert_eq!(model.payoff(r(1), r(1), 1.5), 3.0);
        // constant extrapolation outside the table
        assert_eq!(model.drift(r(1), r(1), -3.0), 0.0);
        assert_eq!(model.payoff(r(1), r(1), 10.0), 4.0);
    }

    #[test]
    fn tabulated_rejects_unsorted_xs() {
        let bad = TabulatedPair {
            xs: vec![0.0, 0.0],
            drift: vec![0.0, 0.0],
            vol: vec![0.0, 0.0],
            payoff: vec![0.0, 0.0],
        };
        let entries: Vec<(usize, usize, TabulatedPair)> = [(1, 1), (1, 2), (2, 1), (2, 2)]
            .iter()
            .map(|&(i, j)| (i, j, bad.clone()))
            .collect();
        assert!(matches!(
            CoefficientModel::tabulated_from_pairs(2, &entries),
            Err(GameError::BadTable { .. })
        ));
    }

    #[test]
    fn report_recovers_affine_constants() {
        let model = CoefficientModel::uniform_affine(
            2,
            AffinePair {
                drift_const: 0.5,
                drift_slope: 0.25,
                vol_const: 0.0,
                vol_slope: 0.5,
                payoff_const: 1.0,
                payoff_slope: -2.0,
            },
        )
        .unwrap();
        let nodes: Vec<f64> = (0..21).map(|k| -1.0 + 0.1 * k as f64).collect();
        let rep = model.report(&nodes);
        assert!((rep.lipschitz_drift - 0.25).abs() < 1e-12);
        assert!((rep.lipschitz_vol - 0.5).abs() < 1e-12);
        assert!((rep.lipschitz_payoff - 2.0).abs() < 1e-12);
        // |f(-1)| = 3 at scale 1+1 = 2
        assert!((rep.growth - 1.5).abs() < 1e-12);
    }
}
