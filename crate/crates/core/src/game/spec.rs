//! The assembled game specification and its validation entry point.

use super::{
    validate_costs, validate_no_free_loop, CoefficientModel, CostMatrices, Finding, GameError,
    RegimeIndex, Severity, ValidationReport,
};

/// A complete zero-sum switching game: regimes, coefficients, costs and the
/// discount rate.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    q: usize,
    pub coefficients: CoefficientModel,
    pub costs: CostMatrices,
    discount: f64,
}

impl GameSpec {
    pub fn new(
        coefficients: CoefficientModel,
        costs: CostMatrices,
        discount: f64,
    ) -> Result<Self, GameError> {
        let q = coefficients.q();
        if q < 2 {
            return Err(GameError::TooFewRegimes(q));
        }
        if costs.q() != q {
            return Err(GameError::CostShape {
                name: "C",
                rows: costs.q(),
                cols: costs.q(),
                q,
            });
        }
        if discount <= 0.0 || !discount.is_finite() {
            return Err(GameError::BadDiscount(discount));
        }
        Ok(GameSpec {
            q,
            coefficients,
            costs,
            discount,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Discount rate `r > 0`.
    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn regime(&self, value: usize) -> Result<RegimeIndex, GameError> {
        RegimeIndex::new(value, self.q)
    }

    /// Regime pairs `(i, j)` in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (RegimeIndex, RegimeIndex)> {
        let q = self.q;
        RegimeIndex::all(q).flat_map(move |i| RegimeIndex::all(q).map(move |j| (i, j)))
    }

    /// Runs every validator: cost conditions, no-free-loop scan, and the
    /// discount-versus-growth-rate check sampled on `nodes`.
    pub fn validate(&self, nodes: &[f64], loop_severity: Severity) -> ValidationReport {
        let mut report = validate_costs(&self.costs);
        report.merge(validate_no_free_loop(&self.costs, loop_severity));
        let rho = estimate_growth_rate(self, nodes);
        if self.discount <= rho {
            // The estimate is conservative, so this is a warning rather than
            // a hard failure.
            report.entries.push((
                Severity::Warning,
                Finding::DiscountBelowGrowth {
                    r: self.discount,
                    rho,
                },
            ));
        }
        report
    }
}

/// Estimates the growth rate `ρ` of the state process on a node sample, as
/// the worst regime pair's sampled drift Lipschitz constant plus the squared
/// volatility Lipschitz constant.
///
/// The discount must exceed `ρ` for the discounted payoff to be well posed.
pub fn estimate_growth_rate(spec: &GameSpec, nodes: &[f64]) -> f64 {
    let q = spec.q();
    let mut rho = 0.0_f64;
    for i in RegimeIndex::all(q) {
        for j in RegimeIndex::all(q) {
            let mut lip_b = 0.0_f64;
            let mut lip_s = 0.0_f64;
            for w in nodes.windows(2) {
                let h = w[1] - w[0];
                lip_b = lip_b.max(
                    (spec.coefficients.drift(i, j, w[1]) - spec.coefficients.drift(i, j, w[0]))
                        .abs()
                        / h,
                );
                lip_s = lip_s.max(
                    (spec.coefficients.vol(i, j, w[1]) - spec.coefficients.vol(i, j, w[0])).abs()
                        / h,
                );
            }
            rho = rho.max(lip_b + lip_s * lip_s);
        }
    }
    rho
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::GbmPair;

    fn gbm_spec(r: f64) -> GameSpec {
        let pair = |payoff| GbmPair {
            drift: 0.01,
            vol: 0.2,
            payoff_slope: payoff,
        };
        let coeff = CoefficientModel::gbm_from_pairs(
            2,
            &[(1, 1, pair(5.0)), (1, 2, pair(1.0)), (2, 1, pair(-1.0)), (2, 2, pair(-4.0))],
        )
        .unwrap();
        let costs = CostMatrices::two_regime(2.0, 5.0, 2.0, 5.0).unwrap();
        GameSpec::new(coeff, costs, r).unwrap()
    }

    #[test]
    fn growth_rate_of_gbm() {
        let spec = gbm_spec(0.15);
        let nodes: Vec<f64> = (0..101).map(|k| -5.0 + 0.1 * k as f64).collect();
        let rho = estimate_growth_rate(&spec, &nodes);
        // Lip(b) = 0.01, Lip(sigma) = 0.2 -> rho = 0.01 + 0.04
        assert!((rho - 0.05).abs() < 1e-12);
    }

    #[test]
    fn discount_must_be_positive() {
        let spec = gbm_spec(0.15);
        assert!(GameSpec::new(spec.coefficients.clone(), spec.costs.clone(), 0.0).is_err());
        assert!(GameSpec::new(spec.coefficients.clone(), spec.costs.clone(), -1.0).is_err());
    }

    #[test]
    fn low_discount_warns_but_passes() {
        let spec = gbm_spec(0.01);
        let nodes: Vec<f64> = (0..101).map(|k| -5.0 + 0.1 * k as f64).collect();
        let report = spec.validate(&nodes, Severity::Warning);
        assert!(!report.has_errors());
        assert!(report
            .warnings()
            .any(|f| matches!(f, Finding::DiscountBelowGrowth { .. })));
    }
}
