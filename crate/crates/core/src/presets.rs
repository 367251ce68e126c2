//! Ready-made game instances: the two-regime geometric-Brownian benchmark
//! with its four cost scenarios, and degenerate instances with closed-form
//! values used by tests and demos.

use crate::game::{AffinePair, CoefficientModel, CostMatrices, GameSpec, GbmPair};
use crate::grid::Grid;

/// Cost scenario of the two-regime benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostScenario {
    /// `C(1,2)=2, C(2,1)=5, χ(1,2)=2, χ(2,1)=5`
    A,
    /// `C(1,2)=5, C(2,1)=−1, χ(1,2)=2, χ(2,1)=2`
    B,
    /// `C(1,2)=2, C(2,1)=2, χ(1,2)=−1, χ(2,1)=5`
    C,
    /// `C(1,2)=4, C(2,1)=−2, χ(1,2)=−1, χ(2,1)=3`
    D,
}

impl CostScenario {
    pub fn costs(self) -> CostMatrices {
        let (c12, c21, x12, x21) = match self {
            CostScenario::A => (2.0, 5.0, 2.0, 5.0),
            CostScenario::B => (5.0, -1.0, 2.0, 2.0),
            CostScenario::C => (2.0, 2.0, -1.0, 5.0),
            CostScenario::D => (4.0, -2.0, -1.0, 3.0),
        };
        CostMatrices::two_regime(c12, c21, x12, x21).expect("scenario costs are well formed")
    }

    pub fn all() -> [CostScenario; 4] {
        [CostScenario::A, CostScenario::B, CostScenario::C, CostScenario::D]
    }

    pub fn name(self) -> &'static str {
        match self {
            CostScenario::A => "a",
            CostScenario::B => "b",
            CostScenario::C => "c",
            CostScenario::D => "d",
        }
    }
}

/// The two-regime benchmark: regime-independent geometric Brownian dynamics
/// `b(x) = 0.01x`, `σ(x) = 0.2x`, discount `r = 0.15`, and linear payoffs
/// `f^{11} = 5x`, `f^{12} = x`, `f^{21} = −x`, `f^{22} = −4x`.
pub fn two_regime_gbm(scenario: CostScenario) -> GameSpec {
    let mk = |payoff_slope| GbmPair {
        drift: 0.01,
        vol: 0.2,
        payoff_slope,
    };
    let coeff = CoefficientModel::gbm_from_pairs(
        2,
        &[(1, 1, mk(5.0)), (1, 2, mk(1.0)), (2, 1, mk(-1.0)), (2, 2, mk(-4.0))],
    )
    .expect("benchmark coefficients are well formed");
    GameSpec::new(coeff, scenario.costs(), 0.15).expect("benchmark spec is well formed")
}

/// The default grid for reproducing the benchmark thresholds: `[−5, 5]` with
/// 2001 nodes (`h = 0.005`).
pub fn default_grid() -> Grid {
    Grid::new(-5.0, 5.0, 2001).expect("default grid is well formed")
}

/// Zero dynamics, constant payoffs `{5, 1, −1, −4}`, prohibitive costs 100
/// and `r = 0.15`: the value is exactly `f^{ij}/r` and no one ever switches.
pub fn prohibitive_constant() -> GameSpec {
    let mk = |payoff_const| AffinePair {
        drift_const: 0.0,
        drift_slope: 0.0,
        vol_const: 0.0,
        vol_slope: 0.0,
        payoff_const,
        payoff_slope: 0.0,
    };
    let coeff = CoefficientModel::affine_from_pairs(
        2,
        &[(1, 1, mk(5.0)), (1, 2, mk(1.0)), (2, 1, mk(-1.0)), (2, 2, mk(-4.0))],
    )
    .expect("constant coefficients are well formed");
    GameSpec::new(coeff, CostMatrices::uniform(2, 100.0, 100.0).unwrap(), 0.15)
        .expect("prohibitive spec is well formed")
}

/// The benchmark with player II frozen out by prohibitive `χ`: reduces to a
/// one-player optimal switching problem for player I.
pub fn player_one_only(scenario: CostScenario) -> GameSpec {
    let base = two_regime_gbm(scenario);
    let c = match scenario {
        CostScenario::A => (2.0, 5.0),
        CostScenario::B => (5.0, -1.0),
        CostScenario::C => (2.0, 2.0),
        CostScenario::D => (4.0, -2.0),
    };
    let costs = CostMatrices::two_regime(c.0, c.1, 1e6, 1e6).unwrap();
    GameSpec::new(base.coefficients.clone(), costs, base.discount()).unwrap()
}
