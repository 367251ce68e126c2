//! Shared helpers for the integration suites: seeded random game instances
//! with validated costs and comfortably dominant discount rates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use switchgame::game::{
    validate_costs, AffinePair, CoefficientModel, CostMatrices, GameSpec,
};

/// Random coarse instance: affine coefficients with slopes small enough that
/// the growth rate stays far below the discount, and off-diagonal costs in
/// [1.0, 1.9] so the triangular condition holds strictly for any q.
pub fn random_instance(seed: u64, q: usize) -> GameSpec {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut entries = Vec::new();
    for i in 1..=q {
        for j in 1..=q {
            entries.push((
                i,
                j,
                AffinePair {
                    drift_const: rng.random_range(-0.2..0.2),
                    drift_slope: rng.random_range(-0.25..0.25),
                    vol_const: rng.random_range(0.05..0.4),
                    vol_slope: rng.random_range(-0.25..0.25),
                    payoff_const: rng.random_range(-2.0..2.0),
                    payoff_slope: rng.random_range(-3.0..3.0),
                },
            ));
        }
    }
    let coefficients = CoefficientModel::affine_from_pairs(q, &entries).unwrap();

    let cost = |rng: &mut ChaCha12Rng| -> Vec<Vec<f64>> {
        (0..q)
            .map(|r| {
                (0..q)
                    .map(|c| if r == c { 0.0 } else { rng.random_range(1.0..1.9) })
                    .collect()
            })
            .collect()
    };
    let costs = CostMatrices::new(&cost(&mut rng), &cost(&mut rng)).unwrap();
    assert!(validate_costs(&costs).passed(), "generator must emit valid costs");

    let discount = rng.random_range(0.8..1.5);
    GameSpec::new(coefficients, costs, discount).unwrap()
}
