//! Residual diagnostics for a candidate value field: the sup-norm defect of
//! the two equivalent orderings of the Isaacs system, and the obstacle
//! sandwich violation.

use crate::field::ValueField;
use crate::game::{obstacle_m, obstacle_n, GameSpec};
use crate::generator::DiscreteGenerator;
use crate::grid::Grid;

/// Which nesting of the min/max obstacles to evaluate. The two systems share
/// their solution, so a solved field should have a small residual in both.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QviOrdering {
    /// `max{ min[ rV − LV − f ; V − M[V] ] ; V − N[V] }`
    Hjbi1,
    /// `min{ max[ rV − LV − f ; V − N[V] ] ; V − M[V] }`
    Hjbi2,
}

pub(crate) fn residual_with_gen(
    field: &ValueField,
    spec: &GameSpec,
    gen: &DiscreteGenerator,
    ordering: QviOrdering,
) -> f64 {
    let q = spec.q();
    let r = spec.discount();
    let mut worst = 0.0_f64;
    for p in field.iter_pairs() {
        let (i, j) = p.split(q);
        let op = gen.op(p);
        let values = field.pair_values(p);
        for k in 0..gen.n() {
            let v = values[k];
            let pde = r * v - op.apply_row(values, k) - gen.payoff(p, k);
            let lower = v - obstacle_m(field, spec, k, i, j).0;
            let upper = v - obstacle_n(field, spec, k, i, j).0;
            let defect = match ordering {
                QviOrdering::Hjbi1 => pde.min(lower).max(upper),
                QviOrdering::Hjbi2 => pde.max(upper).min(lower),
            };
            worst = worst.max(defect.abs());
        }
    }
    worst
}

/// Sup-norm residual of the Isaacs system in the requested ordering.
pub fn isaacs_residual(
    field: &ValueField,
    spec: &GameSpec,
    grid: &Grid,
    ordering: QviOrdering,
) -> f64 {
    let gen = DiscreteGenerator::assemble(spec, grid).expect("coefficients must be finite");
    residual_with_gen(field, spec, &gen, ordering)
}

/// Largest violation of the obstacle sandwich `M[V] ≤ V ≤ N[V]`, zero when
/// the sandwich holds everywhere.
pub fn check_sandwich(field: &ValueField, spec: &GameSpec, grid: &Grid) -> f64 {
    let q = spec.q();
    let mut worst = 0.0_f64;
    for p in field.iter_pairs() {
        let (i, j) = p.split(q);
        for k in 0..grid.n() {
            let v = field.get(p, k);
            let m = obstacle_m(field, spec, k, i, j).0;
            let nn = obstacle_n(field, spec, k, i, j).0;
            worst = worst.max(m - v).max(v - nn);
        }
    }
    worst.max(0.0)
}
