//! The two solution-dependent switching obstacles.
//!
//! At a node `x` the maximizer's obstacle is
//! `M^{ij}[V](x) = max_{k≠i} { V^{kj}(x) − C(i,k) }` — the best value player I
//! can reach by switching his coordinate — and the minimizer's obstacle is
//! `N^{ij}[V](x) = min_{l≠j} { V^{il}(x) + χ(j,l) }`. The value is sandwiched
//! between them, `M[V] ≤ V ≤ N[V]`.

use super::{GameSpec, RegimeIndex};
use crate::field::ValueField;

/// Lower obstacle `M^{ij}[V]` at the node: the value and the achieving
/// target regime, smallest index on ties.
pub fn obstacle_m(
    field: &ValueField,
    spec: &GameSpec,
    node: usize,
    i: RegimeIndex,
    j: RegimeIndex,
) -> (f64, RegimeIndex) {
    let mut best = f64::NEG_INFINITY;
    let mut arg = i;
    for k in i.others(spec.q()) {
        let v = field.at(k, j, node) - spec.costs.c(i, k);
        if v > best {
            best = v;
            arg = k;
        }
    }
    (best, arg)
}

/// Upper obstacle `N^{ij}[V]` at the node: the value and the achieving
/// target regime, smallest index on ties.
pub fn obstacle_n(
    field: &ValueField,
    spec: &GameSpec,
    node: usize,
    i: RegimeIndex,
    j: RegimeIndex,
) -> (f64, RegimeIndex) {
    let mut best = f64::INFINITY;
    let mut arg = j;
    for l in j.others(spec.q()) {
        let v = field.at(i, l, node) + spec.costs.chi(j, l);
        if v < best {
            best = v;
            arg = l;
        }
    }
    (best, arg)
}
