//! Switching-cost matrices and the executable validators for the standing
//! cost conditions.
//!
//! Player I pays `C(i, k)` to switch the first coordinate from `i` to `k`;
//! player II pays `χ(j, l)` for the second. Individual costs may be negative,
//! but the matrices must satisfy
//!
//! - triangular condition: `C(i,k) < C(i,j) + C(j,k)` for `j ∉ {i,k}` (and
//!   the same for `χ`) — switching directly is cheaper than via a detour;
//! - back-and-forth positivity: `C(i,j) + C(j,i) > 0`, `χ(i,j) + χ(j,i) > 0`
//!   for `i ≠ j` — no arbitrage from immediately switching back;
//! - no-free-loop: no simple cycle of one-coordinate regime-pair moves has
//!   `Σχ − ΣC` exactly zero (diagonal entries count as zero cost).

use super::{GameError, RegimeIndex};
use std::fmt;

/// Rounding guard for the exact-zero cycle test: integer-valued cost tables
/// still compare exactly, while sums of decimal literals that cancel
/// analytically are not missed.
const CYCLE_ZERO_TOL: f64 = 1e-12;

/// The two q×q switching-cost matrices, zero on the diagonal by convention.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrices {
    q: usize,
    c: Vec<f64>,
    chi: Vec<f64>,
}

impl CostMatrices {
    /// Builds the matrices from row-major `q×q` tables, rejecting shape
    /// mismatches, non-finite entries and nonzero diagonals.
    pub fn new(c: &[Vec<f64>], chi: &[Vec<f64>]) -> Result<Self, GameError> {
        let q = c.len();
        if q < 2 {
            return Err(GameError::TooFewRegimes(q));
        }
        let check = |name: &'static str, rows: &[Vec<f64>]| -> Result<Vec<f64>, GameError> {
            if rows.len() != q || rows.iter().any(|r| r.len() != q) {
                return Err(GameError::CostShape {
                    name,
                    rows: rows.len(),
                    cols: rows.first().map_or(0, Vec::len),
                    q,
                });
            }
            let mut flat = Vec::with_capacity(q * q);
            for (i, row) in rows.iter().enumerate() {
                for (j, &v) in row.iter().enumerate() {
                    if !v.is_finite() {
                        return Err(GameError::NonFiniteCost { name, i: i + 1, j: j + 1 });
                    }
                    if i == j && v != 0.0 {
                        return Err(GameError::NonzeroDiagonal { name, i: i + 1, value: v });
                    }
                    flat.push(v);
                }
            }
            Ok(flat)
        };
        Ok(CostMatrices {
            q,
            c: check("C", c)?,
            chi: check("chi", chi)?,
        })
    }

    /// Uniform off-diagonal costs `C ≡ c_off`, `χ ≡ chi_off`.
    pub fn uniform(q: usize, c_off: f64, chi_off: f64) -> Result<Self, GameError> {
        let fill = |v: f64| -> Vec<Vec<f64>> {
            (0..q)
                .map(|i| (0..q).map(|j| if i == j { 0.0 } else { v }).collect())
                .collect()
        };
        CostMatrices::new(&fill(c_off), &fill(chi_off))
    }

    /// Two-regime matrices from the four off-diagonal entries.
    pub fn two_regime(c12: f64, c21: f64, chi12: f64, chi21: f64) -> Result<Self, GameError> {
        CostMatrices::new(
            &[vec![0.0, c12], vec![c21, 0.0]],
            &[vec![0.0, chi12], vec![chi21, 0.0]],
        )
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// Player I cost `C(i, k)`.
    #[inline]
    pub fn c(&self, i: RegimeIndex, k: RegimeIndex) -> f64 {
        self.c[i.index0() * self.q + k.index0()]
    }

    /// Player II cost `χ(j, l)`.
    #[inline]
    pub fn chi(&self, j: RegimeIndex, l: RegimeIndex) -> f64 {
        self.chi[j.index0() * self.q + l.index0()]
    }
}

/// Which cost matrix a finding refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostLabel {
    C,
    Chi,
}

impl fmt::Display for CostLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostLabel::C => write!(f, "C"),
            CostLabel::Chi => write!(f, "chi"),
        }
    }
}

/// Severity attached to a validation finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

/// A single violated condition, with the offending indices and values.
#[derive(Debug, Clone, PartialEq)]
pub enum Finding {
    /// `M(i,k) ≥ M(i,j) + M(j,k)` for some detour regime `j ∉ {i,k}`.
    Triangular {
        matrix: CostLabel,
        i: usize,
        j: usize,
        k: usize,
        direct: f64,
        detour: f64,
    },
    /// `M(i,j) + M(j,i) ≤ 0` for some `i ≠ j`.
    BackAndForth {
        matrix: CostLabel,
        i: usize,
        j: usize,
        sum: f64,
    },
    /// A simple one-coordinate-move cycle with `Σχ − ΣC = 0`; the cycle is
    /// listed as the visited regime pairs, first pair repeated at the end.
    FreeLoop {
        cycle: Vec<(usize, usize)>,
        chi_sum: f64,
        c_sum: f64,
    },
    /// Discount rate does not exceed the estimated growth rate.
    DiscountBelowGrowth { r: f64, rho: f64 },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::Triangular { matrix, i, j, k, direct, detour } => write!(
                f,
                "triangular condition violated: {m}({i},{k}) = {direct} is not < {m}({i},{j}) + {m}({j},{k}) = {detour}",
                m = matrix
            ),
            Finding::BackAndForth { matrix, i, j, sum } => write!(
                f,
                "back-and-forth positivity violated: {m}({i},{j}) + {m}({j},{i}) = {sum} is not > 0",
                m = matrix
            ),
            Finding::FreeLoop { cycle, chi_sum, c_sum } => {
                let path: Vec<String> = cycle.iter().map(|(i, j)| format!("({i},{j})")).collect();
                write!(
                    f,
                    "zero-sum cycle {}: sum(chi) = {chi_sum}, sum(C) = {c_sum}",
                    path.join("->")
                )
            }
            Finding::DiscountBelowGrowth { r, rho } => write!(
                f,
                "discount r = {r} does not exceed the estimated growth rate rho = {rho}"
            ),
        }
    }
}

/// Outcome of a validator run: an empty report means pass.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub entries: Vec<(Severity, Finding)>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.entries.iter().any(|(s, _)| *s == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.entries
            .iter()
            .filter(|(s, _)| *s == Severity::Warning)
            .map(|(_, f)| f)
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.entries.extend(other.entries);
    }
}

/// Checks the triangular and back-and-forth conditions on both matrices.
///
/// Every violated instance is reported with the offending triple or pair;
/// an empty report means the costs pass.
pub fn validate_costs(costs: &CostMatrices) -> ValidationReport {
    type CostFn<'a> = &'a dyn Fn(RegimeIndex, RegimeIndex) -> f64;
    let q = costs.q;
    let mut report = ValidationReport::default();
    let matrices: [(CostLabel, CostFn<'_>); 2] = [
        (CostLabel::C, &|a, b| costs.c(a, b)),
        (CostLabel::Chi, &|a, b| costs.chi(a, b)),
    ];
    for (label, cost) in matrices {
        for i in RegimeIndex::all(q) {
            for k in RegimeIndex::all(q) {
                if i == k {
                    continue;
                }
                for j in RegimeIndex::all(q) {
                    if j == i || j == k {
                        continue;
                    }
                    let direct = cost(i, k);
                    let detour = cost(i, j) + cost(j, k);
                    if direct >= detour {
                        report.entries.push((
                            Severity::Error,
                            Finding::Triangular {
                                matrix: label,
                                i: i.get(),
                                j: j.get(),
                                k: k.get(),
                                direct,
                                detour,
                            },
                        ));
                    }
                }
            }
        }
        for i in RegimeIndex::all(q) {
            for j in RegimeIndex::all(q) {
                if i.get() >= j.get() {
                    continue;
                }
                let sum = cost(i, j) + cost(j, i);
                if sum <= 0.0 {
                    report.entries.push((
                        Severity::Error,
                        Finding::BackAndForth {
                            matrix: label,
                            i: i.get(),
                            j: j.get(),
                            sum,
                        },
                    ));
                }
            }
        }
    }
    report
}

/// One step of a regime-pair cycle: which player moved and the move cost.
fn edge_cost(costs: &CostMatrices, from: (usize, usize), to: (usize, usize)) -> (f64, f64) {
    let (i0, j0) = from;
    let (i1, j1) = to;
    let c = if i0 != i1 {
        costs.c(RegimeIndex::unchecked(i0), RegimeIndex::unchecked(i1))
    } else {
        0.0
    };
    let chi = if j0 != j1 {
        costs.chi(RegimeIndex::unchecked(j0), RegimeIndex::unchecked(j1))
    } else {
        0.0
    };
    (c, chi)
}

/// Enumerates every simple directed cycle in the graph on regime pairs whose
/// edges change exactly one coordinate. Each cycle is produced once, starting
/// at its smallest vertex, as the closed list of visited pairs.
pub(crate) fn one_coordinate_cycles(q: usize) -> Vec<Vec<(usize, usize)>> {
    let n = q * q;
    let vertex = |p: usize| (p / q + 1, p % q + 1);
    let neighbors = |p: usize| -> Vec<usize> {
        let (i, j) = (p / q, p % q);
        let mut out = Vec::with_capacity(2 * (q - 1));
        for k in 0..q {
            if k != i {
                out.push(k * q + j);
            }
        }
        for l in 0..q {
            if l != j {
                out.push(i * q + l);
            }
        }
        out
    };

    let mut cycles = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut on_stack = vec![false; n];

    fn dfs(
        v: usize,
        start: usize,
        neighbors: &dyn Fn(usize) -> Vec<usize>,
        stack: &mut Vec<usize>,
        on_stack: &mut [bool],
        cycles: &mut Vec<Vec<usize>>,
    ) {
        stack.push(v);
        on_stack[v] = true;
        for w in neighbors(v) {
            if w == start && stack.len() >= 2 {
                cycles.push(stack.clone());
            } else if w > start && !on_stack[w] {
                dfs(w, start, neighbors, stack, on_stack, cycles);
            }
        }
        on_stack[v] = false;
        stack.pop();
    }

    let mut raw: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        dfs(start, start, &neighbors, &mut stack, &mut on_stack, &mut raw);
    }
    for cycle in raw {
        let mut pairs: Vec<(usize, usize)> = cycle.iter().map(|&p| vertex(p)).collect();
        pairs.push(pairs[0]);
        cycles.push(pairs);
    }
    cycles
}

/// Scans every simple one-coordinate-move cycle for `Σχ − ΣC = 0` witnesses.
///
/// A witness is a report entry at the configured severity, not an error: the
/// standard two-regime cost scenarios all contain a zero-sum mixed cycle yet
/// remain solvable, so the default severity is [`Severity::Warning`].
pub fn validate_no_free_loop(costs: &CostMatrices, severity: Severity) -> ValidationReport {
    let mut report = ValidationReport::default();
    for cycle in one_coordinate_cycles(costs.q) {
        let mut c_sum = 0.0;
        let mut chi_sum = 0.0;
        for step in cycle.windows(2) {
            let (c, chi) = edge_cost(costs, step[0], step[1]);
            c_sum += c;
            chi_sum += chi;
        }
        if (chi_sum - c_sum).abs() <= CYCLE_ZERO_TOL {
            report.entries.push((
                severity,
                Finding::FreeLoop {
                    cycle,
                    chi_sum,
                    c_sum,
                },
            ));
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes_and_diagonals() {
        assert!(matches!(
            CostMatrices::new(&[vec![0.0, 1.0], vec![1.0]], &[vec![0.0, 1.0], vec![1.0, 0.0]]),
            Err(GameError::CostShape { .. })
        ));
        assert!(matches!(
            CostMatrices::new(&[vec![0.0, 1.0]], &[vec![0.0, 1.0]]),
            Err(GameError::TooFewRegimes(1))
        ));
        assert!(matches!(
            CostMatrices::new(
                &[vec![1.0, 1.0], vec![1.0, 0.0]],
                &[vec![0.0, 1.0], vec![1.0, 0.0]]
            ),
            Err(GameError::NonzeroDiagonal { .. })
        ));
    }

    #[test]
    fn reference_two_regime_costs_pass() {
        // C(1,2)=2, C(2,1)=5, chi(1,2)=2, chi(2,1)=5: sums are 7 > 0 and the
        // triangular condition is vacuous at q = 2.
        let costs = CostMatrices::two_regime(2.0, 5.0, 2.0, 5.0).unwrap();
        assert!(validate_costs(&costs).passed());
    }

    #[test]
    fn back_and_forth_boundary_fails() {
        // C(1,2) + C(2,1) = 0 sits exactly on the boundary of the condition.
        let costs = CostMatrices::two_regime(1.0, -1.0, 1.0, 1.0).unwrap();
        let report = validate_costs(&costs);
        assert!(report.has_errors());
        assert!(report.entries.iter().any(|(_, f)| matches!(
            f,
            Finding::BackAndForth { matrix: CostLabel::C, i: 1, j: 2, sum } if *sum == 0.0
        )));
    }

    #[test]
    fn triangular_violation_is_reported_with_triple() {
        // C(1,3)=10 vs C(1,2)+C(2,3)=5.
        let c = vec![
            vec![0.0, 2.0, 10.0],
            vec![2.0, 0.0, 3.0],
            vec![2.0, 2.0, 0.0],
        ];
        let chi = vec![
            vec![0.0, 1.0, 1.0],
            vec![1.0, 0.0, 1.0],
            vec![1.0, 1.0, 0.0],
        ];
        let costs = CostMatrices::new(&c, &chi).unwrap();
        let report = validate_costs(&costs);
        assert!(report.entries.iter().any(|(_, f)| matches!(
            f,
            Finding::Triangular { matrix: CostLabel::C, i: 1, j: 2, k: 3, direct, detour }
                if *direct == 10.0 && *detour == 5.0
        )));
    }

    #[test]
    fn free_loop_witness_on_reference_costs() {
        let costs = CostMatrices::two_regime(2.0, 5.0, 2.0, 5.0).unwrap();
        let report = validate_no_free_loop(&costs, Severity::Warning);
        let witness = report
            .entries
            .iter()
            .find_map(|(_, f)| match f {
                Finding::FreeLoop { cycle, chi_sum, c_sum } if cycle.len() == 5 => {
                    Some((cycle.clone(), *chi_sum, *c_sum))
                }
                _ => None,
            })
            .expect("expected a 4-cycle witness");
        assert_eq!(witness.1, 7.0);
        assert_eq!(witness.2, 7.0);
        // the canonical orientation starting at (1,1)
        assert_eq!(witness.0[0], (1, 1));
        assert_eq!(witness.0[4], (1, 1));
    }

    #[test]
    fn symmetric_costs_have_no_free_loop() {
        // All 4-cycle sums are nonzero: {6, -4, 2, ...}.
        let costs = CostMatrices::two_regime(2.0, 2.0, 3.0, 3.0).unwrap();
        let report = validate_no_free_loop(&costs, Severity::Warning);
        assert!(report.passed());
    }

    #[test]
    fn zero_costs_make_every_cycle_a_witness() {
        let costs = CostMatrices::two_regime(0.0, 0.0, 0.0, 0.0).unwrap();
        let report = validate_no_free_loop(&costs, Severity::Warning);
        assert_eq!(report.entries.len(), one_coordinate_cycles(2).len());
        assert!(!report.passed());
    }

    #[test]
    fn no_c_only_two_cycle_witness_when_costs_pass() {
        // Two-step player-I cycles have sum -(C(i,j)+C(j,i)) < 0 under (co3).
        let costs = CostMatrices::two_regime(1.5, 0.5, 4.0, 3.0).unwrap();
        assert!(validate_costs(&costs).passed());
        let report = validate_no_free_loop(&costs, Severity::Warning);
        for (_, finding) in &report.entries {
            if let Finding::FreeLoop { cycle, .. } = finding {
                assert_ne!(cycle.len(), 3, "unexpected 2-cycle witness: {finding}");
            }
        }
    }

    #[test]
    fn validators_are_pure() {
        let costs = CostMatrices::two_regime(2.0, 5.0, 2.0, 5.0).unwrap();
        assert_eq!(validate_costs(&costs), validate_costs(&costs));
        assert_eq!(
            validate_no_free_loop(&costs, Severity::Warning),
            validate_no_free_loop(&costs, Severity::Warning)
        );
    }
}
