//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (run with `--nocapture` to see the lines for passing tests too).

mod common;

use common::random_instance;
use std::time::Instant;
use switchgame::field::PairIndex;
use switchgame::game::{validate_costs, validate_no_free_loop, CostMatrices, Finding, Severity};
use switchgame::montecarlo::{estimate_value, simulate_path, PathResult, SimConfig};
use switchgame::presets::{default_grid, prohibitive_constant, two_regime_gbm, CostScenario};
use switchgame::solver::{
    check_sandwich, howard_solve, isaacs_residual, value_iteration_oracle, QviOrdering,
};
use switchgame::strategy::{extract_switch_sets, SwitchSet, DEFAULT_TOL_ACTIVE};
use switchgame::{Grid, RegimeIndex};

fn r(v: usize) -> RegimeIndex {
    RegimeIndex::unchecked(v)
}

/// Expected interval shape in the reference threshold table.
enum Shape {
    /// `(−∞, hi]`
    LeftRay(f64),
    /// `[lo, +∞)`
    RightRay(f64),
    /// `[lo, hi]`
    Bounded(f64, f64),
}

fn check_set(
    sets: &[SwitchSet],
    grid: &Grid,
    from: (usize, usize),
    to: (usize, usize),
    shape: Shape,
    tol: f64,
    failures: &mut Vec<String>,
) {
    let name = format!("{}{}->{}{}", from.0, from.1, to.0, to.1);
    let Some(set) = sets
        .iter()
        .find(|s| {
            (s.from.0.get(), s.from.1.get()) == from && (s.to.0.get(), s.to.1.get()) == to
        })
    else {
        failures.push(format!("{name}: set not present"));
        return;
    };
    if set.intervals.len() != 1 {
        failures.push(format!("{name}: expected one interval, got {:?}", set.intervals));
        return;
    }
    let (lo, hi) = set.intervals[0];
    let (touch_l, touch_r) = set.touches_boundary(grid);
    match shape {
        Shape::LeftRay(want_hi) => {
            if !touch_l {
                failures.push(format!("{name}: expected left-unbounded, lo = {lo}"));
            }
            if (hi - want_hi).abs() > tol {
                failures.push(format!("{name}: right endpoint {hi} vs {want_hi} (+-{tol})"));
            }
        }
        Shape::RightRay(want_lo) => {
            if !touch_r {
                failures.push(format!("{name}: expected right-unbounded, hi = {hi}"));
            }
            if (lo - want_lo).abs() > tol {
                failures.push(format!("{name}: left endpoint {lo} vs {want_lo} (+-{tol})"));
            }
        }
        Shape::Bounded(want_lo, want_hi) => {
            if touch_l || touch_r {
                failures.push(format!("{name}: expected bounded interval, got [{lo}, {hi}]"));
            }
            if (lo - want_lo).abs() > tol {
                failures.push(format!("{name}: left endpoint {lo} vs {want_lo} (+-{tol})"));
            }
            if (hi - want_hi).abs() > tol {
                failures.push(format!("{name}: right endpoint {hi} vs {want_hi} (+-{tol})"));
            }
        }
    }
}

/// Criterion 1: threshold reproduction of the reference two-regime table on
/// scenario (a), endpoints {−0.62, −0.25, 0.33, 1.46} within ±0.2 and the
/// eight-set containment structure.
#[test]
fn criterion_1_threshold_reproduction() {
    let start = Instant::now();
    let spec = two_regime_gbm(CostScenario::A);
    let grid = default_grid();
    let solved = howard_solve(&spec, &grid, 1e-9, 200).expect("scenario (a) must solve");
    let sets = extract_switch_sets(&solved.field, &spec, &grid, DEFAULT_TOL_ACTIVE);
    let elapsed = start.elapsed();

    println!("criterion 1: extracted switch sets:");
    for s in &sets {
        let ivs: Vec<String> = s
            .intervals
            .iter()
            .map(|(lo, hi)| format!("[{lo:.3}, {hi:.3}]"))
            .collect();
        println!(
            "  {}{}->{}{}: {}",
            s.from.0.get(),
            s.from.1.get(),
            s.to.0.get(),
            s.to.1.get(),
            ivs.join(" ")
        );
    }

    let mut failures = Vec::new();
    if elapsed.as_secs_f64() >= 30.0 {
        failures.push(format!("runtime {elapsed:?} exceeded 30 s"));
    }
    if !solved.report.converged {
        failures.push("solver did not converge".into());
    }
    let tol = 0.2;
    check_set(&sets, &grid, (1, 1), (2, 1), Shape::LeftRay(-0.25), tol, &mut failures);
    check_set(&sets, &grid, (1, 1), (1, 2), Shape::RightRay(1.46), tol, &mut failures);
    check_set(&sets, &grid, (1, 2), (2, 1), Shape::LeftRay(-0.62), tol, &mut failures);
    check_set(&sets, &grid, (1, 2), (2, 2), Shape::Bounded(-0.62, -0.25), tol, &mut failures);
    check_set(&sets, &grid, (2, 1), (1, 1), Shape::Bounded(0.33, 1.46), tol, &mut failures);
    check_set(&sets, &grid, (2, 1), (1, 2), Shape::RightRay(1.46), tol, &mut failures);
    check_set(&sets, &grid, (2, 2), (2, 1), Shape::LeftRay(-0.62), tol, &mut failures);
    check_set(&sets, &grid, (2, 2), (1, 2), Shape::RightRay(0.33), tol, &mut failures);

    if failures.is_empty() {
        println!("criterion 1: PASS - eight sets match the reference table (runtime {elapsed:?})");
    } else {
        println!("criterion 1: FAIL - {} mismatches (runtime {elapsed:?}):", failures.len());
        for f in &failures {
            println!("  {f}");
        }
    }
    assert!(failures.is_empty(), "criterion 1 failed:\n{}", failures.join("\n"));
}

/// Criterion 2: Howard policy iteration and the Gauss–Seidel oracle agree to
/// 1e−8 sup-norm on scenario (a) and 20 random coarse instances, within 60 s.
#[test]
fn criterion_2_oracle_equivalence() {
    let start = Instant::now();
    let mut worst = 0.0_f64;

    let spec = two_regime_gbm(CostScenario::A);
    let grid = Grid::new(-5.0, 5.0, 101).unwrap();
    let solved = howard_solve(&spec, &grid, 1e-10, 200).unwrap();
    let oracle = value_iteration_oracle(&spec, &grid, 1e-13, 200_000).unwrap();
    worst = worst.max(solved.field.sup_distance(&oracle));

    for seed in 0..20u64 {
        let q = if seed % 2 == 0 { 2 } else { 3 };
        let spec = random_instance(1000 + seed, q);
        let grid = Grid::new(-2.0, 2.0, 101).unwrap();
        let solved = howard_solve(&spec, &grid, 1e-10, 200)
            .unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        let oracle = value_iteration_oracle(&spec, &grid, 1e-13, 200_000)
            .unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        worst = worst.max(solved.field.sup_distance(&oracle));
    }

    let elapsed = start.elapsed();
    let ok = worst <= 1e-8 && elapsed.as_secs_f64() < 60.0;
    println!(
        "criterion 2: {} - max |howard - oracle| = {worst:.3e} over 21 instances (runtime {elapsed:?})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(worst <= 1e-8, "sup-norm disagreement {worst}");
    assert!(elapsed.as_secs_f64() < 60.0, "runtime {elapsed:?}");
}

/// Criterion 3: obstacle sandwich M[V] ≤ V ≤ N[V] holds to 1e−10 on every
/// solved instance.
#[test]
fn criterion_3_obstacle_sandwich() {
    let mut worst = 0.0_f64;
    for scenario in CostScenario::all() {
        let spec = two_regime_gbm(scenario);
        let grid = default_grid();
        let solved = howard_solve(&spec, &grid, 1e-9, 200).unwrap();
        worst = worst.max(check_sandwich(&solved.field, &spec, &grid));
    }
    for seed in 0..8u64 {
        let q = if seed % 2 == 0 { 2 } else { 3 };
        let spec = random_instance(2000 + seed, q);
        let grid = Grid::new(-2.0, 2.0, 101).unwrap();
        let solved = howard_solve(&spec, &grid, 1e-9, 200).unwrap();
        worst = worst.max(check_sandwich(&solved.field, &spec, &grid));
    }
    let ok = worst <= 1e-10;
    println!(
        "criterion 3: {} - max sandwich violation {worst:.3e} over 12 solved instances",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "sandwich violation {worst}");
}

/// Criterion 4: both orderings of the system have residual ≤ 1e−8 on every
/// field solved at tol = 1e−9.
#[test]
fn criterion_4_dual_residual() {
    let mut worst = 0.0_f64;
    for scenario in CostScenario::all() {
        let spec = two_regime_gbm(scenario);
        let grid = default_grid();
        let solved = howard_solve(&spec, &grid, 1e-9, 200).unwrap();
        worst = worst
            .max(isaacs_residual(&solved.field, &spec, &grid, QviOrdering::Hjbi1))
            .max(isaacs_residual(&solved.field, &spec, &grid, QviOrdering::Hjbi2));
    }
    for seed in 0..8u64 {
        let q = if seed % 2 == 0 { 2 } else { 3 };
        let spec = random_instance(3000 + seed, q);
        let grid = Grid::new(-2.0, 2.0, 101).unwrap();
        let solved = howard_solve(&spec, &grid, 1e-9, 200).unwrap();
        worst = worst
            .max(isaacs_residual(&solved.field, &spec, &grid, QviOrdering::Hjbi1))
            .max(isaacs_residual(&solved.field, &spec, &grid, QviOrdering::Hjbi2));
    }
    let ok = worst <= 1e-8;
    println!(
        "criterion 4: {} - max residual over both orderings {worst:.3e}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "residual {worst}");
}

/// Criterion 5: the Monte Carlo payoff under the extracted feedback
/// strategies reproduces V^{11}(1) within 3·SE + 2%·|V| on scenario (a).
#[test]
fn criterion_5_verification_monte_carlo() {
    let start = Instant::now();
    let spec = two_regime_gbm(CostScenario::A);
    let grid = default_grid();
    let solved = howard_solve(&spec, &grid, 1e-9, 200).unwrap();
    let cfg = SimConfig {
        dt: 1e-3,
        horizon: 60.0,
        n_paths: 10_000,
        base_seed: 42,
        x0: 1.0,
        i0: r(1),
        j0: r(1),
        tol_active: DEFAULT_TOL_ACTIVE,
    };
    let est = estimate_value(&spec, &solved.field, &grid, &cfg).unwrap();
    let (node, clamped) = grid.nearest_node(cfg.x0);
    assert!(!clamped);
    let v = solved.field.at(cfg.i0, cfg.j0, node);
    let gap = (est.mean - v).abs();
    let budget = 3.0 * est.std_error + 0.02 * v.abs();
    let elapsed = start.elapsed();
    let ok = gap <= budget && est.n_invalid == 0 && elapsed.as_secs_f64() < 300.0;
    println!(
        "criterion 5: {} - |mean - V| = {gap:.4} vs budget {budget:.4} (mean {:.4}, V {:.4}, SE {:.4}, tail {:.2e}, runtime {elapsed:?})",
        if ok { "PASS" } else { "FAIL" },
        est.mean,
        v,
        est.std_error,
        est.tail_bound
    );
    assert!(est.n_invalid == 0, "{} invalid paths", est.n_invalid);
    assert!(gap <= budget, "gap {gap} exceeds budget {budget}");
    assert!(elapsed.as_secs_f64() < 300.0, "runtime {elapsed:?}");
}

/// Criterion 6: the prohibitive-cost constant-payoff instance has the exact
/// closed form V = f/r (1e−12) and its deterministic simulation equals
/// f/r·(1−e^{−rT}) to 1e−9.
#[test]
fn criterion_6_closed_form_exactness() {
    let spec = prohibitive_constant();
    let grid = Grid::new(-5.0, 5.0, 201).unwrap();
    let solved = howard_solve(&spec, &grid, 1e-9, 200).unwrap();
    let payoffs = [5.0, 1.0, -1.0, -4.0];
    let mut worst = 0.0_f64;
    for (p, &f) in payoffs.iter().enumerate() {
        for k in 0..grid.n() {
            worst = worst.max((solved.field.get(PairIndex(p), k) - f / 0.15).abs());
        }
    }

    let cfg = SimConfig {
        dt: 1e-3,
        horizon: 60.0,
        n_paths: 1,
        base_seed: 7,
        x0: 0.0,
        i0: r(1),
        j0: r(1),
        tol_active: DEFAULT_TOL_ACTIVE,
    };
    let PathResult::Valid(payoff) = simulate_path(&spec, &solved.field, &grid, &cfg, 0) else {
        panic!("deterministic path diverged");
    };
    let expect = 5.0 / 0.15 * (1.0 - (-0.15_f64 * 60.0).exp());
    let sim_gap = (payoff.total - expect).abs();

    let ok = worst <= 1e-12 && sim_gap <= 1e-9;
    println!(
        "criterion 6: {} - max |V - f/r| = {worst:.3e}, |sim - closed form| = {sim_gap:.3e}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(worst <= 1e-12, "closed-form error {worst}");
    assert!(sim_gap <= 1e-9, "simulation error {sim_gap}");
}

/// Criterion 7: linear growth (max |V|/(1+|x|) varies < 10% across domain
/// radii 5, 10, 20) and a grid-independent Lipschitz bound across
/// n ∈ {501, 1001, 2001}.
#[test]
fn criterion_7_growth_and_lipschitz() {
    let spec = two_regime_gbm(CostScenario::A);

    let mut ratios = Vec::new();
    for (radius, n) in [(5.0, 2001usize), (10.0, 4001), (20.0, 8001)] {
        let grid = Grid::new(-radius, radius, n).unwrap();
        let solved = howard_solve(&spec, &grid, 1e-9, 300).unwrap();
        let mut m = 0.0_f64;
        for p in solved.field.iter_pairs() {
            for k in 0..grid.n() {
                m = m.max(solved.field.get(p, k).abs() / (1.0 + grid.node(k).abs()));
            }
        }
        ratios.push(m);
    }
    let growth_spread = (ratios.iter().cloned().fold(f64::MIN, f64::max)
        - ratios.iter().cloned().fold(f64::MAX, f64::min))
        / ratios.iter().cloned().fold(f64::MAX, f64::min);

    let mut slopes = Vec::new();
    for n in [501usize, 1001, 2001] {
        let grid = Grid::new(-5.0, 5.0, n).unwrap();
        let solved = howard_solve(&spec, &grid, 1e-9, 300).unwrap();
        slopes.push(solved.field.max_slope(grid.h()));
    }
    let slope_max = slopes.iter().cloned().fold(f64::MIN, f64::max);
    let slope_min = slopes.iter().cloned().fold(f64::MAX, f64::min);

    let ok = growth_spread < 0.10 && slope_max <= 1.1 * slope_min;
    println!(
        "criterion 7: {} - growth ratios {ratios:?} (spread {:.2}%), slopes {slopes:?}",
        if ok { "PASS" } else { "FAIL" },
        growth_spread * 100.0
    );
    assert!(growth_spread < 0.10, "growth spread {growth_spread}");
    assert!(
        slope_max <= 1.1 * slope_min,
        "slopes not uniformly bounded: {slopes:?}"
    );
}

/// Criterion 8: cost validators pass on all four scenarios, the no-free-loop
/// scan warns with a printed witness cycle on each, and a hand-built
/// witness-free instance is clean.
#[test]
fn criterion_8_validator_behavior() {
    let mut failures = Vec::new();
    for scenario in CostScenario::all() {
        let costs = scenario.costs();
        if !validate_costs(&costs).passed() {
            failures.push(format!("scenario {} failed cost validation", scenario.name()));
        }
        let report = validate_no_free_loop(&costs, Severity::Warning);
        let witness = report.entries.iter().find_map(|(_, f)| match f {
            Finding::FreeLoop { .. } => Some(f.clone()),
            _ => None,
        });
        match witness {
            Some(f) => println!("criterion 8: scenario {}: {f}", scenario.name()),
            None => failures.push(format!("scenario {} has no zero-sum witness", scenario.name())),
        }
    }

    let clean = CostMatrices::two_regime(2.0, 2.0, 3.0, 3.0).unwrap();
    if !validate_costs(&clean).passed() {
        failures.push("hand-built instance failed cost validation".into());
    }
    if !validate_no_free_loop(&clean, Severity::Warning).passed() {
        failures.push("hand-built instance unexpectedly has a witness".into());
    }

    let ok = failures.is_empty();
    println!(
        "criterion 8: {} - validators behave as documented on all scenarios",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "{failures:?}");
}

/// Footer criterion: the value curves order as V11 > V12 > V21 > V22 for
/// large x in scenario (a).
#[test]
fn criterion_9_value_ordering_for_large_x() {
    let spec = two_regime_gbm(CostScenario::A);
    let grid = Grid::new(-5.0, 5.0, 1001).unwrap();
    let solved = howard_solve(&spec, &grid, 1e-9, 200).unwrap();
    let (k, _) = grid.nearest_node(4.0);
    let v: Vec<f64> = (0..4).map(|p| solved.field.get(PairIndex(p), k)).collect();
    let ok = v[0] > v[1] && v[1] > v[2] && v[2] > v[3];
    println!(
        "criterion 9: {} - at x = 4: V11 = {:.3}, V12 = {:.3}, V21 = {:.3}, V22 = {:.3}",
        if ok { "PASS" } else { "FAIL" },
        v[0],
        v[1],
        v[2],
        v[3]
    );
    assert!(ok, "ordering violated: {v:?}");
}
