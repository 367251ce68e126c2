//! Command-line driver: configuration ingestion, command dispatch, and
//! export of value fields, regions, thresholds, simulation results and SVG
//! plots.
//!
//! Exit codes: `0` success (warnings allowed), `2` malformed configuration or
//! hard validation error, `3` numerical failure (solver non-convergence or a
//! verification budget miss).

mod plot;

use clap::{Args, Parser, Subcommand};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use switchgame::config::{load_config, RunConfig};
use switchgame::game::Severity;
use switchgame::io as sgio;
use switchgame::io::format_switch_sets;
use switchgame::montecarlo::{
    estimate_from_results, estimate_value, simulate_paths, tail_bound, SimConfig,
};
use switchgame::solver::{howard_solve, Solved};
use switchgame::strategy::{classify_regions, extract_switch_sets};
use switchgame::Grid;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Parser)]
#[command(
    name = "switchgame",
    about = "Solve zero-sum stochastic switching games and verify the value by simulation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the cost and no-free-loop validators and report coefficients.
    Validate(CommonFlags),
    /// Solve the game and export the value field as CSV.
    Solve {
        #[command(flatten)]
        common: CommonFlags,
        /// Output CSV path (x,V11,...,Vqq).
        #[arg(long)]
        out: PathBuf,
    },
    /// Classify every node into continuation/switch regions.
    Regions {
        #[command(flatten)]
        common: CommonFlags,
        /// Output CSV path (x,pair,label,target).
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the switching-threshold table.
    Thresholds {
        #[command(flatten)]
        common: CommonFlags,
        /// Also write the table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Simulate controlled paths under the solved feedback strategies.
    Simulate {
        #[command(flatten)]
        common: CommonFlags,
        #[command(flatten)]
        sim: SimFlags,
        /// Output CSV path (per-path totals).
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve, simulate, and check |mean − V(x0)| against the budget.
    Verify {
        #[command(flatten)]
        common: CommonFlags,
        #[command(flatten)]
        sim: SimFlags,
    },
    /// Render the value functions as an SVG plot.
    Plot {
        #[command(flatten)]
        common: CommonFlags,
        /// Output SVG path.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct CommonFlags {
    /// JSON configuration (game document or run document).
    #[arg(long)]
    config: PathBuf,
    /// Override grid node count.
    #[arg(long = "grid-n")]
    grid_n: Option<usize>,
    /// Override grid lower bound.
    #[arg(long)]
    xmin: Option<f64>,
    /// Override grid upper bound.
    #[arg(long)]
    xmax: Option<f64>,
    /// Override solver tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Override maximum policy iterations.
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
}

#[derive(Args)]
struct SimFlags {
    /// Initial state.
    #[arg(long)]
    x0: Option<f64>,
    /// Initial regime of player I.
    #[arg(long)]
    i0: Option<usize>,
    /// Initial regime of player II.
    #[arg(long)]
    j0: Option<usize>,
    /// Euler time step.
    #[arg(long)]
    dt: Option<f64>,
    /// Truncation horizon.
    #[arg(long)]
    horizon: Option<f64>,
    /// Number of Monte Carlo paths.
    #[arg(long)]
    paths: Option<usize>,
    /// Base seed of the per-path random streams.
    #[arg(long)]
    seed: Option<u64>,
}

impl CommonFlags {
    fn resolve(&self) -> Result<RunConfig, String> {
        let mut cfg = load_config(&self.config).map_err(|e| e.to_string())?;
        if let Some(n) = self.grid_n {
            cfg.grid.n = n;
        }
        if let Some(x) = self.xmin {
            cfg.grid.x_min = x;
        }
        if let Some(x) = self.xmax {
            cfg.grid.x_max = x;
        }
        if let Some(t) = self.tol {
            if t <= 0.0 || t.is_nan() {
                return Err(format!("--tol must be positive, got {t}"));
            }
            cfg.solver.tol = t;
        }
        if let Some(m) = self.max_iter {
            cfg.solver.max_iter = m;
        }
        Ok(cfg)
    }
}

impl SimFlags {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(x) = self.x0 {
            cfg.sim.x0 = x;
        }
        if let Some(i) = self.i0 {
            cfg.sim.i0 = i;
        }
        if let Some(j) = self.j0 {
            cfg.sim.j0 = j;
        }
        if let Some(dt) = self.dt {
            cfg.sim.dt = dt;
        }
        if let Some(t) = self.horizon {
            cfg.sim.horizon = t;
        }
        if let Some(p) = self.paths {
            cfg.sim.n_paths = p;
        }
        if let Some(s) = self.seed {
            cfg.sim.base_seed = s;
        }
    }
}

/// Parses `argv` and runs the selected command, returning the exit code.
pub fn run_command<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own help/usage text
            let _ = write!(out, "{e}");
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Validate(common) => cmd_validate(&common, out),
        Command::Solve { common, out: path } => cmd_solve(&common, &path, out),
        Command::Regions { common, out: path } => cmd_regions(&common, &path, out),
        Command::Thresholds { common, csv } => cmd_thresholds(&common, csv.as_deref(), out),
        Command::Simulate { common, sim, out: path } => cmd_simulate(&common, &sim, &path, out),
        Command::Verify { common, sim } => cmd_verify(&common, &sim, out),
        Command::Plot { common, out: path } => cmd_plot(&common, &path, out),
    };
    match result {
        Ok(code) => code,
        Err(CmdError::Config(msg)) => {
            let _ = writeln!(out, "error: {msg}");
            EXIT_CONFIG
        }
        Err(CmdError::Numeric(msg)) => {
            let _ = writeln!(out, "error: {msg}");
            EXIT_NUMERIC
        }
        Err(CmdError::Io(e)) => {
            let _ = writeln!(out, "error: {e}");
            EXIT_CONFIG
        }
    }
}

enum CmdError {
    Config(String),
    Numeric(String),
    Io(std::io::Error),
}

impl From<std::io::Error> for CmdError {
    fn from(e: std::io::Error) -> Self {
        CmdError::Io(e)
    }
}

fn resolve(common: &CommonFlags) -> Result<(RunConfig, Grid), CmdError> {
    let cfg = common.resolve().map_err(CmdError::Config)?;
    let grid = cfg.build_grid().map_err(|e| CmdError::Config(e.to_string()))?;
    Ok((cfg, grid))
}

fn solve(cfg: &RunConfig, grid: &Grid) -> Result<Solved, CmdError> {
    howard_solve(&cfg.spec, grid, cfg.solver.tol, cfg.solver.max_iter)
        .map_err(|e| CmdError::Numeric(e.to_string()))
}

fn print_solve_summary(out: &mut dyn Write, solved: &Solved) -> std::io::Result<()> {
    let r = &solved.report;
    writeln!(
        out,
        "solve: converged={} iterations={} fallback_sweeps={} residual_hjbi1={:.3e} residual_hjbi2={:.3e} wall_time={:.3}s",
        r.converged,
        r.iterations,
        r.fallback_sweeps,
        r.final_residual_hjbi1,
        r.final_residual_hjbi2,
        r.wall_time.as_secs_f64()
    )
}

fn cmd_validate(common: &CommonFlags, out: &mut dyn Write) -> Result<i32, CmdError> {
    let (cfg, grid) = resolve(common)?;
    let nodes = grid.nodes();
    let report = cfg.spec.validate(&nodes, cfg.loop_severity);
    let coeff = cfg.spec.coefficients.report(&nodes);
    writeln!(
        out,
        "coefficients: Lipschitz drift={:.6} vol={:.6} payoff={:.6}; growth C={:.6}",
        coeff.lipschitz_drift, coeff.lipschitz_vol, coeff.lipschitz_payoff, coeff.growth
    )?;
    writeln!(
        out,
        "growth rate rho={:.6} vs discount r={:.6}",
        switchgame::game::estimate_growth_rate(&cfg.spec, &nodes),
        cfg.spec.discount()
    )?;
    if report.passed() {
        writeln!(out, "validation: PASS (no findings)")?;
        return Ok(EXIT_OK);
    }
    for (severity, finding) in &report.entries {
        let tag = match severity {
            Severity::Warning => "WARNING",
            Severity::Error => "ERROR",
        };
        writeln!(out, "{tag}: {finding}")?;
    }
    if report.has_errors() {
        writeln!(out, "validation: FAIL")?;
        Ok(EXIT_CONFIG)
    } else {
        writeln!(out, "validation: PASS with warnings")?;
        Ok(EXIT_OK)
    }
}

fn cmd_solve(common: &CommonFlags, path: &std::path::Path, out: &mut dyn Write) -> Result<i32, CmdError> {
    let (cfg, grid) = resolve(common)?;
    let solved = solve(&cfg, &grid)?;
    let mut file = BufWriter::new(File::create(path)?);
    sgio::write_value_csv(&mut file, &solved.field, &grid)?;
    file.flush()?;
    print_solve_summary(out, &solved)?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(EXIT_OK)
}

fn cmd_regions(common: &CommonFlags, path: &std::path::Path, out: &mut dyn Write) -> Result<i32, CmdError> {
    let (cfg, grid) = resolve(common)?;
    let solved = solve(&cfg, &grid)?;
    let regions = classify_regions(&solved.field, &cfg.spec, &grid, cfg.sim.tol_active);
    let mut file = BufWriter::new(File::create(path)?);
    sgio::write_regions_csv(&mut file, &regions, &grid)?;
    file.flush()?;
    print_solve_summary(out, &solved)?;
    writeln!(
        out,
        "max continuation residual: {:.3e}",
        regions.max_continuation_residual
    )?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(EXIT_OK)
}

fn cmd_thresholds(
    common: &CommonFlags,
    csv: Option<&std::path::Path>,
    out: &mut dyn Write,
) -> Result<i32, CmdError> {
    let (cfg, grid) = resolve(common)?;
    let solved = solve(&cfg, &grid)?;
    let sets = extract_switch_sets(&solved.field, &cfg.spec, &grid, cfg.sim.tol_active);
    print_solve_summary(out, &solved)?;
    write!(out, "{}", format_switch_sets(&sets, &grid))?;
    if let Some(path) = csv {
        let mut file = BufWriter::new(File::create(path)?);
        sgio::write_switch_sets_csv(&mut file, &sets)?;
        file.flush()?;
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(EXIT_OK)
}

fn sim_config(cfg: &RunConfig, grid: &Grid, out: &mut dyn Write) -> Result<SimConfig, CmdError> {
    let sim = cfg.sim_config().map_err(|e| CmdError::Config(e.to_string()))?;
    if let Some(bound) = sim.dt_guideline(&cfg.spec, grid) {
        writeln!(
            out,
            "warning: dt={} exceeds the stability guideline h/max|b| = {bound:.6}",
            sim.dt
        )?;
    }
    Ok(sim)
}

fn cmd_simulate(
    common: &CommonFlags,
    sim_flags: &SimFlags,
    path: &std::path::Path,
    out: &mut dyn Write,
) -> Result<i32, CmdError> {
    let (mut cfg, grid) = resolve(common)?;
    sim_flags.apply(&mut cfg);
    let solved = solve(&cfg, &grid)?;
    let sim = sim_config(&cfg, &grid, out)?;
    let results = simulate_paths(&cfg.spec, &solved.field, &grid, &sim);
    let mut file = BufWriter::new(File::create(path)?);
    sgio::write_paths_csv(&mut file, &results)?;
    file.flush()?;
    let est = estimate_from_results(&results, tail_bound(&cfg.spec, &grid, &sim))
        .map_err(|e| CmdError::Numeric(e.to_string()))?;
    warn_tail(out, &solved, &grid, &sim, est.tail_bound)?;
    print_solve_summary(out, &solved)?;
    writeln!(
        out,
        "mean,std_error,tail_bound,n_valid\n{:.10e},{:.10e},{:.10e},{}",
        est.mean, est.std_error, est.tail_bound, est.n_valid
    )?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(EXIT_OK)
}

/// Warns when the truncated discount tail is not negligible next to the
/// value at the start state.
fn warn_tail(
    out: &mut dyn Write,
    solved: &Solved,
    grid: &Grid,
    sim: &SimConfig,
    tail_bound: f64,
) -> std::io::Result<()> {
    let (node, _) = grid.nearest_node(sim.x0);
    let v = solved.field.at(sim.i0, sim.j0, node);
    if tail_bound > 0.01 * v.abs() {
        writeln!(
            out,
            "warning: discount tail bound {tail_bound:.3e} exceeds 1% of |V(x0)| = {:.3e}; consider a longer horizon",
            v.abs()
        )?;
    }
    Ok(())
}

fn cmd_verify(common: &CommonFlags, sim_flags: &SimFlags, out: &mut dyn Write) -> Result<i32, CmdError> {
    let (mut cfg, grid) = resolve(common)?;
    sim_flags.apply(&mut cfg);
    let solved = solve(&cfg, &grid)?;
    let sim = sim_config(&cfg, &grid, out)?;
    let est = estimate_value(&cfg.spec, &solved.field, &grid, &sim)
        .map_err(|e| CmdError::Numeric(e.to_string()))?;
    warn_tail(out, &solved, &grid, &sim, est.tail_bound)?;
    let (node, clamped) = grid.nearest_node(sim.x0);
    if clamped {
        writeln!(out, "warning: x0={} clamped into the grid domain", sim.x0)?;
    }
    let v = solved
        .field
        .at(sim.i0, sim.j0, node);
    let gap = (est.mean - v).abs();
    let budget = 3.0 * est.std_error + 0.02 * v.abs();
    print_solve_summary(out, &solved)?;
    writeln!(
        out,
        "V({}, i0={}, j0={}) = {:.8}",
        sim.x0, sim.i0, sim.j0, v
    )?;
    writeln!(
        out,
        "mc mean = {:.8} (std_error {:.3e}, {} paths, tail bound {:.3e})",
        est.mean, est.std_error, est.n_valid, est.tail_bound
    )?;
    writeln!(
        out,
        "|mean - V| = {gap:.6} vs budget 3*std_error + 2%|V| = {budget:.6}"
    )?;
    if gap <= budget {
        writeln!(out, "verify: PASS")?;
        Ok(EXIT_OK)
    } else {
        writeln!(out, "verify: FAIL")?;
        Ok(EXIT_NUMERIC)
    }
}

fn cmd_plot(common: &CommonFlags, path: &std::path::Path, out: &mut dyn Write) -> Result<i32, CmdError> {
    let (cfg, grid) = resolve(common)?;
    let solved = solve(&cfg, &grid)?;
    let svg = plot::render_value_field(&solved.field, &grid);
    std::fs::write(path, svg)?;
    print_solve_summary(out, &solved)?;
    writeln!(out, "wrote {}", path.display())?;
    Ok(EXIT_OK)
}
