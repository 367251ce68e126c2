//! JSON configuration ingestion with a strict schema: unknown keys are
//! rejected so typos in cost matrices cannot pass silently.
//!
//! Two document shapes are accepted:
//!
//! - a bare game document with top-level `q`, `discount_r`, `coefficients`
//!   and `costs` (solver, grid and simulation parameters take defaults);
//! - a run document with a `game` object plus optional `grid`, `solver`,
//!   `sim` and `no_free_loop_severity` sections.
//!
//! Coefficient tables are keyed by `"i,j"` regime-pair strings and must
//! cover all `q²` pairs.

use crate::game::{
    AffinePair, CoefficientModel, CostMatrices, GameError, GameSpec, GbmPair, Severity,
    TabulatedPair,
};
use crate::grid::{Grid, GridError};
use crate::montecarlo::SimConfig;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("malformed config: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Game(#[from] GameError),

    #[error(transparent)]
    Grid(#[from] GridError),

    #[error("invalid parameter: {0}")]
    BadValue(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameDocument {
    q: usize,
    discount_r: f64,
    coefficients: CoefficientsDoc,
    costs: CostsDoc,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum CoefficientsDoc {
    AffineDrift { pairs: BTreeMap<String, AffineParams> },
    GeometricBrownian { pairs: BTreeMap<String, GbmParams> },
    Tabulated { pairs: BTreeMap<String, TabulatedParams> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AffineParams {
    #[serde(default)]
    drift_const: f64,
    #[serde(default)]
    drift_slope: f64,
    #[serde(default)]
    vol_const: f64,
    #[serde(default)]
    vol_slope: f64,
    #[serde(default)]
    payoff_const: f64,
    #[serde(default)]
    payoff_slope: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GbmParams {
    drift: f64,
    vol: f64,
    payoff_slope: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TabulatedParams {
    xs: Vec<f64>,
    drift: Vec<f64>,
    vol: Vec<f64>,
    payoff: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostsDoc {
    #[serde(rename = "C")]
    c: Vec<Vec<f64>>,
    chi: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunDocument {
    game: GameDocument,
    #[serde(default)]
    grid: Option<GridSection>,
    #[serde(default)]
    solver: Option<SolverSection>,
    #[serde(default)]
    sim: Option<SimSection>,
    #[serde(default)]
    no_free_loop_severity: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSection {
    x_min: f64,
    x_max: f64,
    n: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolverSection {
    #[serde(default)]
    tol: Option<f64>,
    #[serde(default)]
    max_iter: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimSection {
    #[serde(default)]
    dt: Option<f64>,
    #[serde(default)]
    horizon: Option<f64>,
    #[serde(default)]
    n_paths: Option<usize>,
    #[serde(default)]
    base_seed: Option<u64>,
    #[serde(default)]
    x0: Option<f64>,
    #[serde(default)]
    i0: Option<usize>,
    #[serde(default)]
    j0: Option<usize>,
    #[serde(default)]
    tol_active: Option<f64>,
}

/// Grid parameters resolved from config and CLI overrides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridParams {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl Default for GridParams {
    fn default() -> Self {
        GridParams {
            x_min: -5.0,
            x_max: 5.0,
            n: 2001,
        }
    }
}

/// Solver parameters resolved from config and CLI overrides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverParams {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            tol: 1e-9,
            max_iter: 200,
        }
    }
}

/// Simulation parameters resolved from config and CLI overrides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub base_seed: u64,
    pub x0: f64,
    pub i0: usize,
    pub j0: usize,
    pub tol_active: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            dt: 1e-3,
            horizon: 60.0,
            n_paths: 10_000,
            base_seed: 42,
            x0: 1.0,
            i0: 1,
            j0: 1,
            tol_active: 1e-6,
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: GameSpec,
    pub grid: GridParams,
    pub solver: SolverParams,
    pub sim: SimParams,
    pub loop_severity: Severity,
}

impl RunConfig {
    pub fn build_grid(&self) -> Result<Grid, ConfigError> {
        Ok(Grid::new(self.grid.x_min, self.grid.x_max, self.grid.n)?)
    }

    pub fn sim_config(&self) -> Result<SimConfig, ConfigError> {
        let s = &self.sim;
        if s.dt <= 0.0 || !s.dt.is_finite() {
            return Err(ConfigError::BadValue(format!("sim.dt = {}", s.dt)));
        }
        if s.horizon <= 0.0 || !s.horizon.is_finite() {
            return Err(ConfigError::BadValue(format!("sim.horizon = {}", s.horizon)));
        }
        if s.n_paths == 0 {
            return Err(ConfigError::BadValue("sim.n_paths = 0".into()));
        }
        if !s.x0.is_finite() {
            return Err(ConfigError::BadValue(format!("sim.x0 = {}", s.x0)));
        }
        Ok(SimConfig {
            dt: s.dt,
            horizon: s.horizon,
            n_paths: s.n_paths,
            base_seed: s.base_seed,
            x0: s.x0,
            i0: self.spec.regime(s.i0)?,
            j0: self.spec.regime(s.j0)?,
            tol_active: s.tol_active,
        })
    }
}

fn parse_pair_key(key: &str, q: usize) -> Result<(usize, usize), GameError> {
    let bad = || GameError::BadPairKey {
        key: key.to_string(),
        q,
    };
    let (a, b) = key.split_once(',').ok_or_else(bad)?;
    let i: usize = a.trim().parse().map_err(|_| bad())?;
    let j: usize = b.trim().parse().map_err(|_| bad())?;
    if i < 1 || i > q || j < 1 || j > q {
        return Err(bad());
    }
    Ok((i, j))
}

impl GameDocument {
    fn into_spec(self) -> Result<GameSpec, ConfigError> {
        let q = self.q;
        let coefficients = match self.coefficients {
            CoefficientsDoc::AffineDrift { pairs } => {
                let entries = convert_pairs(q, pairs, |p: AffineParams| AffinePair {
                    drift_const: p.drift_const,
                    drift_slope: p.drift_slope,
                    vol_const: p.vol_const,
                    vol_slope: p.vol_slope,
                    payoff_const: p.payoff_const,
                    payoff_slope: p.payoff_slope,
                })?;
                CoefficientModel::affine_from_pairs(q, &entries)?
            }
            CoefficientsDoc::GeometricBrownian { pairs } => {
                let entries = convert_pairs(q, pairs, |p: GbmParams| GbmPair {
                    drift: p.drift,
                    vol: p.vol,
                    payoff_slope: p.payoff_slope,
                })?;
                CoefficientModel::gbm_from_pairs(q, &entries)?
            }
            CoefficientsDoc::Tabulated { pairs } => {
                let entries = convert_pairs(q, pairs, |p: TabulatedParams| TabulatedPair {
                    xs: p.xs,
                    drift: p.drift,
                    vol: p.vol,
                    payoff: p.payoff,
                })?;
                CoefficientModel::tabulated_from_pairs(q, &entries)?
            }
        };
        let costs = CostMatrices::new(&self.costs.c, &self.costs.chi)?;
        Ok(GameSpec::new(coefficients, costs, self.discount_r)?)
    }
}

fn convert_pairs<P, T>(
    q: usize,
    pairs: BTreeMap<String, P>,
    convert: impl Fn(P) -> T,
) -> Result<Vec<(usize, usize, T)>, GameError> {
    pairs
        .into_iter()
        .map(|(key, params)| {
            let (i, j) = parse_pair_key(&key, q)?;
            Ok((i, j, convert(params)))
        })
        .collect()
}

/// Parses a configuration from JSON text.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let is_bare_game = value.get("q").is_some();
    let doc: RunDocument = if is_bare_game {
        RunDocument {
            game: serde_json::from_value(value)?,
            grid: None,
            solver: None,
            sim: None,
            no_free_loop_severity: None,
        }
    } else {
        serde_json::from_value(value)?
    };

    let spec = doc.game.into_spec()?;
    let grid = doc
        .grid
        .map(|g| GridParams {
            x_min: g.x_min,
            x_max: g.x_max,
            n: g.n,
        })
        .unwrap_or_default();
    let solver_defaults = SolverParams::default();
    let solver = doc
        .solver
        .map(|s| SolverParams {
            tol: s.tol.unwrap_or(solver_defaults.tol),
            max_iter: s.max_iter.unwrap_or(solver_defaults.max_iter),
        })
        .unwrap_or(solver_defaults);
    if solver.tol <= 0.0 || solver.tol.is_nan() {
        return Err(ConfigError::BadValue(format!("solver.tol = {}", solver.tol)));
    }
    let sim_defaults = SimParams::default();
    let sim = doc
        .sim
        .map(|s| SimParams {
            dt: s.dt.unwrap_or(sim_defaults.dt),
            horizon: s.horizon.unwrap_or(sim_defaults.horizon),
            n_paths: s.n_paths.unwrap_or(sim_defaults.n_paths),
            base_seed: s.base_seed.unwrap_or(sim_defaults.base_seed),
            x0: s.x0.unwrap_or(sim_defaults.x0),
            i0: s.i0.unwrap_or(sim_defaults.i0),
            j0: s.j0.unwrap_or(sim_defaults.j0),
            tol_active: s.tol_active.unwrap_or(sim_defaults.tol_active),
        })
        .unwrap_or(sim_defaults);
    let loop_severity = match doc.no_free_loop_severity.as_deref() {
        None | Some("warn") => Severity::Warning,
        Some("error") => Severity::Error,
        Some(other) => {
            return Err(ConfigError::BadValue(format!(
                "no_free_loop_severity = {other:?} (expected \"warn\" or \"error\")"
            )))
        }
    };

    Ok(RunConfig {
        spec,
        grid,
        solver,
        sim,
        loop_severity,
    })
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}
