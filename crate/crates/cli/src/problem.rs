//! Problem files.
//!
//! ```json
//! {
//!   "plant": { "A": [[-0.8, -0.01], [1.0, 0.1]], "B": [[0.4], [0.1]],
//!              "ubar": [1.0], "partition": [1, 1], "T2": [0.3, 0.7] },
//!   "grids": { "alphas": [0.4], "sigmas": [[1.8], [2.3]] },
//!   "weights": { "rho1": 1.0, "rho2": 1.0 },
//!   "simulation": { "initial_conditions": [{ "xp": [-2, 5] }],
//!                   "schedule": "sinusoidal:10", "horizon": 40.0 },
//!   "output": { "directory": "out", "plot": true }
//! }
//! ```
//!
//! Everything except `plant` is optional.

use std::fs;
use std::path::{Path, PathBuf};

use satstab_core::certify::Grid;
use satstab_core::hybrid_sim::{HybridState, ScheduleMode};
use satstab_core::lmi::{LmiError, PlantModel, Weights};
use satstab_core::symmat::Mat;
use satstab_core::tolerances::DEFAULT_H_MAX;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default `T₁` is `0.05·T₂`, capped at this value.
pub const T1_CAP: f64 = 0.05;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse { line: usize, column: usize, msg: String },
    #[error("invalid {field}: {msg}")]
    Validation { field: String, msg: String },
}

fn invalid(field: impl Into<String>, msg: impl Into<String>) -> ProblemError {
    ProblemError::Validation {
        field: field.into(),
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSpec {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    pub ubar: Vec<f64>,
    pub partition: Vec<usize>,
    #[serde(rename = "T1", default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<Vec<f64>>,
    #[serde(rename = "T2")]
    pub t2: Vec<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    #[serde(default)]
    pub sigmas: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub rho1: f64,
    pub rho2: f64,
}

impl Default for WeightSpec {
    fn default() -> Self {
        Self { rho1: 1.0, rho2: 1.0 }
    }
}

/// Initial condition; `eta_tilde` defaults to zero and `tau` to `T₂`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialCondition {
    pub xp: Vec<f64>,
    #[serde(default)]
    pub eta_tilde: Option<Vec<f64>>,
    #[serde(default)]
    pub tau: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSpec {
    #[serde(default)]
    pub initial_conditions: Vec<InitialCondition>,
    #[serde(default = "default_schedule")]
    pub schedule: String,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_h_max")]
    pub h_max: f64,
}

fn default_schedule() -> String {
    "constant".into()
}

fn default_horizon() -> f64 {
    10.0
}

fn default_h_max() -> f64 {
    DEFAULT_H_MAX
}

impl Default for SimulationSpec {
    fn default() -> Self {
        Self {
            initial_conditions: Vec::new(),
            schedule: default_schedule(),
            horizon: default_horizon(),
            h_max: default_h_max(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub directory: PathBuf,
    #[serde(default = "default_plot")]
    pub plot: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_plot() -> bool {
    true
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            directory: default_dir(),
            plot: default_plot(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    plant: PlantSpec,
    #[serde(default)]
    grids: GridSpec,
    #[serde(default)]
    weights: WeightSpec,
    #[serde(default)]
    simulation: SimulationSpec,
    #[serde(default)]
    output: OutputSpec,
}

/// A validated problem with defaults filled in.
#[derive(Debug, Clone)]
pub struct ProblemFile {
    pub plant: PlantModel<f64>,
    pub grid: Grid<f64>,
    pub weights: Weights<f64>,
    pub initial_conditions: Vec<HybridState<f64>>,
    pub schedule: ScheduleMode,
    pub horizon: f64,
    pub h_max: f64,
    pub output_dir: PathBuf,
    pub plot: bool,
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<ProblemFile, ProblemError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| ProblemError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_problem(&text)
}

pub fn parse_problem(text: &str) -> Result<ProblemFile, ProblemError> {
    let raw: RawProblem = serde_json::from_str(text).map_err(|e| ProblemError::Parse {
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    raw.validate()
}

fn matrix(rows: &[Vec<f64>], field: &str) -> Result<Mat<f64>, ProblemError> {
    Mat::from_rows(rows).map_err(|e| invalid(field, e.to_string()))
}

pub fn default_t1(t2: &[f64]) -> Vec<f64> {
    t2.iter().map(|&t| (0.05 * t).min(T1_CAP)).collect()
}

impl RawProblem {
    fn validate(self) -> Result<ProblemFile, ProblemError> {
        let p = &self.plant;
        let a = matrix(&p.a, "plant.A")?;
        let b = matrix(&p.b, "plant.B")?;
        let n: usize = a.rows();
        if p.partition.iter().sum::<usize>() != n {
            return Err(invalid(
                "plant.partition",
                format!("sizes {:?} sum to {} but A is {n}×{n}", p.partition, p.partition.iter().sum::<usize>()),
            ));
        }
        let t1 = p.t1.clone().unwrap_or_else(|| default_t1(&p.t2));
        let plant = PlantModel::new(a, b, p.ubar.clone(), p.partition.clone(), t1, p.t2.clone()).map_err(|e| match e {
            LmiError::Validation { field, msg } => invalid(format!("plant.{field}"), msg),
            other => invalid("plant", other.to_string()),
        })?;
        let q = plant.q();

        let mut grid = Grid::<f64>::default_for(q);
        if let Some(alphas) = self.grids.alphas {
            grid.alphas = alphas;
        }
        if let Some(sigmas) = self.grids.sigmas {
            grid.sigmas = sigmas;
        }
        grid.validate(q, true).map_err(|e| invalid("grids", e.to_string()))?;

        let w = self.weights;
        if !(w.rho1 >= 0.0 && w.rho2 >= 0.0) || w.rho1 + w.rho2 <= 0.0 {
            return Err(invalid("weights", "rho1, rho2 must be nonnegative and not both zero"));
        }

        let sim = self.simulation;
        let schedule: ScheduleMode = sim
            .schedule
            .parse()
            .map_err(|e: satstab_core::hybrid_sim::SimError| invalid("simulation.schedule", e.to_string()))?;
        if !(sim.horizon >= 0.0 && sim.horizon.is_finite()) {
            return Err(invalid("simulation.horizon", "must be finite and nonnegative"));
        }
        if !(sim.h_max > 0.0) {
            return Err(invalid("simulation.h_max", "must be positive"));
        }
        let initial_conditions = sim
            .initial_conditions
            .iter()
            .enumerate()
            .map(|(k, ic)| initial_state(ic, &plant, k))
            .collect::<Result<_, _>>()?;

        Ok(ProblemFile {
            plant,
            grid,
            weights: Weights {
                rho1: w.rho1,
                rho2: w.rho2,
            },
            initial_conditions,
            schedule,
            horizon: sim.horizon,
            h_max: sim.h_max,
            output_dir: self.output.directory,
            plot: self.output.plot,
        })
    }
}

fn initial_state(ic: &InitialCondition, plant: &PlantModel<f64>, k: usize) -> Result<HybridState<f64>, ProblemError> {
    let field = format!("simulation.initial_conditions[{k}]");
    let n = plant.n();
    if ic.xp.len() != n {
        return Err(invalid(format!("{field}.xp"), format!("expected {n} entries, got {}", ic.xp.len())));
    }
    let et = ic.eta_tilde.clone().unwrap_or_else(|| vec![0.0; n]);
    if et.len() != n {
        return Err(invalid(format!("{field}.eta_tilde"), format!("expected {n} entries, got {}", et.len())));
    }
    let tau = ic.tau.clone().unwrap_or_else(|| plant.t2().to_vec());
    if tau.len() != plant.q() {
        return Err(invalid(format!("{field}.tau"), format!("expected {} entries, got {}", plant.q(), tau.len())));
    }
    if let Some(i) = tau.iter().zip(plant.t2()).position(|(&t, &t2)| !(0.0..=t2).contains(&t)) {
        return Err(invalid(format!("{field}.tau"), format!("entry {i} outside [0, T2]")));
    }
    Ok(HybridState::new(ic.xp.clone(), et, tau))
}

/// The bundled example problem.
pub const EXAMPLE_PROBLEM: &str = include_str!("../data/example_sec5.json");
