use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::{sample_production, sample_pwl_params, sample_quadratic_params};
use super::stats::{box_stats, BoxStats};
use crate::model::{MarketInstance, ModelKind};
use crate::shaping::{check_pwl_set, check_quadratic_set};
use crate::solver::{solve, MethodChoice, SolveError, SolverConfig};

pub const QUARTILE_CONVENTION: &str = "linear";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentFamily {
    Quadratic,
    Pwl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Thresholds {
    One(f64),
    Many(Vec<f64>),
}

impl Thresholds {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Thresholds::One(v) => vec![*v],
            Thresholds::Many(v) => v.clone(),
        }
    }
}

/// A seeded Monte Carlo plan: `k` trials per cell, one cell per
/// (system size, threshold) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub family: ExperimentFamily,
    pub n: usize,
    pub k: usize,
    pub lambda_dagger: Thresholds,
    pub seed: u64,
    /// System sizes to run instead of `n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_list: Option<Vec<usize>>,
    #[serde(default = "default_model")]
    pub model: ModelKind,
}

fn default_model() -> ModelKind {
    ModelKind::Mtes
}

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),
    #[error("cell {cell}, trial {trial}: sampled parameters are not admissible")]
    Inadmissible { cell: String, trial: usize },
    #[error("cell {cell}, trial {trial}: {source}")]
    Solve { cell: String, trial: usize, source: SolveError },
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::InvalidSpec(m.to_string()));
        if self.n == 0 {
            return bad("n >= 1 required");
        }
        if self.k == 0 {
            return bad("k >= 1 required");
        }
        let thresholds = self.lambda_dagger.values();
        if thresholds.is_empty() {
            return bad("lambda_dagger list is empty");
        }
        if thresholds.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return bad("lambda_dagger must be positive");
        }
        if let Some(scales) = &self.scale_list {
            if scales.is_empty() || scales.contains(&0) {
                return bad("scale_list entries must be >= 1");
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, ExperimentError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// Cells in output order.
    pub fn cells(&self) -> Vec<Cell> {
        let scales = self.scale_list.clone();
        let sizes = scales.clone().unwrap_or_else(|| vec![self.n]);
        let mut cells = Vec::new();
        for &n in &sizes {
            for lambda_dagger in self.lambda_dagger.values() {
                let key = if scales.is_some() {
                    format!("n={n}/lambda_dagger={lambda_dagger}")
                } else {
                    format!("lambda_dagger={lambda_dagger}")
                };
                cells.push(Cell { key, n, lambda_dagger });
            }
        }
        cells
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub key: String,
    pub n: usize,
    pub lambda_dagger: f64,
}

/// Seed of trial `trial` in cell `cell`.
pub fn trial_seed(master: u64, cell: usize, trial: usize) -> u64 {
    master.wrapping_add(((cell as u64) << 32) | trial as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub cell_key: String,
    pub trial: usize,
    pub seed: u64,
    pub lambda_star: f64,
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub cell: Cell,
    pub lambda_stars: Vec<f64>,
    pub stats: BoxStats,
    /// Largest KKT violation over the cell's trials.
    pub max_kkt_violation: f64,
}

#[derive(Debug, Clone)]
pub struct MonteCarloOutput {
    pub spec: ExperimentSpec,
    pub trials: Vec<TrialRecord>,
    pub cells: Vec<CellResult>,
}

/// Sample one trial's market: production, then parameters on the
/// admissibility boundary for `lambda_dagger`.
pub fn sample_trial(
    family: ExperimentFamily,
    model: ModelKind,
    n: usize,
    lambda_dagger: f64,
    seed: u64,
) -> (MarketInstance, bool) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = loop {
        let a = sample_production(n, &mut rng);
        if a.iter().sum::<f64>() > 0.0 {
            break a;
        }
    };
    let capacity: f64 = a.iter().sum();
    match family {
        ExperimentFamily::Quadratic => {
            let (b, m) = sample_quadratic_params(n, capacity, lambda_dagger, &mut rng);
            let ok = check_quadratic_set(b[0], m[0], n, capacity, lambda_dagger).is_ok_and(|v| v.admissible);
            (MarketInstance::quadratic(model, &a, &b, &m), ok)
        }
        ExperimentFamily::Pwl => {
            let (beta, phi) = sample_pwl_params(n, capacity, lambda_dagger, &mut rng);
            let ok = check_pwl_set(beta[0], phi[0], n, capacity, lambda_dagger).is_ok_and(|v| v.admissible);
            (MarketInstance::pwl(model, &a, &beta, &phi), ok)
        }
    }
}

/// Run every trial of every cell. Trials run in parallel on the current
/// rayon pool; output is in (cell, trial) order regardless.
pub fn run_monte_carlo(spec: &ExperimentSpec) -> Result<MonteCarloOutput, ExperimentError> {
    spec.validate()?;
    let cfg = SolverConfig::default();
    let cells = spec.cells();
    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..spec.k).map(move |t| (c, t))).collect();

    let solved: Vec<(TrialRecord, f64)> = jobs
        .par_iter()
        .map(|&(c, trial)| {
            let cell = &cells[c];
            let seed = trial_seed(spec.seed, c, trial);
            let (instance, admissible) = sample_trial(spec.family, spec.model, cell.n, cell.lambda_dagger, seed);
            if !admissible {
                return Err(ExperimentError::Inadmissible { cell: cell.key.clone(), trial });
            }
            let r = solve(&instance, &cfg, MethodChoice::Auto).map_err(|source| ExperimentError::Solve {
                cell: cell.key.clone(),
                trial,
                source,
            })?;
            let record = TrialRecord { cell_key: cell.key.clone(), trial, seed, lambda_star: r.lambda_star };
            Ok((record, r.kkt_max_violation))
        })
        .collect::<Result<_, _>>()?;

    let mut results = Vec::with_capacity(cells.len());
    for (c, cell) in cells.into_iter().enumerate() {
        let chunk = &solved[c * spec.k..(c + 1) * spec.k];
        let lambda_stars: Vec<f64> = chunk.iter().map(|(r, _)| r.lambda_star).collect();
        let stats = box_stats(&lambda_stars).expect("k >= 1 finite prices");
        let max_kkt_violation = chunk.iter().map(|(_, v)| *v).fold(0.0, f64::max);
        results.push(CellResult { cell, lambda_stars, stats, max_kkt_violation });
    }
    let trials = solved.into_iter().map(|(r, _)| r).collect();
    Ok(MonteCarloOutput { spec: spec.clone(), trials, cells: results })
}

#[derive(Serialize)]
struct StatsRow<'a> {
    cell_key: &'a str,
    median: f64,
    q25: f64,
    q75: f64,
    wlo: f64,
    whi: f64,
    n_outliers: usize,
}

impl MonteCarloOutput {
    pub fn results_csv(&self) -> Result<String, ExperimentError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for t in &self.trials {
            w.serialize(t)?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
    }

    pub fn stats_csv(&self) -> Result<String, ExperimentError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for c in &self.cells {
            w.serialize(StatsRow {
                cell_key: &c.cell.key,
                median: c.stats.median,
                q25: c.stats.q25,
                q75: c.stats.q75,
                wlo: c.stats.whisker_low,
                whi: c.stats.whisker_high,
                n_outliers: c.stats.outliers.len(),
            })?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("csv is utf-8"))
    }

    pub fn metadata(&self) -> serde_json::Value {
        serde_json::json!({
            "spec": self.spec,
            "seed": self.spec.seed,
            "quartile_convention": QUARTILE_CONVENTION,
            "version": env!("CARGO_PKG_VERSION"),
        })
    }

    /// Write `results.csv`, `stats.csv` and `metadata.json` into `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(), ExperimentError> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("results.csv"), self.results_csv()?)?;
        fs::write(dir.join("stats.csv"), self.stats_csv()?)?;
        fs::write(dir.join("metadata.json"), serde_json::to_string_pretty(&self.metadata())? + "\n")?;
        Ok(())
    }
}
