//! Benchmark orchestration: grid search every (dataset, variant) pair, build
//! the result table and its rank statistics, optionally run robustness sweeps.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::data::{load_csv, CsvOptions, Dataset};
use crate::error::{Error, Result};
use crate::eval::{
    cross_validated_grid_search, robustness_sweep, CvOptions, GridSearchResult, GridSpec,
    PerturbationKind, RobustnessTable,
};
use crate::model::Variant;
use crate::stats::{ResultTable, StatsReport};
use crate::trainer::TrainConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataSection {
    pub paths: Vec<PathBuf>,
    pub has_header: bool,
    pub label_column: Option<usize>,
}

impl Default for DataSection {
    fn default() -> Self {
        Self {
            paths: Vec::new(),
            has_header: false,
            label_column: None,
        }
    }
}

impl DataSection {
    pub fn csv_options(&self) -> CsvOptions {
        CsvOptions {
            has_header: self.has_header,
            label_column: self.label_column,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub kind: PerturbationKind,
    /// Fractions in [0, 1].
    pub levels: Vec<f64>,
}

/// Everything that determines a benchmark's results. Worker count and output
/// location are execution details and deliberately not part of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub data: DataSection,
    pub variants: Vec<Variant>,
    pub folds: usize,
    pub seed: u64,
    pub grid: GridSpec,
    pub train: TrainConfig,
    pub perturbation: Option<PerturbationSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            data: DataSection::default(),
            variants: Variant::ALL.to_vec(),
            folds: 5,
            seed: 0,
            grid: GridSpec::default(),
            train: TrainConfig::default(),
            perturbation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub dataset: String,
    pub result: GridSearchResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub dataset: String,
    pub variant: Option<Variant>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub config: ExperimentConfig,
    pub table: Option<ResultTable>,
    pub stats: Option<StatsReport>,
    pub cells: Vec<CellResult>,
    pub robustness: Vec<RobustnessTable>,
    pub failures: Vec<Failure>,
}

impl BenchmarkReport {
    /// True when some dataset failed or the Friedman statistics could not be
    /// computed. A single-variant run has no rank statistics and is not
    /// partial on that account.
    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
            || self.table.is_none()
            || self.stats.as_ref().is_some_and(|s| s.friedman.is_none())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Runs the benchmark described by `cfg` with `jobs` worker threads. A dataset
/// that fails to load or train is recorded in `failures` and skipped; the
/// other datasets still run.
pub fn run_benchmark(cfg: &ExperimentConfig, jobs: usize) -> Result<BenchmarkReport> {
    if cfg.variants.is_empty() {
        return Err(Error::invalid("no model variants selected"));
    }
    if cfg.data.paths.is_empty() {
        return Err(Error::invalid("no datasets given"));
    }
    let mut datasets = Vec::new();
    let mut failures = Vec::new();
    for p in &cfg.data.paths {
        match load_csv(p, cfg.data.csv_options()).and_then(|d| d.ensure_trainable().map(|_| d)) {
            Ok(d) => datasets.push(d),
            Err(e) => {
                log::error!("{e}");
                failures.push(Failure {
                    dataset: p.display().to_string(),
                    variant: None,
                    error: e.to_string(),
                });
            }
        }
    }
    run_on_datasets(cfg, &datasets, jobs, failures)
}

pub fn run_on_datasets(
    cfg: &ExperimentConfig,
    datasets: &[Dataset],
    jobs: usize,
    mut failures: Vec<Failure>,
) -> Result<BenchmarkReport> {
    let opts = CvOptions {
        k: cfg.folds,
        seed: cfg.seed,
        jobs,
        base: cfg.train,
        perturbation: None,
    };
    let mut cells = Vec::new();
    let mut rows: Vec<(String, Vec<f64>, Vec<f64>)> = Vec::new();
    let mut robustness = Vec::new();

    for d in datasets {
        let mut acc = Vec::new();
        let mut std = Vec::new();
        let mut ok = true;
        for &v in &cfg.variants {
            log::info!("{}: grid search for {v}", d.name);
            match cross_validated_grid_search(d, v, &cfg.grid, &opts) {
                Ok(r) => {
                    acc.push(r.mean);
                    std.push(r.std);
                    cells.push(CellResult {
                        dataset: d.name.clone(),
                        result: r,
                    });
                }
                Err(e) => {
                    log::error!("{}: {v}: {e}", d.name);
                    failures.push(Failure {
                        dataset: d.name.clone(),
                        variant: Some(v),
                        error: e.to_string(),
                    });
                    ok = false;
                }
            }
        }
        if ok {
            rows.push((d.name.clone(), acc, std));
        }
        if let Some(p) = &cfg.perturbation {
            match robustness_sweep(d, &cfg.variants, p.kind, &p.levels, &cfg.grid, &opts) {
                Ok(t) => robustness.push(t),
                Err(e) => failures.push(Failure {
                    dataset: d.name.clone(),
                    variant: None,
                    error: format!("robustness sweep: {e}"),
                }),
            }
        }
    }

    let table = if rows.is_empty() {
        None
    } else {
        let (names, acc, std) = rows.into_iter().fold(
            (Vec::new(), Vec::new(), Vec::new()),
            |(mut n, mut a, mut s), (name, ra, rs)| {
                n.push(name);
                a.push(ra);
                s.push(rs);
                (n, a, s)
            },
        );
        Some(ResultTable::new(
            names,
            cfg.variants.iter().map(|v| v.to_string()).collect(),
            acc,
            std,
        )?)
    };
    let stats = match &table {
        Some(t) if t.n_models() >= 2 => Some(StatsReport::compute(t)?),
        _ => None,
    };
    Ok(BenchmarkReport {
        config: cfg.clone(),
        table,
        stats,
        cells,
        robustness,
        failures,
    })
}
