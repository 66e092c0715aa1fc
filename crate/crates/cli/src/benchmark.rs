use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Args;
use wave_rvfl::experiment::{run_benchmark, BenchmarkReport, ExperimentConfig, PerturbationSpec};
use wave_rvfl::{Activation, Variant};

use crate::args::{percent_levels, CsvArgs, PerturbMode};
use crate::failure::{create_dir, write_file, CliResult, Failure};
use crate::stats::print_table_stats;
use crate::Completion;

#[derive(Args, Debug)]
pub struct BenchmarkArgs {
    /// TOML experiment file; flags given on the command line override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset CSV (repeatable).
    #[arg(long = "data")]
    data: Vec<PathBuf>,
    /// Comma-separated subset of rvfl, elm, wave-rvfl.
    #[arg(long, value_delimiter = ',')]
    variants: Vec<Variant>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads. Results do not depend on it.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output directory.
    #[arg(long, required_unless_present = "stats_only")]
    out: Option<PathBuf>,
    #[command(flatten)]
    csv: CsvArgs,

    #[arg(long = "C-values", value_delimiter = ',')]
    c_values: Vec<f64>,
    #[arg(long = "N-values", value_delimiter = ',')]
    n_values: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    eta_values: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    gamma_values: Vec<f64>,
    /// Activation names or ids.
    #[arg(long, value_delimiter = ',')]
    activations: Vec<Activation>,
    #[arg(long, value_delimiter = ',')]
    alpha_values: Vec<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,

    /// Also run a robustness sweep with this perturbation of the training folds.
    #[arg(long)]
    perturb: Option<PerturbMode>,
    /// Sweep levels in percent, e.g. 5,10,15,20.
    #[arg(long, value_delimiter = ',', requires = "perturb")]
    levels: Vec<f64>,
    /// Gaussian noise standard deviation as a multiple of each feature's.
    #[arg(long, default_value_t = 1.0)]
    sigma_scale: f64,

    /// Only compute rank statistics from an existing result table.
    #[arg(long, requires = "fixture")]
    stats_only: bool,
    /// Result table CSV for --stats-only.
    #[arg(long)]
    fixture: Option<PathBuf>,
}

fn load_config(path: &Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
    toml::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn replace<T: Clone>(target: &mut Vec<T>, given: &[T]) {
    if !given.is_empty() {
        *target = given.to_vec();
    }
}

impl BenchmarkArgs {
    fn experiment(&self) -> CliResult<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => load_config(p)?,
            None => ExperimentConfig::default(),
        };
        replace(&mut cfg.data.paths, &self.data);
        cfg.data.has_header |= self.csv.has_header;
        if self.csv.label_column.is_some() {
            cfg.data.label_column = self.csv.label_column;
        }
        replace(&mut cfg.variants, &self.variants);
        cfg.folds = self.folds.unwrap_or(cfg.folds);
        cfg.seed = self.seed.unwrap_or(cfg.seed);
        replace(&mut cfg.grid.c_values, &self.c_values);
        replace(&mut cfg.grid.n_hidden_values, &self.n_values);
        replace(&mut cfg.grid.eta_values, &self.eta_values);
        replace(&mut cfg.grid.gamma_values, &self.gamma_values);
        replace(&mut cfg.grid.activations, &self.activations);
        replace(&mut cfg.grid.alpha_values, &self.alpha_values);
        cfg.train.max_iters = self.max_iters.unwrap_or(cfg.train.max_iters);
        cfg.train.tol = self.tol.unwrap_or(cfg.train.tol);
        if self.batch_size.is_some() {
            cfg.train.batch_size = self.batch_size;
        }
        if let Some(mode) = self.perturb {
            if self.levels.is_empty() {
                return Err(Failure::usage("--perturb needs --levels"));
            }
            cfg.perturbation = Some(PerturbationSpec {
                kind: mode.kind(self.sigma_scale),
                levels: percent_levels(&self.levels).map_err(Failure::usage)?,
            });
        }
        Ok(cfg)
    }
}

fn report_text(report: &BenchmarkReport) -> String {
    let mut out = String::new();
    if let Some(stats) = &report.stats {
        out.push_str(&stats.render());
    }
    if !report.cells.is_empty() {
        out.push_str("Selected configurations\n");
        for cell in &report.cells {
            let r = &cell.result;
            let _ = writeln!(
                out,
                "  {:<20} {:<10} {:.4} +- {:.4}  {}",
                cell.dataset,
                r.variant.to_string(),
                r.mean,
                r.std,
                serde_json::to_string(&r.best).unwrap_or_default()
            );
        }
    }
    for t in &report.robustness {
        let _ = writeln!(out, "Robustness: {} ({})", t.dataset, t.perturbation.name());
        out.push_str(&t.to_csv_string());
    }
    if !report.failures.is_empty() {
        out.push_str("Failures\n");
        for f in &report.failures {
            let v = f.variant.map(|v| format!(" {v}")).unwrap_or_default();
            let _ = writeln!(out, "  {}{v}: {}", f.dataset, f.error);
        }
    }
    out
}

pub fn run(args: BenchmarkArgs) -> CliResult<Completion> {
    if args.stats_only {
        let fixture = args.fixture.as_ref().expect("clap enforces --fixture");
        return print_table_stats(fixture);
    }
    let out = args.out.clone().expect("clap enforces --out");
    let cfg = args.experiment()?;
    if cfg.data.paths.is_empty() {
        return Err(Failure::usage("no datasets: pass --data or set data.paths in --config"));
    }
    create_dir(&out)?;
    let config_text = toml::to_string(&cfg)
        .map_err(|e| Failure::usage(format!("cannot serialize config: {e}")))?;
    write_file(&out.join("config.toml"), config_text)?;

    let report = run_benchmark(&cfg, args.jobs)?;

    write_file(&out.join("results.json"), report.to_json()? + "\n")?;
    if let Some(table) = &report.table {
        let ranks = report.stats.as_ref().map(|s| s.average_ranks.as_slice());
        write_file(&out.join("results.csv"), table.to_csv_string(ranks))?;
    }
    for t in &report.robustness {
        write_file(
            &out.join(format!("robustness_{}.csv", t.dataset)),
            t.to_csv_string(),
        )?;
    }
    let text = report_text(&report);
    write_file(&out.join("report.txt"), &text)?;
    print!("{text}");

    if report.is_partial() {
        let why = if report.failures.is_empty() {
            "rank statistics unavailable".to_string()
        } else {
            format!("{} dataset/variant runs failed", report.failures.len())
        };
        return Ok(Completion::Partial(format!("partial results: {why}")));
    }
    Ok(Completion::Done)
}
