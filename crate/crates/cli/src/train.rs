use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use serde::Serialize;
use wave_rvfl::closed_form::{fit_elm, fit_rvfl};
use wave_rvfl::data::{load_csv, MinMaxScaler};
use wave_rvfl::eval::accuracy;
use wave_rvfl::trainer::{train_wave_rvfl, train_wave_rvfl_traced, write_trace_csv, TrainConfig};
use wave_rvfl::{Activation, RandomFeatureMap, Variant};

use crate::args::CsvArgs;
use crate::failure::{create_dir, write_file, CliResult, Failure};
use crate::Completion;

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Training data (CSV).
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "wave-rvfl")]
    variant: Variant,
    /// Seed for the random hidden layer and mini-batch sampling.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for model.json and summary.json.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    csv: CsvArgs,
    /// Regularization weight C.
    #[arg(long = "C")]
    c: Option<f64>,
    /// Hidden units N.
    #[arg(long = "N")]
    n_hidden: Option<usize>,
    /// Activation name or id (1 sigmoid .. 6 relu).
    #[arg(long)]
    activation: Option<Activation>,
    /// Wave-loss bound parameter.
    #[arg(long)]
    eta: Option<f64>,
    /// Wave-loss shape parameter.
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<f64>,
    /// Adam learning rate.
    #[arg(long)]
    alpha: Option<f64>,
    /// Stop when no weight moves more than this in one step.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Mini-batch size (default: 32 below 500 samples, else 256).
    #[arg(long)]
    batch_size: Option<usize>,
    /// Also write trace.csv with the objective and step size per iteration.
    #[arg(long)]
    trace: bool,
}

impl TrainArgs {
    fn config(&self) -> TrainConfig {
        let d = TrainConfig::default();
        TrainConfig {
            c: self.c.unwrap_or(d.c),
            n_hidden: self.n_hidden.unwrap_or(d.n_hidden),
            activation: self.activation.unwrap_or(d.activation),
            eta: self.eta.unwrap_or(d.eta),
            gamma: self.gamma.unwrap_or(d.gamma),
            alpha: self.alpha.unwrap_or(d.alpha),
            tol: self.tol.unwrap_or(d.tol),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            batch_size: self.batch_size,
            seed: self.seed,
            ..d
        }
    }
}

#[derive(Serialize)]
struct Summary<'a> {
    variant: Variant,
    data: String,
    n_samples: usize,
    n_features: usize,
    seed: u64,
    config: &'a TrainConfig,
    train_accuracy: f64,
    iterations: Option<usize>,
    final_objective: Option<f64>,
    converged: Option<bool>,
    wall_time_secs: f64,
}

pub fn run(args: TrainArgs) -> CliResult<Completion> {
    let cfg = args.config();
    let raw = load_csv(&args.data, args.csv.options())?;
    raw.ensure_trainable()?;
    let scaler = MinMaxScaler::fit(raw.x().view())?;
    let data = scaler.transform_dataset(&raw)?;
    create_dir(&args.out)?;

    let start = Instant::now();
    let (model, trace) = match args.variant {
        Variant::WaveRvfl => {
            if args.trace {
                let out = train_wave_rvfl_traced(&data, &cfg)?;
                (out.model, out.trace)
            } else {
                (train_wave_rvfl(&data, &cfg)?, None)
            }
        }
        v => {
            let map = RandomFeatureMap::new(data.n_features(), cfg.n_hidden, cfg.activation, cfg.seed)?;
            let m = if v == Variant::Rvfl {
                fit_rvfl(&data, cfg.c, &map)?
            } else {
                fit_elm(&data, cfg.c, &map)?
            };
            if args.trace {
                log::warn!("--trace only applies to wave-rvfl; no trace written");
            }
            (m, None)
        }
    };
    let wall = start.elapsed().as_secs_f64();
    let model = model.with_scaler(scaler);

    let pred = model.predict(raw.x().view())?;
    let train_accuracy = accuracy(pred.view(), raw.y().view())?;
    let info = model.training();

    let model_path = args.out.join("model.json");
    model.save(&model_path)?;
    if let Some(rows) = trace {
        let path = args.out.join("trace.csv");
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &rows).map_err(|e| Failure::io(&path, e))?;
        write_file(&path, buf)?;
    }
    let summary = Summary {
        variant: args.variant,
        data: args.data.display().to_string(),
        n_samples: raw.n_samples(),
        n_features: raw.n_features(),
        seed: cfg.seed,
        config: &cfg,
        train_accuracy,
        iterations: info.map(|i| i.iterations),
        final_objective: info.map(|i| i.final_objective),
        converged: info.map(|i| i.converged),
        wall_time_secs: wall,
    };
    write_file(
        &args.out.join("summary.json"),
        serde_json::to_string_pretty(&summary)? + "\n",
    )?;
    log::info!(
        "{}: {} training accuracy {:.4}% in {wall:.2}s; model written to {}",
        raw.name,
        args.variant,
        train_accuracy,
        model_path.display()
    );
    Ok(Completion::Done)
}
