use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use wave_rvfl::data::{load_csv, load_features_csv};
use wave_rvfl::eval::accuracy;
use wave_rvfl::ModelWeights;

use crate::args::CsvArgs;
use crate::failure::{write_file, CliResult};
use crate::Completion;

#[derive(Args, Debug)]
pub struct PredictArgs {
    /// model.json written by `train`.
    #[arg(long)]
    model: PathBuf,
    /// Rows to label (CSV).
    #[arg(long)]
    data: PathBuf,
    /// Every column is a feature; there is no label column.
    #[arg(long)]
    unlabeled: bool,
    #[command(flatten)]
    csv: CsvArgs,
    /// Write labels here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn run(args: PredictArgs) -> CliResult<Completion> {
    let model = ModelWeights::load(&args.model)?;
    let (x, truth) = if args.unlabeled {
        (load_features_csv(&args.data, args.csv.has_header)?, None)
    } else {
        let d = load_csv(&args.data, args.csv.options())?;
        let y = d.y().clone();
        (d.x().clone(), Some(y))
    };
    let pred = model.predict(x.view())?;
    if let Some(y) = truth {
        log::info!("accuracy {:.4}% on {} rows", accuracy(pred.view(), y.view())?, y.len());
    }
    let mut text = String::with_capacity(3 * pred.len());
    for p in &pred {
        let _ = writeln!(text, "{}", *p as i8);
    }
    match &args.out {
        Some(path) => write_file(path, text)?,
        None => print!("{text}"),
    }
    Ok(Completion::Done)
}
