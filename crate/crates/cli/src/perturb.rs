use std::path::PathBuf;

use clap::Args;
use wave_rvfl::data::load_csv;

use crate::args::{percent_levels, CsvArgs, PerturbMode};
use crate::failure::{create_dir, CliResult, Failure};
use crate::Completion;

#[derive(Args, Debug)]
pub struct PerturbArgs {
    /// Clean dataset (CSV).
    #[arg(long)]
    data: PathBuf,
    #[arg(long, value_enum)]
    mode: PerturbMode,
    /// Levels in percent of samples affected, e.g. 5,10,15,20.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    levels: Vec<f64>,
    /// Gaussian noise standard deviation as a multiple of each feature's.
    #[arg(long, default_value_t = 1.0)]
    sigma_scale: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; one CSV and one provenance JSON per level.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    csv: CsvArgs,
}

pub fn run(args: PerturbArgs) -> CliResult<Completion> {
    let fractions = percent_levels(&args.levels).map_err(Failure::usage)?;
    let kind = args.mode.kind(args.sigma_scale);
    let clean = load_csv(&args.data, args.csv.options())?;
    create_dir(&args.out)?;
    let stem = clean.name.clone();
    for (&pct, &fraction) in args.levels.iter().zip(&fractions) {
        let base = args.out.join(format!("{stem}_{}_{pct}pct", kind.name()));
        let csv_path = base.with_extension("csv");
        let json_path = base.with_extension("json");
        let perturbed = kind.apply(&clean, fraction, args.seed)?;
        if fraction == 0.0 {
            // Nothing is touched, so keep the input bytes exactly.
            std::fs::copy(&args.data, &csv_path).map_err(|e| Failure::io(&csv_path, e))?;
        } else {
            perturbed.write_csv(&csv_path)?;
        }
        perturbed.write_provenance(&json_path)?;
        log::info!("{pct}%: wrote {}", csv_path.display());
    }
    Ok(Completion::Done)
}
