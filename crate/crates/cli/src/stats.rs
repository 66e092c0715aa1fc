use std::path::{Path, PathBuf};

use clap::Args;
use wave_rvfl::stats::{ResultTable, StatsReport};

use crate::failure::CliResult;
use crate::Completion;

#[derive(Args, Debug)]
pub struct StatsArgs {
    /// Result table CSV: `dataset,<model>,<model>_std,...`, optional
    /// `Average Rank` row (ignored).
    #[arg(long)]
    table: PathBuf,
}

pub fn run(args: StatsArgs) -> CliResult<Completion> {
    print_table_stats(&args.table)
}

/// Prints the rank statistics of a stored result table to standard output.
pub fn print_table_stats(path: &Path) -> CliResult<Completion> {
    let table = ResultTable::load_csv(path)?;
    let report = StatsReport::compute(&table)?;
    print!(
        "{} datasets, {} models\n{}",
        table.n_datasets(),
        table.n_models(),
        report.render()
    );
    Ok(match report.friedman_error {
        Some(e) => Completion::Partial(e),
        None => Completion::Done,
    })
}
