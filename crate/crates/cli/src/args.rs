use clap::Args;
use wave_rvfl::data::CsvOptions;

#[derive(Args, Debug, Clone)]
pub struct CsvArgs {
    /// The first row holds column names.
    #[arg(long)]
    pub has_header: bool,
    /// Zero-based label column (default: last).
    #[arg(long)]
    pub label_column: Option<usize>,
}

impl CsvArgs {
    pub fn options(&self) -> CsvOptions {
        CsvOptions {
            has_header: self.has_header,
            label_column: self.label_column,
        }
    }
}

/// Percent values such as `5,10,15,20` as fractions.
pub fn percent_levels(levels: &[f64]) -> Result<Vec<f64>, String> {
    levels
        .iter()
        .map(|&l| {
            if (0.0..=100.0).contains(&l) {
                Ok(l / 100.0)
            } else {
                Err(format!("perturbation level {l}% outside [0, 100]"))
            }
        })
        .collect()
}

#[derive(clap::ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PerturbMode {
    LabelFlip,
    Gaussian,
}

impl PerturbMode {
    pub fn kind(self, sigma_scale: f64) -> wave_rvfl::eval::PerturbationKind {
        match self {
            PerturbMode::LabelFlip => wave_rvfl::eval::PerturbationKind::LabelFlip,
            PerturbMode::Gaussian => wave_rvfl::eval::PerturbationKind::Gaussian { sigma_scale },
        }
    }
}
