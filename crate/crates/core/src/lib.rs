//! Random vector functional link (RVFL) classifiers for binary labels.
//!
//! * [`feature_map`]: frozen random hidden layer and the `[X | H1]` design matrix.
//! * [`losses`]: square loss, the bounded wave loss and the wave-loss objective
//!   with its gradient.
//! * [`closed_form`]: square-loss RVFL and ELM solved by ridge regression.
//! * [`adam`] / [`trainer`]: Wave-RVFL trained by mini-batch Adam.
//! * [`data`]: CSV datasets, scaling, folds and robustness perturbations.
//! * [`eval`] / [`stats`]: cross-validated grid search, average ranks, the
//!   Friedman test and win/tie/loss counts.
//! * [`experiment`]: end-to-end benchmark runs.

pub mod adam;
pub mod closed_form;
pub mod data;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod feature_map;
pub mod linalg;
pub mod losses;
pub mod model;
pub mod stats;
pub mod trainer;

pub use error::{Error, Result};
pub use feature_map::{Activation, EnhancedMatrix, RandomFeatureMap};
pub use model::{ModelWeights, Variant};

/// Mixes `stream` into `seed` (splitmix64 finalizer), giving independent
/// generator seeds for different purposes from one user seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(0x9E37_79B9_7F4A_7C15).rotate_left(17);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
