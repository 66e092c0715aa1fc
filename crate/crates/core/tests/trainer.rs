mod common;

use ndarray::{array, Array1, Array2};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wave_rvfl::adam::AdamState;
use wave_rvfl::data::{normalize, Dataset};
use wave_rvfl::eval::accuracy;
use wave_rvfl::trainer::{train_wave_rvfl, train_wave_rvfl_traced, TrainConfig};

fn train_accuracy(d: &Dataset, cfg: &TrainConfig) -> f64 {
    let m = train_wave_rvfl(d, cfg).unwrap();
    accuracy(m.predict(d.x().view()).unwrap().view(), d.y().view()).unwrap()
}

#[test]
fn even_loss_fits_separable_gaussians() {
    for seed in 0..5 {
        let d = common::two_gaussians(400, 2, seed);
        let (d, _) = normalize(&d, &[]).unwrap();
        let cfg = TrainConfig {
            c: 1.0,
            eta: 1.0,
            gamma: 0.0,
            n_hidden: 23,
            alpha: 0.01,
            max_iters: 1000,
            seed,
            ..Default::default()
        };
        let acc = train_accuracy(&d, &cfg);
        assert!(acc >= 95.0, "seed {seed}: training accuracy {acc}");
    }
}

#[test]
fn default_config_fits_separable_gaussians() {
    for seed in 0..5 {
        let d = common::two_gaussians(400, 2, seed);
        let (d, _) = normalize(&d, &[]).unwrap();
        let cfg = TrainConfig {
            seed,
            ..Default::default()
        };
        let acc = train_accuracy(&d, &cfg);
        assert!(acc >= 95.0, "seed {seed}: training accuracy {acc}");
    }
}

#[test]
fn step_size_tends_to_learning_rate_under_constant_gradient() {
    // The initial second moment u0 = 0.01 decays like 0.999^t and is not
    // removed by bias correction, so gradients far below 0.1 need longer.
    for g in [3.0, -0.2, 1.0] {
        let alpha = 0.01;
        let mut st = AdamState::new(1, 0.01, 0.01, alpha, 0.9, 0.999, 1e-8).unwrap();
        let mut beta = array![0.01];
        let mut last = 0.0;
        for _ in 0..10_000 {
            last = st.step(&mut beta, array![g].view()).unwrap();
        }
        let rel = (last - alpha).abs() / alpha;
        assert!(rel < 1e-3, "gradient {g}: step {last}, relative gap {rel}");
    }
}

#[test]
fn full_batch_objective_mostly_decreases() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for inst in 0..5 {
        let n = 60;
        let x = Array2::from_shape_fn((n, 3), |_| rng.random_range(0.0..1.0));
        let y = Array1::from_shape_fn(n, |i| if x[[i, 0]] + 0.2 * x[[i, 1]] > 0.6 { 1.0 } else { -1.0 });
        let d = Dataset::new("random", x, y).unwrap();
        let cfg = TrainConfig {
            batch_size: Some(n),
            alpha: 1e-3,
            tol: 0.0,
            max_iters: 1000,
            seed: inst,
            ..Default::default()
        };
        let trace = train_wave_rvfl_traced(&d, &cfg).unwrap().trace.unwrap();
        let checkpoints: Vec<f64> = trace.iter().step_by(50).map(|r| r.objective).collect();
        let pairs = checkpoints.len() - 1;
        let down = checkpoints.windows(2).filter(|w| w[1] <= w[0]).count();
        assert!(
            down as f64 >= 0.8 * pairs as f64,
            "instance {inst}: {down}/{pairs} checkpoints non-increasing"
        );
    }
}

#[test]
fn converged_run_reports_small_final_step() {
    let d = common::two_gaussians(100, 2, 9);
    let cfg = TrainConfig {
        tol: 1e-3,
        max_iters: 5000,
        alpha: 1e-3,
        ..Default::default()
    };
    let out = train_wave_rvfl_traced(&d, &cfg).unwrap();
    let info = out.model.training().unwrap();
    let last = out.trace.unwrap().pop().unwrap();
    assert_eq!(info.converged, last.step_infnorm < 1e-3);
    assert!(info.iterations <= 5000);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn iterations_never_exceed_limit(seed in 0u64..500, max_iters in 1usize..60, tol in 0.0f64..1e-2) {
        let d = common::two_gaussians(30, 2, seed);
        let cfg = TrainConfig { seed, max_iters, tol, ..Default::default() };
        let info = train_wave_rvfl(&d, &cfg).unwrap().training().unwrap();
        prop_assert!(info.iterations >= 1 && info.iterations <= max_iters);
        prop_assert!(info.final_objective.is_finite());
    }

    #[test]
    fn identical_inputs_give_identical_weights(seed in 0u64..500) {
        let d = common::two_gaussians(50, 3, seed);
        let cfg = TrainConfig { seed, max_iters: 40, ..Default::default() };
        let a = train_wave_rvfl(&d, &cfg).unwrap();
        let b = train_wave_rvfl(&d, &cfg).unwrap();
        prop_assert_eq!(a.beta(), b.beta());
    }
}
