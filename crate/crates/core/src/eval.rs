//! Accuracy, cross-validated grid search and robustness sweeps.

use ndarray::ArrayView1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::{fit_elm, fit_rvfl};
use crate::data::{
    inject_gaussian_noise, inject_label_noise, kfold_split, normalize, Dataset, FoldPlan,
};
use crate::derive_seed;
use crate::error::{Error, Result};
use crate::feature_map::{Activation, RandomFeatureMap};
use crate::model::{ModelWeights, Variant};
use crate::stats::{average_ranks, ResultTable};
use crate::trainer::{train_wave_rvfl, TrainConfig};

/// Percentage of positions where `pred` equals `truth`.
pub fn accuracy(pred: ArrayView1<f64>, truth: ArrayView1<f64>) -> Result<f64> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(Error::invalid(format!(
            "accuracy needs equal non-zero lengths (got {} and {})",
            pred.len(),
            truth.len()
        )));
    }
    let hits = pred.iter().zip(truth.iter()).filter(|(a, b)| a == b).count();
    Ok(100.0 * hits as f64 / pred.len() as f64)
}

/// Mean and sample standard deviation (n-1 denominator; 0 for one value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Hyperparameter value lists searched by cross-validation. Closed-form
/// variants only use `c_values`, `n_hidden_values` and `activations`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    #[serde(rename = "C_values")]
    pub c_values: Vec<f64>,
    #[serde(rename = "N_values")]
    pub n_hidden_values: Vec<usize>,
    pub eta_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub activations: Vec<Activation>,
    pub alpha_values: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            c_values: (-5..=5).map(|k| format!("1e{k}").parse().unwrap()).collect(),
            n_hidden_values: (0..=10).map(|i| 3 + 20 * i).collect(),
            eta_values: (0..8).map(|i| (10 + 25 * i) as f64 / 100.0).collect(),
            gamma_values: (0..15).map(|i| -2.0 + 0.5 * i as f64).collect(),
            activations: Activation::ALL.to_vec(),
            alpha_values: vec![1e-4, 1e-3, 1e-2],
        }
    }
}

impl GridSpec {
    /// A grid holding exactly one configuration.
    pub fn single(h: &HyperParams) -> Self {
        Self {
            c_values: vec![h.c],
            n_hidden_values: vec![h.n_hidden],
            eta_values: h.eta.into_iter().collect(),
            gamma_values: h.gamma.into_iter().collect(),
            activations: vec![h.activation],
            alpha_values: h.alpha.into_iter().collect(),
        }
    }

    pub fn validate(&self, variant: Variant) -> Result<()> {
        let mut empty = Vec::new();
        if self.c_values.is_empty() {
            empty.push("C");
        }
        if self.n_hidden_values.is_empty() {
            empty.push("N");
        }
        if self.activations.is_empty() {
            empty.push("activation");
        }
        if variant == Variant::WaveRvfl {
            for (name, len) in [
                ("eta", self.eta_values.len()),
                ("gamma", self.gamma_values.len()),
                ("alpha", self.alpha_values.len()),
            ] {
                if len == 0 {
                    empty.push(name);
                }
            }
        }
        if !empty.is_empty() {
            return Err(Error::invalid(format!(
                "grid has empty value lists for {}",
                empty.join(", ")
            )));
        }
        Ok(())
    }

    /// All configurations for `variant`, nested in the order
    /// C, N, eta, gamma, activation, alpha (outermost first).
    pub fn configs(&self, variant: Variant) -> Vec<HyperParams> {
        let mut out = Vec::new();
        for &c in &self.c_values {
            for &n_hidden in &self.n_hidden_values {
                if variant == Variant::WaveRvfl {
                    for &eta in &self.eta_values {
                        for &gamma in &self.gamma_values {
                            for &activation in &self.activations {
                                for &alpha in &self.alpha_values {
                                    out.push(HyperParams {
                                        c,
                                        n_hidden,
                                        activation,
                                        eta: Some(eta),
                                        gamma: Some(gamma),
                                        alpha: Some(alpha),
                                    });
                                }
                            }
                        }
                    }
                } else {
                    for &activation in &self.activations {
                        out.push(HyperParams {
                            c,
                            n_hidden,
                            activation,
                            eta: None,
                            gamma: None,
                            alpha: None,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "N")]
    pub n_hidden: usize,
    pub activation: Activation,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub alpha: Option<f64>,
}

impl HyperParams {
    /// Stable content hash, so a configuration gets the same random layer
    /// wherever it appears in a grid.
    pub fn fingerprint(&self) -> u64 {
        let opt = |v: Option<f64>| v.map_or(u64::MAX, f64::to_bits);
        [
            self.c.to_bits(),
            self.n_hidden as u64,
            self.activation.id() as u64,
            opt(self.eta),
            opt(self.gamma),
            opt(self.alpha),
        ]
        .into_iter()
        .fold(0x5EED, derive_seed)
    }

    pub fn train_config(&self, base: &TrainConfig, seed: u64) -> TrainConfig {
        TrainConfig {
            c: self.c,
            n_hidden: self.n_hidden,
            activation: self.activation,
            eta: self.eta.unwrap_or(base.eta),
            gamma: self.gamma.unwrap_or(base.gamma),
            alpha: self.alpha.unwrap_or(base.alpha),
            seed,
            ..*base
        }
    }
}

/// Fits one model of `variant` on `train` with hyperparameters `h`.
pub fn fit_variant(
    variant: Variant,
    train: &Dataset,
    h: &HyperParams,
    base: &TrainConfig,
    seed: u64,
) -> Result<ModelWeights> {
    match variant {
        Variant::WaveRvfl => train_wave_rvfl(train, &h.train_config(base, seed)),
        Variant::Rvfl | Variant::Elm => {
            let map = RandomFeatureMap::new(train.n_features(), h.n_hidden, h.activation, seed)?;
            if variant == Variant::Rvfl {
                fit_rvfl(train, h.c, &map)
            } else {
                fit_elm(train, h.c, &map)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PerturbationKind {
    LabelFlip,
    Gaussian { sigma_scale: f64 },
}

impl PerturbationKind {
    pub fn name(&self) -> &'static str {
        match self {
            PerturbationKind::LabelFlip => "label-flip",
            PerturbationKind::Gaussian { .. } => "gaussian",
        }
    }

    pub fn apply(&self, d: &Dataset, level: f64, seed: u64) -> Result<Dataset> {
        match *self {
            PerturbationKind::LabelFlip => inject_label_noise(d, level, seed),
            PerturbationKind::Gaussian { sigma_scale } => {
                inject_gaussian_noise(d, level, sigma_scale, seed)
            }
        }
    }
}

/// A perturbation applied to the training portion of every fold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub kind: PerturbationKind,
    pub level: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvOptions {
    pub k: usize,
    pub seed: u64,
    /// Worker threads for evaluating grid cells. Results do not depend on it.
    pub jobs: usize,
    /// Fixed training settings for the iterative variant.
    pub base: TrainConfig,
    pub perturbation: Option<Perturbation>,
}

impl Default for CvOptions {
    fn default() -> Self {
        Self {
            k: 5,
            seed: 0,
            jobs: 1,
            base: TrainConfig::default(),
            perturbation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigScore {
    pub params: HyperParams,
    pub mean: f64,
    pub valid_folds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub variant: Variant,
    pub best: HyperParams,
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub fold_plan: FoldPlan,
    /// Mean CV accuracy of every configuration with at least one valid fold,
    /// in grid order.
    pub scores: Vec<ConfigScore>,
}

struct PreparedFold {
    index: usize,
    train: Dataset,
    test: Dataset,
}

fn prepare_folds(data: &Dataset, plan: &FoldPlan, opts: &CvOptions) -> Result<Vec<PreparedFold>> {
    let mut folds = Vec::new();
    for f in 0..plan.k {
        let (tr, te) = plan.split(f);
        let mut train = data.subset(&tr);
        if let Some(p) = &opts.perturbation {
            let seed = derive_seed(derive_seed(opts.seed, f as u64), p.level.to_bits());
            train = p.kind.apply(&train, p.level, seed)?;
        }
        if !train.has_both_classes() {
            log::warn!(
                "{}: fold {f} has a single class in its training portion; skipped",
                data.name
            );
            continue;
        }
        let (train, mut rest) = normalize(&train, &[data.subset(&te)])?;
        folds.push(PreparedFold {
            index: f,
            train,
            test: rest.remove(0),
        });
    }
    Ok(folds)
}

fn evaluate_config(
    variant: Variant,
    h: &HyperParams,
    folds: &[PreparedFold],
    opts: &CvOptions,
    name: &str,
) -> Vec<f64> {
    let seed = derive_seed(opts.seed, h.fingerprint());
    let mut accs = Vec::with_capacity(folds.len());
    for fold in folds {
        let outcome = fit_variant(variant, &fold.train, h, &opts.base, seed).and_then(|m| {
            let pred = m.predict(fold.test.x().view())?;
            accuracy(pred.view(), fold.test.y().view())
        });
        match outcome {
            Ok(a) => accs.push(a),
            Err(e) => log::warn!(
                "{name}: {variant} {h:?} failed on fold {}: {e}; fold excluded",
                fold.index
            ),
        }
    }
    accs
}

/// k-fold cross-validated grid search. Each fold's training portion is
/// (optionally perturbed and then) min-max scaled; its statistics are applied
/// to the held-out fold. The configuration with the highest mean fold accuracy
/// wins; ties go to the smaller C, then the smaller N, then grid order.
pub fn cross_validated_grid_search(
    data: &Dataset,
    variant: Variant,
    grid: &GridSpec,
    opts: &CvOptions,
) -> Result<GridSearchResult> {
    grid.validate(variant)?;
    if opts.jobs == 0 {
        return Err(Error::invalid("jobs must be at least 1"));
    }
    let plan = kfold_split(data.n_samples(), opts.k, opts.seed)?;
    let folds = prepare_folds(data, &plan, opts)?;
    if folds.is_empty() {
        return Err(Error::invalid(format!(
            "{}: every fold has a single-class training portion",
            data.name
        )));
    }
    let configs = grid.configs(variant);
    let eval = |h: &HyperParams| evaluate_config(variant, h, &folds, opts, &data.name);
    let per_config: Vec<Vec<f64>> = if opts.jobs == 1 {
        configs.iter().map(eval).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
        pool.install(|| configs.par_iter().map(eval).collect())
    };

    let mut best: Option<(usize, f64)> = None;
    let mut scores = Vec::new();
    for (i, (h, accs)) in configs.iter().zip(&per_config).enumerate() {
        if accs.is_empty() {
            continue;
        }
        let (mean, _) = mean_std(accs);
        scores.push(ConfigScore {
            params: *h,
            mean,
            valid_folds: accs.len(),
        });
        let better = match best {
            None => true,
            Some((bi, bm)) => {
                let b = &configs[bi];
                mean > bm || (mean == bm && (h.c < b.c || (h.c == b.c && h.n_hidden < b.n_hidden)))
            }
        };
        if better {
            best = Some((i, mean));
        }
    }
    let (bi, mean) = best.ok_or_else(|| {
        Error::Numerical(format!(
            "{}: no {variant} configuration produced a valid fold",
            data.name
        ))
    })?;
    let fold_accuracies = per_config[bi].clone();
    let (_, std) = mean_std(&fold_accuracies);
    Ok(GridSearchResult {
        variant,
        best: configs[bi],
        fold_accuracies,
        mean,
        std,
        fold_plan: plan,
        scores,
    })
}

/// Accuracy of each variant at each perturbation level, with per-variant
/// averages and average ranks across levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessTable {
    pub dataset: String,
    pub perturbation: PerturbationKind,
    pub levels: Vec<f64>,
    pub variants: Vec<Variant>,
    /// `acc[level][variant]`.
    pub acc: Vec<Vec<f64>>,
    pub std: Vec<Vec<f64>>,
    pub best: Vec<Vec<HyperParams>>,
    pub average: Vec<f64>,
    /// Present when at least two variants were compared.
    pub average_rank: Option<Vec<f64>>,
}

impl RobustnessTable {
    pub fn to_csv_string(&self) -> String {
        use crate::stats::fmt4;
        let mut out = String::from("level");
        for v in &self.variants {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
        for (l, row) in self.levels.iter().zip(&self.acc) {
            out.push_str(&fmt4(l * 100.0));
            out.push('%');
            for a in row {
                out.push_str(&format!(",{}", fmt4(*a)));
            }
            out.push('\n');
        }
        out.push_str("Average");
        for a in &self.average {
            out.push_str(&format!(",{}", fmt4(*a)));
        }
        out.push('\n');
        if let Some(r) = &self.average_rank {
            out.push_str("Average Rank");
            for a in r {
                out.push_str(&format!(",{}", fmt4(*a)));
            }
            out.push('\n');
        }
        out
    }
}

/// For each level, perturbs the training folds only and runs the grid search
/// for every variant; held-out folds stay clean.
pub fn robustness_sweep(
    data: &Dataset,
    variants: &[Variant],
    kind: PerturbationKind,
    levels: &[f64],
    grid: &GridSpec,
    opts: &CvOptions,
) -> Result<RobustnessTable> {
    if variants.is_empty() || levels.is_empty() {
        return Err(Error::invalid("robustness sweep needs variants and levels"));
    }
    if let Some(l) = levels.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(Error::invalid(format!("perturbation level {l} outside [0, 1]")));
    }
    let mut acc = Vec::new();
    let mut std = Vec::new();
    let mut best = Vec::new();
    for &level in levels {
        let cv = CvOptions {
            perturbation: (level > 0.0).then_some(Perturbation { kind, level }),
            ..opts.clone()
        };
        let (mut a, mut s, mut b) = (Vec::new(), Vec::new(), Vec::new());
        for &v in variants {
            let r = cross_validated_grid_search(data, v, grid, &cv)?;
            a.push(r.mean);
            s.push(r.std);
            b.push(r.best);
        }
        acc.push(a);
        std.push(s);
        best.push(b);
    }
    let q = variants.len();
    let p = levels.len() as f64;
    let average = (0..q)
        .map(|j| acc.iter().map(|r| r[j]).sum::<f64>() / p)
        .collect();
    let average_rank = if q >= 2 {
        let table = ResultTable::new(
            levels.iter().map(|l| format!("{l}")).collect(),
            variants.iter().map(|v| v.to_string()).collect(),
            acc.clone(),
            std.clone(),
        )?;
        Some(average_ranks(&table)?)
    } else {
        None
    };
    Ok(RobustnessTable {
        dataset: data.name.clone(),
        perturbation: kind,
        levels: levels.to_vec(),
        variants: variants.to_vec(),
        acc,
        std,
        best,
        average,
        average_rank,
    })
}
