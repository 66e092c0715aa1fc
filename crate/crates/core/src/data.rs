//! Binary-labelled datasets: CSV I/O, min-max scaling, k-fold plans and the
//! two robustness perturbations (label flips and additive Gaussian noise).

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::index;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column layout of the CSV a dataset came from, kept so it can be written back
/// in the same shape.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvLayout {
    pub header: Option<Vec<String>>,
    pub label_column: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Transform {
    Subset {
        rows: usize,
    },
    MinMax,
    LabelFlip {
        fraction: f64,
        seed: u64,
        indices: Vec<usize>,
    },
    GaussianNoise {
        fraction: f64,
        sigma_scale: f64,
        seed: u64,
        indices: Vec<usize>,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: Option<String>,
    pub layout: Option<CsvLayout>,
    pub transforms: Vec<Transform>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    x: Array2<f64>,
    y: Array1<f64>,
    pub provenance: Provenance,
}

impl Dataset {
    /// Validates finiteness and that every label is exactly -1 or +1.
    pub fn new(name: impl Into<String>, x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::shape(format!(
                "{} feature rows but {} labels",
                x.nrows(),
                y.len()
            )));
        }
        if let Some((i, _)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite feature at row {}, column {}",
                i.0, i.1
            )));
        }
        if let Some((i, v)) = y.iter().enumerate().find(|(_, &v)| v != 1.0 && v != -1.0) {
            return Err(Error::invalid(format!("label {v} at row {i} is not -1 or +1")));
        }
        Ok(Self {
            name: name.into(),
            x,
            y,
            provenance: Provenance::default(),
        })
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn n_samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    pub fn count_positive(&self) -> usize {
        self.y.iter().filter(|&&v| v > 0.0).count()
    }

    pub fn has_both_classes(&self) -> bool {
        let pos = self.count_positive();
        pos > 0 && pos < self.n_samples()
    }

    /// Training needs at least two samples and both classes present.
    pub fn ensure_trainable(&self) -> Result<()> {
        if self.n_samples() < 2 || !self.has_both_classes() {
            return Err(Error::invalid(format!(
                "dataset '{}' needs n >= 2 and both classes (n={}, positives={})",
                self.name,
                self.n_samples(),
                self.count_positive()
            )));
        }
        Ok(())
    }

    pub fn subset(&self, rows: &[usize]) -> Dataset {
        let mut provenance = self.provenance.clone();
        provenance.transforms.push(Transform::Subset { rows: rows.len() });
        Dataset {
            name: self.name.clone(),
            x: self.x.select(Axis(0), rows),
            y: self.y.select(Axis(0), rows),
            provenance,
        }
    }

    pub fn with_features(&self, x: Array2<f64>) -> Result<Dataset> {
        if x.dim() != self.x.dim() {
            return Err(Error::shape("replacement features must keep the shape"));
        }
        Ok(Dataset {
            name: self.name.clone(),
            x,
            y: self.y.clone(),
            provenance: self.provenance.clone(),
        })
    }

    /// Writes the dataset back as CSV, following the recorded layout when
    /// there is one (label last otherwise).
    pub fn to_csv_string(&self) -> String {
        let layout = self.provenance.layout.clone().unwrap_or(CsvLayout {
            header: None,
            label_column: self.n_features(),
        });
        let mut out = String::new();
        if let Some(h) = &layout.header {
            out.push_str(&h.join(","));
            out.push('\n');
        }
        let label_col = layout.label_column.min(self.n_features());
        for (row, label) in self.x.outer_iter().zip(self.y.iter()) {
            let mut fields: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            fields.insert(label_col, if *label > 0.0 { "1" } else { "-1" }.to_string());
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    /// Writes the provenance record as a JSON sidecar.
    pub fn write_provenance(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(&self.provenance)?;
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        writeln!(f, "{json}").map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CsvOptions {
    pub has_header: bool,
    /// Zero-based label column; `None` means the last column.
    pub label_column: Option<usize>,
}

impl Default for CsvOptions {
    fn default() -> Self {
        Self {
            has_header: false,
            label_column: None,
        }
    }
}

fn parse_label(raw: &str) -> Option<i8> {
    let v: f64 = raw.parse().ok()?;
    if v == 1.0 {
        Some(1)
    } else if v == 0.0 {
        Some(0)
    } else if v == -1.0 {
        Some(-1)
    } else {
        None
    }
}

/// Loads a comma-separated file. Labels may be {-1,+1} or {0,1}; 0 maps to -1.
pub fn load_csv(path: &Path, opts: CsvOptions) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    let mut ds = parse_csv(&text, &name, opts).map_err(|e| match e {
        Error::Parse { message, .. } => Error::parse(path, message),
        other => other,
    })?;
    ds.provenance.source = Some(path.display().to_string());
    Ok(ds)
}

/// Parses CSV text; errors carry 1-based line numbers.
pub fn parse_csv(text: &str, name: &str, opts: CsvOptions) -> Result<Dataset> {
    let fail = |msg: String| Error::parse(name, msg);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let header = if opts.has_header {
        let h = reader
            .headers()
            .map_err(|e| fail(format!("unreadable header: {e}")))?;
        if h.is_empty() {
            return Err(fail("empty file".into()));
        }
        Some(h.iter().map(str::to_string).collect::<Vec<_>>())
    } else {
        None
    };

    let mut width: Option<usize> = header.as_ref().map(Vec::len);
    let mut features: Vec<f64> = Vec::new();
    let mut raw_labels: Vec<i8> = Vec::new();
    let mut label_col = 0;

    for record in reader.records() {
        let record = record.map_err(|e| fail(format!("malformed CSV: {e}")))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(fail(format!(
                "line {line}: expected {w} fields, found {}",
                record.len()
            )));
        }
        if w < 2 {
            return Err(fail(format!(
                "line {line}: need at least one feature and a label"
            )));
        }
        label_col = opts.label_column.unwrap_or(w - 1);
        if label_col >= w {
            return Err(fail(format!(
                "label column {label_col} out of range for {w} fields"
            )));
        }
        for (j, field) in record.iter().enumerate() {
            if j == label_col {
                let l = parse_label(field).ok_or_else(|| {
                    fail(format!(
                        "line {line}: label '{field}' is not one of -1, 0, 1"
                    ))
                })?;
                raw_labels.push(l);
            } else {
                let v: f64 = field.parse().map_err(|_| {
                    fail(format!(
                        "line {line}, column {}: '{field}' is not a number",
                        j + 1
                    ))
                })?;
                if !v.is_finite() {
                    return Err(fail(format!(
                        "line {line}, column {}: non-finite value",
                        j + 1
                    )));
                }
                features.push(v);
            }
        }
    }

    let n = raw_labels.len();
    if n == 0 {
        return Err(fail("no data rows".into()));
    }
    if raw_labels.contains(&0) && raw_labels.contains(&-1) {
        return Err(fail(
            "labels mix the {0,1} and {-1,+1} conventions".into(),
        ));
    }
    let m = features.len() / n;
    let x = Array2::from_shape_vec((n, m), features).map_err(|e| fail(e.to_string()))?;
    let y = Array1::from_iter(raw_labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }));
    let mut ds = Dataset::new(name, x, y)?;
    ds.provenance.layout = Some(CsvLayout {
        header,
        label_column: label_col,
    });
    Ok(ds)
}

/// Reads a CSV where every column is a feature (no label column).
pub fn load_features_csv(path: &Path, has_header: bool) -> Result<Array2<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let fail = |msg: String| Error::parse(path, msg);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut width = None;
    let mut values = Vec::new();
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(|e| fail(format!("malformed CSV: {e}")))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(fail(format!(
                "line {line}: expected {w} fields, found {}",
                record.len()
            )));
        }
        for (j, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| {
                    fail(format!(
                        "line {line}, column {}: '{field}' is not a finite number",
                        j + 1
                    ))
                })?;
            values.push(v);
        }
        rows += 1;
    }
    let w = width.ok_or_else(|| fail("no data rows".into()))?;
    Array2::from_shape_vec((rows, w), values).map_err(|e| fail(e.to_string()))
}

/// Per-feature min-max scaling fitted on one dataset and applied to others.
/// Constant features map to 0; values outside the training range are not
/// clipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(x: ArrayView2<f64>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::invalid("cannot fit a scaler on zero rows"));
        }
        let min = x
            .axis_iter(Axis(1))
            .map(|c| c.iter().cloned().fold(f64::INFINITY, f64::min))
            .collect();
        let max = x
            .axis_iter(Axis(1))
            .map(|c| c.iter().cloned().fold(f64::NEG_INFINITY, f64::max))
            .collect();
        Ok(Self { min, max })
    }

    pub fn transform(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.min.len() {
            return Err(Error::shape(format!(
                "scaler fitted on {} features, input has {}",
                self.min.len(),
                x.ncols()
            )));
        }
        let mut out = x.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (lo, hi) = (self.min[j], self.max[j]);
            let range = hi - lo;
            if range > 0.0 {
                col.mapv_inplace(|v| (v - lo) / range);
            } else {
                col.fill(0.0);
            }
        }
        Ok(out)
    }

    pub fn transform_dataset(&self, d: &Dataset) -> Result<Dataset> {
        let mut out = d.with_features(self.transform(d.x().view())?)?;
        out.provenance.transforms.push(Transform::MinMax);
        Ok(out)
    }
}

/// Fits min-max statistics on `train` and applies them to `train` and each of
/// `others`.
pub fn normalize(train: &Dataset, others: &[Dataset]) -> Result<(Dataset, Vec<Dataset>)> {
    let scaler = MinMaxScaler::fit(train.x().view())?;
    let t = scaler.transform_dataset(train)?;
    let rest = others
        .iter()
        .map(|d| scaler.transform_dataset(d))
        .collect::<Result<Vec<_>>>()?;
    Ok((t, rest))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignments: Vec<usize>,
    pub seed: u64,
}

impl FoldPlan {
    /// (train indices, test indices) for fold `fold`, both ascending.
    pub fn split(&self, fold: usize) -> (Vec<usize>, Vec<usize>) {
        let mut train = Vec::new();
        let mut test = Vec::new();
        for (i, &f) in self.assignments.iter().enumerate() {
            if f == fold {
                test.push(i);
            } else {
                train.push(i);
            }
        }
        (train, test)
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Random permutation followed by round-robin fold assignment.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 || k > n {
        return Err(Error::invalid(format!(
            "k-fold needs 2 <= k <= n (k={k}, n={n})"
        )));
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut assignments = vec![0; n];
    for (pos, &i) in perm.iter().enumerate() {
        assignments[i] = pos % k;
    }
    Ok(FoldPlan {
        k,
        assignments,
        seed,
    })
}

/// Number of affected samples: `fraction * n` rounded half-up.
pub fn perturbed_count(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64) + 0.5).floor() as usize
}

fn check_fraction(fraction: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::invalid(format!(
            "perturbation fraction {fraction} outside [0, 1]"
        )));
    }
    Ok(())
}

fn choose_indices(n: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut idx = index::sample(rng, n, count.min(n)).into_vec();
    idx.sort_unstable();
    idx
}

/// Negates the labels of `round(fraction * n)` uniformly chosen samples.
pub fn inject_label_noise(d: &Dataset, fraction: f64, seed: u64) -> Result<Dataset> {
    check_fraction(fraction)?;
    let n = d.n_samples();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = choose_indices(n, perturbed_count(n, fraction), &mut rng);
    let mut out = d.clone();
    for &i in &indices {
        out.y[i] = -out.y[i];
    }
    out.provenance.transforms.push(Transform::LabelFlip {
        fraction,
        seed,
        indices,
    });
    Ok(out)
}

/// Adds zero-mean Gaussian noise with standard deviation
/// `sigma_scale * std(feature)` to every feature of `round(fraction * n)`
/// uniformly chosen samples. Labels are left alone.
pub fn inject_gaussian_noise(
    d: &Dataset,
    fraction: f64,
    sigma_scale: f64,
    seed: u64,
) -> Result<Dataset> {
    check_fraction(fraction)?;
    if !(sigma_scale >= 0.0 && sigma_scale.is_finite()) {
        return Err(Error::invalid(format!(
            "sigma scale must be non-negative, got {sigma_scale}"
        )));
    }
    let n = d.n_samples();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let indices = choose_indices(n, perturbed_count(n, fraction), &mut rng);
    let stds: Vec<f64> = if n == 0 {
        vec![0.0; d.n_features()]
    } else {
        d.x.axis_iter(Axis(1)).map(|c| c.std(0.0)).collect()
    };
    let mut out = d.clone();
    for &i in &indices {
        for (j, s) in stds.iter().enumerate() {
            let z: f64 = StandardNormal.sample(&mut rng);
            out.x[[i, j]] += sigma_scale * s * z;
        }
    }
    out.provenance.transforms.push(Transform::GaussianNoise {
        fraction,
        sigma_scale,
        seed,
        indices,
    });
    Ok(out)
}
