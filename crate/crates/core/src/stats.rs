//! Result tables and the rank statistics used to compare models across
//! datasets: average ranks, the Friedman chi-square and F_F statistics, and
//! pairwise win/tie/loss counts.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label of the optional trailing rank row in the CSV layout.
pub const RANK_ROW_LABEL: &str = "Average Rank";

/// Mean accuracy (percent) and standard deviation per dataset (rows) and
/// model (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub datasets: Vec<String>,
    pub models: Vec<String>,
    pub acc: Vec<Vec<f64>>,
    pub std: Vec<Vec<f64>>,
}

impl ResultTable {
    pub fn new(
        datasets: Vec<String>,
        models: Vec<String>,
        acc: Vec<Vec<f64>>,
        std: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let (p, q) = (datasets.len(), models.len());
        if p == 0 || q == 0 {
            return Err(Error::invalid("result table needs at least one dataset and one model"));
        }
        for (name, m) in [("accuracy", &acc), ("std", &std)] {
            if m.len() != p || m.iter().any(|r| r.len() != q) {
                return Err(Error::shape(format!("{name} matrix must be {p}x{q}")));
            }
        }
        if let Some(v) = acc.iter().flatten().find(|v| !(0.0..=100.0).contains(*v)) {
            return Err(Error::invalid(format!("accuracy {v} outside [0, 100]")));
        }
        Ok(Self {
            datasets,
            models,
            acc,
            std,
        })
    }

    pub fn n_datasets(&self) -> usize {
        self.datasets.len()
    }

    pub fn n_models(&self) -> usize {
        self.models.len()
    }

    pub fn model_index(&self, name: &str) -> Option<usize> {
        self.models.iter().position(|m| m == name)
    }

    /// CSV with header `dataset,<m1>,<m1>_std,...`. With `ranks`, a final
    /// "Average Rank" row carries the rank of each model in its accuracy column.
    pub fn to_csv_string(&self, ranks: Option<&[f64]>) -> String {
        let mut out = String::from("dataset");
        for m in &self.models {
            out.push_str(&format!(",{m},{m}_std"));
        }
        out.push('\n');
        for (i, d) in self.datasets.iter().enumerate() {
            out.push_str(d);
            for j in 0..self.n_models() {
                out.push_str(&format!(",{},{}", fmt4(self.acc[i][j]), fmt4(self.std[i][j])));
            }
            out.push('\n');
        }
        if let Some(r) = ranks {
            out.push_str(RANK_ROW_LABEL);
            for v in r {
                out.push_str(&format!(",{},", fmt4(*v)));
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_csv(text: &str, origin: &str) -> Result<Self> {
        let fail = |msg: String| Error::parse(origin, msg);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| fail("empty table".into()))?
            .split(',')
            .map(str::trim)
            .collect();
        if header.len() < 3 || (header.len() - 1) % 2 != 0 {
            return Err(fail("header must be dataset followed by <model>,<model>_std pairs".into()));
        }
        let mut models = Vec::new();
        for pair in header[1..].chunks(2) {
            if pair[1] != format!("{}_std", pair[0]) {
                return Err(fail(format!("expected column '{}_std', found '{}'", pair[0], pair[1])));
            }
            models.push(pair[0].to_string());
        }
        let (mut datasets, mut acc, mut std) = (Vec::new(), Vec::new(), Vec::new());
        for (lineno, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields[0] == RANK_ROW_LABEL {
                continue;
            }
            if fields.len() != header.len() {
                return Err(fail(format!(
                    "row {}: expected {} fields, found {}",
                    lineno + 2,
                    header.len(),
                    fields.len()
                )));
            }
            let nums = fields[1..]
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| fail(format!("row {}: '{f}' is not a number", lineno + 2)))
                })
                .collect::<Result<Vec<_>>>()?;
            datasets.push(fields[0].to_string());
            acc.push(nums.iter().step_by(2).cloned().collect());
            std.push(nums.iter().skip(1).step_by(2).cloned().collect());
        }
        ResultTable::new(datasets, models, acc, std)
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_csv(&text, &path.display().to_string())
    }
}

/// Formats with at most four decimals, trailing zeros trimmed.
pub fn fmt4(v: f64) -> String {
    let s = format!("{:.4}", round4(v));
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

pub fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

/// Ranks for one dataset: 1 = highest accuracy, ties share the mean of the
/// positions they occupy.
pub fn rank_row(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share rank mean of (i+1)..=(j+1)
        let shared = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = shared;
        }
        i = j + 1;
    }
    ranks
}

pub fn average_ranks(table: &ResultTable) -> Result<Vec<f64>> {
    let q = table.n_models();
    if q < 2 {
        return Err(Error::invalid("average ranks need at least two models"));
    }
    let mut sums = vec![0.0; q];
    for row in &table.acc {
        for (s, r) in sums.iter_mut().zip(rank_row(row)) {
            *s += r;
        }
    }
    let p = table.n_datasets() as f64;
    Ok(sums.into_iter().map(|s| s / p).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FriedmanResult {
    pub chi2_f: f64,
    pub f_f: f64,
    /// Degrees of freedom of the F_F statistic: (q-1, (P-1)(q-1)).
    pub df: (usize, usize),
}

/// Friedman chi-square over average ranks and the F_F refinement.
pub fn friedman_test(avg_ranks: &[f64], p: usize, q: usize) -> Result<FriedmanResult> {
    if q < 2 || p < 2 {
        return Err(Error::invalid(format!(
            "Friedman test needs q >= 2 models and P >= 2 datasets (q={q}, P={p})"
        )));
    }
    if avg_ranks.len() != q {
        return Err(Error::shape(format!(
            "{} average ranks for {q} models",
            avg_ranks.len()
        )));
    }
    let (pf, qf) = (p as f64, q as f64);
    let sum_sq: f64 = avg_ranks.iter().map(|r| r * r).sum();
    let chi2_f = 12.0 * pf / (qf * (qf + 1.0)) * (sum_sq - qf * (qf + 1.0).powi(2) / 4.0);
    let denom = pf * (qf - 1.0) - chi2_f;
    if denom <= 1e-12 * pf * qf {
        return Err(Error::DegenerateStatistic(format!(
            "F_F denominator P(q-1) - chi2_F = {denom:e} is not positive (chi2_F = {chi2_f})"
        )));
    }
    Ok(FriedmanResult {
        chi2_f,
        f_f: (pf - 1.0) * chi2_f / denom,
        df: (q - 1, (p - 1) * (q - 1)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WinTieLoss {
    pub wins: usize,
    pub ties: usize,
    pub losses: usize,
}

impl WinTieLoss {
    pub fn as_array(&self) -> [usize; 3] {
        [self.wins, self.ties, self.losses]
    }
}

/// Entry `[i][j]` counts datasets where model `i` beats / ties / loses to
/// model `j`, comparing accuracies rounded to four decimals.
pub fn win_tie_loss(table: &ResultTable) -> Result<Vec<Vec<WinTieLoss>>> {
    let q = table.n_models();
    if q < 2 {
        return Err(Error::invalid("win/tie/loss needs at least two models"));
    }
    let key = |v: f64| (v * 1e4).round() as i64;
    let mut out = vec![vec![WinTieLoss::default(); q]; q];
    for row in &table.acc {
        for i in 0..q {
            for j in 0..q {
                let (a, b) = (key(row[i]), key(row[j]));
                let cell = &mut out[i][j];
                match a.cmp(&b) {
                    std::cmp::Ordering::Greater => cell.wins += 1,
                    std::cmp::Ordering::Equal => cell.ties += 1,
                    std::cmp::Ordering::Less => cell.losses += 1,
                }
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub models: Vec<String>,
    pub average_ranks: Vec<f64>,
    pub friedman: Option<FriedmanResult>,
    /// Why the Friedman statistics are missing, when they are.
    pub friedman_error: Option<String>,
    pub win_tie_loss: Vec<Vec<[usize; 3]>>,
}

impl StatsReport {
    pub fn compute(table: &ResultTable) -> Result<Self> {
        let ranks = average_ranks(table)?;
        let (friedman, friedman_error) =
            match friedman_test(&ranks, table.n_datasets(), table.n_models()) {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            };
        let wtl = win_tie_loss(table)?
            .into_iter()
            .map(|r| r.into_iter().map(|c| c.as_array()).collect())
            .collect();
        Ok(Self {
            models: table.models.clone(),
            average_ranks: ranks,
            friedman,
            friedman_error,
            win_tie_loss: wtl,
        })
    }

    /// Plain-text rendering: rank list, Friedman statistics and the lower
    /// triangle of the win/tie/loss matrix (row model vs column model).
    pub fn render(&self) -> String {
        let mut out = String::from("Average ranks\n");
        for (m, r) in self.models.iter().zip(&self.average_ranks) {
            out.push_str(&format!("  {m:<16} {r:.4}\n"));
        }
        match (&self.friedman, &self.friedman_error) {
            (Some(f), _) => out.push_str(&format!(
                "Friedman: chi2_F = {:.4}, F_F = {:.4} (df {}, {})\n",
                f.chi2_f, f.f_f, f.df.0, f.df.1
            )),
            (None, Some(e)) => out.push_str(&format!("Friedman: unavailable ({e})\n")),
            (None, None) => {}
        }
        out.push_str("Win/tie/loss (row vs column)\n");
        for i in 1..self.models.len() {
            let cells: Vec<String> = (0..i)
                .map(|j| {
                    let [w, t, l] = self.win_tie_loss[i][j];
                    format!("{}:[{w},{t},{l}]", self.models[j])
                })
                .collect();
            out.push_str(&format!("  {:<16} {}\n", self.models[i], cells.join(" ")));
        }
        out
    }
}
