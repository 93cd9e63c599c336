use std::fs;
use std::path::Path;

use serde::Serialize;

use super::TrialResult;
use crate::ao::Scheme;
use crate::error::{Error, Result};

#[derive(Serialize)]
struct RawRow<'a> {
    scheme: &'a str,
    sweep_var: &'a str,
    sweep_value: usize,
    trial: usize,
    sum_rate: f64,
    feasible: bool,
    eff_gamma_th: f64,
    iters: usize,
    wall_ms: u64,
}

/// Mean and standard error over the feasible trials of one (scheme, value).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub scheme: String,
    pub sweep_var: String,
    pub sweep_value: usize,
    pub mean_sum_rate: f64,
    pub se_sum_rate: f64,
    pub feasible_count: usize,
    pub trials: usize,
}

pub fn summarize(results: &[TrialResult]) -> Vec<SummaryRow> {
    let mut keys: Vec<(usize, Scheme)> = Vec::new();
    for r in results {
        if !keys.contains(&(r.sweep_value, r.scheme)) {
            keys.push((r.sweep_value, r.scheme));
        }
    }
    keys.into_iter()
        .map(|(value, scheme)| {
            let group: Vec<&TrialResult> = results
                .iter()
                .filter(|r| r.sweep_value == value && r.scheme == scheme)
                .collect();
            let rates: Vec<f64> = group
                .iter()
                .filter(|r| r.feasible && r.error.is_none())
                .map(|r| r.sum_rate)
                .collect();
            let n = rates.len();
            let mean = if n == 0 {
                f64::NAN
            } else {
                rates.iter().sum::<f64>() / n as f64
            };
            let se = if n < 2 {
                if n == 1 {
                    0.0
                } else {
                    f64::NAN
                }
            } else {
                let var = rates.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            };
            SummaryRow {
                scheme: scheme.name().to_string(),
                sweep_var: group[0].sweep_var.name().to_string(),
                sweep_value: value,
                mean_sum_rate: mean,
                se_sum_rate: se,
                feasible_count: n,
                trials: group.len(),
            }
        })
        .collect()
}

/// Writes `raw.csv` and `summary.csv` into `out_dir`, creating it if needed.
pub fn write_results(results: &[TrialResult], out_dir: impl AsRef<Path>) -> Result<Vec<SummaryRow>> {
    if results.is_empty() {
        return Err(Error::Validation {
            field: "results".into(),
            message: "nothing to write".into(),
        });
    }
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir)?;

    let mut raw = csv::Writer::from_path(dir.join("raw.csv"))?;
    for r in results {
        raw.serialize(RawRow {
            scheme: r.scheme.name(),
            sweep_var: r.sweep_var.name(),
            sweep_value: r.sweep_value,
            trial: r.trial,
            sum_rate: r.sum_rate,
            feasible: r.feasible,
            eff_gamma_th: r.eff_gamma_th,
            iters: r.iters,
            wall_ms: r.wall_ms,
        })?;
    }
    raw.flush()?;

    let rows = summarize(results);
    let mut summary = csv::Writer::from_path(dir.join("summary.csv"))?;
    for row in &rows {
        summary.serialize(row)?;
    }
    summary.flush()?;
    Ok(rows)
}
