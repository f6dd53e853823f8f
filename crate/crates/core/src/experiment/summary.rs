use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use super::TrialRow;
use crate::error::{Error, Result};
use crate::policy::Algorithm;

pub const METRIC_NAMES: [&str; 4] = ["I_G", "I_W", "D_MSA", "D_WSA"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub algorithm: Algorithm,
    pub robots: usize,
    pub metric: &'static str,
    pub stats: BoxStats,
}

// csv cannot serialize flattened structs, so rows go out through this.
#[derive(Serialize)]
struct FlatRow {
    algorithm: Algorithm,
    #[serde(rename = "N")]
    robots: usize,
    metric: &'static str,
    min: f64,
    q1: f64,
    median: f64,
    q3: f64,
    max: f64,
}

/// Box-plot statistics. Quantile `p` sits at rank `p * (n - 1)` of the
/// sorted sample and interpolates linearly between the two closest ranks.
/// Returns `None` for an empty sample or one containing NaN.
pub fn quartiles(values: &[f64]) -> Option<BoxStats> {
    if values.is_empty() || values.iter().any(|v| v.is_nan()) {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let at = |p: f64| {
        let rank = p * (v.len() - 1) as f64;
        let lo = rank.floor() as usize;
        let hi = rank.ceil() as usize;
        v[lo] + (v[hi] - v[lo]) * (rank - lo as f64)
    };
    Some(BoxStats {
        min: v[0],
        q1: at(0.25),
        median: at(0.5),
        q3: at(0.75),
        max: v[v.len() - 1],
    })
}

/// One row per (algorithm, N, metric), ordered by algorithm, then N, then
/// metric in [`METRIC_NAMES`] order.
pub fn summarize(rows: &[TrialRow]) -> Result<Vec<SummaryRow>> {
    if rows.is_empty() {
        return Err(Error::Input("no trial rows to summarize".into()));
    }
    let mut cells: BTreeMap<(Algorithm, usize), Vec<&TrialRow>> = BTreeMap::new();
    for row in rows {
        cells
            .entry((row.algorithm, row.robots))
            .or_default()
            .push(row);
    }
    let mut out = Vec::with_capacity(cells.len() * METRIC_NAMES.len());
    for ((algorithm, robots), group) in cells {
        for (m, metric) in METRIC_NAMES.iter().enumerate() {
            let values: Vec<f64> = group.iter().map(|r| r.metric_values()[m]).collect();
            let stats = quartiles(&values).ok_or_else(|| {
                Error::Input(format!("{metric} for {algorithm} N={robots} contains NaN"))
            })?;
            out.push(SummaryRow {
                algorithm,
                robots,
                metric,
                stats,
            });
        }
    }
    Ok(out)
}

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    for r in rows {
        let s = r.stats;
        w.serialize(FlatRow {
            algorithm: r.algorithm,
            robots: r.robots,
            metric: r.metric,
            min: s.min,
            q1: s.q1,
            median: s.median,
            q3: s.q3,
            max: s.max,
        })?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
