//! Experiment plumbing behind the command-line tool: per-trial CSV rows,
//! batch sweeps, box-plot summaries and grid snapshots.

mod batch;
mod snapshot;
mod summary;

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use batch::{run_batch, threads_from_env, BatchOutcome, BatchSpec, TrialFailure, THREADS_ENV};
pub use snapshot::{render_snapshot, write_pgm, GridSnapshot, Snapshot};
pub use summary::{quartiles, summarize, write_summary, BoxStats, SummaryRow, METRIC_NAMES};

use crate::engine::TrialResult;
use crate::error::{Error, Result};
use crate::policy::Algorithm;

/// One line of the per-trial results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial_id: String,
    pub algorithm: Algorithm,
    #[serde(rename = "N")]
    pub robots: usize,
    pub seed: u64,
    #[serde(rename = "I_G")]
    pub graph_idleness: f64,
    #[serde(rename = "I_W")]
    pub worst_idleness: i64,
    #[serde(rename = "D_MSA")]
    pub mean_sa_delay: f64,
    #[serde(rename = "D_WSA")]
    pub worst_sa_delay: i64,
}

impl From<&TrialResult> for TrialRow {
    fn from(r: &TrialResult) -> Self {
        TrialRow {
            trial_id: r.trial_id.clone(),
            algorithm: r.algorithm,
            robots: r.robots,
            seed: r.seed,
            graph_idleness: r.metrics.graph_idleness,
            worst_idleness: r.metrics.worst_idleness,
            mean_sa_delay: r.metrics.mean_sa_delay,
            worst_sa_delay: r.metrics.worst_sa_delay,
        }
    }
}

impl TrialRow {
    /// Metric values in [`METRIC_NAMES`] order.
    pub fn metric_values(&self) -> [f64; 4] {
        [
            self.graph_idleness,
            self.worst_idleness as f64,
            self.mean_sa_delay,
            self.worst_sa_delay as f64,
        ]
    }
}

/// Writes a header plus one row per trial.
pub fn write_trials<W: Write>(out: W, rows: &[TrialRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    if rows.is_empty() {
        w.write_record([
            "trial_id",
            "algorithm",
            "N",
            "seed",
            "I_G",
            "I_W",
            "D_MSA",
            "D_WSA",
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn read_trials<R: Read>(input: R) -> Result<Vec<TrialRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let rows = rdr.deserialize().collect::<Result<Vec<TrialRow>, _>>()?;
    Ok(rows)
}

pub fn write_trials_file(path: &Path, rows: &[TrialRow]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_trials(std::io::BufWriter::new(file), rows)
}

pub fn read_trials_file(path: &Path) -> Result<Vec<TrialRow>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_trials(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> TrialRow {
        TrialRow {
            trial_id: "lr-n8-s3".into(),
            algorithm: Algorithm::Lr,
            robots: 8,
            seed: 3,
            graph_idleness: 891.25,
            worst_idleness: 4546,
            mean_sa_delay: 1370.5,
            worst_sa_delay: 5164,
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_trials(&mut buf, &[row()]).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "trial_id,algorithm,N,seed,I_G,I_W,D_MSA,D_WSA\nlr-n8-s3,lr,8,3,891.25,4546,1370.5,5164\n"
        );
        assert_eq!(read_trials(&buf[..]).unwrap(), vec![row()]);
    }

    #[test]
    fn empty_file_still_has_header() {
        let mut buf = Vec::new();
        write_trials(&mut buf, &[]).unwrap();
        assert_eq!(buf, b"trial_id,algorithm,N,seed,I_G,I_W,D_MSA,D_WSA\n");
        assert!(read_trials(&buf[..]).unwrap().is_empty());
    }
}
