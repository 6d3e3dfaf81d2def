use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agent::EpisodeMetrics;
use crate::error::Result;

pub const METRICS_HEADER: [&str; 9] = [
    "step",
    "episode",
    "epsilon",
    "loss",
    "reward_mean",
    "global_sinr_db",
    "mean_power_w",
    "seed",
    "algorithm",
];

/// One metrics CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub step: u64,
    pub episode: u64,
    pub epsilon: f64,
    pub loss: f64,
    pub reward_mean: f64,
    pub global_sinr_db: f64,
    pub mean_power_w: f64,
    pub seed: usize,
    pub algorithm: String,
}

impl MetricsRow {
    pub fn new(m: &EpisodeMetrics, seed: usize, algorithm: &str) -> Self {
        Self {
            step: m.step,
            episode: m.episode,
            epsilon: m.epsilon,
            loss: m.loss,
            reward_mean: m.reward_mean,
            global_sinr_db: m.global_sinr_db,
            mean_power_w: m.mean_power_w,
            seed,
            algorithm: algorithm.to_owned(),
        }
    }
}

/// Append-only metrics file, flushed after every row.
pub struct MetricsWriter {
    inner: csv::Writer<File>,
}

impl MetricsWriter {
    /// Truncates `path` and writes the header.
    pub fn create(path: &Path) -> Result<Self> {
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
        inner.write_record(METRICS_HEADER)?;
        inner.flush()?;
        Ok(Self { inner })
    }

    /// Continues an existing file after dropping any partial trailing line;
    /// writes the header only if the file is empty or missing.
    pub fn append(path: &Path) -> Result<Self> {
        if path.exists() {
            let bytes = std::fs::read(path)?;
            let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
            if keep < bytes.len() {
                OpenOptions::new().write(true).open(path)?.set_len(keep as u64)?;
            }
        }
        let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        if fresh {
            inner.write_record(METRICS_HEADER)?;
            inner.flush()?;
        }
        Ok(Self { inner })
    }

    pub fn write(&mut self, row: &MetricsRow) -> Result<()> {
        self.inner.serialize(row)?;
        self.inner.flush()?;
        Ok(())
    }
}

/// Reads every complete row of a metrics file.
pub fn read_metrics(path: &Path) -> Result<Vec<MetricsRow>> {
    let complete: String = BufReader::new(File::open(path)?)
        .lines()
        .filter_map(|l| l.ok())
        .filter(|l| l.split(',').count() == METRICS_HEADER.len())
        .map(|l| l + "\n")
        .collect();
    let mut reader = csv::Reader::from_reader(complete.as_bytes());
    let mut rows = Vec::new();
    for r in reader.deserialize() {
        rows.push(r?);
    }
    Ok(rows)
}

/// Last episode already recorded, for resuming.
pub fn last_episode(path: &Path) -> Result<Option<u64>> {
    if !path.exists() {
        return Ok(None);
    }
    Ok(read_metrics(path)?.last().map(|r| r.episode))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(k: u64) -> MetricsRow {
        MetricsRow {
            step: 20 * (k + 1),
            episode: k,
            epsilon: 0.5,
            loss: if k == 0 { f64::NAN } else { 0.25 },
            reward_mean: 1.5,
            global_sinr_db: 2.0,
            mean_power_w: 40.0,
            seed: 1,
            algorithm: "gqn".into(),
        }
    }

    #[test]
    fn header_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        MetricsWriter::create(&p).unwrap().write(&row(0)).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().next().unwrap(), METRICS_HEADER.join(","));
        assert!(text.lines().nth(1).unwrap().contains("NaN"));
    }

    #[test]
    fn append_resumes_after_truncated_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        {
            let mut w = MetricsWriter::create(&p).unwrap();
            w.write(&row(0)).unwrap();
            w.write(&row(1)).unwrap();
        }
        // simulate a crash mid-write
        let mut text = std::fs::read_to_string(&p).unwrap();
        text.push_str("60,2,0.5");
        std::fs::write(&p, &text).unwrap();
        assert_eq!(last_episode(&p).unwrap(), Some(1));
        {
            let mut w = MetricsWriter::append(&p).unwrap();
            w.write(&row(2)).unwrap();
        }
        let rows = read_metrics(&p).unwrap();
        assert_eq!(rows.iter().map(|r| r.episode).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn append_to_clean_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        MetricsWriter::append(&p).unwrap().write(&row(0)).unwrap();
        MetricsWriter::append(&p).unwrap().write(&row(1)).unwrap();
        let rows = read_metrics(&p).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].loss.is_nan());
        assert_eq!(rows[1], row(1));
    }
}
