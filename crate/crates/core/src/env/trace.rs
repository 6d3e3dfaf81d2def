use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;

/// Optional per-step CSV export: `step,mean_global_sinr_db,mean_power_w,reward`.
pub struct StepTrace {
    out: BufWriter<File>,
}

impl StepTrace {
    pub const HEADER: &'static str = "step,mean_global_sinr_db,mean_power_w,reward";

    pub fn create(path: &Path) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{}", Self::HEADER)?;
        Ok(Self { out })
    }

    pub fn record(&mut self, step: u64, global_sinr_db: f64, mean_power_w: f64, reward: f64) -> Result<()> {
        writeln!(self.out, "{step},{global_sinr_db},{mean_power_w},{reward}")?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}
