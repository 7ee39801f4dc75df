use crate::control::Mode;
use crate::error::{invalid, Result};

use super::run::StepRecord;

/// How received power is averaged over a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PowerAveraging {
    /// Arithmetic mean of the dBm values, the usual way a coverage plot is read.
    #[default]
    Db,
    /// Mean power in milliwatts, converted back to dBm.
    Milliwatt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub ticks: usize,
    pub prx_mean_dbm: f64,
    pub prx_min_dbm: f64,
    pub prx_max_dbm: f64,
    /// Population standard deviation of the dBm values.
    pub prx_stddev_db: f64,
    pub pointing_error_p50: f64,
    pub pointing_error_p95: f64,
    pub pointing_error_max: f64,
    pub tracking_fraction: f64,
    /// Time of the first tick spent tracking.
    pub lock_time: Option<f64>,
}

/// Percentile by linear interpolation between order statistics; `q` in `[0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn summarize(records: &[StepRecord]) -> Result<Summary> {
    summarize_with(records, PowerAveraging::Db)
}

pub fn summarize_with(records: &[StepRecord], averaging: PowerAveraging) -> Result<Summary> {
    if records.is_empty() {
        return Err(invalid("records", "cannot summarize an empty run"));
    }
    let n = records.len() as f64;
    let prx: Vec<f64> = records.iter().map(|r| r.prx_dbm).collect();
    // shifted by the first sample so identical rows average exactly
    let shift = prx[0];
    let mean_db = shift + prx.iter().map(|p| p - shift).sum::<f64>() / n;
    let prx_mean_dbm = match averaging {
        PowerAveraging::Db => mean_db,
        PowerAveraging::Milliwatt => {
            10.0 * (prx.iter().map(|p| 10f64.powf(p / 10.0)).sum::<f64>() / n).log10()
        }
    };
    let var = prx.iter().map(|p| (p - mean_db) * (p - mean_db)).sum::<f64>() / n;

    let mut pe: Vec<f64> = records.iter().map(|r| r.pointing_error).collect();
    pe.sort_by(f64::total_cmp);
    let tracking = records.iter().filter(|r| r.mode == Mode::Tracking).count();

    Ok(Summary {
        ticks: records.len(),
        prx_mean_dbm,
        prx_min_dbm: prx.iter().copied().fold(f64::INFINITY, f64::min),
        prx_max_dbm: prx.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        prx_stddev_db: var.sqrt(),
        pointing_error_p50: percentile(&pe, 0.5),
        pointing_error_p95: percentile(&pe, 0.95),
        pointing_error_max: pe[pe.len() - 1],
        tracking_fraction: tracking as f64 / n,
        lock_time: records.iter().find(|r| r.mode == Mode::Tracking).map(|r| r.t),
    })
}
