use std::fmt::Write as _;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::settings::Settings;
use crate::error::Result;
use crate::moments::MomentEstimate;
use crate::multimode::{DipCurve, Hom2dConfig};

/// One statistic compared against its oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub statistic: String,
    pub mc_value: f64,
    pub mc_se: f64,
    pub oracle: f64,
    pub deviation_se: f64,
    pub pass: bool,
}

impl ReportRow {
    pub fn new(statistic: &str, est: MomentEstimate, oracle: f64, k_se: f64) -> Self {
        let dev = est.deviation_se(oracle);
        Self {
            statistic: statistic.to_string(),
            mc_value: est.value,
            mc_se: est.std_error,
            oracle,
            deviation_se: dev,
            pass: dev.abs() < k_se,
        }
    }
}

/// Wall-clock information. Excluded from reproducibility comparisons.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timestamp {
    pub started_unix_s: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetadata {
    pub seed: u64,
    pub reps: usize,
    pub version: String,
    pub config: Settings,
    pub timestamp: Timestamp,
}

impl RunMetadata {
    pub(crate) fn new(settings: &Settings, reps: usize, started: Instant) -> Self {
        let wall = started.elapsed().as_secs_f64();
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64());
        Self {
            seed: settings.seed_or_default(),
            reps,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: settings.clone(),
            timestamp: Timestamp { started_unix_s: now - wall, wall_time_s: wall },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub experiment: String,
    pub metadata: RunMetadata,
    pub rows: Vec<ReportRow>,
}

pub const REPORT_HEADER: &str = "statistic,mc_value,mc_se,oracle,deviation_se,pass";

impl RunReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn row(&self, statistic: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.statistic == statistic)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ =
                writeln!(out, "{},{},{},{},{},{}", r.statistic, r.mc_value, r.mc_se, r.oracle, r.deviation_se, r.pass);
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Dip curve as `theta,amplitude,std_error` rows.
pub fn dip_curve_csv(curve: &DipCurve) -> String {
    let mut out = String::from("theta,amplitude,std_error\n");
    for k in 0..curve.thetas.len() {
        let _ = writeln!(out, "{},{},{}", curve.thetas[k], curve.amplitudes[k], curve.std_errors[k]);
    }
    out
}

#[derive(Serialize)]
struct Sidecar<'a> {
    sigma_theta: Option<f64>,
    photons_per_pixel: f64,
    #[serde(rename = "K")]
    modes_kept: usize,
    seed: u64,
    peak_gain: f64,
    fit: Option<crate::multimode::DipFit>,
    expected: &'a [f64],
    config: &'a Hom2dConfig,
    metadata: &'a RunMetadata,
}

/// JSON written next to the dip curve.
pub fn dip_sidecar_json(curve: &DipCurve, expected: &[f64], cfg: &Hom2dConfig, meta: &RunMetadata) -> Result<String> {
    let s = Sidecar {
        sigma_theta: curve.sigma_theta,
        photons_per_pixel: curve.photons_per_pixel,
        modes_kept: curve.modes_kept,
        seed: cfg.seed,
        peak_gain: curve.peak_gain,
        fit: curve.fit,
        expected,
        config: cfg,
        metadata: meta,
    };
    Ok(serde_json::to_string_pretty(&s)?)
}

/// Closed-form values over a grid of mean photon numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleTable {
    pub rows: Vec<[f64; 11]>,
}

pub const ORACLE_HEADER: &str = "G,gain_gl,twin_mean,twin_variance,twin_covariance,bell_visibility,chsh_standard,fourfold_total,fourfold_bunching,fourfold_low_gain,fourfold_mixed";

impl OracleTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(ORACLE_HEADER);
        out.push('\n');
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}
