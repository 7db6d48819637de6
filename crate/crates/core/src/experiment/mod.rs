//! End-to-end experiments: build an ensemble, estimate, compare with the
//! oracle, and report.

mod report;
mod settings;

use std::time::Instant;

use crate::error::{invalid, Result};
use crate::moments::{
    chsh_coefficient, chsh_parameter, correlation_coefficient, covariance_intensity, fourfold_covariance,
    hom_dip_amplitude, mean_intensity, variance_intensity, ChshAngles,
};
use crate::multimode::{build_kernel, expected_dip_curve, run_hom2d, schmidt_decompose, DipCurve, Hom2dConfig};
use crate::optics::{polarizer_project, BeamSplitter, DetectorParams, GainParams, PolarizerAngle};
use crate::oracle::{bell_prediction, fourfold_terms, hom_cov_ratio, twin_moments, PairMoments};
use crate::pipelines::{bell, bell_ensemble, hom, hom_ensemble, twin, twin_beam_ensemble};

pub use report::{
    dip_curve_csv, dip_sidecar_json, OracleTable, ReportRow, RunMetadata, RunReport, Timestamp, ORACLE_HEADER,
    REPORT_HEADER,
};
pub use settings::{parse_count, Settings, SEED_ENV};

/// Agreement threshold, in standard errors, for a report row to pass.
pub const PASS_SE: f64 = 5.0;

pub const DEFAULT_REPS: usize = 1_000_000;
pub const DEFAULT_HOM2D_REPS: usize = 100;

/// Repetition count for a statistical run; at least two are needed for an
/// error estimate.
fn stat_reps(settings: &Settings, default: usize) -> Result<usize> {
    let reps = settings.reps_or(default);
    if reps < 2 {
        return Err(crate::Error::Config(format!("reps must be at least 2, got {reps}")));
    }
    Ok(reps)
}

fn finish(experiment: &str, settings: &Settings, reps: usize, started: Instant, rows: Vec<ReportRow>) -> RunReport {
    RunReport { experiment: experiment.to_string(), metadata: RunMetadata::new(settings, reps, started), rows }
}

/// Twin beams after detectors of efficiency `eta`: mean, variance, covariance.
pub fn run_twin(settings: &Settings) -> Result<RunReport> {
    let started = Instant::now();
    let gain = settings.gain(1.0)?;
    let det = DetectorParams::new(settings.eta.unwrap_or(1.0))?;
    let reps = stat_reps(settings, DEFAULT_REPS)?;
    let e = twin_beam_ensemble(settings.seed_or_default(), reps, &gain, &det)?;
    let want = twin_moments(&gain, &det);
    let (s, i) = (e.column(twin::SIGNAL), e.column(twin::IDLER));
    let rows = vec![
        ReportRow::new("mean", mean_intensity(s)?, want.mean, PASS_SE),
        ReportRow::new("var", variance_intensity(s)?, want.variance, PASS_SE),
        ReportRow::new("cov", covariance_intensity(s, i)?, want.covariance, PASS_SE),
    ];
    Ok(finish("twin", settings, reps, started, rows))
}

/// Twin beams recombined on a splitter of power transmittance `tau`.
pub fn run_hom(settings: &Settings) -> Result<RunReport> {
    let started = Instant::now();
    let gain = settings.gain(1.0)?;
    let bs = BeamSplitter::with_transmittance(settings.transmittance.unwrap_or(0.5))?;
    let reps = stat_reps(settings, DEFAULT_REPS)?;
    let e = hom_ensemble(settings.seed_or_default(), reps, &gain, &bs)?;
    let cov_in = (gain.cosh() * gain.sinh()).powi(2);
    let ratio = hom_cov_ratio(&bs);
    let cols = |k| e.column(k);
    let rows = vec![
        ReportRow::new("cov_in", covariance_intensity(cols(hom::SIGNAL), cols(hom::IDLER))?, cov_in, PASS_SE),
        ReportRow::new("cov_out", covariance_intensity(cols(hom::OUT1), cols(hom::OUT2))?, ratio * cov_in, PASS_SE),
        ReportRow::new(
            "dip_amplitude",
            hom_dip_amplitude(cols(hom::SIGNAL), cols(hom::IDLER), cols(hom::OUT1), cols(hom::OUT2))?,
            ratio,
            PASS_SE,
        ),
    ];
    Ok(finish("hom", settings, reps, started, rows))
}

/// Polarization-entangled arms: intensity correlation and polarization
/// correlation at `(theta1, theta2)`, plus the CHSH combination.
pub fn run_bell(settings: &Settings) -> Result<RunReport> {
    let started = Instant::now();
    let gain = settings.gain(0.01)?;
    let g = gain.mean_photons();
    let (t1, t2) = (settings.theta1_deg.unwrap_or(22.5).to_radians(), settings.theta2_deg.unwrap_or(22.5).to_radians());
    let reps = stat_reps(settings, DEFAULT_REPS)?;
    let e = bell_ensemble(settings.seed_or_default(), reps, &gain)?;
    let (x1, y1, x2, y2) =
        (e.column(bell::ARM1_X), e.column(bell::ARM1_Y), e.column(bell::ARM2_X), e.column(bell::ARM2_Y));
    let port = |x: &[_], y: &[_], angle: PolarizerAngle| -> Vec<_> {
        x.iter().zip(y).map(|(&a, &b)| polarizer_project(a, b, angle)).collect()
    };
    let p1 = port(x1, y1, PolarizerAngle(t1));
    let m1 = port(x1, y1, PolarizerAngle(t1).orthogonal());
    let p2 = port(x2, y2, PolarizerAngle(t2));
    let m2 = port(x2, y2, PolarizerAngle(t2).orthogonal());
    let at = bell_prediction(t1, t2, g)?;
    let mut rows = vec![
        ReportRow::new("rho", correlation_coefficient(&p1, &p2)?, at.rho, PASS_SE),
        ReportRow::new("E", chsh_coefficient(&p1, &m1, &p2, &m2)?, at.correlation, PASS_SE),
    ];
    let angles = ChshAngles::standard();
    let chsh = chsh_parameter(x1, y1, x2, y2, &angles)?;
    for (k, (a, b)) in angles.settings().iter().enumerate() {
        let want = bell_prediction(*a, *b, g)?.correlation;
        rows.push(ReportRow::new(&format!("E_setting{k}"), chsh.correlations[k], want, PASS_SE));
    }
    rows.push(ReportRow::new("B", chsh.parameter, at.chsh_standard, PASS_SE));
    Ok(finish("bell", settings, reps, started, rows))
}

/// Four-fold intensity moment with all detectors on one signal/idler mode pair.
pub fn run_fourfold(settings: &Settings) -> Result<RunReport> {
    let started = Instant::now();
    let gain = settings.gain(1.0)?;
    let reps = stat_reps(settings, DEFAULT_REPS)?;
    let e = twin_beam_ensemble(settings.seed_or_default(), reps, &gain, &DetectorParams::ideal())?;
    let (s, i) = (e.column(twin::SIGNAL), e.column(twin::IDLER));
    let est = fourfold_covariance(s, s, i, i)?;
    let want = fourfold_terms(&PairMoments::coincident(&gain));
    let rows = vec![
        ReportRow::new("direct", est.direct, want.total().re, PASS_SE),
        ReportRow::new("pairing_sum", est.pairing_sum, want.total().re, PASS_SE),
        ReportRow::new("bunching", est.bunching, want.bunching(), PASS_SE),
        ReportRow::new("low_gain", est.low_gain, want.low_gain(), PASS_SE),
        ReportRow::new("mixed", est.mixed, want.mixed(), PASS_SE),
    ];
    Ok(finish("fourfold", settings, reps, started, rows))
}

/// Builds the imaging configuration from settings.
pub fn hom2d_config(settings: &Settings) -> Result<Hom2dConfig> {
    let d = Hom2dConfig::default();
    let theta_max = settings.theta_max_rad.unwrap_or(6e-4);
    let points = settings.theta_points.unwrap_or(25);
    if points < 2 || !(theta_max.is_finite() && theta_max > 0.0) {
        return Err(invalid("tilt sweep needs at least 2 points and a positive range"));
    }
    let thetas = (0..points).map(|k| -theta_max + 2.0 * theta_max * k as f64 / (points - 1) as f64).collect();
    let cfg = Hom2dConfig {
        grid: settings.grid.unwrap_or(d.grid),
        crystal_length_mm: settings.crystal_length_mm.unwrap_or(d.crystal_length_mm),
        pump_width_px: settings.pump_width_px.unwrap_or(d.pump_width_px),
        pm_width_px_at_1mm: settings.pm_width_px_at_1mm.unwrap_or(d.pm_width_px_at_1mm),
        pixel_angle_rad: settings.pixel_angle_rad.unwrap_or(d.pixel_angle_rad),
        photons_per_pixel: settings.photons_per_pixel.unwrap_or(d.photons_per_pixel),
        thetas,
        reps: stat_reps(settings, DEFAULT_HOM2D_REPS)?,
        seed: settings.seed_or_default(),
        mode_floor: settings.mode_floor.unwrap_or(d.mode_floor),
        transmittance: settings.transmittance.unwrap_or(d.transmittance),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Imaging interferometer sweep.
#[derive(Debug, Clone)]
pub struct Hom2dRun {
    pub config: Hom2dConfig,
    pub curve: DipCurve,
    /// Exact pair-moment expectation at each tilt.
    pub expected: Vec<f64>,
    pub report: RunReport,
}

pub fn run_hom2d_experiment(settings: &Settings) -> Result<Hom2dRun> {
    let started = Instant::now();
    let cfg = hom2d_config(settings)?;
    let curve = run_hom2d(&cfg)?;
    let (kernel, _) = build_kernel(&cfg)?;
    let dec = schmidt_decompose(&kernel, cfg.mode_floor)?;
    let expected = expected_dip_curve(&dec, &cfg)?;
    let rows = curve
        .thetas
        .iter()
        .enumerate()
        .map(|(k, theta)| {
            let est = crate::moments::MomentEstimate::new(curve.amplitudes[k], curve.std_errors[k], cfg.reps);
            ReportRow::new(&format!("amplitude@{theta:e}"), est, expected[k], PASS_SE)
        })
        .collect();
    let report = finish("hom2d", settings, cfg.reps, started, rows);
    Ok(Hom2dRun { config: cfg, curve, expected, report })
}

/// Closed-form predictions tabulated over mean photon numbers.
pub fn oracle_table(settings: &Settings) -> Result<OracleTable> {
    let gs =
        settings.g_values.clone().unwrap_or_else(|| vec![0.001, 0.01, 0.1, 0.2612, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0]);
    let det = DetectorParams::new(settings.eta.unwrap_or(1.0))?;
    let mut rows = Vec::with_capacity(gs.len());
    for g in gs {
        let gain = GainParams::from_mean_photons(g)?;
        let twin = twin_moments(&gain, &det);
        let bell = bell_prediction(0.0, 0.0, g)?;
        let four = fourfold_terms(&PairMoments::coincident(&gain));
        rows.push([
            g,
            gain.gl(),
            twin.mean,
            twin.variance,
            twin.covariance,
            (1.0 + g) / (1.0 + 3.0 * g),
            bell.chsh_standard,
            four.total().re,
            four.bunching(),
            four.low_gain(),
            four.mixed(),
        ]);
    }
    Ok(OracleTable { rows })
}
