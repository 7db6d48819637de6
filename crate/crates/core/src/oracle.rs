//! Closed-form predictions used to validate the Monte Carlo pipelines.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::optics::{BeamSplitter, DetectorParams, GainParams};

/// Normal-ordered twin-beam moments after detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwinMoments {
    pub mean: f64,
    pub variance: f64,
    pub covariance: f64,
}

/// Mean `eta S^2`, variance `eta^2 S^4 + eta S^2`, covariance `eta^2 S^4 + eta^2 S^2`.
pub fn twin_moments(gain: &GainParams, det: &DetectorParams) -> TwinMoments {
    let s2 = gain.mean_photons();
    let eta = det.eta();
    TwinMoments {
        mean: eta * s2,
        variance: eta * eta * s2 * s2 + eta * s2,
        covariance: eta * eta * s2 * s2 + eta * eta * s2,
    }
}

/// Output/input covariance ratio `|t_s1 t_i2 + r_i1 r_s2|^2`.
pub fn hom_cov_ratio(bs: &BeamSplitter) -> f64 {
    (bs.t_s1 * bs.t_i2 + bs.r_i1 * bs.r_s2).norm_sqr()
}

/// Predictions for polarization-entangled arms fed by two amplifiers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BellPrediction {
    /// Normalized intensity correlation of the `+` ports.
    pub rho: f64,
    /// Normalized polarization correlation from raw intensity products.
    pub correlation: f64,
    /// CHSH parameter at the standard angle set.
    pub chsh_standard: f64,
}

pub fn bell_prediction(theta1: f64, theta2: f64, mean_photons: f64) -> Result<BellPrediction> {
    if !theta1.is_finite() || !theta2.is_finite() {
        return Err(invalid("polarizer angles must be finite"));
    }
    if !mean_photons.is_finite() || mean_photons < 0.0 {
        return Err(invalid(format!("mean photon number must be finite and non-negative, got {mean_photons}")));
    }
    let g = mean_photons;
    let (s, c) = (theta1 + theta2).sin_cos();
    let visibility = (1.0 + g) / (1.0 + 3.0 * g);
    Ok(BellPrediction {
        rho: s * s,
        correlation: visibility * (s * s - c * c),
        chsh_standard: visibility * 2.0 * std::f64::consts::SQRT_2,
    })
}

/// Mean photon number above which the CHSH bound of 2 is no longer exceeded.
pub fn chsh_threshold_gain() -> f64 {
    let r2 = std::f64::consts::SQRT_2;
    (r2 - 1.0) / (3.0 - r2)
}

/// Symmetric-ordered pair moments that determine the four-fold moment.
///
/// Fields are signal and idler in two detectors, `s1, s2, i1, i2`. The
/// remaining pairings follow by complex conjugation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairMoments {
    /// `<Es1 Es2*>`
    pub s1_s2c: Complex64,
    /// `<Ei1* Ei2>`
    pub i1c_i2: Complex64,
    /// `<Es1 Ei1>`
    pub s1_i1: Complex64,
    /// `<Es1 Ei2>`
    pub s1_i2: Complex64,
    /// `<Es2 Ei1>`
    pub s2_i1: Complex64,
    /// `<Es2 Ei2>`
    pub s2_i2: Complex64,
}

impl PairMoments {
    /// All four detectors see the same signal/idler mode pair.
    pub fn coincident(gain: &GainParams) -> Self {
        let n = Complex64::new(gain.mean_photons() + 0.5, 0.0);
        let m = Complex64::new(0.0, -gain.cosh() * gain.sinh());
        Self { s1_s2c: n, i1c_i2: n, s1_i1: m, s1_i2: m, s2_i1: m, s2_i2: m }
    }
}

/// Physical origin of each pairing term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TermClass {
    /// Thermal-like intensity bunching within each beam.
    Bunching,
    /// Products of signal-idler correlations only; dominant at low gain.
    LowGain,
    /// One bunching factor pair with one signal-idler pair.
    Mixed,
}

pub const TERM_CLASSES: [TermClass; 9] = [
    TermClass::Bunching,
    TermClass::Mixed,
    TermClass::Mixed,
    TermClass::Mixed,
    TermClass::LowGain,
    TermClass::LowGain,
    TermClass::Mixed,
    TermClass::LowGain,
    TermClass::LowGain,
];

/// The nine fully connected pairings of the four-fold central moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourfoldTerms {
    pub terms: [Complex64; 9],
}

impl FourfoldTerms {
    pub fn total(&self) -> Complex64 {
        self.terms.iter().sum()
    }

    pub fn class_sum(&self, class: TermClass) -> Complex64 {
        self.terms.iter().zip(TERM_CLASSES).filter(|(_, c)| *c == class).map(|(t, _)| *t).sum()
    }

    pub fn bunching(&self) -> f64 {
        self.class_sum(TermClass::Bunching).re
    }

    pub fn low_gain(&self) -> f64 {
        self.class_sum(TermClass::LowGain).re
    }

    pub fn mixed(&self) -> f64 {
        self.class_sum(TermClass::Mixed).re
    }
}

/// Evaluates each pairing of `(s1, s2, i1*, i2*)` with `(s1*, s2*, i1, i2)`
/// in which no field meets its own conjugate.
pub fn fourfold_terms(p: &PairMoments) -> FourfoldTerms {
    let ss = p.s1_s2c; // <s1 s2*>
    let sc = p.s1_s2c.conj(); // <s2 s1*>
    let ii = p.i1c_i2; // <i1* i2>
    let ic = p.i1c_i2.conj(); // <i2* i1>
    let (a11, a12, a21, a22) = (p.s1_i1, p.s1_i2, p.s2_i1, p.s2_i2);
    FourfoldTerms {
        terms: [
            ss * sc * ii * ic,
            ss * a21 * ii * a12.conj(),
            ss * a22 * a11.conj() * ic,
            a11 * sc * ii * a22.conj(),
            a11 * a22 * a11.conj() * a22.conj(),
            a11 * a22 * a21.conj() * a12.conj(),
            a12 * sc * a21.conj() * ic,
            a12 * a21 * a11.conj() * a22.conj(),
            a12 * a21 * a21.conj() * a12.conj(),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twin_moments_at_unit_gain() {
        let g = GainParams::from_mean_photons(1.0).unwrap();
        let t = twin_moments(&g, &DetectorParams::new(0.5).unwrap());
        assert!((t.mean - 0.5).abs() < 1e-12);
        assert!((t.variance - 0.75).abs() < 1e-12);
        assert!((t.covariance - 0.5).abs() < 1e-12);
    }

    #[test]
    fn splitter_ratios() {
        assert!(hom_cov_ratio(&BeamSplitter::balanced()) < 1e-30);
        assert!((hom_cov_ratio(&BeamSplitter::with_transmittance(1.0).unwrap()) - 1.0).abs() < 1e-15);
        assert!((hom_cov_ratio(&BeamSplitter::with_transmittance(0.9).unwrap()) - 0.64).abs() < 1e-12);
    }

    #[test]
    fn bell_values() {
        let p = bell_prediction(std::f64::consts::FRAC_PI_8, std::f64::consts::FRAC_PI_8, 0.0).unwrap();
        assert!((p.rho - 0.5).abs() < 1e-12);
        assert!(p.correlation.abs() < 1e-12);
        assert!((p.chsh_standard - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        let t = chsh_threshold_gain();
        let at = bell_prediction(0.0, 0.0, t).unwrap();
        assert!((at.chsh_standard - 2.0).abs() < 1e-12);
        assert!(bell_prediction(0.0, f64::NAN, 1.0).is_err());
        assert!(bell_prediction(0.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn coincident_unit_gain_terms() {
        // n = 3/2 and |m|^2 = 2 at one photon per mode.
        let t = fourfold_terms(&PairMoments::coincident(&GainParams::from_mean_photons(1.0).unwrap()));
        assert!((t.bunching() - 5.0625).abs() < 1e-12);
        assert!((t.mixed() - 18.0).abs() < 1e-12);
        assert!((t.low_gain() - 16.0).abs() < 1e-12);
        assert!((t.total().re - 39.0625).abs() < 1e-12);
        assert!(t.total().im.abs() < 1e-12);
    }

    #[test]
    fn high_gain_bunching_scaling() {
        let g1 = GainParams::from_mean_photons(50.0).unwrap();
        let g2 = GainParams::from_gl(2.0 * g1.gl()).unwrap();
        let b = |g: &GainParams| fourfold_terms(&PairMoments::coincident(g)).bunching();
        let ratio = b(&g2) / b(&g1);
        let target = (g2.mean_photons() / g1.mean_photons()).powi(4);
        assert!((ratio / target - 1.0).abs() < 0.1, "{ratio} vs {target}");
    }
}
