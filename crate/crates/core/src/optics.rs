//! Linear transformations applied to individual stochastic field samples.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::gaussian::ComplexAmplitude;

const UNITARITY_TOL: f64 = 1e-9;

/// Single-pass parametric gain, stored as `gL` with its hyperbolic functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainParams {
    gl: f64,
    cosh: f64,
    sinh: f64,
}

impl GainParams {
    pub fn from_gl(gl: f64) -> Result<Self> {
        if !gl.is_finite() || gl < 0.0 {
            return Err(invalid(format!("gain gL must be finite and non-negative, got {gl}")));
        }
        Ok(Self { gl, cosh: gl.cosh(), sinh: gl.sinh() })
    }

    /// Gain that yields `photons` mean photons per mode, i.e. `sinh^2(gL) = photons`.
    pub fn from_mean_photons(photons: f64) -> Result<Self> {
        if !photons.is_finite() || photons < 0.0 {
            return Err(invalid(format!("mean photon number must be finite and non-negative, got {photons}")));
        }
        Self::from_gl(photons.sqrt().asinh())
    }

    pub fn gl(&self) -> f64 {
        self.gl
    }

    pub fn cosh(&self) -> f64 {
        self.cosh
    }

    pub fn sinh(&self) -> f64 {
        self.sinh
    }

    /// Normal-ordered mean photon number per mode.
    pub fn mean_photons(&self) -> f64 {
        self.sinh * self.sinh
    }
}

/// Bogoliubov transform of a signal/idler vacuum pair.
pub fn parametric_amplify(
    signal: ComplexAmplitude,
    idler: ComplexAmplitude,
    gain: &GainParams,
) -> (ComplexAmplitude, ComplexAmplitude) {
    let c = gain.cosh;
    let mis = Complex64::new(0.0, -gain.sinh);
    (c * signal + mis * idler.conj(), c * idler + mis * signal.conj())
}

/// Four-port splitter mapping `(signal, idler)` to outputs `(1, 2)`:
/// `E1 = t_s1 Es + r_i1 Ei` and `E2 = r_s2 Es + t_i2 Ei`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitter {
    pub t_s1: Complex64,
    pub r_s2: Complex64,
    pub r_i1: Complex64,
    pub t_i2: Complex64,
}

impl BeamSplitter {
    /// Validates energy conservation and port orthogonality.
    pub fn new(t_s1: Complex64, r_s2: Complex64, r_i1: Complex64, t_i2: Complex64) -> Result<Self> {
        let col_s = t_s1.norm_sqr() + r_s2.norm_sqr();
        let col_i = t_i2.norm_sqr() + r_i1.norm_sqr();
        let cross = t_s1 * r_s2.conj() + r_i1 * t_i2.conj();
        let bad =
            (col_s - 1.0).abs() > UNITARITY_TOL || (col_i - 1.0).abs() > UNITARITY_TOL || cross.norm() > UNITARITY_TOL;
        if bad {
            return Err(invalid(format!(
                "beam splitter is not unitary: |t_s1|^2+|r_s2|^2={col_s}, |t_i2|^2+|r_i1|^2={col_i}, cross={cross}"
            )));
        }
        Ok(Self { t_s1, r_s2, r_i1, t_i2 })
    }

    /// Symmetric splitter with power transmittance `tau`: `t = sqrt(tau)`, `r = i sqrt(1-tau)`.
    pub fn with_transmittance(tau: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau) {
            return Err(invalid(format!("transmittance must lie in [0, 1], got {tau}")));
        }
        let t = Complex64::new(tau.sqrt(), 0.0);
        let r = Complex64::new(0.0, (1.0 - tau).sqrt());
        Self::new(t, r, r, t)
    }

    /// 50:50 splitter with `t = 1/sqrt(2)` and `r = i/sqrt(2)`.
    pub fn balanced() -> Self {
        Self::with_transmittance(0.5).expect("balanced splitter is unitary")
    }

    /// Transmission product `|t_s1|^2 |t_i2|^2`.
    pub fn transmission_product(&self) -> f64 {
        self.t_s1.norm_sqr() * self.t_i2.norm_sqr()
    }
}

/// Applies the splitter to one sample. Unitarity is enforced at construction.
pub fn beam_split(
    signal: ComplexAmplitude,
    idler: ComplexAmplitude,
    bs: &BeamSplitter,
) -> (ComplexAmplitude, ComplexAmplitude) {
    (bs.t_s1 * signal + bs.r_i1 * idler, bs.r_s2 * signal + bs.t_i2 * idler)
}

/// Linear polarizer orientation in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizerAngle(pub f64);

impl PolarizerAngle {
    /// The complementary output port of a polarizing splitter.
    pub fn orthogonal(self) -> Self {
        Self(self.0 + std::f64::consts::FRAC_PI_2)
    }
}

/// Field transmitted by a polarizer at `angle`: `Ex cos(angle) + Ey sin(angle)`.
pub fn polarizer_project(ex: ComplexAmplitude, ey: ComplexAmplitude, angle: PolarizerAngle) -> ComplexAmplitude {
    let (s, c) = angle.0.sin_cos();
    ex * c + ey * s
}

/// Detector quantum efficiency, modelled as a splitter that admits vacuum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorParams {
    eta: f64,
}

impl DetectorParams {
    pub fn new(eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(invalid(format!("detector efficiency must lie in [0, 1], got {eta}")));
        }
        Ok(Self { eta })
    }

    pub fn ideal() -> Self {
        Self { eta: 1.0 }
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

/// `sqrt(eta) E + sqrt(1 - eta) vacuum`.
pub fn detector_loss(field: ComplexAmplitude, det: &DetectorParams, vacuum: ComplexAmplitude) -> ComplexAmplitude {
    field * det.eta.sqrt() + vacuum * (1.0 - det.eta).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_gain_is_identity() {
        let g = GainParams::from_gl(0.0).unwrap();
        let (s, i) = parametric_amplify(c(0.3, -0.2), c(-0.1, 0.7), &g);
        assert_eq!(s, c(0.3, -0.2));
        assert_eq!(i, c(-0.1, 0.7));
    }

    #[test]
    fn gain_validation() {
        assert!(GainParams::from_gl(-0.1).is_err());
        assert!(GainParams::from_gl(f64::NAN).is_err());
        let g = GainParams::from_mean_photons(10.0).unwrap();
        assert!((g.mean_photons() - 10.0).abs() < 1e-10);
    }

    #[test]
    fn non_unitary_splitter_is_rejected() {
        let h = c(0.5f64.sqrt(), 0.0);
        assert!(BeamSplitter::new(h, h, h, h).is_err());
        assert!(BeamSplitter::with_transmittance(1.2).is_err());
        assert!(DetectorParams::new(1.5).is_err());
        assert!(DetectorParams::new(-0.01).is_err());
    }

    #[test]
    fn detector_extremes() {
        let e = c(1.5, -2.0);
        let v = c(0.1, 0.2);
        assert_eq!(detector_loss(e, &DetectorParams::ideal(), v), e);
        assert_eq!(detector_loss(e, &DetectorParams::new(0.0).unwrap(), v), v);
    }

    proptest! {
        // Symplectic invariant: |Es'|^2 - |Ei'|^2 is conserved by the amplifier.
        #[test]
        fn amplifier_preserves_intensity_difference(gl in 0.0f64..3.0, a in -2.0f64..2.0, b in -2.0f64..2.0,
                                                    x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let g = GainParams::from_gl(gl).unwrap();
            let (s, i) = parametric_amplify(c(a, b), c(x, y), &g);
            let before = a * a + b * b - x * x - y * y;
            let after = s.norm_sqr() - i.norm_sqr();
            prop_assert!((before - after).abs() < 1e-9 * (1.0 + s.norm_sqr()));
        }

        #[test]
        fn splitter_conserves_energy(tau in 0.0f64..=1.0, a in -2.0f64..2.0, b in -2.0f64..2.0,
                                     x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let bs = BeamSplitter::with_transmittance(tau).unwrap();
            let (o1, o2) = beam_split(c(a, b), c(x, y), &bs);
            let before = a * a + b * b + x * x + y * y;
            prop_assert!((o1.norm_sqr() + o2.norm_sqr() - before).abs() < 1e-12 * (1.0 + before));
        }

        #[test]
        fn polarizer_ports_split_energy(theta in -7.0f64..7.0, a in -2.0f64..2.0, b in -2.0f64..2.0,
                                        x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let ang = PolarizerAngle(theta);
            let p = polarizer_project(c(a, b), c(x, y), ang);
            let q = polarizer_project(c(a, b), c(x, y), ang.orthogonal());
            let before = a * a + b * b + x * x + y * y;
            prop_assert!((p.norm_sqr() + q.norm_sqr() - before).abs() < 1e-12 * (1.0 + before));
        }
    }
}
