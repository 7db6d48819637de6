//! Ensemble estimators that turn symmetric-ordered samples into normal-ordered
//! moments with standard errors.
//!
//! Plain means carry `sd / sqrt(n)` errors. Ratios and other nonlinear
//! statistics use a delete-one jackknife over repetitions.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{ComplexAmplitude, OrderingConstants};
use crate::optics::{polarizer_project, PolarizerAngle};
use crate::oracle::{fourfold_terms, FourfoldTerms, PairMoments, TermClass};
use crate::reduce::{jackknife, mean_se, sum};

/// A real moment with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

impl MomentEstimate {
    pub fn new(value: f64, std_error: f64, n_samples: usize) -> Self {
        Self { value, std_error, n_samples }
    }

    /// Signed distance from `oracle` in units of the standard error.
    pub fn deviation_se(&self, oracle: f64) -> f64 {
        let d = self.value - oracle;
        if d == 0.0 {
            0.0
        } else {
            d / self.std_error
        }
    }

    pub fn agrees_with(&self, oracle: f64, k_se: f64) -> bool {
        self.deviation_se(oracle).abs() < k_se
    }
}

/// A complex moment. `std_error` combines the real and imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEstimate {
    pub value: Complex64,
    pub std_error: f64,
    pub n_samples: usize,
}

fn check_len(cols: &[&[ComplexAmplitude]]) -> Result<usize> {
    let n = cols[0].len();
    if cols.iter().any(|c| c.len() != n) {
        return Err(Error::InvalidArgument("columns differ in length".into()));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 repetitions, got {n}")));
    }
    Ok(n)
}

fn column_mean_intensity(col: &[ComplexAmplitude]) -> f64 {
    let [s] = sum(col.len(), |r| [col[r].norm_sqr()]);
    s / col.len() as f64
}

/// Normal-ordered mean intensity `<|E|^2> - 1/2`.
pub fn mean_intensity(field: &[ComplexAmplitude]) -> Result<MomentEstimate> {
    let n = check_len(&[field])?;
    let (m, se) = mean_se(n, |r| field[r].norm_sqr());
    Ok(MomentEstimate::new(m - OrderingConstants::INTENSITY, se, n))
}

/// Normal-ordered intensity variance, symmetric variance minus 1/4.
pub fn variance_intensity(field: &[ComplexAmplitude]) -> Result<MomentEstimate> {
    let n = check_len(&[field])?;
    let m = column_mean_intensity(field);
    let (v, se) = mean_se(n, |r| (field[r].norm_sqr() - m).powi(2));
    let unbiased = v * n as f64 / (n - 1) as f64;
    Ok(MomentEstimate::new(unbiased - OrderingConstants::VARIANCE, se, n))
}

/// Intensity covariance of two distinct modes. No ordering correction applies.
pub fn covariance_intensity(a: &[ComplexAmplitude], b: &[ComplexAmplitude]) -> Result<MomentEstimate> {
    let n = check_len(&[a, b])?;
    let ma = column_mean_intensity(a);
    let mb = column_mean_intensity(b);
    let (c, se) = mean_se(n, |r| (a[r].norm_sqr() - ma) * (b[r].norm_sqr() - mb));
    Ok(MomentEstimate::new(c * n as f64 / (n - 1) as f64, se, n))
}

/// Normalized intensity correlation using normal-ordered variances.
pub fn correlation_coefficient(a: &[ComplexAmplitude], b: &[ComplexAmplitude]) -> Result<MomentEstimate> {
    let n = check_len(&[a, b])?;
    let ma = column_mean_intensity(a);
    let mb = column_mean_intensity(b);
    let term = |r: usize| {
        let x = a[r].norm_sqr() - ma;
        let y = b[r].norm_sqr() - mb;
        [x, y, x * x, y * y, x * y]
    };
    let stat = |t: &[f64; 5], c: f64| {
        let (mx, my) = (t[0] / c, t[1] / c);
        let vx = (t[2] - c * mx * mx) / (c - 1.0) - OrderingConstants::VARIANCE;
        let vy = (t[3] - c * my * my) / (c - 1.0) - OrderingConstants::VARIANCE;
        let cov = (t[4] - c * mx * my) / (c - 1.0);
        cov / (vx * vy).sqrt()
    };
    let totals = sum(n, term);
    let nf = n as f64;
    let vx = (totals[2] - totals[0] * totals[0] / nf) / (nf - 1.0) - OrderingConstants::VARIANCE;
    let vy = (totals[3] - totals[1] * totals[1] / nf) / (nf - 1.0) - OrderingConstants::VARIANCE;
    if vx <= 0.0 || vy <= 0.0 {
        return Err(Error::Degenerate(format!("normal-ordered variance is not positive ({vx:.3e}, {vy:.3e})")));
    }
    let (v, se) = jackknife(n, term, stat);
    Ok(MomentEstimate::new(v, se, n))
}

/// Single-repetition signal-to-noise ratio: the normal-ordered mean
/// intensity over the spread of the sampled intensities. The spread carries
/// the vacuum noise of the symmetric ordering, which dominates at low gain.
pub fn single_shot_snr(field: &[ComplexAmplitude]) -> Result<f64> {
    let n = check_len(&[field])?;
    let m = column_mean_intensity(field);
    let [ss] = sum(n, |r| [(field[r].norm_sqr() - m).powi(2)]);
    let sd = (ss / (n - 1) as f64).sqrt();
    Ok((m - OrderingConstants::INTENSITY) / sd)
}

/// Fractions of samples on either side of the unit bound for the contrast
/// of two orthogonal polarizer ports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PortContrast {
    /// Share of samples with `|I+ - I-| / (I+ + I-) <= 1` for raw intensities.
    pub raw_within_bound: f64,
    /// Share of samples whose vacuum-subtracted contrast exceeds 1.
    pub subtracted_beyond_bound: f64,
    pub n_samples: usize,
}

pub fn port_contrast(plus: &[ComplexAmplitude], minus: &[ComplexAmplitude]) -> Result<PortContrast> {
    let n = check_len(&[plus, minus])?;
    let h = OrderingConstants::INTENSITY;
    let [within, beyond] = sum(n, |r| {
        let (a, b) = (plus[r].norm_sqr(), minus[r].norm_sqr());
        let raw = (a - b).abs() <= a + b;
        let sub = (a - b).abs() > (a + b - 2.0 * h).abs();
        [f64::from(u8::from(raw)), f64::from(u8::from(sub))]
    });
    Ok(PortContrast { raw_within_bound: within / n as f64, subtracted_beyond_bound: beyond / n as f64, n_samples: n })
}

/// `<a b>` or, with `conjugate_second`, `<a b*>`.
pub fn field_pair_moment(
    a: &[ComplexAmplitude],
    b: &[ComplexAmplitude],
    conjugate_second: bool,
) -> Result<ComplexEstimate> {
    let n = check_len(&[a, b])?;
    let z = |r: usize| if conjugate_second { a[r] * b[r].conj() } else { a[r] * b[r] };
    let (re, se_re) = mean_se(n, |r| z(r).re);
    let (im, se_im) = mean_se(n, |r| z(r).im);
    Ok(ComplexEstimate {
        value: Complex64::new(re, im),
        std_error: (se_re * se_re + se_im * se_im).sqrt(),
        n_samples: n,
    })
}

/// Signed residual of `<Ia Ib> - <Ia><Ib> - |<a b*>|^2 - |<a b>|^2`, in
/// standard errors. Gaussian fields give a residual of order one.
pub fn gaussian_moment_check(a: &[ComplexAmplitude], b: &[ComplexAmplitude]) -> Result<f64> {
    let n = check_len(&[a, b])?;
    let ma = column_mean_intensity(a);
    let mb = column_mean_intensity(b);
    let term = |r: usize| {
        let x = a[r].norm_sqr() - ma;
        let y = b[r].norm_sqr() - mb;
        let p = a[r] * b[r].conj();
        let q = a[r] * b[r];
        [x * y, x, y, p.re, p.im, q.re, q.im]
    };
    let stat = |t: &[f64; 7], c: f64| {
        let m = t.map(|v| v / c);
        m[0] - m[1] * m[2] - (m[3] * m[3] + m[4] * m[4]) - (m[5] * m[5] + m[6] * m[6])
    };
    let (d, se) = jackknife(n, term, stat);
    if se.is_nan() || se <= 0.0 {
        return Err(Error::Degenerate("moment residual has zero spread".into()));
    }
    Ok(d / se)
}

/// Normalized polarization correlation from the four detector fields:
/// `<(I1+ - I1-)(I2+ - I2-)> / <(I1+ + I1-)(I2+ + I2-)>` with normal-ordered
/// intensities.
pub fn chsh_coefficient(
    e1_plus: &[ComplexAmplitude],
    e1_minus: &[ComplexAmplitude],
    e2_plus: &[ComplexAmplitude],
    e2_minus: &[ComplexAmplitude],
) -> Result<MomentEstimate> {
    let n = check_len(&[e1_plus, e1_minus, e2_plus, e2_minus])?;
    let term = |r: usize| chsh_sample(e1_plus[r], e1_minus[r], e2_plus[r], e2_minus[r]);
    check_denominator(n, |r| term(r)[1])?;
    let (v, se) = jackknife(n, term, |t: &[f64; 2], _| t[0] / t[1]);
    Ok(MomentEstimate::new(v, se, n))
}

fn chsh_sample(p1: Complex64, m1: Complex64, p2: Complex64, m2: Complex64) -> [f64; 2] {
    let h = OrderingConstants::INTENSITY;
    let (a, b) = (p1.norm_sqr() - h, m1.norm_sqr() - h);
    let (c, d) = (p2.norm_sqr() - h, m2.norm_sqr() - h);
    [(a - b) * (c - d), (a + b) * (c + d)]
}

fn check_denominator<F: Fn(usize) -> f64 + Sync>(n: usize, den: F) -> Result<()> {
    let (m, se) = mean_se(n, den);
    if m.is_nan() || m <= 5.0 * se || m == 0.0 {
        return Err(Error::Degenerate(format!(
            "coincidence normalization {m:.3e} is not resolved from zero (se {se:.3e})"
        )));
    }
    Ok(())
}

/// Polarizer settings for the two arms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshAngles {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl ChshAngles {
    /// `(0, pi/4)` in arm 1 and `(pi/8, 3pi/8)` in arm 2.
    pub fn standard() -> Self {
        use std::f64::consts::PI;
        Self { a: 0.0, a_prime: PI / 4.0, b: PI / 8.0, b_prime: 3.0 * PI / 8.0 }
    }

    /// Settings in the order `(a,b), (a,b'), (a',b), (a',b')`.
    pub fn settings(&self) -> [(f64, f64); 4] {
        [(self.a, self.b), (self.a, self.b_prime), (self.a_prime, self.b), (self.a_prime, self.b_prime)]
    }
}

/// CHSH combination and its four constituent correlations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshEstimate {
    pub parameter: MomentEstimate,
    pub correlations: [MomentEstimate; 4],
    /// Index of the setting that carries the minus sign.
    pub flipped: usize,
}

/// `|sum_k E_k - 2 E_j|`, maximized over which setting `j` carries the minus
/// sign, from fields `(E1x, E1y, E2x, E2y)` of the two arms.
pub fn chsh_parameter(
    e1x: &[ComplexAmplitude],
    e1y: &[ComplexAmplitude],
    e2x: &[ComplexAmplitude],
    e2y: &[ComplexAmplitude],
    angles: &ChshAngles,
) -> Result<ChshEstimate> {
    let n = check_len(&[e1x, e1y, e2x, e2y])?;
    let settings = angles.settings();
    let term = |r: usize| {
        let mut out = [0.0; 8];
        for (k, &(t1, t2)) in settings.iter().enumerate() {
            let (p1, q1) = (PolarizerAngle(t1), PolarizerAngle(t1).orthogonal());
            let (p2, q2) = (PolarizerAngle(t2), PolarizerAngle(t2).orthogonal());
            let s = chsh_sample(
                polarizer_project(e1x[r], e1y[r], p1),
                polarizer_project(e1x[r], e1y[r], q1),
                polarizer_project(e2x[r], e2y[r], p2),
                polarizer_project(e2x[r], e2y[r], q2),
            );
            out[2 * k] = s[0];
            out[2 * k + 1] = s[1];
        }
        out
    };
    for k in 0..4 {
        check_denominator(n, |r| term(r)[2 * k + 1])?;
    }
    let mut correlations = [MomentEstimate::new(0.0, 0.0, n); 4];
    for (k, slot) in correlations.iter_mut().enumerate() {
        let (v, se) = jackknife(n, term, |t: &[f64; 8], _| t[2 * k] / t[2 * k + 1]);
        *slot = MomentEstimate::new(v, se, n);
    }
    let combo = |e: [f64; 4], j: usize| (e.iter().sum::<f64>() - 2.0 * e[j]).abs();
    let e_full = correlations.map(|c| c.value);
    let flipped = (0..4).max_by(|&i, &j| combo(e_full, i).total_cmp(&combo(e_full, j))).unwrap_or(0);
    let (b, se) =
        jackknife(n, term, |t: &[f64; 8], _| combo([t[0] / t[1], t[2] / t[3], t[4] / t[5], t[6] / t[7]], flipped));
    Ok(ChshEstimate { parameter: MomentEstimate::new(b, se, n), correlations, flipped })
}

/// Output/input ratio of `|<Ea Eb>|^2 + |<Ea Eb*>|^2` for a beam splitter
/// with inputs `(s, i)` and outputs `(o1, o2)`.
///
/// By the Gaussian moment theorem this is the intensity-covariance ratio.
/// Each squared mean uses the unbiased form `(|sum z|^2 - sum |z|^2) / (n (n-1))`,
/// so a perfect dip estimates zero without a positive noise floor.
pub fn hom_dip_amplitude(
    s: &[ComplexAmplitude],
    i: &[ComplexAmplitude],
    o1: &[ComplexAmplitude],
    o2: &[ComplexAmplitude],
) -> Result<MomentEstimate> {
    let n = check_len(&[s, i, o1, o2])?;
    let term = |r: usize| {
        let z = [o1[r] * o2[r], o1[r] * o2[r].conj(), s[r] * i[r], s[r] * i[r].conj()];
        let mut out = [0.0; 12];
        for (k, v) in z.iter().enumerate() {
            out[3 * k] = v.re;
            out[3 * k + 1] = v.im;
            out[3 * k + 2] = v.norm_sqr();
        }
        out
    };
    let stat = |t: &[f64; 12], c: f64| {
        let u = |k: usize| (t[3 * k].powi(2) + t[3 * k + 1].powi(2) - t[3 * k + 2]) / (c * (c - 1.0));
        (u(0) + u(1)) / (u(2) + u(3))
    };
    let (v, se) = jackknife(n, term, stat);
    if !v.is_finite() {
        return Err(Error::Degenerate("input pair moments vanish".into()));
    }
    Ok(MomentEstimate::new(v, se, n))
}

/// Estimated pair moments for the four-fold configuration.
pub fn estimate_pair_moments(
    s1: &[ComplexAmplitude],
    s2: &[ComplexAmplitude],
    i1: &[ComplexAmplitude],
    i2: &[ComplexAmplitude],
) -> Result<PairMoments> {
    let n = check_len(&[s1, s2, i1, i2])?;
    let t = sum(n, |r| pair_products(s1[r], s2[r], i1[r], i2[r]));
    Ok(pair_moments_from_sums(&t, n as f64))
}

fn pair_products(s1: Complex64, s2: Complex64, i1: Complex64, i2: Complex64) -> [f64; 12] {
    let z = [s1 * s2.conj(), i1.conj() * i2, s1 * i1, s1 * i2, s2 * i1, s2 * i2];
    let mut out = [0.0; 12];
    for (k, v) in z.iter().enumerate() {
        out[2 * k] = v.re;
        out[2 * k + 1] = v.im;
    }
    out
}

fn pair_moments_from_sums(t: &[f64; 12], c: f64) -> PairMoments {
    let z = |k: usize| Complex64::new(t[2 * k] / c, t[2 * k + 1] / c);
    PairMoments { s1_s2c: z(0), i1c_i2: z(1), s1_i1: z(2), s1_i2: z(3), s2_i1: z(4), s2_i2: z(5) }
}

/// Four-fold central moment `<dIs1 dIs2 dIi1 dIi2>` estimated two ways.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourfoldEstimate {
    /// Direct ensemble average of the product of centred symmetric intensities.
    pub direct: MomentEstimate,
    /// Sum of the nine pairing terms built from estimated pair moments.
    pub pairing_sum: MomentEstimate,
    pub bunching: MomentEstimate,
    pub low_gain: MomentEstimate,
    pub mixed: MomentEstimate,
    /// The nine terms evaluated at the estimated pair moments.
    pub terms: FourfoldTerms,
}

impl FourfoldEstimate {
    /// Difference between the two routes in units of their combined error.
    pub fn consistency_se(&self) -> f64 {
        let se = self.direct.std_error.hypot(self.pairing_sum.std_error);
        (self.direct.value - self.pairing_sum.value) / se
    }
}

pub fn fourfold_covariance(
    s1: &[ComplexAmplitude],
    s2: &[ComplexAmplitude],
    i1: &[ComplexAmplitude],
    i2: &[ComplexAmplitude],
) -> Result<FourfoldEstimate> {
    let n = check_len(&[s1, s2, i1, i2])?;
    let m = [s1, s2, i1, i2].map(column_mean_intensity);
    let (d, se_d) = mean_se(n, |r| {
        (s1[r].norm_sqr() - m[0]) * (s2[r].norm_sqr() - m[1]) * (i1[r].norm_sqr() - m[2]) * (i2[r].norm_sqr() - m[3])
    });
    let term = |r: usize| pair_products(s1[r], s2[r], i1[r], i2[r]);
    let (p, se_p) = jackknife(n, term, |t, c| fourfold_terms(&pair_moments_from_sums(t, c)).total().re);
    let terms = fourfold_terms(&estimate_pair_moments(s1, s2, i1, i2)?);
    let classes = [TermClass::Bunching, TermClass::LowGain, TermClass::Mixed].map(|class| {
        let (v, se) = jackknife(n, term, |t, c| fourfold_terms(&pair_moments_from_sums(t, c)).class_sum(class).re);
        MomentEstimate::new(v, se, n)
    });
    Ok(FourfoldEstimate {
        direct: MomentEstimate::new(d, se_d, n),
        pairing_sum: MomentEstimate::new(p, se_p, n),
        bunching: classes[0],
        low_gain: classes[1],
        mixed: classes[2],
        terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::sample_vacuum;

    #[test]
    fn vacuum_is_dark_after_reordering() {
        let e = sample_vacuum(3, 100_000, 2).unwrap();
        let m = mean_intensity(e.column(0)).unwrap();
        let v = variance_intensity(e.column(0)).unwrap();
        let c = covariance_intensity(e.column(0), e.column(1)).unwrap();
        assert!(m.agrees_with(0.0, 4.0), "{m:?}");
        assert!(v.agrees_with(0.0, 4.0), "{v:?}");
        assert!(c.agrees_with(0.0, 4.0), "{c:?}");
    }

    #[test]
    fn correlation_of_vacuum_is_degenerate_or_noise() {
        // Vacuum has zero normal-ordered variance, so the ratio is undefined.
        let e = sample_vacuum(4, 50_000, 2).unwrap();
        match correlation_coefficient(e.column(0), e.column(1)) {
            Err(Error::Degenerate(_)) => {}
            Ok(r) => assert!(r.value.is_finite()),
            Err(other) => panic!("{other}"),
        }
    }

    #[test]
    fn mismatched_columns_are_rejected() {
        let e = sample_vacuum(4, 10, 1).unwrap();
        let short = &e.column(0)[..5];
        assert!(covariance_intensity(e.column(0), short).is_err());
        assert!(mean_intensity(&e.column(0)[..1]).is_err());
    }

    #[test]
    fn deviation_handles_exact_match() {
        let m = MomentEstimate::new(1.0, 0.0, 10);
        assert_eq!(m.deviation_se(1.0), 0.0);
        assert!(m.deviation_se(2.0).is_infinite());
    }
}
