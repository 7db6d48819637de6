//! Spatially resolved two-photon interference of far-field twin images.
//!
//! The idler image is mirrored and displaced horizontally before meeting the
//! signal on a beam splitter; each reflected beam passes through the same
//! mirror-and-shift map `D`, which is Hermitian and squares to the identity, so
//! the splitter stays unitary for any displacement. Displacements are applied
//! as exact band-limited Fourier shifts.
//!
//! The dip amplitude at each tilt is the aggregated twin-pixel correlation
//! (summed covariance over the square root of the product of summed
//! variances) after the splitter, divided by the one before it and by the
//! splitter's transmission product. Moments are assembled from estimated
//! pair moments with unbiased squared-mean estimators. Far from the dip the
//! amplitude is 1 at low gain; at high gain it settles somewhat above 1
//! because the displaced reflected image overlaps the transmitted one less,
//! which lowers the summed output variance.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::{fit_gaussian_dip, DipFit};
use super::kernel::{coupling_matrix, mirror_index, JointAmplitudeKernel};
use super::schmidt::{schmidt_decompose, separable_photons, sorted_real_svd, ModeBasis, SchmidtDecomposition};
use super::synth::{separable_images, Image, ImagePair};
use crate::error::{invalid, Error, Result};
use crate::optics::BeamSplitter;

/// Geometry, source and sweep settings for the imaging interferometer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hom2dConfig {
    /// Pixels per image axis (even).
    pub grid: usize,
    pub crystal_length_mm: f64,
    /// Sum-coordinate width of the coupling, in pixels.
    pub pump_width_px: f64,
    /// Difference-coordinate width at a 1 mm crystal; scales as `L^(-1/2)`.
    pub pm_width_px_at_1mm: f64,
    /// Far-field angle subtended by one pixel.
    pub pixel_angle_rad: f64,
    /// Target mean photon number in the brightest pixel.
    pub photons_per_pixel: f64,
    /// Mirror tilts; a tilt `theta` displaces the beam by `2 theta`.
    pub thetas: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
    /// Relative Schmidt-coefficient floor for retained modes.
    pub mode_floor: f64,
    pub transmittance: f64,
}

impl Default for Hom2dConfig {
    fn default() -> Self {
        Self {
            grid: 64,
            crystal_length_mm: 0.8,
            pump_width_px: 2.5,
            pm_width_px_at_1mm: 12.0 * 0.8f64.sqrt(),
            pixel_angle_rad: 1e-4,
            photons_per_pixel: 1.0,
            thetas: default_thetas(),
            reps: 100,
            seed: crate::DEFAULT_SEED,
            mode_floor: 1e-6,
            transmittance: 0.5,
        }
    }
}

/// 25 tilts from -0.6 to 0.6 mrad.
pub fn default_thetas() -> Vec<f64> {
    (-12..=12).map(|k| k as f64 * 5e-5).collect()
}

impl Hom2dConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid < 4 || self.grid % 2 == 1 {
            return Err(invalid(format!("grid must be even and at least 4, got {}", self.grid)));
        }
        let positive = [
            ("crystal length", self.crystal_length_mm),
            ("pump width", self.pump_width_px),
            ("phase-matching width", self.pm_width_px_at_1mm),
            ("pixel angle", self.pixel_angle_rad),
            ("photons per pixel", self.photons_per_pixel),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.thetas.is_empty() || self.thetas.iter().any(|t| !t.is_finite()) {
            return Err(invalid("tilt sweep must be non-empty and finite"));
        }
        if self.reps < 3 {
            return Err(invalid(format!("need at least 3 repetitions, got {}", self.reps)));
        }
        if !(0.0..1.0).contains(&self.mode_floor) {
            return Err(invalid("mode floor must lie in [0, 1)"));
        }
        if !(self.transmittance > 0.0 && self.transmittance <= 1.0) {
            return Err(invalid("transmittance must lie in (0, 1]"));
        }
        Ok(())
    }

    pub fn pm_width_px(&self) -> f64 {
        self.pm_width_px_at_1mm / self.crystal_length_mm.sqrt()
    }

    /// Horizontal displacement in pixels for tilt `theta`.
    pub fn shift_px(&self, theta: f64) -> f64 {
        2.0 * theta / self.pixel_angle_rad
    }
}

/// Mirror through the grid center followed by a Fourier shift of `delta` pixels.
///
/// The Nyquist component takes the sign of an exact shift by the nearest
/// integer, which keeps the operator real, symmetric and an involution on even
/// grids, and makes integer shifts exact pixel permutations.
pub fn shift_operator(n: usize, delta: f64) -> DMatrix<f64> {
    let nf = n as f64;
    let tau = std::f64::consts::TAU;
    // T[x, x'] = (1/n) sum_k ph_k exp(2 pi i k (x - x') / n), ph_k = exp(-2 pi i k delta / n).
    let kernel: Vec<f64> = (0..n)
        .map(|d| {
            let mut acc = 0.0;
            for k in 0..n {
                let kk = if 2 * k < n { k as f64 } else { k as f64 - nf };
                let shift = if 2 * k == n { delta.round() } else { delta };
                let phase = tau * kk * (d as f64 - shift) / nf;
                acc += phase.cos();
            }
            acc / nf
        })
        .collect();
    DMatrix::from_fn(n, n, |x, xp| kernel[(x + n - mirror_index(xp, n)) % n])
        .map(|v| if v.abs() < 1e-15 { 0.0 } else { v })
}

/// Builds the separable kernel, calibrating the peak gain so the brightest
/// pixel holds `photons_per_pixel`. Returns the kernel and the achieved value.
pub fn build_kernel(cfg: &Hom2dConfig) -> Result<(JointAmplitudeKernel, f64)> {
    cfg.validate()?;
    let f = coupling_matrix(cfg.grid, cfg.pump_width_px, cfg.pm_width_px())?;
    let (u, s, _) = sorted_real_svd(&f)?;
    let n = cfg.grid;
    let shape = DMatrix::from_fn(n, n, |j, l| s[j] * s[l] / (s[0] * s[0]));
    let brightest = |g0: f64| separable_photons(&u, &u, &shape.map(|v| v * g0)).into_iter().fold(0.0, f64::max);
    let target = cfg.photons_per_pixel;
    let mut hi = 1.0;
    while brightest(hi) < target {
        hi *= 2.0;
        if hi > 64.0 {
            return Err(Error::Numeric(format!("cannot reach {target} photons per pixel")));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if brightest(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let g0 = 0.5 * (lo + hi);
    Ok((JointAmplitudeKernel::separable(f.clone(), f, g0)?, brightest(g0)))
}

/// Dip amplitude versus tilt with jackknife errors and a Gaussian width.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DipCurve {
    pub thetas: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Fitted Gaussian width in radians of tilt, when a fit converged.
    pub sigma_theta: Option<f64>,
    pub fit: Option<DipFit>,
    pub photons_per_pixel: f64,
    pub modes_kept: usize,
    pub peak_gain: f64,
    /// Aggregated signal/idler twin-pixel correlation before the splitter.
    pub input_correlation: f64,
}

/// Pixel index of the twin partner: mirror on both axes.
fn twin_pixels(n: usize) -> Vec<usize> {
    (0..n * n).map(|p| mirror_index(p / n, n) * n + mirror_index(p % n, n)).collect()
}

/// Aggregated twin correlation with delete-one values.
struct PairingCorrelation {
    full: f64,
    loo: Vec<f64>,
}

/// `sum_a cov(A_a, B_tw(a)) / sqrt(sum_a var A_a * sum_a var B_a)` from
/// per-repetition flattened images. Each pixel moment follows from pair
/// moments through the Gaussian moment theorem, with every squared mean
/// replaced by its unbiased estimate `(|S|^2 - sum |z|^2) / (R (R - 1))`.
/// Variances are normal ordered. Returns NaN when either summed variance is
/// not positive, which happens when vacuum noise swamps a faint image.
fn pairing_correlation(a: &[Vec<Complex64>], b: &[Vec<Complex64>], tw: &[usize]) -> PairingCorrelation {
    let r = a.len();
    let p = tw.len();
    let zero = Complex64::new(0.0, 0.0);
    let (mut s12, mut s12c, mut s11, mut s22) = (vec![zero; p], vec![zero; p], vec![zero; p], vec![zero; p]);
    let (mut n1, mut n2) = (vec![0.0; p], vec![0.0; p]);
    let (mut q12, mut q1, mut q2) = (0.0, 0.0, 0.0);
    for k in 0..r {
        for i in 0..p {
            let (x, y) = (a[k][i], b[k][tw[i]]);
            let (ix, iy) = (x.norm_sqr(), y.norm_sqr());
            s12[i] += x * y;
            s12c[i] += x * y.conj();
            s11[i] += x * x;
            s22[i] += y * y;
            n1[i] += ix;
            n2[i] += iy;
            q12 += ix * iy;
            q1 += ix * ix;
            q2 += iy * iy;
        }
    }
    let t = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let tr = |v: &[f64]| v.iter().map(|z| z * z).sum::<f64>();
    let totals = [t(&s12), t(&s12c), t(&s11), t(&s22), tr(&n1), tr(&n2)];
    let pixels = p as f64;
    let corr = |tot: [f64; 6], q: [f64; 3], reps: f64| {
        let norm = reps * (reps - 1.0);
        let cov = (tot[0] + tot[1] - 2.0 * q[0]) / norm;
        let v1 = (tot[4] + tot[2] - 2.0 * q[1]) / norm - 0.25 * pixels;
        let v2 = (tot[5] + tot[3] - 2.0 * q[2]) / norm - 0.25 * pixels;
        if v1 > 0.0 && v2 > 0.0 {
            cov / (v1 * v2).sqrt()
        } else {
            f64::NAN
        }
    };
    let full = corr(totals, [q12, q1, q2], r as f64);
    let loo = (0..r)
        .into_par_iter()
        .map(|k| {
            let mut cross = [0.0; 6];
            let mut own = [0.0; 3];
            for i in 0..p {
                let (x, y) = (a[k][i], b[k][tw[i]]);
                let (ix, iy) = (x.norm_sqr(), y.norm_sqr());
                cross[0] += (s12[i].conj() * x * y).re;
                cross[1] += (s12c[i].conj() * x * y.conj()).re;
                cross[2] += (s11[i].conj() * x * x).re;
                cross[3] += (s22[i].conj() * y * y).re;
                cross[4] += n1[i] * ix;
                cross[5] += n2[i] * iy;
                own[0] += ix * iy;
                own[1] += ix * ix;
                own[2] += iy * iy;
            }
            // |S - z|^2 = |S|^2 - 2 Re(S* z) + |z|^2, and |z|^2 equals the matching q term.
            let sq = [own[0], own[0], own[1], own[2], own[1], own[2]];
            let mut tot = totals;
            for j in 0..6 {
                tot[j] += sq[j] - 2.0 * cross[j];
            }
            corr(tot, [q12 - own[0], q1 - own[1], q2 - own[2]], (r - 1) as f64)
        })
        .collect();
    PairingCorrelation { full, loo }
}

fn jackknife_ratio(num: &PairingCorrelation, den: &PairingCorrelation, scale: f64) -> (f64, f64) {
    let value = num.full / (scale * den.full);
    let loo: Vec<f64> = num.loo.iter().zip(&den.loo).map(|(a, b)| a / (scale * b)).collect();
    let n = loo.len() as f64;
    let mean = loo.iter().sum::<f64>() / n;
    let var = (n - 1.0) / n * loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    (value, var.sqrt())
}

fn splitter_outputs(pair: &ImagePair, d: &DMatrix<f64>, bs: &BeamSplitter) -> (Vec<Complex64>, Vec<Complex64>) {
    let ds: Image = pair.signal.left(d);
    let di: Image = pair.idler.left(d);
    let e1 = pair.signal.combine(bs.t_s1, &di, bs.r_i1);
    let e2 = ds.combine(bs.r_s2, &pair.idler, bs.t_i2);
    (e1.flatten(), e2.flatten())
}

/// Runs the Monte Carlo sweep and fits the dip width.
pub fn run_hom2d(cfg: &Hom2dConfig) -> Result<DipCurve> {
    let (kernel, photons) = build_kernel(cfg)?;
    let dec = schmidt_decompose(&kernel, cfg.mode_floor)?;
    let bs = BeamSplitter::with_transmittance(cfg.transmittance)?;
    let n = cfg.grid;
    let tw = twin_pixels(n);
    let images = separable_images(&dec, cfg.seed, cfg.reps);
    let sig: Vec<Vec<Complex64>> = images.par_iter().map(|p| p.signal.flatten()).collect();
    let idl: Vec<Vec<Complex64>> = images.par_iter().map(|p| p.idler.flatten()).collect();
    let input = pairing_correlation(&sig, &idl, &tw);
    drop((sig, idl));
    let scale = bs.transmission_product();
    let mut amplitudes = Vec::with_capacity(cfg.thetas.len());
    let mut std_errors = Vec::with_capacity(cfg.thetas.len());
    for &theta in &cfg.thetas {
        let d = shift_operator(n, cfg.shift_px(theta));
        let (o1, o2): (Vec<_>, Vec<_>) = images.par_iter().map(|p| splitter_outputs(p, &d, &bs)).unzip();
        let out = pairing_correlation(&o1, &o2, &tw);
        let (a, se) = jackknife_ratio(&out, &input, scale);
        amplitudes.push(a);
        std_errors.push(se);
    }
    let fit = fit_gaussian_dip(&cfg.thetas, &amplitudes);
    Ok(DipCurve {
        thetas: cfg.thetas.clone(),
        amplitudes,
        std_errors,
        sigma_theta: fit.map(|f| f.sigma),
        fit,
        photons_per_pixel: photons,
        modes_kept: dec.num_modes(),
        peak_gain: kernel.peak_gain().unwrap_or(0.0),
        input_correlation: input.full,
    })
}

/// Pair-moment sums `sum_jl ax[x,j] bx[x',j] w[j,l] ay[y,l] by[y',l]` with
/// `x' = mirror(x)` when `paired`, else `x' = x` (same for `y`).
fn mode_sum(
    ax: &DMatrix<f64>,
    bx: &DMatrix<f64>,
    ay: &DMatrix<f64>,
    by: &DMatrix<f64>,
    w: &DMatrix<f64>,
    paired: bool,
) -> DMatrix<f64> {
    let n = ax.nrows();
    let partner = |i: usize| if paired { mirror_index(i, n) } else { i };
    let hx = DMatrix::from_fn(n, ax.ncols(), |x, j| ax[(x, j)] * bx[(partner(x), j)]);
    let hy = DMatrix::from_fn(n, ay.ncols(), |y, l| ay[(y, l)] * by[(partner(y), l)]);
    hx * w * hy.transpose()
}

/// Expected dip amplitude at each tilt from exact pair moments.
pub fn expected_dip_curve(dec: &SchmidtDecomposition, cfg: &Hom2dConfig) -> Result<Vec<f64>> {
    let ModeBasis::Separable { ux, uy, vx, vy, gain, .. } = &dec.basis else {
        return Err(invalid("expected curve requires a separable decomposition"));
    };
    let bs = BeamSplitter::with_transmittance(cfg.transmittance)?;
    let (t1, r1, r2, t2) = (bs.t_s1, bs.r_i1, bs.r_s2, bs.t_i2);
    let n = ux.nrows();
    let lam = gain.map(|g| (2.0 * g).sinh() / 2.0);
    let occ = gain.map(|g| g.sinh().powi(2) + 0.5);
    let quarter_sum = |m: &DMatrix<f64>| m.iter().map(|v| v * v - 0.25).sum::<f64>();
    let k_in = mode_sum(ux, vx, uy, vy, &lam, true);
    let ns = mode_sum(ux, ux, uy, uy, &occ, false);
    let ni = mode_sum(vx, vx, vy, vy, &occ, false);
    let c_in = k_in.iter().map(|v| v * v).sum::<f64>() / (quarter_sum(&ns) * quarter_sum(&ni)).sqrt();
    let scale = bs.transmission_product();
    let mut out = Vec::with_capacity(cfg.thetas.len());
    for &theta in &cfg.thetas {
        let d = shift_operator(n, cfg.shift_px(theta));
        let (du, dv) = (&d * ux, &d * vx);
        let k_sw = mode_sum(&dv, &du, vy, uy, &lam, true);
        let ss = mode_sum(ux, &du, uy, uy, &occ, true);
        let ii = mode_sum(&dv, vx, vy, vy, &occ, true);
        let n1 = ns.map(|v| v * t1.norm_sqr()) + mode_sum(&dv, &dv, vy, vy, &occ, false) * r1.norm_sqr();
        let n2 = ni.map(|v| v * t2.norm_sqr()) + mode_sum(&du, &du, uy, uy, &occ, false) * r2.norm_sqr();
        let m1 = mode_sum(ux, &dv, uy, vy, &lam, false);
        let m2 = mode_sum(vx, &du, vy, uy, &lam, false);
        let (a1, a2) = (2.0 * t1 * r1, 2.0 * r2 * t2);
        let mut cov = 0.0;
        let (mut v1, mut v2) = (0.0, 0.0);
        for i in 0..n * n {
            let e12 = t1 * t2 * k_in[i] + r1 * r2 * k_sw[i];
            let e12c = t1 * r2.conj() * ss[i] + r1 * t2.conj() * ii[i];
            cov += e12.norm_sqr() + e12c.norm_sqr();
            v1 += n1[i] * n1[i] + (a1 * m1[i]).norm_sqr() - 0.25;
            v2 += n2[i] * n2[i] + (a2 * m2[i]).norm_sqr() - 0.25;
        }
        out.push(cov / (v1 * v2).sqrt() / (scale * c_in));
    }
    Ok(out)
}
