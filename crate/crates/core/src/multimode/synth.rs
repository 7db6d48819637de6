//! Stochastic synthesis of pixel fields from Schmidt modes.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::schmidt::{ModeBasis, SchmidtDecomposition};
use crate::error::{invalid, Result};
use crate::gaussian::{derive_stream, FieldEnsemble, RngStream};
use crate::optics::{parametric_amplify, GainParams};

/// Complex image on an `n x n` grid, split into real and imaginary parts so
/// that real linear maps can use real matrix products.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Image {
    pub re: DMatrix<f64>,
    pub im: DMatrix<f64>,
}

impl Image {
    pub fn at(&self, x: usize, y: usize) -> Complex64 {
        Complex64::new(self.re[(x, y)], self.im[(x, y)])
    }

    /// `a * self * b^T` for real `a`, `b`.
    pub fn sandwich(&self, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Image {
        let bt = b.transpose();
        Image { re: a * &self.re * &bt, im: a * &self.im * &bt }
    }

    /// `d * self`, acting on the first (horizontal) axis.
    pub fn left(&self, d: &DMatrix<f64>) -> Image {
        Image { re: d * &self.re, im: d * &self.im }
    }

    /// `p * self + q * other` for complex scalars.
    pub fn combine(&self, p: Complex64, other: &Image, q: Complex64) -> Image {
        let re = &self.re * p.re - &self.im * p.im + &other.re * q.re - &other.im * q.im;
        let im = &self.re * p.im + &self.im * p.re + &other.re * q.im + &other.im * q.re;
        Image { re, im }
    }

    /// Pixel values in the order `x * n + y`.
    pub fn flatten(&self) -> Vec<Complex64> {
        let n = self.re.nrows();
        (0..n * n).map(|p| self.at(p / n, p % n)).collect()
    }
}

/// One repetition of signal and idler pixel fields.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ImagePair {
    pub signal: Image,
    pub idler: Image,
}

/// Pixel-resolved ensembles; modes are pixels in the order `x * n + y`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultimodeSample {
    pub signal: FieldEnsemble,
    pub idler: FieldEnsemble,
}

fn draw_modes(rng: &mut RngStream, n: usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        for l in 0..n {
            m[(j, l)] = rng.vacuum();
        }
    }
    m
}

fn split(m: &DMatrix<Complex64>) -> Image {
    Image { re: m.map(|z| z.re), im: m.map(|z| z.im) }
}

/// Separable synthesis for one repetition. Modes below the floor carry gain
/// zero and remain vacuum, so every pixel sees the full vacuum noise.
pub(crate) fn synthesize_separable(dec: &SchmidtDecomposition, rng: &mut RngStream) -> ImagePair {
    let ModeBasis::Separable { ux, uy, vx, vy, gain, .. } = &dec.basis else {
        unreachable!("separable synthesis on a dense basis")
    };
    let n = ux.nrows();
    let vs = draw_modes(rng, n);
    let vi = draw_modes(rng, n);
    let mut es = DMatrix::zeros(n, n);
    let mut ei = DMatrix::zeros(n, n);
    for j in 0..n {
        for l in 0..n {
            let g = GainParams::from_gl(gain[(j, l)]).expect("mode gains are non-negative");
            let (s, i) = parametric_amplify(vs[(j, l)], vi[(j, l)], &g);
            es[(j, l)] = s;
            ei[(j, l)] = i;
        }
    }
    // Signal pixels carry a factor i so that <Es Ei> = U diag(lambda) V^T.
    let xs = split(&es).sandwich(ux, uy);
    let signal = Image { re: -xs.im, im: xs.re };
    let idler = split(&ei).sandwich(vx, vy);
    ImagePair { signal, idler }
}

pub(crate) fn separable_images(dec: &SchmidtDecomposition, seed: u64, reps: usize) -> Vec<ImagePair> {
    (0..reps).into_par_iter().map(|r| synthesize_separable(dec, &mut derive_stream(seed, r as u64))).collect()
}

fn synthesize_dense(
    u: &DMatrix<Complex64>,
    v: &DMatrix<Complex64>,
    gains: &[f64],
    rng: &mut RngStream,
    row: &mut [Complex64],
) {
    let k = gains.len();
    let (ns, ni) = (u.nrows(), v.nrows());
    let mut es = Vec::with_capacity(k);
    let mut ei = Vec::with_capacity(k);
    for &g in gains {
        let g = GainParams::from_gl(g).expect("mode gains are non-negative");
        let (s, i) = parametric_amplify(rng.vacuum(), rng.vacuum(), &g);
        es.push(s);
        ei.push(i);
    }
    let fill = |basis: &DMatrix<Complex64>,
                modes: &[Complex64],
                phase: Complex64,
                rng: &mut RngStream,
                out: &mut [Complex64]| {
        let p = basis.nrows();
        let w: Vec<Complex64> = (0..p).map(|_| rng.vacuum()).collect();
        // Vacuum in the orthogonal complement of the retained modes: w - B B^dag w.
        let proj: Vec<Complex64> = (0..k).map(|m| (0..p).map(|a| basis[(a, m)].conj() * w[a]).sum()).collect();
        for a in 0..p {
            let mut z = w[a];
            for m in 0..k {
                z += basis[(a, m)] * (phase * modes[m] - proj[m]);
            }
            out[a] = z;
        }
    };
    let (sig, idl) = row.split_at_mut(ns);
    fill(u, &es, Complex64::new(0.0, 1.0), rng, sig);
    fill(v, &ei, Complex64::new(1.0, 0.0), rng, &mut idl[..ni]);
}

/// Draws `reps` repetitions of signal and idler pixel fields.
pub fn sample_multimode(dec: &SchmidtDecomposition, seed: u64, reps: usize) -> Result<MultimodeSample> {
    if reps == 0 {
        return Err(invalid("need at least one repetition"));
    }
    let (ns, ni) = (dec.signal_pixels(), dec.idler_pixels());
    let joint = match &dec.basis {
        ModeBasis::Dense { u, v } => {
            FieldEnsemble::generate(seed, reps, ns + ni, |rng, row| synthesize_dense(u, v, dec.gains(), rng, row))?
        }
        ModeBasis::Separable { .. } => FieldEnsemble::generate(seed, reps, ns + ni, |rng, row| {
            let pair = synthesize_separable(dec, rng);
            row[..ns].copy_from_slice(&pair.signal.flatten());
            row[ns..].copy_from_slice(&pair.idler.flatten());
        })?,
    };
    let signal = FieldEnsemble::from_columns(seed, (0..ns).map(|m| joint.column(m).to_vec()).collect())?;
    let idler = FieldEnsemble::from_columns(seed, (ns..ns + ni).map(|m| joint.column(m).to_vec()).collect())?;
    Ok(MultimodeSample { signal, idler })
}
