//! Schmidt (singular value) decomposition of the joint amplitude into
//! independent two-mode squeezers.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::kernel::{JointAmplitudeKernel, KernelRepr};
use crate::error::{invalid, Error, Result};

/// Pixel bases for the signal (`u`) and idler (`v`) Schmidt modes.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum ModeBasis {
    /// Columns are the kept modes; `kernel = u diag(lambda) v^T`.
    Dense { u: DMatrix<Complex64>, v: DMatrix<Complex64> },
    /// Full per-axis bases. Mode `(j, l)` has pixel profile `ux[:, j] * uy[:, l]`.
    /// `gain[(j, l)]` is zero for modes below the retention floor.
    Separable {
        ux: DMatrix<f64>,
        uy: DMatrix<f64>,
        vx: DMatrix<f64>,
        vy: DMatrix<f64>,
        gain: DMatrix<f64>,
        kept: Vec<(usize, usize)>,
    },
}

/// Schmidt modes with coupling strengths `lambda_k = cosh(g_k) sinh(g_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtDecomposition {
    pub(crate) basis: ModeBasis,
    lambda: Vec<f64>,
    gains: Vec<f64>,
}

/// Per-mode gain from a Schmidt coefficient: `lambda = sinh(2g)/2`.
pub fn gain_from_lambda(lambda: f64) -> f64 {
    (2.0 * lambda).asinh() / 2.0
}

fn lambda_from_gain(g: f64) -> f64 {
    (2.0 * g).sinh() / 2.0
}

/// Singular values sorted descending with matching real singular vectors.
pub(crate) fn sorted_real_svd(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, Vec<f64>, DMatrix<f64>)> {
    let svd = m.clone().svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Numeric("singular value decomposition failed".into())),
    };
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let s = order.iter().map(|&k| svd.singular_values[k]).collect();
    let u = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let v = DMatrix::from_fn(vt.ncols(), order.len(), |r, c| vt[(order[c], r)]);
    Ok((u, s, v))
}

/// Decomposes `kernel`, keeping modes whose coupling exceeds `floor` times
/// the strongest one.
pub fn schmidt_decompose(kernel: &JointAmplitudeKernel, floor: f64) -> Result<SchmidtDecomposition> {
    if !(0.0..1.0).contains(&floor) {
        return Err(invalid(format!("mode floor must lie in [0, 1), got {floor}")));
    }
    match &kernel.repr {
        KernelRepr::Dense(k) => decompose_dense(k, floor),
        KernelRepr::Separable { fx, fy, g0 } => decompose_separable(fx, fy, *g0, floor),
    }
}

fn decompose_dense(k: &DMatrix<Complex64>, floor: f64) -> Result<SchmidtDecomposition> {
    let svd = k.clone().svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Numeric("singular value decomposition failed".into())),
    };
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let top = order.first().map_or(0.0, |&k| svd.singular_values[k]);
    let kept: Vec<usize> =
        order.into_iter().filter(|&k| svd.singular_values[k] > 0.0 && svd.singular_values[k] >= floor * top).collect();
    let lambda: Vec<f64> = kept.iter().map(|&k| svd.singular_values[k]).collect();
    // k = U S V_t = U S (V_t^T)^T, so the idler basis is the transpose of V_t's rows.
    let u = DMatrix::from_fn(u.nrows(), kept.len(), |r, c| u[(r, kept[c])]);
    let v = DMatrix::from_fn(vt.ncols(), kept.len(), |r, c| vt[(kept[c], r)]);
    let gains = lambda.iter().map(|&l| gain_from_lambda(l)).collect();
    Ok(SchmidtDecomposition { basis: ModeBasis::Dense { u, v }, lambda, gains })
}

fn decompose_separable(fx: &DMatrix<f64>, fy: &DMatrix<f64>, g0: f64, floor: f64) -> Result<SchmidtDecomposition> {
    let (ux, sx, vx) = sorted_real_svd(fx)?;
    let (uy, sy, vy) = sorted_real_svd(fy)?;
    let n = sx.len();
    let top = sx[0] * sy[0];
    let gain = DMatrix::from_fn(n, n, |j, l| if top > 0.0 { g0 * sx[j] * sy[l] / top } else { 0.0 });
    let lam_top = lambda_from_gain(g0);
    let keep = |g: f64| {
        let lam = lambda_from_gain(g);
        lam > 0.0 && lam >= floor * lam_top
    };
    let mut kept: Vec<(usize, usize)> =
        (0..n).flat_map(|j| (0..n).map(move |l| (j, l))).filter(|&k| keep(gain[k])).collect();
    kept.sort_by(|a, b| gain[*b].total_cmp(&gain[*a]).then(a.cmp(b)));
    let trimmed = gain.map(|g| if keep(g) { g } else { 0.0 });
    let gains: Vec<f64> = kept.iter().map(|&k| gain[k]).collect();
    let lambda = gains.iter().map(|&g| lambda_from_gain(g)).collect();
    Ok(SchmidtDecomposition { basis: ModeBasis::Separable { ux, uy, vx, vy, gain: trimmed, kept }, lambda, gains })
}

impl SchmidtDecomposition {
    /// Number of retained modes.
    pub fn num_modes(&self) -> usize {
        self.lambda.len()
    }

    /// Schmidt coefficients, descending.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// Per-mode gains `g_k`, descending.
    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn signal_pixels(&self) -> usize {
        match &self.basis {
            ModeBasis::Dense { u, .. } => u.nrows(),
            ModeBasis::Separable { ux, uy, .. } => ux.nrows() * uy.nrows(),
        }
    }

    pub fn idler_pixels(&self) -> usize {
        match &self.basis {
            ModeBasis::Dense { v, .. } => v.nrows(),
            ModeBasis::Separable { vx, vy, .. } => vx.nrows() * vy.nrows(),
        }
    }

    /// Pixels per axis for separable decompositions.
    pub fn grid(&self) -> Option<usize> {
        match &self.basis {
            ModeBasis::Dense { .. } => None,
            ModeBasis::Separable { ux, .. } => Some(ux.nrows()),
        }
    }

    /// Signal and idler pixel profiles of retained mode `k`.
    pub fn mode_profiles(&self, k: usize) -> (Vec<Complex64>, Vec<Complex64>) {
        match &self.basis {
            ModeBasis::Dense { u, v } => (u.column(k).iter().copied().collect(), v.column(k).iter().copied().collect()),
            ModeBasis::Separable { ux, uy, vx, vy, kept, .. } => {
                let (j, l) = kept[k];
                let n = ux.nrows();
                let prof = |a: &DMatrix<f64>, b: &DMatrix<f64>| {
                    (0..n * n).map(|p| Complex64::new(a[(p / n, j)] * b[(p % n, l)], 0.0)).collect()
                };
                (prof(ux, uy), prof(vx, vy))
            }
        }
    }

    /// `sum_k U_lk lambda_k V_mk` over the retained modes.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let (ns, ni) = (self.signal_pixels(), self.idler_pixels());
        let mut k = DMatrix::zeros(ns, ni);
        for m in 0..self.num_modes() {
            let (u, v) = self.mode_profiles(m);
            for a in 0..ns {
                let ul = u[a] * self.lambda[m];
                if ul == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for b in 0..ni {
                    k[(a, b)] += ul * v[b];
                }
            }
        }
        k
    }

    /// Largest deviation of the retained signal and idler profiles from
    /// orthonormality.
    pub fn orthonormality_error(&self) -> f64 {
        if let ModeBasis::Separable { ux, uy, vx, vy, .. } = &self.basis {
            // Kronecker products of orthogonal axis bases are orthogonal.
            return [ux, uy, vx, vy]
                .iter()
                .map(|b| (b.transpose() * *b - DMatrix::identity(b.ncols(), b.ncols())).amax())
                .fold(0.0, f64::max);
        }
        let k = self.num_modes();
        let profiles: Vec<_> = (0..k).map(|m| self.mode_profiles(m)).collect();
        let mut worst: f64 = 0.0;
        for a in 0..k {
            for b in a..k {
                let target = if a == b { 1.0 } else { 0.0 };
                let du: Complex64 = profiles[a].0.iter().zip(&profiles[b].0).map(|(x, y)| x.conj() * y).sum();
                let dv: Complex64 = profiles[a].1.iter().zip(&profiles[b].1).map(|(x, y)| x.conj() * y).sum();
                worst = worst.max((du - target).norm()).max((dv - target).norm());
            }
        }
        worst
    }

    /// Normal-ordered mean signal photons per pixel, `sum_k |U_lk|^2 sinh^2 g_k`.
    pub fn signal_photons_per_pixel(&self) -> Vec<f64> {
        match &self.basis {
            ModeBasis::Dense { u, .. } => (0..u.nrows())
                .map(|a| (0..self.num_modes()).map(|k| u[(a, k)].norm_sqr() * self.gains[k].sinh().powi(2)).sum())
                .collect(),
            ModeBasis::Separable { ux, uy, gain, .. } => separable_photons(ux, uy, gain),
        }
    }
}

/// `|ux|^2 sinh^2(g) (|uy|^2)^T`, flattened in pixel order `x * n + y`.
pub(crate) fn separable_photons(ux: &DMatrix<f64>, uy: &DMatrix<f64>, gain: &DMatrix<f64>) -> Vec<f64> {
    let ax = ux.map(|v| v * v);
    let ay = uy.map(|v| v * v);
    let s2 = gain.map(|g| g.sinh().powi(2));
    let img = &ax * s2 * ay.transpose();
    let n = ux.nrows();
    (0..n * n).map(|p| img[(p / n, p % n)]).collect()
}
