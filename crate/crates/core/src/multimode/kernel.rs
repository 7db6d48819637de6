//! Joint signal-idler amplitude on a pixel grid.
//!
//! The transverse coupling along one axis is a product of two Gaussians: a
//! narrow one in the sum coordinate (set by the pump's angular spectrum, which
//! enforces near-opposite emission) and a broad one in the difference
//! coordinate (set by phase matching, which narrows with crystal length).
//! The two axes are independent, so the full coupling is a Kronecker product.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

/// Largest grid that [`JointAmplitudeKernel::to_dense`] will materialize.
pub const MAX_DENSE_PIXELS: usize = 1024;

/// Centered coordinate of pixel `i` on an `n`-pixel axis.
pub fn axis_coordinate(i: usize, n: usize) -> f64 {
    i as f64 - (n / 2) as f64
}

/// Pixel mirrored through the grid center, `q -> -q`. On even grids the
/// outermost pixel has no partner and maps to itself.
pub fn mirror_index(i: usize, n: usize) -> usize {
    if n.is_multiple_of(2) {
        (n - i) % n
    } else {
        n - 1 - i
    }
}

/// One-axis coupling `exp(-(qi+qj)^2/2a^2 - (qi-qj)^2/2b^2)`.
pub fn coupling_matrix(n: usize, pump_width: f64, pm_width: f64) -> Result<DMatrix<f64>> {
    if n < 2 {
        return Err(invalid(format!("grid must have at least 2 pixels per axis, got {n}")));
    }
    for (name, w) in [("pump width", pump_width), ("phase-matching width", pm_width)] {
        if !(w.is_finite() && w > 0.0) {
            return Err(invalid(format!("{name} must be positive, got {w}")));
        }
    }
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let (qi, qj) = (axis_coordinate(i, n), axis_coordinate(j, n));
        let s = qi + qj;
        let d = qi - qj;
        (-s * s / (2.0 * pump_width * pump_width) - d * d / (2.0 * pm_width * pm_width)).exp()
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum KernelRepr {
    Dense(DMatrix<Complex64>),
    Separable { fx: DMatrix<f64>, fy: DMatrix<f64>, g0: f64 },
}

/// `<Es_l Ei_m>` for signal pixel `l` and idler pixel `m`.
///
/// The separable form stores the two axis couplings and a peak gain `g0`;
/// its kernel is `sinh(2 g0 F)/2` taken in the singular-value sense, where `F`
/// is the Kronecker coupling scaled to unit top singular value.
#[derive(Debug, Clone, PartialEq)]
pub struct JointAmplitudeKernel {
    pub(crate) repr: KernelRepr,
}

impl JointAmplitudeKernel {
    pub fn dense(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.is_empty() {
            return Err(invalid("kernel is empty"));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Numeric("kernel has non-finite entries".into()));
        }
        Ok(Self { repr: KernelRepr::Dense(matrix) })
    }

    pub fn separable(fx: DMatrix<f64>, fy: DMatrix<f64>, g0: f64) -> Result<Self> {
        if !fx.is_square() || !fy.is_square() || fx.nrows() != fy.nrows() {
            return Err(invalid("axis couplings must be square and of equal size"));
        }
        if !(g0.is_finite() && g0 >= 0.0) {
            return Err(invalid(format!("peak gain must be finite and non-negative, got {g0}")));
        }
        if fx.iter().chain(fy.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numeric("coupling has non-finite entries".into()));
        }
        Ok(Self { repr: KernelRepr::Separable { fx, fy, g0 } })
    }

    pub fn signal_pixels(&self) -> usize {
        match &self.repr {
            KernelRepr::Dense(m) => m.nrows(),
            KernelRepr::Separable { fx, fy, .. } => fx.nrows() * fy.nrows(),
        }
    }

    pub fn idler_pixels(&self) -> usize {
        match &self.repr {
            KernelRepr::Dense(m) => m.ncols(),
            KernelRepr::Separable { fx, fy, .. } => fx.ncols() * fy.ncols(),
        }
    }

    /// Pixels per axis for separable kernels.
    pub fn grid(&self) -> Option<usize> {
        match &self.repr {
            KernelRepr::Dense(_) => None,
            KernelRepr::Separable { fx, .. } => Some(fx.nrows()),
        }
    }

    pub fn peak_gain(&self) -> Option<f64> {
        match &self.repr {
            KernelRepr::Dense(_) => None,
            KernelRepr::Separable { g0, .. } => Some(*g0),
        }
    }

    /// Full matrix. Separable kernels are expanded with the odd power series
    /// of `sinh`, independent of any singular value decomposition.
    pub fn to_dense(&self) -> Result<DMatrix<Complex64>> {
        match &self.repr {
            KernelRepr::Dense(m) => Ok(m.clone()),
            KernelRepr::Separable { fx, fy, g0 } => {
                let p = fx.nrows() * fy.nrows();
                if p > MAX_DENSE_PIXELS {
                    return Err(invalid(format!("{p} pixels exceed the dense limit of {MAX_DENSE_PIXELS}")));
                }
                let f = fx.kronecker(fy);
                let top = f.singular_values().max();
                if top <= 0.0 {
                    return Ok(DMatrix::zeros(p, p));
                }
                let f = f / top;
                let fft = &f * f.transpose();
                // sinh(2 g0 s)/2 = sum_n (2 g0)^(2n+1) s^(2n+1) / (2 (2n+1)!)
                let x = 2.0 * g0;
                let mut power = f.clone();
                let mut coef = x / 2.0;
                let mut acc = &power * coef;
                for n in 1..400 {
                    power = &fft * &power;
                    coef *= x * x / ((2 * n) as f64 * (2 * n + 1) as f64);
                    let term = &power * coef;
                    let small = term.amax() <= 1e-17 * acc.amax();
                    acc += term;
                    if small {
                        return Ok(acc.map(|v| Complex64::new(v, 0.0)));
                    }
                }
                Err(Error::Numeric("kernel power series did not converge".into()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirror_negates_the_coordinate() {
        for n in [4, 5, 64] {
            for i in 0..n {
                let j = mirror_index(i, n);
                assert_eq!(mirror_index(j, n), i);
                if n % 2 == 1 || i != 0 {
                    assert_eq!(axis_coordinate(i, n), -axis_coordinate(j, n));
                }
            }
        }
    }

    #[test]
    fn coupling_peaks_on_the_anti_diagonal() {
        let f = coupling_matrix(16, 1.5, 6.0).unwrap();
        assert_eq!(f, f.transpose());
        // Near the center the narrow sum-coordinate factor dominates.
        for i in 6..=10 {
            let j = mirror_index(i, 16);
            let row_max = (0..16).map(|k| f[(i, k)]).fold(0.0, f64::max);
            assert_eq!(f[(i, j)], row_max);
        }
        assert!(coupling_matrix(1, 1.0, 1.0).is_err());
        assert!(coupling_matrix(8, 0.0, 1.0).is_err());
    }

    #[test]
    fn dense_validation() {
        assert!(JointAmplitudeKernel::dense(DMatrix::zeros(0, 0)).is_err());
        let bad = DMatrix::from_element(2, 2, Complex64::new(f64::NAN, 0.0));
        assert!(JointAmplitudeKernel::dense(bad).is_err());
    }

    #[test]
    fn power_series_rejects_large_grids() {
        let f = coupling_matrix(40, 2.0, 8.0).unwrap();
        let k = JointAmplitudeKernel::separable(f.clone(), f, 1.0).unwrap();
        assert!(k.to_dense().is_err());
    }
}
