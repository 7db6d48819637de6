//! Least-squares fit of a Gaussian dip on a flat baseline.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

/// `baseline * (1 - visibility * exp(-x^2 / (2 sigma^2)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DipFit {
    pub baseline: f64,
    pub visibility: f64,
    pub sigma: f64,
    pub rms_residual: f64,
}

impl DipFit {
    pub fn eval(&self, x: f64) -> f64 {
        model(&[self.baseline, self.visibility, self.sigma], x)
    }
}

fn model(p: &[f64; 3], x: f64) -> f64 {
    p[0] * (1.0 - p[1] * (-x * x / (2.0 * p[2] * p[2])).exp())
}

fn jacobian(p: &[f64; 3], x: f64) -> Vector3<f64> {
    let e = (-x * x / (2.0 * p[2] * p[2])).exp();
    Vector3::new(1.0 - p[1] * e, -p[0] * e, -p[0] * p[1] * e * x * x / p[2].powi(3))
}

fn sse(p: &[f64; 3], xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter().zip(ys).map(|(&x, &y)| (y - model(p, x)).powi(2)).sum()
}

fn initial_guess(xs: &[f64], ys: &[f64]) -> [f64; 3] {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].abs().total_cmp(&xs[b].abs()));
    let wing = &idx[idx.len() - (idx.len() / 4).max(1)..];
    let base = wing.iter().map(|&i| ys[i]).sum::<f64>() / wing.len() as f64;
    let floor = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let vis = (1.0 - floor / base).clamp(0.05, 1.5);
    let half = base * (1.0 - vis / 2.0);
    let xmax = xs.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let cross = idx.iter().find(|&&i| ys[i] >= half).map(|&i| xs[i].abs());
    let sigma = match cross {
        Some(x) if x > 0.0 => x / (2.0 * std::f64::consts::LN_2).sqrt(),
        _ => xmax / 4.0,
    };
    [base, vis, sigma.max(xmax * 1e-3)]
}

/// Levenberg-Marquardt fit. Returns `None` when the data do not determine a
/// dip: too few finite points, no convergence, or a width outside the sweep.
pub fn fit_gaussian_dip(xs: &[f64], ys: &[f64]) -> Option<DipFit> {
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        xs.iter().zip(ys).filter(|(x, y)| x.is_finite() && y.is_finite()).map(|(x, y)| (*x, *y)).unzip();
    if xs.len() < 4 {
        return None;
    }
    let xmax = xs.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if xmax <= 0.0 {
        return None;
    }
    let mut p = initial_guess(&xs, &ys);
    let mut cost = sse(&p, &xs, &ys);
    let mut mu = 1e-3;
    let mut converged = false;
    for _ in 0..500 {
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for (&x, &y) in xs.iter().zip(&ys) {
            let j = jacobian(&p, x);
            jtj += j * j.transpose();
            jtr += j * (y - model(&p, x));
        }
        let damped = jtj + Matrix3::from_diagonal(&jtj.diagonal()) * mu;
        let Some(step) = damped.lu().solve(&jtr) else {
            mu *= 10.0;
            continue;
        };
        let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2]];
        let trial_cost = sse(&trial, &xs, &ys);
        if trial_cost.is_finite() && trial_cost <= cost {
            let rel = (cost - trial_cost) / cost.max(f64::MIN_POSITIVE);
            p = trial;
            cost = trial_cost;
            mu = (mu / 3.0).max(1e-12);
            if rel < 1e-12 || step.norm() < 1e-12 * (1.0 + p[2].abs()) {
                converged = true;
                break;
            }
        } else {
            mu *= 4.0;
            if mu > 1e12 {
                converged = true;
                break;
            }
        }
    }
    let sigma = p[2].abs();
    let ok = converged && p.iter().all(|v| v.is_finite()) && p[1] > 1e-3 && sigma > 0.0 && sigma < 5.0 * xmax;
    ok.then(|| DipFit { baseline: p[0], visibility: p[1], sigma, rms_residual: (cost / xs.len() as f64).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_noise_free_parameters() {
        let truth = DipFit { baseline: 1.3, visibility: 0.9, sigma: 0.2, rms_residual: 0.0 };
        let xs: Vec<f64> = (-12..=12).map(|k| k as f64 * 0.05).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| truth.eval(x)).collect();
        let fit = fit_gaussian_dip(&xs, &ys).unwrap();
        assert!((fit.sigma - 0.2).abs() < 1e-6);
        assert!((fit.visibility - 0.9).abs() < 1e-6);
        assert!((fit.baseline - 1.3).abs() < 1e-6);
    }

    #[test]
    fn flat_data_has_no_dip() {
        let xs: Vec<f64> = (-5..=5).map(|k| k as f64).collect();
        let ys = vec![1.0; xs.len()];
        assert!(fit_gaussian_dip(&xs, &ys).is_none());
        assert!(fit_gaussian_dip(&xs[..3], &ys[..3]).is_none());
    }
}
