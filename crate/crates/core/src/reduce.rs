//! Order-stable parallel reductions.
//!
//! Work is split into fixed-size chunks whose partial sums are combined
//! sequentially in chunk order, so the floating-point result does not depend
//! on how many worker threads rayon happens to use.

use rayon::prelude::*;

pub(crate) const CHUNK: usize = 1 << 14;

/// Sums `term(i)` for `i in 0..n`, componentwise.
pub(crate) fn sum<const K: usize, F>(n: usize, term: F) -> [f64; K]
where
    F: Fn(usize) -> [f64; K] + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let partials: Vec<[f64; K]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = [0.0; K];
            for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                let t = term(i);
                for k in 0..K {
                    acc[k] += t[k];
                }
            }
            acc
        })
        .collect();
    let mut total = [0.0; K];
    for p in &partials {
        for k in 0..K {
            total[k] += p[k];
        }
    }
    total
}

/// Mean and standard error of the mean of a per-sample quantity.
pub(crate) fn mean_se<F>(n: usize, x: F) -> (f64, f64)
where
    F: Fn(usize) -> f64 + Sync,
{
    let [s] = sum(n, |i| [x(i)]);
    let m = s / n as f64;
    let [ss] = sum(n, |i| {
        let d = x(i) - m;
        [d * d]
    });
    let var = if n > 1 { ss / (n - 1) as f64 } else { f64::NAN };
    (m, (var / n as f64).sqrt())
}

/// Delete-one jackknife of a statistic built from per-sample sums.
///
/// `stat(totals, count)` evaluates the statistic from componentwise sums over
/// `count` samples. Leave-one-out values are obtained by subtracting each
/// sample's contribution from the totals, which keeps the cost linear.
pub(crate) fn jackknife<const K: usize, F, S>(n: usize, term: F, stat: S) -> (f64, f64)
where
    F: Fn(usize) -> [f64; K] + Sync,
    S: Fn(&[f64; K], f64) -> f64 + Sync,
{
    let totals = sum(n, &term);
    let full = stat(&totals, n as f64);
    if n < 3 {
        return (full, f64::NAN);
    }
    let m = (n - 1) as f64;
    let [d1, d2] = sum(n, |i| {
        let t = term(i);
        let mut loo = totals;
        for k in 0..K {
            loo[k] -= t[k];
        }
        let d = stat(&loo, m) - full;
        [d, d * d]
    });
    let nf = n as f64;
    let var = (nf - 1.0) / nf * (d2 - d1 * d1 / nf);
    (full, var.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_matches_sequential() {
        let n = 3 * CHUNK + 17;
        let [a, b] = sum(n, |i| [i as f64, 1.0]);
        assert_eq!(b, n as f64);
        assert_eq!(a, (n * (n - 1) / 2) as f64);
    }

    #[test]
    fn jackknife_of_mean_is_standard_error() {
        let xs: Vec<f64> = (0..500).map(|i| ((i * 37) % 101) as f64).collect();
        let (m, se) = jackknife(xs.len(), |i| [xs[i]], |t, c| t[0] / c);
        let (m2, se2) = mean_se(xs.len(), |i| xs[i]);
        assert!((m - m2).abs() < 1e-12);
        assert!((se - se2).abs() < 1e-9 * se2);
    }
}
