//! Small numerical helpers shared across modules.

use crate::error::{Error, Result};

/// Bisection for a sign change of `f` on `[lo, hi]`.
///
/// Stops when the bracket is narrower than `rel_tol·|mid| + abs_tol`, or
/// after 200 halvings.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, rel_tol: f64, abs_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoRoot(format!("no sign change on [{lo:e}, {hi:e}]")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * mid.abs() + abs_tol || mid == lo || mid == hi {
            return Ok(mid);
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Least-squares line fit; returns (slope, intercept, rms residual).
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let r = yi - (slope * xi + intercept);
            r * r
        })
        .sum();
    Some((slope, intercept, (rss / nf).sqrt()))
}

/// Composite Simpson rule over uniformly spaced samples (odd count).
pub fn simpson(samples: &[f64], h: f64) -> f64 {
    let n = samples.len();
    assert!(n >= 3 && n % 2 == 1, "simpson needs an odd number of samples >= 3");
    let mut acc = samples[0] + samples[n - 1];
    for (i, v) in samples.iter().enumerate().take(n - 1).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    acc * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-14, 0.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn bisect_without_sign_change() {
        assert!(bisect(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-10, 0.0).is_err());
    }

    #[test]
    fn fit_recovers_line() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let (m, b, r) = linear_fit(&x, &y).unwrap();
        assert!((m - 3.0).abs() < 1e-12 && (b + 1.0).abs() < 1e-12 && r < 1e-12);
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let h = 0.1;
        let s: Vec<f64> = (0..11).map(|i| (i as f64 * h).powi(3)).collect();
        assert!((simpson(&s, h) - 0.25).abs() < 1e-14);
    }
}
