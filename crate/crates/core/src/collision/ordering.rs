//! The gap `g(z) = P_χ²(1)(z) − P_χ²(2)(z)` between the two approximations
//! and the stationary points of `g` on `(0, 1)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::{p_chi2_1, p_chi2_2};

/// `g(z)`; zero at both ends of `[0, 1]`.
pub fn g_function(z: f64) -> Result<f64> {
    Ok(p_chi2_1(z)? - p_chi2_2(z)?)
}

/// Closed form of `g′(z)` on `(0, 1)`:
/// `−(1/π)(1−z²)^{−1/2} + (2/π²)·log(q)/(z² − 4(1−z)²)`, `q = z²/(4(1−z)²)`.
pub fn g_prime(z: f64) -> f64 {
    let w = 1.0 - z;
    let q = z * z / (4.0 * w * w);
    // z² − 4(1−z)² = 4(1−z)²(q − 1), so the log term is a log ratio in q.
    let d = q - 1.0;
    let lr = if d.abs() < 1e-6 {
        1.0 - d / 2.0 + d * d / 3.0
    } else {
        q.ln() / d
    };
    -1.0 / (PI * (1.0 - z * z).sqrt()) + lr / (2.0 * PI * PI * w * w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GPrimeExtrema {
    /// Stationary points of `g` in increasing order.
    pub roots: [f64; 3],
    /// `g` at each stationary point.
    pub values: [f64; 3],
}

const SCAN_POINTS: usize = 20_000;

/// Locate the three roots of `g′` on `(0, 1)` and evaluate `g` there.
pub fn g_prime_extrema() -> Result<GPrimeExtrema> {
    let mut roots = Vec::new();
    let z_at = |i: usize| i as f64 / SCAN_POINTS as f64;
    let mut prev = g_prime(z_at(1));
    for i in 2..SCAN_POINTS {
        let cur = g_prime(z_at(i));
        if prev.signum() != cur.signum() {
            let (mut lo, mut hi) = (z_at(i - 1), z_at(i));
            let lo_sign = prev.signum();
            while hi - lo > 1e-13 {
                let mid = 0.5 * (lo + hi);
                if g_prime(mid).signum() == lo_sign {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev = cur;
    }
    let roots: [f64; 3] = roots
        .try_into()
        .map_err(|r: Vec<f64>| Error::numeric(format!("expected 3 roots of g', found {}", r.len())))?;
    let mut values = [0.0; 3];
    for (v, &z) in values.iter_mut().zip(&roots) {
        *v = g_function(z)?;
        if *v <= 0.0 {
            return Err(Error::numeric(format!("g({z}) = {v} is not positive")));
        }
    }
    Ok(GPrimeExtrema { roots, values })
}
