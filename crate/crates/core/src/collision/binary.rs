//! Exact collision probability for binary data under Cauchy projections and
//! its gap to the second χ² approximation.
//!
//! For normalized binary vectors with support profile `(a, b, c)`,
//! `P = 1/2 − (2/π²)·E[atan((c/a)|R|)·atan((c/b)|R|)]` with `R` standard
//! Cauchy. Substituting `|R| = tan θ` turns the expectation into
//! `(2/π)∫₀^{π/2} … dθ` over a bounded integrand.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::quadrature::{adaptive_simpson, QuadratureSpec};
use crate::rng::SeededRng;
use crate::similarity::BinaryProfile;
use crate::stats::{Moments, MonteCarloEstimate};

use super::{arctan_integral, ratio_angle, MC_CHUNK};

/// `P` for support weights `(a, b, c)`; only the ratios matter.
fn binary_probability(a: f64, b: f64, c: f64, spec: &QuadratureSpec) -> Result<f64> {
    let f = |t: f64| ratio_angle(c, a, t) * ratio_angle(c, b, t);
    let integral = adaptive_simpson(f, 0.0, FRAC_PI_2, spec)?.value;
    Ok(0.5 - 4.0 / (PI * PI * PI) * integral)
}

/// Exact collision probability by quadrature.
pub fn exact_binary(profile: BinaryProfile) -> Result<f64> {
    exact_binary_with(profile, &QuadratureSpec::default())
}

pub fn exact_binary_with(profile: BinaryProfile, spec: &QuadratureSpec) -> Result<f64> {
    profile.check()?;
    binary_probability(profile.a as f64, profile.b as f64, profile.c as f64, spec)
}

/// The same probability by Monte Carlo over `|R| = tan(πU/2)`.
pub fn exact_binary_mc(
    profile: BinaryProfile,
    n: usize,
    rng: &SeededRng,
) -> Result<MonteCarloEstimate> {
    profile.check()?;
    if n == 0 {
        return Err(Error::parameter("need at least one Monte Carlo sample"));
    }
    let (a, b, c) = (profile.a as f64, profile.b as f64, profile.c as f64);
    let chunks = n.div_ceil(MC_CHUNK);
    let parts = map_indexed(chunks, Execution::default(), |i| {
        let mut m = Moments::default();
        for s in i * MC_CHUNK..n.min((i + 1) * MC_CHUNK) {
            let r = (FRAC_PI_2 * rng.uniform_at(s as u64)).tan();
            let x = (c * r).atan2(a) * (c * r).atan2(b);
            m.push(0.5 - 2.0 / (PI * PI) * x);
        }
        m
    });
    Ok(parts
        .into_iter()
        .fold(Moments::default(), Moments::merge)
        .estimate())
}

/// `Z(t₁, t₂)`: exact probability minus the second χ² approximation, with
/// `t₁ = a/c` and `t₂ = b/c`.
pub fn error_surface(t1: f64, t2: f64) -> Result<f64> {
    error_surface_with(t1, t2, &QuadratureSpec::default())
}

pub fn error_surface_with(t1: f64, t2: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(t1 >= 0.0 && t2 >= 0.0 && t1.is_finite() && t2.is_finite()) {
        return Err(Error::parameter(format!(
            "error surface needs finite nonnegative ratios, got ({t1}, {t2})"
        )));
    }
    let exact = binary_probability(t1, t2, 1.0, spec)?;
    // ρ_χ² = 2/(t₁ + t₂ + 2), so ρ/(2 − 2ρ) = 1/(t₁ + t₂).
    let approx = 0.5 - 2.0 / (PI * PI) * arctan_integral(1.0, t1 + t2, spec)?;
    Ok(exact - approx)
}

/// `ln(x)/(x − 1)`, continuous through `x = 1`.
fn log_ratio(x: f64) -> f64 {
    let d = x - 1.0;
    if d.abs() < 1e-6 {
        1.0 - d / 2.0 + d * d / 3.0
    } else {
        x.ln() / d
    }
}

/// `h(t) = log(2t/(1+t))/(t² − 1) − log(2t)/((2t)² − 1)`, whose root is the
/// maximizer of `Z` along the diagonal. Finite at `t = 1` and `t = 1/2`.
pub fn h_function(t: f64) -> f64 {
    log_ratio(2.0 * t / (1.0 + t)) / ((1.0 + t) * (1.0 + t)) - log_ratio(2.0 * t) / (2.0 * t + 1.0)
}

/// Root of [`h_function`] on `[1.5, 5]` by bisection.
pub fn find_t_star() -> Result<f64> {
    let (mut lo, mut hi) = (1.5, 5.0);
    if !(h_function(lo) > 0.0 && h_function(hi) < 0.0) {
        return Err(Error::numeric("h does not change sign on [1.5, 5]"));
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if h_function(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
