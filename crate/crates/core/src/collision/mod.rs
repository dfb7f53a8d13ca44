//! Collision probability of sign stable projections.
//!
//! `P = Pr(sign(x) ≠ sign(y))` for the projections of two nonnegative
//! vectors: the acos bound, the χ² approximations used for Cauchy
//! projections, the exact binary-data probability and its error surface,
//! and the inversion from an observed collision rate back to a χ² estimate.

mod binary;
mod kernel;
mod ordering;

pub use binary::{
    error_surface, error_surface_with, exact_binary, exact_binary_mc, exact_binary_with,
    find_t_star, h_function,
};
pub use kernel::{format_sig17, kernel_matrix, write_precomputed, KernelKind, KernelMatrix};
pub use ordering::{g_function, g_prime, g_prime_extrema, GPrimeExtrema};

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::quadrature::{adaptive_simpson, QuadratureSpec};
use crate::rng::SeededRng;
use crate::similarity::rho_2;
use crate::stable::mixing_sampler;
use crate::stats::{Moments, MonteCarloEstimate};
use crate::vector::{union_entries, SparseVector};

fn check_unit(rho: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} must lie in [0, 1], got {rho}")))
    }
}

/// `(1/π)·acos(ρ)`; an upper bound on `P` when `ρ = ρ_α`, exact at α = 2.
pub fn bound_acos(rho: f64) -> Result<f64> {
    check_unit(rho, "similarity")?;
    Ok(rho.acos() / PI)
}

/// First χ² approximation, `(1/π)·acos(ρ_χ²)`.
pub fn p_chi2_1(rho_chi2: f64) -> Result<f64> {
    check_unit(rho_chi2, "chi-square similarity")?;
    Ok(rho_chi2.acos() / PI)
}

/// `atan(tan(θ)·num/den)` written so that `den = 0` yields the limit π/2 on
/// the whole open interval, and `θ = π/2` needs no tangent.
#[inline]
pub(crate) fn ratio_angle(num: f64, den: f64, theta: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        FRAC_PI_2
    } else {
        (num * theta.sin()).atan2(den * theta.cos())
    }
}

/// `∫₀^{π/2} atan((num/den)·tan t) dt`.
pub(crate) fn arctan_integral(num: f64, den: f64, spec: &QuadratureSpec) -> Result<f64> {
    Ok(adaptive_simpson(|t| ratio_angle(num, den, t), 0.0, FRAC_PI_2, spec)?.value)
}

/// Second χ² approximation,
/// `1/2 − (2/π²)·∫₀^{π/2} atan(ρ/(2−2ρ)·tan t) dt`.
pub fn p_chi2_2(rho_chi2: f64) -> Result<f64> {
    p_chi2_2_with(rho_chi2, &QuadratureSpec::default())
}

pub fn p_chi2_2_with(rho_chi2: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_unit(rho_chi2, "chi-square similarity")?;
    if rho_chi2 == 1.0 {
        return Ok(0.0);
    }
    let integral = arctan_integral(rho_chi2, 2.0 - 2.0 * rho_chi2, spec)?;
    Ok(0.5 - 2.0 / (PI * PI) * integral)
}

/// Invert `P = (1/π)·acos(ρ_χ²)`: `cos(π·min(p̂, 1/2))`, clamped to [0, 1].
pub fn estimate_rho_chi2(p_hat: f64) -> f64 {
    (PI * p_hat.clamp(0.0, 0.5)).cos().clamp(0.0, 1.0)
}

/// Samples per work unit of the Monte Carlo loops.
pub(crate) const MC_CHUNK: usize = 4096;

/// Monte Carlo evaluation of the exact collision probability through the
/// normal scale-mixture representation
/// `E[(1/π)·acos(∑uᵢvᵢTᵢ / √(∑uᵢ²Tᵢ ∑vᵢ²Tᵢ))]`, `Tᵢ ∼ S(α/2, 1, cos(πα/4))`.
///
/// At α = 2 the probability is `(1/π)·acos(ρ₂)` exactly and that value is
/// returned with zero standard error.
pub fn collision_mixture_mc(
    u: &SparseVector,
    v: &SparseVector,
    alpha: f64,
    n_mc: usize,
    rng: &SeededRng,
) -> Result<MonteCarloEstimate> {
    collision_mixture_mc_with(u, v, alpha, n_mc, rng, Execution::default())
}

pub fn collision_mixture_mc_with(
    u: &SparseVector,
    v: &SparseVector,
    alpha: f64,
    n_mc: usize,
    rng: &SeededRng,
    exec: Execution,
) -> Result<MonteCarloEstimate> {
    if !u.is_nonnegative() || !v.is_nonnegative() {
        return Err(Error::domain("mixture representation needs nonnegative data"));
    }
    if u.is_empty() || v.is_empty() {
        return Err(Error::domain("mixture representation needs nonzero vectors"));
    }
    if alpha == 2.0 {
        return Ok(MonteCarloEstimate::exact(bound_acos(rho_2(u, v)?.max(0.0))?));
    }
    if n_mc == 0 {
        return Err(Error::parameter("need at least one Monte Carlo sample"));
    }
    let sampler = mixing_sampler(alpha)?;
    let support: Vec<(f64, f64)> = union_entries(u, v).map(|(_, a, b)| (a, b)).collect();
    let width = support.len() as u64;

    let chunks = n_mc.div_ceil(MC_CHUNK);
    let parts = map_indexed(chunks, exec, |c| {
        let mut m = Moments::default();
        let mut ts = vec![0.0f64; support.len()];
        for s in c * MC_CHUNK..n_mc.min((c + 1) * MC_CHUNK) {
            sampler.fill(rng, s as u64 * width, &mut ts);
            // The ratio is scale free; dividing by the largest draw keeps the
            // sums finite when α/2 is small and T has enormous outliers.
            let top = ts.iter().copied().fold(0.0, f64::max);
            let (mut cross, mut su, mut sv) = (0.0, 0.0, 0.0);
            for (&(a, b), &t) in support.iter().zip(&ts) {
                let t = t / top;
                cross += a * b * t;
                su += a * a * t;
                sv += b * b * t;
            }
            let cos = if cross == 0.0 {
                0.0
            } else {
                (cross / (su.sqrt() * sv.sqrt())).clamp(0.0, 1.0)
            };
            m.push(cos.acos() / PI);
        }
        m
    });
    Ok(parts
        .into_iter()
        .fold(Moments::default(), Moments::merge)
        .estimate())
}
