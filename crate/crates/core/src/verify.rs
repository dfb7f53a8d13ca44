//! Numerical checks of the inequalities and constants the estimators rely
//! on. Each check reports the measured margin, not just a verdict.

use std::fmt;
use std::str::FromStr;

use crate::collision::{
    bound_acos, collision_mixture_mc, error_surface, find_t_star, g_prime_extrema, h_function,
    p_chi2_1, p_chi2_2,
};
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::similarity::{normalize, rho_alpha, rho_chi2};
use crate::stable::{sample_factorized, sample_stable, StableParams};
use crate::stats::{ks_critical_value, ks_two_sample};
use crate::vector::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lemma {
    /// `ρ_χ² ≥ ρ₁` for normalized nonnegative data.
    ChiSquareDominance,
    /// The maximum of the binary-data error surface and its location.
    ErrorMaximum,
    /// `P_χ²(2) ≤ P_χ²(1)` and the stationary points of their gap.
    ApproximationOrder,
    /// The mixture probability never exceeds `(1/π)·acos(ρ_α)`.
    Bound,
    /// `√T·X` has the same law as a symmetric stable variate.
    Factorization,
}

impl Lemma {
    pub const ALL: [Lemma; 5] = [
        Lemma::ChiSquareDominance,
        Lemma::ErrorMaximum,
        Lemma::ApproximationOrder,
        Lemma::Bound,
        Lemma::Factorization,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Lemma::ChiSquareDominance => "3",
            Lemma::ErrorMaximum => "4",
            Lemma::ApproximationOrder => "5",
            Lemma::Bound => "bound",
            Lemma::Factorization => "factorization",
        }
    }
}

impl FromStr for Lemma {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Lemma::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| Error::parameter(format!("unknown lemma {s:?}; expected 3, 4, 5, bound or factorization")))
    }
}

impl fmt::Display for Lemma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One measured quantity with its verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub lemma: Lemma,
    pub checks: Vec<Check>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "[{tag}] lemma {} {}: {}", self.lemma, c.name, c.detail)?;
        }
        Ok(())
    }
}

/// Sample sizes used by [`verify_lemma`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyBudget {
    pub pairs: usize,
    pub dim: usize,
    pub mc_samples: usize,
    pub ks_samples: usize,
    /// Points per axis of the error-surface grid over `[0, 10]²`.
    pub grid: usize,
}

impl Default for VerifyBudget {
    fn default() -> Self {
        Self {
            pairs: 10_000,
            dim: 100,
            mc_samples: 20_000,
            ks_samples: 100_000,
            grid: 101,
        }
    }
}

/// A random normalized nonnegative vector. Each entry is kept with
/// probability `1 − sparsity`; at least one entry is always positive.
pub fn random_histogram(dim: usize, sparsity: f64, rng: &mut SeededRng) -> SparseVector {
    loop {
        let entries: Vec<(usize, f64)> = (0..dim)
            .filter_map(|i| {
                let keep = rng.next_uniform() >= sparsity;
                // Cubing spreads the magnitudes over several decades.
                let x = rng.next_uniform().powi(3);
                keep.then_some((i, x))
            })
            .collect();
        let v = SparseVector::new(dim, entries).expect("valid entries");
        if !v.is_empty() {
            return normalize(&v).expect("nonzero nonnegative");
        }
    }
}

pub fn verify_lemma(lemma: Lemma, seed: u64, budget: &VerifyBudget) -> Result<LemmaReport> {
    let checks = match lemma {
        Lemma::ChiSquareDominance => chi_square_dominance(seed, budget)?,
        Lemma::ErrorMaximum => error_maximum(budget)?,
        Lemma::ApproximationOrder => approximation_order()?,
        Lemma::Bound => bound(seed, budget)?,
        Lemma::Factorization => factorization(seed, budget)?,
    };
    Ok(LemmaReport { lemma, checks })
}

fn chi_square_dominance(seed: u64, budget: &VerifyBudget) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (stream, sparsity) in [(0u64, 0.0), (1, 0.9)] {
        let mut rng = SeededRng::new(seed, stream);
        let mut violations = 0;
        let mut min_gap = f64::INFINITY;
        for _ in 0..budget.pairs {
            let u = random_histogram(budget.dim, sparsity, &mut rng);
            let v = random_histogram(budget.dim, sparsity, &mut rng);
            let gap = rho_chi2(&u, &v)? - rho_alpha(&u, &v, 1.0)?;
            // Identical supports of one entry give equality up to rounding.
            if gap < -1e-12 {
                violations += 1;
            }
            min_gap = min_gap.min(gap);
        }
        checks.push(Check::new(
            format!("rho_chi2 >= rho_1 (sparsity {sparsity})"),
            violations == 0,
            format!("{violations} violations in {} pairs, min gap {min_gap:.3e}", budget.pairs),
        ));
    }
    Ok(checks)
}

fn error_maximum(budget: &VerifyBudget) -> Result<Vec<Check>> {
    let t = find_t_star()?;
    let z = error_surface(t, t)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let step = 10.0 / (budget.grid.max(2) - 1) as f64;
    for i in 0..budget.grid {
        for j in i..budget.grid {
            let v = error_surface(i as f64 * step, j as f64 * step)?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    Ok(vec![
        Check::new(
            "t*",
            (t - 2.77935).abs() <= 1e-4,
            format!("t* = {t:.10}, h(t*) = {:.2e}", h_function(t)),
        ),
        Check::new(
            "Z(t*, t*)",
            (z - 0.01919).abs() <= 1e-4,
            format!("Z(t*) = {z:.6}, |Z - 0.01919| = {:.2e}", (z - 0.01919).abs()),
        ),
        Check::new(
            "0 <= Z <= 0.0192 on grid",
            lo >= -1e-9 && hi <= 0.0192 + 1e-6,
            format!("min {lo:.3e}, max {hi:.6}, margin to 0.0192 {:.3e}", 0.0192 - hi),
        ),
    ])
}

fn approximation_order() -> Result<Vec<Check>> {
    let mut violations = 0;
    let mut min_gap = f64::INFINITY;
    let mut max_gap = f64::NEG_INFINITY;
    for i in 0..=1000 {
        let rho = i as f64 / 1000.0;
        let gap = p_chi2_1(rho)? - p_chi2_2(rho)?;
        if gap < -1e-10 {
            violations += 1;
        }
        min_gap = min_gap.min(gap);
        max_gap = max_gap.max(gap);
    }
    let e = g_prime_extrema()?;
    let expected = [0.30555, 0.38291, 0.95094];
    let worst = e
        .roots
        .iter()
        .zip(expected)
        .map(|(r, x)| (r - x).abs())
        .fold(0.0, f64::max);
    Ok(vec![
        Check::new(
            "P_chi2(2) <= P_chi2(1)",
            violations == 0,
            format!("{violations} violations on 1001 points, gap in [{min_gap:.3e}, {max_gap:.6}]"),
        ),
        Check::new(
            "stationary points of g",
            worst <= 1e-4 && e.values.iter().all(|&g| g > 0.0),
            format!(
                "roots ({:.6}, {:.6}, {:.6}), g = ({:.6}, {:.6}, {:.6}), max deviation {worst:.2e}",
                e.roots[0], e.roots[1], e.roots[2], e.values[0], e.values[1], e.values[2]
            ),
        ),
    ])
}

fn bound(seed: u64, budget: &VerifyBudget) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let pairs = 10;
    for (ai, alpha) in [0.5, 1.0, 1.5, 1.8].into_iter().enumerate() {
        let mut rng = SeededRng::new(seed, 100 + ai as u64);
        let mut worst = f64::NEG_INFINITY;
        for p in 0..pairs {
            let u = random_histogram(20, 0.3, &mut rng);
            let v = random_histogram(20, 0.3, &mut rng);
            let mc_rng = SeededRng::new(seed, 200 + (ai * pairs + p) as u64);
            let est = collision_mixture_mc(&u, &v, alpha, budget.mc_samples, &mc_rng)?;
            let b = bound_acos(rho_alpha(&u, &v, alpha)?)?;
            worst = worst.max((est.mean - b) / est.std_err.max(f64::MIN_POSITIVE));
        }
        checks.push(Check::new(
            format!("P <= acos(rho_alpha)/pi at alpha {alpha}"),
            worst <= 3.0,
            format!("largest excess over the bound {worst:.2} standard errors ({pairs} pairs)"),
        ));
    }
    Ok(checks)
}

fn factorization(seed: u64, budget: &VerifyBudget) -> Result<Vec<Check>> {
    let n = budget.ks_samples;
    let crit = ks_critical_value(n, n, 0.001);
    [0.5, 1.0, 1.5]
        .into_iter()
        .enumerate()
        .map(|(ai, alpha)| {
            let direct = sample_stable(StableParams::standard_symmetric(alpha)?, &SeededRng::new(seed, 300 + ai as u64), n)?;
            let mixed = sample_factorized(alpha, &SeededRng::new(seed, 400 + ai as u64), n)?;
            let d = ks_two_sample(&direct, &mixed);
            Ok(Check::new(
                format!("KS at alpha {alpha}"),
                d <= crit,
                format!("D = {d:.5}, critical {crit:.5} at the 0.1% level"),
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for l in Lemma::ALL {
            assert_eq!(l.name().parse::<Lemma>().unwrap(), l);
        }
        assert!("6".parse::<Lemma>().is_err());
    }

    #[test]
    fn histograms_are_normalized() {
        let mut rng = SeededRng::new(4, 0);
        for s in [0.0, 0.9, 0.999] {
            let h = random_histogram(50, s, &mut rng);
            assert!((h.sum() - 1.0).abs() < 1e-12);
            assert!(!h.is_empty());
        }
    }

    #[test]
    fn cheap_lemmas_pass() {
        let budget = VerifyBudget {
            pairs: 200,
            dim: 30,
            mc_samples: 2000,
            ks_samples: 5000,
            grid: 11,
        };
        for l in Lemma::ALL {
            let r = verify_lemma(l, 7, &budget).unwrap();
            assert!(r.passed(), "{r}");
        }
    }
}
