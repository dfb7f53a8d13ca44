//! Exact similarities and distances between vector pairs.

use crate::error::{Error, Result};
use crate::vector::{union_entries, SparseVector};

/// Allowed deviation of a histogram's total mass from 1.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Support counts of two nonnegative vectors: `a` coordinates positive only
/// in `u`, `b` only in `v`, `c` in both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BinaryProfile {
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

impl BinaryProfile {
    pub fn new(a: u64, b: u64, c: u64) -> Self {
        Self { a, b, c }
    }

    /// The χ² similarity of the normalized binary vectors with this profile,
    /// `2c / (a + b + 2c)`.
    pub fn rho_chi2(&self) -> Result<f64> {
        self.check()?;
        let (a, b, c) = (self.a as f64, self.b as f64, self.c as f64);
        Ok(2.0 * c / (a + b + 2.0 * c))
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.a + self.c == 0 || self.b + self.c == 0 {
            return Err(Error::domain(format!(
                "profile ({}, {}, {}) describes an empty vector",
                self.a, self.b, self.c
            )));
        }
        Ok(())
    }
}

fn check_nonnegative(u: &SparseVector, name: &str) -> Result<()> {
    if u.is_nonnegative() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} has a negative entry")))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 2.0 {
        Ok(())
    } else {
        Err(Error::parameter(format!("alpha must lie in (0, 2], got {alpha}")))
    }
}

/// Verify a vector is a nonnegative histogram summing to 1.
pub fn check_normalized(u: &SparseVector) -> Result<()> {
    check_nonnegative(u, "vector")?;
    let s = u.sum();
    if (s - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::domain(format!("vector sums to {s}, expected 1")));
    }
    Ok(())
}

/// Scale a nonnegative vector to unit sum.
pub fn normalize(u: &SparseVector) -> Result<SparseVector> {
    check_nonnegative(u, "vector")?;
    let s = u.sum();
    if s <= 0.0 {
        return Err(Error::domain("cannot normalize an all-zero vector"));
    }
    let values = u.values().iter().map(|&x| x / s).collect();
    Ok(SparseVector::from_parts_unchecked(
        u.dim(),
        u.indices().to_vec(),
        values,
    ))
}

/// Correlation `∑uᵢvᵢ / √(∑uᵢ² ∑vᵢ²)`.
pub fn rho_2(u: &SparseVector, v: &SparseVector) -> Result<f64> {
    let nu: f64 = u.values().iter().map(|x| x * x).sum();
    let nv: f64 = v.values().iter().map(|x| x * x).sum();
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::domain("correlation of a zero-norm vector"));
    }
    let dot: f64 = union_entries(u, v).map(|(_, a, b)| a * b).sum();
    // √(nu·nv) rather than √nu·√nv so that u = v gives exactly 1.
    let norm = match (nu * nv).sqrt() {
        n if n.is_finite() && n > 0.0 => n,
        _ => nu.sqrt() * nv.sqrt(),
    };
    Ok((dot / norm).clamp(-1.0, 1.0))
}

/// The l_α distance `∑|uᵢ − vᵢ|^α`.
pub fn d_alpha(u: &SparseVector, v: &SparseVector, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(union_entries(u, v).map(|(_, a, b)| (a - b).abs().powf(alpha)).sum())
}

/// `ρ_α = (∑uᵢ^{α/2}vᵢ^{α/2} / √(∑uᵢ^α ∑vᵢ^α))^{2/α}` for nonnegative data.
pub fn rho_alpha(u: &SparseVector, v: &SparseVector, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_nonnegative(u, "u")?;
    check_nonnegative(v, "v")?;
    let half = alpha / 2.0;
    let (mut cross, mut su, mut sv) = (0.0, 0.0, 0.0);
    for (_, a, b) in union_entries(u, v) {
        let pa = a.powf(half);
        let pb = b.powf(half);
        cross += pa * pb;
        su += pa * pa;
        sv += pb * pb;
    }
    if su == 0.0 || sv == 0.0 {
        return Err(Error::domain("rho_alpha needs a positive entry in each vector"));
    }
    let norm = match (su * sv).sqrt() {
        n if n.is_finite() && n > 0.0 => n,
        _ => su.sqrt() * sv.sqrt(),
    };
    let ratio = (cross / norm).clamp(0.0, 1.0);
    Ok(ratio.powf(2.0 / alpha))
}

/// χ² similarity `∑ 2uᵢvᵢ/(uᵢ+vᵢ)` of two histograms (0/0 taken as 0).
pub fn rho_chi2(u: &SparseVector, v: &SparseVector) -> Result<f64> {
    check_normalized(u)?;
    check_normalized(v)?;
    Ok(rho_chi2_unchecked(u, v))
}

pub(crate) fn rho_chi2_unchecked(u: &SparseVector, v: &SparseVector) -> f64 {
    union_entries(u, v)
        .filter(|&(_, a, b)| a > 0.0 && b > 0.0)
        .map(|(_, a, b)| 2.0 * a * b / (a + b))
        .sum::<f64>()
        .clamp(0.0, 1.0)
}

/// χ² distance of two histograms, `2 − 2ρ_χ²`.
pub fn d_chi2(u: &SparseVector, v: &SparseVector) -> Result<f64> {
    Ok(2.0 - 2.0 * rho_chi2(u, v)?)
}

/// Support counts of `u` and `v`; entries `> 0` count as present.
pub fn binary_profile(u: &SparseVector, v: &SparseVector) -> BinaryProfile {
    let mut p = BinaryProfile::new(0, 0, 0);
    for (_, x, y) in union_entries(u, v) {
        match (x > 0.0, y > 0.0) {
            (true, true) => p.c += 1,
            (true, false) => p.a += 1,
            (false, true) => p.b += 1,
            (false, false) => {}
        }
    }
    p
}
