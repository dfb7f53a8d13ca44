//! Synthetic collision experiments.
//!
//! Pairs of nonnegative vectors are drawn from the absolute value of a
//! bivariate t distribution, optionally sparsified, and then held fixed while
//! `repetitions` sign projections are applied. Each curve point compares the
//! empirical collision rate with the bound and both χ² approximations.
//!
//! Within one α all pairs are sketched against the same projection matrix,
//! one column per repetition. Columns are i.i.d., so each pair still sees
//! independent trials; only the estimates of different cells share noise.

use std::io::Write;

use rand::distr::{Bernoulli, Distribution};
use rand_distr::{ChiSquared, StandardNormal};
use serde::Serialize;

use crate::collision::{bound_acos, p_chi2_1, p_chi2_2};
use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::rng::{mix_pair, SeededRng};
use crate::similarity::{normalize, rho_alpha, rho_chi2};
use crate::sketch::{sketch_many, SketchConfig};
use crate::stats::binomial_std_err;
use crate::vector::{LabeledVector, SparseVector};

/// Stream tag for the data of a grid cell.
const DATA_STREAM: u64 = 0x6461_7461;

#[derive(Debug, Clone, PartialEq)]
pub struct SimSpec {
    pub dim: usize,
    /// Degrees of freedom of the t distribution.
    pub df: u32,
    pub correlations: Vec<f64>,
    /// Probability that a generated entry is zeroed.
    pub sparsity: f64,
    pub repetitions: usize,
    pub alphas: Vec<f64>,
    pub seed: u64,
}

impl SimSpec {
    /// Correlation grid `{0, 1/(n−1), …, 1}`.
    pub fn uniform_grid(n: usize) -> Vec<f64> {
        match n {
            0 => Vec::new(),
            1 => vec![0.0],
            _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_data_params(self.dim, self.df, self.sparsity)?;
        if self.repetitions == 0 || self.repetitions > u32::MAX as usize {
            return Err(Error::parameter("repetitions must lie in [1, 2^32)"));
        }
        if let Some(c) = self.correlations.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(Error::parameter(format!("correlation {c} outside [0, 1]")));
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a <= 2.0)) {
            return Err(Error::parameter(format!("alpha {a} outside (0, 2]")));
        }
        Ok(())
    }
}

fn check_data_params(dim: usize, df: u32, sparsity: f64) -> Result<()> {
    if dim == 0 {
        return Err(Error::parameter("dimension must be at least 1"));
    }
    if df == 0 {
        return Err(Error::parameter("degrees of freedom must be at least 1"));
    }
    if !(0.0..1.0).contains(&sparsity) {
        return Err(Error::parameter(format!("sparsity {sparsity} outside [0, 1)")));
    }
    Ok(())
}

/// One cell of a synthetic experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CollisionCurvePoint {
    pub alpha: f64,
    pub correlation: f64,
    pub rho_alpha: f64,
    pub rho_chi2: f64,
    pub p_empirical: f64,
    pub p_bound: f64,
    pub p_chi2_1: f64,
    pub p_chi2_2: f64,
    pub std_err: f64,
}

/// One pair of a file-driven experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCurvePoint {
    pub left: String,
    pub right: String,
    pub alpha: f64,
    pub rho_alpha: f64,
    pub rho_chi2: f64,
    pub p_empirical: f64,
    pub p_bound: f64,
    pub p_chi2_1: f64,
    pub p_chi2_2: f64,
    pub std_err: f64,
}

struct Analytic {
    rho_alpha: f64,
    rho_chi2: f64,
    p_bound: f64,
    p_chi2_1: f64,
    p_chi2_2: f64,
}

fn analytic(u: &SparseVector, v: &SparseVector, alpha: f64) -> Result<Analytic> {
    let (nu, nv) = (normalize(u)?, normalize(v)?);
    let ra = rho_alpha(&nu, &nv, alpha)?;
    let rc = rho_chi2(&nu, &nv)?;
    Ok(Analytic {
        rho_alpha: ra,
        rho_chi2: rc,
        p_bound: bound_acos(ra)?,
        p_chi2_1: p_chi2_1(rc)?,
        p_chi2_2: p_chi2_2(rc)?,
    })
}

/// Draw a pair of nonnegative vectors: coordinate-wise absolute values of a
/// bivariate t with the given correlation, then each entry of each vector is
/// zeroed independently with probability `sparsity`. A vector left with no
/// nonzero entry is redrawn.
pub fn generate_pair(
    dim: usize,
    correlation: f64,
    df: u32,
    sparsity: f64,
    rng: &mut SeededRng,
) -> Result<(SparseVector, SparseVector)> {
    check_data_params(dim, df, sparsity)?;
    if !(0.0..=1.0).contains(&correlation) {
        return Err(Error::parameter(format!("correlation {correlation} outside [0, 1]")));
    }
    let chi2 = ChiSquared::new(df as f64).map_err(|e| Error::parameter(e.to_string()))?;
    let zero = Bernoulli::new(sparsity).map_err(|e| Error::parameter(e.to_string()))?;
    let side = (1.0 - correlation * correlation).sqrt();
    loop {
        let mut u = Vec::with_capacity(dim);
        let mut v = Vec::with_capacity(dim);
        for _ in 0..dim {
            let z1: f64 = StandardNormal.sample(rng);
            let z2: f64 = StandardNormal.sample(rng);
            let w = (chi2.sample(rng) / df as f64).sqrt();
            u.push((z1 / w).abs());
            v.push(((correlation * z1 + side * z2) / w).abs());
        }
        for x in u.iter_mut().chain(v.iter_mut()) {
            if zero.sample(rng) {
                *x = 0.0;
            }
        }
        let (u, v) = (SparseVector::from_dense(&u)?, SparseVector::from_dense(&v)?);
        if !u.is_empty() && !v.is_empty() {
            return Ok((u, v));
        }
    }
}

/// Run every (α, correlation) cell of `spec`. Output order is α-major and
/// does not depend on `exec`.
pub fn run_collision_experiment(
    spec: &SimSpec,
    exec: Execution,
) -> Result<Vec<CollisionCurvePoint>> {
    spec.validate()?;
    let mut out = Vec::with_capacity(spec.alphas.len() * spec.correlations.len());
    for (ai, &alpha) in spec.alphas.iter().enumerate() {
        let pairs = map_indexed(spec.correlations.len(), exec, |ci| {
            let mut rng = SeededRng::new(spec.seed, mix_pair(DATA_STREAM, mix_pair(ai as u64, ci as u64)));
            generate_pair(spec.dim, spec.correlations[ci], spec.df, spec.sparsity, &mut rng)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

        let config = SketchConfig::new(spec.repetitions, alpha, mix_pair(spec.seed, ai as u64))?;
        let flat: Vec<SparseVector> = pairs.iter().flat_map(|(u, v)| [u.clone(), v.clone()]).collect();
        let sketches = sketch_many(&flat, &config, exec)?;

        for (ci, (u, v)) in pairs.iter().enumerate() {
            let p = sketches[2 * ci].collision_fraction(&sketches[2 * ci + 1])?;
            let a = analytic(u, v, alpha)?;
            out.push(CollisionCurvePoint {
                alpha,
                correlation: spec.correlations[ci],
                rho_alpha: a.rho_alpha,
                rho_chi2: a.rho_chi2,
                p_empirical: p,
                p_bound: a.p_bound,
                p_chi2_1: a.p_chi2_1,
                p_chi2_2: a.p_chi2_2,
                std_err: binomial_std_err(p, spec.repetitions),
            });
        }
    }
    Ok(out)
}

/// Which pairs of a vector file to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub enum PairSelection {
    /// Every `(i, j)` with `i < j`.
    All,
    /// Explicit 0-based index pairs.
    List(Vec<(usize, usize)>),
}

/// Sketch every vector of a file with `k` shared projections and report the
/// requested pairs. Vectors are normalized first.
pub fn run_file_experiment(
    vectors: &[LabeledVector],
    pairs: &PairSelection,
    k: usize,
    alpha: f64,
    seed: u64,
    exec: Execution,
) -> Result<Vec<PairCurvePoint>> {
    let config = SketchConfig::new(k, alpha, seed)?;
    let normalized = vectors
        .iter()
        .enumerate()
        .map(|(i, lv)| normalize(&lv.vector).map_err(|e| Error::domain(format!("vector {}: {e}", i + 1))))
        .collect::<Result<Vec<_>>>()?;
    let n = normalized.len();
    let list: Vec<(usize, usize)> = match pairs {
        PairSelection::All => (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect(),
        PairSelection::List(l) => {
            if let Some(&(i, j)) = l.iter().find(|&&(i, j)| i >= n || j >= n) {
                return Err(Error::parameter(format!(
                    "pair ({}, {}) out of range for {n} vectors",
                    i + 1,
                    j + 1
                )));
            }
            l.clone()
        }
    };
    let sketches = sketch_many(&normalized, &config, exec)?;
    list.into_iter()
        .map(|(i, j)| {
            let p = sketches[i].collision_fraction(&sketches[j])?;
            let a = analytic(&normalized[i], &normalized[j], alpha)?;
            Ok(PairCurvePoint {
                left: vectors[i].label.clone(),
                right: vectors[j].label.clone(),
                alpha,
                rho_alpha: a.rho_alpha,
                rho_chi2: a.rho_chi2,
                p_empirical: p,
                p_bound: a.p_bound,
                p_chi2_1: a.p_chi2_1,
                p_chi2_2: a.p_chi2_2,
                std_err: binomial_std_err(p, k),
            })
        })
        .collect()
}

/// Write rows as CSV with a header taken from the field names.
pub fn write_csv<T: Serialize>(writer: impl Write, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfectly_correlated_pair_is_identical() {
        let mut rng = SeededRng::new(1, 0);
        let (u, v) = generate_pair(500, 1.0, 1, 0.0, &mut rng).unwrap();
        assert_eq!(u, v);
        let r = rho_chi2(&normalize(&u).unwrap(), &normalize(&v).unwrap()).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sparsity_fraction() {
        let mut rng = SeededRng::new(2, 0);
        let (u, v) = generate_pair(10_000, 0.5, 1, 0.5, &mut rng).unwrap();
        for x in [u, v] {
            let zeros = 1.0 - x.nnz() as f64 / 10_000.0;
            assert!((zeros - 0.5).abs() < 0.02, "{zeros}");
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut rng = SeededRng::new(0, 0);
        assert!(generate_pair(0, 0.5, 1, 0.0, &mut rng).is_err());
        assert!(generate_pair(10, 1.5, 1, 0.0, &mut rng).is_err());
        assert!(generate_pair(10, 0.5, 0, 0.0, &mut rng).is_err());
        assert!(generate_pair(10, 0.5, 1, 1.0, &mut rng).is_err());
        let mut spec = small_spec();
        spec.repetitions = 0;
        assert!(run_collision_experiment(&spec, Execution::Sequential).is_err());
    }

    fn small_spec() -> SimSpec {
        SimSpec {
            dim: 30,
            df: 1,
            correlations: SimSpec::uniform_grid(5),
            sparsity: 0.5,
            repetitions: 2000,
            alphas: vec![1.0, 2.0],
            seed: 17,
        }
    }

    #[test]
    fn experiment_is_deterministic() {
        let spec = small_spec();
        let a = run_collision_experiment(&spec, Execution::Sequential).unwrap();
        let b = run_collision_experiment(&spec, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 10);
        let (mut x, mut y) = (Vec::new(), Vec::new());
        write_csv(&mut x, &a).unwrap();
        write_csv(&mut y, &b).unwrap();
        assert_eq!(x, y);
        let text = String::from_utf8(x).unwrap();
        assert!(text.starts_with(
            "alpha,correlation,rho_alpha,rho_chi2,p_empirical,p_bound,p_chi2_1,p_chi2_2,std_err\n"
        ));
    }

    #[test]
    fn file_experiment_pairs() {
        let lv = |label: &str, e: &[(usize, f64)]| LabeledVector {
            label: label.into(),
            vector: SparseVector::new(6, e.iter().copied()).unwrap(),
        };
        let vs = vec![
            lv("a", &[(0, 1.0), (1, 3.0)]),
            lv("b", &[(4, 2.0), (5, 2.0)]),
            lv("c", &[(1, 1.0), (2, 1.0)]),
        ];
        let pts = run_file_experiment(&vs, &PairSelection::List(vec![(0, 0), (0, 1)]), 20_000, 1.0, 5, Execution::Parallel)
            .unwrap();
        assert_eq!(pts[0].p_empirical, 0.0);
        assert!((pts[1].p_empirical - 0.5).abs() <= 3.0 * pts[1].std_err);
        let all = run_file_experiment(&vs, &PairSelection::All, 64, 1.0, 5, Execution::Sequential).unwrap();
        assert_eq!(all.len(), 3);
        assert_eq!((all[2].left.as_str(), all[2].right.as_str()), ("b", "c"));
        assert!(run_file_experiment(&vs, &PairSelection::List(vec![(0, 3)]), 64, 1.0, 5, Execution::Sequential).is_err());
    }
}
