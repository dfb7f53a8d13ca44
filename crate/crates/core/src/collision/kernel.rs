//! Pairwise kernel matrices and their precomputed-kernel text export.

use std::io::Write;

use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::similarity::{check_normalized, rho_chi2_unchecked};
use crate::sketch::SignSketch;
use crate::vector::SparseVector;

use super::estimate_rho_chi2;

/// Which kernel to evaluate.
#[derive(Debug, Clone, Copy)]
pub enum KernelKind<'a> {
    /// `ρ_χ²(u, v)`.
    Chi2,
    /// `1 − (1/π)·acos(ρ_χ²(u, v))`.
    AcosChi2,
    /// `ρ̂_χ²` recovered from the collision fraction of one sketch per vector.
    EstimatedChi2(&'a [SignSketch]),
}

/// Dense symmetric matrix in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    n: usize,
    values: Vec<f64>,
}

impl KernelMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    fn from_upper(n: usize, rows: Vec<Vec<f64>>) -> Self {
        let mut values = vec![0.0; n * n];
        for (i, upper) in rows.into_iter().enumerate() {
            values[i * n + i] = 1.0;
            for (off, x) in upper.into_iter().enumerate() {
                let j = i + 1 + off;
                values[i * n + j] = x;
                values[j * n + i] = x;
            }
        }
        Self { n, values }
    }
}

/// Kernel matrix with unit diagonal. Each row of the upper triangle is one
/// work unit, so the result does not depend on scheduling.
pub fn kernel_matrix(
    vectors: &[SparseVector],
    kind: KernelKind<'_>,
    exec: Execution,
) -> Result<KernelMatrix> {
    let n = vectors.len();
    let rows = match kind {
        KernelKind::Chi2 | KernelKind::AcosChi2 => {
            for (i, v) in vectors.iter().enumerate() {
                check_normalized(v).map_err(|e| Error::domain(format!("vector {i}: {e}")))?;
            }
            let acos = matches!(kind, KernelKind::AcosChi2);
            map_indexed(n, exec, |i| {
                (i + 1..n)
                    .map(|j| {
                        let rho = rho_chi2_unchecked(&vectors[i], &vectors[j]).clamp(0.0, 1.0);
                        if acos {
                            1.0 - rho.acos() / std::f64::consts::PI
                        } else {
                            rho
                        }
                    })
                    .collect()
            })
        }
        KernelKind::EstimatedChi2(sketches) => {
            if sketches.len() != n {
                return Err(Error::parameter(format!(
                    "{} sketches for {n} vectors",
                    sketches.len()
                )));
            }
            if let Some(first) = sketches.first() {
                for s in &sketches[1..] {
                    s.config().check_same(first.config())?;
                }
            }
            map_indexed(n, exec, |i| {
                (i + 1..n)
                    .map(|j| {
                        let p = sketches[i]
                            .collision_fraction(&sketches[j])
                            .expect("configurations checked above");
                        estimate_rho_chi2(p)
                    })
                    .collect()
            })
        }
    };
    Ok(KernelMatrix::from_upper(n, rows))
}

/// Format like C's `%.17g`.
pub fn format_sig17(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = trim_fraction(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        trim_fraction(&format!("{x:.*}", (16 - exp) as usize)).to_string()
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Write `label 0:serial 1:k_i1 2:k_i2 ...`, one row per vector, with the
/// 1-based row number as serial.
pub fn write_precomputed<S: AsRef<str>>(
    mut writer: impl Write,
    labels: &[S],
    matrix: &KernelMatrix,
) -> Result<()> {
    if labels.len() != matrix.len() {
        return Err(Error::parameter(format!(
            "{} labels for a {}x{} matrix",
            labels.len(),
            matrix.len(),
            matrix.len()
        )));
    }
    for (i, label) in labels.iter().enumerate() {
        write!(writer, "{} 0:{}", label.as_ref(), i + 1)?;
        for (j, &k) in matrix.row(i).iter().enumerate() {
            write!(writer, " {}:{}", j + 1, format_sig17(k))?;
        }
        writeln!(writer)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::{sketch, SketchConfig};

    fn hist(dim: usize, entries: &[(usize, f64)]) -> SparseVector {
        SparseVector::new(dim, entries.iter().copied()).unwrap()
    }

    #[test]
    fn small_examples() {
        let u = hist(4, &[(0, 0.5), (1, 0.5)]);
        let w = hist(4, &[(2, 0.25), (3, 0.75)]);
        let one = kernel_matrix(std::slice::from_ref(&u), KernelKind::Chi2, Execution::Sequential).unwrap();
        assert_eq!(one.as_slice(), &[1.0]);
        let same = kernel_matrix(&[u.clone(), u.clone()], KernelKind::Chi2, Execution::Parallel).unwrap();
        assert_eq!(same.as_slice(), &[1.0, 1.0, 1.0, 1.0]);
        let dis = kernel_matrix(&[u.clone(), w], KernelKind::AcosChi2, Execution::Parallel).unwrap();
        assert_eq!(dis.as_slice(), &[1.0, 0.5, 0.5, 1.0]);
        let bad = hist(4, &[(0, 0.5)]);
        assert!(kernel_matrix(&[u, bad], KernelKind::Chi2, Execution::Sequential).is_err());
    }

    #[test]
    fn estimated_kind() {
        let u = hist(4, &[(0, 0.5), (1, 0.5)]);
        let v = hist(4, &[(1, 0.5), (2, 0.5)]);
        let config = SketchConfig::new(4096, 1.0, 3).unwrap();
        let s = vec![sketch(&u, &config).unwrap(), sketch(&v, &config).unwrap()];
        let vs = [u, v];
        let m = kernel_matrix(&vs, KernelKind::EstimatedChi2(&s), Execution::Sequential).unwrap();
        assert_eq!(m.get(0, 0), 1.0);
        assert_eq!(m.get(0, 1), m.get(1, 0));
        let p = s[0].collision_fraction(&s[1]).unwrap();
        assert_eq!(m.get(0, 1), estimate_rho_chi2(p));
        assert!(kernel_matrix(&vs, KernelKind::EstimatedChi2(&s[..1]), Execution::Sequential).is_err());
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_sig17(1.0), "1");
        assert_eq!(format_sig17(0.0), "0");
        assert_eq!(format_sig17(0.5), "0.5");
        assert_eq!(format_sig17(0.1), "0.10000000000000001");
        assert_eq!(format_sig17(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(format_sig17(1e-5), "1.0000000000000001e-05");
        assert_eq!(format_sig17(1.5e20), "1.5e+20");
        assert_eq!(format_sig17(-2.25), "-2.25");
        assert_eq!(format_sig17(123456.0), "123456");
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt(), 1e-300, 6.02e23] {
            assert_eq!(format_sig17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn export_layout() {
        let m = KernelMatrix::from_upper(2, vec![vec![0.25], vec![]]);
        let mut out = Vec::new();
        write_precomputed(&mut out, &["+1", "-1"], &m).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "+1 0:1 1:1 2:0.25\n-1 0:2 1:0.25 2:1\n");
        assert!(write_precomputed(Vec::new(), &["a"], &m).is_err());
    }
}
