//! Sparse vectors and the line-oriented `label idx:val ...` text format.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// A vector in `ℝ^dim` stored as sorted `(index, value)` pairs.
///
/// Indices are zero-based, strictly increasing and below `dim`; stored values
/// are finite and nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    dim: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseVector {
    /// Build from `(index, value)` pairs. Zero values are dropped.
    pub fn new(dim: usize, entries: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut last: Option<usize> = None;
        for (i, v) in entries {
            if i >= dim {
                return Err(Error::domain(format!("index {i} out of range for dimension {dim}")));
            }
            if let Some(prev) = last {
                if i <= prev {
                    return Err(Error::domain(format!(
                        "indices must be strictly increasing ({prev} then {i})"
                    )));
                }
            }
            if !v.is_finite() {
                return Err(Error::domain(format!("non-finite value at index {i}")));
            }
            last = Some(i);
            if v != 0.0 {
                indices.push(i);
                values.push(v);
            }
        }
        Ok(Self { dim, indices, values })
    }

    pub fn from_dense(values: &[f64]) -> Result<Self> {
        Self::new(values.len(), values.iter().copied().enumerate())
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn get(&self, index: usize) -> f64 {
        match self.indices.binary_search(&index) {
            Ok(pos) => self.values[pos],
            Err(_) => 0.0,
        }
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    /// Multiply every entry by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.dim, self.iter().map(|(i, v)| (i, v * c)))
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (i, v) in self.iter() {
            out[i] = v;
        }
        out
    }

    pub(crate) fn from_parts_unchecked(dim: usize, indices: Vec<usize>, values: Vec<f64>) -> Self {
        debug_assert_eq!(indices.len(), values.len());
        Self { dim, indices, values }
    }
}

/// Merge-join over the union of two supports, yielding `(index, u_i, v_i)`.
pub fn union_entries<'a>(
    u: &'a SparseVector,
    v: &'a SparseVector,
) -> impl Iterator<Item = (usize, f64, f64)> + 'a {
    let (mut a, mut b) = (0, 0);
    std::iter::from_fn(move || {
        let left = u.indices.get(a).copied();
        let right = v.indices.get(b).copied();
        match (left, right) {
            (None, None) => None,
            (Some(i), None) => {
                a += 1;
                Some((i, u.values[a - 1], 0.0))
            }
            (None, Some(j)) => {
                b += 1;
                Some((j, 0.0, v.values[b - 1]))
            }
            (Some(i), Some(j)) if i == j => {
                a += 1;
                b += 1;
                Some((i, u.values[a - 1], v.values[b - 1]))
            }
            (Some(i), Some(j)) if i < j => {
                a += 1;
                Some((i, u.values[a - 1], 0.0))
            }
            (Some(_), Some(j)) => {
                b += 1;
                Some((j, 0.0, v.values[b - 1]))
            }
        }
    })
}

/// A vector together with the label that precedes it in the text format.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledVector {
    pub label: String,
    pub vector: SparseVector,
}

/// Parse the sparse text format: one vector per line, `label idx:val ...`,
/// with 1-based strictly ascending indices. Blank lines and lines starting
/// with `#` are skipped.
///
/// When `dim` is `None` the dimension is the largest index in the input.
pub fn read_vectors(reader: impl BufRead, dim: Option<usize>) -> Result<Vec<LabeledVector>> {
    // (line number, label, entries)
    type Row = (usize, String, Vec<(usize, f64)>);
    let mut rows: Vec<Row> = Vec::new();
    let mut max_index = 0usize;
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = n + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let label = tokens.next().unwrap_or_default();
        if label.contains(':') {
            return Err(Error::parse(lineno, format!("missing label before '{label}'")));
        }
        let mut entries = Vec::new();
        let mut prev = 0usize;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| Error::parse(lineno, format!("expected idx:val, got '{tok}'")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad index '{idx}'")))?;
            let val: f64 = val
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad value '{val}'")))?;
            if idx == 0 {
                return Err(Error::parse(lineno, "indices are 1-based"));
            }
            if idx <= prev {
                let what = if idx == prev { "duplicate" } else { "descending" };
                return Err(Error::parse(lineno, format!("{what} index {idx}")));
            }
            if !val.is_finite() {
                return Err(Error::parse(lineno, format!("non-finite value at index {idx}")));
            }
            prev = idx;
            entries.push((idx - 1, val));
        }
        max_index = max_index.max(prev);
        rows.push((lineno, label.to_string(), entries));
    }
    let dim = match dim {
        Some(d) => d,
        None => max_index.max(1),
    };
    rows.into_iter()
        .map(|(lineno, label, entries)| {
            let vector = SparseVector::new(dim, entries)
                .map_err(|e| Error::parse(lineno, e.to_string()))?;
            Ok(LabeledVector { label, vector })
        })
        .collect()
}

/// Write vectors in the sparse text format.
pub fn write_vectors<'a>(
    mut writer: impl Write,
    vectors: impl IntoIterator<Item = &'a LabeledVector>,
) -> Result<()> {
    for lv in vectors {
        write!(writer, "{}", lv.label)?;
        for (i, v) in lv.vector.iter() {
            write!(writer, " {}:{}", i + 1, v)?;
        }
        writeln!(writer)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constructor_validates() {
        assert!(SparseVector::new(3, [(0, 1.0), (2, 1.0)]).is_ok());
        assert!(SparseVector::new(3, [(3, 1.0)]).is_err());
        assert!(SparseVector::new(3, [(1, 1.0), (1, 2.0)]).is_err());
        assert!(SparseVector::new(3, [(2, 1.0), (1, 2.0)]).is_err());
        assert!(SparseVector::new(3, [(0, f64::INFINITY)]).is_err());
        let v = SparseVector::new(3, [(0, 0.0), (1, 2.0)]).unwrap();
        assert_eq!(v.indices(), &[1]);
        assert_eq!(v.get(1), 2.0);
        assert_eq!(v.get(0), 0.0);
    }

    #[test]
    fn union_walks_both_supports() {
        let u = SparseVector::new(6, [(0, 1.0), (2, 2.0), (5, 3.0)]).unwrap();
        let v = SparseVector::new(6, [(1, 4.0), (2, 5.0)]).unwrap();
        let got: Vec<_> = union_entries(&u, &v).collect();
        assert_eq!(
            got,
            vec![(0, 1.0, 0.0), (1, 0.0, 4.0), (2, 2.0, 5.0), (5, 3.0, 0.0)]
        );
    }

    #[test]
    fn parse_and_write() {
        let text = "# comment\n1 1:0.5 3:0.5\n\n-1 2:1\n";
        let vs = read_vectors(text.as_bytes(), None).unwrap();
        assert_eq!(vs.len(), 2);
        assert_eq!(vs[0].label, "1");
        assert_eq!(vs[0].vector.dim(), 3);
        assert_eq!(vs[0].vector.indices(), &[0, 2]);
        assert_eq!(vs[1].vector.get(1), 1.0);
        let mut out = Vec::new();
        write_vectors(&mut out, &vs).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "1 1:0.5 3:0.5\n-1 2:1\n");
    }

    #[test]
    fn parse_rejects_bad_order() {
        let dup = read_vectors("a 1:1 1:2\n".as_bytes(), None).unwrap_err();
        assert!(dup.to_string().contains("duplicate"), "{dup}");
        let desc = read_vectors("a 2:1 1:2\n".as_bytes(), None).unwrap_err();
        assert!(desc.to_string().contains("descending"), "{desc}");
        assert!(read_vectors("a 0:1\n".as_bytes(), None).is_err());
        assert!(read_vectors("a 1:x\n".as_bytes(), None).is_err());
        assert!(read_vectors("1:2 3:4\n".as_bytes(), None).is_err());
        assert!(read_vectors("a 5:1\n".as_bytes(), Some(4)).is_err());
    }
}
