//! Sketching many vectors against the same projection matrix.
//!
//! The `k` projection columns are cut into fixed blocks. Within a block each
//! distinct coordinate's row segment is generated once and scattered into
//! every vector that touches it, visiting coordinates in ascending order, so
//! every projection is summed in exactly the order [`super::project`] uses
//! and the resulting bits are identical to sketching one vector at a time.

use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::vector::SparseVector;

use super::{pack_signs, words_for, SignSketch, SketchConfig};

/// Columns per work unit; a multiple of 64 so blocks own whole bit words.
const BLOCK: usize = 1024;

struct Posting {
    index: usize,
    entries: Vec<(usize, f64)>,
}

fn postings(vectors: &[SparseVector]) -> Vec<Posting> {
    let mut triples: Vec<(usize, usize, f64)> = vectors
        .iter()
        .enumerate()
        .flat_map(|(vid, v)| v.iter().map(move |(i, x)| (i, vid, x)))
        .collect();
    triples.sort_by_key(|&(i, vid, _)| (i, vid));
    let mut out: Vec<Posting> = Vec::new();
    for (i, vid, x) in triples {
        match out.last_mut() {
            Some(p) if p.index == i => p.entries.push((vid, x)),
            _ => out.push(Posting {
                index: i,
                entries: vec![(vid, x)],
            }),
        }
    }
    out
}

/// Sign sketches of all `vectors` under one configuration.
pub fn sketch_many(
    vectors: &[SparseVector],
    config: &SketchConfig,
    exec: Execution,
) -> Result<Vec<SignSketch>> {
    if let Some(pos) = vectors.iter().position(|v| v.is_empty()) {
        return Err(Error::domain(format!("vector {pos} is all zero")));
    }
    let k = config.k();
    let n = vectors.len();
    let sampler = config.sampler();
    let index = postings(vectors);
    let rows: Vec<_> = index.iter().map(|p| config.row_rng(p.index)).collect();
    let blocks = k.div_ceil(BLOCK);

    let block_words = map_indexed(blocks, exec, |b| {
        let start = b * BLOCK;
        let len = BLOCK.min(k - start);
        let mut x = vec![0.0f64; n * len];
        let mut row = vec![0.0f64; len];
        for (posting, rng) in index.iter().zip(&rows) {
            sampler.fill(rng, start as u64, &mut row);
            for &(vid, ui) in &posting.entries {
                let acc = &mut x[vid * len..(vid + 1) * len];
                for (xj, rj) in acc.iter_mut().zip(&row) {
                    *xj += ui * rj;
                }
            }
        }
        let wpb = len.div_ceil(64);
        let mut words = vec![0u64; n * wpb];
        for vid in 0..n {
            pack_signs(
                &x[vid * len..(vid + 1) * len],
                &mut words[vid * wpb..(vid + 1) * wpb],
            );
        }
        words
    });

    let total = words_for(k);
    let mut out: Vec<Vec<u64>> = (0..n).map(|_| Vec::with_capacity(total)).collect();
    for (b, words) in block_words.iter().enumerate() {
        let len = BLOCK.min(k - b * BLOCK);
        let wpb = len.div_ceil(64);
        for (vid, dst) in out.iter_mut().enumerate() {
            dst.extend_from_slice(&words[vid * wpb..(vid + 1) * wpb]);
        }
    }
    Ok(out
        .into_iter()
        .map(|w| SignSketch::from_words(*config, w))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sketch::sketch;

    #[test]
    fn matches_single_vector_path() {
        let config = SketchConfig::new(2500, 0.7, 9).unwrap();
        let vectors = vec![
            SparseVector::new(20, [(0, 1.0), (5, -2.0), (19, 0.5)]).unwrap(),
            SparseVector::new(20, [(5, 3.0), (6, 1.0)]).unwrap(),
            SparseVector::new(20, [(1, 0.25)]).unwrap(),
        ];
        for exec in [Execution::Sequential, Execution::Parallel] {
            let many = sketch_many(&vectors, &config, exec).unwrap();
            for (v, s) in vectors.iter().zip(&many) {
                assert_eq!(&sketch(v, &config).unwrap(), s);
            }
        }
    }

    #[test]
    fn rejects_empty_member() {
        let config = SketchConfig::new(10, 1.0, 0).unwrap();
        let vectors = vec![SparseVector::zeros(3)];
        assert!(sketch_many(&vectors, &config, Execution::Sequential).is_err());
        assert!(sketch_many(&[], &config, Execution::Sequential).unwrap().is_empty());
    }
}
