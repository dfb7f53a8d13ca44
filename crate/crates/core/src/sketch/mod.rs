//! k-bit sign sketches from α-stable random projections.
//!
//! Row `i` of the implicit `D × k` projection matrix is the first `k`
//! variates of a counter-based stream keyed by `(master_seed, i)`, so a row
//! can be regenerated on demand and the matrix is never materialized.

mod batch;
mod io;

pub use batch::sketch_many;
pub use io::{
    read_sketch_file, read_updates, write_sketch_file, SketchRecord, StreamUpdate, SKETCH_MAGIC,
    SKETCH_VERSION,
};

use crate::error::{Error, Result};
use crate::rng::{mix_pair, SeededRng};
use crate::stable::{StableParams, StableSampler};
use crate::vector::SparseVector;

/// Projection count, stability index and master seed. Sketches are
/// comparable only when their configurations are equal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SketchConfig {
    k: usize,
    alpha: f64,
    master_seed: u64,
}

impl SketchConfig {
    pub fn new(k: usize, alpha: f64, master_seed: u64) -> Result<Self> {
        if k == 0 {
            return Err(Error::parameter("projection count k must be at least 1"));
        }
        if k > u32::MAX as usize {
            return Err(Error::parameter("projection count k must fit in 32 bits"));
        }
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::parameter(format!(
                "stability index must lie in (0, 2], got {alpha}"
            )));
        }
        Ok(Self {
            k,
            alpha,
            master_seed,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Sampler for the matrix entries, `S(α, 0, 1)`.
    pub fn sampler(&self) -> StableSampler {
        // alpha was validated in `new`.
        StableSampler::new(StableParams::standard_symmetric(self.alpha).expect("valid alpha"))
    }

    /// Random stream that generates row `i` of the projection matrix.
    pub fn row_rng(&self, i: usize) -> SeededRng {
        SeededRng::new(self.master_seed, mix_pair(self.master_seed, i as u64))
    }

    pub(crate) fn check_same(&self, other: &SketchConfig) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::Comparison(format!(
                "configs differ: (k={}, alpha={}, seed={}) vs (k={}, alpha={}, seed={})",
                self.k, self.alpha, self.master_seed, other.k, other.alpha, other.master_seed
            )))
        }
    }
}

/// Row `i` of the projection matrix: `k` i.i.d. `S(α, 0, 1)` variates.
pub fn project_row(config: &SketchConfig, i: usize) -> Vec<f64> {
    let mut row = vec![0.0; config.k];
    config.sampler().fill(&config.row_rng(i), 0, &mut row);
    row
}

/// Real-valued projections `x_j = ∑ᵢ uᵢ r_{ij}`, summed over the support in
/// ascending index order.
pub fn project(u: &SparseVector, config: &SketchConfig) -> Result<Vec<f64>> {
    if u.is_empty() {
        return Err(Error::domain("cannot sketch an all-zero vector"));
    }
    let sampler = config.sampler();
    let mut x = vec![0.0; config.k];
    let mut row = vec![0.0; config.k];
    for (i, ui) in u.iter() {
        sampler.fill(&config.row_rng(i), 0, &mut row);
        for (xj, rj) in x.iter_mut().zip(&row) {
            *xj += ui * rj;
        }
    }
    Ok(x)
}

/// Sign sketch of `u`: bit `j` is set iff `x_j ≥ 0`.
pub fn sketch(u: &SparseVector, config: &SketchConfig) -> Result<SignSketch> {
    Ok(SignSketch::from_projections(*config, &project(u, config)?))
}

/// Fraction of differing bits, the empirical collision probability.
pub fn collision_fraction(s1: &SignSketch, s2: &SignSketch) -> Result<f64> {
    s1.collision_fraction(s2)
}

#[inline]
pub(crate) fn words_for(k: usize) -> usize {
    k.div_ceil(64)
}

/// Packed sign bits of `k` projections. Bit `j` is 1 iff the `j`-th
/// projection is nonnegative (sign(0) is taken as +1).
#[derive(Debug, Clone, PartialEq)]
pub struct SignSketch {
    config: SketchConfig,
    words: Vec<u64>,
}

impl SignSketch {
    pub fn from_projections(config: SketchConfig, x: &[f64]) -> Self {
        assert_eq!(x.len(), config.k, "projection length must equal k");
        let mut words = vec![0u64; words_for(config.k)];
        pack_signs(x, &mut words);
        Self { config, words }
    }

    /// Build from explicit bits; `bits.len()` must equal `config.k()`.
    pub fn from_bits(config: SketchConfig, bits: &[bool]) -> Result<Self> {
        if bits.len() != config.k {
            return Err(Error::parameter(format!(
                "expected {} bits, got {}",
                config.k,
                bits.len()
            )));
        }
        let mut words = vec![0u64; words_for(config.k)];
        for (j, &b) in bits.iter().enumerate() {
            if b {
                words[j / 64] |= 1 << (j % 64);
            }
        }
        Ok(Self { config, words })
    }

    pub(crate) fn from_words(config: SketchConfig, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), words_for(config.k));
        Self { config, words }
    }

    pub fn config(&self) -> &SketchConfig {
        &self.config
    }

    pub fn k(&self) -> usize {
        self.config.k
    }

    pub fn bit(&self, j: usize) -> bool {
        assert!(j < self.config.k, "bit {j} out of range");
        self.words[j / 64] >> (j % 64) & 1 == 1
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Number of differing bits.
    pub fn hamming(&self, other: &SignSketch) -> Result<usize> {
        self.config.check_same(&other.config)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    pub fn collision_fraction(&self, other: &SignSketch) -> Result<f64> {
        Ok(self.hamming(other)? as f64 / self.config.k as f64)
    }

    /// Two-slot feature encoding for linear learners: `+` becomes `1,0` and
    /// `−` becomes `0,1`, giving a 0/1 vector of length `2k` with exactly `k`
    /// ones.
    pub fn encode_features(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(2 * self.config.k);
        for j in 0..self.config.k {
            if self.bit(j) {
                out.extend_from_slice(&[1, 0]);
            } else {
                out.extend_from_slice(&[0, 1]);
            }
        }
        out
    }

    /// Zero-based positions of the ones in [`encode_features`](Self::encode_features).
    pub fn feature_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.config.k).map(|j| if self.bit(j) { 2 * j } else { 2 * j + 1 })
    }

    /// Hash-table bucket from the `width` bits starting at `offset`, read
    /// most-significant first.
    pub fn bucket_code(&self, offset: usize, width: usize) -> Result<u64> {
        if width == 0 || width > 64 {
            return Err(Error::parameter(format!(
                "bucket width must be in 1..=64, got {width}"
            )));
        }
        if offset.checked_add(width).is_none_or(|end| end > self.config.k) {
            return Err(Error::parameter(format!(
                "window [{offset}, {offset}+{width}) exceeds k = {}",
                self.config.k
            )));
        }
        Ok((offset..offset + width).fold(0u64, |code, j| (code << 1) | self.bit(j) as u64))
    }

    /// `⌈k/8⌉` bytes, bit `j` at bit `j % 8` of byte `j / 8`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let n = self.config.k.div_ceil(8);
        self.words
            .iter()
            .flat_map(|w| w.to_le_bytes())
            .take(n)
            .collect()
    }

    pub fn from_bytes(config: SketchConfig, bytes: &[u8]) -> Result<Self> {
        let n = config.k.div_ceil(8);
        if bytes.len() != n {
            return Err(Error::Format(format!(
                "expected {n} sketch bytes, got {}",
                bytes.len()
            )));
        }
        let mut words = vec![0u64; words_for(config.k)];
        for (i, &b) in bytes.iter().enumerate() {
            words[i / 8] |= (b as u64) << (8 * (i % 8));
        }
        let tail = config.k % 64;
        if tail != 0 && words[words.len() - 1] >> tail != 0 {
            return Err(Error::Format("padding bits beyond k are set".into()));
        }
        Ok(Self { config, words })
    }
}

pub(crate) fn pack_signs(x: &[f64], words: &mut [u64]) {
    for (w, chunk) in words.iter_mut().zip(x.chunks(64)) {
        *w = chunk
            .iter()
            .enumerate()
            .fold(0u64, |acc, (b, &v)| acc | (((v >= 0.0) as u64) << b));
    }
}

/// Running projections of one turnstile stream.
///
/// Each update `(i, I)` regenerates row `i` and adds `I · r_{i·}` to the
/// projections; a single counter tracks the running total `∑ I`, which for a
/// nonnegative stream is the mass needed to normalize it.
#[derive(Debug, Clone)]
pub struct StreamSketchState {
    config: SketchConfig,
    sampler: StableSampler,
    x: Vec<f64>,
    sum_counter: f64,
    updates: u64,
    row: Vec<f64>,
}

impl StreamSketchState {
    pub fn new(config: SketchConfig) -> Self {
        Self {
            config,
            sampler: config.sampler(),
            x: vec![0.0; config.k],
            sum_counter: 0.0,
            updates: 0,
            row: vec![0.0; config.k],
        }
    }

    pub fn config(&self) -> &SketchConfig {
        &self.config
    }

    /// Apply the stream element `(index, increment)`.
    pub fn update(&mut self, index: usize, increment: f64) {
        self.sampler
            .fill(&self.config.row_rng(index), 0, &mut self.row);
        for (xj, rj) in self.x.iter_mut().zip(&self.row) {
            *xj += increment * rj;
        }
        self.sum_counter += increment;
        self.updates += 1;
    }

    pub fn projections(&self) -> &[f64] {
        &self.x
    }

    pub fn sum_counter(&self) -> f64 {
        self.sum_counter
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Snapshot of the current sign bits.
    pub fn signs(&self) -> SignSketch {
        SignSketch::from_projections(self.config, &self.x)
    }
}
