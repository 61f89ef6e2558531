//! Sparse binary patterns and the three ensembles they are drawn from.

mod bits;
mod io;

pub use bits::BitBlocks;
pub use io::{parse_ensemble, write_ensemble};

use rand::seq::index;
use rand::Rng as _;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Default sparsity `ln N / N`.
pub fn default_sparsity(dim: usize) -> Result<f64> {
    if dim < 2 {
        return Err(Error::InvalidDimension(format!(
            "sparsity needs N >= 2, got {dim}"
        )));
    }
    let n = dim as f64;
    Ok(n.ln() / n)
}

/// A 0/1 configuration stored as its strictly increasing active indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SparsePattern {
    dim: usize,
    active: Vec<u32>,
}

impl SparsePattern {
    pub fn new(dim: usize, mut active: Vec<u32>) -> Result<Self> {
        if dim == 0 || dim > u32::MAX as usize {
            return Err(Error::InvalidDimension(format!("pattern dim {dim}")));
        }
        active.sort_unstable();
        if active.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("duplicate active index".into()));
        }
        if let Some(&last) = active.last() {
            if last as usize >= dim {
                return Err(Error::InvalidParameter(format!(
                    "active index {last} out of range for dim {dim}"
                )));
            }
        }
        Ok(SparsePattern { dim, active })
    }

    /// Caller guarantees `active` is strictly increasing and in range.
    pub(crate) fn from_sorted_unchecked(dim: usize, active: Vec<u32>) -> Self {
        debug_assert!(active.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(active.last().map_or(true, |&i| (i as usize) < dim));
        SparsePattern { dim, active }
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(dim, Vec::new())
    }

    pub fn from_dense(bits: &[bool]) -> Result<Self> {
        let active = bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i as u32)
            .collect();
        Self::new(bits.len(), active)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn active(&self) -> &[u32] {
        &self.active
    }

    /// Number of active neurons.
    pub fn weight(&self) -> usize {
        self.active.len()
    }

    pub fn is_zero(&self) -> bool {
        self.active.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.dim && self.active.binary_search(&(i as u32)).is_ok()
    }

    pub fn to_dense(&self) -> Vec<bool> {
        let mut out = vec![false; self.dim];
        for &i in &self.active {
            out[i as usize] = true;
        }
        out
    }

    pub fn to_bits(&self) -> BitBlocks {
        BitBlocks::from_pattern(self)
    }

    /// Applies `perm` (old index -> new index) to every active index.
    pub fn permuted(&self, perm: &[u32]) -> Result<Self> {
        if perm.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: perm.len(),
            });
        }
        Self::new(
            self.dim,
            self.active.iter().map(|&i| perm[i as usize]).collect(),
        )
    }
}

/// Number of indices active in both `a` and `b`, not counting `exclude`.
pub fn overlap(a: &SparsePattern, b: &SparsePattern, exclude: Option<usize>) -> Result<usize> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            found: b.dim,
        });
    }
    let shared = merge_count(&a.active, &b.active);
    Ok(match exclude {
        Some(j) if a.contains(j) && b.contains(j) => shared - 1,
        _ => shared,
    })
}

/// Size of the intersection of two sorted, duplicate-free slices.
#[inline]
pub(crate) fn merge_count(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// `l` blocks of `c` neurons; neuron `(a, k)` sits at flat index `a * c + k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BlockLayout {
    blocks: usize,
    block_size: usize,
}

impl BlockLayout {
    pub fn new(blocks: usize, block_size: usize) -> Result<Self> {
        if blocks == 0 || block_size == 0 {
            return Err(Error::InvalidDimension(format!(
                "block layout {blocks}x{block_size}"
            )));
        }
        blocks
            .checked_mul(block_size)
            .filter(|&n| n <= u32::MAX as usize)
            .ok_or_else(|| Error::InvalidDimension("block layout too large".into()))?;
        Ok(BlockLayout { blocks, block_size })
    }

    /// `l`
    pub fn blocks(&self) -> usize {
        self.blocks
    }

    /// `c`
    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn dim(&self) -> usize {
        self.blocks * self.block_size
    }

    pub fn index(&self, block: usize, slot: usize) -> usize {
        debug_assert!(block < self.blocks && slot < self.block_size);
        block * self.block_size + slot
    }

    pub fn block_of(&self, i: usize) -> usize {
        i / self.block_size
    }

    pub fn slot_of(&self, i: usize) -> usize {
        i % self.block_size
    }

    /// True iff `p` has exactly one active neuron in every block.
    pub fn is_one_per_block(&self, p: &SparsePattern) -> bool {
        p.dim() == self.dim()
            && p.weight() == self.blocks
            && p
                .active()
                .iter()
                .enumerate()
                .all(|(a, &i)| self.block_of(i as usize) == a)
    }
}

/// Number of blocks other than `skip_block` on which two one-per-block
/// patterns pick the same neuron.
pub fn block_agreement(a: &SparsePattern, b: &SparsePattern, skip_block: Option<usize>) -> usize {
    // one-per-block patterns list their neurons in block order
    a.active()
        .iter()
        .zip(b.active())
        .enumerate()
        .filter(|&(blk, (x, y))| x == y && Some(blk) != skip_block)
        .count()
}

/// How an ensemble's patterns were drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PatternMode {
    /// Every coordinate independently active with probability `p`.
    Bernoulli { p: f64 },
    /// Uniform subsets of a fixed size.
    FixedWeight { active: usize },
    /// One uniformly chosen neuron per block.
    GbBlock(BlockLayout),
}

impl PatternMode {
    pub fn layout(&self) -> Option<BlockLayout> {
        match self {
            PatternMode::GbBlock(l) => Some(*l),
            _ => None,
        }
    }
}

/// `M` stored patterns plus the metadata needed to regenerate them.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternEnsemble {
    dim: usize,
    mode: PatternMode,
    master_seed: u64,
    patterns: Vec<SparsePattern>,
}

impl PatternEnsemble {
    /// Wraps existing patterns, checking them against `mode`.
    pub fn from_patterns(
        dim: usize,
        mode: PatternMode,
        master_seed: u64,
        patterns: Vec<SparsePattern>,
    ) -> Result<Self> {
        for p in &patterns {
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.dim(),
                });
            }
        }
        match mode {
            PatternMode::Bernoulli { p } => check_probability(p)?,
            PatternMode::FixedWeight { active } => {
                if active == 0 || active > dim {
                    return Err(Error::InvalidParameter(format!(
                        "fixed weight {active} for dim {dim}"
                    )));
                }
                if let Some(bad) = patterns.iter().position(|p| p.weight() != active) {
                    return Err(Error::InvalidParameter(format!(
                        "pattern {bad} does not have weight {active}"
                    )));
                }
            }
            PatternMode::GbBlock(layout) => {
                if layout.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: layout.dim(),
                    });
                }
                if let Some(bad) = patterns.iter().position(|p| !layout.is_one_per_block(p)) {
                    return Err(Error::InvalidParameter(format!(
                        "pattern {bad} is not one-per-block"
                    )));
                }
            }
        }
        Ok(PatternEnsemble {
            dim,
            mode,
            master_seed,
            patterns,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> PatternMode {
        self.mode
    }

    pub fn layout(&self) -> Option<BlockLayout> {
        self.mode.layout()
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn patterns(&self) -> &[SparsePattern] {
        &self.patterns
    }

    /// `M`
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn zero_count(&self) -> usize {
        self.patterns.iter().filter(|p| p.is_zero()).count()
    }

    /// Same ensemble with every pattern relabelled by `perm`.
    ///
    /// The mode is kept, so for block ensembles `perm` must respect blocks.
    pub fn permuted(&self, perm: &[u32]) -> Result<Self> {
        let patterns = self
            .patterns
            .iter()
            .map(|p| p.permuted(perm))
            .collect::<Result<Vec<_>>>()?;
        Self::from_patterns(self.dim, self.mode, self.master_seed, patterns)
    }
}

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "probability must lie in (0,1), got {p}"
        )))
    }
}

fn check_count(m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidParameter("pattern count must be positive".into()));
    }
    Ok(())
}

fn build<F>(m: usize, seed: u64, gen: F) -> Vec<SparsePattern>
where
    F: Fn(&mut seed::Rng) -> SparsePattern + Sync,
{
    let one = |mu: usize| gen(&mut seed::stream(seed, mu as u64));
    // small ensembles are cheaper sequentially; the output is identical either way
    if m < 4096 {
        (0..m).map(one).collect()
    } else {
        (0..m).into_par_iter().map(one).collect()
    }
}

/// `M` patterns with i.i.d. Bernoulli(`p`) coordinates.
///
/// Active indices are produced by geometric gap sampling, so the cost per
/// pattern is proportional to its weight rather than to `N`.
pub fn gen_bernoulli(dim: usize, p: f64, m: usize, seed: u64) -> Result<PatternEnsemble> {
    check_probability(p)?;
    check_count(m)?;
    if dim == 0 || dim > u32::MAX as usize {
        return Err(Error::InvalidDimension(format!("dim {dim}")));
    }
    let gaps = Geometric::new(p).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let patterns = build(m, seed, |rng| {
        let mut active = Vec::new();
        // next candidate index
        let mut pos: u64 = 0;
        loop {
            pos = pos.saturating_add(gaps.sample(rng));
            if pos >= dim as u64 {
                break;
            }
            active.push(pos as u32);
            pos += 1;
        }
        SparsePattern::from_sorted_unchecked(dim, active)
    });
    Ok(PatternEnsemble {
        dim,
        mode: PatternMode::Bernoulli { p },
        master_seed: seed,
        patterns,
    })
}

/// `M` independent uniform `c_active`-subsets of `[0, N)`.
pub fn gen_fixed_weight(dim: usize, c_active: usize, m: usize, seed: u64) -> Result<PatternEnsemble> {
    check_count(m)?;
    if dim == 0 || dim > u32::MAX as usize {
        return Err(Error::InvalidDimension(format!("dim {dim}")));
    }
    if c_active == 0 || c_active > dim {
        return Err(Error::InvalidParameter(format!(
            "active count {c_active} must lie in [1, {dim}]"
        )));
    }
    let patterns = build(m, seed, |rng| {
        let mut active: Vec<u32> = index::sample(rng, dim, c_active)
            .into_iter()
            .map(|i| i as u32)
            .collect();
        active.sort_unstable();
        SparsePattern::from_sorted_unchecked(dim, active)
    });
    Ok(PatternEnsemble {
        dim,
        mode: PatternMode::FixedWeight { active: c_active },
        master_seed: seed,
        patterns,
    })
}

/// `M` block messages, one uniform neuron per block.
pub fn gen_gb(layout: BlockLayout, m: usize, seed: u64) -> Result<PatternEnsemble> {
    check_count(m)?;
    let patterns = build(m, seed, |rng| {
        let active = (0..layout.blocks())
            .map(|a| layout.index(a, rng.random_range(0..layout.block_size())) as u32)
            .collect();
        SparsePattern::from_sorted_unchecked(layout.dim(), active)
    });
    Ok(PatternEnsemble {
        dim: layout.dim(),
        mode: PatternMode::GbBlock(layout),
        master_seed: seed,
        patterns,
    })
}
