use super::SparsePattern;

/// Fixed-width bit-block view of a pattern for word-parallel overlaps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitBlocks {
    dim: usize,
    words: Vec<u64>,
}

impl BitBlocks {
    pub fn from_pattern(p: &SparsePattern) -> Self {
        let mut words = vec![0u64; p.dim().div_ceil(64)];
        for &i in p.active() {
            words[i as usize / 64] |= 1 << (i % 64);
        }
        BitBlocks { dim: p.dim(), words }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize) -> bool {
        i < self.dim && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Same contract as [`super::overlap`]; panics on dimension mismatch.
    pub fn overlap(&self, other: &BitBlocks, exclude: Option<usize>) -> usize {
        assert_eq!(self.dim, other.dim, "bit block dimension mismatch");
        let shared: usize = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum();
        match exclude {
            Some(j) if self.get(j) && other.get(j) => shared - 1,
            _ => shared,
        }
    }

    pub fn to_pattern(&self) -> SparsePattern {
        let mut active = Vec::with_capacity(self.count_ones());
        for (w, &word) in self.words.iter().enumerate() {
            let mut bits = word;
            while bits != 0 {
                active.push((w * 64) as u32 + bits.trailing_zeros());
                bits &= bits - 1;
            }
        }
        SparsePattern::from_sorted_unchecked(self.dim, active)
    }
}
