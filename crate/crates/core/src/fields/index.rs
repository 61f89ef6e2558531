//! Inverted posting lists: neuron -> ascending ids of the patterns using it.

use crate::patterns::PatternEnsemble;

#[derive(Debug, Clone)]
pub struct PostingIndex {
    lists: Vec<Vec<u32>>,
}

impl PostingIndex {
    pub fn build(ensemble: &PatternEnsemble) -> Self {
        let mut lists = vec![Vec::new(); ensemble.dim()];
        for (mu, p) in ensemble.patterns().iter().enumerate() {
            for &i in p.active() {
                lists[i as usize].push(mu as u32);
            }
        }
        PostingIndex { lists }
    }

    pub fn get(&self, neuron: usize) -> &[u32] {
        &self.lists[neuron]
    }
}

/// First position in `list[from..]` holding a value `>= target`, found by
/// exponential then binary search. Returns an absolute index.
#[inline]
pub fn gallop(list: &[u32], from: usize, target: u32) -> usize {
    let rest = &list[from..];
    if rest.first().is_none_or(|&x| x >= target) {
        return from;
    }
    let mut hi = 1;
    while hi < rest.len() && rest[hi] < target {
        hi *= 2;
    }
    let lo = hi / 2;
    let hi = hi.min(rest.len());
    from + lo + rest[lo..hi].partition_point(|&x| x < target)
}

/// Writes `small ∩ large` into `out`, galloping through `large`.
pub fn intersect_into(small: &[u32], large: &[u32], out: &mut Vec<u32>) {
    out.clear();
    let (small, large) = if small.len() <= large.len() {
        (small, large)
    } else {
        (large, small)
    };
    let mut pos = 0;
    for &x in small {
        pos = gallop(large, pos, x);
        if pos == large.len() {
            break;
        }
        if large[pos] == x {
            out.push(x);
            pos += 1;
        }
    }
}

/// True iff all `lists` share at least one element. Lists are processed
/// shortest first and the scan stops as soon as the candidate set empties.
pub fn have_common_element(lists: &mut [&[u32]]) -> bool {
    if lists.is_empty() {
        return true;
    }
    lists.sort_unstable_by_key(|l| l.len());
    let mut acc = lists[0].to_vec();
    let mut tmp = Vec::with_capacity(acc.len());
    for l in &lists[1..] {
        if acc.is_empty() {
            return false;
        }
        intersect_into(&acc, l, &mut tmp);
        std::mem::swap(&mut acc, &mut tmp);
    }
    !acc.is_empty()
}
