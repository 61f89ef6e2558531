//! Brute-force local fields straight from the defining sums.
//!
//! Enumerates every ordered tuple `(j_1, ..., j_{n-1})` of pairwise distinct
//! indices different from `i`, evaluates the weight `W_{i, j_1, ...}` from the
//! stored patterns and sums `σ_{j_1} ... σ_{j_{n-1}} W`. Exponential in `n`;
//! only meant for cross-checking the fast evaluators on tiny systems.

use super::{Convention, FieldVector, ModelKind};
use crate::combinatorics::{factorial, Count};
use crate::error::{Error, Result};
use crate::patterns::{PatternEnsemble, SparsePattern};

/// Largest system the oracle accepts (6 blocks of 3 for GB).
pub const ORACLE_MAX_DIM: usize = 18;
pub const ORACLE_MAX_ORDER: usize = 4;

pub fn field_oracle(
    ensemble: &PatternEnsemble,
    probe: &SparsePattern,
    n: usize,
    kind: ModelKind,
) -> Result<FieldVector> {
    let dim = ensemble.dim();
    if dim > ORACLE_MAX_DIM || n > ORACLE_MAX_ORDER {
        return Err(Error::OracleTooLarge(format!(
            "N={dim}, n={n}; the oracle allows N <= {ORACLE_MAX_DIM}, n <= {ORACLE_MAX_ORDER}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!("order {n} < 2")));
    }
    if probe.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: probe.dim(),
        });
    }
    let layout = match kind {
        ModelKind::Gb => Some(ensemble.layout().ok_or(Error::NotBlockEnsemble)?),
        _ => None,
    };
    let xi: Vec<Vec<bool>> = ensemble.patterns().iter().map(|p| p.to_dense()).collect();
    let sigma = probe.to_dense();

    // W for the index tuple `sites`, from its definition
    let weight = |sites: &[usize]| -> Count {
        let hebb: Count = xi
            .iter()
            .filter(|x| sites.iter().all(|&s| x[s]))
            .count() as Count;
        match kind {
            ModelKind::Amari => hebb,
            ModelKind::Willshaw => Count::from(hebb >= 1),
            ModelKind::Gb => {
                let layout = layout.expect("checked above");
                let distinct_blocks = sites.iter().enumerate().all(|(a, &s)| {
                    sites[..a]
                        .iter()
                        .all(|&t| layout.block_of(t) != layout.block_of(s))
                });
                Count::from(distinct_blocks && hebb >= 1)
            }
        }
    };

    let mut values = vec![0 as Count; dim];
    let mut sites = Vec::with_capacity(n);
    for (i, value) in values.iter_mut().enumerate() {
        sites.clear();
        sites.push(i);
        *value = sum_tuples(dim, n, &sigma, &mut sites, &weight);
    }

    let convention = match kind {
        ModelKind::Gb => {
            let perms = factorial((n - 1) as u64)?;
            for v in values.iter_mut() {
                debug_assert_eq!(*v % perms, 0);
                *v /= perms;
            }
            Convention::UnorderedSubsets
        }
        _ => Convention::OrderedTuples,
    };
    Ok(FieldVector { convention, values })
}

fn sum_tuples(
    dim: usize,
    n: usize,
    sigma: &[bool],
    sites: &mut Vec<usize>,
    weight: &dyn Fn(&[usize]) -> Count,
) -> Count {
    if sites.len() == n {
        let spins: Count = sites[1..].iter().map(|&j| Count::from(sigma[j])).product();
        return if spins == 0 { 0 } else { spins * weight(sites) };
    }
    let mut total = 0;
    for j in 0..dim {
        if sites.contains(&j) {
            continue;
        }
        sites.push(j);
        total += sum_tuples(dim, n, sigma, sites, weight);
        sites.pop();
    }
    total
}
