//! Local fields of the three model families.
//!
//! None of the evaluators materialize the order-`n` weight tensor. Amari
//! fields come from one sorted-merge overlap per stored pattern; clipped
//! (Willshaw and GB) fields enumerate the `(n-1)`-subsets of the probe and
//! test each for coverage against per-neuron posting lists.

mod index;
mod oracle;

pub use index::{have_common_element, intersect_into, PostingIndex};
pub use oracle::{field_oracle, ORACLE_MAX_DIM, ORACLE_MAX_ORDER};

use std::sync::OnceLock;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, falling_factorial, log_binomial, Count, FactorialTable, MAX_FACTORIAL_ARG};
use crate::error::{Error, Result};
use crate::patterns::{block_agreement, merge_count, BlockLayout, PatternEnsemble, SparsePattern};
use crate::seed;

/// Default cap on the number of subsets a clipped evaluator may enumerate.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Amari,
    Willshaw,
    Gb,
}

impl ModelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ModelKind::Amari => "amari",
            ModelKind::Willshaw => "willshaw",
            ModelKind::Gb => "gb",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "amari" => Ok(ModelKind::Amari),
            "willshaw" => Ok(ModelKind::Willshaw),
            "gb" => Ok(ModelKind::Gb),
            _ => Err(Error::InvalidParameter(format!("unknown model `{s}`"))),
        }
    }
}

/// Interaction order: fixed, or growing as `κ ln N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InteractionOrder {
    Fixed(usize),
    Logarithmic(f64),
}

impl InteractionOrder {
    /// Order used at system size `dim`: `round(κ ln N)` clamped to at least 2.
    pub fn resolve(&self, dim: usize) -> Result<usize> {
        match *self {
            InteractionOrder::Fixed(n) if n >= 2 => Ok(n),
            InteractionOrder::Fixed(n) => Err(Error::InvalidParameter(format!(
                "interaction order must be >= 2, got {n}"
            ))),
            InteractionOrder::Logarithmic(kappa) => {
                if !(kappa > 0.0 && kappa < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "kappa must lie in (0,1), got {kappa}"
                    )));
                }
                if dim < 2 {
                    return Err(Error::InvalidDimension(format!("dim {dim}")));
                }
                Ok(((kappa * (dim as f64).ln()).round() as usize).max(2))
            }
        }
    }

    pub fn kappa(&self) -> Option<f64> {
        match *self {
            InteractionOrder::Logarithmic(k) => Some(k),
            InteractionOrder::Fixed(_) => None,
        }
    }
}

/// Model family, order rule and threshold parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub order: InteractionOrder,
    pub gamma: f64,
    pub layout: Option<BlockLayout>,
}

impl ModelSpec {
    pub fn new(
        kind: ModelKind,
        order: InteractionOrder,
        gamma: f64,
        layout: Option<BlockLayout>,
    ) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in (0,1), got {gamma}"
            )));
        }
        match (kind, layout) {
            (ModelKind::Gb, None) => {
                return Err(Error::InvalidParameter("GB model needs a block layout".into()))
            }
            (ModelKind::Amari | ModelKind::Willshaw, Some(_)) => {
                return Err(Error::InvalidParameter(format!(
                    "{} model takes no block layout",
                    kind.as_str()
                )))
            }
            _ => {}
        }
        if let InteractionOrder::Fixed(n) = order {
            if n < 2 {
                return Err(Error::InvalidParameter(format!(
                    "interaction order must be >= 2, got {n}"
                )));
            }
        }
        if let InteractionOrder::Logarithmic(k) = order {
            if !(k > 0.0 && k < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "kappa must lie in (0,1), got {k}"
                )));
            }
        }
        Ok(ModelSpec {
            kind,
            order,
            gamma,
            layout,
        })
    }

    pub fn convention(&self) -> Convention {
        match self.kind {
            ModelKind::Gb => Convention::UnorderedSubsets,
            _ => Convention::OrderedTuples,
        }
    }

    /// Checks the spec against a system size and returns the resolved order.
    pub fn resolved_order(&self, dim: usize) -> Result<usize> {
        if let Some(layout) = self.layout {
            if layout.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: layout.dim(),
                    found: dim,
                });
            }
        }
        let n = self.order.resolve(dim)?;
        if let Some(layout) = self.layout {
            if n > layout.blocks() {
                return Err(Error::InvalidParameter(format!(
                    "order {n} exceeds the block count {}",
                    layout.blocks()
                )));
            }
        }
        Ok(n)
    }
}

/// Whether a field counts ordered tuples or unordered subsets of partners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Convention {
    OrderedTuples,
    UnorderedSubsets,
}

/// Exact local fields, one per neuron.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldVector {
    pub convention: Convention,
    pub values: Vec<Count>,
}

impl FieldVector {
    pub fn dim(&self) -> usize {
        self.values.len()
    }
}

/// Monte Carlo estimate of one GB field value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// Fraction of sampled block subsets that were covered.
    pub covered_fraction: f64,
    /// `ln C(l-1, n-1)`, the total number of block subsets.
    pub log_subsets: f64,
}

impl FieldEstimate {
    /// `ln` of the estimated field; `-inf` when nothing was covered.
    pub fn log_mean(&self) -> f64 {
        self.covered_fraction.ln() + self.log_subsets
    }
}

/// Field evaluator over one immutable ensemble.
///
/// The posting-list index is built lazily on first use of a clipped
/// evaluator and shared afterwards, so one evaluator may be used from
/// several threads.
#[derive(Debug)]
pub struct FieldEvaluator<'a> {
    ensemble: &'a PatternEnsemble,
    index: OnceLock<PostingIndex>,
    budget: u128,
}

fn check_order(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "interaction order must be >= 2, got {n}"
        )));
    }
    Ok(())
}

fn checked_add(a: &mut Count, b: Count) -> Result<()> {
    *a = a.checked_add(b).ok_or(Error::Overflow("field accumulation"))?;
    Ok(())
}

impl<'a> FieldEvaluator<'a> {
    pub fn new(ensemble: &'a PatternEnsemble) -> Self {
        FieldEvaluator {
            ensemble,
            index: OnceLock::new(),
            budget: DEFAULT_ENUMERATION_BUDGET,
        }
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    pub fn ensemble(&self) -> &PatternEnsemble {
        self.ensemble
    }

    pub fn index(&self) -> &PostingIndex {
        self.index.get_or_init(|| PostingIndex::build(self.ensemble))
    }

    fn check_probe(&self, probe: &SparsePattern) -> Result<()> {
        if probe.dim() != self.ensemble.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ensemble.dim(),
                found: probe.dim(),
            });
        }
        Ok(())
    }

    fn gb_layout(&self) -> Result<BlockLayout> {
        self.ensemble.layout().ok_or(Error::NotBlockEnsemble)
    }

    /// Field of the model named by `spec`, in that model's convention.
    pub fn field(&self, probe: &SparsePattern, spec: &ModelSpec) -> Result<FieldVector> {
        let n = spec.resolved_order(self.ensemble.dim())?;
        match spec.kind {
            ModelKind::Amari => self.amari(probe, n),
            ModelKind::Willshaw => self.willshaw(probe, n),
            ModelKind::Gb => self.gb(probe, n),
        }
    }

    /// Hebbian-tensor field, ordered-tuple count.
    ///
    /// `S_i = Σ_μ ξ_i^μ (o_μ^{(i)})_{n-1}` where `o_μ^{(i)}` is the overlap of
    /// the probe with pattern `μ` excluding `i`.
    pub fn amari(&self, probe: &SparsePattern, n: usize) -> Result<FieldVector> {
        check_order(n)?;
        self.check_probe(probe)?;
        let k = (n - 1) as u64;
        let dense = probe.to_bits();
        let mut values = vec![0 as Count; self.ensemble.dim()];
        for p in self.ensemble.patterns() {
            let o = merge_count(probe.active(), p.active()) as u64;
            if o < k {
                continue;
            }
            // i outside the probe keeps the full overlap; inside it loses itself
            let outside = falling_factorial(o, k)?;
            let inside = falling_factorial(o - 1, k)?;
            for &i in p.active() {
                let add = if dense.get(i as usize) { inside } else { outside };
                checked_add(&mut values[i as usize], add)?;
            }
        }
        Ok(FieldVector {
            convention: Convention::OrderedTuples,
            values,
        })
    }

    /// Clipped-weight field, ordered-tuple count: `(n-1)!` times the number
    /// of `(n-1)`-subsets of the probe that some stored pattern containing
    /// `i` covers.
    pub fn willshaw(&self, probe: &SparsePattern, n: usize) -> Result<FieldVector> {
        check_order(n)?;
        self.check_probe(probe)?;
        if n - 1 > MAX_FACTORIAL_ARG {
            return Err(Error::Overflow("(n-1)!"));
        }
        let required = binomial(probe.weight() as u64, (n - 1) as u64).unwrap_or(Count::MAX);
        if required > self.budget {
            return Err(Error::BudgetExceeded {
                required,
                budget: self.budget,
            });
        }
        let counts = self.clipped_counts(probe, n - 1, None);
        let perms = FactorialTable::new(n - 1)?.get(n - 1)?;
        let values = counts
            .into_iter()
            .map(|c| Count::from(c).checked_mul(perms).ok_or(Error::Overflow("willshaw field")))
            .collect::<Result<Vec<_>>>()?;
        Ok(FieldVector {
            convention: Convention::OrderedTuples,
            values,
        })
    }

    /// GB field, unordered-subset count: for neuron `(a,k)`, the number of
    /// sets of `n-1` probe-active neurons in distinct blocks other than `a`
    /// that form a stored hyperedge together with `(a,k)`.
    ///
    /// For one-per-block probes this is the number of covered block subsets.
    pub fn gb(&self, probe: &SparsePattern, n: usize) -> Result<FieldVector> {
        check_order(n)?;
        self.check_probe(probe)?;
        let layout = self.gb_layout()?;
        let required = distinct_block_selections(probe, layout, n - 1);
        if required > self.budget {
            return Err(Error::BudgetExceeded {
                required,
                budget: self.budget,
            });
        }
        let values = self
            .clipped_counts(probe, n - 1, Some(layout))
            .into_iter()
            .map(Count::from)
            .collect();
        Ok(FieldVector {
            convention: Convention::UnorderedSubsets,
            values,
        })
    }

    /// For every neuron, counts the `k`-subsets `T` of the probe's active set
    /// (in distinct blocks when `layout` is given) such that some stored
    /// pattern contains `T` and the neuron, with the neuron outside `T`.
    fn clipped_counts(&self, probe: &SparsePattern, k: usize, layout: Option<BlockLayout>) -> Vec<u64> {
        let dim = self.ensemble.dim();
        let mut walk = CoverWalk {
            index: self.index(),
            patterns: self.ensemble.patterns(),
            candidates: probe.active(),
            layout,
            k,
            counts: vec![0; dim],
            stamp: vec![0; dim],
            epoch: 0,
            chosen: Vec::with_capacity(k),
            in_subset: vec![false; dim],
            covers: vec![Vec::new(); k + 1],
        };
        walk.descend(0);
        walk.counts
    }

    /// `Σ_ν 1{ν ∋ neuron} C(X_ν, n-1)`, with `X_ν` the number of blocks other
    /// than the neuron's own on which message `ν` agrees with the probe.
    pub fn gb_upper_bound(&self, probe: &SparsePattern, n: usize, neuron: usize) -> Result<Count> {
        check_order(n)?;
        self.check_probe(probe)?;
        let layout = self.gb_layout()?;
        if !layout.is_one_per_block(probe) {
            return Err(Error::ProbeNotBlockStructured);
        }
        if neuron >= layout.dim() {
            return Err(Error::InvalidParameter(format!("neuron {neuron} out of range")));
        }
        let own = layout.block_of(neuron);
        let patterns = self.ensemble.patterns();
        let mut total: Count = 0;
        for &nu in self.index().get(neuron) {
            let agree = block_agreement(&patterns[nu as usize], probe, Some(own));
            checked_add(&mut total, binomial(agree as u64, (n - 1) as u64)?)?;
        }
        Ok(total)
    }

    /// Estimates the GB field at `neuron` by sampling block subsets.
    pub fn gb_montecarlo(
        &self,
        probe: &SparsePattern,
        n: usize,
        neuron: usize,
        samples: usize,
        seed: u64,
    ) -> Result<FieldEstimate> {
        check_order(n)?;
        self.check_probe(probe)?;
        if samples == 0 {
            return Err(Error::InvalidParameter("samples must be positive".into()));
        }
        let layout = self.gb_layout()?;
        if !layout.is_one_per_block(probe) {
            return Err(Error::ProbeNotBlockStructured);
        }
        if neuron >= layout.dim() {
            return Err(Error::InvalidParameter(format!("neuron {neuron} out of range")));
        }
        let others = layout.blocks() - 1;
        let k = n - 1;
        if k > others {
            return Ok(FieldEstimate {
                mean: 0.0,
                std_error: 0.0,
                covered_fraction: 0.0,
                log_subsets: f64::NEG_INFINITY,
            });
        }
        let log_subsets = log_binomial(others as u64, k as u64)?;
        let index = self.index();
        let own_list = index.get(neuron);
        let own_block = layout.block_of(neuron);
        let mut covered = 0usize;
        if !own_list.is_empty() {
            let mut rng = seed::stream(seed, neuron as u64);
            let mut lists: Vec<&[u32]> = Vec::with_capacity(k + 1);
            for _ in 0..samples {
                lists.clear();
                lists.push(own_list);
                for b in sample(&mut rng, others, k) {
                    let block = if b >= own_block { b + 1 } else { b };
                    lists.push(index.get(probe.active()[block] as usize));
                }
                if have_common_element(&mut lists) {
                    covered += 1;
                }
            }
        }
        let f = covered as f64 / samples as f64;
        let scale = log_subsets.exp();
        Ok(FieldEstimate {
            mean: f * scale,
            std_error: scale * (f * (1.0 - f) / samples as f64).sqrt(),
            covered_fraction: f,
            log_subsets,
        })
    }
}

/// Number of ways to pick `k` probe-active neurons in pairwise distinct
/// blocks, saturating at `u128::MAX`.
fn distinct_block_selections(probe: &SparsePattern, layout: BlockLayout, k: usize) -> u128 {
    let mut per_block = vec![0u128; layout.blocks()];
    for &i in probe.active() {
        per_block[layout.block_of(i as usize)] += 1;
    }
    // elementary symmetric polynomial e_k of the per-block counts
    let mut e = vec![0u128; k + 1];
    e[0] = 1;
    for &c in per_block.iter().filter(|&&c| c > 0) {
        for j in (1..=k).rev() {
            e[j] = e[j].saturating_add(e[j - 1].saturating_mul(c));
        }
    }
    e[k]
}

/// Depth-first walk over the `k`-subsets of the probe, carrying the running
/// intersection of posting lists so empty branches are pruned early.
struct CoverWalk<'x> {
    index: &'x PostingIndex,
    patterns: &'x [SparsePattern],
    candidates: &'x [u32],
    layout: Option<BlockLayout>,
    k: usize,
    counts: Vec<u64>,
    stamp: Vec<u64>,
    epoch: u64,
    chosen: Vec<u32>,
    in_subset: Vec<bool>,
    // covers[d] = patterns containing the first d chosen neurons (d >= 1)
    covers: Vec<Vec<u32>>,
}

impl CoverWalk<'_> {
    fn descend(&mut self, start: usize) {
        let depth = self.chosen.len();
        if depth == self.k {
            self.tally();
            return;
        }
        // leave room for the remaining picks
        let remaining = self.k - depth;
        if self.candidates.len() < start + remaining {
            return;
        }
        for pos in start..=self.candidates.len() - remaining {
            let j = self.candidates[pos];
            if let (Some(layout), Some(&last)) = (self.layout, self.chosen.last()) {
                if layout.block_of(j as usize) == layout.block_of(last as usize) {
                    continue;
                }
            }
            let postings = self.index.get(j as usize);
            let mut next = std::mem::take(&mut self.covers[depth + 1]);
            if depth == 0 {
                next.clear();
                next.extend_from_slice(postings);
            } else {
                intersect_into(&self.covers[depth], postings, &mut next);
            }
            let empty = next.is_empty();
            self.covers[depth + 1] = next;
            if empty {
                continue;
            }
            self.chosen.push(j);
            self.in_subset[j as usize] = true;
            self.descend(pos + 1);
            self.in_subset[j as usize] = false;
            self.chosen.pop();
        }
    }

    fn tally(&mut self) {
        self.epoch += 1;
        for &mu in &self.covers[self.k] {
            for &i in self.patterns[mu as usize].active() {
                let i = i as usize;
                if self.stamp[i] != self.epoch && !self.in_subset[i] {
                    self.stamp[i] = self.epoch;
                    self.counts[i] += 1;
                }
            }
        }
    }
}

/// Hebbian-tensor field; see [`FieldEvaluator::amari`].
pub fn field_amari(ensemble: &PatternEnsemble, probe: &SparsePattern, n: usize) -> Result<FieldVector> {
    FieldEvaluator::new(ensemble).amari(probe, n)
}

/// Clipped-weight field; see [`FieldEvaluator::willshaw`].
pub fn field_willshaw(ensemble: &PatternEnsemble, probe: &SparsePattern, n: usize) -> Result<FieldVector> {
    FieldEvaluator::new(ensemble).willshaw(probe, n)
}

/// GB field; see [`FieldEvaluator::gb`].
pub fn field_gb(ensemble: &PatternEnsemble, probe: &SparsePattern, n: usize) -> Result<FieldVector> {
    FieldEvaluator::new(ensemble).gb(probe, n)
}

pub fn field_gb_upper_bound(
    ensemble: &PatternEnsemble,
    probe: &SparsePattern,
    n: usize,
    neuron: usize,
) -> Result<Count> {
    FieldEvaluator::new(ensemble).gb_upper_bound(probe, n, neuron)
}

pub fn field_gb_montecarlo(
    ensemble: &PatternEnsemble,
    probe: &SparsePattern,
    n: usize,
    neuron: usize,
    samples: usize,
    seed: u64,
) -> Result<FieldEstimate> {
    FieldEvaluator::new(ensemble).gb_montecarlo(probe, n, neuron, samples, seed)
}
