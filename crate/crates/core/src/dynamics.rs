//! Thresholds, the synchronous one-step map and the fixed-point test.

use serde::{Deserialize, Serialize};

use crate::combinatorics::{binomial, log_binomial, Count};
use crate::error::{Error, Result};
use crate::fields::{Convention, FieldEvaluator, FieldVector, InteractionOrder, ModelKind, ModelSpec};
use crate::patterns::{PatternEnsemble, SparsePattern};

/// Relative width of the band in which a log-space comparison is refused.
pub const LOG_TIE_TOLERANCE: f64 = 1e-12;

/// Activation threshold `h` in a given counting convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub value: f64,
    pub ln_value: f64,
    pub convention: Convention,
    /// `floor(h)` when it fits; integer fields exceed `h` iff they exceed it.
    floor: Option<Count>,
}

impl Threshold {
    fn from_value(value: f64, convention: Convention) -> Result<Self> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::Domain(format!("threshold {value} is not finite and >= 0")));
        }
        Ok(Threshold {
            value,
            ln_value: value.ln(),
            convention,
            floor: (value < 2f64.powi(127)).then(|| value.floor() as Count),
        })
    }

    fn from_log(ln_value: f64, convention: Convention) -> Self {
        Threshold {
            value: ln_value.exp(),
            ln_value,
            convention,
            floor: None,
        }
    }

    /// `Θ(S - h)`: strict `S > h`.
    pub fn is_exceeded_by(&self, field: Count, neuron: usize) -> Result<bool> {
        match self.floor {
            Some(f) => Ok(field > f),
            None if field == 0 => Ok(false),
            None => self.is_exceeded_by_log((field as f64).ln(), neuron),
        }
    }

    /// Compares `ln S` against `ln h`, refusing inside the tie band.
    pub fn is_exceeded_by_log(&self, ln_field: f64, neuron: usize) -> Result<bool> {
        if ln_field == f64::NEG_INFINITY {
            return Ok(false);
        }
        let band = LOG_TIE_TOLERANCE * self.ln_value.abs().max(1.0);
        if (ln_field - self.ln_value).abs() <= band {
            return Err(Error::ThresholdTie { neuron });
        }
        Ok(ln_field > self.ln_value)
    }
}

/// Threshold paired with `spec` at system size `dim`.
///
/// Amari and Willshaw use `γ (ln N)^{n-1}` for fixed order and
/// `(γ ln N)^{n-1}` for logarithmic order; GB uses `γ C(l-1, n-1)`.
pub fn threshold_for(spec: &ModelSpec, dim: usize) -> Result<Threshold> {
    let n = spec.resolved_order(dim)?;
    let ln_n = (dim as f64).ln();
    let exp = (n - 1) as i32;
    match spec.kind {
        ModelKind::Amari | ModelKind::Willshaw => {
            let value = match spec.order {
                InteractionOrder::Fixed(_) => spec.gamma * ln_n.powi(exp),
                InteractionOrder::Logarithmic(_) => (spec.gamma * ln_n).powi(exp),
            };
            Threshold::from_value(value, Convention::OrderedTuples)
        }
        ModelKind::Gb => {
            let layout = spec.layout.ok_or(Error::NotBlockEnsemble)?;
            let (others, k) = ((layout.blocks() - 1) as u64, (n - 1) as u64);
            match binomial(others, k) {
                Ok(c) if c <= 1 << 53 => {
                    Threshold::from_value(spec.gamma * c as f64, Convention::UnorderedSubsets)
                }
                _ => Ok(Threshold::from_log(
                    spec.gamma.ln() + log_binomial(others, k)?,
                    Convention::UnorderedSubsets,
                )),
            }
        }
    }
}

/// Applies `Θ(S_i - h)` to every coordinate of a field vector.
pub fn apply_threshold(field: &FieldVector, h: &Threshold) -> Result<SparsePattern> {
    if field.convention != h.convention {
        return Err(Error::ConventionMismatch {
            field: field.convention,
            threshold: h.convention,
        });
    }
    let mut active = Vec::new();
    for (i, &s) in field.values.iter().enumerate() {
        if h.is_exceeded_by(s, i)? {
            active.push(i as u32);
        }
    }
    SparsePattern::new(field.dim(), active)
}

/// One synchronous update `T(probe)` using an existing evaluator.
pub fn one_step_with(
    evaluator: &FieldEvaluator<'_>,
    probe: &SparsePattern,
    spec: &ModelSpec,
) -> Result<SparsePattern> {
    let field = evaluator.field(probe, spec)?;
    let h = threshold_for(spec, evaluator.ensemble().dim())?;
    apply_threshold(&field, &h)
}

/// One synchronous update `T(probe)`.
pub fn one_step(ensemble: &PatternEnsemble, probe: &SparsePattern, spec: &ModelSpec) -> Result<SparsePattern> {
    one_step_with(&FieldEvaluator::new(ensemble), probe, spec)
}

/// Outcome of a fixed-point test, with the neurons that flipped.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub stable: bool,
    /// Active in the pattern, inactive after the update.
    pub turned_off: Vec<usize>,
    /// Inactive in the pattern, active after the update.
    pub turned_on: Vec<usize>,
}

impl FixedPointReport {
    fn compare(before: &SparsePattern, after: &SparsePattern) -> Self {
        let mut turned_off = Vec::new();
        let mut turned_on = Vec::new();
        let (a, b) = (before.active(), after.active());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            match (a.get(i), b.get(j)) {
                (Some(&x), Some(&y)) if x == y => {
                    i += 1;
                    j += 1;
                }
                (Some(&x), Some(&y)) if x < y => {
                    turned_off.push(x as usize);
                    i += 1;
                }
                (Some(&x), None) => {
                    turned_off.push(x as usize);
                    i += 1;
                }
                (_, Some(&y)) => {
                    turned_on.push(y as usize);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        FixedPointReport {
            stable: turned_off.is_empty() && turned_on.is_empty(),
            turned_off,
            turned_on,
        }
    }
}

pub fn is_fixed_point_with(
    evaluator: &FieldEvaluator<'_>,
    pattern: &SparsePattern,
    spec: &ModelSpec,
) -> Result<FixedPointReport> {
    let after = one_step_with(evaluator, pattern, spec)?;
    Ok(FixedPointReport::compare(pattern, &after))
}

/// Whether `T(pattern) = pattern`, listing every flipped neuron.
pub fn is_fixed_point(ensemble: &PatternEnsemble, pattern: &SparsePattern, spec: &ModelSpec) -> Result<FixedPointReport> {
    is_fixed_point_with(&FieldEvaluator::new(ensemble), pattern, spec)
}

/// `|d - ln N| <= (1 - δ) ln N` for the active count `d` of `pattern`.
pub fn a_delta_holds(pattern: &SparsePattern, dim: usize, delta: f64) -> Result<bool> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0,1), got {delta}")));
    }
    if dim < 2 {
        return Err(Error::InvalidDimension(format!("dim {dim}")));
    }
    let ln_n = (dim as f64).ln();
    Ok((pattern.weight() as f64 - ln_n).abs() <= (1.0 - delta) * ln_n)
}
