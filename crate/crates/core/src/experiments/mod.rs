//! Monte Carlo fixed-point stability experiments and parameter sweeps.
//!
//! A trial draws a fresh ensemble of `M = capacity_for(rule, dims)` patterns
//! and checks whether the first stored pattern survives one synchronous
//! update. Trials are keyed by `derive_seed(master_seed, trial)`, so an
//! estimate does not depend on how many worker threads ran it.

mod capacity;
mod stats;

pub use capacity::{
    capacity_for, capacity_for_capped, CapacityFamily, CapacityRule, Dims, DEFAULT_CAPACITY_CAP,
};
pub use stats::{wilson_interval, StabilityEstimate, Z_95};

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{a_delta_holds, is_fixed_point_with};
use crate::error::{Error, Result};
use crate::fields::{FieldEvaluator, ModelKind, ModelSpec, DEFAULT_ENUMERATION_BUDGET};
use crate::patterns::{default_sparsity, gen_bernoulli, gen_fixed_weight, gen_gb, PatternEnsemble};
use crate::seed::derive_seed;

/// Pattern distribution for the non-block models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternDistribution {
    /// i.i.d. coordinates with `p = ln N / N`.
    #[default]
    Bernoulli,
    /// Exactly `round(ln N)` active neurons.
    Fixed,
}

impl PatternDistribution {
    pub fn as_str(&self) -> &'static str {
        match self {
            PatternDistribution::Bernoulli => "bernoulli",
            PatternDistribution::Fixed => "fixed",
        }
    }
}

/// Default `δ` for the logged `A_δ` event.
pub const DEFAULT_DELTA: f64 = 0.5;

/// Everything a stability trial needs besides its seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Experiment {
    pub spec: ModelSpec,
    pub rule: CapacityRule,
    pub dims: Dims,
    pub patterns: PatternDistribution,
    pub delta: f64,
    pub budget: u128,
    pub capacity_cap: u64,
}

impl Experiment {
    pub fn new(spec: ModelSpec, rule: CapacityRule, dims: Dims) -> Self {
        Experiment {
            spec,
            rule,
            dims,
            patterns: PatternDistribution::default(),
            delta: DEFAULT_DELTA,
            budget: DEFAULT_ENUMERATION_BUDGET,
            capacity_cap: DEFAULT_CAPACITY_CAP,
        }
    }

    /// Checks consistency and returns `(resolved order, M)`.
    pub fn resolve(&self) -> Result<(usize, usize)> {
        let is_gb = self.spec.kind == ModelKind::Gb;
        if is_gb != matches!(self.dims, Dims::Blocks(_)) {
            return Err(Error::InvalidParameter(
                "GB models need block dims and the other models flat dims".into(),
            ));
        }
        if self.spec.layout != self.dims.layout() {
            return Err(Error::InvalidParameter("model layout differs from the dims".into()));
        }
        if CapacityRule::for_model(&self.spec, self.rule.alpha)?.family != self.rule.family {
            return Err(Error::InvalidParameter(format!(
                "capacity family {} does not match the model",
                self.rule.family.name()
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParameter(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        let n = self.spec.resolved_order(self.dims.dim())?;
        let m = capacity_for_capped(&self.rule, self.dims, self.capacity_cap)?;
        Ok((n, m))
    }

    fn ensemble(&self, m: usize, seed: u64) -> Result<PatternEnsemble> {
        let dim = self.dims.dim();
        match self.dims {
            Dims::Blocks(layout) => gen_gb(layout, m, seed),
            Dims::Flat(_) => match self.patterns {
                PatternDistribution::Bernoulli => gen_bernoulli(dim, default_sparsity(dim)?, m, seed),
                PatternDistribution::Fixed => {
                    let c = ((dim as f64).ln().round() as usize).clamp(1, dim);
                    gen_fixed_weight(dim, c, m, seed)
                }
            },
        }
    }

    /// One trial: fresh ensemble, fixed-point test of its first pattern.
    pub fn run_trial(&self, trial_seed: u64) -> Result<TrialOutcome> {
        let (_, m) = self.resolve()?;
        let ensemble = self.ensemble(m, trial_seed)?;
        let evaluator = FieldEvaluator::new(&ensemble).with_budget(self.budget);
        let first = &ensemble.patterns()[0];
        let report = is_fixed_point_with(&evaluator, first, &self.spec)?;
        Ok(TrialOutcome {
            stable: report.stable,
            turned_off: report.turned_off.len(),
            turned_on: report.turned_on.len(),
            a_delta: a_delta_holds(first, self.dims.dim(), self.delta)?,
            zero_patterns: ensemble.zero_count(),
        })
    }

    /// Runs `trials` independent trials on the current rayon pool.
    pub fn estimate(&self, trials: u64, master_seed: u64) -> Result<StabilityRun> {
        if trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        self.resolve()?;
        let outcomes: Vec<Result<TrialOutcome>> = (0..trials)
            .into_par_iter()
            .map(|t| {
                self.run_trial(derive_seed(master_seed, t))
                    .map_err(|e| Error::Trial {
                        trial: t,
                        source: Box::new(e),
                    })
            })
            .collect();
        let mut run = StabilityRun::default();
        for o in outcomes {
            let o = o?;
            run.successes += u64::from(o.stable);
            run.a_delta_count += u64::from(o.a_delta);
            run.zero_patterns += o.zero_patterns as u64;
            run.turned_on += o.turned_on as u64;
            run.turned_off += o.turned_off as u64;
        }
        run.estimate = StabilityEstimate::from_counts(run.successes, trials)?;
        Ok(run)
    }
}

/// Result of a single stability trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub stable: bool,
    pub turned_off: usize,
    pub turned_on: usize,
    pub a_delta: bool,
    pub zero_patterns: usize,
}

/// Aggregate over the trials of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityRun {
    pub estimate: StabilityEstimate,
    pub successes: u64,
    pub a_delta_count: u64,
    pub zero_patterns: u64,
    pub turned_on: u64,
    pub turned_off: u64,
}

impl Default for StabilityRun {
    fn default() -> Self {
        StabilityRun {
            estimate: StabilityEstimate {
                trials: 0,
                successes: 0,
                rate: 0.0,
                ci_low: 0.0,
                ci_high: 0.0,
            },
            successes: 0,
            a_delta_count: 0,
            zero_patterns: 0,
            turned_on: 0,
            turned_off: 0,
        }
    }
}

pub fn run_stability_trial(
    spec: ModelSpec,
    rule: CapacityRule,
    dims: Dims,
    trial_seed: u64,
) -> Result<TrialOutcome> {
    Experiment::new(spec, rule, dims).run_trial(trial_seed)
}

pub fn estimate_stability(
    spec: ModelSpec,
    rule: CapacityRule,
    dims: Dims,
    trials: u64,
    master_seed: u64,
) -> Result<StabilityEstimate> {
    Ok(Experiment::new(spec, rule, dims).estimate(trials, master_seed)?.estimate)
}

/// Grid axes of a sweep. Cells are visited dims-major, then `γ`, then `α`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub alphas: Vec<f64>,
    pub dims: Vec<Dims>,
    pub gammas: Vec<f64>,
}

impl SweepGrid {
    pub fn cells(&self) -> impl Iterator<Item = (Dims, f64, f64)> + '_ {
        self.dims.iter().flat_map(move |&d| {
            self.gammas
                .iter()
                .flat_map(move |&g| self.alphas.iter().map(move |&a| (d, g, a)))
        })
    }

    pub fn len(&self) -> usize {
        self.alphas.len() * self.dims.len() * self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    Skipped,
    Error,
}

impl CellStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CellStatus::Ok => "ok",
            CellStatus::Skipped => "skipped",
            CellStatus::Error => "error",
        }
    }
}

/// One grid cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub model: ModelKind,
    #[serde(rename = "N")]
    pub dim: usize,
    pub l: Option<usize>,
    pub c: Option<usize>,
    pub n_resolved: Option<usize>,
    pub kappa: Option<f64>,
    pub gamma: f64,
    pub alpha: f64,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    pub trials: u64,
    pub stable_count: Option<u64>,
    pub rate: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub zero_patterns: Option<u64>,
    pub seed: u64,
    pub status: CellStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
}

impl SweepRecord {
    fn blank(exp: &Experiment, trials: u64, seed: u64) -> Self {
        SweepRecord {
            model: exp.spec.kind,
            dim: exp.dims.dim(),
            l: exp.dims.layout().map(|l| l.blocks()),
            c: exp.dims.layout().map(|l| l.block_size()),
            n_resolved: exp.spec.resolved_order(exp.dims.dim()).ok(),
            kappa: exp.spec.order.kappa(),
            gamma: exp.spec.gamma,
            alpha: exp.rule.alpha,
            m: None,
            trials,
            stable_count: None,
            rate: None,
            ci_low: None,
            ci_high: None,
            zero_patterns: None,
            seed,
            status: CellStatus::Skipped,
            reason: None,
            wall_ms: None,
        }
    }

    /// Runs one cell. Capacity-cap violations become skipped records and
    /// other failures error records; neither aborts the caller.
    pub fn measure(exp: &Experiment, trials: u64, seed: u64) -> Self {
        let start = Instant::now();
        let mut rec = Self::blank(exp, trials, seed);
        let m = match exp.resolve() {
            Ok((_, m)) => m,
            Err(e) => {
                rec.status = match e {
                    Error::CapacityCap { .. } => CellStatus::Skipped,
                    _ => CellStatus::Error,
                };
                rec.reason = Some(e.to_string());
                return rec;
            }
        };
        rec.m = Some(m);
        match exp.estimate(trials, seed) {
            Ok(run) => {
                rec.stable_count = Some(run.successes);
                rec.rate = Some(run.estimate.rate);
                rec.ci_low = Some(run.estimate.ci_low);
                rec.ci_high = Some(run.estimate.ci_high);
                rec.zero_patterns = Some(run.zero_patterns);
                rec.status = CellStatus::Ok;
            }
            Err(e) => {
                rec.status = CellStatus::Error;
                rec.reason = Some(e.to_string());
            }
        }
        rec.wall_ms = Some(start.elapsed().as_millis() as u64);
        rec
    }
}

/// Builds the experiment for one cell from a template.
pub fn cell_experiment(template: &Experiment, dims: Dims, gamma: f64, alpha: f64) -> Result<Experiment> {
    let spec = ModelSpec::new(template.spec.kind, template.spec.order, gamma, dims.layout())?;
    let rule = CapacityRule::for_model(&spec, alpha)?;
    Ok(Experiment {
        spec,
        rule,
        dims,
        ..*template
    })
}

/// Runs every cell in grid order, handing each finished record to
/// `on_record` before starting the next. Every cell uses `master_seed`, so
/// cells share their random ensembles up to the change in `M`.
pub fn sweep_with<F>(
    template: &Experiment,
    grid: &SweepGrid,
    trials: u64,
    master_seed: u64,
    mut on_record: F,
) -> Result<Vec<SweepRecord>>
where
    F: FnMut(&SweepRecord),
{
    if grid.is_empty() {
        return Err(Error::InvalidParameter("sweep grid has an empty axis".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let mut out = Vec::with_capacity(grid.len());
    for (dims, gamma, alpha) in grid.cells() {
        let rec = match cell_experiment(template, dims, gamma, alpha) {
            Ok(exp) => SweepRecord::measure(&exp, trials, master_seed),
            Err(e) => {
                let mut rec = SweepRecord::blank(template, trials, master_seed);
                rec.dim = dims.dim();
                rec.l = dims.layout().map(|l| l.blocks());
                rec.c = dims.layout().map(|l| l.block_size());
                rec.gamma = gamma;
                rec.alpha = alpha;
                rec.n_resolved = None;
                rec.status = CellStatus::Error;
                rec.reason = Some(e.to_string());
                rec
            }
        };
        on_record(&rec);
        out.push(rec);
    }
    Ok(out)
}

pub fn sweep(template: &Experiment, grid: &SweepGrid, trials: u64, master_seed: u64) -> Result<Vec<SweepRecord>> {
    sweep_with(template, grid, trials, master_seed, |_| {})
}
