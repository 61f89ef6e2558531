//! Higher-order sparse associative memories.
//!
//! Three model families share one retrieval rule `T_i(σ) = Θ(S_i(σ) - h)`:
//!
//! * **Amari**: Hebbian tensor weights `W = Σ_μ ξ^μ_{i_1} ⋯ ξ^μ_{i_n}`.
//! * **Willshaw**: the same weights clipped to `{0, 1}`.
//! * **GB**: neurons in `l` blocks of `c`, one active neuron per block per
//!   message, clipped weights on hyperedges spanning distinct blocks.
//!
//! Local fields are exact integer counts computed without materializing any
//! weight tensor ([`fields`]); [`dynamics`] applies the thresholds and tests
//! fixed points; [`experiments`] estimates how often stored patterns are
//! fixed points at a given capacity scaling.

pub mod combinatorics;
pub mod dynamics;
mod error;
pub mod experiments;
pub mod fields;
pub mod fmt;
pub mod patterns;
pub mod seed;

pub use combinatorics::Count;
pub use dynamics::{a_delta_holds, is_fixed_point, one_step, threshold_for, FixedPointReport, Threshold};
pub use error::{Error, Result};
pub use experiments::{
    capacity_for, estimate_stability, run_stability_trial, sweep, CapacityFamily, CapacityRule, Dims,
    Experiment, PatternDistribution, StabilityEstimate, SweepGrid, SweepRecord,
};
pub use fields::{
    field_amari, field_gb, field_gb_montecarlo, field_gb_upper_bound, field_oracle, field_willshaw,
    Convention, FieldEvaluator, FieldVector, InteractionOrder, ModelKind, ModelSpec,
};
pub use patterns::{
    default_sparsity, gen_bernoulli, gen_fixed_weight, gen_gb, overlap, BlockLayout, PatternEnsemble,
    PatternMode, SparsePattern,
};
