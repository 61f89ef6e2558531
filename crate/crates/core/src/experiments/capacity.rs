use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{InteractionOrder, ModelKind, ModelSpec};
use crate::patterns::BlockLayout;

/// Largest message count an experiment may request by default.
pub const DEFAULT_CAPACITY_CAP: u64 = 1_000_000_000;

/// System size: `N` neurons, or `l` blocks of `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dims {
    Flat(usize),
    Blocks(BlockLayout),
}

impl Dims {
    pub fn dim(&self) -> usize {
        match self {
            Dims::Flat(n) => *n,
            Dims::Blocks(l) => l.dim(),
        }
    }

    pub fn layout(&self) -> Option<BlockLayout> {
        match self {
            Dims::Blocks(l) => Some(*l),
            Dims::Flat(_) => None,
        }
    }
}

/// Which capacity scaling to use, with its order parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CapacityFamily {
    AmariFixed { n: usize },
    AmariLog { kappa: f64 },
    WillshawFixed { n: usize },
    WillshawLog { kappa: f64 },
    GbFixed { n: usize },
    GbLog { kappa: f64 },
}

impl CapacityFamily {
    pub fn name(&self) -> &'static str {
        match self {
            CapacityFamily::AmariFixed { .. } => "AmariFixed",
            CapacityFamily::AmariLog { .. } => "AmariLog",
            CapacityFamily::WillshawFixed { .. } => "WillshawFixed",
            CapacityFamily::WillshawLog { .. } => "WillshawLog",
            CapacityFamily::GbFixed { .. } => "GBFixed",
            CapacityFamily::GbLog { .. } => "GBLog",
        }
    }

    fn order(&self) -> InteractionOrder {
        match *self {
            CapacityFamily::AmariFixed { n }
            | CapacityFamily::WillshawFixed { n }
            | CapacityFamily::GbFixed { n } => InteractionOrder::Fixed(n),
            CapacityFamily::AmariLog { kappa }
            | CapacityFamily::WillshawLog { kappa }
            | CapacityFamily::GbLog { kappa } => InteractionOrder::Logarithmic(kappa),
        }
    }

    fn is_gb(&self) -> bool {
        matches!(self, CapacityFamily::GbFixed { .. } | CapacityFamily::GbLog { .. })
    }
}

/// A capacity scaling `M(α)` for one model family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityRule {
    pub family: CapacityFamily,
    pub alpha: f64,
}

impl CapacityRule {
    pub fn new(family: CapacityFamily, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        Ok(CapacityRule { family, alpha })
    }

    /// The rule matching a model's family and order.
    pub fn for_model(spec: &ModelSpec, alpha: f64) -> Result<Self> {
        let family = match (spec.kind, spec.order) {
            (ModelKind::Amari, InteractionOrder::Fixed(n)) => CapacityFamily::AmariFixed { n },
            (ModelKind::Amari, InteractionOrder::Logarithmic(kappa)) => CapacityFamily::AmariLog { kappa },
            (ModelKind::Willshaw, InteractionOrder::Fixed(n)) => CapacityFamily::WillshawFixed { n },
            (ModelKind::Willshaw, InteractionOrder::Logarithmic(kappa)) => CapacityFamily::WillshawLog { kappa },
            (ModelKind::Gb, InteractionOrder::Fixed(n)) => CapacityFamily::GbFixed { n },
            (ModelKind::Gb, InteractionOrder::Logarithmic(kappa)) => CapacityFamily::GbLog { kappa },
        };
        Self::new(family, alpha)
    }

    /// Unrounded `M(α)`.
    pub fn raw_value(&self, dims: Dims) -> Result<f64> {
        let dim = dims.dim();
        if dim < 2 {
            return Err(Error::InvalidDimension(format!("dim {dim}")));
        }
        let n = self.family.order().resolve(dim)?;
        let ln_n = (dim as f64).ln();
        let alpha = self.alpha;
        match (self.family, dims) {
            (CapacityFamily::AmariFixed { .. } | CapacityFamily::WillshawFixed { .. }, Dims::Flat(_)) => {
                Ok(alpha * (dim as f64).powi(n as i32) / ln_n.powi(n as i32))
            }
            (CapacityFamily::AmariLog { kappa } | CapacityFamily::WillshawLog { kappa }, Dims::Flat(_)) => {
                Ok(alpha.powi(n as i32 - 1) * (kappa * (ln_n * ln_n - ln_n * ln_n.ln())).exp())
            }
            (f, Dims::Blocks(layout)) if f.is_gb() => {
                Ok(alpha * (layout.block_size() as f64).powi(n as i32))
            }
            (f, _) => Err(Error::InvalidParameter(format!(
                "capacity family {} does not match the system shape",
                f.name()
            ))),
        }
    }
}

/// `max(1, floor(M(α)))`, refusing values above `cap`.
pub fn capacity_for_capped(rule: &CapacityRule, dims: Dims, cap: u64) -> Result<usize> {
    let value = rule.raw_value(dims)?;
    if !value.is_finite() || value > cap as f64 {
        return Err(Error::CapacityCap { value, cap });
    }
    Ok((value.floor() as usize).max(1))
}

pub fn capacity_for(rule: &CapacityRule, dims: Dims) -> Result<usize> {
    capacity_for_capped(rule, dims, DEFAULT_CAPACITY_CAP)
}
