//! Flat `key=value` run configuration.
//!
//! Files hold one `key=value` pair per line; `#` starts a comment and blank
//! lines are ignored. Lists are comma separated. Unknown or repeated keys are
//! errors. Command-line flags are applied on top of the file with
//! [`RawConfig::set`].

use std::collections::BTreeMap;
use std::path::PathBuf;

use assoc_lab::experiments::{Dims, PatternDistribution, DEFAULT_CAPACITY_CAP, DEFAULT_DELTA};
use assoc_lab::fields::DEFAULT_ENUMERATION_BUDGET;
use assoc_lab::fmt::real17;
use assoc_lab::{BlockLayout, InteractionOrder, ModelKind};

use crate::CliError;

/// Every key a configuration may contain.
pub const KNOWN_KEYS: &[&str] = &[
    "model",
    "order",
    "kappa",
    "gamma",
    "alpha",
    "N",
    "l",
    "c",
    "trials",
    "seed",
    "patterns",
    "delta",
    "budget",
    "cap",
    "format",
    "output",
    "threads",
    "reproducible",
    "progress",
];

/// Unvalidated key/value pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    /// Parses configuration text. Errors name the offending line.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RawConfig::default();
        for (k, raw_line) in text.lines().enumerate() {
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key=value", k + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            check_key(key).map_err(|e| CliError::Config(format!("line {}: {e}", k + 1)))?;
            if cfg.values.insert(key.to_string(), value.to_string()).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key `{key}`", k + 1)));
            }
        }
        Ok(cfg)
    }

    /// Sets or overrides a key.
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), CliError> {
        check_key(key).map_err(CliError::Config)?;
        self.values.insert(key.to_string(), value.into());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }
}

fn check_key(key: &str) -> Result<(), String> {
    if KNOWN_KEYS.contains(&key) {
        Ok(())
    } else {
        Err(format!("unknown key `{key}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelKind,
    pub order: InteractionOrder,
    pub gammas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub dims: Vec<Dims>,
    pub trials: u64,
    pub seed: u64,
    pub patterns: PatternDistribution,
    pub delta: f64,
    pub budget: u128,
    pub cap: u64,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
    pub reproducible: bool,
    pub progress: bool,
}

fn bad(key: &str, value: &str, what: &str) -> CliError {
    CliError::Config(format!("{key}={value}: {what}"))
}

fn parse_one<T: std::str::FromStr>(key: &str, value: &str, what: &str) -> Result<T, CliError> {
    value.trim().parse().map_err(|_| bad(key, value, what))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str, what: &str) -> Result<Vec<T>, CliError> {
    let items = value
        .split(',')
        .map(|v| parse_one(key, v, what))
        .collect::<Result<Vec<T>, _>>()?;
    if items.is_empty() {
        return Err(bad(key, value, "empty list"));
    }
    Ok(items)
}

fn parse_bool(key: &str, value: &str) -> Result<bool, CliError> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(bad(key, value, "expected true or false")),
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|&v| real17(v)).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn resolve(raw: &RawConfig) -> Result<Self, CliError> {
        let need = |key: &str| {
            raw.get(key)
                .ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))
        };
        let model: ModelKind = {
            let v = need("model")?;
            v.parse().map_err(|_| bad("model", v, "expected amari, willshaw or gb"))?
        };
        let order = match (raw.get("order"), raw.get("kappa")) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config("`order` and `kappa` are mutually exclusive".into()))
            }
            (Some(v), None) => {
                let n: usize = parse_one("order", v, "expected an integer")?;
                if n < 2 {
                    return Err(bad("order", v, "must be at least 2"));
                }
                InteractionOrder::Fixed(n)
            }
            (None, Some(v)) => {
                let k: f64 = parse_one("kappa", v, "expected a real")?;
                if !(k > 0.0 && k < 1.0) {
                    return Err(bad("kappa", v, "must lie in (0,1)"));
                }
                InteractionOrder::Logarithmic(k)
            }
            (None, None) => InteractionOrder::Fixed(2),
        };
        let gammas: Vec<f64> = match raw.get("gamma") {
            Some(v) => parse_list("gamma", v, "expected reals")?,
            None => vec![0.5],
        };
        if let Some(g) = gammas.iter().find(|g| !(**g > 0.0 && **g < 1.0)) {
            return Err(bad("gamma", &g.to_string(), "must lie in (0,1)"));
        }
        let alphas: Vec<f64> = parse_list("alpha", need("alpha")?, "expected reals")?;
        if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && a.is_finite())) {
            return Err(bad("alpha", &a.to_string(), "must be positive"));
        }
        let dims = match model {
            ModelKind::Gb => {
                if raw.get("N").is_some() {
                    return Err(CliError::Config("GB runs take `l` and `c`, not `N`".into()));
                }
                let ls: Vec<usize> = parse_list("l", need("l")?, "expected integers")?;
                let cs: Vec<usize> = parse_list("c", need("c")?, "expected integers")?;
                let mut dims = Vec::new();
                for &l in &ls {
                    for &c in &cs {
                        let layout = BlockLayout::new(l, c)
                            .map_err(|e| CliError::Config(format!("l={l}, c={c}: {e}")))?;
                        dims.push(Dims::Blocks(layout));
                    }
                }
                dims
            }
            _ => {
                if raw.get("l").is_some() || raw.get("c").is_some() {
                    return Err(CliError::Config(format!(
                        "{} runs take `N`, not `l`/`c`",
                        model.as_str()
                    )));
                }
                let ns: Vec<usize> = parse_list("N", need("N")?, "expected integers")?;
                if let Some(n) = ns.iter().find(|&&n| n < 2) {
                    return Err(bad("N", &n.to_string(), "must be at least 2"));
                }
                ns.into_iter().map(Dims::Flat).collect()
            }
        };
        let trials: u64 = match raw.get("trials") {
            Some(v) => parse_one("trials", v, "expected an integer")?,
            None => 100,
        };
        if trials == 0 {
            return Err(bad("trials", "0", "must be at least 1"));
        }
        let seed = match raw.get("seed") {
            Some(v) => parse_one("seed", v, "expected an unsigned 64-bit integer")?,
            None => 0,
        };
        let patterns = match raw.get("patterns") {
            None | Some("bernoulli") => PatternDistribution::Bernoulli,
            Some("fixed") => PatternDistribution::Fixed,
            Some(v) => return Err(bad("patterns", v, "expected bernoulli or fixed")),
        };
        let delta: f64 = match raw.get("delta") {
            Some(v) => parse_one("delta", v, "expected a real")?,
            None => DEFAULT_DELTA,
        };
        if !(delta > 0.0 && delta < 1.0) {
            return Err(bad("delta", &delta.to_string(), "must lie in (0,1)"));
        }
        let budget = match raw.get("budget") {
            Some(v) => parse_one("budget", v, "expected an integer")?,
            None => DEFAULT_ENUMERATION_BUDGET,
        };
        let cap = match raw.get("cap") {
            Some(v) => parse_one("cap", v, "expected an integer")?,
            None => DEFAULT_CAPACITY_CAP,
        };
        let format = match raw.get("format") {
            None | Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            Some(v) => return Err(bad("format", v, "expected csv or json")),
        };
        let threads = match raw.get("threads") {
            Some(v) => {
                let t: usize = parse_one("threads", v, "expected an integer")?;
                if t == 0 {
                    return Err(bad("threads", v, "must be at least 1"));
                }
                Some(t)
            }
            None => None,
        };
        Ok(RunConfig {
            model,
            order,
            gammas,
            alphas,
            dims,
            trials,
            seed,
            patterns,
            delta,
            budget,
            cap,
            format,
            output: raw.get("output").map(PathBuf::from),
            threads,
            reproducible: raw.get("reproducible").map(|v| parse_bool("reproducible", v)).transpose()?.unwrap_or(false),
            progress: raw.get("progress").map(|v| parse_bool("progress", v)).transpose()?.unwrap_or(false),
        })
    }

    /// Number of grid cells.
    pub fn cells(&self) -> usize {
        self.gammas.len() * self.alphas.len() * self.dims.len()
    }

    /// The resolved settings that determine results, in a fixed key order.
    ///
    /// Thread count, output path and progress reporting do not change any
    /// result and are left out, so reruns compare byte for byte.
    pub fn echo(&self) -> Vec<(&'static str, String)> {
        let mut out = vec![("model", self.model.as_str().to_string())];
        match self.order {
            InteractionOrder::Fixed(n) => out.push(("order", n.to_string())),
            InteractionOrder::Logarithmic(k) => out.push(("kappa", real17(k))),
        }
        out.push(("gamma", join(&self.gammas)));
        out.push(("alpha", join(&self.alphas)));
        match self.model {
            ModelKind::Gb => {
                let mut ls: Vec<usize> = Vec::new();
                let mut cs: Vec<usize> = Vec::new();
                for d in &self.dims {
                    if let Some(l) = d.layout() {
                        if !ls.contains(&l.blocks()) {
                            ls.push(l.blocks());
                        }
                        if !cs.contains(&l.block_size()) {
                            cs.push(l.block_size());
                        }
                    }
                }
                let fmt = |v: &[usize]| v.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
                out.push(("l", fmt(&ls)));
                out.push(("c", fmt(&cs)));
            }
            _ => out.push((
                "N",
                self.dims.iter().map(|d| d.dim().to_string()).collect::<Vec<_>>().join(","),
            )),
        }
        out.push(("trials", self.trials.to_string()));
        out.push(("seed", self.seed.to_string()));
        if self.model != ModelKind::Gb {
            out.push(("patterns", self.patterns.as_str().to_string()));
        }
        out.push(("delta", real17(self.delta)));
        out.push(("budget", self.budget.to_string()));
        out.push(("cap", self.cap.to_string()));
        out.push((
            "format",
            match self.format {
                Format::Csv => "csv",
                Format::Json => "json",
            }
            .to_string(),
        ));
        out.push(("reproducible", self.reproducible.to_string()));
        out
    }
}
