//! CSV and JSON emission of sweep records.

use std::io::Write;

use assoc_lab::fmt::real17;
use assoc_lab::SweepRecord;
use serde::{Deserialize, Serialize};

/// CSV columns, in order. `wall_ms` is dropped in reproducible mode.
pub const CSV_COLUMNS: &[&str] = &[
    "model",
    "N",
    "l",
    "c",
    "n_resolved",
    "kappa",
    "gamma",
    "alpha",
    "M",
    "trials",
    "stable_count",
    "rate",
    "ci_low",
    "ci_high",
    "zero_patterns",
    "seed",
    "status",
    "wall_ms",
];

fn columns(reproducible: bool) -> &'static [&'static str] {
    if reproducible {
        &CSV_COLUMNS[..CSV_COLUMNS.len() - 1]
    } else {
        CSV_COLUMNS
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_real(v: Option<f64>) -> String {
    v.map(real17).unwrap_or_default()
}

/// `# key=value` lines followed by the header row.
pub fn csv_preamble(echo: &[(&str, String)], reproducible: bool) -> String {
    let mut out = String::new();
    for (k, v) in echo {
        out.push_str(&format!("# {k}={v}\n"));
    }
    out.push_str(&columns(reproducible).join(","));
    out.push('\n');
    out
}

pub fn csv_row(r: &SweepRecord, reproducible: bool) -> String {
    let mut fields = vec![
        r.model.as_str().to_string(),
        r.dim.to_string(),
        opt(r.l),
        opt(r.c),
        opt(r.n_resolved),
        opt_real(r.kappa),
        real17(r.gamma),
        real17(r.alpha),
        opt(r.m),
        r.trials.to_string(),
        opt(r.stable_count),
        opt_real(r.rate),
        opt_real(r.ci_low),
        opt_real(r.ci_high),
        opt(r.zero_patterns),
        r.seed.to_string(),
        r.status.as_str().to_string(),
    ];
    if !reproducible {
        fields.push(opt(r.wall_ms));
    }
    let mut line = fields.join(",");
    line.push('\n');
    line
}

/// Top-level JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonReport {
    pub config: serde_json::Map<String, serde_json::Value>,
    pub records: Vec<SweepRecord>,
}

impl JsonReport {
    pub fn new(echo: &[(&str, String)], records: Vec<SweepRecord>) -> Self {
        let config = echo
            .iter()
            .map(|(k, v)| (k.to_string(), serde_json::Value::String(v.clone())))
            .collect();
        JsonReport { config, records }
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")
    }
}
