//! Line-oriented ensemble text format.
//!
//! ```text
//! dim=<N> M=<M> mode=<tag> seed=<u64>
//! <space-separated active indices of pattern 1>
//! ...
//! ```
//!
//! `<tag>` is `bernoulli:<p>`, `fixed:<c_active>` or `gb:<l>x<c>`. An empty
//! pattern line is the all-zero pattern.

use std::fmt::Write as _;

use super::{BlockLayout, PatternEnsemble, PatternMode, SparsePattern};
use crate::error::{Error, Result};
use crate::fmt::real17;

fn mode_tag(mode: &PatternMode) -> String {
    match mode {
        PatternMode::Bernoulli { p } => format!("bernoulli:{}", real17(*p)),
        PatternMode::FixedWeight { active } => format!("fixed:{active}"),
        PatternMode::GbBlock(l) => format!("gb:{}x{}", l.blocks(), l.block_size()),
    }
}

/// Serializes an ensemble; the output always ends with a newline.
pub fn write_ensemble(e: &PatternEnsemble) -> String {
    let mut out = format!(
        "dim={} M={} mode={} seed={}\n",
        e.dim(),
        e.len(),
        mode_tag(&e.mode()),
        e.master_seed()
    );
    for p in e.patterns() {
        let mut first = true;
        for i in p.active() {
            if !first {
                out.push(' ');
            }
            first = false;
            write!(out, "{i}").unwrap();
        }
        out.push('\n');
    }
    out
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_mode(tag: &str) -> Result<PatternMode> {
    let (kind, arg) = tag
        .split_once(':')
        .ok_or_else(|| perr(1, format!("mode tag `{tag}` lacks a parameter")))?;
    match kind {
        "bernoulli" => {
            let p: f64 = arg
                .parse()
                .map_err(|_| perr(1, format!("bad probability `{arg}`")))?;
            Ok(PatternMode::Bernoulli { p })
        }
        "fixed" => {
            let active = arg
                .parse()
                .map_err(|_| perr(1, format!("bad active count `{arg}`")))?;
            Ok(PatternMode::FixedWeight { active })
        }
        "gb" => {
            let (l, c) = arg
                .split_once('x')
                .ok_or_else(|| perr(1, format!("bad block layout `{arg}`")))?;
            let l = l.parse().map_err(|_| perr(1, "bad block count"))?;
            let c = c.parse().map_err(|_| perr(1, "bad block size"))?;
            Ok(PatternMode::GbBlock(
                BlockLayout::new(l, c).map_err(|e| perr(1, e.to_string()))?,
            ))
        }
        other => Err(perr(1, format!("unknown mode `{other}`"))),
    }
}

fn parse_header(line: &str) -> Result<(usize, usize, PatternMode, u64)> {
    let mut dim = None;
    let mut m = None;
    let mut mode = None;
    let mut seed = None;
    for field in line.split(' ') {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| perr(1, format!("header field `{field}` is not key=value")))?;
        let dup = match key {
            "dim" => dim
                .replace(value.parse::<usize>().map_err(|_| perr(1, "bad dim"))?)
                .is_some(),
            "M" => m
                .replace(value.parse::<usize>().map_err(|_| perr(1, "bad M"))?)
                .is_some(),
            "mode" => mode.replace(parse_mode(value)?).is_some(),
            "seed" => seed
                .replace(value.parse::<u64>().map_err(|_| perr(1, "bad seed"))?)
                .is_some(),
            other => return Err(perr(1, format!("unknown header key `{other}`"))),
        };
        if dup {
            return Err(perr(1, format!("duplicate header key `{key}`")));
        }
    }
    match (dim, m, mode, seed) {
        (Some(d), Some(m), Some(mode), Some(s)) => Ok((d, m, mode, s)),
        _ => Err(perr(1, "header needs dim, M, mode and seed")),
    }
}

fn parse_pattern(dim: usize, line: &str, lineno: usize) -> Result<SparsePattern> {
    let mut active = Vec::new();
    if !line.is_empty() {
        for tok in line.split(' ') {
            let i: u32 = tok
                .parse()
                .map_err(|_| perr(lineno, format!("bad index `{tok}`")))?;
            if (i as usize) >= dim {
                return Err(perr(lineno, format!("index {i} out of range")));
            }
            if active.last().is_some_and(|&prev| prev >= i) {
                return Err(perr(lineno, "indices must be strictly increasing"));
            }
            active.push(i);
        }
    }
    Ok(SparsePattern::from_sorted_unchecked(dim, active))
}

/// Parses the ensemble format, validating every pattern against the mode.
pub fn parse_ensemble(text: &str) -> Result<PatternEnsemble> {
    let body = text.strip_suffix('\n').unwrap_or(text);
    let mut lines = body.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l));
    let header = lines.next().ok_or_else(|| perr(1, "empty input"))?;
    let (dim, m, mode, seed) = parse_header(header)?;
    if dim == 0 || dim > u32::MAX as usize {
        return Err(perr(1, format!("dim {dim} out of range")));
    }
    let mut patterns = Vec::new();
    for (k, line) in lines.enumerate() {
        if k >= m {
            return Err(perr(k + 2, format!("more than M={m} pattern lines")));
        }
        patterns.push(parse_pattern(dim, line, k + 2)?);
    }
    if patterns.len() != m {
        return Err(perr(
            patterns.len() + 2,
            format!("expected {m} pattern lines, found {}", patterns.len()),
        ));
    }
    PatternEnsemble::from_patterns(dim, mode, seed, patterns).map_err(|e| perr(1, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::patterns::{gen_bernoulli, gen_fixed_weight, gen_gb};
    use proptest::prelude::*;

    #[test]
    fn gb_layout_in_text() {
        let e = gen_gb(BlockLayout::new(4, 3).unwrap(), 10, 7).unwrap();
        let text = write_ensemble(&e);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "dim=12 M=10 mode=gb:4x3 seed=7");
        let body: Vec<_> = lines.collect();
        assert_eq!(body.len(), 10);
        for l in body {
            let idx: Vec<usize> = l.split(' ').map(|t| t.parse().unwrap()).collect();
            assert_eq!(idx.len(), 4);
            for (a, i) in idx.iter().enumerate() {
                assert_eq!(i / 3, a);
            }
        }
        assert_eq!(parse_ensemble(&text).unwrap(), e);
    }

    #[test]
    fn zero_patterns_are_empty_lines() {
        let z = SparsePattern::zeros(5).unwrap();
        let e = PatternEnsemble::from_patterns(
            5,
            PatternMode::Bernoulli { p: 0.2 },
            1,
            vec![z.clone(), SparsePattern::new(5, vec![1, 4]).unwrap(), z],
        )
        .unwrap();
        let text = write_ensemble(&e);
        assert_eq!(text, "dim=5 M=3 mode=bernoulli:0.20000000000000001 seed=1\n\n1 4\n\n");
        assert_eq!(parse_ensemble(&text).unwrap(), e);
    }

    #[test]
    fn rejects_malformed_input() {
        for bad in [
            "",
            "dim=4 M=1 mode=fixed:2\n0 1\n",
            "dim=4 M=1 mode=fixed:2 seed=1 extra=2\n0 1\n",
            "dim=4 M=2 mode=fixed:2 seed=1\n0 1\n",
            "dim=4 M=1 mode=fixed:2 seed=1\n0 1\n2 3\n",
            "dim=4 M=1 mode=fixed:2 seed=1\n1 0\n",
            "dim=4 M=1 mode=fixed:2 seed=1\n0 4\n",
            "dim=4 M=1 mode=fixed:2 seed=1\n0 1 2\n",
            "dim=4 M=1 mode=fixed:2 seed=1\n0  1\n",
            "dim=4 M=1 mode=gb:2x2 seed=1\n0 1\n",
            "dim=4 M=1 mode=gb:3x2 seed=1\n0 2\n",
            "dim=4 M=1 mode=bernoulli:1.5 seed=1\n0\n",
            "dim=0 M=1 mode=bernoulli:0.5 seed=1\n\n",
            "dim=4 dim=4 M=1 mode=fixed:2 seed=1\n0 1\n",
        ] {
            assert!(parse_ensemble(bad).is_err(), "accepted {bad:?}");
        }
    }

    proptest! {
        #[test]
        fn write_then_parse_is_identity(seed in any::<u64>(), kind in 0u8..3, m in 1usize..20) {
            let e = match kind {
                0 => gen_bernoulli(40, 0.07, m, seed).unwrap(),
                1 => gen_fixed_weight(40, 5, m, seed).unwrap(),
                _ => gen_gb(BlockLayout::new(5, 8).unwrap(), m, seed).unwrap(),
            };
            prop_assert_eq!(parse_ensemble(&write_ensemble(&e)).unwrap(), e);
        }

        #[test]
        fn parser_never_panics(s in "\\PC{0,200}") {
            let _ = parse_ensemble(&s);
        }
    }
}
