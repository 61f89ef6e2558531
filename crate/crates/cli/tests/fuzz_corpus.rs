//! Replays the checked-in fuzz corpus through the same parser paths as the fuzz targets.

use std::fs;
use std::path::PathBuf;

use assoc_lab::patterns::{parse_ensemble, write_ensemble};
use assoc_lab_cli::config::{RawConfig, RunConfig};

fn corpus(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, String)> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            (name, fs::read_to_string(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds in {}", dir.display());
    out
}

#[test]
fn ensemble_seeds() {
    for (name, text) in corpus("parse_ensemble") {
        let parsed = parse_ensemble(&text);
        let should_parse = !name.contains("rejected") && !name.contains("duplicate");
        assert_eq!(parsed.is_ok(), should_parse, "{name}: {parsed:?}");
        if let Ok(e) = parsed {
            assert_eq!(parse_ensemble(&write_ensemble(&e)).unwrap(), e, "{name}");
        }
    }
}

#[test]
fn config_seeds() {
    for (name, text) in corpus("parse_config") {
        let resolved = RawConfig::parse(&text).and_then(|raw| RunConfig::resolve(&raw));
        let should_resolve = !["zero_trials", "duplicate_key", "unknown_key"].contains(&name.as_str());
        assert_eq!(resolved.is_ok(), should_resolve, "{name}");
    }
}
