#![no_main]

use assoc_lab_cli::config::{RawConfig, RunConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(raw) = RawConfig::parse(text) {
        if let Ok(cfg) = RunConfig::resolve(&raw) {
            assert!(cfg.cells() >= 1);
            let _ = cfg.echo();
        }
    }
});
