#![no_main]

use assoc_lab::patterns::{parse_ensemble, write_ensemble};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(e) = parse_ensemble(text) {
        // anything accepted must survive a write/parse round trip
        let again = parse_ensemble(&write_ensemble(&e)).expect("re-parse of written ensemble");
        assert_eq!(e, again);
    }
});
