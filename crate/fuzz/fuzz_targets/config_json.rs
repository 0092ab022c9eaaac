#![no_main]

use libfuzzer_sys::fuzz_target;
use sds_core::cli::{self, RunConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    match cli::parse_config_json(text) {
        Ok(input) => {
            if let Ok(cfg) = RunConfig::from_input(&input) {
                // a validated config must be safe to evaluate
                let _ = cfg.params.derive();
                let _ = sds_core::spectrum::spectrum_row(&cfg.params);
            }
        }
        Err(e) => assert!(e.code == cli::EXIT_USAGE || e.code == cli::EXIT_MALFORMED),
    }
});
