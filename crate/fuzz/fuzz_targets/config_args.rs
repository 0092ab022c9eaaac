#![no_main]

use libfuzzer_sys::fuzz_target;
use sds_core::cli;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    // --config would read from disk
    let args: Vec<&str> = text
        .split_whitespace()
        .filter(|a| !a.starts_with("--config"))
        .collect();
    match cli::parse_args(std::iter::once("sds").chain(args)) {
        Ok((_, cfg)) => {
            let _ = cfg.params.derive();
            let _ = sds_core::spectrum::spectrum_row(&cfg.params);
        }
        Err(e) => assert_eq!(e.code, cli::EXIT_USAGE),
    }
});
