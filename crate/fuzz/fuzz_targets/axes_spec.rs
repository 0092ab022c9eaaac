#![no_main]

use libfuzzer_sys::fuzz_target;
use sds_core::cli;
use sds_core::spectrum::{AxisPair, AxisRange};

// line 1: axis pair, lines 2-3: ranges
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let mut lines = text.lines();
    let Some(Ok(axes)) = lines.next().map(str::parse::<AxisPair>) else {
        return;
    };
    assert_ne!(axes.outer, axes.inner);
    for axis in [axes.outer, axes.inner] {
        let Some(Ok((lo, hi))) = lines.next().map(cli::parse_range) else {
            return;
        };
        assert!(lo <= hi);
        if let Ok(samples) = AxisRange::new(lo, hi, 5).samples(axis) {
            assert!(samples.iter().all(|v| *v >= lo && *v <= hi));
        }
    }
});
