#![no_main]

use icepm::design::{build_design, parse_goals, BuildOptions};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(events) = parse_goals(data) {
        let _ = build_design(&events, BuildOptions::default());
    }
});
