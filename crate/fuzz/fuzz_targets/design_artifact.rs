#![no_main]

use icepm::design::{read_design, read_meta};
use libfuzzer_sys::fuzz_target;

// meta.json, a NUL byte, then triplets.csv
fuzz_target!(|data: &[u8]| {
    let split = data.iter().position(|&b| b == 0).unwrap_or(data.len());
    let (meta, rest) = data.split_at(split);
    if let Ok(meta) = read_meta(meta) {
        let _ = read_design(rest.get(1..).unwrap_or_default(), meta);
    }
});
