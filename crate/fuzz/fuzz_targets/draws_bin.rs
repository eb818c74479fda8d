#![no_main]

use icepm::gibbs::decode_draws;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = decode_draws(data);
});
