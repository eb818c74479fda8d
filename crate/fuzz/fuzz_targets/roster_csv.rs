#![no_main]

use icepm::lineup::{parse_roster, Roster};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(records) = parse_roster(data) {
        let _ = Roster::standalone(records);
    }
});
