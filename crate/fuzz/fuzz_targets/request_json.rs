#![no_main]

use icepm_app::ops::{MatchupRequest, OptimizeRequest, SweepRequest};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(req) = serde_json::from_slice::<OptimizeRequest>(data) {
        if let Some(b) = req.budget {
            let _ = b.cents();
        }
    }
    if let Ok(req) = serde_json::from_slice::<SweepRequest>(data) {
        for b in &req.budgets {
            let _ = b.cents();
        }
    }
    let _ = serde_json::from_slice::<MatchupRequest>(data);
});
