#![no_main]

use icepm::gammalasso::FitArtifact;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(fit) = FitArtifact::read(data) {
        let _ = fit.coefficients();
    }
});
