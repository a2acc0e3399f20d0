#![no_main]
use diabatic::config::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(cfg) = RunConfig::from_json(s) {
            // Accepted configs must survive a serialization round trip.
            let text = serde_json::to_string(&cfg).unwrap();
            let _ = RunConfig::from_json(&text);
        }
    }
});
