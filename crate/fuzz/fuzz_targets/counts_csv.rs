#![no_main]
use diabatic::xeb::{parse_counts_csv, render_counts_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(records) = parse_counts_csv(s) {
            let again = parse_counts_csv(&render_counts_csv(&records)).expect("rendered counts parse");
            assert_eq!(again, records);
        }
    }
});
