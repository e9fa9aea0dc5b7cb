#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() > 1 << 16 {
        return;
    }
    if let Ok(text) = std::str::from_utf8(data) {
        // Any outcome is fine as long as the parser never panics.
        let _ = ridgelab::io::csv::parse_signal_csv(text, 1.0);
        let _ = ridgelab::io::csv::parse_signal_csv(text, 0.0);
    }
});
