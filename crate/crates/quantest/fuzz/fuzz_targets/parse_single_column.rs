#![no_main]
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = quantest::io::parse_single_column(text, "fuzz.csv", "fuzz");
    }
});
