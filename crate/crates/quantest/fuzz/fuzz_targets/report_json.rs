#![no_main]
use libfuzzer_sys::fuzz_target;
use quantest::io::RunReport;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(report) = RunReport::from_json(text) {
            // A successfully parsed report must survive a round trip.
            let json = report.to_json();
            let back = RunReport::from_json(&json).expect("re-parse of serialized report");
            assert_eq!(report, back);
        }
    }
});
