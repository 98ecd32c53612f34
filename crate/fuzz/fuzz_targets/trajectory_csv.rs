#![no_main]
use coexist_core::dynamics::parse_trajectory_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_trajectory_csv(text);
    }
});
