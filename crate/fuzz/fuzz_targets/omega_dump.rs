#![no_main]
use coexist_core::cluster::io::parse_omega_lines;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_omega_lines(text);
    }
});
