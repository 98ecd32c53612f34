#![no_main]
use coexist_core::harness::parse_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(c) = parse_config(text) {
        // resolution is idempotent
        assert_eq!(parse_config(&c.to_json()).expect("resolved configs parse"), c);
    }
});
