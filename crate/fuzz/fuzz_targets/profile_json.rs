#![no_main]
use coexist_core::barrier::parse_profile_json;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(p) = parse_profile_json(text) {
        assert_eq!(parse_profile_json(&p.to_json()).expect("serialized profiles parse"), p);
    }
});
