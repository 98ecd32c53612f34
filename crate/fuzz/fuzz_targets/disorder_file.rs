#![no_main]
use coexist_core::model::io::{read_disorder, write_disorder};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(field) = read_disorder(text) {
        let again = read_disorder(&write_disorder(&field).expect("parsed boxes are writable")).expect("written files parse");
        assert_eq!(again.values(), field.values());
    }
});
