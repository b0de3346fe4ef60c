#![no_main]

use eventforge::format::{decode_events, scan_events};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let scanned = scan_events(data);
    let decoded = decode_events(data, 1);
    assert_eq!(scanned.is_ok(), decoded.is_ok());
    if let (Ok(s), Ok(d)) = (scanned, decoded) {
        assert_eq!(s.events(), d.events.len());
        assert_eq!(s.steps, d.steps);
    }
});
