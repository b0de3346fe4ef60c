#![no_main]

use eventforge::calibration::parse_frame_manifest;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    if let Ok(entries) = parse_frame_manifest(&text) {
        assert!(entries.windows(2).all(|w| w[0].timestamp < w[1].timestamp));
    }
});
