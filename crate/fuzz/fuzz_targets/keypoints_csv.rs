#![no_main]

use eventforge::metrics::parse_keypoints_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    let _ = parse_keypoints_csv(&text);
});
