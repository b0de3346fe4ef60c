#![no_main]

use eventforge::format::{decode_metadata, encode_metadata};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(m) = decode_metadata(data) {
        let values: Vec<f64> = (0..m.frames()).flat_map(|k| m.frame(k).to_vec()).collect();
        if let Ok(bytes) = encode_metadata(m.fields, &values) {
            let again = decode_metadata(&bytes).expect("encoded metadata decodes");
            assert_eq!(again.frames(), m.frames());
        }
        let _ = m.poses();
    }
});
