#![no_main]

use eventforge::format::{decode_events, encode_events};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(decoded) = decode_events(data, 1000) else {
        return;
    };
    // a stream whose events all precede the last tick re-encodes to itself,
    // up to the ignored x and y bytes of tick blocks
    let covered = decoded.events.last().is_none_or(|e| (e.t / 1000) < decoded.steps as u64);
    if covered {
        let again = encode_events(&decoded.events, decoded.steps, 1000).expect("decoded streams re-encode");
        let canonical: Vec<u8> = data
            .chunks_exact(4)
            .flat_map(|b| if b[3] == 255 { [0, 0, 0, 255] } else { [b[0], b[1], b[2], b[3]] })
            .collect();
        assert_eq!(again.bytes, canonical);
    }
});
