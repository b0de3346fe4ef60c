#![no_main]

use eventforge_cli::events_csv::parse_events_csv;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    let _ = parse_events_csv(&text);
});
