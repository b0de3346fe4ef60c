#![no_main]

use eventforge_cli::SimulationConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = SimulationConfig::parse_valid(text);
});
