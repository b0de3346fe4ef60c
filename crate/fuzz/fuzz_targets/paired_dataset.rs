#![no_main]

use eventforge::format::PairedDataset;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    // first byte picks where the event stream ends and the metadata begins
    let Some((&split, rest)) = data.split_first() else {
        return;
    };
    let cut = (split as usize * 4).min(rest.len());
    let (events, metadata) = rest.split_at(cut);
    if let Ok(d) = PairedDataset::from_bytes(events.to_vec(), metadata, 1000) {
        let total: usize = d.iter().map(|s| s.events().count()).sum();
        assert_eq!(total, d.event_count());
        assert_eq!(d.poses().len(), d.len());
    }
});
