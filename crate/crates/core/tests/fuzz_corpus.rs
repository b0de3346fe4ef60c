//! Replays the checked-in fuzz corpus through every decoder and parser.

use std::fs;
use std::path::PathBuf;

use eventforge::calibration::parse_frame_manifest;
use eventforge::format::{decode_events, decode_metadata, encode_events, scan_events, PairedDataset};
use eventforge::metrics::parse_keypoints_csv;
use eventforge::representations::{decode_images, encode_image};

fn seeds(target: &str) -> Vec<(String, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|entry| {
            let path = entry.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&path).unwrap())
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn event_stream_seeds() {
    let mut accepted = 0;
    for (name, data) in seeds("decode_events") {
        let scanned = scan_events(&data);
        let Ok(decoded) = decode_events(&data, 1000) else {
            assert!(scanned.is_err(), "{name}");
            continue;
        };
        accepted += 1;
        assert_eq!(scanned.unwrap().events(), decoded.events.len(), "{name}");
        if decoded.events.last().is_none_or(|e| e.t / 1000 < decoded.steps as u64) {
            let again = encode_events(&decoded.events, decoded.steps, 1000).unwrap();
            let canonical: Vec<u8> = data
                .chunks_exact(4)
                .flat_map(|b| if b[3] == 255 { [0, 0, 0, 255] } else { [b[0], b[1], b[2], b[3]] })
                .collect();
            assert_eq!(again.bytes, canonical, "{name}");
        }
    }
    assert!(accepted >= 3);
    for (name, data) in seeds("scan_events") {
        assert_eq!(scan_events(&data).is_ok(), decode_events(&data, 1).is_ok(), "{name}");
    }
}

#[test]
fn error_seeds_report_offsets() {
    let seeds = seeds("decode_events");
    let get = |n: &str| &seeds.iter().find(|(name, _)| name == n).unwrap().1;
    let e = decode_events(get("bad_polarity"), 1000).unwrap_err().to_string();
    assert!(e.contains("byte offset 11"), "{e}");
    let e = decode_events(get("truncated_block"), 1000).unwrap_err().to_string();
    assert!(e.contains("byte offset 4"), "{e}");
}

#[test]
fn paired_dataset_seeds() {
    let mut loaded = 0;
    for (name, data) in seeds("paired_dataset") {
        let (&split, rest) = data.split_first().unwrap();
        let (events, metadata) = rest.split_at((split as usize * 4).min(rest.len()));
        if let Ok(d) = PairedDataset::from_bytes(events.to_vec(), metadata, 1000) {
            loaded += 1;
            let total: usize = d.iter().map(|s| s.events().count()).sum();
            assert_eq!(total, d.event_count(), "{name}");
            assert_eq!(d.poses().len(), d.len(), "{name}");
        }
    }
    assert_eq!(loaded, 2);
}

#[test]
fn metadata_seeds() {
    for (name, data) in seeds("decode_metadata") {
        if let Ok(m) = decode_metadata(&data) {
            assert_eq!(data.len(), 4 + m.frames() * (8 * m.fields + 2), "{name}");
        }
    }
}

#[test]
fn image_seeds() {
    let mut decoded = 0;
    for (name, data) in seeds("decode_images") {
        if let Ok(images) = decode_images(&data) {
            decoded += images.len();
            let mut out = Vec::new();
            for image in &images {
                encode_image(image, &mut out);
            }
            assert_eq!(out, data, "{name}");
        }
    }
    assert!(decoded > 0);
}

#[test]
fn text_seeds() {
    let mut ok = 0;
    for (_, data) in seeds("keypoints_csv") {
        ok += parse_keypoints_csv(&String::from_utf8_lossy(&data)).is_ok() as usize;
    }
    assert_eq!(ok, 2);
    let mut ok = 0;
    for (_, data) in seeds("frame_manifest") {
        ok += parse_frame_manifest(&String::from_utf8_lossy(&data)).is_ok() as usize;
    }
    assert_eq!(ok, 2);
}
