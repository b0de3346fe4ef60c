#![no_main]

use eventforge::representations::{decode_images, encode_image};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(images) = decode_images(data) {
        let mut out = Vec::new();
        for image in &images {
            encode_image(image, &mut out);
        }
        assert_eq!(decode_images(&out).expect("re-encoded images decode").len(), images.len());
    }
});
