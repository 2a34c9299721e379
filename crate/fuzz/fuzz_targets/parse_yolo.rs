#![no_main]

use ecgsynth::annotate::parse_yolo_file;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(records) = parse_yolo_file(text) {
            for r in records {
                for v in [r.x_center, r.y_center, r.width, r.height] {
                    assert!((0.0..=1.0).contains(&v));
                }
            }
        }
    }
});
