#![no_main]

use ecgsynth::annotate::{emit_metadata, parse_metadata};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(meta) = parse_metadata(text) {
            let emitted = emit_metadata(&meta).expect("a checked document re-emits");
            assert_eq!(parse_metadata(&emitted).expect("emitted document parses"), meta);
        }
    }
});
