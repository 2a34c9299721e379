#![no_main]

use ecgsynth::ingest::parse_header;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(header) = parse_header(text) {
            let _ = header.ensure_standard();
            // Re-emitting a parsed header must parse to the same header.
            let again = parse_header(&header.to_header_text()).expect("emitted header parses");
            assert_eq!(again, header);
        }
    }
});
