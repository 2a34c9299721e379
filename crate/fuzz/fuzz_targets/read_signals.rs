#![no_main]

use ecgsynth::ingest::{parse_header, read_signals};
use libfuzzer_sys::fuzz_target;

// Input: header text, a NUL byte, then the signal file bytes.
fuzz_target!(|data: &[u8]| {
    let Some(split) = data.iter().position(|&b| b == 0) else {
        return;
    };
    let Ok(text) = std::str::from_utf8(&data[..split]) else {
        return;
    };
    if let Ok(header) = parse_header(text) {
        if let Ok(record) = read_signals(&header, &data[split + 1..]) {
            assert!(record.signals.as_slice().iter().all(|v| v.is_finite()));
        }
    }
});
