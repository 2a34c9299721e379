#![no_main]

use ecgsynth::ingest::load_index;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(index) = load_index(text) {
            for r in &index.records {
                assert!((1..=10).contains(&r.strat_fold));
            }
        }
    }
});
