#![no_main]

use ecgsynth::pipeline::load_config;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(config) = load_config(text) {
            assert!(config.workers >= 1);
            assert!(!config.domains.paper_speed.is_empty());
        }
    }
});
