#![no_main]

use ecgsynth::annotate::{decode_f64, decode_signals, encode_f64};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(array) = decode_f64(data) {
        assert_eq!(array.shape.iter().product::<usize>(), array.data.len());
        let again = decode_f64(&encode_f64(&array.shape, &array.data).expect("re-encode")).expect("re-decode");
        assert_eq!(again.shape, array.shape);
        assert_eq!(again.data.len(), array.data.len());
    }
    let _ = decode_signals(data);
});
