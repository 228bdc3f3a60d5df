#![no_main]

use gesturelog_core::dataset::{parse_landmark_jsonl, write_landmark_jsonl};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(samples) = parse_landmark_jsonl(text) {
        assert_eq!(parse_landmark_jsonl(&write_landmark_jsonl(&samples)).unwrap(), samples);
    }
});
