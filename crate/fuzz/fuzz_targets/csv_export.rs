#![no_main]

use gesturelog_core::annotation::{parse_csv, write_csv};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = parse_csv(data) {
        // one write normalizes number formatting; after that the bytes are a fixed point
        let once = write_csv(&rows);
        let twice = write_csv(&parse_csv(&once).unwrap());
        assert_eq!(once, twice);
    }
});
