#![no_main]

use gesturelog_tools::trace::ReplayTrace;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(trace) = ReplayTrace::from_json(text) {
        let _ = trace.gaps_ms();
        assert_eq!(ReplayTrace::from_json(&trace.to_json()).unwrap(), trace);
    }
});
