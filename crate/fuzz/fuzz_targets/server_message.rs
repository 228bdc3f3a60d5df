#![no_main]

use gesturelog_core::protocol::parse_server_message;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(msg) = parse_server_message(text) {
        assert_eq!(parse_server_message(&msg.to_json()).unwrap(), msg);
    }
});
