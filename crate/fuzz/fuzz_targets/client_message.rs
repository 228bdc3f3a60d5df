#![no_main]

use gesturelog_core::protocol::{parse_client_message, ClientMessage};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(msg) = parse_client_message(text) {
        let ClientMessage::Frame(f) = &msg;
        for h in &f.hands {
            let _ = h.skeleton().map(|s| gesturelog_core::normalize(&s));
        }
        let again = serde_json::to_string(&msg).unwrap();
        if again.len() <= gesturelog_core::protocol::MAX_MESSAGE_BYTES {
            assert_eq!(parse_client_message(&again).unwrap(), msg);
        }
    }
});
