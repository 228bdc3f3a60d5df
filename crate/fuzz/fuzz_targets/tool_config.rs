#![no_main]

use gesturelog_tools::config::ToolConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = ToolConfig::parse(text);
});
