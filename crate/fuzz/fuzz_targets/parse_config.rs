#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    // config parsing must reject arbitrary input gracefully, never panic
    let _ = fracexpand::config::parse_config(text);
    let _ = fracexpand::config::parse_alpha(text);
});
