//! Fuzzes the `key = value` overlay parser: it must return `Ok` or a
//! structured error on every input, never panic.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let text = String::from_utf8_lossy(data);
    let _ = dpwave::config::parse_overlay(&text);
});
