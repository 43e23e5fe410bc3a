#![no_main]

use dirac_cli::parse_system;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let _ = parse_system(text, "fuzz.sys");
});
