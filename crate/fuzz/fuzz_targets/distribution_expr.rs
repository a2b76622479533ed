#![no_main]

use libfuzzer_sys::fuzz_target;
use paqft_core::eg_renorm::parse_distribution;

// Printing is a fixed point once an expression has been read back.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(d) = parse_distribution(text) {
        let printed = d.to_string();
        if let Ok(again) = parse_distribution(&printed) {
            assert_eq!(again.to_string(), printed);
        }
    }
});
