#![no_main]

use libfuzzer_sys::fuzz_target;
use paqft_core::formal_series::FormalSeries;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = FormalSeries::from_json(text) {
        assert_eq!(FormalSeries::from_json(&s.to_json()).unwrap(), s);
    }
});
