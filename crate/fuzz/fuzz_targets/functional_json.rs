#![no_main]

use libfuzzer_sys::fuzz_target;
use paqft_core::functionals::PolyFunctional;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(f) = PolyFunctional::from_json(text) {
        assert_eq!(PolyFunctional::from_json(&f.to_json()).unwrap(), f);
    }
});
