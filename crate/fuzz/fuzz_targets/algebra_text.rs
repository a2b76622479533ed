#![no_main]

use libfuzzer_sys::fuzz_target;
use paqft_core::algebraic_qm::{algebra_to_text, parse_algebra_text};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(file) = parse_algebra_text(text) {
        let printed = algebra_to_text(&file.algebra, file.state.as_ref());
        let again = parse_algebra_text(&printed).expect("printed algebra parses");
        assert_eq!(algebra_to_text(&again.algebra, again.state.as_ref()), printed);
    }
});
