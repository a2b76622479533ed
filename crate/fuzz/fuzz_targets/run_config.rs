#![no_main]

use libfuzzer_sys::fuzz_target;
use paqft_core::config::RunConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = RunConfig::from_text(text) {
        let back = toml::to_string(&cfg).expect("validated config serializes");
        assert_eq!(RunConfig::from_text(&back).unwrap(), cfg);
    }
});
