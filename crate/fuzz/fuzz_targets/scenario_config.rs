#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(scenario) = aoc_cli::parse_scenario(text, "fuzz.json") {
            assert!(!scenario.points.is_empty());
            for p in &scenario.points {
                p.config.validate().expect("loaded configs are valid");
            }
        }
    }
});
