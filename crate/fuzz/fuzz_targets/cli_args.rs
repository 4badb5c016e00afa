#![no_main]

use aoc_cli::args::{parse_frame, parse_snapshots, parse_variants, Cli};
use clap::Parser;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let _ = parse_frame(text);
    let _ = parse_snapshots(text);
    let _ = parse_variants(text);
    let args = std::iter::once("aoc").chain(text.split('\0'));
    let _ = Cli::try_parse_from(args);
});
