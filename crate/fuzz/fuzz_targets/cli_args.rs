#![no_main]

use clap::Parser;
use helicity::config::NRange;
use helicity_cli::{parse_integral, parse_n_range, parse_suite, Cli};
use libfuzzer_sys::fuzz_target;

// Arguments are NUL-separated so that spaces and quotes reach the parser intact.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(range) = parse_n_range(text) {
        assert!(range.start <= range.end);
        assert_eq!(range.to_string().parse::<NRange>().ok(), Some(range));
    }
    let _ = parse_suite(text);
    let _ = parse_integral(text);

    let args = std::iter::once("helicity").chain(text.split('\0'));
    if let Ok(cli) = Cli::try_parse_from(args) {
        if cli.overrides.config.is_none() {
            let _ = cli.overrides.resolve();
        }
    }
});
