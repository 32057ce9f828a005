#![no_main]

use helicity::config::SuiteConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(config) = SuiteConfig::from_toml_str(text) {
        let again = SuiteConfig::from_toml_str(&config.to_toml_string()).expect("serialized config parses");
        assert_eq!(again, config);
        let _ = config.tolerance_factor("kernel");
        let _ = config.samples(500);
    }
});
