#![no_main]

use helicity::report::Report;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(report) = Report::from_json(text) {
        assert!(report.records.iter().all(|r| r.consistent()));
        let again = Report::from_json(&report.to_json()).expect("serialized report parses");
        assert_eq!(again.to_json(), report.to_json());
        let merged = Report::merge(&[report.clone(), report]).expect("a report merges with itself");
        assert!(merged.records.len() % 2 == 0);
    }
});
