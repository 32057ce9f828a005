use helicity::config::{NRange, SuiteConfig};
use helicity::report::Report;
use helicity::suites::{calibration_report, run, run_suite};
use helicity::Error;

fn quick() -> SuiteConfig {
    SuiteConfig {
        n_range: NRange::new(0, 2).unwrap(),
        sample_scale: 0.1,
        ..SuiteConfig::default()
    }
}

#[test]
fn cheap_suites_pass_and_round_trip() {
    let config = quick();
    let report = run(&["spin", "poincare", "conformal-cocycle", "convergence"], &config).unwrap();
    assert!(report.all_passed(), "{:?}", report.failures().collect::<Vec<_>>());
    assert!(report.records.iter().all(|r| r.consistent() && r.wall_time_s.is_none()));
    let calibration = report.calibration.as_ref().unwrap();
    assert_eq!(calibration.constants.len(), 3);

    let text = report.to_json();
    assert_eq!(Report::from_json(&text).unwrap(), report);
    assert_eq!(run(&["spin", "poincare", "conformal-cocycle", "convergence"], &config).unwrap().to_json(), text);
}

#[test]
fn seeds_change_samples_not_verdicts() {
    let a = run_suite("poincare", &quick()).unwrap();
    let b = run_suite("poincare", &SuiteConfig { seed: 99, ..quick() }).unwrap();
    assert!(a.iter().chain(&b).all(|r| r.passed));
    assert_ne!(a, b);
}

#[test]
fn calibration_constants_match_two_pi_factorial() {
    let report = calibration_report(&quick()).unwrap();
    assert!(report.all_passed());
    let names: Vec<&str> = report.records.iter().map(|r| r.check.as_str()).collect();
    assert_eq!(names, ["C_0", "C_1", "C_2"]);
}

#[test]
fn merging_separately_run_suites() {
    let config = quick();
    let spin = run(&["spin"], &config).unwrap();
    let poincare = run(&["poincare"], &config).unwrap();
    let merged = Report::merge(&[spin.clone(), poincare]).unwrap();
    assert_eq!(merged.records.len(), spin.records.len() + 4);
    let other = run(&["spin"], &SuiteConfig { radial_order: 24, ..quick() }).unwrap();
    assert!(matches!(Report::merge(&[spin, other]), Err(Error::Report(_))));
}

#[test]
fn timings_are_opt_in() {
    let config = SuiteConfig { record_timings: true, ..quick() };
    let records = run_suite("spin", &config).unwrap();
    assert!(records.iter().all(|r| r.wall_time_s.is_some()));
}
