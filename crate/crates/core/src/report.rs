//! Versioned JSON verification reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::conequad::GridDescriptor;
use crate::conformal::CalibrationRecord;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportRecord {
    pub suite: String,
    pub check: String,
    /// The statement this check verifies.
    pub anchor: String,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Calibrated constants and evidence the check used.
    pub constants: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    /// Why a check could not be evaluated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ReportRecord {
    /// Non-finite residuals are stored as `f64::MAX` and always fail.
    pub fn new(suite: &str, check: &str, anchor: &str, samples: usize, max_residual: f64, tolerance: f64) -> Self {
        let finite = max_residual.is_finite();
        let max_residual = if finite { max_residual } else { f64::MAX };
        ReportRecord {
            suite: suite.into(),
            check: check.into(),
            anchor: anchor.into(),
            samples,
            max_residual,
            tolerance,
            passed: finite && max_residual <= tolerance,
            constants: BTreeMap::new(),
            wall_time_s: None,
            note: None,
        }
    }

    pub fn with_constant(mut self, name: &str, value: f64) -> Self {
        self.constants.insert(name.into(), value);
        self
    }

    /// The record invariant: `passed` exactly when the residual is within tolerance.
    pub fn consistent(&self) -> bool {
        self.passed == (self.max_residual.is_finite() && self.max_residual <= self.tolerance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: String,
    pub seed: u64,
    pub measure_convention: String,
    pub grid: GridDescriptor,
    pub calibration: Option<CalibrationRecord>,
    pub records: Vec<ReportRecord>,
}

impl Report {
    pub fn new(seed: u64, grid: GridDescriptor, calibration: Option<CalibrationRecord>, records: Vec<ReportRecord>) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            seed,
            measure_convention: crate::conequad::MEASURE_CONVENTION.into(),
            grid,
            calibration,
            records,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.records.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ReportRecord> {
        self.records.iter().filter(|r| !r.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Report = serde_json::from_str(text).map_err(|e| Error::Report(e.to_string()))?;
        if report.schema_version != SCHEMA_VERSION {
            return Err(Error::Report(format!(
                "schema version {} is not {SCHEMA_VERSION}",
                report.schema_version
            )));
        }
        if let Some(bad) = report.records.iter().find(|r| !r.consistent()) {
            return Err(Error::Report(format!("record {}/{} has an inconsistent verdict", bad.suite, bad.check)));
        }
        Ok(report)
    }

    /// Concatenates records of reports taken with the same seed, grid and
    /// calibration.
    pub fn merge(reports: &[Report]) -> Result<Report> {
        let (first, rest) = reports
            .split_first()
            .ok_or_else(|| Error::Report("nothing to merge".into()))?;
        let mut merged = first.clone();
        for r in rest {
            if r.schema_version != merged.schema_version || r.tool_version != merged.tool_version {
                return Err(Error::Report("reports come from different versions".into()));
            }
            if r.seed != merged.seed || r.grid != merged.grid || r.measure_convention != merged.measure_convention {
                return Err(Error::Report("reports use different seeds or grids".into()));
            }
            match (&merged.calibration, &r.calibration) {
                (Some(a), Some(b)) if a != b => {
                    return Err(Error::Report("reports carry conflicting calibration records".into()))
                }
                (None, Some(b)) => merged.calibration = Some(b.clone()),
                _ => {}
            }
            merged.records.extend(r.records.iter().cloned());
        }
        Ok(merged)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conequad::RadialRule;
    use proptest::prelude::*;

    fn grid() -> GridDescriptor {
        GridDescriptor {
            radial_order: 4,
            angular_order: 4,
            azimuthal_order: 4,
            radial: RadialRule::Laguerre { scale: 1.0 },
            node_count: 64,
        }
    }

    #[test]
    fn verdicts_follow_residuals() {
        assert!(ReportRecord::new("spin", "x", "a", 1, 1e-12, 1e-10).passed);
        assert!(!ReportRecord::new("spin", "x", "a", 1, 1e-12, 0.0).passed);
        assert!(ReportRecord::new("spin", "x", "a", 1, 0.0, 0.0).passed);
        let nan = ReportRecord::new("spin", "x", "a", 1, f64::NAN, 1.0);
        assert!(!nan.passed && nan.max_residual == f64::MAX && nan.consistent());
    }

    #[test]
    fn json_round_trip_and_merge() {
        let a = Report::new(7, grid(), None, vec![ReportRecord::new("spin", "x", "a", 3, 1e-12, 1e-10).with_constant("c", 2.0)]);
        let b = Report::new(7, grid(), None, vec![ReportRecord::new("kernel", "y", "b", 3, 1.0, 1e-6)]);
        let back = Report::from_json(&a.to_json()).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.to_json(), a.to_json());
        let m = Report::merge(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(m.records.len(), 2);
        assert!(!m.all_passed());
        assert_eq!(m.failures().count(), 1);
        let other_seed = Report { seed: 8, ..b };
        assert!(Report::merge(&[a.clone(), other_seed]).is_err());
        assert!(Report::merge(&[]).is_err());
        let future = a.to_json().replace("\"schema_version\": 1", "\"schema_version\": 99");
        assert!(Report::from_json(&future).is_err());
        let lying = a.to_json().replace("\"passed\": true", "\"passed\": false");
        assert!(Report::from_json(&lying).is_err());
    }

    proptest! {
        #[test]
        fn record_round_trips(res in 0.0f64..1e3, tol in 0.0f64..1e3, samples in 0usize..10_000) {
            let r = ReportRecord::new("s", "c", "a", samples, res, tol);
            prop_assert!(r.consistent());
            let text = serde_json::to_string(&r).unwrap();
            prop_assert_eq!(serde_json::from_str::<ReportRecord>(&text).unwrap(), r);
        }

        #[test]
        fn parser_never_panics(s in ".{0,64}") {
            let _ = Report::from_json(&s);
        }
    }
}
