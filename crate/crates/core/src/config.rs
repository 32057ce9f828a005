//! Flat key-value run configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest degree `n` any suite accepts.
pub const MAX_DEGREE: usize = 6;

/// Inclusive degree range written `a..b` (or `a..=b`, or a single `a`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct NRange {
    pub start: usize,
    pub end: usize,
}

impl NRange {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start > end {
            return Err(Error::Config(format!("empty n range {start}..{end}")));
        }
        if end > MAX_DEGREE {
            return Err(Error::Config(format!("n = {end} exceeds the maximum {MAX_DEGREE}")));
        }
        Ok(NRange { start, end })
    }

    pub fn single(n: usize) -> Result<Self> {
        NRange::new(n, n)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.start..=self.end
    }

    pub fn contains(&self, n: usize) -> bool {
        (self.start..=self.end).contains(&n)
    }

    /// Degrees in the range that also lie in `allowed`.
    pub fn within(&self, allowed: &[usize]) -> Vec<usize> {
        allowed.iter().copied().filter(|&n| self.contains(n)).collect()
    }
}

impl FromStr for NRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let parse = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("invalid n range {s:?}")))
        };
        match s.split_once("..") {
            Some((a, b)) => NRange::new(parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
            None => NRange::single(parse(s)?),
        }
    }
}

impl TryFrom<String> for NRange {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<NRange> for String {
    fn from(r: NRange) -> String {
        r.to_string()
    }
}

impl fmt::Display for NRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Restricts the degrees each suite checks.
    pub n_range: NRange,
    pub radial_order: usize,
    pub angular_order: usize,
    pub radial_scale: f64,
    /// Multiplies every check tolerance; `0` demands exact results.
    pub tol_scale: f64,
    /// Multiplies every sample count (at least one sample is always drawn).
    pub sample_scale: f64,
    pub tol_spin: f64,
    pub tol_poincare: f64,
    pub tol_factor: f64,
    pub tol_cocycle: f64,
    pub tol_kernel: f64,
    pub tol_extension: f64,
    pub tol_embedding: f64,
    pub tol_net: f64,
    pub tol_convergence: f64,
    /// Packet catalog entries used by the net suites.
    pub packets: Vec<String>,
    /// Group-element families used by the intertwiner catalog.
    pub elements: Vec<String>,
    /// Radial orders for convergence studies.
    pub ladder: Vec<usize>,
    /// Include per-record wall times; reports are then no longer reproducible byte for byte.
    pub record_timings: bool,
    pub out: Option<PathBuf>,
    pub csv_out: Option<PathBuf>,
}

pub const PACKET_NAMES: [&str; 3] = ["centered", "offset", "squeezed"];
pub const ELEMENT_FAMILIES: [&str; 4] = ["translations", "lorentz", "dilations", "special"];

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 7,
            n_range: NRange { start: 0, end: MAX_DEGREE },
            radial_order: 32,
            angular_order: 24,
            radial_scale: 1.0,
            tol_scale: 1.0,
            sample_scale: 1.0,
            tol_spin: 1.0,
            tol_poincare: 1.0,
            tol_factor: 1.0,
            tol_cocycle: 1.0,
            tol_kernel: 1.0,
            tol_extension: 1.0,
            tol_embedding: 1.0,
            tol_net: 1.0,
            tol_convergence: 1.0,
            packets: PACKET_NAMES.iter().map(|s| s.to_string()).collect(),
            elements: ELEMENT_FAMILIES.iter().map(|s| s.to_string()).collect(),
            ladder: vec![4, 8, 16, 32, 64],
            record_timings: false,
            out: None,
            csv_out: None,
        }
    }
}

impl SuiteConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: SuiteConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        SuiteConfig::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        NRange::new(self.n_range.start, self.n_range.end)?;
        if self.radial_order < 2 || self.angular_order < 2 {
            return Err(Error::Config("quadrature orders must be at least 2".into()));
        }
        if self.radial_order > 160 {
            return Err(Error::Config("radial order above 160 overflows the Laguerre weights".into()));
        }
        if !(self.radial_scale > 0.0 && self.radial_scale.is_finite()) {
            return Err(Error::Config("radial_scale must be positive".into()));
        }
        if !(self.sample_scale > 0.0 && self.sample_scale.is_finite()) {
            return Err(Error::Config("sample_scale must be positive".into()));
        }
        let tolerances = [
            ("tol_scale", self.tol_scale),
            ("tol_spin", self.tol_spin),
            ("tol_poincare", self.tol_poincare),
            ("tol_factor", self.tol_factor),
            ("tol_cocycle", self.tol_cocycle),
            ("tol_kernel", self.tol_kernel),
            ("tol_extension", self.tol_extension),
            ("tol_embedding", self.tol_embedding),
            ("tol_net", self.tol_net),
            ("tol_convergence", self.tol_convergence),
        ];
        for (name, value) in tolerances {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::Config(format!("{name} must be a finite non-negative number")));
            }
        }
        for p in &self.packets {
            if !PACKET_NAMES.contains(&p.as_str()) {
                return Err(Error::Config(format!("unknown packet {p:?}")));
            }
        }
        for e in &self.elements {
            if !ELEMENT_FAMILIES.contains(&e.as_str()) {
                return Err(Error::Config(format!("unknown element family {e:?}")));
            }
        }
        if self.ladder.iter().any(|&k| !(2..=160).contains(&k)) {
            return Err(Error::Config("ladder orders must lie in 2..=160".into()));
        }
        Ok(())
    }

    /// Per-suite tolerance multiplier times the global scale.
    pub fn tolerance_factor(&self, suite: &str) -> f64 {
        let local = match suite {
            "spin" => self.tol_spin,
            "poincare" => self.tol_poincare,
            "factor" => self.tol_factor,
            "conformal-cocycle" => self.tol_cocycle,
            "kernel" => self.tol_kernel,
            "extension" => self.tol_extension,
            "embedding" => self.tol_embedding,
            "net-axioms" => self.tol_net,
            "convergence" => self.tol_convergence,
            _ => 1.0,
        };
        local * self.tol_scale
    }

    pub fn samples(&self, base: usize) -> usize {
        ((base as f64 * self.sample_scale).round() as usize).max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn n_range_syntax() {
        assert_eq!("0..2".parse::<NRange>().unwrap(), NRange { start: 0, end: 2 });
        assert_eq!("1..=3".parse::<NRange>().unwrap(), NRange { start: 1, end: 3 });
        assert_eq!(" 4 ".parse::<NRange>().unwrap(), NRange { start: 4, end: 4 });
        for bad in ["", "2..1", "0..7", "a..b", "..", "1..2..3", "-1..2"] {
            assert!(bad.parse::<NRange>().is_err(), "{bad:?}");
        }
        assert_eq!(NRange::new(0, 3).unwrap().within(&[1, 3, 5]), vec![1, 3]);
    }

    #[test]
    fn config_round_trip_and_validation() {
        let c = SuiteConfig::default();
        assert_eq!(SuiteConfig::from_toml_str(&c.to_toml_string()).unwrap(), c);
        let parsed = SuiteConfig::from_toml_str("seed = 11\nn_range = \"1..3\"\ntol_scale = 2.0\n").unwrap();
        assert_eq!(parsed.seed, 11);
        assert_eq!(parsed.n_range, NRange { start: 1, end: 3 });
        assert_eq!(parsed.tolerance_factor("kernel"), 2.0);
        assert!(SuiteConfig::from_toml_str("bogus = 1").is_err());
        assert!(SuiteConfig::from_toml_str("tol_kernel = -1.0").is_err());
        assert!(SuiteConfig::from_toml_str("n_range = \"0..9\"").is_err());
        assert!(SuiteConfig::from_toml_str("packets = [\"nope\"]").is_err());
        assert!(SuiteConfig::from_toml_str("radial_order = 1").is_err());
        assert!(SuiteConfig::from_toml_str("ladder = [1]").is_err());
        assert_eq!(c.samples(500), 500);
        let quick = SuiteConfig { sample_scale: 0.001, ..c };
        assert_eq!(quick.samples(500), 1);
    }

    proptest! {
        #[test]
        fn n_range_display_round_trips(a in 0usize..=6, b in 0usize..=6) {
            let (lo, hi) = (a.min(b), a.max(b));
            let r = NRange::new(lo, hi).unwrap();
            prop_assert_eq!(r.to_string().parse::<NRange>().unwrap(), r);
            prop_assert_eq!(r.iter().count(), hi - lo + 1);
        }

        #[test]
        fn n_range_parser_never_panics(s in ".{0,12}") {
            let _ = s.parse::<NRange>();
        }
    }
}
