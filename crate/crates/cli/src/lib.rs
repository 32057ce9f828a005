//! Argument parsing and command dispatch for the `helicity` binary.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use helicity::config::{NRange, SuiteConfig};
use helicity::convergence::{convergence_study, monotonicity_violations, to_csv, INTEGRALS};
use helicity::report::Report;
use helicity::suites::{calibration_report, run, SUITES};

/// Exit status when every check passed.
pub const EXIT_PASS: u8 = 0;
/// Exit status when a check failed.
pub const EXIT_FAIL: u8 = 1;
/// Exit status for invalid input (unknown names, bad config, unreadable files).
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "helicity", version, about = "Verification suites for massless Poincaré and conformal representations")]
pub struct Cli {
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

/// Settings that override the config file.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// Flat TOML file with SuiteConfig keys
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Degree range, `a..b` (inclusive) or a single degree
    #[arg(long = "n", global = true, value_name = "RANGE", value_parser = parse_n_range)]
    pub n_range: Option<NRange>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub radial_order: Option<usize>,
    #[arg(long, global = true)]
    pub angular_order: Option<usize>,
    /// Multiplies every tolerance; 0 demands exact results
    #[arg(long, global = true)]
    pub tol_scale: Option<f64>,
    /// Multiplies every sample count
    #[arg(long, global = true)]
    pub sample_scale: Option<f64>,
    /// Write the report (JSON) or table (CSV) here instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the kernel constants and select the kernel continuation
    Calibrate,
    /// Run one or more suites (`all` runs every suite)
    Verify {
        #[arg(required = true, value_parser = parse_suite)]
        suites: Vec<String>,
    },
    /// Tabulate an integral along a radial-order ladder
    Converge {
        #[arg(value_parser = parse_integral)]
        integral: String,
        /// Comma-separated radial orders, e.g. 8,16,32,64
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<usize>>,
    },
    /// Operate on saved reports
    Report {
        #[command(subcommand)]
        action: ReportAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum ReportAction {
    /// Concatenate reports taken with the same seed and grid
    Merge {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

pub fn parse_n_range(s: &str) -> Result<NRange, String> {
    s.parse().map_err(|e: helicity::Error| e.to_string())
}

pub fn parse_suite(s: &str) -> Result<String, String> {
    if s == "all" || SUITES.contains(&s) {
        Ok(s.to_string())
    } else {
        Err(format!("unknown suite `{s}`; expected one of: all, {}", SUITES.join(", ")))
    }
}

pub fn parse_integral(s: &str) -> Result<String, String> {
    if INTEGRALS.contains(&s) {
        Ok(s.to_string())
    } else {
        Err(format!("unknown integral `{s}`; expected one of: {}", INTEGRALS.join(", ")))
    }
}

#[derive(Debug)]
pub struct CliError(pub String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CliError {}

impl From<helicity::Error> for CliError {
    fn from(e: helicity::Error) -> Self {
        CliError(e.to_string())
    }
}

impl Overrides {
    /// The config file (or defaults) with command-line flags applied, validated.
    pub fn resolve(&self) -> Result<SuiteConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => SuiteConfig::load(path).map_err(|e| CliError(format!("{}: {e}", path.display())))?,
            None => SuiteConfig::default(),
        };
        if let Some(n) = self.n_range {
            config.n_range = n;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(k) = self.radial_order {
            config.radial_order = k;
        }
        if let Some(k) = self.angular_order {
            config.angular_order = k;
        }
        if let Some(t) = self.tol_scale {
            config.tol_scale = t;
        }
        if let Some(s) = self.sample_scale {
            config.sample_scale = s;
        }
        if let Some(out) = &self.out {
            config.out = Some(out.clone());
            config.csv_out = Some(out.clone());
        }
        config.validate()?;
        Ok(config)
    }
}

fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| if text.ends_with('\n') { Ok(()) } else { stdout.write_all(b"\n") })
                .map_err(|e| CliError(e.to_string()))
        }
    }
}

fn summarize(report: &Report) -> u8 {
    let total = report.records.len();
    let failed: Vec<_> = report.failures().collect();
    for r in &failed {
        match &r.note {
            Some(note) => eprintln!("FAIL {}/{}: {note}", r.suite, r.check),
            None => eprintln!(
                "FAIL {}/{}: residual {:.3e} > tolerance {:.1e}",
                r.suite, r.check, r.max_residual, r.tolerance
            ),
        }
    }
    eprintln!("{} of {total} checks passed", total - failed.len());
    if failed.is_empty() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

/// Runs a parsed command and returns the process exit status.
pub fn execute(cli: &Cli) -> Result<u8, CliError> {
    let config = cli.overrides.resolve()?;
    match &cli.command {
        Command::Calibrate => {
            let report = calibration_report(&config)?;
            emit(&report.to_json(), config.out.as_deref())?;
            Ok(summarize(&report))
        }
        Command::Verify { suites } => {
            let names: Vec<&str> = if suites.iter().any(|s| s == "all") {
                SUITES.to_vec()
            } else {
                let mut names: Vec<&str> = suites.iter().map(String::as_str).collect();
                names.dedup();
                names
            };
            let report = run(&names, &config)?;
            emit(&report.to_json(), config.out.as_deref())?;
            Ok(summarize(&report))
        }
        Command::Converge { integral, ladder } => {
            let ladder = ladder.clone().unwrap_or_else(|| config.ladder.clone());
            if let Some(&bad) = ladder.iter().find(|&&k| !(2..=160).contains(&k)) {
                return Err(CliError(format!("ladder order {bad} outside 2..=160")));
            }
            let rows = convergence_study(integral, &ladder, config.angular_order)?;
            emit(&to_csv(&rows), config.csv_out.as_deref())?;
            let violations = monotonicity_violations(&rows);
            if violations > 0 {
                eprintln!("FAIL {integral}: error failed to decrease on {violations} rung(s)");
                Ok(EXIT_FAIL)
            } else {
                Ok(EXIT_PASS)
            }
        }
        Command::Report { action: ReportAction::Merge { files } } => {
            let reports = files
                .iter()
                .map(|path| {
                    let text = std::fs::read_to_string(path).map_err(|e| CliError(format!("{}: {e}", path.display())))?;
                    Report::from_json(&text).map_err(|e| CliError(format!("{}: {e}", path.display())))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let merged = Report::merge(&reports)?;
            emit(&merged.to_json(), config.out.as_deref())?;
            Ok(summarize(&merged))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("helicity").chain(args.iter().copied()))
    }

    #[test]
    fn command_line_shape() {
        <Cli as clap::CommandFactory>::command().debug_assert();
        let cli = parse(&["verify", "kernel", "--n", "1", "--seed", "7"]).unwrap();
        assert_eq!(cli.overrides.n_range, Some(NRange::single(1).unwrap()));
        let config = cli.overrides.resolve().unwrap();
        assert_eq!((config.seed, config.n_range.start, config.n_range.end), (7, 1, 1));
        assert!(parse(&["verify", "bogus"]).is_err());
        assert!(parse(&["verify"]).is_err());
        assert!(parse(&["calibrate", "--n", "0..9"]).is_err());
        assert!(parse(&["converge", "nope"]).is_err());
        let cli = parse(&["converge", "exp-p0", "--ladder", "8,16"]).unwrap();
        assert!(matches!(cli.command, Command::Converge { ladder: Some(ref l), .. } if l == &[8, 16]));
        assert!(parse(&["report", "merge"]).is_err());
    }

    #[test]
    fn flags_are_validated_after_merging() {
        let cli = parse(&["calibrate", "--radial-order", "1"]).unwrap();
        assert!(cli.overrides.resolve().is_err());
        let cli = parse(&["calibrate", "--tol-scale=-1"]).unwrap();
        assert!(cli.overrides.resolve().is_err());
    }
}
