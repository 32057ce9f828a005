//! End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero exit
//! status if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use helicity::conformal::{ExtensionMode, KERNEL_MODE};
use helicity::convergence::{convergence_study, monotonicity_violations};
use helicity::suites::*;
use helicity::Result;

const SEED: u64 = 7;

type Criterion = (&'static str, fn() -> Result<Outcome>);

struct Outcome {
    passed: bool,
    detail: String,
}

/// Residuals must lie strictly below their bound; a negative bound marks a
/// count that must be zero.
const ZERO: f64 = -1.0;

fn outcome(checks: &[(&str, f64, f64)]) -> Outcome {
    let ok = |value: f64, bound: f64| if bound == ZERO { value == 0.0 } else { value.is_finite() && value < bound };
    let passed = checks.iter().all(|&(_, value, bound)| ok(value, bound));
    let detail = checks
        .iter()
        .map(|&(name, value, bound)| {
            if bound == ZERO {
                format!("{name} {value} (= 0)")
            } else {
                format!("{name} {value:.2e} (< {bound:.0e})")
            }
        })
        .collect::<Vec<_>>()
        .join(", ");
    Outcome { passed, detail }
}

fn representation_laws() -> Result<Outcome> {
    let ns = [0, 1, 2, 3, 4];
    Ok(outcome(&[
        ("sym_power", sym_power_multiplicativity(&ns, 500, SEED)?.residual, 1e-10),
        ("rep_d", rep_d_multiplicativity(&ns, 500, SEED + 1)?.residual, 1e-10),
        ("beta", beta_covariance(&ns, 500, SEED + 2)?.residual, 1e-10),
    ]))
}

fn boost_section() -> Result<Outcome> {
    Ok(outcome(&[
        ("section", boost_section_identities(500, SEED)?.residual, 1e-10),
        ("reference", reference_boost_residual()?.residual, 4.0 * f64::EPSILON),
    ]))
}

fn little_group() -> Result<Outcome> {
    Ok(outcome(&[
        ("membership", little_group_membership(500, SEED)?.residual, 1e-9),
        ("cocycle", phase_cocycle(500, SEED + 1)?.residual, 1e-9),
    ]))
}

fn quadrature_calibration() -> Result<Outcome> {
    let grid = default_grid(&Default::default())?;
    let ladder = [4, 8, 16, 32, 64];
    let mut violations = 0;
    for id in ["exp-p0", "exp-2p0"] {
        violations += monotonicity_violations(&convergence_study(id, &ladder, 24)?);
    }
    Ok(outcome(&[
        ("reference", reference_integrals(&grid)?.residual, 1e-8),
        ("ladder_violations", violations as f64, ZERO),
    ]))
}

fn laplace_identity_and_constants() -> Result<Outcome> {
    let grid = default_grid(&Default::default())?;
    Ok(outcome(&[
        ("identity", laplace_identity(&[0, 1, 2], &grid, SEED)?.residual, 1e-6),
        ("C0_C1", fitted_constants(&[0, 1], &grid, SEED)?.residual, 1e-6),
    ]))
}

fn phi_plus() -> Result<Outcome> {
    let grid = default_grid(&Default::default())?;
    let ns = [1, 2, 3];
    let witness = ns
        .iter()
        .map(|&n| range_summand_witness(n, &grid).map(|m| m.residual))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(outcome(&[
        ("isometry", phi_plus_isometry(&ns, &grid)?.residual, 1e-8),
        ("intertwining", phi_plus_intertwining(&ns, &grid, SEED)?.residual, 1e-8),
        ("1e-3/witness", 1e-3 / witness, 1.0),
    ]))
}

fn conformal_cocycle() -> Result<Outcome> {
    let ns = [0, 1, 2, 3, 4];
    let mut checks = Vec::new();
    for mode in ExtensionMode::ALL {
        checks.push((mode.name(), cocycle_law(mode, &ns, 200, SEED)?.residual, 1e-9));
    }
    checks.push(("tau_unitary", tau_unitarity(&ns, 100, SEED + 1)?.residual, 1e-10));
    Ok(outcome(&checks))
}

fn kernel() -> Result<Outcome> {
    let grid = default_grid(&Default::default())?;
    let ns = [0, 1, 2];
    let modes = kernel_modes(&ns, 20, &grid, SEED + 2)?;
    let matching = modes.matching(1e-6);
    let unique = matching == [KERNEL_MODE];
    let cov = kernel_covariance(&ns, 100, 1e-6, &grid, SEED + 3)?;
    Ok(outcome(&[
        ("hermitian", kernel_hermitian_symmetry(&ns, 20, &grid, SEED)?.residual, 1e-8),
        ("diagonal_psd", kernel_diagonal_psd(&ns, 20, &grid, SEED + 1)?.residual, 1e-9),
        ("calibrated_mode", modes.residual(KERNEL_MODE), 1e-6),
        ("other_matching_modes", (matching.len() - usize::from(unique)) as f64, ZERO),
        ("covariance", cov.frozen_residual(), 1e-6),
        ("assignment_changes", (cov.samples - cov.frozen_unique) as f64, ZERO),
    ]))
}

fn extension() -> Result<Outcome> {
    let grid = default_grid(&Default::default())?;
    let ns = [0, 1, 2];
    Ok(outcome(&[
        ("gram", gram_invariance(&ns, 20, 8, &grid, SEED)?.residual, 1e-5),
        ("restriction", poincare_restriction(&ns, 20, SEED + 1)?.residual, 1e-8),
    ]))
}

fn y_limit() -> Result<Outcome> {
    let mut steps_up = 0;
    let mut last: f64 = 0.0;
    for n in [0, 1, 2] {
        let ratios = y_limit_ratios(n, 10, SEED + n as u64)?;
        steps_up += non_decreasing_steps(&ratios);
        last = last.max(*ratios.last().unwrap_or(&f64::NAN));
    }
    Ok(outcome(&[("non_decreasing_steps", steps_up as f64, ZERO), ("final", last, 1e-4)]))
}

fn net_covariance() -> Result<Outcome> {
    let families: Vec<String> = helicity::config::ELEMENT_FAMILIES.iter().map(|s| s.to_string()).collect();
    let packets: Vec<String> = helicity::config::PACKET_NAMES.iter().map(|s| s.to_string()).collect();
    let elements = element_catalog(&families);
    assert_eq!(elements.len(), 12);
    Ok(outcome(&[
        ("intertwiner", intertwiner_catalog(&elements, &packets, &[0, 1, 2], SEED)?.residual, 1e-6),
        ("support_escapes", support_containment(&elements, 1000, SEED)?.residual, ZERO),
    ]))
}

fn causality() -> Result<Outcome> {
    let grid = causality_grid()?;
    let mut spacelike: f64 = 0.0;
    let mut ratio: f64 = 0.0;
    for n in [0, 1, 2] {
        for (space, time) in causality_pairs(n, &grid, SEED)? {
            spacelike = spacelike.max(space);
            ratio = ratio.max(space / time);
        }
    }
    Ok(outcome(&[("spacelike", spacelike, 1e-3), ("spacelike/timelike", ratio, 0.1)]))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("representation laws", representation_laws),
        ("boost section", boost_section),
        ("little group", little_group),
        ("quadrature calibration", quadrature_calibration),
        ("Laplace identity and C_n", laplace_identity_and_constants),
        ("Phi+ isometry and intertwining", phi_plus),
        ("conformal cocycle", conformal_cocycle),
        ("reproducing kernel", kernel),
        ("extended representation", extension),
        ("y-embedding limit", y_limit),
        ("net covariance", net_covariance),
        ("causality", causality),
    ];
    let start = Instant::now();
    let mut failures = 0;
    for (i, (name, criterion)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (verdict, detail) = match criterion() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !verdict {
            failures += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{:.1}s]",
            if verdict { "PASS" } else { "FAIL" },
            i + 1,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failures} failed in {:.1}s",
        criteria.len() - failures,
        start.elapsed().as_secs_f64()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
