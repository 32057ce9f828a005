//! Radial-order ladders for the reference integrals and a kernel diagonal.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::conequad::build_grid;
use crate::conformal::{kernel_closed, kernel_quadrature, TubePoint, KERNEL_MODE};
use crate::error::{Error, Result};
use crate::spinalg::{c, mat2};

pub const INTEGRALS: [&str; 4] = ["exp-p0", "exp-2p0", "odd-moment", "kernel-diagonal-n2"];

/// Errors at or below this (relative, or absolute for vanishing integrals)
/// count as converged.
pub const ROUNDOFF_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderRow {
    pub order: usize,
    pub value: f64,
    /// `|value − value at the next finer order|`, or the previous difference on the last rung.
    pub error_estimate: Option<f64>,
    /// Error against the closed form.
    pub exact_error: Option<f64>,
}

fn diagonal_point() -> TubePoint {
    let y = mat2(c(1.2), Complex64::new(0.3, 0.1), Complex64::new(0.3, -0.1), c(0.8));
    TubePoint::new(mat2(c(0.2), c(0.1), c(0.1), c(-0.3)), y).expect("fixed tube point")
}

/// The integral at one radial order (angular order fixed) and its closed form.
pub fn evaluate(id: &str, radial_order: usize, angular_order: usize) -> Result<(f64, f64)> {
    let grid = build_grid(radial_order, angular_order, 1.0)?;
    match id {
        "exp-p0" => Ok((grid.integrate_scalar(|p| c((-p.p0()).exp()))?.re, 2.0 * PI)),
        "exp-2p0" => Ok((grid.integrate_scalar(|p| c((-2.0 * p.p0()).exp()))?.re, PI / 2.0)),
        "odd-moment" => Ok((
            grid.integrate_scalar(|p| c((-p.p0()).exp() * (p.p()[1] + p.p()[2] + p.p()[3])))?.re,
            0.0,
        )),
        "kernel-diagonal-n2" => {
            let z = diagonal_point();
            let quad = kernel_quadrature(&z, &z, 2, &grid)?.matrix.trace().re;
            let closed = kernel_closed(&z, &z, 2, KERNEL_MODE)?.matrix.trace().re;
            Ok((quad, closed))
        }
        other => Err(Error::UnknownIntegral(other.into())),
    }
}

fn error_against(value: f64, exact: f64) -> f64 {
    if exact == 0.0 {
        value.abs()
    } else {
        ((value - exact) / exact).abs()
    }
}

/// One row per ladder order; an empty ladder yields an empty table.
pub fn convergence_study(id: &str, ladder: &[usize], angular_order: usize) -> Result<Vec<LadderRow>> {
    if !INTEGRALS.contains(&id) {
        return Err(Error::UnknownIntegral(id.into()));
    }
    let evaluated = ladder
        .iter()
        .map(|&k| evaluate(id, k, angular_order))
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = evaluated.iter().map(|(v, _)| *v).collect();
    let scale = |exact: f64| if exact == 0.0 { 1.0 } else { exact.abs() };
    Ok(evaluated
        .iter()
        .enumerate()
        .map(|(i, &(value, exact))| {
            let neighbour = if i + 1 < values.len() {
                Some(values[i + 1])
            } else if i > 0 {
                Some(values[i - 1])
            } else {
                None
            };
            LadderRow {
                order: ladder[i],
                value,
                error_estimate: neighbour.map(|v| (value - v).abs() / scale(exact)),
                exact_error: Some(error_against(value, exact)),
            }
        })
        .collect())
}

/// Rungs where the error failed to drop although it was above the floor, or
/// rose above the floor after reaching it.
pub fn monotonicity_violations(rows: &[LadderRow]) -> usize {
    let errors: Vec<f64> = rows
        .iter()
        .map(|r| r.exact_error.or(r.error_estimate).unwrap_or(0.0))
        .collect();
    errors
        .windows(2)
        .filter(|w| {
            if w[0] <= ROUNDOFF_FLOOR {
                w[1] > ROUNDOFF_FLOOR
            } else {
                w[1] >= w[0]
            }
        })
        .count()
}

pub fn to_csv(rows: &[LadderRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["order", "value", "error_estimate", "exact_error"])
        .expect("in-memory write");
    let cell = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
    for r in rows {
        w.write_record([
            r.order.to_string(),
            format!("{:.17e}", r.value),
            cell(r.error_estimate),
            cell(r.exact_error),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladders() {
        assert!(convergence_study("exp-p0", &[], 24).unwrap().is_empty());
        assert_eq!(to_csv(&[]), "order,value,error_estimate,exact_error\n");
        let rows = convergence_study("exp-p0", &[8, 16, 32, 64], 24).unwrap();
        assert!(rows[2].exact_error.unwrap() < 1e-10);
        assert_eq!(monotonicity_violations(&rows), 0);
        let rows = convergence_study("exp-2p0", &[4, 8, 16, 32], 24).unwrap();
        assert_eq!(monotonicity_violations(&rows), 0);
        assert!(rows[0].exact_error.unwrap() > rows[1].exact_error.unwrap());
        let csv = to_csv(&rows);
        assert_eq!(csv.lines().count(), 5);
        assert!(matches!(convergence_study("nope", &[4], 8), Err(Error::UnknownIntegral(_))));
        let single = convergence_study("odd-moment", &[8], 8).unwrap();
        assert_eq!(single[0].error_estimate, None);
    }

    #[test]
    fn monotonicity_rule() {
        let row = |e: f64| LadderRow {
            order: 0,
            value: 0.0,
            error_estimate: None,
            exact_error: Some(e),
        };
        assert_eq!(monotonicity_violations(&[row(1e-2), row(1e-5), row(1e-15), row(3e-15)]), 0);
        assert_eq!(monotonicity_violations(&[row(1e-2), row(1e-2)]), 1);
        assert_eq!(monotonicity_violations(&[row(1e-15), row(1e-6)]), 1);
    }
}
