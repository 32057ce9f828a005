//! One-dimensional Gauss rules from the three-term recurrence.
//!
//! Nodes start from the eigenvalues of the Jacobi matrix and are polished by
//! Newton steps on the orthonormal polynomial; weights come from the
//! Christoffel sum `1/Σ p_k(x)²`, which keeps full relative accuracy in the
//! tails where eigenvector-based weights underflow to noise.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

struct Recurrence {
    diag: Vec<f64>,
    /// `b_k = √β_k` for k = 1..=n.
    off: Vec<f64>,
    mu0: f64,
}

impl Recurrence {
    fn legendre(n: usize) -> Self {
        Recurrence {
            diag: vec![0.0; n],
            off: (1..=n)
                .map(|k| {
                    let k = k as f64;
                    (k * k / (4.0 * k * k - 1.0)).sqrt()
                })
                .collect(),
            mu0: 2.0,
        }
    }

    fn laguerre(n: usize, alpha: u32) -> Self {
        let a = alpha as f64;
        Recurrence {
            diag: (0..n).map(|k| 2.0 * k as f64 + a + 1.0).collect(),
            off: (1..=n).map(|k| (k as f64 * (k as f64 + a)).sqrt()).collect(),
            mu0: (1..=alpha).map(|k| k as f64).product(),
        }
    }

    fn hermite(n: usize) -> Self {
        Recurrence {
            diag: vec![0.0; n],
            off: (1..=n).map(|k| (k as f64 / 2.0).sqrt()).collect(),
            mu0: std::f64::consts::PI.sqrt(),
        }
    }

    /// `(p_n(x), p_n'(x), Σ_{k<n} p_k(x)²)` for the orthonormal family.
    fn evaluate(&self, x: f64) -> (f64, f64, f64) {
        let n = self.diag.len();
        let (mut p_prev, mut p) = (0.0, 1.0 / self.mu0.sqrt());
        let (mut d_prev, mut d) = (0.0, 0.0);
        let mut christoffel = 0.0;
        for k in 0..n {
            christoffel += p * p;
            let b_prev = if k == 0 { 0.0 } else { self.off[k - 1] };
            let p_next = ((x - self.diag[k]) * p - b_prev * p_prev) / self.off[k];
            let d_next = ((x - self.diag[k]) * d + p - b_prev * d_prev) / self.off[k];
            p_prev = p;
            p = p_next;
            d_prev = d;
            d = d_next;
        }
        (p, d, christoffel)
    }

    fn rule(&self, scale_weight: impl Fn(f64) -> f64) -> GaussRule {
        let n = self.diag.len();
        let jacobi = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diag[i]
            } else if i + 1 == j {
                self.off[i]
            } else if j + 1 == i {
                self.off[j]
            } else {
                0.0
            }
        });
        let mut nodes: Vec<f64> = SymmetricEigen::new(jacobi).eigenvalues.iter().cloned().collect();
        nodes.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        let weights = nodes
            .iter_mut()
            .map(|x| {
                for _ in 0..4 {
                    let (p, d, _) = self.evaluate(*x);
                    if d == 0.0 {
                        break;
                    }
                    let step = p / d;
                    *x -= step;
                    if step.abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
                        break;
                    }
                }
                let (_, _, christoffel) = self.evaluate(*x);
                scale_weight(*x) / christoffel
            })
            .collect();
        GaussRule { nodes, weights }
    }
}

fn check(order: usize) -> Result<()> {
    if order < 2 {
        return Err(Error::InvalidOrder(order));
    }
    Ok(())
}

/// Gauss–Legendre on `[−1, 1]`.
pub fn gauss_legendre(order: usize) -> Result<GaussRule> {
    check(order)?;
    Ok(Recurrence::legendre(order).rule(|_| 1.0))
}

/// Generalized Gauss–Laguerre for the weight `x^α e^{−x}` on `[0, ∞)`.
///
/// Weights are returned multiplied by `e^{x_k}`, so `Σ w_k f(x_k)` approximates
/// `∫ x^α f(x) dx` directly.
pub fn gauss_laguerre_scaled(order: usize, alpha: u32) -> Result<GaussRule> {
    check(order)?;
    if order > 160 {
        // e^{x_max} overflows beyond this order
        return Err(Error::InvalidOrder(order));
    }
    Ok(Recurrence::laguerre(order, alpha).rule(f64::exp))
}

/// Gauss–Hermite for `e^{−t²}`, weights multiplied by `e^{t_k²}`.
pub fn gauss_hermite_scaled(order: usize) -> Result<GaussRule> {
    check(order)?;
    Ok(Recurrence::hermite(order).rule(|t| (t * t).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = gauss_legendre(12).unwrap();
        for deg in 0..24 {
            let q: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "deg {deg}: {q} vs {exact}");
        }
    }

    #[test]
    fn laguerre_moments() {
        for alpha in [0u32, 1] {
            let r = gauss_laguerre_scaled(20, alpha).unwrap();
            // ∫ x^α x^m e^{−x} dx = (m+α)!
            for m in 0..20i32 {
                let q: f64 = r
                    .nodes
                    .iter()
                    .zip(&r.weights)
                    .map(|(x, w)| w * x.powi(m) * (-x).exp())
                    .sum();
                let exact: f64 = (1..=(m as u32 + alpha)).map(|k| k as f64).product();
                assert!((q / exact - 1.0).abs() < 1e-12, "alpha {alpha} m {m}");
            }
        }
        let r = gauss_laguerre_scaled(32, 1).unwrap();
        let q: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * (-2.0 * x).exp()).sum();
        assert!((q - 0.25).abs() < 1e-14);
    }

    #[test]
    fn hermite_gaussian_moments() {
        let r = gauss_hermite_scaled(16).unwrap();
        let q: f64 = r.nodes.iter().zip(&r.weights).map(|(t, w)| w * (-t * t).exp()).sum();
        assert!((q - PI.sqrt()).abs() < 1e-14);
        let q: f64 = r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(t, w)| w * (-t * t).exp() * (1.5 * t).cos())
            .sum();
        assert!((q - PI.sqrt() * (-1.5f64 * 1.5 / 4.0).exp()).abs() < 1e-13);
    }

    #[test]
    fn rejects_tiny_orders() {
        assert_eq!(gauss_legendre(1), Err(Error::InvalidOrder(1)));
        assert!(gauss_laguerre_scaled(0, 1).is_err());
    }
}
