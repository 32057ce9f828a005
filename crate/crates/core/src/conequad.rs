//! Quadrature on the cone mantle for `dμ0 = d³p/(2p0) = (r/2) dr dΩ`, the
//! β-sesquilinear forms, and the factor spaces they define.

use std::f64::consts::PI;
use std::ops::Add;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poincare::{boost_section, lorentz_act, ConeFunction, MomentumOnCone};
use crate::rules::{gauss_laguerre_scaled, gauss_legendre};
use crate::spinalg::{beta_factor_unchecked, beta_unchecked, c, conj2, sym_power, CMatrix, CVector, ComplexMatrix2, Sign};

pub const MEASURE_CONVENTION: &str = "dmu0 = d^3p / (2 p0)";

/// Summation in a fixed binary tree, independent of thread scheduling.
pub fn pairwise_sum<T: Clone + Add<Output = T>>(items: &[T]) -> Option<T> {
    match items.len() {
        0 => None,
        1 => Some(items[0].clone()),
        len if len <= 8 => {
            let mut acc = items[0].clone();
            for x in &items[1..] {
                acc = acc + x.clone();
            }
            Some(acc)
        }
        len => {
            let (l, r) = items.split_at(len / 2);
            Some(pairwise_sum(l)? + pairwise_sum(r)?)
        }
    }
}

/// Values that can be accumulated by quadrature.
pub trait Weighted: Clone + Send + Add<Output = Self> {
    fn weighted(self, w: f64) -> Self;
}

impl Weighted for f64 {
    fn weighted(self, w: f64) -> Self {
        self * w
    }
}

impl Weighted for Complex64 {
    fn weighted(self, w: f64) -> Self {
        self * w
    }
}

impl Weighted for CMatrix {
    fn weighted(self, w: f64) -> Self {
        self * c(w)
    }
}

impl Weighted for CVector {
    fn weighted(self, w: f64) -> Self {
        self * c(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RadialRule {
    /// Gauss–Laguerre adapted to `e^{−r/s}` decay.
    Laguerre { scale: f64 },
    /// Gauss–Legendre on `[0, cutoff]`, for integrands with algebraic decay
    /// that must stay below a lattice Nyquist limit.
    Legendre { cutoff: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridDescriptor {
    pub radial_order: usize,
    pub angular_order: usize,
    pub azimuthal_order: usize,
    pub radial: RadialRule,
    pub node_count: usize,
}

#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    nodes: Vec<MomentumOnCone>,
    weights: Vec<f64>,
    descriptor: GridDescriptor,
}

/// Laguerre grid with `angular_order` polar and as many azimuthal nodes.
pub fn build_grid(radial_order: usize, angular_order: usize, radial_scale: f64) -> Result<QuadratureGrid> {
    QuadratureGrid::build(
        radial_order,
        angular_order,
        angular_order,
        RadialRule::Laguerre { scale: radial_scale },
    )
}

impl QuadratureGrid {
    pub fn build(
        radial_order: usize,
        angular_order: usize,
        azimuthal_order: usize,
        radial: RadialRule,
    ) -> Result<Self> {
        if azimuthal_order < 2 {
            return Err(Error::InvalidOrder(azimuthal_order));
        }
        let polar = gauss_legendre(angular_order)?;
        let (radii, radial_weights): (Vec<f64>, Vec<f64>) = match radial {
            RadialRule::Laguerre { scale } => {
                if !(scale > 0.0 && scale.is_finite()) {
                    return Err(Error::Config(format!("radial scale must be positive, got {scale}")));
                }
                // ∫ F (r/2) dr = (s²/2) ∫ x F(sx) dx with the α = 1 rule
                let rule = gauss_laguerre_scaled(radial_order, 1)?;
                rule.nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(x, w)| (scale * x, 0.5 * scale * scale * w))
                    .unzip()
            }
            RadialRule::Legendre { cutoff } => {
                if !(cutoff > 0.0 && cutoff.is_finite()) {
                    return Err(Error::Config(format!("radial cutoff must be positive, got {cutoff}")));
                }
                let rule = gauss_legendre(radial_order)?;
                rule.nodes
                    .iter()
                    .zip(&rule.weights)
                    .map(|(t, w)| {
                        let r = 0.5 * cutoff * (t + 1.0);
                        (r, 0.5 * cutoff * w * 0.5 * r)
                    })
                    .unzip()
            }
        };
        let dphi = 2.0 * PI / azimuthal_order as f64;
        let mut nodes = Vec::with_capacity(radii.len() * polar.nodes.len() * azimuthal_order);
        let mut weights = Vec::with_capacity(nodes.capacity());
        for (ct, wt) in polar.nodes.iter().zip(&polar.weights) {
            let st = (1.0 - ct * ct).sqrt();
            for k in 0..azimuthal_order {
                let phi = (k as f64 + 0.5) * dphi;
                let omega = [st * phi.cos(), st * phi.sin(), *ct];
                for (r, wr) in radii.iter().zip(&radial_weights) {
                    nodes.push(MomentumOnCone::from_polar(*r, omega)?);
                    weights.push(wr * wt * dphi);
                }
            }
        }
        let descriptor = GridDescriptor {
            radial_order,
            angular_order,
            azimuthal_order,
            radial,
            node_count: nodes.len(),
        };
        Ok(QuadratureGrid {
            nodes,
            weights,
            descriptor,
        })
    }

    pub fn nodes(&self) -> &[MomentumOnCone] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn descriptor(&self) -> &GridDescriptor {
        &self.descriptor
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_momentum_component(&self) -> f64 {
        self.nodes
            .iter()
            .flat_map(|p| p.p().0)
            .fold(0.0, |m: f64, x| m.max(x.abs()))
    }

    /// Image grid under `p ↦ λ·Λ_A p`; `μ0` is Lorentz invariant and scales as `λ²`.
    pub fn transformed(&self, a: &ComplexMatrix2, lambda: f64) -> Result<QuadratureGrid> {
        let nodes = self
            .nodes
            .iter()
            .map(|p| MomentumOnCone::new(lorentz_act(a, p.p()) * lambda))
            .collect::<Result<Vec<_>>>()?;
        Ok(QuadratureGrid {
            nodes,
            weights: self.weights.iter().map(|w| w * lambda * lambda).collect(),
            descriptor: self.descriptor,
        })
    }

    /// `Σ w_k f(p_k)` with node-parallel evaluation and pairwise summation.
    pub fn integrate<T, F>(&self, f: F) -> Result<T>
    where
        T: Weighted,
        F: Fn(&MomentumOnCone) -> Result<T> + Sync + Send,
    {
        let terms = self
            .nodes
            .par_iter()
            .zip(self.weights.par_iter())
            .map(|(p, w)| f(p).map(|v| v.weighted(*w)))
            .collect::<Result<Vec<T>>>()?;
        pairwise_sum(&terms).ok_or(Error::InvalidOrder(0))
    }

    pub fn integrate_scalar<F>(&self, f: F) -> Result<Complex64>
    where
        F: Fn(&MomentumOnCone) -> Complex64 + Sync + Send,
    {
        self.integrate(|p| Ok(f(p)))
    }
}

/// `Σ w_k ⟨φ(p_k), β(p_k) ψ(p_k)⟩`, antilinear in `φ`.
pub fn inner_beta(
    phi: &ConeFunction,
    psi: &ConeFunction,
    n: usize,
    sign: Sign,
    grid: &QuadratureGrid,
) -> Result<Complex64> {
    for f in [phi, psi] {
        if f.dim() != n + 1 {
            return Err(Error::DimensionMismatch {
                expected: n + 1,
                found: f.dim(),
            });
        }
    }
    grid.integrate(|p| {
        let b = beta_factor_unchecked(p.p_dagger(), n, sign);
        Ok(b.dotc(&phi.eval(p)?).conj() * b.dotc(&psi.eval(p)?))
    })
}

/// `∫ |φ(p)|² dμ0` without β weight.
pub fn l2_norm_squared(phi: &ConeFunction, grid: &QuadratureGrid) -> Result<f64> {
    grid.integrate(|p| Ok(phi.eval(p)?.norm_squared()))
}

/// `β(p)/p0ⁿ`, the orthogonal projector onto the range line of `β(p)`.
fn range_projector(p: &MomentumOnCone, n: usize, sign: Sign) -> CMatrix {
    beta_unchecked(p.p_dagger(), n, sign).matrix / c(p.p0().powi(n as i32))
}

/// Range part of `φ`: pointwise projection onto `⊗ⁿ` of the `p0`-eigenvector.
pub fn project_range(phi: &ConeFunction, n: usize, sign: Sign) -> Result<ConeFunction> {
    check_dim(phi, n)?;
    let phi = phi.clone();
    Ok(ConeFunction::new(n + 1, move |p| Ok(range_projector(p, n, sign) * phi.eval(p)?)))
}

/// Null part `φ − range(φ)`, annihilated by `β(p)` pointwise.
pub fn project_null(phi: &ConeFunction, n: usize, sign: Sign) -> Result<ConeFunction> {
    check_dim(phi, n)?;
    let phi = phi.clone();
    Ok(ConeFunction::new(n + 1, move |p| {
        let v = phi.eval(p)?;
        Ok(&v - range_projector(p, n, sign) * &v)
    }))
}

fn check_dim(phi: &ConeFunction, n: usize) -> Result<()> {
    if phi.dim() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            found: phi.dim(),
        });
    }
    Ok(())
}

/// A class in the quotient of the β-seminormed space by its null space.
#[derive(Debug, Clone)]
pub struct FactorVector {
    pub representative: ConeFunction,
    pub n: usize,
    pub sign: Sign,
}

impl FactorVector {
    pub fn new(representative: ConeFunction, n: usize, sign: Sign) -> Result<Self> {
        check_dim(&representative, n)?;
        Ok(FactorVector {
            representative,
            n,
            sign,
        })
    }

    pub fn zero(n: usize, sign: Sign) -> Self {
        FactorVector {
            representative: ConeFunction::zero(n + 1),
            n,
            sign,
        }
    }

    fn compatible(&self, other: &FactorVector) -> Result<()> {
        if self.n != other.n || self.sign != other.sign {
            return Err(Error::DimensionMismatch {
                expected: self.n + 1,
                found: other.n + 1,
            });
        }
        Ok(())
    }

    pub fn inner(&self, other: &FactorVector, grid: &QuadratureGrid) -> Result<Complex64> {
        self.compatible(other)?;
        inner_beta(&self.representative, &other.representative, self.n, self.sign, grid)
    }

    pub fn sub(&self, other: &FactorVector) -> Result<FactorVector> {
        self.compatible(other)?;
        FactorVector::new(self.representative.sub(&other.representative)?, self.n, self.sign)
    }

    /// Distance in the β-seminorm.
    pub fn distance(&self, other: &FactorVector, grid: &QuadratureGrid) -> Result<f64> {
        factor_norm(&self.sub(other)?, grid)
    }

    /// Seminorm-based equality with relative tolerance `1e−8`.
    pub fn approx_eq(&self, other: &FactorVector, grid: &QuadratureGrid) -> Result<bool> {
        let scale = factor_norm(self, grid)?.max(factor_norm(other, grid)?).max(1e-300);
        Ok(self.distance(other, grid)? <= 1e-8 * scale)
    }
}

/// `√⟨v, v⟩_β` of the representative (negative rounding clamped to zero).
pub fn factor_norm(v: &FactorVector, grid: &QuadratureGrid) -> Result<f64> {
    let q = inner_beta(&v.representative, &v.representative, v.n, v.sign, grid)?;
    Ok(q.re.max(0.0).sqrt())
}

/// `Φ₊χ(p) = D^{(0,n/2)}(H_p)·e_n·χ(p)`, with `e_n = ⊗ⁿ(0,1)ᵗ`.
pub fn phi_plus(chi: &ConeFunction, n: usize) -> Result<FactorVector> {
    if chi.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: chi.dim(),
        });
    }
    let chi = chi.clone();
    let rep = ConeFunction::new(n + 1, move |p| {
        let h = boost_section(p)?;
        let column = sym_power(&conj2(&h), n).column(n).into_owned();
        Ok(CVector::from(column) * chi.eval(p)?[0])
    });
    FactorVector::new(rep, n, Sign::Plus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poincare::{canonical_v_act, wigner_act, CanonicalVariant};
    use crate::sampling::Sampler;
    use crate::spinalg::{null_eigenpair, FourVector};

    fn exp_weight(a: f64) -> ConeFunction {
        ConeFunction::scalar(move |p| c((-a * p.p0()).exp()))
    }

    #[test]
    fn reference_integrals() {
        let grid = build_grid(32, 24, 1.0).unwrap();
        let one = grid.integrate_scalar(|p| c((-p.p0()).exp())).unwrap();
        assert!((one.re / (2.0 * PI) - 1.0).abs() < 1e-12);
        let two = grid.integrate_scalar(|p| c((-2.0 * p.p0()).exp())).unwrap();
        assert!((two.re / (PI / 2.0) - 1.0).abs() < 1e-12);
        for i in 1..4 {
            let odd = grid.integrate_scalar(|p| c((-p.p0()).exp() * p.p()[i])).unwrap();
            assert!(odd.norm() < 1e-10);
        }
        assert!(grid.nodes().iter().all(|p| !p.on_singular_ray()));
        assert!(build_grid(1, 24, 1.0).is_err());
    }

    #[test]
    fn legendre_radial_rule() {
        let grid = QuadratureGrid::build(64, 16, 16, RadialRule::Legendre { cutoff: 40.0 }).unwrap();
        let one = grid.integrate_scalar(|p| c((-p.p0()).exp())).unwrap();
        assert!((one.re / (2.0 * PI) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lorentz_invariance_of_measure() {
        let grid = build_grid(32, 24, 1.0).unwrap();
        let mut s = Sampler::new(3);
        let a = s.sl2c(0.3);
        let f = |p: &MomentumOnCone| c((-p.p0() - 0.3 * p.p()[1]).exp());
        let direct = grid.integrate_scalar(f).unwrap();
        let moved = grid.transformed(&a, 1.0).unwrap().integrate_scalar(f).unwrap();
        assert!((direct - moved).norm() < 1e-8 * direct.norm());
    }

    #[test]
    fn null_fields_have_zero_seminorm() {
        let grid = build_grid(24, 16, 1.0).unwrap();
        let null = ConeFunction::new(2, |p| {
            let (_, z) = null_eigenpair(p.p())?;
            Ok(CVector::from_iterator(2, z.iter().cloned()) * c((-p.p0()).exp()))
        });
        let conj_null = null.conj();
        assert!(inner_beta(&conj_null, &conj_null, 1, Sign::Plus, &grid).unwrap().norm() < 1e-10);
        assert!(inner_beta(&null, &null, 1, Sign::Minus, &grid).unwrap().norm() < 1e-10);
        let scalar = exp_weight(1.0);
        let q = inner_beta(&scalar, &scalar, 0, Sign::Plus, &grid).unwrap();
        assert!((q.re - PI / 2.0).abs() < 1e-9);
    }

    #[test]
    fn range_and_null_split() {
        let grid = build_grid(16, 12, 1.0).unwrap();
        let n = 2;
        let phi = ConeFunction::new(n + 1, |p| {
            Ok(CVector::from_fn(3, |i, _| Complex64::new(1.0 + i as f64, p.p()[2]) * (-p.p0()).exp()))
        });
        let range = project_range(&phi, n, Sign::Plus).unwrap();
        let null = project_null(&phi, n, Sign::Plus).unwrap();
        for p in grid.nodes().iter().step_by(37) {
            let v = phi.eval(p).unwrap();
            let r = range.eval(p).unwrap();
            let z = null.eval(p).unwrap();
            assert!((&v - &r - &z).norm() < 1e-12 * (1.0 + v.norm()));
            let b = beta_unchecked(p.p_dagger(), n, Sign::Plus).matrix;
            assert!((b * z).norm() < 1e-12 * (1.0 + v.norm()) * p.p0().powi(2));
        }
        assert!(inner_beta(&null, &null, n, Sign::Plus, &grid).unwrap().norm() < 1e-10);
        let twice = project_null(&range, n, Sign::Plus).unwrap();
        assert!(l2_norm_squared(&twice, &grid).unwrap() < 1e-24);
        // the null part carries no seminorm, so the class is unchanged
        let v = FactorVector::new(phi.clone(), n, Sign::Plus).unwrap();
        let shifted = FactorVector::new(phi.add(&null.scale(c(3.0))).unwrap(), n, Sign::Plus).unwrap();
        assert!(v.approx_eq(&shifted, &grid).unwrap());
        assert_eq!(factor_norm(&FactorVector::zero(n, Sign::Plus), &grid).unwrap(), 0.0);
    }

    #[test]
    fn phi_plus_isometry_and_intertwining() {
        let grid = build_grid(32, 24, 1.0).unwrap();
        let chi = exp_weight(1.0);
        let v = phi_plus(&chi, 1).unwrap();
        let norm2 = factor_norm(&v, &grid).unwrap().powi(2);
        assert!((norm2 - PI / 2.0).abs() < 1e-9);

        let mut s = Sampler::new(5);
        let chi = ConeFunction::scalar(|p| Complex64::new(1.0, 0.5 * p.p()[1]) * (-p.p0() - 0.2 * p.p()[3]).exp());
        for n in 1..4 {
            let g = s.poincare(0.3, 1.0);
            let lhs = phi_plus(&wigner_act(&g, &chi, n, Sign::Plus).unwrap(), n).unwrap();
            let rhs = FactorVector::new(
                canonical_v_act(&g, &phi_plus(&chi, n).unwrap().representative, CanonicalVariant::V1, n).unwrap(),
                n,
                Sign::Plus,
            )
            .unwrap();
            let scale = factor_norm(&rhs, &grid).unwrap();
            assert!(lhs.distance(&rhs, &grid).unwrap() < 1e-8 * scale, "n = {n}");
        }
        let zero = phi_plus(&ConeFunction::zero(1), 2).unwrap();
        assert_eq!(factor_norm(&zero, &grid).unwrap(), 0.0);
        assert!(FourVector::new(1.0, 0.0, 0.0, 1.0).cone_residual() == 0.0);
    }
}
