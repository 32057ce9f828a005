//! Poincaré group elements, the boost section `H_p`, Wigner phases and the
//! canonical actions on cone functions.

use std::fmt;
use std::sync::Arc;

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::freenet::TestFunction;
use crate::spinalg::{
    c, check_on_cone, conj2, hermitian_to_vector, mat2, pauli_dagger, pauli_embed, rep_d,
    sym_power, CVector, ComplexMatrix2, FourVector, Sign, SpinLabel,
};

/// Tolerance on `|det A − 1|` for SL(2,C) elements.
pub const UNIMODULAR_TOLERANCE: f64 = 1e-10;

/// Inverse of a 2×2 matrix with unit determinant (the adjugate).
pub(crate) fn sl2_inverse(a: &ComplexMatrix2) -> ComplexMatrix2 {
    mat2(a[(1, 1)], -a[(0, 1)], -a[(1, 0)], a[(0, 0)])
}

/// `(A, a)` in the double cover `SL(2,C) ⋉ R⁴`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincareElement {
    pub spin: ComplexMatrix2,
    pub translation: FourVector,
}

impl PoincareElement {
    pub fn new(spin: ComplexMatrix2, translation: FourVector) -> Result<Self> {
        let residual = (spin.determinant() - c(1.0)).norm();
        if residual > UNIMODULAR_TOLERANCE || !residual.is_finite() {
            return Err(Error::NotUnimodular { residual });
        }
        Ok(PoincareElement { spin, translation })
    }

    pub fn identity() -> Self {
        PoincareElement {
            spin: ComplexMatrix2::identity(),
            translation: FourVector::ZERO,
        }
    }

    pub fn translation(a: FourVector) -> Self {
        PoincareElement {
            spin: ComplexMatrix2::identity(),
            translation: a,
        }
    }

    pub fn lorentz(spin: ComplexMatrix2) -> Result<Self> {
        Self::new(spin, FourVector::ZERO)
    }

    /// `(A1,a1)(A2,a2) = (A1A2, a1 + Λ_{A1}a2)`.
    pub fn compose(&self, other: &PoincareElement) -> PoincareElement {
        PoincareElement {
            spin: self.spin * other.spin,
            translation: self.translation + lorentz_act(&self.spin, &other.translation),
        }
    }

    pub fn inverse(&self) -> PoincareElement {
        let inv = sl2_inverse(&self.spin);
        PoincareElement {
            spin: inv,
            translation: -lorentz_act(&inv, &self.translation),
        }
    }

    pub fn act(&self, x: &FourVector) -> FourVector {
        lorentz_act(&self.spin, x) + self.translation
    }
}

/// `Λ_A x`, computed as `A·P·A*` read back as a four-vector.
pub fn lorentz_act(a: &ComplexMatrix2, x: &FourVector) -> FourVector {
    hermitian_to_vector(&(a * pauli_embed(x) * a.adjoint()))
}

/// The real 4×4 matrix of `Λ_A`.
pub fn lorentz_matrix(a: &ComplexMatrix2) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    for mu in 0..4 {
        let col = lorentz_act(a, &FourVector::basis(mu));
        for nu in 0..4 {
            m[(nu, mu)] = col[nu];
        }
    }
    m
}

/// A point of the forward cone mantle with its Pauli images.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumOnCone {
    p: FourVector,
    p_matrix: ComplexMatrix2,
    p_dagger: ComplexMatrix2,
}

impl MomentumOnCone {
    pub fn new(p: FourVector) -> Result<Self> {
        check_on_cone(&p)?;
        Ok(MomentumOnCone {
            p,
            p_matrix: pauli_embed(&p),
            p_dagger: pauli_dagger(&p),
        })
    }

    /// `r·(1, ω)` for a unit direction `ω`.
    pub fn from_polar(r: f64, omega: [f64; 3]) -> Result<Self> {
        Self::new(FourVector::new(r, r * omega[0], r * omega[1], r * omega[2]))
    }

    pub fn p(&self) -> &FourVector {
        &self.p
    }

    pub fn p0(&self) -> f64 {
        self.p[0]
    }

    pub fn p_matrix(&self) -> &ComplexMatrix2 {
        &self.p_matrix
    }

    pub fn p_dagger(&self) -> &ComplexMatrix2 {
        &self.p_dagger
    }

    pub fn on_singular_ray(&self) -> bool {
        self.p[0] + self.p[3] <= 1e-12 * self.p[0]
    }

    /// `Λ_A⁻¹ p`.
    pub fn pulled_back(&self, a: &ComplexMatrix2) -> Result<MomentumOnCone> {
        MomentumOnCone::new(lorentz_act(&sl2_inverse(a), &self.p))
    }
}

type ConeEval = dyn Fn(&MomentumOnCone) -> Result<CVector> + Send + Sync;

/// A `C^dim`-valued function on the cone mantle.
#[derive(Clone)]
pub struct ConeFunction {
    dim: usize,
    eval: Arc<ConeEval>,
}

impl fmt::Debug for ConeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConeFunction").field("dim", &self.dim).finish()
    }
}

impl ConeFunction {
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&MomentumOnCone) -> Result<CVector> + Send + Sync + 'static,
    {
        ConeFunction {
            dim,
            eval: Arc::new(f),
        }
    }

    pub fn scalar<F>(f: F) -> Self
    where
        F: Fn(&MomentumOnCone) -> Complex64 + Send + Sync + 'static,
    {
        ConeFunction::new(1, move |p| Ok(CVector::from_element(1, f(p))))
    }

    pub fn zero(dim: usize) -> Self {
        ConeFunction::new(dim, move |_| Ok(CVector::zeros(dim)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, p: &MomentumOnCone) -> Result<CVector> {
        let v = (self.eval)(p)?;
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        Ok(v)
    }

    pub fn add(&self, other: &ConeFunction) -> Result<ConeFunction> {
        self.combine(other, c(1.0))
    }

    pub fn sub(&self, other: &ConeFunction) -> Result<ConeFunction> {
        self.combine(other, c(-1.0))
    }

    fn combine(&self, other: &ConeFunction, s: Complex64) -> Result<ConeFunction> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let (a, b) = (self.clone(), other.clone());
        Ok(ConeFunction::new(self.dim, move |p| Ok(a.eval(p)? + b.eval(p)? * s)))
    }

    pub fn scale(&self, s: Complex64) -> ConeFunction {
        let a = self.clone();
        ConeFunction::new(self.dim, move |p| Ok(a.eval(p)? * s))
    }

    /// Pointwise complex conjugate.
    pub fn conj(&self) -> ConeFunction {
        let a = self.clone();
        ConeFunction::new(self.dim, move |p| Ok(a.eval(p)?.map(|z| z.conj())))
    }
}

/// The section `H_p ∈ SL(2,C)` with `H_p·diag(2,0)·H_p* = P`; `H_{p̂} = −1`.
pub fn boost_section(p: &MomentumOnCone) -> Result<ComplexMatrix2> {
    if p.on_singular_ray() {
        return Err(Error::SingularRay);
    }
    let [p0, p1, p2, p3] = p.p().0;
    let s = p0.sqrt();
    let plus = p0 + p3;
    let norm = c(1.0 / (2.0 * p0 * plus).sqrt());
    Ok(mat2(
        c(-s * plus),
        Complex64::new(p1, -p2) / s,
        Complex64::new(-s * p1, -s * p2),
        c(-plus / s),
    ) * norm)
}

/// `L = H_p⁻¹·A·H_q` with `q = Λ_A⁻¹p`, an element of the little group E(2).
pub fn little_group_factor(a: &ComplexMatrix2, p: &MomentumOnCone) -> Result<ComplexMatrix2> {
    let q = p.pulled_back(a)?;
    Ok(sl2_inverse(&boost_section(p)?) * a * boost_section(&q)?)
}

/// `e^{−iθ/2}`, the lower-right entry of [`little_group_factor`], in closed form.
pub fn wigner_phase(a: &ComplexMatrix2, p: &MomentumOnCone) -> Result<Complex64> {
    let [p0, p1, p2, p3] = p.p().0;
    let z = -a[(0, 1)] * Complex64::new(p1, p2) + a[(1, 1)] * (p0 + p3);
    let modulus = z.norm();
    if modulus <= 1e-12 * p0 || !modulus.is_finite() {
        return Err(Error::PhaseUndefined { modulus });
    }
    Ok(z / modulus)
}

/// Wigner representation `U±` on scalar cone functions.
pub fn wigner_act(
    g: &PoincareElement,
    phi: &ConeFunction,
    n: usize,
    sign: Sign,
) -> Result<ConeFunction> {
    if phi.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: phi.dim(),
        });
    }
    let (g, phi) = (*g, phi.clone());
    Ok(ConeFunction::new(1, move |p| {
        let q = p.pulled_back(&g.spin)?;
        let phase = wigner_phase(&g.spin, p)?;
        let helicity = match sign {
            Sign::Plus => phase.conj(),
            Sign::Minus => phase,
        };
        let shift = Complex64::from_polar(1.0, -p.p().minkowski(&g.translation));
        Ok(phi.eval(&q)? * (shift * helicity.powu(n as u32)))
    }))
}

/// The four canonical representations on β-weighted spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CanonicalVariant {
    /// `e^{−ipa} D^{(0,n/2)}(A)`, acting on `+` spaces.
    V1,
    /// `e^{−ipa} D^{(n/2,0)}(A)`, acting on `−` spaces.
    V2,
    /// `e^{+ipa} D^{(0,n/2)}(A)`.
    V3,
    /// `e^{+ipa} D^{(n/2,0)}(A)`.
    V4,
}

impl CanonicalVariant {
    pub fn sign(self) -> Sign {
        match self {
            CanonicalVariant::V1 | CanonicalVariant::V3 => Sign::Plus,
            CanonicalVariant::V2 | CanonicalVariant::V4 => Sign::Minus,
        }
    }

    fn exponent_sign(self) -> f64 {
        match self {
            CanonicalVariant::V1 | CanonicalVariant::V2 => -1.0,
            CanonicalVariant::V3 | CanonicalVariant::V4 => 1.0,
        }
    }
}

/// `(V(g)φ)(p) = e^{∓ipa}·D(A)·φ(Λ_A⁻¹p)`.
pub fn canonical_v_act(
    g: &PoincareElement,
    phi: &ConeFunction,
    variant: CanonicalVariant,
    n: usize,
) -> Result<ConeFunction> {
    if phi.dim() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            found: phi.dim(),
        });
    }
    let d = match variant.sign() {
        Sign::Plus => sym_power(&conj2(&g.spin), n),
        Sign::Minus => sym_power(&g.spin, n),
    };
    let (g, phi) = (*g, phi.clone());
    let s = variant.exponent_sign();
    Ok(ConeFunction::new(n + 1, move |p| {
        let q = p.pulled_back(&g.spin)?;
        let shift = Complex64::from_polar(1.0, s * p.p().minkowski(&g.translation));
        Ok(&d * phi.eval(&q)? * shift)
    }))
}

/// Covariant representation `(T(g)f)(x) = D(A)f(Λ_A⁻¹(x − a))`.
pub fn covariant_act(g: &PoincareElement, f: &TestFunction, label: SpinLabel) -> Result<TestFunction> {
    if f.label() != label {
        return Err(Error::InvalidTestFunction(format!(
            "label {:?} does not match {:?}",
            f.label(),
            label
        )));
    }
    f.poincare_transform(g)
}

/// Helper for tests and suites: `D^{(0,n/2)}(A)` as a plain matrix.
pub fn undotted_rep(a: &ComplexMatrix2, n: usize) -> crate::spinalg::CMatrix {
    rep_d(SpinLabel::undotted(n), a).matrix
}
