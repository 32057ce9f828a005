//! Pauli calculus on 2×2 complex matrices, symmetric powers and the β weights.
//!
//! Symmetric powers are written in the orthonormal monomial basis
//! `√C(n,k)·e₁^{n−k}e₂^k`, so adjoints and transposes commute with
//! [`sym_power`] entry by entry.

use std::ops::{Add, Index, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexMatrix2 = Matrix2<Complex64>;
pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative tolerance for `|p0 − |p⃗|| / p0` when classifying a vector as on-cone.
pub const CONE_TOLERANCE: f64 = 1e-9;

pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub(crate) fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn mat2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> ComplexMatrix2 {
    Matrix2::new(a, b, c, d)
}

/// Real four-vector with Minkowski signature (+,−,−,−).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FourVector(pub [f64; 4]);

impl FourVector {
    pub const ZERO: FourVector = FourVector([0.0; 4]);

    pub const fn new(x0: f64, x1: f64, x2: f64, x3: f64) -> Self {
        FourVector([x0, x1, x2, x3])
    }

    pub fn basis(mu: usize) -> Self {
        let mut v = [0.0; 4];
        v[mu] = 1.0;
        FourVector(v)
    }

    pub fn minkowski(&self, other: &FourVector) -> f64 {
        let (a, b) = (self.0, other.0);
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3]
    }

    pub fn spatial_norm(&self) -> f64 {
        let a = self.0;
        (a[1] * a[1] + a[2] * a[2] + a[3] * a[3]).sqrt()
    }

    pub fn euclidean_norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// `|p0 − |p⃗|| / p0`, or infinity when `p0 ≤ 0`.
    pub fn cone_residual(&self) -> f64 {
        if self.0[0] <= 0.0 {
            return f64::INFINITY;
        }
        (self.0[0] - self.spatial_norm()).abs() / self.0[0]
    }

    /// True for vectors in the open forward cone `x0 > |x⃗|`.
    pub fn is_forward_timelike(&self) -> bool {
        self.0[0] > self.spatial_norm()
    }

    pub fn as_vector(&self) -> nalgebra::Vector4<f64> {
        nalgebra::Vector4::from(self.0)
    }

    pub fn from_vector(v: &nalgebra::Vector4<f64>) -> Self {
        FourVector([v[0], v[1], v[2], v[3]])
    }
}

impl Index<usize> for FourVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl Add for FourVector {
    type Output = FourVector;
    fn add(self, o: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for FourVector {
    type Output = FourVector;
    fn sub(self, o: FourVector) -> FourVector {
        FourVector(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Neg for FourVector {
    type Output = FourVector;
    fn neg(self) -> FourVector {
        FourVector(self.0.map(|x| -x))
    }
}

impl Mul<f64> for FourVector {
    type Output = FourVector;
    fn mul(self, s: f64) -> FourVector {
        FourVector(self.0.map(|x| x * s))
    }
}

/// `P = p0σ0 + Σ p_iσ_i`.
pub fn pauli_embed(p: &FourVector) -> ComplexMatrix2 {
    let [p0, p1, p2, p3] = p.0;
    mat2(
        c(p0 + p3),
        Complex64::new(p1, -p2),
        Complex64::new(p1, p2),
        c(p0 - p3),
    )
}

/// `P† = ½(p0σ0 − Σ p_iσ_i)`; on the cone this has eigenvalues `p0` and `0`.
pub fn pauli_dagger(p: &FourVector) -> ComplexMatrix2 {
    let [p0, p1, p2, p3] = p.0;
    mat2(
        c(0.5 * (p0 - p3)),
        Complex64::new(-0.5 * p1, 0.5 * p2),
        Complex64::new(-0.5 * p1, -0.5 * p2),
        c(0.5 * (p0 + p3)),
    )
}

/// Inverse of [`pauli_embed`] on the Hermitian part of `m`.
pub fn hermitian_to_vector(m: &ComplexMatrix2) -> FourVector {
    let h = hermitian_part(m);
    FourVector::new(
        0.5 * (h[(0, 0)].re + h[(1, 1)].re),
        h[(0, 1)].re,
        -h[(0, 1)].im,
        0.5 * (h[(0, 0)].re - h[(1, 1)].re),
    )
}

pub fn hermitian_part(m: &ComplexMatrix2) -> ComplexMatrix2 {
    (m + m.adjoint()) * c(0.5)
}

pub fn anti_hermitian_part(m: &ComplexMatrix2) -> ComplexMatrix2 {
    (m - m.adjoint()) * Complex64::new(0.0, -0.5)
}

pub fn conj2(m: &ComplexMatrix2) -> ComplexMatrix2 {
    m.map(|z| z.conj())
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Symmetric power `Symⁿ(M)` on `(n+1)`-dimensional spinor space.
///
/// Row `j`, column `k` is `√(C(n,j)/C(n,k))` times the coefficient of
/// `x^{n−k}y^k` in `x'^{n−j}y'^j`, where `(x', y')ᵗ = M(x, y)ᵗ`.
pub fn sym_power(m: &ComplexMatrix2, n: usize) -> CMatrix {
    let (a, b, cc, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let mut out = CMatrix::zeros(n + 1, n + 1);
    let mut poly = vec![Complex64::new(0.0, 0.0); n + 1];
    for j in 0..=n {
        poly.iter_mut().for_each(|z| *z = c(0.0));
        poly[0] = c(1.0);
        let mut deg = 0;
        for factor in std::iter::repeat((a, b))
            .take(n - j)
            .chain(std::iter::repeat((cc, d)).take(j))
        {
            for k in (0..=deg + 1).rev() {
                let lo = if k <= deg { poly[k] * factor.0 } else { c(0.0) };
                let hi = if k >= 1 { poly[k - 1] * factor.1 } else { c(0.0) };
                poly[k] = lo + hi;
            }
            deg += 1;
        }
        let bj = binomial(n, j);
        for k in 0..=n {
            out[(j, k)] = poly[k] * (bj / binomial(n, k)).sqrt();
        }
    }
    out
}

/// Spinor label `(j/2, k/2)` stored as the doubled integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinLabel {
    pub j_doubled: usize,
    pub k_doubled: usize,
}

impl SpinLabel {
    pub const fn new(j_doubled: usize, k_doubled: usize) -> Self {
        SpinLabel { j_doubled, k_doubled }
    }

    /// `(0, n/2)`, the label of the `+` helicity spaces.
    pub const fn undotted(n: usize) -> Self {
        SpinLabel::new(0, n)
    }

    /// `(n/2, 0)`, the label of the `−` helicity spaces.
    pub const fn dotted(n: usize) -> Self {
        SpinLabel::new(n, 0)
    }

    pub fn dim(&self) -> usize {
        (self.j_doubled + 1) * (self.k_doubled + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinOperator {
    pub label: SpinLabel,
    pub matrix: CMatrix,
}

impl SpinOperator {
    pub fn new(label: SpinLabel, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != label.dim() || matrix.ncols() != label.dim() {
            return Err(Error::DimensionMismatch {
                expected: label.dim(),
                found: matrix.nrows(),
            });
        }
        Ok(SpinOperator { label, matrix })
    }

    pub fn identity(label: SpinLabel) -> Self {
        SpinOperator {
            label,
            matrix: CMatrix::identity(label.dim(), label.dim()),
        }
    }
}

/// `D^{(j/2,k/2)}(A) = Sym^j(A) ⊗ Sym^k(conj A)`.
pub fn rep_d(label: SpinLabel, a: &ComplexMatrix2) -> SpinOperator {
    let left = sym_power(a, label.j_doubled);
    let right = sym_power(&conj2(a), label.k_doubled);
    SpinOperator {
        label,
        matrix: left.kronecker(&right),
    }
}

/// Which of the two β weights (and helicity sign) is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn label(self, n: usize) -> SpinLabel {
        match self {
            Sign::Plus => SpinLabel::undotted(n),
            Sign::Minus => SpinLabel::dotted(n),
        }
    }
}

pub(crate) fn check_on_cone(p: &FourVector) -> Result<()> {
    let residual = p.cone_residual();
    if residual > CONE_TOLERANCE || !p.is_finite() {
        return Err(Error::NotOnCone { residual });
    }
    Ok(())
}

/// `β₊(p) = Symⁿ(conj P†)` and `β₋(p) = Symⁿ(P†)`.
pub fn beta(p: &FourVector, n: usize, sign: Sign) -> Result<SpinOperator> {
    check_on_cone(p)?;
    Ok(beta_unchecked(&pauli_dagger(p), n, sign))
}

pub(crate) fn beta_unchecked(p_dagger: &ComplexMatrix2, n: usize, sign: Sign) -> SpinOperator {
    let m = match sign {
        Sign::Plus => sym_power(&conj2(p_dagger), n),
        Sign::Minus => sym_power(p_dagger, n),
    };
    SpinOperator {
        label: sign.label(n),
        matrix: m,
    }
}

/// Vector `b` with `β(p) = b b*`; `β` has rank one, so seminorms computed
/// as `|b*v|²` lose no precision to components in its kernel.
pub fn beta_factor(p: &FourVector, n: usize, sign: Sign) -> Result<CVector> {
    check_on_cone(p)?;
    Ok(beta_factor_unchecked(&pauli_dagger(p), n, sign))
}

pub(crate) fn beta_factor_unchecked(p_dagger: &ComplexMatrix2, n: usize, sign: Sign) -> CVector {
    // P† = w w*; the larger diagonal entry gives the better-conditioned column
    let k = if p_dagger[(0, 0)].re >= p_dagger[(1, 1)].re { 0 } else { 1 };
    let d = p_dagger[(k, k)].re.max(0.0).sqrt();
    let (w0, w1) = if d > 0.0 {
        (p_dagger[(0, k)] / d, p_dagger[(1, k)] / d)
    } else {
        (c(0.0), c(0.0))
    };
    let (x0, x1) = match sign {
        Sign::Plus => (w0.conj(), w1.conj()),
        Sign::Minus => (w0, w1),
    };
    CVector::from_fn(n + 1, |j, _| x0.powu((n - j) as u32) * x1.powu(j as u32) * binomial(n, j).sqrt())
}

/// Eigenvectors of `P†` for the eigenvalues `p0` and `0`.
///
/// Near the ray `p⃗ = (0,0,p0)` the zero-eigenvector formula collapses; there
/// the unit vector orthogonal to the first vector is returned instead.
pub fn null_eigenpair(p: &FourVector) -> Result<(Vector2<Complex64>, Vector2<Complex64>)> {
    check_on_cone(p)?;
    let [p0, p1, p2, p3] = p.0;
    if (p0 + p3) <= 1e-12 * p0 {
        return Err(Error::SingularRay);
    }
    let range = Vector2::new(Complex64::new(-p1, p2), c(p0 + p3));
    let null = Vector2::new(Complex64::new(p1, -p2), c(p0 - p3));
    if null.norm() <= 1e-12 * p0 {
        let r = range.norm();
        let completion = Vector2::new(-range[1].conj() / r, range[0].conj() / r);
        return Ok((range, completion));
    }
    Ok((range, null))
}
