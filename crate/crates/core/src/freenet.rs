//! Test functions, the free-net embeddings `I_n`, their symplectic and
//! Hermitian structures, double-cone regions and the net-axiom checks.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{Cholesky, Matrix4, Vector4};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::conequad::{factor_norm, FactorVector, QuadratureGrid};
use crate::conformal::{boundary_act, t0_factor, ConformalElement};
use crate::error::{Error, Result};
use crate::poincare::{canonical_v_act, lorentz_matrix, CanonicalVariant, ConeFunction, PoincareElement};
use crate::rules::gauss_hermite_scaled;
use crate::spinalg::{c, pauli_embed, rep_d, sym_power, CMatrix, CVector, ComplexMatrix2, FourVector, Sign, SpinLabel};

/// `η = diag(1, −1, −1, −1)`.
fn eta() -> Matrix4<f64> {
    Matrix4::from_diagonal(&Vector4::new(1.0, -1.0, -1.0, -1.0))
}

/// Gaussian packet `amp·pol·exp(−½(x−c)ᵀQ(x−c))·e^{ik·(x−c)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPacket {
    pub center: FourVector,
    /// Positive definite inverse covariance in the Euclidean metric on `R⁴`.
    pub quadratic: Matrix4<f64>,
    pub momentum: FourVector,
    pub polarization: CVector,
    pub amplitude: Complex64,
    pub label: SpinLabel,
}

impl GaussianPacket {
    /// Isotropic packet of Euclidean width `width` for the label `(0, n/2)`.
    pub fn isotropic(center: FourVector, width: f64, momentum: FourVector, polarization: CVector) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidTestFunction(format!("width must be positive, got {width}")));
        }
        if polarization.is_empty() {
            return Err(Error::InvalidTestFunction("empty polarization".into()));
        }
        let n = polarization.len() - 1;
        Ok(GaussianPacket {
            center,
            quadratic: Matrix4::identity() / (width * width),
            momentum,
            polarization,
            amplitude: c(1.0),
            label: SpinLabel::undotted(n),
        })
    }

    fn covariance(&self) -> Result<Matrix4<f64>> {
        self.quadratic
            .try_inverse()
            .ok_or_else(|| Error::InvalidTestFunction("singular quadratic form".into()))
    }

    pub fn eval(&self, x: &FourVector) -> CVector {
        let d = (*x - self.center).as_vector();
        let quad = d.dot(&(self.quadratic * d));
        let phase = self.momentum.minkowski(&(*x - self.center));
        &self.polarization * (self.amplitude * Complex64::from_polar((-0.5 * quad).exp(), phase))
    }

    /// Closed form `(2π)²/√det Q · e^{−ip·c} · e^{−½uᵀQ⁻¹u}`, `u = η(p − k)`.
    pub fn spectrum(&self, p: &FourVector) -> Result<CVector> {
        let cov = self.covariance()?;
        let u = eta() * (*p - self.momentum).as_vector();
        let gauss = (-0.5 * u.dot(&(cov * u))).exp();
        let norm = (2.0 * PI).powi(2) / self.quadratic.determinant().sqrt();
        let phase = Complex64::from_polar(1.0, -p.minkowski(&self.center));
        Ok(&self.polarization * (self.amplitude * phase * (norm * gauss)))
    }

    /// Image under `x ↦ Gx + a` with the values multiplied by `scale·spin`.
    fn affine_image(&self, map: &Matrix4<f64>, shift: &FourVector, spin: &CMatrix, scale: Complex64) -> Result<Self> {
        let inv = map
            .try_inverse()
            .ok_or_else(|| Error::InvalidTestFunction("singular affine map".into()))?;
        let center = FourVector::from_vector(&(map * self.center.as_vector())) + *shift;
        let momentum = FourVector::from_vector(&(eta() * inv.transpose() * eta() * self.momentum.as_vector()));
        Ok(GaussianPacket {
            center,
            quadratic: inv.transpose() * self.quadratic * inv,
            momentum,
            polarization: spin * &self.polarization,
            amplitude: self.amplitude * scale,
            label: self.label,
        })
    }
}

/// Separable profile of a lattice bump along one axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// `cos²(πt/2h)` on `|t| < h`.
    Hann,
    /// `exp(−t²/2σ²)` truncated to `|t| < h`.
    Gaussian { sigma: f64 },
}

impl Profile {
    fn value(self, t: f64, half_width: f64) -> f64 {
        if t.abs() >= half_width {
            return 0.0;
        }
        match self {
            Profile::Hann => (0.5 * PI * t / half_width).cos().powi(2),
            Profile::Gaussian { sigma } => (-0.5 * t * t / (sigma * sigma)).exp(),
        }
    }
}

/// A compactly supported test function sampled on a product lattice over the
/// box `center ± half_widths`; its Fourier transform is the exact transform
/// of the sampled values.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeBump {
    pub center: FourVector,
    pub half_widths: [f64; 4],
    /// Lattice intervals per axis.
    pub intervals: usize,
    pub profile: Profile,
    pub polarization: CVector,
    pub label: SpinLabel,
}

impl LatticeBump {
    pub fn new(center: FourVector, half_widths: [f64; 4], intervals: usize, profile: Profile, polarization: CVector) -> Result<Self> {
        if half_widths.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidTestFunction("half widths must be positive".into()));
        }
        if intervals < 2 {
            return Err(Error::InvalidTestFunction("need at least two lattice intervals".into()));
        }
        if polarization.is_empty() {
            return Err(Error::InvalidTestFunction("empty polarization".into()));
        }
        let n = polarization.len() - 1;
        Ok(LatticeBump {
            center,
            half_widths,
            intervals,
            profile,
            polarization,
            label: SpinLabel::undotted(n),
        })
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        2.0 * self.half_widths[axis] / self.intervals as f64
    }

    /// `π/h` per axis, the largest resolvable momentum component.
    pub fn nyquist(&self, axis: usize) -> f64 {
        PI / self.spacing(axis)
    }

    pub fn contains(&self, x: &FourVector) -> bool {
        (0..4).all(|mu| (x[mu] - self.center[mu]).abs() < self.half_widths[mu])
    }

    pub fn eval(&self, x: &FourVector) -> CVector {
        let v: f64 = (0..4)
            .map(|mu| self.profile.value(x[mu] - self.center[mu], self.half_widths[mu]))
            .product();
        &self.polarization * c(v)
    }

    fn check(&self, p: &FourVector) -> Result<()> {
        for mu in 0..4 {
            let limit = self.nyquist(mu);
            if p[mu].abs() > limit {
                return Err(Error::Nyquist {
                    required: p[mu].abs(),
                    limit,
                });
            }
        }
        Ok(())
    }

    pub fn spectrum(&self, p: &FourVector) -> Result<CVector> {
        self.check(p)?;
        let mut total = c(1.0);
        for mu in 0..4 {
            let h = self.spacing(mu);
            let hw = self.half_widths[mu];
            // Minkowski pairing: e^{−ip0x0} but e^{+ip_i x_i}
            let k = if mu == 0 { p[mu] } else { -p[mu] };
            let mut axis = Complex64::new(0.0, 0.0);
            for j in 1..self.intervals {
                let t = -hw + j as f64 * h;
                let b = self.profile.value(t, hw);
                axis += Complex64::from_polar(b * h, -k * (self.center[mu] + t));
            }
            total *= axis;
        }
        Ok(&self.polarization * total)
    }

    /// The smallest double cone containing the support box.
    pub fn enclosing_region(&self) -> Region {
        let [h0, h1, h2, h3] = self.half_widths;
        Region::DoubleCone {
            center: self.center,
            radius: h0 + (h1 * h1 + h2 * h2 + h3 * h3).sqrt(),
        }
    }
}

/// `x ↦ scale·spin·inner(G⁻¹(x − a))`.
#[derive(Debug, Clone)]
pub struct AffineImage {
    pub inner: TestFunction,
    pub map: Matrix4<f64>,
    pub shift: FourVector,
    pub spin: CMatrix,
    pub scale: Complex64,
}

type ComplexPoint = Vector4<Complex64>;

fn complex_embed(z: &ComplexPoint) -> ComplexMatrix2 {
    let i = Complex64::new(0.0, 1.0);
    crate::spinalg::mat2(z[0] + z[3], z[1] - i * z[2], z[1] + i * z[2], z[0] - z[3])
}

fn complex_coords(m: &ComplexMatrix2) -> ComplexPoint {
    let i = Complex64::new(0.0, 1.0);
    Vector4::new(
        (m[(0, 0)] + m[(1, 1)]) * 0.5,
        (m[(0, 1)] + m[(1, 0)]) * 0.5,
        (m[(1, 0)] - m[(0, 1)]) / (i * 2.0),
        (m[(0, 0)] - m[(1, 1)]) * 0.5,
    )
}

fn real_point(x: &FourVector) -> ComplexPoint {
    x.as_vector().map(c)
}

/// `x ↦ gx`, continued to complex coordinates.
fn mobius_point(g: &ConformalElement, z: &ComplexPoint) -> Result<ComplexPoint> {
    Ok(complex_coords(&g.mobius(&complex_embed(z))?))
}

/// `(J(g,X)⁻¹)*`, optionally times `|det M(X)|⁴`, continued holomorphically
/// off the real slice through `conj det M = det N` and `Sym(conj M)* = Sym(Mᵀ)`,
/// with `M = A3X + A4` and `N = XA3* + A4*`.
fn continued_factor(g: &ConformalElement, z: &ComplexPoint, n: usize, with_jacobian: bool) -> Result<CMatrix> {
    let x = complex_embed(z);
    let m = g.denominator(&x);
    let det_m = m.determinant();
    let det_n = g.right_denominator(&x).determinant();
    if det_m.norm() < crate::conformal::SINGULAR_TOLERANCE || det_n.norm() < crate::conformal::SINGULAR_TOLERANCE {
        return Err(Error::SingularAction { modulus: det_m.norm().min(det_n.norm()) });
    }
    // Sym is multiplicative, so invert the 2×2 before lifting it
    let m_inv_t = crate::spinalg::mat2(m[(1, 1)], -m[(1, 0)], -m[(0, 1)], m[(0, 0)]) / det_m;
    let scale = if with_jacobian { (det_m * det_n).powi(2) / det_n } else { det_n.inv() };
    Ok(sym_power(&m_inv_t, n) * scale)
}

/// Real 4×4 Jacobian of `x ↦ gx` by central differences.
fn jacobian(g: &ConformalElement, x: &FourVector) -> Result<Matrix4<f64>> {
    let mut jac = Matrix4::zeros();
    let h = 1e-5 * (1.0 + x.euclidean_norm());
    for mu in 0..4 {
        let e = FourVector::basis(mu) * h;
        let d = (boundary_act(g, &(*x + e))? - boundary_act(g, &(*x - e))?) * (0.5 / h);
        for nu in 0..4 {
            jac[(nu, mu)] = d[nu];
        }
    }
    Ok(jac)
}

/// Default 1D Gauss–Hermite order for the contour rule.
pub const HERMITE_ORDER: usize = 6;

/// Which variable the Fourier integral of a conformally moved packet runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContourSide {
    /// `∫ e^{−ip·x′} (T₀(g)f)(x′) d⁴x′`.
    Image,
    /// `∫ e^{−ip·gx} (J(g,X)⁻¹)* f(x) d⁴x`.
    Source,
}

/// Fourier transform of a conformally moved Gaussian packet.
///
/// The quadratic part of the phase around the packet center is integrated
/// exactly by shifting the Hermite contour to the complex saddle `iΣb`; the
/// nodes only see the slowly varying nonlinear remainder, which is analytic.
#[derive(Debug, Clone)]
pub struct ContourSpectrum {
    g: ConformalElement,
    inverse: ConformalElement,
    packet: GaussianPacket,
    n: usize,
    side: ContourSide,
    image_center: FourVector,
    jac: Matrix4<f64>,
    jac_inv: Matrix4<f64>,
    /// Covariance of the Gaussian in the integration variable.
    cov: Matrix4<f64>,
    nodes: Vec<(Vector4<f64>, f64)>,
}

impl ContourSpectrum {
    pub fn new(g: &ConformalElement, packet: &GaussianPacket, n: usize, side: ContourSide, order: usize) -> Result<Self> {
        if packet.polarization.len() != n + 1 {
            return Err(Error::DimensionMismatch {
                expected: n + 1,
                found: packet.polarization.len(),
            });
        }
        let jac = jacobian(g, &packet.center)?;
        let jac_inv = jac
            .try_inverse()
            .ok_or(Error::SingularAction { modulus: jac.determinant().abs() })?;
        let cov = match side {
            ContourSide::Source => packet.covariance()?,
            ContourSide::Image => jac * packet.covariance()? * jac.transpose(),
        };
        let l = Cholesky::new(cov)
            .ok_or_else(|| Error::InvalidTestFunction("covariance is not positive definite".into()))?
            .l();
        // for affine g the remainder is constant and two nodes are exact
        let rule = gauss_hermite_scaled(if g.is_affine() { 2 } else { order })?;
        let weights: Vec<f64> = rule.nodes.iter().zip(&rule.weights).map(|(t, w)| w * (-t * t).exp()).collect();
        let jacobian_factor = 4.0 * l.determinant().abs();
        let m = rule.nodes.len();
        let mut nodes = Vec::with_capacity(m.pow(4));
        for flat in 0..m.pow(4) {
            let idx = [flat % m, (flat / m) % m, (flat / (m * m)) % m, flat / (m * m * m)];
            let t = Vector4::from_fn(|k, _| rule.nodes[idx[k]] * std::f64::consts::SQRT_2);
            let w: f64 = idx.iter().map(|&k| weights[k]).product();
            nodes.push((l * t, w * jacobian_factor));
        }
        Ok(ContourSpectrum {
            g: *g,
            inverse: g.inverse(),
            packet: packet.clone(),
            n,
            side,
            image_center: boundary_act(g, &packet.center)?,
            jac,
            jac_inv,
            cov,
            nodes,
        })
    }

    pub fn eval(&self, p: &FourVector) -> Result<CVector> {
        let eta = eta();
        let k = eta * self.packet.momentum.as_vector();
        let q = eta * p.as_vector();
        let b = match self.side {
            ContourSide::Source => k - self.jac.transpose() * q,
            ContourSide::Image => self.jac_inv.transpose() * k - q,
        };
        let shift = (self.cov * b).map(|v| Complex64::new(0.0, v));
        let center = real_point(&self.packet.center);
        let image_center = real_point(&self.image_center);
        let quad = &self.packet.quadratic;
        let i = Complex64::new(0.0, 1.0);
        let mut total = CVector::zeros(self.n + 1);
        for (v, w) in &self.nodes {
            let u = shift + v.map(c);
            let (scalar, factor) = match self.side {
                ContourSide::Source => {
                    let x = center + u;
                    let gx = mobius_point(&self.g, &x)?;
                    let linear = self.jac.map(c) * u;
                    let remainder = gx - image_center - linear;
                    let phase = -i * (q.map(c).dot(&remainder));
                    (phase.exp(), continued_factor(&self.g, &x, self.n, false)?)
                }
                ContourSide::Image => {
                    let x = mobius_point(&self.inverse, &(image_center + u))?;
                    let e = x - center;
                    let e0 = self.jac_inv.map(c) * u;
                    let qc = quad.map(c);
                    let expo = -(e.dot(&(qc * e)) - e0.dot(&(qc * e0))) * 0.5 + i * k.map(c).dot(&(e - e0));
                    (expo.exp(), continued_factor(&self.g, &x, self.n, true)?)
                }
            };
            total.axpy(scalar * *w, &(factor * &self.packet.polarization), c(1.0));
        }
        let prefactor = self.packet.amplitude
            * Complex64::from_polar((-0.5 * b.dot(&(self.cov * b))).exp(), -p.minkowski(&self.image_center));
        Ok(total * prefactor)
    }
}

/// `T₀(g)f` for a non-affine conformal element.
#[derive(Debug)]
pub struct ConformalImage {
    pub inner: TestFunction,
    pub g: ConformalElement,
    n: usize,
    contour: OnceLock<std::result::Result<ContourSpectrum, Error>>,
}

impl Clone for ConformalImage {
    fn clone(&self) -> Self {
        ConformalImage {
            inner: self.inner.clone(),
            g: self.g,
            n: self.n,
            contour: OnceLock::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum TestFunction {
    Gaussian(GaussianPacket),
    Lattice(LatticeBump),
    Affine(Arc<AffineImage>),
    Conformal(Arc<ConformalImage>),
}

impl ConformalImage {
    fn contour(&self) -> Result<&ContourSpectrum> {
        self.contour
            .get_or_init(|| {
                let TestFunction::Gaussian(packet) = &self.inner else {
                    return Err(Error::InvalidTestFunction(
                        "spectra of conformal images need a Gaussian packet".into(),
                    ));
                };
                ContourSpectrum::new(&self.g, packet, self.n, ContourSide::Image, HERMITE_ORDER)
            })
            .as_ref()
            .map_err(Clone::clone)
    }
}

fn image_value(g: &ConformalElement, inverse: &ConformalElement, inner: &TestFunction, n: usize, x_image: &FourVector) -> Result<CVector> {
    let x = boundary_act(inverse, x_image)?;
    Ok(t0_factor(g, &x, n)? * inner.eval(&x)?)
}

impl TestFunction {
    pub fn label(&self) -> SpinLabel {
        match self {
            TestFunction::Gaussian(g) => g.label,
            TestFunction::Lattice(b) => b.label,
            TestFunction::Affine(a) => a.inner.label(),
            TestFunction::Conformal(c) => c.inner.label(),
        }
    }

    pub fn zero(n: usize) -> Self {
        let mut g = GaussianPacket::isotropic(FourVector::ZERO, 1.0, FourVector::ZERO, CVector::zeros(n + 1))
            .expect("valid zero packet");
        g.amplitude = c(0.0);
        TestFunction::Gaussian(g)
    }

    pub fn eval(&self, x: &FourVector) -> Result<CVector> {
        match self {
            TestFunction::Gaussian(g) => Ok(g.eval(x)),
            TestFunction::Lattice(b) => Ok(b.eval(x)),
            TestFunction::Affine(a) => {
                let inv = a
                    .map
                    .try_inverse()
                    .ok_or_else(|| Error::InvalidTestFunction("singular affine map".into()))?;
                let y = FourVector::from_vector(&(inv * (*x - a.shift).as_vector()));
                Ok(&a.spin * a.inner.eval(&y)? * a.scale)
            }
            TestFunction::Conformal(ci) => image_value(&ci.g, &ci.g.inverse(), &ci.inner, ci.n, x),
        }
    }

    /// `f̂(p) = ∫ e^{−ip·x} f(x) d⁴x` for any real `p`.
    pub fn spectrum(&self, p: &FourVector) -> Result<CVector> {
        match self {
            TestFunction::Gaussian(g) => g.spectrum(p),
            TestFunction::Lattice(b) => b.spectrum(p),
            TestFunction::Affine(a) => {
                // ∫e^{−ip·(Gx+a)}f(x)|det G|d⁴x with p·Gx = (ηGᵀηp)·x
                let q = FourVector::from_vector(&(eta() * a.map.transpose() * eta() * p.as_vector()));
                let phase = Complex64::from_polar(a.map.determinant().abs(), -p.minkowski(&a.shift));
                Ok(&a.spin * a.inner.spectrum(&q)? * (a.scale * phase))
            }
            TestFunction::Conformal(ci) => ci.contour()?.eval(p),
        }
    }

    /// `(f̂(p), f̂(−p))`; cheaper than two calls for quadrature-based spectra.
    pub fn spectrum_pair(&self, p: &FourVector) -> Result<(CVector, CVector)> {
        Ok((self.spectrum(p)?, self.spectrum(&-*p)?))
    }

    fn resolution_ok(&self, p: &FourVector) -> Result<()> {
        match self {
            TestFunction::Lattice(b) => b.check(p),
            TestFunction::Affine(a) => {
                let q = FourVector::from_vector(&(eta() * a.map.transpose() * eta() * p.as_vector()));
                a.inner.resolution_ok(&q)
            }
            _ => Ok(()),
        }
    }

    /// Nyquist check of every grid momentum (and its negative).
    pub fn check_resolution(&self, grid: &QuadratureGrid) -> Result<()> {
        for p in grid.nodes() {
            self.resolution_ok(p.p())?;
            self.resolution_ok(&-*p.p())?;
        }
        Ok(())
    }

    /// `x ↦ scale·spin·f(G⁻¹(x − a))`, staying Gaussian when possible.
    pub fn affine_image(&self, map: &Matrix4<f64>, shift: &FourVector, spin: &CMatrix, scale: Complex64) -> Result<TestFunction> {
        if spin.nrows() != self.label().dim() || spin.ncols() != self.label().dim() {
            return Err(Error::DimensionMismatch {
                expected: self.label().dim(),
                found: spin.nrows(),
            });
        }
        match self {
            TestFunction::Gaussian(g) => Ok(TestFunction::Gaussian(g.affine_image(map, shift, spin, scale)?)),
            _ => Ok(TestFunction::Affine(Arc::new(AffineImage {
                inner: self.clone(),
                map: *map,
                shift: *shift,
                spin: spin.clone(),
                scale,
            }))),
        }
    }

    /// Covariant action `(T(g)f)(x) = D(A)f(Λ_A⁻¹(x − a))`.
    pub fn poincare_transform(&self, g: &PoincareElement) -> Result<TestFunction> {
        let spin = rep_d(self.label(), &g.spin).matrix;
        self.affine_image(&lorentz_matrix(&g.spin), &g.translation, &spin, c(1.0))
    }

    /// `T₀(g)f`; closed form when `g` acts affinely.
    pub fn conformal_image(g: &ConformalElement, f: &TestFunction) -> Result<TestFunction> {
        let n = f.label().k_doubled;
        if f.label() != SpinLabel::undotted(n) {
            return Err(Error::InvalidTestFunction("T0 acts on (0, n/2) test functions".into()));
        }
        if let Some(p) = g.as_poincare() {
            return f.poincare_transform(&p);
        }
        if g.is_affine() {
            let origin = boundary_act(g, &FourVector::ZERO)?;
            let mut map = Matrix4::zeros();
            for mu in 0..4 {
                let col = boundary_act(g, &FourVector::basis(mu))? - origin;
                for nu in 0..4 {
                    map[(nu, mu)] = col[nu];
                }
            }
            let factor = t0_factor(g, &FourVector::ZERO, n)?;
            return f.affine_image(&map, &origin, &factor, c(1.0));
        }
        Ok(TestFunction::Conformal(Arc::new(ConformalImage {
            inner: f.clone(),
            g: *g,
            n,
            contour: OnceLock::new(),
        })))
    }

    /// The compact support box, when there is one.
    pub fn support_region(&self) -> Option<Region> {
        match self {
            TestFunction::Lattice(b) => Some(b.enclosing_region()),
            _ => None,
        }
    }
}

type SpectrumCache = Mutex<HashMap<[u64; 4], (CVector, CVector)>>;

/// `(p ↦ f̂(p), p ↦ f̂(−p))` as cone functions; quadrature-based spectra are
/// memoized per node.
pub fn fourier_on_cone(f: &TestFunction) -> (ConeFunction, ConeFunction) {
    let dim = f.label().dim();
    let cache: Arc<SpectrumCache> = Arc::new(Mutex::new(HashMap::new()));
    let lookup = {
        let f = f.clone();
        move |p: &FourVector| -> Result<(CVector, CVector)> {
            let key = p.0.map(f64::to_bits);
            if let Some(hit) = cache.lock().expect("cache lock").get(&key) {
                return Ok(hit.clone());
            }
            let pair = f.spectrum_pair(p)?;
            cache.lock().expect("cache lock").insert(key, pair.clone());
            Ok(pair)
        }
    };
    let lookup = Arc::new(lookup);
    let l2 = lookup.clone();
    (
        ConeFunction::new(dim, move |p| Ok(lookup(p.p())?.0)),
        ConeFunction::new(dim, move |p| Ok(l2(p.p())?.1)),
    )
}

/// `I_n f`: a pair for even `n`, a quadruple for odd `n`.
#[derive(Debug, Clone)]
pub enum EmbedImage {
    Bose {
        plus: FactorVector,
        minus: FactorVector,
    },
    Fermi {
        plus: FactorVector,
        minus: FactorVector,
        plus_reflected: FactorVector,
        minus_reflected: FactorVector,
    },
}

fn bose_required(n: usize) -> Result<()> {
    if n % 2 != 0 {
        return Err(Error::Parity { expected: "even", n });
    }
    Ok(())
}

impl EmbedImage {
    /// Assembles the image from `p ↦ F(p)` and `p ↦ F(−p)`.
    pub fn from_spectra(forward: ConeFunction, backward: ConeFunction, n: usize) -> Result<Self> {
        let plus = FactorVector::new(forward.clone(), n, Sign::Plus)?;
        let minus = FactorVector::new(backward.conj(), n, Sign::Minus)?;
        if n % 2 == 0 {
            return Ok(EmbedImage::Bose { plus, minus });
        }
        Ok(EmbedImage::Fermi {
            plus,
            minus,
            plus_reflected: FactorVector::new(backward, n, Sign::Plus)?,
            minus_reflected: FactorVector::new(forward.conj(), n, Sign::Minus)?,
        })
    }

    pub fn n(&self) -> usize {
        self.components()[0].n
    }

    pub fn components(&self) -> Vec<&FactorVector> {
        match self {
            EmbedImage::Bose { plus, minus } => vec![plus, minus],
            EmbedImage::Fermi {
                plus,
                minus,
                plus_reflected,
                minus_reflected,
            } => vec![plus, minus, plus_reflected, minus_reflected],
        }
    }

    fn rebuild(&self, parts: Vec<FactorVector>) -> EmbedImage {
        let mut it = parts.into_iter();
        let mut next = || it.next().expect("component count");
        match self {
            EmbedImage::Bose { .. } => EmbedImage::Bose {
                plus: next(),
                minus: next(),
            },
            EmbedImage::Fermi { .. } => EmbedImage::Fermi {
                plus: next(),
                minus: next(),
                plus_reflected: next(),
                minus_reflected: next(),
            },
        }
    }

    fn same_shape(&self, other: &EmbedImage) -> Result<()> {
        if self.components().len() != other.components().len() || self.n() != other.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n() + 1,
                found: other.n() + 1,
            });
        }
        Ok(())
    }

    /// Sum of the componentwise β inner products.
    pub fn inner(&self, other: &EmbedImage, grid: &QuadratureGrid) -> Result<Complex64> {
        self.same_shape(other)?;
        let mut total = Complex64::new(0.0, 0.0);
        for (a, b) in self.components().into_iter().zip(other.components()) {
            total += a.inner(b, grid)?;
        }
        Ok(total)
    }

    pub fn norm(&self, grid: &QuadratureGrid) -> Result<f64> {
        Ok(self
            .components()
            .into_iter()
            .map(|v| factor_norm(v, grid).map(|x| x * x))
            .sum::<Result<f64>>()?
            .sqrt())
    }

    pub fn sub(&self, other: &EmbedImage) -> Result<EmbedImage> {
        self.same_shape(other)?;
        let parts = self
            .components()
            .into_iter()
            .zip(other.components())
            .map(|(a, b)| a.sub(b))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.rebuild(parts))
    }

    /// `V_n(g) = V₁′ ⊕ V₂′` (Bose) or `V₁′ ⊕ V₂′ ⊕ V₃′ ⊕ V₄′` (Fermi).
    pub fn poincare_act(&self, g: &PoincareElement) -> Result<EmbedImage> {
        let variants = [CanonicalVariant::V1, CanonicalVariant::V2, CanonicalVariant::V3, CanonicalVariant::V4];
        let parts = self
            .components()
            .into_iter()
            .zip(variants)
            .map(|(v, variant)| FactorVector::new(canonical_v_act(g, &v.representative, variant, v.n)?, v.n, v.sign))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.rebuild(parts))
    }
}

pub fn embed_in(f: &TestFunction, n: usize) -> Result<EmbedImage> {
    if f.label() != SpinLabel::undotted(n) {
        return Err(Error::InvalidTestFunction(format!(
            "I_{n} needs label (0,{n}), got {:?}",
            f.label()
        )));
    }
    let (forward, backward) = fourier_on_cone(f);
    EmbedImage::from_spectra(forward, backward, n)
}

/// `σ_n = Im⟨·,·⟩_{β₊} ⊕ Im⟨·,·⟩_{β₋}`.
pub fn sigma_n(a: &EmbedImage, b: &EmbedImage, grid: &QuadratureGrid) -> Result<f64> {
    bose_required(a.n())?;
    bose_required(b.n())?;
    Ok(a.inner(b, grid)?.im)
}

fn conj_factor(v: &FactorVector) -> FactorVector {
    let sign = match v.sign {
        Sign::Plus => Sign::Minus,
        Sign::Minus => Sign::Plus,
    };
    FactorVector {
        representative: v.representative.conj(),
        n: v.n,
        sign,
    }
}

/// `Γ_n(φ₊, φ₋, ψ₊, ψ₋) = (Γ₀ψ₋, Γ₀ψ₊, Γ₀φ₋, Γ₀φ₊)`.
pub fn gamma_n(image: &EmbedImage) -> Result<EmbedImage> {
    match image {
        EmbedImage::Bose { .. } => Err(Error::Parity {
            expected: "odd",
            n: image.n(),
        }),
        EmbedImage::Fermi {
            plus,
            minus,
            plus_reflected,
            minus_reflected,
        } => Ok(EmbedImage::Fermi {
            plus: conj_factor(minus_reflected),
            minus: conj_factor(plus_reflected),
            plus_reflected: conj_factor(minus),
            minus_reflected: conj_factor(plus),
        }),
    }
}

/// Values of `F(±p)` on every grid node.
pub type NodeSpectra = Vec<(CVector, CVector)>;

pub fn tabulate(f: &TestFunction, grid: &QuadratureGrid) -> Result<NodeSpectra> {
    grid.nodes().par_iter().map(|p| f.spectrum_pair(p.p())).collect()
}

pub fn tabulate_contour(spectrum: &ContourSpectrum, grid: &QuadratureGrid) -> Result<NodeSpectra> {
    grid.nodes()
        .par_iter()
        .map(|p| Ok((spectrum.eval(p.p())?, spectrum.eval(&-*p.p())?)))
        .collect()
}

/// `‖I_n F‖²` from tabulated spectra; every component reduces to
/// `∫ F(±p)*β₊(p)F(±p) dμ0`, counted twice in the Fermi case.
pub fn embed_norm_squared(spectra: &NodeSpectra, n: usize, grid: &QuadratureGrid) -> f64 {
    let multiplicity = if n % 2 == 0 { 1.0 } else { 2.0 };
    let terms: Vec<f64> = grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .zip(spectra)
        .map(|((p, w), (fp, fm))| {
            let b = crate::spinalg::beta_factor_unchecked(p.p_dagger(), n, Sign::Plus);
            w * (b.dotc(fp).norm_sqr() + b.dotc(fm).norm_sqr())
        })
        .collect();
    multiplicity * crate::conequad::pairwise_sum(&terms).unwrap_or(0.0)
}

pub fn spectra_difference(a: &NodeSpectra, b: &NodeSpectra) -> NodeSpectra {
    a.iter().zip(b).map(|((a1, a2), (b1, b2))| (a1 - b1, a2 - b2)).collect()
}

/// Group elements accepted by [`intertwiner_check`].
#[derive(Debug, Clone, Copy)]
pub enum Symmetry {
    Poincare(PoincareElement),
    Conformal(ConformalElement),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntertwinerOutcome {
    /// `‖I_n(T(g)f) − V_n(g)I_nf‖ / ‖I_nf‖`.
    pub residual: f64,
    /// `|‖W_n(g)I_nf‖ / ‖I_nf‖ − 1|`, zero for closed-form Poincaré actions.
    pub norm_defect: f64,
}

/// Compares the embedded transformed test function with the represented
/// group action on the embedded one.
pub fn intertwiner_check(g: &Symmetry, f: &TestFunction, n: usize, grid: &QuadratureGrid) -> Result<IntertwinerOutcome> {
    intertwiner_check_with(g, f, n, grid, HERMITE_ORDER)
}

pub fn intertwiner_check_with(
    g: &Symmetry,
    f: &TestFunction,
    n: usize,
    grid: &QuadratureGrid,
    order: usize,
) -> Result<IntertwinerOutcome> {
    if f.label() != SpinLabel::undotted(n) {
        return Err(Error::InvalidTestFunction(format!("label {:?} does not match n = {n}", f.label())));
    }
    f.check_resolution(grid)?;
    let poincare = match g {
        Symmetry::Poincare(p) => Some(*p),
        Symmetry::Conformal(c) => c.as_poincare(),
    };
    if let Some(p) = poincare {
        let lhs = embed_in(&f.poincare_transform(&p)?, n)?;
        let rhs = embed_in(f, n)?.poincare_act(&p)?;
        let reference = embed_in(f, n)?.norm(grid)?;
        let residual = lhs.sub(&rhs)?.norm(grid)? / reference.max(1e-300);
        return Ok(IntertwinerOutcome {
            residual,
            norm_defect: 0.0,
        });
    }
    let Symmetry::Conformal(gc) = g else { unreachable!() };
    let TestFunction::Gaussian(packet) = f else {
        return Err(Error::InvalidTestFunction(
            "conformal intertwiner checks need a Gaussian packet".into(),
        ));
    };
    let image = crate::conformal::t0_act(gc, f, n)?;
    let lhs = match &image {
        TestFunction::Conformal(_) => tabulate_contour(&ContourSpectrum::new(gc, packet, n, ContourSide::Image, order)?, grid)?,
        other => tabulate(other, grid)?,
    };
    let rhs = tabulate_contour(&ContourSpectrum::new(gc, packet, n, ContourSide::Source, order)?, grid)?;
    let reference = embed_norm_squared(&tabulate(f, grid)?, n, grid).sqrt();
    let residual = embed_norm_squared(&spectra_difference(&lhs, &rhs), n, grid).sqrt() / reference.max(1e-300);
    let norm_defect = (embed_norm_squared(&rhs, n, grid).sqrt() / reference - 1.0).abs();
    Ok(IntertwinerOutcome { residual, norm_defect })
}

/// Bounded localization region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// `{x : |x0 − c0| + |x⃗ − c⃗| < r}`.
    DoubleCone { center: FourVector, radius: f64 },
}

impl Region {
    pub fn double_cone(center: FourVector, radius: f64) -> Result<Region> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidTestFunction(format!("radius must be positive, got {radius}")));
        }
        Ok(Region::DoubleCone { center, radius })
    }

    pub fn contains(&self, x: &FourVector) -> bool {
        let Region::DoubleCone { center, radius } = self;
        let d = *x - *center;
        d[0].abs() + d.spatial_norm() < *radius
    }

    /// Points on the boundary: `rings` time slices × `per_ring` directions.
    pub fn boundary_samples(&self, rings: usize, per_ring: usize) -> Vec<FourVector> {
        let Region::DoubleCone { center, radius } = self;
        let golden = PI * (3.0 - 5f64.sqrt());
        let mut out = Vec::with_capacity(rings * per_ring);
        for i in 0..rings {
            let t = -radius + 2.0 * radius * (i as f64 + 0.5) / rings as f64;
            let r = radius - t.abs();
            for k in 0..per_ring {
                let z = 1.0 - 2.0 * (k as f64 + 0.5) / per_ring as f64;
                let s = (1.0 - z * z).sqrt();
                let phi = golden * k as f64;
                out.push(*center + FourVector::new(t, r * s * phi.cos(), r * s * phi.sin(), r * z));
            }
        }
        out
    }

    /// Deterministic interior samples.
    pub fn interior_samples(&self, count: usize, seed: u64) -> Vec<FourVector> {
        let Region::DoubleCone { center, radius } = self;
        let mut s = crate::sampling::Sampler::new(seed);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let x = *center + FourVector(std::array::from_fn(|_| s.uniform(-radius, *radius)));
            if self.contains(&x) {
                out.push(x);
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct RegionImage {
    pub boundary: Vec<FourVector>,
    /// False when the singular locus `det(A3X + A4) = 0` meets the closed region.
    pub regular: bool,
}

pub fn region_transform(g: &Symmetry, region: &Region) -> RegionImage {
    let g = match g {
        Symmetry::Poincare(p) => ConformalElement::embed_poincare(p),
        Symmetry::Conformal(c) => *c,
    };
    let Region::DoubleCone { center, .. } = region;
    let reference = g.denominator(&pauli_embed(center)).determinant();
    let mut probes = region.boundary_samples(16, 64);
    probes.extend(region.interior_samples(2000, 7));
    let regular = reference.norm() > 1e-12
        && probes.iter().all(|x| {
            let d = g.denominator(&pauli_embed(x)).determinant() / reference;
            d.re > 1e-9
        });
    let boundary = if regular {
        region
            .boundary_samples(16, 64)
            .iter()
            .filter_map(|x| boundary_act(&g, x).ok())
            .collect()
    } else {
        Vec::new()
    };
    RegionImage { boundary, regular }
}

/// Exact criterion for double cones: `|Δc⃗| − |Δc0| ≥ r1 + r2`.
pub fn spacelike_separated(a: &Region, b: &Region) -> bool {
    let (Region::DoubleCone { center: c1, radius: r1 }, Region::DoubleCone { center: c2, radius: r2 }) = (a, b);
    let d = *c1 - *c2;
    d.spatial_norm() - d[0].abs() >= r1 + r2
}

/// Bose: `|σ_n(I_nf, I_nh)|`; Fermi: `|⟨I_nf, I_nh⟩|`; both divided by
/// `‖I_nf‖·‖I_nh‖`.
pub fn causality_check(f: &TestFunction, h: &TestFunction, n: usize, grid: &QuadratureGrid) -> Result<f64> {
    f.check_resolution(grid)?;
    h.check_resolution(grid)?;
    let a = tabulate(f, grid)?;
    let b = tabulate(h, grid)?;
    let terms: Vec<Complex64> = grid
        .nodes()
        .iter()
        .zip(grid.weights())
        .zip(a.iter().zip(&b))
        .map(|((p, w), ((fp, fm), (hp, hm)))| {
            let b = crate::spinalg::beta_factor_unchecked(p.p_dagger(), n, Sign::Plus);
            (b.dotc(fp).conj() * b.dotc(hp) + (b.dotc(fm).conj() * b.dotc(hm)).conj()) * *w
        })
        .collect();
    let pair = crate::conequad::pairwise_sum(&terms).unwrap_or_default();
    // pair = ⟨f̂,ĥ⟩₊ + conj⟨f̂(−·),ĥ(−·)⟩₊ = the Bose inner product of the images
    let value = if n % 2 == 0 { pair.im } else { 2.0 * pair.re };
    let norm = (embed_norm_squared(&a, n, grid) * embed_norm_squared(&b, n, grid)).sqrt();
    Ok(value.abs() / norm.max(1e-300))
}

/// Two-point function of the Fock state: `⟨f̂,ĥ⟩_{β₊} + ⟨Γ₀f̂(−·), Γ₀ĥ(−·)⟩_{β₋}`;
/// in the Fermi case the basis projection keeps exactly these two components.
pub fn fock_two_point(f: &TestFunction, h: &TestFunction, n: usize, grid: &QuadratureGrid) -> Result<Complex64> {
    let (a, b) = (embed_in(f, n)?, embed_in(h, n)?);
    let (ca, cb) = (a.components(), b.components());
    Ok(ca[0].inner(cb[0], grid)? + ca[1].inner(cb[1], grid)?)
}

/// Points where `T₀(g)f` is nonzero but `x′ ∉ g·supp f`, out of `samples`
/// draws around the image of the support; returns the violation count.
pub fn support_violations(g: &ConformalElement, f: &LatticeBump, samples: usize, seed: u64) -> Result<usize> {
    let n = f.label.k_doubled;
    let image = crate::conformal::t0_act(g, &TestFunction::Lattice(f.clone()), n)?;
    let inverse = g.inverse();
    let region = f.enclosing_region();
    let Region::DoubleCone { radius, .. } = region;
    let center = boundary_act(g, &f.center)?;
    let mut s = crate::sampling::Sampler::new(seed);
    let mut violations = 0;
    for _ in 0..samples {
        let x = center + FourVector(std::array::from_fn(|_| s.uniform(-1.5 * radius, 1.5 * radius)));
        let value = image.eval(&x)?;
        let inside = boundary_act(&inverse, &x).map(|y| f.contains(&y)).unwrap_or(false);
        if value.norm() > 0.0 && !inside {
            violations += 1;
        }
    }
    Ok(violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conequad::RadialRule;
    use crate::sampling::Sampler;
    use proptest::prelude::*;

    fn packet(s: &mut Sampler, n: usize, width: f64) -> TestFunction {
        let center = s.four_vector(0.3);
        let momentum = s.four_vector(0.3);
        TestFunction::Gaussian(GaussianPacket::isotropic(center, width, momentum, s.complex_vector(n + 1)).unwrap())
    }

    fn small_grid(cutoff: f64) -> QuadratureGrid {
        QuadratureGrid::build(10, 8, 8, RadialRule::Legendre { cutoff }).unwrap()
    }

    fn bump(center: FourVector, pol: CVector) -> TestFunction {
        TestFunction::Lattice(LatticeBump::new(center, [0.5; 4], 16, Profile::Hann, pol).unwrap())
    }

    #[test]
    fn gaussian_spectrum_matches_direct_quadrature() {
        let mut s = Sampler::new(1);
        let TestFunction::Gaussian(g) = packet(&mut s, 1, 0.8) else { unreachable!() };
        // tensor Gauss–Hermite over the isotropic packet, independent of the closed form
        let rule = gauss_hermite_scaled(20).unwrap();
        let width = 0.8 * std::f64::consts::SQRT_2;
        let mut nodes = Vec::new();
        for flat in 0..20usize.pow(4) {
            let idx = [flat % 20, (flat / 20) % 20, (flat / 400) % 20, flat / 8000];
            let x = g.center + FourVector(std::array::from_fn(|k| width * rule.nodes[idx[k]]));
            let w: f64 = idx.iter().map(|&k| width * rule.weights[k]).product();
            nodes.push((x, w));
        }
        for p in [FourVector::ZERO, FourVector::new(0.7, 0.2, -0.1, 0.3)] {
            let direct = nodes
                .iter()
                .fold(CVector::zeros(2), |acc, (x, w)| acc + g.eval(x) * Complex64::from_polar(*w, -p.minkowski(x)));
            let closed = g.spectrum(&p).unwrap();
            assert!((&direct - &closed).norm() < 1e-6 * closed.norm(), "{p:?}");
        }
    }

    #[test]
    fn lattice_gaussian_matches_packet() {
        let pol = CVector::from_vec(vec![c(1.0), Complex64::new(0.5, -0.25)]);
        let center = FourVector::new(0.2, -0.1, 0.05, 0.3);
        let lattice = LatticeBump::new(center, [0.8; 4], 32, Profile::Gaussian { sigma: 0.1 }, pol.clone()).unwrap();
        let packet = GaussianPacket::isotropic(center, 0.1, FourVector::ZERO, pol).unwrap();
        for p in [FourVector::ZERO, FourVector::new(3.0, 1.0, -2.0, 0.5), FourVector::new(-10.0, 4.0, 6.0, -3.0)] {
            let a = lattice.spectrum(&p).unwrap();
            let b = packet.spectrum(&p).unwrap();
            assert!((&a - &b).norm() < 1e-10 * packet.spectrum(&FourVector::ZERO).unwrap().norm());
        }
        assert!(matches!(
            lattice.spectrum(&FourVector::new(100.0, 0.0, 0.0, 0.0)),
            Err(Error::Nyquist { .. })
        ));
        let grid = small_grid(1000.0);
        assert!(TestFunction::Lattice(lattice).check_resolution(&grid).is_err());
    }

    #[test]
    fn transform_laws() {
        let mut s = Sampler::new(2);
        let f = packet(&mut s, 2, 1.0);
        let a = s.four_vector(1.0);
        let moved = f.poincare_transform(&PoincareElement::translation(a)).unwrap();
        let real = bump(FourVector::ZERO, CVector::from_vec(vec![c(1.0)]));
        for _ in 0..10 {
            let p = s.four_vector(1.0);
            let lhs = moved.spectrum(&p).unwrap();
            let rhs = f.spectrum(&p).unwrap() * Complex64::from_polar(1.0, -p.minkowski(&a));
            assert!((&lhs - &rhs).norm() < 1e-12 * (1.0 + rhs.norm()));
            let (fp, fm) = real.spectrum_pair(&p).unwrap();
            assert!((fm[0] - fp[0].conj()).norm() < 1e-14);
        }
        // the affine wrapper of a non-Gaussian agrees with its pointwise definition
        let g = s.poincare(0.3, 0.5);
        let wrapped = real.poincare_transform(&g).unwrap();
        let x = s.four_vector(0.3);
        let y = g.inverse().act(&x);
        assert!((wrapped.eval(&x).unwrap() - real.eval(&y).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn embedding_structure() {
        let mut s = Sampler::new(3);
        let grid = QuadratureGrid::build(32, 32, 32, RadialRule::Legendre { cutoff: 8.0 }).unwrap();
        let zero = embed_in(&TestFunction::zero(2), 2).unwrap();
        assert!(zero.norm(&grid).unwrap() < 1e-300);
        assert!(embed_in(&packet(&mut s, 1, 1.0), 2).is_err());
        for n in [0, 2] {
            let (f, h) = (packet(&mut s, n, 1.0), packet(&mut s, n, 1.0));
            let (a, b) = (embed_in(&f, n).unwrap(), embed_in(&h, n).unwrap());
            assert!(a.norm(&grid).unwrap().is_finite());
            assert!(sigma_n(&a, &a, &grid).unwrap().abs() < 1e-12 * a.norm(&grid).unwrap().powi(2));
            let ab = sigma_n(&a, &b, &grid).unwrap();
            assert!((ab + sigma_n(&b, &a, &grid).unwrap()).abs() < 1e-12 * ab.abs().max(1.0));
            let g = s.poincare(0.15, 1.0);
            let moved = sigma_n(&a.poincare_act(&g).unwrap(), &b.poincare_act(&g).unwrap(), &grid).unwrap();
            let scale = a.norm(&grid).unwrap() * b.norm(&grid).unwrap();
            assert!((moved - ab).abs() < 1e-8 * scale, "{moved} vs {ab}");
            assert!(gamma_n(&a).is_err());
        }
        for n in [1, 3] {
            let (f, h) = (packet(&mut s, n, 1.0), packet(&mut s, n, 1.0));
            let (a, b) = (embed_in(&f, n).unwrap(), embed_in(&h, n).unwrap());
            assert!(sigma_n(&a, &b, &grid).is_err());
            let twice = gamma_n(&gamma_n(&a).unwrap()).unwrap();
            assert!(twice.sub(&a).unwrap().norm(&grid).unwrap() < 1e-12 * a.norm(&grid).unwrap());
            let lhs = gamma_n(&a).unwrap().inner(&gamma_n(&b).unwrap(), &grid).unwrap();
            let rhs = b.inner(&a, &grid).unwrap();
            assert!((lhs - rhs).norm() < 1e-9 * rhs.norm().max(1.0));
            // I_n f is Γ-invariant, and Γ commutes with V_n
            assert!(gamma_n(&a).unwrap().sub(&a).unwrap().norm(&grid).unwrap() < 1e-12 * a.norm(&grid).unwrap());
            let g = s.poincare(0.3, 1.0);
            let d = gamma_n(&a.poincare_act(&g).unwrap())
                .unwrap()
                .sub(&gamma_n(&a).unwrap().poincare_act(&g).unwrap())
                .unwrap();
            assert!(d.norm(&grid).unwrap() < 1e-8 * a.norm(&grid).unwrap());
        }
    }

    #[test]
    fn poincare_intertwiner_is_exact() {
        let mut s = Sampler::new(4);
        let grid = small_grid(6.0);
        for n in 0..3 {
            let f = packet(&mut s, n, 1.0);
            let t = PoincareElement::translation(s.four_vector(1.0));
            assert!(intertwiner_check(&Symmetry::Poincare(t), &f, n, &grid).unwrap().residual < 1e-10);
            let id = Symmetry::Conformal(ConformalElement::identity());
            assert!(intertwiner_check(&id, &f, n, &grid).unwrap().residual < 1e-14);
            let g = Symmetry::Poincare(s.poincare(0.4, 1.0));
            assert!(intertwiner_check(&g, &f, n, &grid).unwrap().residual < 1e-10);
        }
    }

    #[test]
    fn conformal_intertwiner_two_evaluations_agree() {
        let mut s = Sampler::new(5);
        let grid = small_grid(4.5);
        let special = ConformalElement::special_conformal(&pauli_embed(&FourVector::new(0.003, -0.002, 0.001, 0.004))).unwrap();
        let boost = ConformalElement::embed_poincare(&s.poincare(0.3, 0.5));
        for n in [0, 1] {
            let f = packet(&mut s, n, 1.0);
            for g in [special, boost.compose(&special), ConformalElement::dilation(1.2)] {
                let out = intertwiner_check(&Symmetry::Conformal(g), &f, n, &grid).unwrap();
                assert!(out.residual < 1e-6, "{out:?}");
            }
        }
    }

    #[test]
    fn contour_spectrum_is_the_closed_form_for_affine_elements() {
        let mut s = Sampler::new(6);
        let TestFunction::Gaussian(g) = packet(&mut s, 1, 1.0) else { unreachable!() };
        let d = ConformalElement::dilation(0.9).compose(&ConformalElement::embed_poincare(&s.poincare(0.3, 0.5)));
        let closed = TestFunction::conformal_image(&d, &TestFunction::Gaussian(g.clone())).unwrap();
        let image = ContourSpectrum::new(&d, &g, 1, ContourSide::Image, 4).unwrap();
        let source = ContourSpectrum::new(&d, &g, 1, ContourSide::Source, 4).unwrap();
        for _ in 0..5 {
            let p = s.four_vector(1.0);
            let want = closed.spectrum(&p).unwrap();
            assert!((image.eval(&p).unwrap() - &want).norm() < 1e-10 * want.norm().max(1e-3));
            assert!((source.eval(&p).unwrap() - &want).norm() < 1e-10 * want.norm().max(1e-3));
        }
    }

    #[test]
    fn t0_laws_pointwise() {
        let mut s = Sampler::new(7);
        let f = bump(FourVector::ZERO, s.complex_vector(3));
        let g0 = s.poincare(0.3, 0.2);
        let via_t0 = crate::conformal::t0_act(&ConformalElement::embed_poincare(&g0), &f, 2).unwrap();
        let covariant = crate::poincare::covariant_act(&g0, &f, SpinLabel::undotted(2)).unwrap();
        let special = |v: FourVector| ConformalElement::special_conformal(&pauli_embed(&v)).unwrap();
        let (g1, g2) = (special(FourVector::new(0.02, 0.01, 0.0, -0.01)), special(FourVector::new(-0.01, 0.0, 0.02, 0.01)));
        let g1 = g1.compose(&ConformalElement::dilation(1.1));
        let composed = crate::conformal::t0_act(&g1.compose(&g2), &f, 2).unwrap();
        let stepwise = crate::conformal::t0_act(&g1, &crate::conformal::t0_act(&g2, &f, 2).unwrap(), 2).unwrap();
        let identity = crate::conformal::t0_act(&ConformalElement::identity(), &f, 2).unwrap();
        for _ in 0..50 {
            let x = s.four_vector(0.3);
            let want = covariant.eval(&x).unwrap();
            assert!((via_t0.eval(&x).unwrap() - &want).norm() < 1e-10 * (1.0 + want.norm()));
            let a = composed.eval(&x).unwrap();
            assert!((stepwise.eval(&x).unwrap() - &a).norm() < 1e-10 * (1.0 + a.norm()));
            assert!((identity.eval(&x).unwrap() - f.eval(&x).unwrap()).norm() < 1e-14);
        }
    }

    #[test]
    fn supports_move_with_the_group() {
        let mut s = Sampler::new(8);
        let TestFunction::Lattice(b) = bump(FourVector::new(0.2, 0.0, 0.1, 0.0), s.complex_vector(2)) else { unreachable!() };
        let g = ConformalElement::special_conformal(&pauli_embed(&FourVector::new(0.05, 0.02, -0.03, 0.01))).unwrap();
        assert_eq!(support_violations(&g, &b, 1000, 1).unwrap(), 0);
    }

    #[test]
    fn regions() {
        let unit = |c: FourVector| Region::double_cone(c, 1.0).unwrap();
        assert!(spacelike_separated(&unit(FourVector::ZERO), &unit(FourVector::new(0.0, 5.0, 0.0, 0.0))));
        assert!(!spacelike_separated(&unit(FourVector::ZERO), &unit(FourVector::ZERO)));
        assert!(!spacelike_separated(&unit(FourVector::ZERO), &unit(FourVector::new(5.0, 0.0, 0.0, 0.0))));
        assert!(Region::double_cone(FourVector::ZERO, 0.0).is_err());

        let r = Region::double_cone(FourVector::new(0.5, 0.1, 0.0, 0.0), 1.0).unwrap();
        let mut s = Sampler::new(9);
        let rotation = PoincareElement::new(s.su2(), FourVector::new(1.0, 2.0, 0.0, -1.0)).unwrap();
        let image = region_transform(&Symmetry::Poincare(rotation), &r);
        assert!(image.regular);
        let moved = Region::double_cone(rotation.act(&FourVector::new(0.5, 0.1, 0.0, 0.0)), 1.0).unwrap();
        let Region::DoubleCone { center, radius } = moved;
        for x in &image.boundary {
            let d = *x - center;
            assert!((d[0].abs() + d.spatial_norm() - radius).abs() < 1e-12);
        }
        let same = region_transform(&Symmetry::Conformal(ConformalElement::identity()), &r);
        assert_eq!(same.boundary, r.boundary_samples(16, 64));
        let origin = Region::double_cone(FourVector::ZERO, 1.0).unwrap();
        let large = ConformalElement::special_conformal(&pauli_embed(&FourVector::new(0.0, 2.0, 0.0, 0.0))).unwrap();
        assert!(!region_transform(&Symmetry::Conformal(large), &origin).regular);
    }

    #[test]
    fn causality_and_fock_state() {
        let mut s = Sampler::new(10);
        let grid = QuadratureGrid::build(32, 32, 8, RadialRule::Legendre { cutoff: 25.0 }).unwrap();
        for n in [0, 1] {
            let f = bump(FourVector::ZERO, s.complex_vector(n + 1));
            let space = bump(FourVector::new(0.0, 0.0, 0.0, 3.0), s.complex_vector(n + 1));
            let time = bump(FourVector::new(2.4, 0.0, 0.0, 2.0), s.complex_vector(n + 1));
            let rs = causality_check(&f, &space, n, &grid).unwrap();
            let rt = causality_check(&f, &time, n, &grid).unwrap();
            assert!(rs < 1e-3 && rs < 0.1 * rt, "{rs} {rt}");
            if n == 0 {
                assert!(causality_check(&f, &f, n, &grid).unwrap() < 1e-14);
            }
        }
        let grid = small_grid(6.0);
        let (f, h) = (packet(&mut s, 1, 1.0), packet(&mut s, 1, 1.0));
        let diag = fock_two_point(&f, &f, 1, &grid).unwrap();
        assert!(diag.re > 0.0 && diag.im.abs() < 1e-12 * diag.re);
        let a = PoincareElement::translation(s.four_vector(1.0));
        let fh = fock_two_point(&f, &h, 1, &grid).unwrap();
        let moved = fock_two_point(&f.poincare_transform(&a).unwrap(), &h.poincare_transform(&a).unwrap(), 1, &grid).unwrap();
        assert!((moved - fh).norm() < 1e-9 * diag.re);
        let hf = fock_two_point(&h, &f, 1, &grid).unwrap();
        assert!((hf - fh.conj()).norm() < 1e-12 * diag.re);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn spacelike_criterion_is_symmetric_and_shift_invariant(
            c1 in prop::array::uniform4(-3.0f64..3.0),
            c2 in prop::array::uniform4(-3.0f64..3.0),
            shift in prop::array::uniform4(-5.0f64..5.0),
            r1 in 0.1f64..2.0,
            r2 in 0.1f64..2.0,
        ) {
            let a = Region::double_cone(FourVector(c1), r1).unwrap();
            let b = Region::double_cone(FourVector(c2), r2).unwrap();
            prop_assert_eq!(spacelike_separated(&a, &b), spacelike_separated(&b, &a));
            let t = FourVector(shift);
            let a2 = Region::double_cone(FourVector(c1) + t, r1).unwrap();
            let b2 = Region::double_cone(FourVector(c2) + t, r2).unwrap();
            let d = (FourVector(c1) - FourVector(c2)).spatial_norm() - (c1[0] - c2[0]).abs() - r1 - r2;
            if d.abs() > 1e-9 {
                prop_assert_eq!(spacelike_separated(&a, &b), spacelike_separated(&a2, &b2));
            }
        }

        #[test]
        fn lattice_bumps_vanish_outside_their_box(x in prop::array::uniform4(-2.0f64..2.0)) {
            let TestFunction::Lattice(b) = bump(FourVector::ZERO, CVector::from_vec(vec![c(1.0)])) else { unreachable!() };
            let v = b.eval(&FourVector(x));
            if !b.contains(&FourVector(x)) {
                prop_assert_eq!(v.norm(), 0.0);
            }
            prop_assert!(b.enclosing_region().contains(&FourVector(x)) || v.norm() == 0.0);
        }
    }
}
