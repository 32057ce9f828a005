//! Property suites and the driver that turns them into reports.
//!
//! Each check is a public function returning a [`Measurement`], so callers can
//! rerun a single property with their own sample counts.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::Matrix4;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::conequad::{build_grid, inner_beta, l2_norm_squared, phi_plus, project_null, project_range, FactorVector, QuadratureGrid, RadialRule};
use crate::config::SuiteConfig;
use crate::conformal::{
    self, calibrate, calibration_samples, calibrate_cn_over, cocycle_j, covariance_defect, expected_constant, gram,
    kernel_closed_candidate, kernel_quadrature, laplace_beta, laplace_shape, sample_element, su22_residual, t_y_relation_residual,
    tau_k, tube_act, w1_act, CalibrationRecord, ConformalElement, ExtensionMode, KernelPoint, Placement, COCYCLE_MODE,
    COCYCLE_PLACEMENT, KERNEL_MODE,
};
use crate::convergence::{convergence_study, monotonicity_violations, INTEGRALS};
use crate::error::{Error, Result};
use crate::freenet::{
    causality_check, embed_in, gamma_n, intertwiner_check, region_transform, sigma_n, support_violations, GaussianPacket, LatticeBump,
    Profile, Region, Symmetry, TestFunction,
};
use crate::poincare::{
    boost_section, canonical_v_act, little_group_factor, sl2_inverse, wigner_act, wigner_phase, CanonicalVariant, ConeFunction,
    MomentumOnCone, PoincareElement,
};
use crate::report::{Report, ReportRecord};
use crate::sampling::Sampler;
use crate::spinalg::{beta, c, conj2, mat2, pauli_embed, rep_d, sym_power, CMatrix, CVector, ComplexMatrix2, FourVector, Sign, SpinLabel};

pub const SUITES: [&str; 9] = [
    "spin",
    "poincare",
    "factor",
    "conformal-cocycle",
    "kernel",
    "extension",
    "embedding",
    "net-axioms",
    "convergence",
];

/// Complex pairs used by the calibration protocol attached to every report.
pub const CALIBRATION_PAIRS: usize = 20;

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub residual: f64,
    pub samples: usize,
    pub constants: Vec<(String, f64)>,
}

impl Measurement {
    pub fn new(residual: f64, samples: usize) -> Self {
        Measurement {
            residual,
            samples,
            constants: Vec::new(),
        }
    }

    pub fn with(mut self, name: impl Into<String>, value: f64) -> Self {
        self.constants.push((name.into(), value));
        self
    }
}

fn rel(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn cycle(ns: &[usize], k: usize) -> usize {
    ns[k % ns.len()]
}

// ---- spin -----------------------------------------------------------------

/// `Symⁿ(AB) = Symⁿ(A)Symⁿ(B)` relative to `‖Symⁿ(A)‖‖Symⁿ(B)‖`.
pub fn sym_power_multiplicativity(ns: &[usize], samples: usize, seed: u64) -> Result<Measurement> {
    let mut s = Sampler::new(seed);
    let mut worst: f64 = 0.0;
    for k in 0..samples {
        let n = cycle(ns, k);
        let (a, b) = (s.sl2c(0.6), s.sl2c(0.6));
        let (sa, sb) = (sym_power(&a, n), sym_power(&b, n));
        worst = worst.max((sym_power(&(a * b), n) - &sa * &sb).norm() / (sa.norm() * sb.norm()));
    }
    Ok(Measurement::new(worst, samples))
}

/// `D(AB) = D(A)D(B)` over labels `(j/2, k/2)` with `j + k = n`.
pub fn rep_d_multiplicativity(ns: &[usize], samples: usize, seed: u64) -> Result<Measurement> {
    let mut s = Sampler::new(seed);
    let mut worst: f64 = 0.0;
    for k in 0..samples {
        let n = cycle(ns, k);
        let j = k % (n + 1);
        let label = SpinLabel::new(j, n - j);
        let (a, b) = (s.sl2c(0.6), s.sl2c(0.6));
        let (da, db) = (rep_d(label, &a).matrix, rep_d(label, &b).matrix);
        worst = worst.max((rep_d(label, &(a * b)).matrix - &da * &db).norm() / (da.norm() * db.norm()));
    }
    Ok(Measurement::new(worst, samples))
}

/// `D(A)*β(p)D(A) = β(Λ_A⁻¹p)` for both signs.
pub fn beta_covariance(ns: &[usize], samples: usize, seed: u64) -> Result<Measurement> {
    let mut s = Sampler::new(seed);
    let mut worst: f64 = 0.0;
    for k in 0..samples {
        let n = cycle(ns, k);
        let a = s.sl2c(0.5);
        let p = s.cone_point(0.1, 5.0);
        let q = p.pulled_back(&a)?;
        for sign in [Sign::Plus, Sign::Minus] {
            let d = match sign {
                Sign::Plus => sym_power(&conj2(&a), n),
                Sign::Minus => sym_power(&a, n),
            };
            let lhs = d.adjoint() * beta(p.p(), n, sign)?.matrix * &d;
            let rhs = beta(q.p(), n, sign)?.matrix;
            let scale = d.norm().powi(2) * beta(p.p(), n, sign)?.matrix.norm();
            worst = worst.max((lhs - rhs).norm() / scale);
        }
    }
    Ok(Measurement::new(worst, samples))
}

// ---- poincare -------------------------------------------------------------

/// `H·diag(2,0)·H* = P`, `(H⁻¹)*·diag(0,1)·H⁻¹ = P†` and `det H = 1`,
/// relative to `p0`.
pub fn boost_section_identities(samples: usize, seed: u64) -> Result<Measurement> {
    let mut s = Sampler::new(seed);
    let diag = mat2(c(2.0), c(0.0), c(0.0), c(0.0));
    let proj = mat2(c(0.0), c(0.0), c(0.0), c(1.0));
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let p = s.cone_point(0.05, 10.0);
        let h = boost_section(&p)?;
        let hi = sl2_inverse(&h);
        let scale = p.p0();
        worst = worst
            .max((h * diag * h.adjoint() - p.p_matrix()).norm() / scale)
            .max((hi.adjoint() * proj * hi - p.p_dagger()).norm() / scale)
            .max((h.determinant() - c(1.0)).norm());
    }
    Ok(Measurement::new(worst, samples))
}

/// `‖H_p̂ + 1‖` at `p̂ = (1, 0, 0, 1)`.
pub fn reference_boost_residual() -> Result<Measurement> {
    let hat = MomentumOnCone::new(FourVector::new(1.0, 0.0, 0.0, 1.0))?;
    Ok(Measurement::new((boost_section(&hat)? + ComplexMatrix2::identity()).norm(), 1))
}

/// The little-group factor is upper triangular with unimodular corner equal
/// to the Wigner phase.
pub fn little_group_membership(samples: usize, seed: u64) -> Result<Measurement> {
    let mut s = Sampler::new(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let a = s.sl2c(0.8);
        let p = s.cone_point(0.1, 5.0);
        let l = little_group_factor(&a, &p)?;
        worst = worst
            .max(l[(1, 0)].norm())
            .max((l[(1, 1)].norm() - 1.0).abs())
            .max((wigner_phase(&a, &p)? - l[(1, 1)]).norm());
    }
    Ok(Measurement::new(worst, samples))
}

/// `phase(AB, p) = phase(A, p)·phase(B, Λ_A⁻¹p)`.
pub fn phase_cocycle(samples: usize, seed: u64) -> Result<Measurement> {
    let mut s = Sampler::new(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let (a, b) = (s.sl2c(0.8), s.sl2c(0.8));
        let p = s.cone_point(0.1, 5.0);
        let q = p.pulled_back(&a)?;
        let lhs = wigner_phase(&(a * b), &p)?;
        worst = worst.max((lhs - wigner_phase(&a, &p)? * wigner_phase(&b, &q)?).norm());
    }
    Ok(Measurement::new(worst, samples))
}

// ---- factor ---------------------------------------------------------------

/// Relative errors of `∫e^{−p0}dμ0 = 2π` and `∫e^{−2p0}dμ0 = π/2`, and the
/// absolute size of three odd moments.
pub fn reference_integrals(grid: &QuadratureGrid) -> Result<Measurement> {
    let one = grid.integrate_scalar(|p| c((-p.p0()).exp()))?.re;
    let two = grid.integrate_scalar(|p| c((-2.0 * p.p0()).exp()))?.re;
    let mut worst = ((one - 2.0 * PI) / (2.0 * PI)).abs().max(((two - PI / 2.0) / (PI / 2.0)).abs());
    for i in 1..4 {
        worst = worst.max(grid.integrate_scalar(|p| c((-p.p0()).exp() * p.p()[i]))?.norm());
    }
    Ok(Measurement::new(worst, 5).with("exp_p0", one).with("exp_2p0", two))
}

/// Three scalar cone functions used by the factor-space checks.
pub fn scalar_packets() -> Vec<ConeFunction> {
    vec![
        ConeFunction::scalar(|p| c((-p.p0()).exp())),
        ConeFunction::scalar(|p| Complex64::new(1.0, 0.5 * p.p()[1]) * (-p.p0() - 0.2 * p.p()[3]).exp()),
        ConeFunction::scalar(|p| Complex64::from_polar((-1.5 * p.p0() + 0.4 * p.p()[2]).exp(), 0.7 * p.p()[1])),
    ]
}

/// `|‖Φ₊χ‖²_β − ‖χ‖²| / ‖χ‖²`.
pub fn phi_plus_isometry(ns: &[usize], grid: &QuadratureGrid) -> Result<Measurement> {
    let mut worst: f64 = 0.0;
    let packets = scalar_packets();
    for &n in ns {
        for chi in &packets {
            let l2 = l2_norm_squared(chi, grid)?;
            let v = phi_plus(chi, n)?;
            let b = inner_beta(&v.representative, &v.representative, n, Sign::Plus, grid)?.re;
            worst = worst.max((b - l2).abs() / l2);
        }
    }
    Ok(Measurement::new(worst, ns.len() * packets.len()))
}

/// `‖Φ₊(U(g)χ) − V₁(g)Φ₊χ‖_β / ‖Φ₊χ‖_β` modulo null vectors.
pub fn phi_plus_intertwining(ns: &[usize], grid: &QuadratureGrid, seed: u64) -> Result<Measurement> {
    let mut s = Sampler::new(seed);
    let mut worst: f64 = 0.0;
    let packets = scalar_packets();
    for &n in ns {
        for chi in &packets {
            let g = s.poincare(0.2, 1.0);
            let lhs = phi_plus(&wigner_act(&g, chi, n, Sign::Plus)?, n)?;
            let image = phi_plus(chi, n)?;
            let rhs = FactorVector::new(canonical_v_act(&g, &image.representative, CanonicalVariant::V1, n)?, n, Sign::Plus)?;
            let scale = crate::conequad::factor_norm(&image, grid)?;
            worst = worst.max(lhs.distance(&rhs, grid)? / scale);
        }
    }
    Ok(Measurement::new(worst, ns.len() * packets.len()))
}

fn vector_packet(n: usize) -> ConeFunction {
    ConeFunction::new(n + 1, move |p| {
        Ok(CVector::from_fn(n + 1, |i, _| {
            Complex64::new(1.0 + i as f64, 0.3 * p.p()[1] - 0.2 * i as f64) * (-p.p0() - 0.2 * p.p()[3]).exp()
        }))
    })
}

fn pure_boost(rapidity: f64, axis: usize) -> PoincareElement {
    let (ch, sh) = ((rapidity / 2.0).cosh(), (rapidity / 2.0).sinh());
    let i = Complex64::new(0.0, 1.0);
    let spin = match axis {
        1 => mat2(c(ch), c(sh), c(sh), c(ch)),
        2 => mat2(c(ch), -i * sh, i * sh, c(ch)),
        _ => mat2(c(ch + sh), c(0.0), c(0.0), c(ch - sh)),
    };
    PoincareElement::lorentz(spin).expect("boosts are unimodular")
}

/// Largest unweighted `L²` size of the null part of `V₁(g)·(range part)`,
/// relative to the packet, over pure boosts; the range summand is not
/// invariant when this is large.
pub fn range_summand_witness(n: usize, grid: &QuadratureGrid) -> Result<Measurement> {
    let phi = vector_packet(n);
    let scale = l2_norm_squared(&phi, grid)?.sqrt();
    let range = project_range(&phi, n, Sign::Plus)?;
    let mut best: f64 = 0.0;
    let boosts: Vec<_> = (1..4).map(|axis| pure_boost(0.8, axis)).collect();
    for g in &boosts {
        let moved = canonical_v_act(g, &range, CanonicalVariant::V1, n)?;
        let null = project_null(&moved, n, Sign::Plus)?;
        best = best.max(l2_norm_squared(&null, grid)?.sqrt() / scale);
    }
    Ok(Measurement::new(best, boosts.len()))
}

/// `‖β(p)·(V₁(g)·null part)(p)‖` in `L²`, relative to `‖β(p)φ(p)‖`.
pub fn null_summand_invariance(n: usize, grid: &QuadratureGrid, seed: u64) -> Result<Measurement> {
    let mut s = Sampler::new(seed);
    let phi = vector_packet(n);
    let weighted = |f: &ConeFunction| -> Result<f64> {
        let f = f.clone();
        Ok(grid
            .integrate(move |p| Ok(c((beta(p.p(), n, Sign::Plus)?.matrix * f.eval(p)?).norm_squared())))?
            .re)
    };
    let scale = grid
        .integrate(|p| Ok(c(beta(p.p(), n, Sign::Plus)?.matrix.norm_squared() * phi.eval(p)?.norm_squared())))?
        .re
        .sqrt();
    let null = project_null(&phi, n, Sign::Plus)?;
    let mut worst = weighted(&null)?.sqrt() / scale;
    let samples = 4;
    for _ in 0..samples {
        let g = s.poincare(0.5, 1.0);
        let moved = canonical_v_act(&g, &null, CanonicalVariant::V1, n)?;
        worst = worst.max(weighted(&moved)?.sqrt() / scale);
    }
    Ok(Measurement::new(worst, samples))
}

// ---- conformal-cocycle ----------------------------------------------------

/// `J(g1g2, Z) = J(g1, g2Z)·J(g2, Z)` in one continuation.
pub fn cocycle_law(mode: ExtensionMode, ns: &[usize], samples: usize, seed: u64) -> Result<Measurement> {
    let mut s = Sampler::new(seed);
    let mut worst: f64 = 0.0;
    for k in 0..samples {
        let n = cycle(ns, k);
        let (g1, g2) = (sample_element(&mut s), sample_element(&mut s));
        let z = s.tube_point(1.0, 0.5, 1.0);
        let lhs = cocycle_j(&g1.compose(&g2), &z, n, mode)?.matrix;
        let rhs = cocycle_j(&g1, &tube_act(&g2, &z)?, n, mode)?.matrix * cocycle_j(&g2, &z, n, mode)?.matrix;
        worst = worst.max(rel(&lhs, &rhs));
    }
    Ok(Measurement::new(worst, samples))
}

/// `‖τ(K)τ(K)* − 1‖` over the maximal compact subgroup.
pub fn tau_unitarity(ns: &[usize], samples: usize, seed: u64) -> Result<Measurement> {
    let mut s = Sampler::new(seed);
    let mut worst: f64 = 0.0;
    for k in 0..samples {
        let n = cycle(ns, k);
        let t = tau_k(&s.k0(), n).matrix;
        worst = worst.max((&t * t.adjoint() - CMatrix::identity(n + 1, n + 1)).norm());
    }
    Ok(Measurement::new(worst, samples))
}

/// Products and inverses stay in SU(2,2) and `g·g⁻¹ = 1`.
pub fn su22_closure(samples: usize, seed: u64) -> Result<Measurement> {
    let mut s = Sampler::new(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let (g1, g2) = (sample_element(&mut s), sample_element(&mut s));
        let product = g1.compose(&g2);
        worst = worst
            .max(su22_residual(product.matrix()))
            .max(su22_residual(g1.inverse().matrix()))
            .max((g1.compose(&g1.inverse()).matrix() - Matrix4::identity()).norm());
    }
    Ok(Measurement::new(worst, samples))
}

// ---- kernel ---------------------------------------------------------------

/// `‖∫e^{−Tr(P†Y)}β₊dμ0 − C_n det(Y)⁻¹D(Y)⁻¹‖` relative, with `C_n = 2π·n!`,
/// over `1`, `diag(2,1)` and eight random positive definite `Y`.
pub fn laplace_identity(ns: &[usize], grid: &QuadratureGrid, seed: u64) -> Result<Measurement> {
    let ys = calibration_samples(8, seed);
    let mut worst: f64 = 0.0;
    let mut out = Measurement::new(0.0, ys.len() * ns.len());
    for &n in ns {
        for y in &ys {
            let q = laplace_beta(y, n, grid)?;
            worst = worst.max(rel(&(laplace_shape(y, n) * c(expected_constant(n))), &q));
        }
        out = out.with(format!("C_{n}"), expected_constant(n));
    }
    out.residual = worst;
    Ok(out)
}

/// Least-squares fits of `C_n` against `2π·n!`.
pub fn fitted_constants(ns: &[usize], grid: &QuadratureGrid, seed: u64) -> Result<Measurement> {
    let ys = calibration_samples(8, seed);
    let mut worst: f64 = 0.0;
    let mut out = Measurement::new(0.0, ys.len() * ns.len());
    for &n in ns {
        let fit = calibrate_cn_over(n, &ys, grid)?;
        worst = worst.max((fit.value / expected_constant(n) - 1.0).abs());
        out = out.with(format!("C_{n}"), fit.value);
    }
    out.residual = worst;
    Ok(out)
}

fn complex_pairs(count: usize, seed: u64) -> Vec<(conformal::TubePoint, conformal::TubePoint)> {
    let mut s = Sampler::new(seed);
    (0..count)
        .map(|_| (s.tube_point(0.4, 0.5, 1.5), s.tube_point(0.4, 0.5, 1.5)))
        .collect()
}

/// `K(Z2, Z1) = K(Z1, Z2)*`.
pub fn kernel_hermitian_symmetry(ns: &[usize], pairs: usize, grid: &QuadratureGrid, seed: u64) -> Result<Measurement> {
    let mut worst: f64 = 0.0;
    for (k, (z1, z2)) in complex_pairs(pairs, seed).iter().enumerate() {
        let n = cycle(ns, k);
        let k12 = kernel_quadrature(z1, z2, n, grid)?.matrix;
        let k21 = kernel_quadrature(z2, z1, n, grid)?.matrix;
        worst = worst.max(rel(&k12.adjoint(), &k21));
    }
    Ok(Measurement::new(worst, pairs))
}

/// `K(Z, Z)` is Hermitian and positive semidefinite: the anti-Hermitian part
/// and any negative eigenvalue, relative to `‖K(Z, Z)‖`.
pub fn kernel_diagonal_psd(ns: &[usize], samples: usize, grid: &QuadratureGrid, seed: u64) -> Result<Measurement> {
    let mut s = Sampler::new(seed);
    let mut worst: f64 = 0.0;
    let mut smallest = f64::INFINITY;
    for k in 0..samples {
        let n = cycle(ns, k);
        let z = s.tube_point(0.4, 0.5, 1.5);
        let kz = kernel_quadrature(&z, &z, n, grid)?.matrix;
        let norm = kz.norm();
        let herm = (&kz + kz.adjoint()) * c(0.5);
        let low = herm.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min) / norm;
        smallest = smallest.min(low);
        worst = worst.max((&kz - kz.adjoint()).norm() / norm).max(-low);
    }
    Ok(Measurement::new(worst, samples).with("min_relative_eigenvalue", smallest))
}

/// Largest relative mismatch between the quadrature kernel and each
/// closed-form continuation over complex pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeComparison {
    pub residuals: Vec<(ExtensionMode, f64)>,
    pub samples: usize,
}

impl ModeComparison {
    pub fn matching(&self, tolerance: f64) -> Vec<ExtensionMode> {
        self.residuals.iter().filter(|(_, r)| *r < tolerance).map(|(m, _)| *m).collect()
    }

    pub fn residual(&self, mode: ExtensionMode) -> f64 {
        self.residuals.iter().find(|(m, _)| *m == mode).map(|(_, r)| *r).unwrap_or(f64::INFINITY)
    }
}

pub fn kernel_modes(ns: &[usize], pairs: usize, grid: &QuadratureGrid, seed: u64) -> Result<ModeComparison> {
    let mut worst = vec![0.0f64; ExtensionMode::ALL.len()];
    let sample_pairs = complex_pairs(pairs, seed);
    for &n in ns {
        for (z1, z2) in &sample_pairs {
            let q = kernel_quadrature(z1, z2, n, grid)?.matrix;
            for (i, mode) in ExtensionMode::ALL.iter().enumerate() {
                let closed = kernel_closed_candidate(z1, z2, n, *mode, expected_constant(n))?;
                worst[i] = worst[i].max(rel(&closed, &q));
            }
        }
    }
    Ok(ModeComparison {
        residuals: ExtensionMode::ALL.iter().copied().zip(worst).collect(),
        samples: pairs * ns.len(),
    })
}

/// Covariance defects of every `J` assignment over random `(g, Z1, Z2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceComparison {
    pub residuals: Vec<((Placement, ExtensionMode), f64)>,
    /// Samples on which the frozen assignment was the only one within tolerance.
    pub frozen_unique: usize,
    pub samples: usize,
}

impl CovarianceComparison {
    pub fn frozen_residual(&self) -> f64 {
        self.residuals
            .iter()
            .find(|(a, _)| *a == (COCYCLE_PLACEMENT, COCYCLE_MODE))
            .map(|(_, r)| *r)
            .unwrap_or(f64::INFINITY)
    }
}

pub fn kernel_covariance(ns: &[usize], samples: usize, tolerance: f64, grid: &QuadratureGrid, seed: u64) -> Result<CovarianceComparison> {
    let candidates: Vec<(Placement, ExtensionMode)> = Placement::ALL
        .iter()
        .flat_map(|&p| ExtensionMode::ALL.iter().map(move |&m| (p, m)))
        .collect();
    let mut worst = vec![0.0f64; candidates.len()];
    let mut frozen_unique = 0;
    let mut s = Sampler::new(seed);
    for k in 0..samples {
        let n = cycle(ns, k);
        let (z1, z2) = (s.tube_point(0.4, 0.5, 1.5), s.tube_point(0.4, 0.5, 1.5));
        let g = sample_element(&mut s);
        let before = kernel_quadrature(&z1, &z2, n, grid)?.matrix;
        let after = kernel_quadrature(&tube_act(&g, &z1)?, &tube_act(&g, &z2)?, n, grid)?.matrix;
        let mut passing = Vec::new();
        for (i, (placement, mode)) in candidates.iter().enumerate() {
            let d = covariance_defect(&g, &z1, &z2, n, &before, &after, *placement, *mode)?;
            worst[i] = worst[i].max(d);
            if d < tolerance {
                passing.push(candidates[i]);
            }
        }
        // at n = 0 the continuations coincide, so only the placement must be unique there
        let unique = if n == 0 {
            passing.iter().all(|(p, _)| *p == COCYCLE_PLACEMENT) && !passing.is_empty()
        } else {
            passing == [(COCYCLE_PLACEMENT, COCYCLE_MODE)]
        };
        frozen_unique += usize::from(unique);
    }
    Ok(CovarianceComparison {
        residuals: candidates.into_iter().zip(worst).collect(),
        frozen_unique,
        samples,
    })
}

// ---- extension ------------------------------------------------------------

/// `‖G(W₁′(g)K) − G(K)‖/‖G(K)‖` for random point sets and elements.
pub fn gram_invariance(ns: &[usize], elements: usize, points: usize, grid: &QuadratureGrid, seed: u64) -> Result<Measurement> {
    let mut s = Sampler::new(seed);
    let mut worst: f64 = 0.0;
    for k in 0..elements {
        let n = cycle(ns, k);
        let set: Vec<KernelPoint> = (0..points)
            .map(|_| KernelPoint::new(s.tube_point(0.4, 0.5, 1.5), s.complex_vector(n + 1)))
            .collect();
        let g = sample_element(&mut s);
        let moved = set.iter().map(|pt| w1_act(&g, pt, n)).collect::<Result<Vec<_>>>()?;
        let before = gram(&set, n, grid)?;
        worst = worst.max(rel(&gram(&moved, n, grid)?, &before));
    }
    Ok(Measurement::new(worst, elements))
}

/// `W₁′` of an embedded Poincaré element against `V₁′`, pointwise.
pub fn poincare_restriction(ns: &[usize], samples: usize, seed: u64) -> Result<Measurement> {
    let mut s = Sampler::new(seed);
    let mut worst: f64 = 0.0;
    for k in 0..samples {
        let n = cycle(ns, k);
        let pt = KernelPoint::new(s.tube_point(1.0, 0.5, 1.0), s.complex_vector(n + 1));
        let g = s.poincare(0.5, 1.0);
        let moved = w1_act(&ConformalElement::embed_poincare(&g), &pt, n)?.as_cone_function();
        let reference = canonical_v_act(&g, &pt.as_cone_function(), CanonicalVariant::V1, n)?;
        for _ in 0..10 {
            let p = s.cone_point(0.1, 3.0);
            let (a, b) = (moved.eval(&p)?, reference.eval(&p)?);
            worst = worst.max((&a - &b).norm() / (1.0 + b.norm()));
        }
    }
    Ok(Measurement::new(worst, samples * 10))
}

pub fn t_y_relation(ns: &[usize], samples: usize, seed: u64) -> Result<Measurement> {
    let mut s = Sampler::new(seed);
    let mut worst: f64 = 0.0;
    for k in 0..samples {
        let n = cycle(ns, k);
        let (g1, g2) = (sample_element(&mut s), sample_element(&mut s));
        let z = s.tube_point(1.0, 0.5, 1.0);
        let v = s.complex_vector(n + 1);
        worst = worst.max(t_y_relation_residual(&g1, &g2, &z, &v, n)?);
    }
    Ok(Measurement::new(worst, samples))
}

/// `T₀(g1g2) = T₀(g1)T₀(g2)` and `T₀` of a Poincaré element equals the
/// covariant action, both pointwise on a lattice bump.
pub fn t0_representation(ns: &[usize], samples: usize, seed: u64) -> Result<Measurement> {
    let mut s = Sampler::new(seed);
    let mut worst: f64 = 0.0;
    let special = |v: FourVector| ConformalElement::special_conformal(&pauli_embed(&v));
    for k in 0..samples {
        let n = cycle(ns, k);
        let f = TestFunction::Lattice(LatticeBump::new(FourVector::ZERO, [0.5; 4], 16, Profile::Hann, s.complex_vector(n + 1))?);
        let g1 = special(s.four_vector(0.02))?.compose(&ConformalElement::dilation(1.0 + s.uniform(-0.1, 0.1)));
        let g2 = special(s.four_vector(0.02))?.compose(&ConformalElement::embed_poincare(&s.poincare(0.2, 0.2)));
        let composed = conformal::t0_act(&g1.compose(&g2), &f, n)?;
        let stepwise = conformal::t0_act(&g1, &conformal::t0_act(&g2, &f, n)?, n)?;
        let g0 = s.poincare(0.3, 0.2);
        let via_t0 = conformal::t0_act(&ConformalElement::embed_poincare(&g0), &f, n)?;
        let covariant = crate::poincare::covariant_act(&g0, &f, SpinLabel::undotted(n))?;
        for _ in 0..10 {
            let x = s.four_vector(0.3);
            let a = composed.eval(&x)?;
            worst = worst.max((stepwise.eval(&x)? - &a).norm() / (1.0 + a.norm()));
            let b = covariant.eval(&x)?;
            worst = worst.max((via_t0.eval(&x)? - &b).norm() / (1.0 + b.norm()));
        }
    }
    Ok(Measurement::new(worst, samples * 10))
}

// ---- embedding ------------------------------------------------------------

/// Width of the packet in the `y → 0` study; the spectrum then sits at
/// momenta of order `1/width`.
pub const Y_LIMIT_WIDTH: f64 = 40.0;

/// `‖I_y f − [f̂]‖_{β₊}/‖[f̂]‖` along `y = 2^{−k}e0`, `k = 1..=steps`.
pub fn y_limit_ratios(n: usize, steps: u32, seed: u64) -> Result<Vec<f64>> {
    let mut s = Sampler::new(seed);
    let f = TestFunction::Gaussian(GaussianPacket::isotropic(
        FourVector::ZERO,
        Y_LIMIT_WIDTH,
        FourVector::ZERO,
        s.complex_vector(n + 1),
    )?);
    let grid = QuadratureGrid::build(32, 16, 16, RadialRule::Legendre { cutoff: 6.0 / Y_LIMIT_WIDTH })?;
    let spectrum = {
        let f = f.clone();
        ConeFunction::new(n + 1, move |p| f.spectrum(p.p()))
    };
    let target = FactorVector::new(spectrum, n, Sign::Plus)?;
    let scale = crate::conequad::factor_norm(&target, &grid)?;
    (1..=steps)
        .map(|k| {
            let y = FourVector::new(0.5f64.powi(k as i32), 0.0, 0.0, 0.0);
            Ok(conformal::embed_y(&f, &y, n, &grid)?.distance(&target, &grid)? / scale)
        })
        .collect()
}

/// Steps along the ladder where the ratio failed to decrease.
pub fn non_decreasing_steps(ratios: &[f64]) -> usize {
    ratios.windows(2).filter(|w| w[1] >= w[0]).count()
}

/// The lattice Gaussian against the closed-form packet, through `I_y` at `y = e0/2`.
pub fn lattice_packet_agreement(ns: &[usize], seed: u64) -> Result<Measurement> {
    let mut s = Sampler::new(seed);
    let grid = QuadratureGrid::build(24, 12, 12, RadialRule::Legendre { cutoff: 40.0 })?;
    let y = FourVector::new(0.5, 0.0, 0.0, 0.0);
    let mut worst: f64 = 0.0;
    for &n in ns {
        let pol = s.complex_vector(n + 1);
        let center = FourVector::new(0.2, -0.1, 0.05, 0.3);
        let lattice = TestFunction::Lattice(LatticeBump::new(center, [0.8; 4], 32, Profile::Gaussian { sigma: 0.1 }, pol.clone())?);
        let packet = TestFunction::Gaussian(GaussianPacket::isotropic(center, 0.1, FourVector::ZERO, pol)?);
        let a = conformal::embed_y(&lattice, &y, n, &grid)?;
        let b = conformal::embed_y(&packet, &y, n, &grid)?;
        worst = worst.max(a.distance(&b, &grid)? / crate::conequad::factor_norm(&b, &grid)?);
    }
    Ok(Measurement::new(worst, ns.len()))
}

fn structure_grid() -> Result<QuadratureGrid> {
    QuadratureGrid::build(32, 32, 32, RadialRule::Legendre { cutoff: 8.0 })
}

fn embedding_packet(s: &mut Sampler, n: usize) -> Result<TestFunction> {
    let center = s.four_vector(0.3);
    let momentum = s.four_vector(0.3);
    Ok(TestFunction::Gaussian(GaussianPacket::isotropic(center, 1.0, momentum, s.complex_vector(n + 1))?))
}

/// Fermi degrees: `Γ² = 1`, `⟨Γa, Γb⟩ = ⟨b, a⟩`, `ΓI_n f = I_n f` and `Γ`
/// commutes with `V_n`.
pub fn gamma_structure(ns: &[usize], seed: u64) -> Result<Measurement> {
    let mut s = Sampler::new(seed);
    let grid = structure_grid()?;
    let mut worst: f64 = 0.0;
    for &n in ns {
        let (a, b) = (embed_in(&embedding_packet(&mut s, n)?, n)?, embed_in(&embedding_packet(&mut s, n)?, n)?);
        let na = a.norm(&grid)?;
        let twice = gamma_n(&gamma_n(&a)?)?;
        worst = worst.max(twice.sub(&a)?.norm(&grid)? / na);
        let lhs = gamma_n(&a)?.inner(&gamma_n(&b)?, &grid)?;
        let rhs = b.inner(&a, &grid)?;
        worst = worst.max((lhs - rhs).norm() / (na * b.norm(&grid)?));
        worst = worst.max(gamma_n(&a)?.sub(&a)?.norm(&grid)? / na);
        let g = s.poincare(0.3, 1.0);
        let d = gamma_n(&a.poincare_act(&g)?)?.sub(&gamma_n(&a)?.poincare_act(&g)?)?;
        worst = worst.max(d.norm(&grid)? / na);
    }
    Ok(Measurement::new(worst, ns.len()))
}

/// Bose degrees: `σ_n` is antisymmetric and `V_n`-invariant.
pub fn sigma_structure(ns: &[usize], seed: u64) -> Result<Measurement> {
    let mut s = Sampler::new(seed);
    let grid = structure_grid()?;
    let mut worst: f64 = 0.0;
    for &n in ns {
        let (a, b) = (embed_in(&embedding_packet(&mut s, n)?, n)?, embed_in(&embedding_packet(&mut s, n)?, n)?);
        let scale = a.norm(&grid)? * b.norm(&grid)?;
        let ab = sigma_n(&a, &b, &grid)?;
        worst = worst.max((ab + sigma_n(&b, &a, &grid)?).abs() / scale);
        worst = worst.max(sigma_n(&a, &a, &grid)?.abs() / a.norm(&grid)?.powi(2));
        let g = s.poincare(0.15, 1.0);
        let moved = sigma_n(&a.poincare_act(&g)?, &b.poincare_act(&g)?, &grid)?;
        worst = worst.max((moved - ab).abs() / scale);
    }
    Ok(Measurement::new(worst, ns.len()))
}

// ---- net-axioms -----------------------------------------------------------

/// Entry of the intertwiner catalog.
#[derive(Debug, Clone)]
pub struct CatalogElement {
    pub name: &'static str,
    pub family: &'static str,
    pub element: ConformalElement,
}

/// Four translations, four Lorentz elements, two dilations and two small
/// special conformal elements.
pub fn element_catalog(families: &[String]) -> Vec<CatalogElement> {
    let lorentz = |spin: ComplexMatrix2| ConformalElement::embed_poincare(&PoincareElement::lorentz(spin).expect("unimodular"));
    let translation = |a: FourVector| ConformalElement::embed_poincare(&PoincareElement::translation(a));
    let special = |v: FourVector| ConformalElement::special_conformal(&pauli_embed(&v)).expect("hermitian");
    let (ch, sh) = (0.15f64.cosh(), 0.15f64.sinh());
    let rotation = |theta: f64, axis: usize| {
        let (cs, sn) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let i = Complex64::new(0.0, 1.0);
        match axis {
            3 => mat2(Complex64::from_polar(1.0, -theta / 2.0), c(0.0), c(0.0), Complex64::from_polar(1.0, theta / 2.0)),
            _ => mat2(c(cs), -i * sn, -i * sn, c(cs)),
        }
    };
    let all = vec![
        CatalogElement { name: "translation-t", family: "translations", element: translation(FourVector::new(0.7, 0.0, 0.0, 0.0)) },
        CatalogElement { name: "translation-x", family: "translations", element: translation(FourVector::new(0.0, 0.5, 0.0, 0.0)) },
        CatalogElement { name: "translation-lightlike", family: "translations", element: translation(FourVector::new(0.4, 0.0, 0.0, 0.4)) },
        CatalogElement { name: "translation-mixed", family: "translations", element: translation(FourVector::new(-0.3, 0.2, 0.6, -0.1)) },
        CatalogElement { name: "boost-z", family: "lorentz", element: lorentz(mat2(c(ch + sh), c(0.0), c(0.0), c(ch - sh))) },
        CatalogElement { name: "boost-x", family: "lorentz", element: lorentz(mat2(c(ch), c(sh), c(sh), c(ch))) },
        CatalogElement { name: "rotation-z", family: "lorentz", element: lorentz(rotation(0.9, 3)) },
        CatalogElement { name: "rotation-x", family: "lorentz", element: lorentz(rotation(-0.6, 1)) },
        CatalogElement { name: "dilation-up", family: "dilations", element: ConformalElement::dilation(1.2) },
        CatalogElement { name: "dilation-down", family: "dilations", element: ConformalElement::dilation(0.85) },
        CatalogElement { name: "special-a", family: "special", element: special(FourVector::new(0.003, -0.002, 0.001, 0.004)) },
        CatalogElement { name: "special-b", family: "special", element: special(FourVector::new(-0.004, 0.003, 0.002, -0.001)) },
    ];
    all.into_iter().filter(|e| families.iter().any(|f| f == e.family)).collect()
}

/// Packet catalog by name: unit-width packets centered at the origin,
/// displaced with momentum, and anisotropic.
pub fn packet_catalog(names: &[String], n: usize, seed: u64) -> Result<Vec<(String, TestFunction)>> {
    let mut s = Sampler::new(seed ^ (n as u64).wrapping_mul(0x9e37_79b9));
    names
        .iter()
        .map(|name| {
            let pol = s.complex_vector(n + 1);
            let packet = match name.as_str() {
                "centered" => GaussianPacket::isotropic(FourVector::ZERO, 1.0, FourVector::ZERO, pol)?,
                "offset" => GaussianPacket::isotropic(
                    FourVector::new(0.2, -0.3, 0.1, 0.25),
                    1.0,
                    FourVector::new(0.3, 0.1, 0.0, -0.2),
                    pol,
                )?,
                "squeezed" => {
                    let mut p = GaussianPacket::isotropic(FourVector::new(-0.1, 0.0, 0.2, 0.0), 1.0, FourVector::new(0.2, 0.0, 0.15, 0.1), pol)?;
                    p.quadratic = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0 / 0.81, 1.0 / 1.21, 1.0, 1.0 / 1.44));
                    p
                }
                other => return Err(Error::Config(format!("unknown packet {other:?}"))),
            };
            Ok((name.clone(), TestFunction::Gaussian(packet)))
        })
        .collect()
}

/// Grid for the intertwiner catalog: the unit packets' spectra are below
/// `e^{−10}` beyond this cutoff.
pub fn intertwiner_grid() -> Result<QuadratureGrid> {
    QuadratureGrid::build(10, 8, 8, RadialRule::Legendre { cutoff: 4.5 })
}

/// Worst intertwiner residual over catalog elements, degrees and packets.
pub fn intertwiner_catalog(elements: &[CatalogElement], packets: &[String], ns: &[usize], seed: u64) -> Result<Measurement> {
    let grid = intertwiner_grid()?;
    let mut cases = Vec::new();
    for &n in ns {
        for (_, f) in packet_catalog(packets, n, seed)? {
            for e in elements {
                cases.push((e.element, f.clone(), n));
            }
        }
    }
    let outcomes = cases
        .par_iter()
        .map(|(g, f, n)| intertwiner_check(&Symmetry::Conformal(*g), f, *n, &grid))
        .collect::<Result<Vec<_>>>()?;
    let worst = outcomes.iter().map(|o| o.residual).fold(0.0, f64::max);
    let defect = outcomes.iter().map(|o| o.norm_defect).fold(0.0, f64::max);
    Ok(Measurement::new(worst, cases.len()).with("max_norm_defect", defect))
}

/// Sample points where `T₀(g)f` is nonzero outside `g·supp f`.
pub fn support_containment(elements: &[CatalogElement], samples: usize, seed: u64) -> Result<Measurement> {
    let mut s = Sampler::new(seed);
    let mut violations = 0;
    for e in elements {
        let bump = LatticeBump::new(FourVector::new(0.2, 0.0, 0.1, 0.0), [0.5; 4], 16, Profile::Hann, s.complex_vector(2))?;
        violations += support_violations(&e.element, &bump, samples, seed)?;
    }
    Ok(Measurement::new(violations as f64, samples * elements.len()))
}

/// Catalog elements that fail to map the unit double cone regularly.
pub fn region_regularity(elements: &[CatalogElement]) -> Result<Measurement> {
    let region = Region::double_cone(FourVector::new(0.2, 0.0, 0.1, 0.0), 1.0)?;
    let irregular = elements
        .iter()
        .filter(|e| !region_transform(&Symmetry::Conformal(e.element), &region).regular)
        .count();
    Ok(Measurement::new(irregular as f64, elements.len()))
}

/// Grid for the causality pairs; the bumps resolve momenta up to about 50.
pub fn causality_grid() -> Result<QuadratureGrid> {
    QuadratureGrid::build(48, 48, 8, RadialRule::Legendre { cutoff: 30.0 })
}

/// Centers of the second bump in each matched pair, the first sitting at the
/// origin: spacelike ones outside the light cone, timelike ones straddling it.
pub const SPACELIKE_OFFSETS: [[f64; 4]; 3] = [[0.0, 0.0, 0.0, 3.0], [0.5, 0.0, 0.0, 3.5], [-1.0, 0.0, 0.0, 4.0]];
pub const TIMELIKE_OFFSETS: [[f64; 4]; 3] = [[3.0, 0.0, 0.0, 2.5], [2.4, 0.0, 0.0, 2.0], [-3.5, 0.0, 0.0, 3.0]];

/// Residuals of the three matched pairs, as `(spacelike, timelike)`.
pub fn causality_pairs(n: usize, grid: &QuadratureGrid, seed: u64) -> Result<Vec<(f64, f64)>> {
    let mut s = Sampler::new(seed ^ (n as u64 + 1));
    let bump = |center: FourVector, pol: CVector| -> Result<TestFunction> {
        Ok(TestFunction::Lattice(LatticeBump::new(center, [0.5; 4], 16, Profile::Hann, pol)?))
    };
    SPACELIKE_OFFSETS
        .iter()
        .zip(TIMELIKE_OFFSETS.iter())
        .map(|(sp, tl)| {
            let f = bump(FourVector::ZERO, s.complex_vector(n + 1))?;
            let space = bump(FourVector(*sp), s.complex_vector(n + 1))?;
            let time = bump(FourVector(*tl), s.complex_vector(n + 1))?;
            Ok((causality_check(&f, &space, n, grid)?, causality_check(&f, &time, n, grid)?))
        })
        .collect()
}

// ---- driver ---------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum Tolerance {
    /// Scaled by the configured tolerance factors.
    Scaled(f64),
    /// Counts and ratio bounds keep their meaning under scaling.
    Fixed(f64),
}

struct Runner<'a> {
    suite: &'static str,
    config: &'a SuiteConfig,
    records: Vec<ReportRecord>,
    /// Time spent on work shared by the following checks, charged to the next one.
    shared_s: f64,
}

impl Runner<'_> {
    fn shared<T>(&mut self, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let value = f();
        self.shared_s += start.elapsed().as_secs_f64();
        value
    }

    fn check(&mut self, check: &str, anchor: &str, tolerance: Tolerance, f: impl FnOnce() -> Result<Measurement>) {
        let tol = match tolerance {
            Tolerance::Scaled(t) => t * self.config.tolerance_factor(self.suite),
            Tolerance::Fixed(t) => t,
        };
        let start = Instant::now();
        let mut record = match f() {
            Ok(m) => {
                let mut r = ReportRecord::new(self.suite, check, anchor, m.samples, m.residual, tol);
                for (k, v) in m.constants {
                    r = r.with_constant(&k, v);
                }
                r
            }
            Err(e) => {
                let mut r = ReportRecord::new(self.suite, check, anchor, 0, f64::NAN, tol);
                r.note = Some(e.to_string());
                r
            }
        };
        if self.config.record_timings {
            record.wall_time_s = Some(start.elapsed().as_secs_f64() + self.shared_s);
        }
        self.shared_s = 0.0;
        self.records.push(record);
    }
}

fn degrees(config: &SuiteConfig, natural: &[usize]) -> Vec<usize> {
    config.n_range.within(natural)
}

pub fn default_grid(config: &SuiteConfig) -> Result<QuadratureGrid> {
    build_grid(config.radial_order, config.angular_order, config.radial_scale)
}

/// Runs one registered suite.
pub fn run_suite(name: &str, config: &SuiteConfig) -> Result<Vec<ReportRecord>> {
    let suite = SUITES
        .iter()
        .copied()
        .find(|s| *s == name)
        .ok_or_else(|| Error::UnknownSuite(name.into()))?;
    config.validate()?;
    let grid = default_grid(config)?;
    let seed = config.seed;
    let n = |natural: &[usize]| degrees(config, natural);
    let mut r = Runner { suite, config, records: Vec::new(), shared_s: 0.0 };
    match suite {
        "spin" => {
            let ns = n(&[0, 1, 2, 3, 4]);
            if !ns.is_empty() {
                let count = config.samples(500);
                r.check("sym-power-multiplicative", "symmetric powers form a representation", Tolerance::Scaled(1e-10), || {
                    sym_power_multiplicativity(&ns, count, seed)
                });
                r.check("rep-d-multiplicative", "the spinor representations D(j/2,k/2) are multiplicative", Tolerance::Scaled(1e-10), || {
                    rep_d_multiplicativity(&ns, count, seed + 1)
                });
                r.check("beta-covariance", "the weights beta are Lorentz covariant", Tolerance::Scaled(1e-10), || {
                    beta_covariance(&ns, count, seed + 2)
                });
            }
        }
        "poincare" => {
            let count = config.samples(500);
            r.check("boost-section", "the boost section maps the reference momentum to p", Tolerance::Scaled(1e-10), || {
                boost_section_identities(count, seed)
            });
            r.check("reference-boost", "the boost section is minus the identity at the reference momentum", Tolerance::Scaled(1e-15), reference_boost_residual);
            r.check("little-group", "the little-group factor lies in E(2)", Tolerance::Scaled(1e-9), || {
                little_group_membership(count, seed + 1)
            });
            r.check("phase-cocycle", "the Wigner phase is a cocycle", Tolerance::Scaled(1e-9), || phase_cocycle(count, seed + 2));
        }
        "factor" => {
            r.check("reference-integrals", "reference integrals of the invariant cone measure", Tolerance::Scaled(1e-8), || {
                reference_integrals(&grid)
            });
            let ns = n(&[1, 2, 3]);
            if !ns.is_empty() {
                r.check("phi-plus-isometry", "Phi+ is isometric onto the helicity factor space", Tolerance::Scaled(1e-8), || {
                    phi_plus_isometry(&ns, &grid)
                });
                r.check("phi-plus-intertwining", "Phi+ intertwines the Wigner and canonical representations", Tolerance::Scaled(1e-8), || {
                    phi_plus_intertwining(&ns, &grid, seed)
                });
                let top = *ns.last().expect("nonempty");
                r.check("range-summand-not-invariant", "the range summand is not invariant under boosts", Tolerance::Fixed(1.0), || {
                    let m = range_summand_witness(top, &grid)?;
                    let witness = m.residual;
                    Ok(Measurement::new(1e-3 / witness, m.samples).with("witness", witness))
                });
                r.check("null-summand-invariant", "null vectors stay null under the canonical representation", Tolerance::Scaled(1e-9), || {
                    null_summand_invariance(top, &grid, seed)
                });
            }
        }
        "conformal-cocycle" => {
            let ns = n(&[0, 1, 2, 3, 4]);
            if !ns.is_empty() {
                let count = config.samples(200);
                for mode in ExtensionMode::ALL {
                    r.check(&format!("cocycle-{}", mode.name()), "J is a cocycle on the tube", Tolerance::Scaled(1e-9), || {
                        cocycle_law(mode, &ns, count, seed)
                    });
                }
                r.check("tau-unitary", "tau is unitary on the maximal compact subgroup", Tolerance::Scaled(1e-10), || {
                    tau_unitarity(&ns, config.samples(100), seed + 1)
                });
            }
            r.check("su22-closure", "products and inverses stay in SU(2,2)", Tolerance::Scaled(1e-10), || {
                su22_closure(config.samples(200), seed + 2)
            });
        }
        "kernel" => kernel_suite(&mut r, &grid, &n(&[0, 1, 2]), seed),
        "extension" => {
            let ns = n(&[0, 1, 2]);
            if !ns.is_empty() {
                r.check("gram-invariance", "the extended representation preserves kernel Gram matrices", Tolerance::Scaled(1e-5), || {
                    gram_invariance(&ns, config.samples(20), 8, &grid, seed)
                });
                r.check("poincare-restriction", "the extended representation restricts to the canonical one", Tolerance::Scaled(1e-8), || {
                    poincare_restriction(&ns, config.samples(20), seed + 1)
                });
                r.check("t-y-relation", "the regularized actions compose along y", Tolerance::Scaled(1e-9), || {
                    t_y_relation(&ns, config.samples(20), seed + 2)
                });
                r.check("t0-representation", "T0 is a representation extending the covariant one", Tolerance::Scaled(1e-10), || {
                    t0_representation(&ns, config.samples(10), seed + 3)
                });
            }
        }
        "embedding" => {
            for m in n(&[0, 1, 2]) {
                let ratios = r.shared(|| y_limit_ratios(m, 10, seed + m as u64));
                r.check(&format!("y-limit-monotone-n{m}"), "the y-embedding converges as y tends to zero", Tolerance::Fixed(0.0), || {
                    let ratios = ratios.clone()?;
                    Ok(Measurement::new(non_decreasing_steps(&ratios) as f64, ratios.len()))
                });
                r.check(&format!("y-limit-final-n{m}"), "the y-embedding converges as y tends to zero", Tolerance::Scaled(1e-4), || {
                    let ratios = ratios?;
                    Ok(Measurement::new(*ratios.last().unwrap_or(&f64::NAN), ratios.len()))
                });
            }
            let ns = n(&[0, 1, 2]);
            if !ns.is_empty() {
                r.check("lattice-packet", "lattice and closed-form Gaussians embed alike", Tolerance::Scaled(1e-5), || {
                    lattice_packet_agreement(&ns, seed)
                });
            }
            let odd = n(&[1, 3]);
            if !odd.is_empty() {
                r.check("gamma-structure", "Gamma is an antiunitary involution commuting with V_n", Tolerance::Scaled(1e-8), || {
                    gamma_structure(&odd, seed)
                });
            }
            let even = n(&[0, 2]);
            if !even.is_empty() {
                r.check("sigma-structure", "sigma_n is antisymmetric and invariant", Tolerance::Scaled(1e-8), || {
                    sigma_structure(&even, seed)
                });
            }
        }
        "net-axioms" => {
            let elements = element_catalog(&config.elements);
            let ns = n(&[0, 1, 2]);
            for family in crate::config::ELEMENT_FAMILIES {
                let members: Vec<_> = elements.iter().filter(|e| e.family == family).cloned().collect();
                if members.is_empty() || ns.is_empty() || config.packets.is_empty() {
                    continue;
                }
                r.check(&format!("intertwiner-{family}"), "the nets are covariant under the conformal group", Tolerance::Scaled(1e-6), || {
                    intertwiner_catalog(&members, &config.packets, &ns, seed)
                });
            }
            if !elements.is_empty() {
                r.check("support-containment", "T0(g) maps supports onto their images", Tolerance::Fixed(0.0), || {
                    support_containment(&elements, config.samples(1000), seed)
                });
                r.check("region-regularity", "catalog elements map the test region regularly", Tolerance::Fixed(0.0), || {
                    region_regularity(&elements)
                });
            }
            let ns = n(&[0, 1, 2]);
            if !ns.is_empty() {
                let cgrid = causality_grid();
                for m in ns {
                    let pairs = r.shared(|| cgrid.clone().and_then(|g| causality_pairs(m, &g, seed)));
                    let kind = if m % 2 == 0 { "commutator" } else { "anticommutator" };
                    r.check(&format!("causality-spacelike-n{m}"), "spacelike separated fields commute or anticommute", Tolerance::Scaled(1e-3), || {
                        let pairs = pairs.clone()?;
                        let worst = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
                        Ok(Measurement::new(worst, pairs.len()).with(kind, 1.0))
                    });
                    r.check(&format!("causality-contrast-n{m}"), "spacelike residuals are small against timelike ones", Tolerance::Fixed(0.1), || {
                        let pairs = pairs?;
                        let worst = pairs.iter().map(|(sp, tl)| sp / tl).fold(0.0, f64::max);
                        let weakest = pairs.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
                        Ok(Measurement::new(worst, pairs.len()).with("min_timelike", weakest))
                    });
                }
            }
        }
        "convergence" => {
            for id in INTEGRALS {
                let rows = r.shared(|| convergence_study(id, &config.ladder, config.angular_order));
                r.check(&format!("{id}-monotone"), "quadrature errors decay along the order ladder", Tolerance::Fixed(0.0), || {
                    let rows = rows.clone()?;
                    Ok(Measurement::new(monotonicity_violations(&rows) as f64, rows.len()))
                });
                let base = if id == "kernel-diagonal-n2" { 1e-6 } else { 1e-8 };
                r.check(&format!("{id}-default-order"), "quadrature error at the configured order", Tolerance::Scaled(base), || {
                    let row = convergence_study(id, &[config.radial_order], config.angular_order)?;
                    let value = row[0].value;
                    Ok(Measurement::new(row[0].exact_error.unwrap_or(f64::NAN), 1).with("value", value))
                });
            }
        }
        _ => unreachable!("registered suite"),
    }
    Ok(r.records)
}

fn kernel_suite(r: &mut Runner, grid: &QuadratureGrid, ns: &[usize], seed: u64) {
    if ns.is_empty() {
        return;
    }
    let config = r.config;
    r.check("laplace-identity", "Laplace transform of beta+ over the forward cone", Tolerance::Scaled(1e-6), || {
        laplace_identity(ns, grid, seed)
    });
    let low: Vec<usize> = ns.iter().copied().filter(|&n| n <= 1).collect();
    if !low.is_empty() {
        r.check("fitted-constants", "C_0 = C_1 = 2 pi under d3p/(2p0)", Tolerance::Scaled(1e-6), || {
            fitted_constants(&low, grid, seed)
        });
    }
    let pairs = config.samples(20);
    r.check("hermitian-symmetry", "the reference kernel is Hermitian symmetric", Tolerance::Scaled(1e-8), || {
        kernel_hermitian_symmetry(ns, pairs, grid, seed)
    });
    r.check("diagonal-psd", "the reference kernel is positive on the diagonal", Tolerance::Scaled(1e-9), || {
        kernel_diagonal_psd(ns, pairs, grid, seed + 1)
    });
    let modes = r.shared(|| kernel_modes(ns, pairs, grid, seed + 2));
    let tol = 1e-6 * config.tolerance_factor("kernel");
    r.check("closed-form-calibrated-mode", "the closed-form kernel in the calibrated continuation", Tolerance::Scaled(1e-6), || {
        let m = modes.clone()?;
        let mut out = Measurement::new(m.residual(KERNEL_MODE), m.samples);
        for (mode, res) in &m.residuals {
            out = out.with(format!("residual_{}", mode.name()), *res);
        }
        Ok(out)
    });
    // at n = 0 every continuation is the scalar determinant, so uniqueness needs n > 0
    if ns.iter().any(|&n| n > 0) {
        r.check("closed-form-mode-unique", "exactly one continuation reproduces the kernel", Tolerance::Fixed(0.0), || {
            let m = modes?;
            let others = m.matching(tol).iter().filter(|&&mode| mode != KERNEL_MODE).count();
            Ok(Measurement::new(others as f64, m.samples))
        });
    }
    let count = config.samples(100);
    let cov = r.shared(|| kernel_covariance(ns, count, tol, grid, seed + 3));
    r.check("covariance", "the kernel is covariant with the calibrated J assignment", Tolerance::Scaled(1e-6), || {
        let c = cov.clone()?;
        let mut out = Measurement::new(c.frozen_residual(), c.samples);
        for ((placement, mode), res) in &c.residuals {
            out = out.with(format!("residual_{}_{}", placement_name(*placement), mode.name()), *res);
        }
        Ok(out)
    });
    r.check("covariance-assignment-fixed", "the calibrated J assignment is the same on every sample", Tolerance::Fixed(0.0), || {
        let c = cov?;
        Ok(Measurement::new((c.samples - c.frozen_unique) as f64, c.samples))
    });
}

fn placement_name(p: Placement) -> &'static str {
    match p {
        Placement::Outer => "outer",
        Placement::Swapped => "swapped",
    }
}

/// Calibration on the configured grid for the configured degrees.
pub fn run_calibration(config: &SuiteConfig) -> Result<CalibrationRecord> {
    let grid = default_grid(config)?;
    let ns: Vec<usize> = config.n_range.iter().collect();
    calibrate(&ns, CALIBRATION_PAIRS, &grid, config.seed)
}

/// Runs suites in parallel and assembles one report with the calibration
/// record attached; a failed calibration becomes a failing record.
pub fn run(names: &[&str], config: &SuiteConfig) -> Result<Report> {
    config.validate()?;
    for name in names {
        if !SUITES.contains(name) {
            return Err(Error::UnknownSuite(name.to_string()));
        }
    }
    let grid = default_grid(config)?;
    let calibration = run_calibration(config);
    let results: Vec<Result<Vec<ReportRecord>>> = names.par_iter().map(|name| run_suite(name, config)).collect();
    let mut records = Vec::new();
    let calibration = match calibration {
        Ok(c) => Some(c),
        Err(e) => {
            let mut r = ReportRecord::new("calibration", "protocol", "unique calibrated continuation and J assignment", 0, f64::NAN, 0.0);
            r.note = Some(e.to_string());
            records.push(r);
            None
        }
    };
    for result in results {
        records.extend(result?);
    }
    Ok(Report::new(config.seed, *grid.descriptor(), calibration, records))
}

/// The `calibrate` command: the protocol plus one record per fitted constant.
pub fn calibration_report(config: &SuiteConfig) -> Result<Report> {
    config.validate()?;
    let grid = default_grid(config)?;
    let mut records = Vec::new();
    let tol = 1e-6 * config.tolerance_factor("kernel");
    let calibration = match run_calibration(config) {
        Ok(c) => {
            for fit in &c.constants {
                let residual = (fit.value / expected_constant(fit.n) - 1.0).abs();
                records.push(
                    ReportRecord::new("calibration", &format!("C_{}", fit.n), "C_n = 2 pi n! under d3p/(2p0)", fit.samples, residual, tol)
                        .with_constant(&format!("C_{}", fit.n), fit.value)
                        .with_constant("fit_residual", fit.residual),
                );
            }
            Some(c)
        }
        Err(e) => {
            let mut r = ReportRecord::new("calibration", "protocol", "unique calibrated continuation and J assignment", 0, f64::NAN, 0.0);
            r.note = Some(e.to_string());
            records.push(r);
            None
        }
    };
    Ok(Report::new(config.seed, *grid.descriptor(), calibration, records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::NRange;

    fn quick() -> SuiteConfig {
        SuiteConfig {
            sample_scale: 0.05,
            radial_order: 24,
            angular_order: 16,
            ..SuiteConfig::default()
        }
    }

    #[test]
    fn registry_rejects_unknown_names() {
        assert!(matches!(run_suite("nope", &quick()), Err(Error::UnknownSuite(_))));
        let bad = SuiteConfig { radial_order: 1, ..quick() };
        assert!(matches!(run_suite("spin", &bad), Err(Error::Config(_))));
    }

    #[test]
    fn spin_suite_is_deterministic_and_strict_tolerance_fails() {
        let a = run_suite("spin", &quick()).unwrap();
        assert_eq!(a, run_suite("spin", &quick()).unwrap());
        assert!(a.iter().all(|r| r.passed), "{a:?}");
        let strict = SuiteConfig { tol_scale: 0.0, ..quick() };
        assert!(run_suite("spin", &strict).unwrap().iter().any(|r| !r.passed));
    }

    #[test]
    fn degree_filter_can_empty_a_suite() {
        let only_six = SuiteConfig { n_range: NRange::single(6).unwrap(), ..quick() };
        assert!(run_suite("spin", &only_six).unwrap().is_empty());
    }

    #[test]
    fn catalogs() {
        let all = crate::config::SuiteConfig::default();
        let elements = element_catalog(&all.elements);
        assert_eq!(elements.len(), 12);
        assert!(elements.iter().all(|e| e.element.residual() < 1e-12));
        assert_eq!(element_catalog(&["dilations".into()]).len(), 2);
        assert_eq!(packet_catalog(&all.packets, 1, 7).unwrap().len(), 3);
        assert!(packet_catalog(&["nope".into()], 1, 7).is_err());
    }

    #[test]
    fn y_ladder_helpers() {
        assert_eq!(non_decreasing_steps(&[3.0, 2.0, 1.0]), 0);
        assert_eq!(non_decreasing_steps(&[3.0, 3.0, 1.0]), 1);
        assert_eq!(non_decreasing_steps(&[]), 0);
    }
}
