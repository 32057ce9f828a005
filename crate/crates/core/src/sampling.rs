//! Seeded random group elements, cone points and tube points.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::conformal::{ConformalElement, TubePoint};
use crate::poincare::{MomentumOnCone, PoincareElement};
use crate::spinalg::{c, mat2, pauli_embed, ComplexMatrix2, FourVector};

/// `exp(M)` for traceless 2×2 `M`, via `exp(M) = cosh(s)·1 + sinh(s)/s·M`, `s² = −det M`.
pub fn exp_traceless(m: &ComplexMatrix2) -> ComplexMatrix2 {
    let s = (-m.determinant()).sqrt();
    let sinhc = if s.norm() < 1e-8 { c(1.0) + s * s / 6.0 } else { s.sinh() / s };
    ComplexMatrix2::identity() * s.cosh() + m * sinhc
}

#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn complex(&mut self) -> Complex64 {
        Complex64::new(self.normal(), self.normal())
    }

    pub fn complex_vector(&mut self, dim: usize) -> crate::spinalg::CVector {
        crate::spinalg::CVector::from_fn(dim, |_, _| self.complex())
    }

    /// `exp` of a random traceless matrix with Gaussian entries of size `scale`.
    pub fn sl2c(&mut self, scale: f64) -> ComplexMatrix2 {
        let a = self.complex() * scale;
        let b = self.complex() * scale;
        let d = self.complex() * scale;
        exp_traceless(&mat2(a, b, d, -a))
    }

    /// Random element of SU(2).
    pub fn su2(&mut self) -> ComplexMatrix2 {
        let q: [f64; 4] = std::array::from_fn(|_| self.normal());
        let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        let (a, b) = (Complex64::new(q[0], q[1]) / n, Complex64::new(q[2], q[3]) / n);
        mat2(a, -b.conj(), b, a.conj())
    }

    /// Uniform direction and uniform radius in `[r_min, r_max]`, kept off the
    /// singular ray.
    pub fn cone_point(&mut self, r_min: f64, r_max: f64) -> MomentumOnCone {
        loop {
            let v: [f64; 3] = std::array::from_fn(|_| self.normal());
            let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            if n < 1e-6 || v[2] / n < -1.0 + 1e-4 {
                continue;
            }
            let r = self.uniform(r_min, r_max);
            let omega = [v[0] / n, v[1] / n, v[2] / n];
            if let Ok(p) = MomentumOnCone::from_polar(r, omega) {
                return p;
            }
        }
    }

    pub fn four_vector(&mut self, scale: f64) -> FourVector {
        FourVector(std::array::from_fn(|_| scale * self.normal()))
    }

    /// A vector in the open forward cone with `y0 − |y⃗| ≥ margin`.
    pub fn forward_timelike(&mut self, spatial: f64, margin: f64) -> FourVector {
        let v = self.four_vector(spatial);
        let r = v.spatial_norm();
        FourVector::new(r + margin + self.uniform(0.0, 1.0), v[1], v[2], v[3])
    }

    pub fn poincare(&mut self, spin_scale: f64, translation_scale: f64) -> PoincareElement {
        PoincareElement {
            spin: self.sl2c(spin_scale),
            translation: self.four_vector(translation_scale),
        }
    }

    pub fn hermitian(&mut self, scale: f64) -> ComplexMatrix2 {
        pauli_embed(&self.four_vector(scale))
    }

    /// Hermitian positive definite with eigenvalues roughly in `[lo, lo + spread]`.
    pub fn positive_definite(&mut self, lo: f64, spread: f64) -> ComplexMatrix2 {
        let u = self.su2();
        let e1 = lo + spread * self.uniform(0.0, 1.0);
        let e2 = lo + spread * self.uniform(0.0, 1.0);
        u * mat2(c(e1), c(0.0), c(0.0), c(e2)) * u.adjoint()
    }

    pub fn tube_point(&mut self, x_scale: f64, y_lo: f64, y_spread: f64) -> TubePoint {
        let x = self.hermitian(x_scale);
        let y = self.positive_definite(y_lo, y_spread);
        TubePoint::new(x, y).expect("sampled imaginary part is positive definite")
    }

    /// An element of the maximal compact subgroup fixing `i·1`.
    pub fn k0(&mut self) -> ConformalElement {
        let phase = Complex64::from_polar(1.0, self.uniform(0.0, std::f64::consts::TAU));
        let u = self.su2() * phase;
        let v = self.su2() * phase.conj();
        let i = Complex64::new(0.0, 1.0);
        let a = (u + v) * c(0.5);
        let b = (u - v) / (i * 2.0);
        ConformalElement::from_blocks(&a, &b, &-b, &a).expect("K0 sample lies in SU(2,2)")
    }

    /// Poincaré element, dilation and special conformal factor, multiplied.
    pub fn su22(&mut self, spin_scale: f64, translation_scale: f64, log_dilation: f64, special_scale: f64) -> ConformalElement {
        let g = self.poincare(spin_scale, translation_scale);
        let lambda = (log_dilation * self.normal()).exp();
        let special = self.hermitian(special_scale);
        ConformalElement::embed_poincare(&g)
            .compose(&ConformalElement::dilation(lambda))
            .compose(&ConformalElement::special_conformal(&special).expect("hermitian"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_are_reproducible_and_unimodular() {
        let mut a = Sampler::new(1);
        let mut b = Sampler::new(1);
        for _ in 0..50 {
            let (x, y) = (a.sl2c(1.0), b.sl2c(1.0));
            assert_eq!(x, y);
            assert!((x.determinant() - c(1.0)).norm() < 1e-12);
            let u = a.su2();
            b.su2();
            assert!((u * u.adjoint() - ComplexMatrix2::identity()).norm() < 1e-14);
        }
        let z = mat2(c(0.0), c(1e-10), c(0.0), c(0.0));
        assert!((exp_traceless(&z) - ComplexMatrix2::identity() - z).norm() < 1e-20);
    }
}
