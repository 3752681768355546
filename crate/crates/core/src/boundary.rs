//! Boundary forms: `σ_q`-covariant functions `f: K → Λ^q C^{n-1}` with
//! `f(km) = σ_q(m^{-1}) f(k)`, stored through their values on the section `b ↦ s(b)`.

use crate::error::{Error, Result};
use crate::exterior::{binom, check_rotation, compound, embed_matrix, PForm};
use crate::lorentz::{m_part, section_unchecked};
use crate::sphquad::SphereQuadrature;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::sync::Arc;

pub type FiberMap = Arc<dyn Fn(&[f64]) -> DVector<Complex64> + Send + Sync>;
pub type Weight = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    /// Values `f(s(b))` on the section.
    Fiber(FiberMap),
    /// `f(k) = π^q_p(τ_p(k^{-1}) w)`.
    Projected { p: usize, proj: DMatrix<Complex64>, w: DVector<Complex64> },
}

/// Covariant boundary form.
#[derive(Clone)]
pub struct BoundaryForm {
    pub n: usize,
    pub q: usize,
    kind: Kind,
    weight: Option<Weight>,
}

impl fmt::Debug for BoundaryForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryForm").field("n", &self.n).field("q", &self.q).finish_non_exhaustive()
    }
}

impl BoundaryForm {
    /// Form with prescribed values `f(s(b))`; covariance extends it to all of `K`.
    pub fn from_fiber(n: usize, q: usize, fiber: FiberMap) -> Result<Self> {
        if n < 2 || q > n - 1 {
            return Err(Error::Domain(format!("no boundary {q}-forms for n = {n}")));
        }
        Ok(Self { n, q, kind: Kind::Fiber(fiber), weight: None })
    }

    /// `f(k) = π(τ_q(k^{-1}) ω)` for `ω ∈ Λ^q C^n`.
    pub fn ambient(omega: &PForm) -> Result<Self> {
        Self::kfinite(omega, omega.p)
    }

    /// `f(k) = π^q_p(τ_p(k^{-1}) w)` for `w ∈ Λ^p C^n`, `q ∈ {p-1, p}`.
    pub fn kfinite(w: &PForm, q: usize) -> Result<Self> {
        let (n, p) = (w.n, w.p);
        if !(q == p || q + 1 == p) || q > n - 1 {
            return Err(Error::Degree(format!("cannot project a {p}-form to degree {q}")));
        }
        let proj = embed_matrix(n, p, q).transpose().map(|x| Complex64::new(x, 0.0));
        Ok(Self { n, q, kind: Kind::Projected { p, proj, w: w.coeffs.clone() }, weight: None })
    }

    /// Multiplies by a smooth function of `b = k e_1`, which preserves covariance.
    pub fn weighted<W>(&self, weight: W) -> Self
    where
        W: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        let weight: Weight = match &self.weight {
            Some(old) => {
                let old = old.clone();
                Arc::new(move |b: &[f64]| old(b) * weight(b))
            }
            None => Arc::new(weight),
        };
        Self { weight: Some(weight), ..self.clone() }
    }

    pub fn fiber_dim(&self) -> usize {
        binom(self.n - 1, self.q)
    }

    /// `f(s(b))`.
    pub fn at_section(&self, b: &[f64]) -> DVector<Complex64> {
        self.eval_raw(&section_unchecked(b))
    }

    /// `f(k)` without validating `k`.
    pub(crate) fn eval_raw(&self, k: &DMatrix<f64>) -> DVector<Complex64> {
        let v = match &self.kind {
            Kind::Projected { p, proj, w } => {
                let t = compound(&k.transpose(), *p).map(|x| Complex64::new(x, 0.0));
                proj * (t * w)
            }
            Kind::Fiber(fiber) => {
                let (b, m) = m_part(k);
                let v = fiber(&b);
                if self.q == 0 {
                    v
                } else {
                    compound(&m.transpose(), self.q).map(|x| Complex64::new(x, 0.0)) * v
                }
            }
        };
        match &self.weight {
            Some(w) => {
                let b: Vec<f64> = k.column(0).iter().copied().collect();
                v * Complex64::new(w(&b), 0.0)
            }
            None => v,
        }
    }

    pub fn eval_on_k(&self, k: &DMatrix<f64>) -> Result<PForm> {
        if k.nrows() != self.n {
            return Err(Error::Domain(format!("rotation of size {} for n = {}", k.nrows(), self.n)));
        }
        check_rotation(k, 1e-9)?;
        PForm::new(self.n - 1, self.q, self.eval_raw(k))
    }

    /// `(∫_K |f(k)|^r dk)^{1/r}`.
    pub fn lr_norm(&self, r: f64, quad: &SphereQuadrature) -> Result<f64> {
        if !(r >= 1.0) || !r.is_finite() {
            return Err(Error::Domain(format!("L^r norm needs finite r >= 1, got {r}")));
        }
        if quad.n != self.n {
            return Err(Error::Domain("quadrature dimension does not match the form".into()));
        }
        let s: f64 = quad.integrate_over_k(|k| self.eval_raw(k).norm().powf(r), true)?;
        Ok(s.powf(1.0 / r))
    }
}

/// Smooth test form `b ↦ e^{⟨c, b⟩} f_ω(b)` with random `ω ∈ Λ^q C^n`, `|c| <= c_max`.
pub fn random_test_form<R: Rng>(n: usize, q: usize, c_max: f64, rng: &mut R) -> Result<BoundaryForm> {
    let dim = binom(n, q);
    let coeffs = DVector::from_fn(dim, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let omega = PForm::new(n, q, coeffs)?;
    let mut c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
    let scale = c_max * rng.gen_range(0.2..1.0) / norm;
    c.iter_mut().for_each(|x| *x *= scale);
    let base = BoundaryForm::ambient(&omega)?;
    Ok(base.weighted(move |b| b.iter().zip(&c).map(|(x, y)| x * y).sum::<f64>().exp()))
}

/// `count` test forms drawn from a ChaCha8 stream seeded with `seed`.
pub fn seeded_test_forms(n: usize, q: usize, c_max: f64, count: usize, seed: u64) -> Result<Vec<BoundaryForm>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_test_form(n, q, c_max, &mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lorentz::embed_m;
    use crate::sphquad::random_rotation;

    #[test]
    fn covariance_under_m() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (n, q) in [(4, 1), (4, 0), (5, 2), (3, 1)] {
            let f = random_test_form(n, q, 0.8, &mut rng).unwrap();
            for _ in 0..5 {
                let k = random_rotation(n, &mut rng);
                let m = random_rotation(n - 1, &mut rng);
                let lhs = f.eval_on_k(&(&k * embed_m(&m))).unwrap();
                let rhs = crate::exterior::sigma_apply(&m.transpose(), &f.eval_on_k(&k).unwrap()).unwrap();
                assert!((lhs.coeffs - rhs.coeffs).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn fiber_and_projected_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w = PForm::from_real(4, 2, &[0.3, -1.0, 0.5, 2.0, 0.1, -0.7]).unwrap();
        let direct = BoundaryForm::kfinite(&w, 1).unwrap().weighted(|b| 1.0 + b[1]);
        let d2 = direct.clone();
        let fiber = BoundaryForm::from_fiber(4, 1, Arc::new(move |b: &[f64]| d2.at_section(b))).unwrap();
        for _ in 0..5 {
            let k = random_rotation(4, &mut rng);
            let a = direct.eval_on_k(&k).unwrap();
            let b = fiber.eval_on_k(&k).unwrap();
            assert!((a.coeffs - b.coeffs).norm() < 1e-12);
        }
    }

    #[test]
    fn kfinite_l2_norm() {
        // ∫_K |π τ(k^{-1}) w|^2 dk = dim Λ^q C^{n-1} / dim Λ^p C^n · |w|^2
        let w = PForm::from_real(4, 1, &[0.3, -1.0, 0.5, 2.0]).unwrap();
        let quad = SphereQuadrature::build(4, 3).unwrap();
        for q in [0usize, 1] {
            let f = BoundaryForm::kfinite(&w, q).unwrap();
            let got = f.lr_norm(2.0, &quad).unwrap().powi(2);
            let want = binom(3, q) as f64 / 4.0 * w.norm().powi(2);
            assert!((got - want).abs() < 1e-12, "q={q}: {got} vs {want}");
        }
    }

    #[test]
    fn lr_norm_validates_exponent() {
        let f = BoundaryForm::ambient(&PForm::from_real(3, 0, &[1.0]).unwrap()).unwrap();
        let quad = SphereQuadrature::build(3, 2).unwrap();
        assert!(f.lr_norm(0.5, &quad).is_err());
        assert!((f.lr_norm(4.0, &quad).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eval_rejects_non_rotation() {
        let f = BoundaryForm::ambient(&PForm::from_real(3, 1, &[1.0, 0.0, 0.0]).unwrap()).unwrap();
        assert!(f.eval_on_k(&DMatrix::from_element(3, 3, 0.5)).is_err());
    }
}
