//! The Poisson transform `𝒫f(g) = c_{p,q} ∫_K P(g, k) ι f(k) dk` with kernel
//! `P(g, k) = e^{-(μ+ρ)H(g^{-1}k)} τ_p(κ(g^{-1}k))`, its boundary behaviour,
//! weighted Hardy norms and the inversion formula.

use crate::boundary::BoundaryForm;
use crate::cfun::c_component;
use crate::error::{Error, Result};
use crate::exterior::{binom, compound, embed_matrix, to_complex, EndoMatrix, PForm};
use crate::lorentz::{embed_k, geodesic_matrix, iwasawa_kt, lorentz_inverse, polar, GroupElement};
use crate::params::SpectralParams;
use crate::specfun::{jacobi_c, jacobi_phi};
use crate::sphquad::{FocusedRule, SphereQuadrature};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

/// `P(g, k)` for `g ∈ G`, `k ∈ K`.
pub fn poisson_kernel(params: &SpectralParams, g: &GroupElement, k: &DMatrix<f64>) -> Result<EndoMatrix> {
    if g.n() != params.n || k.nrows() != params.n {
        return Err(Error::Domain("group element and rotation must match n".into()));
    }
    crate::exterior::check_rotation(k, 1e-9)?;
    let x = lorentz_inverse(g.matrix()) * embed_k(k).matrix();
    Ok(kernel_of(params, &x))
}

/// `e^{-(μ+ρ)H(x)} τ_p(κ(x))`.
fn kernel_of(params: &SpectralParams, x: &DMatrix<f64>) -> EndoMatrix {
    let (h, kappa) = iwasawa_kt(x);
    let s = (-(params.mu + params.rho()) * h).exp();
    compound(&kappa, params.p).map(|v| s * v)
}

/// `Φ_λ(g) = e^{-(μ̄+ρ)H(g)} τ_p(κ(g))^{-1}`, so that `P(g, k) = Φ_λ(g^{-1}k)^*`.
pub fn phi_lambda(params: &SpectralParams, g: &GroupElement) -> EndoMatrix {
    let (h, kappa) = iwasawa_kt(g.matrix());
    let s = (-(params.mu.conj() + params.rho()) * h).exp();
    compound(&kappa.transpose(), params.p).map(|v| s * v)
}

/// Poisson transform of a boundary form.
#[derive(Debug, Clone)]
pub struct PoissonField {
    pub params: SpectralParams,
    pub boundary: BoundaryForm,
    /// Quadrature used for every evaluation; the rule follows the concentration of the kernel.
    pub rule: FocusedRule,
    iota: DMatrix<Complex64>,
}

/// Kernel table for evaluations on the orbit `K a_t`.
pub struct FieldSlice<'a> {
    field: &'a PoissonField,
    pub t: f64,
    sections: Vec<DMatrix<f64>>,
    /// `w_i c_{p,q} P(a_t, s(b_i)) ι`.
    kernels: Vec<DMatrix<Complex64>>,
}

impl PoissonField {
    pub fn new(params: SpectralParams, boundary: BoundaryForm, rule: FocusedRule) -> Result<Self> {
        if boundary.n != params.n || boundary.q != params.q {
            return Err(Error::Domain(format!(
                "boundary form of type (n={}, q={}) does not match parameters (n={}, q={})",
                boundary.n, boundary.q, params.n, params.q
            )));
        }
        if !params.in_convergence_region() {
            return Err(Error::Divergence(format!(
                "the Poisson integral is only evaluated for Re mu > 0 (got {})",
                params.mu
            )));
        }
        let iota = to_complex(&embed_matrix(params.n, params.p, params.q));
        Ok(Self { params, boundary, rule, iota })
    }

    pub fn slice(&self, t: f64) -> Result<FieldSlice<'_>> {
        let n = self.params.n;
        let quad = SphereQuadrature::focused(n, &self.rule, t)?;
        let ainv = geodesic_matrix(n, -t);
        let cpq = self.params.cpq();
        let kernels = (0..quad.len())
            .into_par_iter()
            .with_min_len(64)
            .map(|i| {
                let x = &ainv * embed_k(&quad.sections[i]).matrix();
                kernel_of(&self.params, &x).map(|v| v * (quad.weights[i] * cpq)) * &self.iota
            })
            .collect();
        Ok(FieldSlice { field: self, t, sections: quad.sections, kernels })
    }

    /// `𝒫f(g)` through `g = k_0 a_t k_1` and `𝒫f(g) = τ_p(k_1)^{-1} 𝒫f(k_0 a_t)`.
    pub fn eval(&self, g: &GroupElement) -> Result<PForm> {
        if g.n() != self.params.n {
            return Err(Error::Domain("group element does not match n".into()));
        }
        PForm::new(self.params.n, self.params.p, self.eval_raw(g.matrix())?)
    }

    pub(crate) fn eval_raw(&self, g: &DMatrix<f64>) -> Result<DVector<Complex64>> {
        let (k0, t, k1) = polar(&GroupElement::from_raw(g.clone()));
        let v = self.slice(t)?.eval_at(&k0);
        Ok(to_complex(&compound(&k1.transpose(), self.params.p)) * v)
    }

    pub fn degree(&self) -> usize {
        self.params.p
    }
}

impl FieldSlice<'_> {
    /// `𝒫f(k_0 a_t)`.
    pub fn eval_at(&self, k0: &DMatrix<f64>) -> DVector<Complex64> {
        let dim = binom(self.field.params.n, self.field.params.p);
        let mut acc = DVector::zeros(dim);
        for (s, ker) in self.sections.iter().zip(&self.kernels) {
            let f = self.field.boundary.eval_raw(&(k0 * s));
            acc += ker * f;
        }
        acc
    }
}

/// `|e^{(ρ-μ)t} 𝒫f(k a_t) - c_{p,q} c_q(λ,p) ι f(k)|`.
pub fn fatou_residual(field: &PoissonField, k: &DMatrix<f64>, t: f64) -> Result<f64> {
    let slice = field.slice(t)?;
    fatou_residual_in(field, &slice, k)
}

fn fatou_residual_in(field: &PoissonField, slice: &FieldSlice<'_>, k: &DMatrix<f64>) -> Result<f64> {
    let p = &field.params;
    let scale = ((p.rho() - p.mu) * slice.t).exp();
    let limit = &field.iota * field.boundary.eval_raw(k) * (c_component(p)? * p.cpq());
    Ok((slice.eval_at(k) * scale - limit).norm())
}

/// `L^2(K)`-averaged Fatou residual together with `|ι f|_{L^2}`.
pub fn fatou_residual_l2(field: &PoissonField, t: f64, quad: &SphereQuadrature) -> Result<(f64, f64)> {
    let slice = field.slice(t)?;
    let res: f64 = quad.integrate_over_k(|k| fatou_residual_in(field, &slice, k).map(|r| r * r).unwrap_or(f64::NAN), true)?;
    let reference = field.boundary.lr_norm(2.0, quad)?;
    Ok((res.sqrt(), reference))
}

/// Weighted norms `e^{(ρ - Re μ)t} |𝒫f(· a_t)|_{L^r}` on a grid, and their supremum.
#[derive(Debug, Clone, PartialEq)]
pub struct HardyNorm {
    pub t_grid: Vec<f64>,
    pub weighted: Vec<f64>,
    pub grid_max: f64,
    /// `t → ∞` limit `c_{p,q} |c_q(λ,p)| |f|_{L^r}`.
    pub limit: f64,
    /// `max(grid_max, limit)`.
    pub value: f64,
}

pub fn hardy_norm(field: &PoissonField, r: f64, t_grid: &[f64], quad: &SphereQuadrature) -> Result<HardyNorm> {
    Ok(hardy_norms(field, &[r], t_grid, quad)?.remove(0))
}

/// `hardy_norm` for several exponents, sharing the field evaluations.
pub fn hardy_norms(field: &PoissonField, rs: &[f64], t_grid: &[f64], quad: &SphereQuadrature) -> Result<Vec<HardyNorm>> {
    if t_grid.is_empty() || rs.is_empty() {
        return Err(Error::Domain("empty t grid or exponent list".into()));
    }
    if let Some(r) = rs.iter().find(|r| !(**r > 1.0) || !r.is_finite()) {
        return Err(Error::Domain(format!("Hardy norms need 1 < r < inf, got {r}")));
    }
    let p = &field.params;
    let mut weighted = vec![Vec::with_capacity(t_grid.len()); rs.len()];
    for &t in t_grid {
        let slice = field.slice(t)?;
        let sums: DVector<f64> = quad.integrate_over_k(
            |k| {
                let v = slice.eval_at(k).norm();
                DVector::from_iterator(rs.len(), rs.iter().map(|&r| v.powf(r)))
            },
            true,
        )?;
        let w = ((p.rho() - p.mu.re) * t).exp();
        for (j, &r) in rs.iter().enumerate() {
            weighted[j].push(w * sums[j].powf(1.0 / r));
        }
    }
    let cq = c_component(p)?.norm();
    rs.iter()
        .zip(weighted)
        .map(|(&r, weighted)| {
            let grid_max = weighted.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let limit = p.cpq() * cq * field.boundary.lr_norm(r, quad)?;
            Ok(HardyNorm { t_grid: t_grid.to_vec(), weighted, grid_max, limit, value: grid_max.max(limit) })
        })
        .collect()
}

/// `sup_t e^{(ρ - Re μ)t} φ_{-i Re μ}(t)` for the scalar spherical function.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaLambda {
    pub grid_max: f64,
    /// `t → ∞` limit `c(λ)` at `μ = Re μ`.
    pub limit: f64,
    /// `max(grid_max, limit)`.
    pub value: f64,
}

pub fn spherical_weighted(params: &SpectralParams, t: f64) -> Result<f64> {
    let (alpha, rho) = (params.rho() - 0.5, params.rho());
    let nu = Complex64::new(0.0, -params.mu.re);
    Ok(((rho - params.mu.re) * t).exp() * jacobi_phi(alpha, -0.5, nu, t)?.re)
}

pub fn gamma_lambda(params: &SpectralParams, t_grid: &[f64]) -> Result<GammaLambda> {
    if !params.in_convergence_region() {
        return Err(Error::Divergence("gamma_lambda needs Re mu > 0".into()));
    }
    let mut grid_max = f64::NEG_INFINITY;
    for &t in t_grid {
        grid_max = grid_max.max(spherical_weighted(params, t)?);
    }
    let limit = jacobi_c(params.rho() - 0.5, -0.5, Complex64::new(0.0, -params.mu.re))?.re;
    Ok(GammaLambda { grid_max, limit, value: grid_max.max(limit) })
}

/// `g_t(k) = c_{p,q}^{-1} |c_q|^{-2} e^{2(ρ - Re μ)t} π ∫_K P(h a_t, k)^* 𝒫f(h a_t) dh`.
///
/// After `h ↦ kh` the kernel concentrates at `h = e` on the scale `e^{-t}`, so
/// `quad_h` should be a rule focused at `t`.
pub fn invert(field: &PoissonField, t: f64, k: &DMatrix<f64>, quad_h: &SphereQuadrature) -> Result<PForm> {
    Ok(invert_many(field, t, std::slice::from_ref(k), quad_h)?.remove(0))
}

/// `invert` at several points `k`, sharing the kernel table.
pub fn invert_many(field: &PoissonField, t: f64, ks: &[DMatrix<f64>], quad_h: &SphereQuadrature) -> Result<Vec<PForm>> {
    let p = &field.params;
    if p.is_excluded() {
        return Err(Error::Domain(format!("inversion is undefined at the excluded point mu = {}", p.mu)));
    }
    let cq = c_component(p)?;
    if cq.norm() < 1e-300 {
        return Err(Error::Domain("c_q vanishes; the transform is not injective here".into()));
    }
    if quad_h.n != p.n {
        return Err(Error::Domain("dimension mismatch in invert".into()));
    }
    for k in ks {
        if k.nrows() != p.n {
            return Err(Error::Domain("dimension mismatch in invert".into()));
        }
        crate::exterior::check_rotation(k, 1e-9)?;
    }
    let slice = field.slice(t)?;
    let ainv = geodesic_matrix(p.n, -t);
    let rho = p.rho();
    // conj(e^{-(μ+ρ)H(x)}) τ_p(κ(x))^T at x = a_{-t} h^{-1}
    let adjoints: Vec<DMatrix<Complex64>> = quad_h
        .sections
        .par_iter()
        .map(|h| {
            let (hh, kappa) = iwasawa_kt(&(&ainv * embed_k(&h.transpose()).matrix()));
            let s = (-(p.mu.conj() + rho) * hh).exp();
            compound(&kappa.transpose(), p.p).map(|v| s * v)
        })
        .collect();
    let scale = Complex64::new((2.0 * (rho - p.mu.re) * t).exp() / (p.cpq() * cq.norm_sqr()), 0.0);
    let iota_t = field.iota.transpose();
    ks.iter()
        .map(|k| {
            let terms: Vec<DVector<Complex64>> = (0..quad_h.len())
                .into_par_iter()
                .map(|i| (&adjoints[i] * slice.eval_at(&(k * &quad_h.sections[i]))) * Complex64::new(quad_h.weights[i], 0.0))
                .collect();
            let integral = crate::sphquad::pairwise_sum(terms).expect("non-empty quadrature");
            PForm::new(p.n - 1, p.q, &iota_t * integral * scale)
        })
        .collect()
}

/// `(|g_t - f|_{L^2}, |f|_{L^2})` with `L^2(K)` estimated on the nodes of `samples`.
pub fn inversion_error(field: &PoissonField, t: f64, rule_h: &FocusedRule, samples: &SphereQuadrature) -> Result<(f64, f64)> {
    let quad_h = SphereQuadrature::focused(field.params.n, rule_h, t)?;
    let g = invert_many(field, t, &samples.sections, &quad_h)?;
    let (mut err, mut norm) = (0.0, 0.0);
    for ((gk, k), w) in g.iter().zip(&samples.sections).zip(&samples.weights) {
        let f = field.boundary.eval_raw(k);
        err += w * (&gk.coeffs - &f).norm_squared();
        norm += w * f.norm_squared();
    }
    Ok((err.sqrt(), norm.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::random_test_form;
    use crate::lorentz::{embed_m, geodesic};
    use crate::sphquad::random_rotation;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(n: usize, p: usize, q: usize, mu: f64) -> SpectralParams {
        SpectralParams::new(n, p, q, Complex64::new(mu, 0.0)).unwrap()
    }

    #[test]
    fn kernel_adjoint_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let par = SpectralParams::new(4, 1, 1, Complex64::new(1.2, 0.7)).unwrap();
        let g = embed_k(&random_rotation(4, &mut rng)).mul(&geodesic(4, 0.8)).mul(&embed_k(&random_rotation(4, &mut rng)));
        let k = random_rotation(4, &mut rng);
        let p = poisson_kernel(&par, &g, &k).unwrap();
        let x = g.inverse().mul(&embed_k(&k));
        let phi = phi_lambda(&par, &x);
        assert!((p - phi.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn kernel_is_right_m_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let par = params(4, 1, 1, 1.5);
        let g = embed_k(&random_rotation(4, &mut rng)).mul(&geodesic(4, 1.1));
        let k = random_rotation(4, &mut rng);
        let m = embed_m(&random_rotation(3, &mut rng));
        let lhs = poisson_kernel(&par, &g, &(&k * &m)).unwrap();
        let rhs = poisson_kernel(&par, &g, &k).unwrap() * to_complex(&compound(&m, 1));
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn poisson_of_one_is_one_at_rho() {
        let par = params(4, 0, 0, 1.5);
        let one = BoundaryForm::ambient(&PForm::from_real(4, 0, &[1.0]).unwrap()).unwrap();
        let field = PoissonField::new(par, one, FocusedRule::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for t in [0.0, 0.7, 3.0] {
            let g = embed_k(&random_rotation(4, &mut rng)).mul(&geodesic(4, t)).mul(&embed_k(&random_rotation(4, &mut rng)));
            let v = field.eval(&g).unwrap();
            assert!((v.coeffs[0] - Complex64::new(1.0, 0.0)).norm() < 1e-10, "t={t}: {}", v.coeffs[0]);
        }
    }

    #[test]
    fn right_k_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let par = params(4, 1, 1, 1.5);
        let f = random_test_form(4, 1, 0.7, &mut rng).unwrap();
        let field = PoissonField::new(par, f, FocusedRule::default()).unwrap();
        let g = embed_k(&random_rotation(4, &mut rng)).mul(&geodesic(4, 0.9)).mul(&embed_k(&random_rotation(4, &mut rng)));
        let k1 = random_rotation(4, &mut rng);
        let lhs = field.eval(&g.mul(&embed_k(&k1))).unwrap();
        let rhs = to_complex(&compound(&k1.transpose(), 1)) * field.eval(&g).unwrap().coeffs;
        assert!((lhs.coeffs - rhs).norm() < 1e-12);
    }

    #[test]
    fn left_equivariance() {
        // 𝒫(f(k_0 ·))(g) = 𝒫f(k_0 g)
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let par = params(4, 1, 0, 1.0);
        let f = random_test_form(4, 0, 0.7, &mut rng).unwrap();
        let k0 = random_rotation(4, &mut rng);
        let k0c = k0.clone();
        let f2 = f.clone();
        let shifted = BoundaryForm::from_fiber(4, 0, std::sync::Arc::new(move |b: &[f64]| {
            f2.eval_raw(&(&k0c * crate::lorentz::section_unchecked(b)))
        }))
        .unwrap();
        let a = PoissonField::new(par, f, FocusedRule::default()).unwrap();
        let b = PoissonField::new(par, shifted, FocusedRule::default()).unwrap();
        let g = embed_k(&random_rotation(4, &mut rng)).mul(&geodesic(4, 1.3)).mul(&embed_k(&random_rotation(4, &mut rng)));
        let lhs = b.eval(&g).unwrap();
        let rhs = a.eval(&embed_k(&k0).mul(&g)).unwrap();
        assert!((&lhs.coeffs - &rhs.coeffs).norm() < 1e-10 * rhs.norm());
    }

    #[test]
    fn gamma_lambda_limit_is_scalar_c() {
        let par = params(4, 1, 1, 1.5);
        let grid: Vec<f64> = (0..=24).map(|i| i as f64 * 0.25).collect();
        let g = gamma_lambda(&par, &grid).unwrap();
        let c = crate::cfun::c_scalar(4, Complex64::new(1.5, 0.0)).unwrap().re;
        assert!((g.limit - c).abs() < 1e-12);
        assert!(g.value >= g.grid_max);
        assert!((spherical_weighted(&par, 0.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn excluded_point_is_rejected_by_invert() {
        let par = params(4, 1, 0, 1.5);
        let f = BoundaryForm::ambient(&PForm::from_real(4, 0, &[1.0]).unwrap()).unwrap();
        let field = PoissonField::new(par, f, FocusedRule::default()).unwrap();
        let quad = SphereQuadrature::build(4, 2).unwrap();
        assert!(invert(&field, 2.0, &DMatrix::identity(4, 4), &quad).is_err());
    }

    #[test]
    fn inversion_recovers_boundary_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let rule = FocusedRule { panel_points: 6, level: 2 };
        let par = params(4, 1, 1, 1.5);
        let f = random_test_form(4, 1, 0.7, &mut rng).unwrap();
        let field = PoissonField::new(par, f, rule).unwrap();
        let quad_h = SphereQuadrature::focused(4, &rule, 5.0).unwrap();
        let k = random_rotation(4, &mut rng);
        let g = invert(&field, 5.0, &k, &quad_h).unwrap();
        let want = field.boundary.eval_raw(&k);
        assert!((g.coeffs - &want).norm() < 5e-3 * want.norm());
    }

    #[test]
    fn fatou_residual_decays() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let par = params(4, 1, 1, 1.5);
        let f = random_test_form(4, 1, 0.7, &mut rng).unwrap();
        let field = PoissonField::new(par, f, FocusedRule { panel_points: 6, level: 2 }).unwrap();
        let quad = SphereQuadrature::build(4, 2).unwrap();
        let r: Vec<f64> = [2.0, 4.0, 6.0].iter().map(|&t| fatou_residual_l2(&field, t, &quad).unwrap().0).collect();
        assert!(r[2] < r[1] && r[1] < r[0], "{r:?}");
        // e^{-t} rate within 20%
        let rate = (r[1] / r[2]).ln() / 2.0;
        assert!((rate - 1.0).abs() < 0.2, "rate {rate}");
    }

    #[test]
    fn hardy_norm_of_constant_is_one() {
        let par = params(4, 0, 0, 1.5);
        let one = BoundaryForm::ambient(&PForm::from_real(4, 0, &[1.0]).unwrap()).unwrap();
        let field = PoissonField::new(par, one, FocusedRule { panel_points: 8, level: 3 }).unwrap();
        let quad = SphereQuadrature::build(4, 1).unwrap();
        for h in hardy_norms(&field, &[1.5, 4.0], &[0.0, 1.0, 3.0], &quad).unwrap() {
            assert!((h.value - 1.0).abs() < 1e-8, "{h:?}");
        }
        assert!(hardy_norm(&field, 1.0, &[0.0], &quad).is_err());
    }

    #[test]
    fn type_mismatch_is_rejected() {
        let f = BoundaryForm::ambient(&PForm::from_real(4, 0, &[1.0]).unwrap()).unwrap();
        assert!(PoissonField::new(params(4, 1, 1, 1.0), f.clone(), FocusedRule::default()).is_err());
        assert!(matches!(
            PoissonField::new(params(4, 1, 0, -1.0), f, FocusedRule::default()),
            Err(Error::Divergence(_))
        ));
    }
}
