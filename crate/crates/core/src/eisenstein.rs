//! Eisenstein integrals `Φ^p_q(λ, a_t)`: quadrature and closed-form Jacobi
//! evaluation, scalar components, and the Hilbert-Schmidt limit for `δ = τ_p`.

use crate::cfun::{c_component, c_matrix};
use crate::error::{Error, Result};
use crate::exterior::{binom, compound, embed_matrix, to_complex, EndoMatrix};
use crate::lorentz::{embed_k, geodesic_matrix, iwasawa_kt};
use crate::params::SpectralParams;
use crate::poisson::gamma_lambda;
use crate::specfun::jacobi_phi;
use crate::sphquad::{FocusedRule, SphereQuadrature};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Components of a `τ_p`-radial value on `Λ^{p-1}C^{n-1}` and `Λ^pC^{n-1}`.
/// For `p = 0` the first block is empty and `f_qminus` is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarComponents {
    pub f_qminus: Complex64,
    pub f_q: Complex64,
    /// `|E - reconstruction|_F / max(1, |E|_F)`; zero for closed forms.
    pub schur_residual: f64,
}

impl ScalarComponents {
    pub fn reconstruct(&self, n: usize, p: usize) -> EndoMatrix {
        let upper = embed_matrix(n, p, p);
        let mut m = to_complex(&(&upper * upper.transpose())) * self.f_q;
        if p > 0 {
            let lower = embed_matrix(n, p, p - 1);
            m += to_complex(&(&lower * lower.transpose())) * self.f_qminus;
        }
        m
    }
}

/// `c_{p,q}² ∫_K e^{-(μ+ρ)H(a_t^{-1}k)} τ_p(κ(a_t^{-1}k)) ι π τ_p(k^{-1}) dk`.
pub fn eisenstein_quad(params: &SpectralParams, t: f64, quad: &SphereQuadrature) -> Result<EndoMatrix> {
    let n = params.n;
    if quad.n != n {
        return Err(Error::Domain("quadrature dimension does not match n".into()));
    }
    let iota = embed_matrix(n, params.p, params.q);
    let iota_pi = to_complex(&(&iota * iota.transpose()));
    let ainv = geodesic_matrix(n, -t);
    let shift = params.mu + params.rho();
    let p = params.p;
    let integral: EndoMatrix = quad.integrate_over_k(
        |k| {
            let (h, kappa) = iwasawa_kt(&(&ainv * embed_k(k).matrix()));
            let left = to_complex(&compound(&kappa, p)) * (-shift * h).exp();
            left * &iota_pi * to_complex(&compound(&k.transpose(), p))
        },
        true,
    )?;
    Ok(integral * Complex64::new(params.cpq().powi(2), 0.0))
}

/// `eisenstein_quad` on the rule focused at `t`.
pub fn eisenstein_focused(params: &SpectralParams, t: f64, rule: &FocusedRule) -> Result<EndoMatrix> {
    eisenstein_quad(params, t, &SphereQuadrature::focused(params.n, rule, t)?)
}

/// Block traces `tr(π E ι) / dim` with the Schur residual of the reconstruction.
pub fn scalar_components(e: &EndoMatrix, n: usize, p: usize) -> Result<ScalarComponents> {
    let dim = binom(n, p);
    if e.nrows() != dim || e.ncols() != dim {
        return Err(Error::Domain(format!("expected a {dim}×{dim} matrix")));
    }
    let block = |q: usize| {
        let i = to_complex(&embed_matrix(n, p, q));
        (i.transpose() * e * &i).trace() / binom(n - 1, q) as f64
    };
    let f_q = block(p);
    let f_qminus = if p > 0 { block(p - 1) } else { Complex64::new(0.0, 0.0) };
    let mut sc = ScalarComponents { f_qminus, f_q, schur_residual: 0.0 };
    sc.schur_residual = (e - sc.reconstruct(n, p)).norm() / e.norm().max(1.0);
    if sc.schur_residual > 1e-6 {
        return Err(Error::NonRadial { residual: sc.schur_residual });
    }
    Ok(sc)
}

/// Closed-form components through `φ^{(n/2,-1/2)}_λ` and `φ^{(n/2-1,-1/2)}_λ`.
pub fn eisenstein_closed(params: &SpectralParams, t: f64) -> Result<ScalarComponents> {
    let (n, p) = (params.n as f64, params.p as f64);
    if params.q + 1 == params.p && params.p == 0 {
        return Err(Error::Degree("q = p - 1 needs p >= 1".into()));
    }
    let nu = Complex64::new(0.0, -1.0) * params.mu;
    let big = jacobi_phi(n / 2.0, -0.5, nu, t)?;
    let small = jacobi_phi(n / 2.0 - 1.0, -0.5, nu, t)?;
    let ch = t.cosh();
    let (f_qminus, f_q) = if params.q == params.p {
        (big, small * (n / (n - p)) - big * (p / (n - p) * ch))
    } else {
        (small * (n / p) - big * ((n - p) / p * ch), big)
    };
    Ok(ScalarComponents { f_qminus, f_q, schur_residual: 0.0 })
}

/// `Φ^p_q(λ, a_t)` as a matrix from the closed-form components.
pub fn eisenstein_closed_matrix(params: &SpectralParams, t: f64) -> Result<EndoMatrix> {
    Ok(eisenstein_closed(params, t)?.reconstruct(params.n, params.p))
}

/// `c_{p,q}² c(λ,p) ι π`, the limit of `e^{(ρ-μ)t} Φ^p_q(λ, a_t)`.
pub fn eisenstein_limit(params: &SpectralParams) -> Result<EndoMatrix> {
    let iota = embed_matrix(params.n, params.p, params.q);
    let ip = to_complex(&(&iota * iota.transpose()));
    Ok(c_matrix(params)? * ip * Complex64::new(params.cpq().powi(2), 0.0))
}

/// Hilbert-Schmidt limit of `Φ_{λ,τ_p} = c_{p,q}^{-1} Φ^p_q`.
#[derive(Debug, Clone, PartialEq)]
pub struct HsLimit {
    pub t_grid: Vec<f64>,
    /// `|e^{2(ρ - Re μ)t} |Φ_{λ,τ_p}(a_t)|²_HS - target|` on the grid.
    pub deviation: Vec<f64>,
    /// `e^{(ρ - Re μ)t} |Φ_{λ,τ_p}(a_t)|_HS` on the grid.
    pub weighted: Vec<f64>,
    /// `c_{p,q}² |c_q(λ,p)|² C(n-1,q)`.
    pub target: f64,
    /// `γ_λ c_{p,q} √C(n-1,q)`.
    pub sup_bound: f64,
}

impl HsLimit {
    pub fn final_deviation(&self) -> f64 {
        *self.deviation.last().expect("non-empty grid")
    }
    pub fn is_decreasing(&self) -> bool {
        self.deviation.windows(2).all(|w| w[1] < w[0])
    }
    pub fn sup_holds(&self) -> bool {
        self.weighted.iter().all(|&w| w <= self.sup_bound)
    }
}

/// Evaluates the HS limit from the closed-form components on `t_grid`. The
/// bound `γ_λ` is the supremum of the scaled spherical function over the
/// union of `t_grid` and `gamma_grid`.
pub fn hs_limit_check(params: &SpectralParams, t_grid: &[f64], gamma_grid: &[f64]) -> Result<HsLimit> {
    if !params.in_convergence_region() {
        return Err(Error::Divergence("the HS limit needs Re mu > 0".into()));
    }
    if t_grid.is_empty() {
        return Err(Error::Domain("empty t grid".into()));
    }
    let (n, p, q) = (params.n, params.p, params.q);
    let cpq = params.cpq();
    let dims = (if p > 0 { binom(n - 1, p - 1) } else { 0 } as f64, binom(n - 1, p) as f64);
    let rho = params.rho();
    let mut deviation = Vec::with_capacity(t_grid.len());
    let mut weighted = Vec::with_capacity(t_grid.len());
    let target = cpq.powi(2) * c_component(params)?.norm_sqr() * binom(n - 1, q) as f64;
    for &t in t_grid {
        let sc = eisenstein_closed(params, t)?;
        let hs2 = (sc.f_qminus.norm_sqr() * dims.0 + sc.f_q.norm_sqr() * dims.1) / (cpq * cpq);
        let w2 = (2.0 * (rho - params.mu.re) * t).exp() * hs2;
        deviation.push((w2 - target).abs());
        weighted.push(w2.sqrt());
    }
    let mut grid: Vec<f64> = t_grid.iter().chain(gamma_grid).copied().collect();
    grid.sort_by(f64::total_cmp);
    let gamma = gamma_lambda(params, &grid)?.value;
    let sup_bound = gamma * cpq * (binom(n - 1, q) as f64).sqrt();
    Ok(HsLimit { t_grid: t_grid.to_vec(), deviation, weighted, target, sup_bound })
}

/// `(|q-block deviation|, |other-block|)` of `e^{(ρ-μ)t} Φ(a_t) - c_{p,q}² c(λ,p) ι π`
/// in operator norm, from the closed form.
pub fn limit_deviation(params: &SpectralParams, t: f64) -> Result<(f64, f64)> {
    let sc = eisenstein_closed(params, t)?;
    let scale = ((params.rho() - params.mu) * t).exp();
    let target = params.cpq().powi(2) * c_component(params)?;
    let (on, off) = if params.q == params.p { (sc.f_q, sc.f_qminus) } else { (sc.f_qminus, sc.f_q) };
    let off = if params.p == 0 { Complex64::new(0.0, 0.0) } else { off };
    Ok(((on * scale - target).norm(), (off * scale).norm()))
}

/// `|E M - M E|` for embedded `m`, a radiality check.
pub fn m_commutator(e: &EndoMatrix, m: &DMatrix<f64>, p: usize) -> f64 {
    let n = m.nrows() + 1;
    let tm = to_complex(&compound(&crate::lorentz::embed_m(m), p));
    debug_assert_eq!(tm.nrows(), binom(n, p));
    (e * &tm - &tm * e).norm()
}
