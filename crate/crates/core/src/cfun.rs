//! Scalar and form-valued c-functions, closed forms and an integral oracle over `N̄`.

use crate::error::{Error, Result};
use crate::exterior::{binom, compound, embed_matrix, EndoMatrix};
use crate::lorentz::{iwasawa_kt, nbar_matrix};
use crate::params::{cpq, SpectralParams};
use crate::specfun::{ln_gamma, rgamma};
use crate::sphquad::{gauss_legendre, pairwise_sum};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

/// `(c(λ), c_{p-1}(λ,p), c_p(λ,p))`; `c_{p-1}` is absent for `p = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CFunctionValue {
    pub scalar: Complex64,
    pub lower: Option<Complex64>,
    pub upper: Complex64,
}

impl CFunctionValue {
    /// `c_q(λ, p)`.
    pub fn component(&self, p: usize, q: usize) -> Complex64 {
        if q == p {
            self.upper
        } else {
            self.lower.unwrap_or_default()
        }
    }
}

fn cr(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `c(λ) = 2^{ρ-μ} Γ(μ) Γ(ρ+1/2) / (Γ((μ+ρ)/2) Γ((μ+ρ+1)/2))` with `μ = iλ`.
pub fn c_scalar(n: usize, mu: Complex64) -> Result<Complex64> {
    if n < 2 {
        return Err(Error::Domain(format!("dimension n = {n} must be at least 2")));
    }
    let rho = (n as f64 - 1.0) / 2.0;
    let log_num = (rho - mu) * std::f64::consts::LN_2 + ln_gamma(mu)? + ln_gamma(cr(rho + 0.5))?;
    Ok(log_num.exp() * rgamma((mu + rho) / 2.0) * rgamma((mu + rho + 1.0) / 2.0))
}

/// Closed forms `c_p = (μ+ρ-p)/(μ+ρ) c` and `c_{p-1} = (μ-ρ+p-1)/(μ+ρ) c`.
pub fn c_components(params: &SpectralParams) -> Result<CFunctionValue> {
    let c = c_scalar(params.n, params.mu)?;
    let (rho, p) = (params.rho(), params.p as f64);
    let mu = params.mu;
    let den = mu + rho;
    let (upper, lower) = if den.norm() == 0.0 {
        return Err(Error::Pole(format!("mu + rho = 0 at mu = {mu}")));
    } else {
        (c * (mu + rho - p) / den, (params.p > 0).then(|| c * (mu - rho + p - 1.0) / den))
    };
    Ok(CFunctionValue { scalar: c, lower, upper })
}

/// `c_q(λ, p)` for the `q` stored in `params`.
pub fn c_component(params: &SpectralParams) -> Result<Complex64> {
    Ok(c_components(params)?.component(params.p, params.q))
}

/// Block projector `ι_q π_q` onto `Λ^q C^{n-1}` inside `Λ^p C^n`.
pub fn block_projector(n: usize, p: usize, q: usize) -> DMatrix<f64> {
    let e = embed_matrix(n, p, q);
    &e * e.transpose()
}

/// `c(λ, p) = c_{p-1} ι_{p-1}π_{p-1} + c_p ι_pπ_p` on `Λ^p C^n`.
pub fn c_matrix(params: &SpectralParams) -> Result<EndoMatrix> {
    let v = c_components(params)?;
    let (n, p) = (params.n, params.p);
    let mut m = block_projector(n, p, p).map(|x| cr(x) * v.upper);
    if let Some(lower) = v.lower {
        m += block_projector(n, p, p - 1).map(|x| cr(x) * lower);
    }
    Ok(m)
}

/// Harmonic constant `c_p(ρ) = c_{p,p} 2^p Γ(ρ+1/2) Γ(ρ-p) / (Γ(ρ-p/2) Γ(ρ-p/2+1/2))`.
pub fn harmonic_constant(n: usize, p: usize) -> Result<f64> {
    let rho = (n as f64 - 1.0) / 2.0;
    let pf = p as f64;
    if pf >= rho {
        return Err(Error::Domain(format!("harmonic constant needs p < (n-1)/2, got p = {p}")));
    }
    let lg = |x: f64| ln_gamma(cr(x)).map(|v| v.re);
    let l = pf * std::f64::consts::LN_2 + lg(rho + 0.5)? + lg(rho - pf)? - lg(rho - pf / 2.0)? - lg(rho - pf / 2.0 + 0.5)?;
    Ok(cpq(n, p, p) * l.exp())
}

/// Discretisation of the integral over `N̄ ≅ R^{n-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    /// Half-width `R` of the inner cube; the outer cube has half-width `2R`.
    pub radius: f64,
    /// Width of the Gauss-Legendre panels in `u = asinh(y)`.
    pub panel_width: f64,
    pub points_per_panel: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { radius: 400.0, panel_width: 0.75, points_per_panel: 8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Extrapolated `∫ e^{-(μ+ρ)H(n̄)} τ_p(κ(n̄)) dn̄ / ∫ e^{-2ρH(n̄)} dn̄`.
    pub matrix: EndoMatrix,
    /// `c_q` read off the `Λ^q C^{n-1}` block for `q = p-1, p`.
    pub lower: Option<Complex64>,
    pub upper: Complex64,
    /// Size of the extrapolation correction relative to the result.
    pub tail_estimate: f64,
}

/// Panel nodes on `[0, U_2]` with `U_1` as an edge, mirrored to `[-U_2, U_2]`.
fn oracle_axis(u1: f64, u2: f64, opts: &OracleOptions) -> Vec<(f64, f64, bool)> {
    let (x, w) = gauss_legendre(opts.points_per_panel);
    let mut out = Vec::new();
    for (lo, hi, inner) in [(0.0, u1, true), (u1, u2, false)] {
        let panels = ((hi - lo) / opts.panel_width).ceil().max(1.0) as usize;
        let h = (hi - lo) / panels as f64;
        for j in 0..panels {
            let mid = lo + h * (j as f64 + 0.5);
            for (xi, wi) in x.iter().zip(&w) {
                let u = mid + 0.5 * h * xi;
                let wt = 0.5 * h * wi * u.cosh();
                out.push((u.sinh(), wt, inner));
                out.push((-u.sinh(), wt, inner));
            }
        }
    }
    out
}

/// Independent evaluation of the c-function matrix as an integral over `N̄`.
///
/// The integrals over the cubes of half-width `R` and `2R` are combined by
/// Richardson extrapolation in the tail exponents `R^{-2μ}` and `R^{-2ρ}`.
pub fn c_integral_oracle(params: &SpectralParams, opts: &OracleOptions) -> Result<OracleResult> {
    if !params.in_convergence_region() {
        return Err(Error::Divergence(format!("the N̄-integral diverges for Re mu = {} <= 0", params.mu.re)));
    }
    if !(opts.radius > 1.0) || opts.points_per_panel == 0 || !(opts.panel_width > 0.0) {
        return Err(Error::Domain(format!("invalid oracle options {opts:?}")));
    }
    let (n, p) = (params.n, params.p);
    let d = n - 1;
    let rho = params.rho();
    let mu = params.mu;
    let axis = oracle_axis(opts.radius.asinh(), (2.0 * opts.radius).asinh(), opts);
    let m = axis.len();
    let total = m.pow(d as u32);
    let dim = binom(n, p);

    struct Acc {
        num_in: DMatrix<Complex64>,
        num_out: DMatrix<Complex64>,
        z_in: f64,
        z_out: f64,
    }
    let zero = || Acc {
        num_in: DMatrix::zeros(dim, dim),
        num_out: DMatrix::zeros(dim, dim),
        z_in: 0.0,
        z_out: 0.0,
    };
    let chunk = m;
    let partials: Vec<Acc> = (0..total / chunk)
        .into_par_iter()
        .map(|c| {
            let mut acc = zero();
            let mut y = vec![0.0; d];
            for idx in c * chunk..(c + 1) * chunk {
                let mut rem = idx;
                let mut w = 1.0;
                let mut inner = true;
                for yi in y.iter_mut() {
                    let (v, wt, inn) = axis[rem % m];
                    rem /= m;
                    *yi = v;
                    w *= wt;
                    inner &= inn;
                }
                let (h, kappa) = iwasawa_kt(&nbar_matrix(&y));
                let zval = w * (-2.0 * rho * h).exp();
                let scal = (-(mu + rho) * h).exp() * w;
                let tau = compound(&kappa, p);
                for (dst, src) in acc.num_out.iter_mut().zip(tau.iter()) {
                    *dst += scal * *src;
                }
                acc.z_out += zval;
                if inner {
                    for (dst, src) in acc.num_in.iter_mut().zip(tau.iter()) {
                        *dst += scal * *src;
                    }
                    acc.z_in += zval;
                }
            }
            acc
        })
        .collect();
    let mut num_in = Vec::new();
    let mut num_out = Vec::new();
    let (mut z_in, mut z_out) = (Vec::new(), Vec::new());
    for a in partials {
        num_in.push(a.num_in);
        num_out.push(a.num_out);
        z_in.push(a.z_in);
        z_out.push(a.z_out);
    }
    let num_in = pairwise_sum(num_in).expect("non-empty grid");
    let num_out = pairwise_sum(num_out).expect("non-empty grid");
    let z_in = pairwise_sum(z_in).expect("non-empty grid");
    let z_out = pairwise_sum(z_out).expect("non-empty grid");

    let fnum = (mu * 2.0 * std::f64::consts::LN_2).exp() - 1.0;
    let num = &num_out + (&num_out - &num_in).map(|x| x / fnum);
    let fz = 2f64.powf(2.0 * rho) - 1.0;
    let z = z_out + (z_out - z_in) / fz;
    let matrix = num.map(|x| x / z);
    let naive = num_out.map(|x| x / z_out);
    let tail_estimate = (&matrix - &naive).norm() / matrix.norm().max(1e-300);

    let block = |q: usize| {
        let e = embed_matrix(n, p, q).map(cr);
        (e.transpose() * &matrix * &e).trace() / binom(n - 1, q) as f64
    };
    Ok(OracleResult { upper: block(p), lower: (p > 0).then(|| block(p - 1)), matrix, tail_estimate })
}
