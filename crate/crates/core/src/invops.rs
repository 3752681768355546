//! Invariant differential operators `D`, `D*` and the Casimir acting on
//! `τ_p`-covariant fields, by finite differences along one-parameter subgroups.

use crate::error::{Error, Result};
use crate::exterior::{binom, exterior_matrix, interior_matrix, to_complex, PForm};
use crate::lorentz::expm;
use crate::params::SpectralParams;
use crate::poisson::PoissonField;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

/// A `Λ^p C^n`-valued function on `G`, given through `(n+1)×(n+1)` matrices.
pub trait FormField: Sync {
    fn n(&self) -> usize;
    fn degree(&self) -> usize;
    fn eval_at(&self, g: &DMatrix<f64>) -> Result<DVector<Complex64>>;
}

impl FormField for PoissonField {
    fn n(&self) -> usize {
        self.params.n
    }
    fn degree(&self) -> usize {
        self.params.p
    }
    fn eval_at(&self, g: &DMatrix<f64>) -> Result<DVector<Complex64>> {
        self.eval_raw(g)
    }
}

/// Field given by a closure.
pub struct FnField<F> {
    pub n: usize,
    pub p: usize,
    pub f: F,
}

impl<F> FormField for FnField<F>
where
    F: Fn(&DMatrix<f64>) -> DVector<Complex64> + Sync,
{
    fn n(&self) -> usize {
        self.n
    }
    fn degree(&self) -> usize {
        self.p
    }
    fn eval_at(&self, g: &DMatrix<f64>) -> Result<DVector<Complex64>> {
        Ok((self.f)(g))
    }
}

/// Finite-difference steps. `first` is used for `D`, `D*` and for both layers of
/// the nested second-order operators; `second` for the Casimir.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Steps {
    pub first: f64,
    pub second: f64,
}

impl Default for Steps {
    fn default() -> Self {
        Self { first: 1e-3, second: 5e-3 }
    }
}

/// `X_j = E_{j,n+1} + E_{n+1,j}` spanning `𝔭` and `Y_{ij} = E_{ij} - E_{ji}` spanning `𝔨`.
#[derive(Debug, Clone)]
pub struct LieBasis {
    pub n: usize,
    pub p_basis: Vec<DMatrix<f64>>,
    pub k_basis: Vec<DMatrix<f64>>,
    /// `(i, j)` with `i < j` (0-based) for each `k_basis` entry.
    pub k_pairs: Vec<(usize, usize)>,
}

impl LieBasis {
    pub fn new(n: usize) -> Self {
        let p_basis = (0..n)
            .map(|j| {
                let mut x = DMatrix::zeros(n + 1, n + 1);
                x[(j, n)] = 1.0;
                x[(n, j)] = 1.0;
                x
            })
            .collect();
        let mut k_basis = Vec::new();
        let mut k_pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let mut y = DMatrix::zeros(n + 1, n + 1);
                y[(i, j)] = 1.0;
                y[(j, i)] = -1.0;
                k_basis.push(y);
                k_pairs.push((i, j));
            }
        }
        Self { n, p_basis, k_basis, k_pairs }
    }

    /// `B(X, Y) = tr(XY) / 2`.
    pub fn killing(x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
        (x * y).trace() / 2.0
    }
}

fn shifted(field: &dyn FormField, g: &DMatrix<f64>, x: &DMatrix<f64>, s: f64) -> Result<DVector<Complex64>> {
    field.eval_at(&(g * expm(&(x * s))))
}

fn central(field: &dyn FormField, g: &DMatrix<f64>, x: &DMatrix<f64>, order: u8, h: f64, f0: Option<&DVector<Complex64>>) -> Result<DVector<Complex64>> {
    let plus = shifted(field, g, x, h)?;
    let minus = shifted(field, g, x, -h)?;
    Ok(match order {
        1 => (plus - minus) / Complex64::new(2.0 * h, 0.0),
        _ => {
            let f0 = f0.expect("centre value");
            (plus - f0 * Complex64::new(2.0, 0.0) + minus) / Complex64::new(h * h, 0.0)
        }
    })
}

fn derivative_raw(field: &dyn FormField, g: &DMatrix<f64>, x: &DMatrix<f64>, order: u8, h: f64, f0: Option<&DVector<Complex64>>) -> Result<DVector<Complex64>> {
    let coarse = central(field, g, x, order, h, f0)?;
    let fine = central(field, g, x, order, h / 2.0, f0)?;
    Ok((fine * Complex64::new(4.0, 0.0) - coarse) / Complex64::new(3.0, 0.0))
}

fn check_step(h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Domain(format!("finite-difference step must be positive, got {h}")));
    }
    Ok(())
}

/// `d/ds F(g exp(sX))` (order 1) or `d²/ds²` (order 2) at `s = 0`: central
/// differences at `h` and `h/2` combined by one Richardson step.
pub fn directional_derivative(field: &dyn FormField, g: &DMatrix<f64>, x: &DMatrix<f64>, order: u8, h: f64) -> Result<DVector<Complex64>> {
    check_step(h)?;
    match order {
        1 => derivative_raw(field, g, x, 1, h, None),
        2 => {
            let f0 = field.eval_at(g)?;
            derivative_raw(field, g, x, 2, h, Some(&f0))
        }
        _ => Err(Error::Domain(format!("derivative order must be 1 or 2, got {order}"))),
    }
}

/// `(X_j F)(g)` for every `j`.
pub fn gradient(field: &dyn FormField, g: &DMatrix<f64>, h: f64) -> Result<Vec<DVector<Complex64>>> {
    check_step(h)?;
    let basis = LieBasis::new(field.n());
    basis.p_basis.par_iter().map(|x| derivative_raw(field, g, x, 1, h, None)).collect()
}

fn d_from_gradient(n: usize, p: usize, grad: &[DVector<Complex64>]) -> DVector<Complex64> {
    let mut acc = DVector::zeros(binom(n, p + 1));
    for (j, v) in grad.iter().enumerate() {
        acc += to_complex(&exterior_matrix(n, p, j + 1)) * v;
    }
    acc
}

fn dstar_from_gradient(n: usize, p: usize, grad: &[DVector<Complex64>]) -> DVector<Complex64> {
    let mut acc = DVector::zeros(binom(n, p - 1));
    for (j, v) in grad.iter().enumerate() {
        acc -= to_complex(&interior_matrix(n, p, j + 1)) * v;
    }
    acc
}

fn check_d(field: &dyn FormField) -> Result<()> {
    if field.degree() >= field.n() {
        return Err(Error::Degree(format!("D is zero on top-degree forms (p = {})", field.degree())));
    }
    Ok(())
}

fn check_dstar(field: &dyn FormField) -> Result<()> {
    if field.degree() == 0 {
        return Err(Error::Degree("D* is undefined on 0-forms".into()));
    }
    Ok(())
}

/// `DF = Σ_j ε_{e_j} (X_j F)`.
pub fn apply_d(field: &dyn FormField, g: &DMatrix<f64>, h: f64) -> Result<PForm> {
    check_d(field)?;
    let (n, p) = (field.n(), field.degree());
    PForm::new(n, p + 1, d_from_gradient(n, p, &gradient(field, g, h)?))
}

/// `D*F = -Σ_j ι_{e_j} (X_j F)`.
pub fn apply_dstar(field: &dyn FormField, g: &DMatrix<f64>, h: f64) -> Result<PForm> {
    check_dstar(field)?;
    let (n, p) = (field.n(), field.degree());
    PForm::new(n, p - 1, dstar_from_gradient(n, p, &gradient(field, g, h)?))
}

/// `𝒞F = Σ_j X_j² F - Σ Y² F`.
pub fn apply_casimir(field: &dyn FormField, g: &DMatrix<f64>, h: f64) -> Result<PForm> {
    check_step(h)?;
    let basis = LieBasis::new(field.n());
    let f0 = field.eval_at(g)?;
    let dirs: Vec<(&DMatrix<f64>, f64)> =
        basis.p_basis.iter().map(|x| (x, 1.0)).chain(basis.k_basis.iter().map(|y| (y, -1.0))).collect();
    let terms: Vec<DVector<Complex64>> = dirs
        .par_iter()
        .map(|(x, sign)| derivative_raw(field, g, x, 2, h, Some(&f0)).map(|v| v * Complex64::new(*sign, 0.0)))
        .collect::<Result<_>>()?;
    let mut acc = DVector::zeros(f0.len());
    for t in terms {
        acc += t;
    }
    PForm::new(field.n(), field.degree(), acc)
}

#[derive(Clone, Copy)]
enum FirstOrder {
    D,
    DStar,
}

/// `DF` or `D*F` viewed as a field in its own right.
struct Derived<'a> {
    inner: &'a dyn FormField,
    op: FirstOrder,
    h: f64,
}

impl FormField for Derived<'_> {
    fn n(&self) -> usize {
        self.inner.n()
    }
    fn degree(&self) -> usize {
        match self.op {
            FirstOrder::D => self.inner.degree() + 1,
            FirstOrder::DStar => self.inner.degree() - 1,
        }
    }
    fn eval_at(&self, g: &DMatrix<f64>) -> Result<DVector<Complex64>> {
        let form = match self.op {
            FirstOrder::D => apply_d(self.inner, g, self.h)?,
            FirstOrder::DStar => apply_dstar(self.inner, g, self.h)?,
        };
        Ok(form.coeffs)
    }
}

/// `(DD*F, D*DF)` at `g`, both layers with step `h`.
pub fn second_order_pair(field: &dyn FormField, g: &DMatrix<f64>, h: f64) -> Result<(PForm, PForm)> {
    check_dstar(field)?;
    check_d(field)?;
    let dstar_f = Derived { inner: field, op: FirstOrder::DStar, h };
    let d_f = Derived { inner: field, op: FirstOrder::D, h };
    let dd_star = apply_d(&dstar_f, g, h)?;
    let d_star_d = apply_dstar(&d_f, g, h)?;
    Ok((dd_star, d_star_d))
}

/// Casimir eigenvalue `-(λ² + (ρ - q)²) = μ² - (ρ - q)²` on the image of `𝒫^p_{q,λ}`.
pub fn casimir_eigenvalue(params: &SpectralParams) -> Complex64 {
    let shift = params.rho() - params.q as f64;
    params.mu * params.mu - shift * shift
}

/// Eigenvalues `(dd*, d*d)` on the image of `𝒫^p_{q,λ}`: `λ² + (ρ-q)²` on one
/// of them and zero on the other.
pub fn second_order_eigenvalues(params: &SpectralParams) -> (Complex64, Complex64) {
    let e = -casimir_eigenvalue(params);
    if params.q == params.p {
        (Complex64::new(0.0, 0.0), e)
    } else {
        (e, Complex64::new(0.0, 0.0))
    }
}

/// Relative residuals of the eigen-equations at one point. Every residual is
/// divided by `max(1, |eigenvalue|) · max(|F(g)|, |∇F(g)|)`, where `∇F` stacks
/// the `X_j F`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenReport {
    /// `|D*F|` when `q = p`, `|DF|` when `q = p - 1`.
    pub first_order: f64,
    pub casimir: f64,
    pub dd_star: f64,
    pub d_star_d: f64,
    pub scale: f64,
}

impl EigenReport {
    pub fn second_order(&self) -> f64 {
        self.dd_star.max(self.d_star_d)
    }
}

/// Needs `p >= 1`; for `p = 0` use `casimir_residual`.
pub fn eigen_report(field: &PoissonField, g: &DMatrix<f64>, steps: Steps) -> Result<EigenReport> {
    let params = &field.params;
    let (n, p) = (params.n, params.p);
    check_dstar(field)?;
    let f0 = field.eval_at(g)?;
    let grad = gradient(field, g, steps.first)?;
    let grad_norm = grad.iter().map(|v| v.norm_squared()).sum::<f64>().sqrt();
    let scale = f0.norm().max(grad_norm);
    let first = if params.q == p { dstar_from_gradient(n, p, &grad) } else { d_from_gradient(n, p, &grad) };
    let lam = casimir_eigenvalue(params);
    let cas = apply_casimir(field, g, steps.second)?;
    let cas_res = (cas.coeffs - &f0 * lam).norm() / (scale * lam.norm().max(1.0));
    let (e_dds, e_dsd) = second_order_eigenvalues(params);
    let (dds, dsd) = second_order_pair(field, g, steps.first)?;
    let denom2 = scale * e_dds.norm().max(e_dsd.norm()).max(1.0);
    Ok(EigenReport {
        first_order: first.norm() / scale,
        casimir: cas_res,
        dd_star: (dds.coeffs - &f0 * e_dds).norm() / denom2,
        d_star_d: (dsd.coeffs - &f0 * e_dsd).norm() / denom2,
        scale,
    })
}

/// `|𝒞F - eF| / (max(1, |e|) |F|)` at `g`.
pub fn casimir_residual(field: &PoissonField, g: &DMatrix<f64>, h: f64) -> Result<f64> {
    let f0 = field.eval_at(g)?;
    let lam = casimir_eigenvalue(&field.params);
    let cas = apply_casimir(field, g, h)?;
    Ok((cas.coeffs - &f0 * lam).norm() / (f0.norm().max(f64::MIN_POSITIVE) * lam.norm().max(1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lorentz::{embed_k, geodesic_matrix, iwasawa_kt};

    #[test]
    fn basis_is_normalized() {
        for n in 2..6 {
            let b = LieBasis::new(n);
            assert_eq!(b.p_basis.len(), n);
            assert_eq!(b.k_basis.len(), n * (n - 1) / 2);
            for (i, x) in b.p_basis.iter().enumerate() {
                for (j, y) in b.p_basis.iter().enumerate() {
                    assert_eq!(LieBasis::killing(x, y), if i == j { 1.0 } else { 0.0 });
                    // [X_i, X_j] lies in 𝔨: antisymmetric with zero last row
                    let br = x * y - y * x;
                    assert_eq!(&br + br.transpose(), DMatrix::zeros(n + 1, n + 1));
                    assert!(br.row(n).iter().all(|v| *v == 0.0));
                }
            }
            for (i, x) in b.k_basis.iter().enumerate() {
                for (j, y) in b.k_basis.iter().enumerate() {
                    assert_eq!(-LieBasis::killing(x, y), if i == j { 1.0 } else { 0.0 });
                }
            }
        }
    }

    fn exp_h_field(c: f64) -> FnField<impl Fn(&DMatrix<f64>) -> DVector<Complex64> + Sync> {
        FnField { n: 3, p: 0, f: move |g: &DMatrix<f64>| DVector::from_element(1, Complex64::new((c * iwasawa_kt(g).0).exp(), 0.0)) }
    }

    #[test]
    fn derivative_of_exponential_in_h() {
        let (c, t) = (0.7, 1.3);
        let field = exp_h_field(c);
        let g = geodesic_matrix(3, t);
        let x = &LieBasis::new(3).p_basis[0];
        let d = directional_derivative(&field, &g, x, 1, 1e-3).unwrap();
        let want = c * (c * t).exp();
        assert!((d[0].re - want).abs() < 1e-9 * want);
        let d2 = directional_derivative(&field, &g, x, 2, 5e-3).unwrap();
        assert!((d2[0].re - c * want).abs() < 1e-7 * want);
    }

    #[test]
    fn constant_field_has_zero_derivatives() {
        let field = FnField { n: 4, p: 1, f: |_: &DMatrix<f64>| DVector::from_element(4, Complex64::new(1.0, -2.0)) };
        let g = geodesic_matrix(4, 0.4);
        assert!(apply_d(&field, &g, 1e-3).unwrap().norm() < 1e-12);
        assert!(apply_dstar(&field, &g, 1e-3).unwrap().norm() < 1e-12);
    }

    #[test]
    fn richardson_order_probe() {
        let field = FnField {
            n: 3,
            p: 0,
            f: |g: &DMatrix<f64>| DVector::from_element(1, Complex64::new((g[(0, 3)] + 0.3 * g[(1, 3)] - 0.2 * g[(2, 1)]).sin(), 0.0)),
        };
        let g = embed_k(&crate::lorentz::expm(&LieBasis::new(3).k_basis[1].view((0, 0), (3, 3)).into_owned())).matrix() * geodesic_matrix(3, 0.6);
        let x = &LieBasis::new(3).p_basis[0];
        let reference = directional_derivative(&field, &g, x, 1, 1e-3).unwrap()[0].re;
        let e1 = (directional_derivative(&field, &g, x, 1, 0.2).unwrap()[0].re - reference).abs();
        let e2 = (directional_derivative(&field, &g, x, 1, 0.1).unwrap()[0].re - reference).abs();
        assert!(e1 / e2 >= 8.0, "ratio {} ({e1}, {e2}, {reference})", e1 / e2);
    }

    #[test]
    fn degree_errors() {
        let field = FnField { n: 3, p: 0, f: |_: &DMatrix<f64>| DVector::from_element(1, Complex64::new(1.0, 0.0)) };
        let g = DMatrix::identity(4, 4);
        assert!(matches!(apply_dstar(&field, &g, 1e-3), Err(Error::Degree(_))));
        assert!(matches!(second_order_pair(&field, &g, 1e-3), Err(Error::Degree(_))));
        assert!(directional_derivative(&field, &g, &LieBasis::new(3).p_basis[0], 3, 1e-3).is_err());
        assert!(directional_derivative(&field, &g, &LieBasis::new(3).p_basis[0], 1, 0.0).is_err());
    }

    #[test]
    fn eigenvalue_bookkeeping() {
        let par = SpectralParams::new(4, 1, 1, Complex64::new(1.5, 0.0)).unwrap();
        // ρ - q = 1/2
        assert!((casimir_eigenvalue(&par) - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        let (a, b) = second_order_eigenvalues(&par);
        assert_eq!(a, Complex64::new(0.0, 0.0));
        assert!((b + Complex64::new(2.0, 0.0)).norm() < 1e-15);
        // harmonic scalar case: μ = ρ, q = 0
        let scalar = SpectralParams::new(4, 0, 0, Complex64::new(1.5, 0.0)).unwrap();
        assert_eq!(casimir_eigenvalue(&scalar), Complex64::new(0.0, 0.0));
    }
}
