//! Complex log-gamma, the Gauss hypergeometric function on the negative real
//! axis, and Jacobi functions `φ_ν^{(α,β)}` with their c-functions.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 671.0 / 128.0;
const LANCZOS_C0: f64 = 0.999_999_999_999_997_1;
const LANCZOS: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Nonpositive integer within `tol`, if any.
fn nonpositive_integer(z: Complex64, tol: f64) -> Option<i64> {
    let r = z.re.round();
    if r <= 0.0 && (z.re - r).abs() <= tol * (1.0 + r.abs()) && z.im.abs() <= tol {
        Some(r as i64)
    } else {
        None
    }
}

fn ln_gamma_right(z: Complex64) -> Complex64 {
    let mut ser = c(LANCZOS_C0);
    for (j, &cj) in LANCZOS.iter().enumerate() {
        ser += cj / (z + (j + 1) as f64);
    }
    let tmp = z + LANCZOS_G;
    (z + 0.5) * tmp.ln() - tmp - z.ln() + ser.ln() + LN_SQRT_2PI
}

/// `ln sin(π z)` without overflow for large `|Im z|`.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    if z.im < 0.0 {
        return ln_sin_pi(z.conj()).conj();
    }
    let w = z * PI;
    let i = Complex64::i();
    let e = (i * w * 2.0).exp();
    -i * w + ((e - 1.0) / (i * 2.0)).ln()
}

/// `ln Γ(z)` by the Lanczos approximation, with reflection for `Re z < 1/2`.
/// The imaginary part is continuous on `Re z >= 1/2`; on the reflected half-plane
/// it is determined modulo `2π`.
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("ln_gamma of non-finite argument {z}")));
    }
    if let Some(k) = nonpositive_integer(z, 1e-14) {
        return Err(Error::Pole(format!("{k}")));
    }
    if z.re >= 0.5 {
        Ok(ln_gamma_right(z))
    } else {
        Ok(c(PI.ln()) - ln_sin_pi(z) - ln_gamma_right(1.0 - z))
    }
}

pub fn gamma(z: Complex64) -> Result<Complex64> {
    Ok(ln_gamma(z)?.exp())
}

/// `1/Γ(z)`, which is zero at the poles of `Γ`.
pub fn rgamma(z: Complex64) -> Complex64 {
    match ln_gamma(z) {
        Ok(l) => (-l).exp(),
        Err(_) => Complex64::new(0.0, 0.0),
    }
}

const SERIES_MAX_TERMS: usize = 400_000;

/// Power series `Σ (a)_k (b)_k / ((c)_k k!) x^k`.
fn hyp_series(a: Complex64, b: Complex64, cc: Complex64, x: f64) -> Result<Complex64> {
    let mut sum = c(1.0);
    let mut term = c(1.0);
    let mut small = 0;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        term = term * (a + kf) * (b + kf) / ((cc + kf) * (kf + 1.0)) * x;
        sum += term;
        if term.norm() == 0.0 {
            return Ok(sum);
        }
        if term.norm() <= 1e-17 * sum.norm() {
            small += 1;
            if small >= 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::Accuracy(format!("hypergeometric series did not converge at x = {x}")))
}

/// `₂F₁(a, b; c; z)` for real `z <= 0`, through the Pfaff transformation to
/// `w = z/(z-1) ∈ [0, 1)` unless the series in `z` terminates.
pub fn gauss_2f1(a: Complex64, b: Complex64, cc: Complex64, z: f64) -> Result<Complex64> {
    if !z.is_finite() || z > 0.0 {
        return Err(Error::Domain(format!("gauss_2f1 requires finite z <= 0, got {z}")));
    }
    if nonpositive_integer(cc, 1e-14).is_some() {
        return Err(Error::Pole(format!("c = {cc} is a nonpositive integer")));
    }
    if z == 0.0 {
        return Ok(c(1.0));
    }
    if nonpositive_integer(a, 1e-14).is_some() || nonpositive_integer(b, 1e-14).is_some() {
        return hyp_series(a, b, cc, z);
    }
    let w = z / (z - 1.0);
    // F(a,b;c;z) = (1-z)^{-a} F(a, c-b; c; w), and symmetrically in a, b.
    let (a1, b1) = if nonpositive_integer(cc - a, 1e-14).is_some() { (b, a) } else { (a, b) };
    let terminating = nonpositive_integer(cc - b1, 1e-14).is_some();
    if w >= 1.0 - 1e-9 && !terminating {
        return Err(Error::Accuracy(format!("argument z = {z} too close to -infinity for the series")));
    }
    let pre = (-a1 * (1.0 - z).ln()).exp();
    Ok(pre * hyp_series(a1, cc - b1, cc, w)?)
}

/// Largest `t` at which [`jacobi_phi`] still sums the series directly.
const SERIES_SWITCH_T: f64 = 1.8;
const ODE_STEP: f64 = 2e-3;

fn jacobi_series_with_derivative(alpha: f64, beta: f64, nu: Complex64, t: f64) -> Result<(Complex64, Complex64)> {
    let rho = alpha + beta + 1.0;
    let inu = Complex64::i() * nu;
    let a = (inu + rho) * 0.5;
    let b = (-inu + rho) * 0.5;
    let cc = c(alpha + 1.0);
    let z = -t.sinh().powi(2);
    let f = gauss_2f1(a, b, cc, z)?;
    let df = a * b / cc * gauss_2f1(a + 1.0, b + 1.0, cc + 1.0, z)?;
    Ok((f, df * (-(2.0 * t).sinh())))
}

fn jacobi_rhs(alpha: f64, beta: f64, k2: Complex64, t: f64, y: Complex64, dy: Complex64) -> (Complex64, Complex64) {
    let drift = (2.0 * alpha + 1.0) / t.tanh() + (2.0 * beta + 1.0) * t.tanh();
    (dy, -dy * drift - y * k2)
}

fn rk4(alpha: f64, beta: f64, k2: Complex64, t0: f64, t1: f64, steps: usize, y0: (Complex64, Complex64)) -> Complex64 {
    let h = (t1 - t0) / steps as f64;
    let (mut y, mut dy) = y0;
    for s in 0..steps {
        let t = t0 + h * s as f64;
        let (a1, b1) = jacobi_rhs(alpha, beta, k2, t, y, dy);
        let (a2, b2) = jacobi_rhs(alpha, beta, k2, t + h / 2.0, y + a1 * (h / 2.0), dy + b1 * (h / 2.0));
        let (a3, b3) = jacobi_rhs(alpha, beta, k2, t + h / 2.0, y + a2 * (h / 2.0), dy + b2 * (h / 2.0));
        let (a4, b4) = jacobi_rhs(alpha, beta, k2, t + h, y + a3 * h, dy + b3 * h);
        y += (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (h / 6.0);
        dy += (b1 + b2 * 2.0 + b3 * 2.0 + b4) * (h / 6.0);
    }
    y
}

/// Jacobi function `φ_ν^{(α,β)}(t) = ₂F₁((iν+ρ)/2, (-iν+ρ)/2; α+1; -sinh² t)`, `ρ = α+β+1`.
///
/// For `t > 1.8` the series is summed at `t = 1.8` and continued by integrating
/// the Jacobi differential equation with Richardson-extrapolated RK4.
pub fn jacobi_phi(alpha: f64, beta: f64, nu: Complex64, t: f64) -> Result<Complex64> {
    if !t.is_finite() {
        return Err(Error::Domain(format!("jacobi_phi at non-finite t = {t}")));
    }
    if alpha <= -1.0 {
        return Err(Error::Domain(format!("jacobi_phi requires alpha > -1, got {alpha}")));
    }
    let t = t.abs();
    if t <= SERIES_SWITCH_T {
        return Ok(jacobi_series_with_derivative(alpha, beta, nu, t)?.0);
    }
    let start = jacobi_series_with_derivative(alpha, beta, nu, SERIES_SWITCH_T)?;
    let rho = alpha + beta + 1.0;
    let k2 = nu * nu + rho * rho;
    let steps = ((t - SERIES_SWITCH_T) / ODE_STEP).ceil().max(1.0) as usize;
    let coarse = rk4(alpha, beta, k2, SERIES_SWITCH_T, t, steps, start);
    let fine = rk4(alpha, beta, k2, SERIES_SWITCH_T, t, 2 * steps, start);
    Ok((fine * 16.0 - coarse) / 15.0)
}

/// `c_{α,β}(ν) = 2^{ρ-iν} Γ(α+1) Γ(iν) / (Γ((iν+ρ)/2) Γ((iν+α-β+1)/2))`.
pub fn jacobi_c(alpha: f64, beta: f64, nu: Complex64) -> Result<Complex64> {
    let rho = alpha + beta + 1.0;
    let inu = Complex64::i() * nu;
    let num = (rho - inu) * std::f64::consts::LN_2 + ln_gamma(c(alpha + 1.0))? + ln_gamma(inu)?;
    let d1 = (inu + rho) * 0.5;
    let d2 = (inu + alpha - beta + 1.0) * 0.5;
    Ok(num.exp() * rgamma(d1) * rgamma(d2))
}
