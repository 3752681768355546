use crate::error::{Error, Result};
use num_complex::Complex64;

/// Spectral data `(n, p, q, mu)` with `mu = i lambda`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParams {
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub mu: Complex64,
}

impl SpectralParams {
    /// Validates `n >= 2`, `0 <= p < (n-1)/2` and `q in {p-1, p}`.
    pub fn new(n: usize, p: usize, q: usize, mu: Complex64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("dimension n = {n} must be at least 2")));
        }
        if 2 * p + 1 >= n {
            return Err(Error::Domain(format!(
                "form degree p = {p} must satisfy p < (n-1)/2 for n = {n}"
            )));
        }
        if !(q == p || q + 1 == p) {
            return Err(Error::Domain(format!("q = {q} must equal p or p-1 (p = {p})")));
        }
        if !mu.re.is_finite() || !mu.im.is_finite() {
            return Err(Error::Domain("mu must be finite".into()));
        }
        Ok(Self { n, p, q, mu })
    }

    pub fn rho(&self) -> f64 {
        (self.n as f64 - 1.0) / 2.0
    }

    /// `lambda = -i mu`.
    pub fn lambda(&self) -> Complex64 {
        Complex64::new(self.mu.im, -self.mu.re)
    }

    pub fn in_convergence_region(&self) -> bool {
        self.mu.re > 0.0
    }

    /// The normalising constant `c_{p,q}` making the Poisson transform isometric.
    pub fn cpq(&self) -> f64 {
        cpq(self.n, self.p, self.q)
    }

    /// Point `mu = rho - p + 1` (only for `q = p - 1`) where `c_{p-1}` vanishes.
    pub fn is_excluded(&self) -> bool {
        self.q + 1 == self.p && (self.mu - Complex64::new(self.rho() - self.p as f64 + 1.0, 0.0)).norm() < 1e-12
    }

    pub fn with_q(&self, q: usize) -> Result<Self> {
        Self::new(self.n, self.p, q, self.mu)
    }

    pub fn with_mu(&self, mu: Complex64) -> Result<Self> {
        Self::new(self.n, self.p, self.q, mu)
    }
}

/// `c_{p,q}` with `c_{p,p}^2 = n/(n-p)` and `c_{p,p-1}^2 = n/p`.
pub fn cpq(n: usize, p: usize, q: usize) -> f64 {
    let (n, pf) = (n as f64, p as f64);
    if q == p {
        (n / (n - pf)).sqrt()
    } else {
        (n / pf).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let mu = Complex64::new(1.0, 0.0);
        assert!(SpectralParams::new(4, 1, 1, mu).is_ok());
        assert!(SpectralParams::new(4, 1, 0, mu).is_ok());
        assert!(SpectralParams::new(4, 2, 2, mu).is_err());
        assert!(SpectralParams::new(4, 0, 1, mu).is_err());
        assert!(SpectralParams::new(1, 0, 0, mu).is_err());
        assert!(SpectralParams::new(6, 2, 1, mu).is_ok());
    }

    #[test]
    fn excluded_point() {
        let p = SpectralParams::new(4, 1, 0, Complex64::new(1.5, 0.0)).unwrap();
        assert!(p.is_excluded());
        assert!(!p.with_q(1).unwrap().is_excluded());
    }

    #[test]
    fn cpq_values() {
        assert!((cpq(4, 1, 1) - (4.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((cpq(4, 1, 0) - 2.0).abs() < 1e-15);
        assert!((cpq(5, 0, 0) - 1.0).abs() < 1e-15);
    }
}
