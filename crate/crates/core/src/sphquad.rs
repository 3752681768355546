//! Product quadrature on `S^{n-1} ≅ K/M` and integration over `K = SO(n)`.
//!
//! Points are parametrised by `b = (cos θ, sin θ · ω)` with `ω ∈ S^{n-2}`,
//! recursively, down to an azimuthal circle.

use crate::error::{Error, Result};
use crate::lorentz::{embed_m, expm, section_unchecked};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Values that can be accumulated by a quadrature rule.
pub trait QuadValue: Clone + Send {
    fn scaled(self, w: f64) -> Self;
    fn plus(self, other: Self) -> Self;
    fn distance(&self, other: &Self) -> f64;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn scaled(self, w: f64) -> Self {
        self * w
    }
    fn plus(self, other: Self) -> Self {
        self + other
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn scaled(self, w: f64) -> Self {
        self * w
    }
    fn plus(self, other: Self) -> Self {
        self + other
    }
    fn distance(&self, other: &Self) -> f64 {
        (self - other).norm()
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

macro_rules! matrix_quad_value {
    ($t:ty, $s:ty) => {
        impl QuadValue for $t {
            fn scaled(mut self, w: f64) -> Self {
                self.iter_mut().for_each(|x| *x *= <$s>::from(w));
                self
            }
            fn plus(self, other: Self) -> Self {
                self + other
            }
            fn distance(&self, other: &Self) -> f64 {
                (self - other).norm()
            }
            fn magnitude(&self) -> f64 {
                self.norm()
            }
        }
    };
}

matrix_quad_value!(DVector<f64>, f64);
matrix_quad_value!(DMatrix<f64>, f64);
matrix_quad_value!(DVector<Complex64>, Complex64);
matrix_quad_value!(DMatrix<Complex64>, Complex64);

/// Deterministic pairwise summation.
pub fn pairwise_sum<V: QuadValue>(mut v: Vec<V>) -> Option<V> {
    while v.len() > 1 {
        let mut next = Vec::with_capacity(v.len().div_ceil(2));
        let mut it = v.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a.plus(b)),
                None => next.push(a),
            }
        }
        v = next;
    }
    v.pop()
}

/// Weighted point set on `S^{n-1}` with weights summing to one.
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    pub n: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    /// `s(b)` for every node.
    pub sections: Vec<DMatrix<f64>>,
    /// Total polynomial degree integrated exactly, when known.
    pub degree: Option<usize>,
}

/// Parameters of the rule concentrated near `b = e_1` at scale `e^{-t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocusedRule {
    /// Gauss-Legendre points per graded panel in the polar angle.
    pub panel_points: usize,
    /// Level of the product rule on the remaining `S^{n-2}`.
    pub level: usize,
}

impl Default for FocusedRule {
    fn default() -> Self {
        Self { panel_points: 10, level: 4 }
    }
}

/// Gauss rule for `∫_{-1}^{1} g(x) (1-x^2)^a dx` by Golub-Welsch.
pub fn gauss_jacobi_symmetric(m: usize, a: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1 && a > -1.0);
    let mut jm = DMatrix::<f64>::zeros(m, m);
    for k in 1..m {
        let kf = k as f64;
        let b2 = kf * (kf + 2.0 * a) / ((2.0 * kf + 2.0 * a + 1.0) * (2.0 * kf + 2.0 * a - 1.0));
        jm[(k, k - 1)] = b2.sqrt();
        jm[(k - 1, k)] = b2.sqrt();
    }
    let mu0 = beta_symmetric(a);
    let eig = SymmetricEigen::new(jm);
    let mut pairs: Vec<(f64, f64)> =
        (0..m).map(|i| (eig.eigenvalues[i], mu0 * eig.eigenvectors[(0, i)].powi(2))).collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    // symmetrise against round-off in the eigensolver
    for i in 0..m / 2 {
        let j = m - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        pairs[i] = (-x, w);
        pairs[j] = (x, w);
    }
    if m % 2 == 1 {
        pairs[m / 2].0 = 0.0;
    }
    pairs.into_iter().unzip()
}

/// `∫_{-1}^{1} (1-x^2)^a dx = √π Γ(a+1)/Γ(a+3/2)` for half-integer or integer `a`.
fn beta_symmetric(a: f64) -> f64 {
    let lg = |x: f64| crate::specfun::ln_gamma(Complex64::new(x, 0.0)).map(|v| v.re).unwrap_or(0.0);
    (0.5 * PI.ln() + lg(a + 1.0) - lg(a + 1.5)).exp()
}

pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_jacobi_symmetric(m, 0.0)
}

/// Nodes and unnormalised weights on `S^{d-1} ⊂ R^d`.
fn product_rule(d: usize, level: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    if d == 2 {
        let m = 2 * (level + 1);
        let h = 2.0 * PI / m as f64;
        let nodes = (0..m).map(|j| {
            let phi = h * (j as f64 + 0.5);
            vec![phi.cos(), phi.sin()]
        });
        return (nodes.collect(), vec![h; m]);
    }
    let (xs, ws) = gauss_jacobi_symmetric(level + 1, (d as f64 - 3.0) / 2.0);
    let (sub_nodes, sub_w) = product_rule(d - 1, level);
    let polar: Vec<(f64, f64)> = xs.iter().map(|&x| (x, (1.0 - x * x).max(0.0).sqrt())).collect();
    combine(&polar, &ws, &sub_nodes, &sub_w)
}

fn combine(polar: &[(f64, f64)], pw: &[f64], sub_nodes: &[Vec<f64>], sub_w: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut nodes = Vec::with_capacity(polar.len() * sub_nodes.len());
    let mut weights = Vec::with_capacity(nodes.capacity());
    for (&(c, s), &w) in polar.iter().zip(pw) {
        for (om, &v) in sub_nodes.iter().zip(sub_w) {
            let mut b = Vec::with_capacity(om.len() + 1);
            b.push(c);
            b.extend(om.iter().map(|x| s * x));
            nodes.push(b);
            weights.push(w * v);
        }
    }
    (nodes, weights)
}

fn finish(n: usize, nodes: Vec<Vec<f64>>, weights: Vec<f64>, degree: Option<usize>) -> SphereQuadrature {
    let total: f64 = weights.iter().sum();
    let weights = weights.into_iter().map(|w| w / total).collect();
    let sections = nodes.iter().map(|b| section_unchecked(b)).collect();
    SphereQuadrature { n, nodes, weights, sections, degree }
}

const MAX_PANEL: f64 = 0.5;

/// Panel edges on `[0, π]`: geometric `0, a, 2a, 4a, ...` while the panels are
/// narrower than `MAX_PANEL`, uniform afterwards.
fn graded_edges(a: f64) -> Vec<f64> {
    let mut edges = vec![0.0];
    let mut e = a.min(MAX_PANEL);
    while 2.0 * e < PI && e <= MAX_PANEL {
        edges.push(e);
        e *= 2.0;
    }
    let last = edges[edges.len() - 1];
    let rest = ((PI - last) / MAX_PANEL).ceil().max(1.0) as usize;
    for j in 1..=rest {
        edges.push(last + (PI - last) * j as f64 / rest as f64);
    }
    edges
}

fn composite_gl(edges: &[f64], m: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(m);
    let mut th = Vec::new();
    let mut wt = Vec::new();
    for e in edges.windows(2) {
        let (mid, half) = (0.5 * (e[0] + e[1]), 0.5 * (e[1] - e[0]));
        for (xi, wi) in x.iter().zip(&w) {
            th.push(mid + half * xi);
            wt.push(half * wi);
        }
    }
    (th, wt)
}

impl SphereQuadrature {
    /// Product Gauss rule exact for polynomials of total degree `2·level + 1`.
    pub fn build(n: usize, level: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("sphere quadrature needs n >= 2, got {n}")));
        }
        let (nodes, weights) = product_rule(n, level);
        Ok(finish(n, nodes, weights, Some(2 * level + 1)))
    }

    /// Rule whose polar angle around `e_1` is resolved down to scale `2 e^{-t}`.
    pub fn focused(n: usize, rule: &FocusedRule, t: f64) -> Result<Self> {
        if n < 2 || rule.panel_points == 0 {
            return Err(Error::Domain(format!("invalid focused rule {rule:?} for n = {n}")));
        }
        let a = (2.0 * (-t.abs()).exp()).min(PI);
        let (th, wt) = composite_gl(&graded_edges(a), rule.panel_points);
        if n == 2 {
            let mut nodes = Vec::with_capacity(2 * th.len());
            let mut weights = Vec::with_capacity(2 * th.len());
            for (&phi, &w) in th.iter().zip(&wt) {
                for sign in [1.0, -1.0] {
                    nodes.push(vec![phi.cos(), sign * phi.sin()]);
                    weights.push(w);
                }
            }
            return Ok(finish(n, nodes, weights, None));
        }
        let polar: Vec<(f64, f64)> = th.iter().map(|&x| (x.cos(), x.sin())).collect();
        let pw: Vec<f64> = th.iter().zip(&wt).map(|(&x, &w)| w * x.sin().powi(n as i32 - 2)).collect();
        let (sub_nodes, sub_w) = product_rule(n - 1, rule.level);
        let (nodes, weights) = combine(&polar, &pw, &sub_nodes, &sub_w);
        Ok(finish(n, nodes, weights, None))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `∫_{S^{n-1}} f(b) db` with normalised measure.
    pub fn integrate<V, F>(&self, f: F) -> V
    where
        V: QuadValue,
        F: Fn(&[f64]) -> V + Sync,
    {
        let vals: Vec<V> = (0..self.len())
            .into_par_iter()
            .with_min_len(32)
            .map(|i| f(&self.nodes[i]).scaled(self.weights[i]))
            .collect();
        pairwise_sum(vals).expect("non-empty quadrature")
    }

    /// `∫_K F(k) dk` for right-`M`-invariant `F`, evaluated as `∫ F(s(b)) db`.
    ///
    /// In debug builds the invariance is spot-checked at two nodes.
    pub fn integrate_over_k<V, F>(&self, f: F, right_m_invariant: bool) -> Result<V>
    where
        V: QuadValue,
        F: Fn(&DMatrix<f64>) -> V + Sync,
    {
        if !right_m_invariant {
            return Err(Error::Contract(
                "integration over K through K/M requires a right-M-invariant integrand".into(),
            ));
        }
        let vals: Vec<V> = (0..self.len())
            .into_par_iter()
            .with_min_len(32)
            .map(|i| f(&self.sections[i]))
            .collect();
        if cfg!(debug_assertions) && self.n >= 3 {
            self.check_m_invariance(&f, &vals)?;
        }
        let weighted = vals.into_iter().zip(&self.weights).map(|(v, &w)| v.scaled(w)).collect();
        Ok(pairwise_sum(weighted).expect("non-empty quadrature"))
    }

    fn check_m_invariance<V, F>(&self, f: &F, vals: &[V]) -> Result<()>
    where
        V: QuadValue,
        F: Fn(&DMatrix<f64>) -> V,
    {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6d5f_696e_76);
        for &i in &[0, self.len() / 2] {
            let m = random_rotation(self.n - 1, &mut rng);
            let moved = f(&(&self.sections[i] * embed_m(&m)));
            let d = moved.distance(&vals[i]);
            // integrands built from quadrature-evaluated fields are invariant only to that accuracy
            if d > 1e-6 * (1.0 + vals[i].magnitude()) {
                return Err(Error::Contract(format!(
                    "integrand is not right-M-invariant (deviation {d:.3e} at node {i})"
                )));
            }
        }
        Ok(())
    }
}

/// Rotation `exp(X)` for a random skew-symmetric `X`.
pub fn random_rotation<R: Rng>(d: usize, rng: &mut R) -> DMatrix<f64> {
    let mut x = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i + 1..d {
            let v = rng.gen_range(-PI..PI);
            x[(i, j)] = v;
            x[(j, i)] = -v;
        }
    }
    expm(&x)
}

/// `count` Haar-random rotations from a ChaCha8 stream seeded with `seed`.
pub fn seeded_rotations(d: usize, count: usize, seed: u64) -> Vec<DMatrix<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_rotation(d, &mut rng)).collect()
}

fn double_factorial(k: i64) -> f64 {
    let mut r = 1.0;
    let mut j = k;
    while j > 1 {
        r *= j as f64;
        j -= 2;
    }
    r
}

/// Normalised `∫_{S^{n-1}} b^α`: `Π (α_i - 1)!! / (n (n+2) ... (n + |α| - 2))` for even `α`.
pub fn sphere_moment(alpha: &[usize]) -> f64 {
    if alpha.iter().any(|a| a % 2 == 1) {
        return 0.0;
    }
    let n = alpha.len();
    let total: usize = alpha.iter().sum();
    let num: f64 = alpha.iter().map(|&a| double_factorial(a as i64 - 1)).product();
    let den: f64 = (0..total / 2).map(|j| (n + 2 * j) as f64).product();
    num / den
}
