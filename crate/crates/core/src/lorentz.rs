//! The group `G = SO_0(n,1)` preserving `x_1^2 + ... + x_n^2 - x_{n+1}^2`,
//! with `K = SO(n)`, `A = {a_t}` and `N` as in the Iwasawa decomposition `G = KAN`.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// `(n+1) x (n+1)` matrix in `SO_0(n,1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    mat: DMatrix<f64>,
}

/// `g = k a_t n_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct IwasawaTriple {
    pub k: DMatrix<f64>,
    pub t: f64,
    pub y: Vec<f64>,
}

pub fn j_matrix(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::identity(n + 1, n + 1);
    j[(n, n)] = -1.0;
    j
}

impl GroupElement {
    /// Validates `g^T J g = J`, `det g = 1` and `g_{n+1,n+1} > 0`.
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        let m = mat.nrows();
        if !mat.is_square() || m < 3 {
            return Err(Error::Domain(format!("expected a square matrix of size >= 3, got {:?}", mat.shape())));
        }
        let n = m - 1;
        let j = j_matrix(n);
        let scale = mat.amax().max(1.0);
        let dev = (mat.transpose() * &j * &mat - &j).amax();
        if dev > 1e-9 * scale * scale {
            return Err(Error::Domain(format!("matrix does not preserve the Lorentz form (deviation {dev:.3e})")));
        }
        if mat[(n, n)] <= 0.0 {
            return Err(Error::Domain("matrix reverses time orientation".into()));
        }
        if mat.determinant() < 0.0 {
            return Err(Error::Domain("matrix has determinant -1".into()));
        }
        Ok(Self { mat })
    }

    pub(crate) fn from_raw(mat: DMatrix<f64>) -> Self {
        Self { mat }
    }

    pub fn identity(n: usize) -> Self {
        Self { mat: DMatrix::identity(n + 1, n + 1) }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    pub fn n(&self) -> usize {
        self.mat.nrows() - 1
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        Self { mat: &self.mat * &other.mat }
    }

    /// `g^{-1} = J g^T J`.
    pub fn inverse(&self) -> GroupElement {
        Self { mat: lorentz_inverse(&self.mat) }
    }
}

pub(crate) fn lorentz_inverse(g: &DMatrix<f64>) -> DMatrix<f64> {
    let n = g.nrows() - 1;
    let mut inv = g.transpose();
    for i in 0..n {
        inv[(i, n)] = -inv[(i, n)];
        inv[(n, i)] = -inv[(n, i)];
    }
    inv
}

/// `a_t`: hyperbolic rotation in the `(e_1, e_{n+1})` plane.
pub fn geodesic(n: usize, t: f64) -> GroupElement {
    GroupElement { mat: geodesic_matrix(n, t) }
}

pub(crate) fn geodesic_matrix(n: usize, t: f64) -> DMatrix<f64> {
    let mut a = DMatrix::identity(n + 1, n + 1);
    let (c, s) = (t.cosh(), t.sinh());
    a[(0, 0)] = c;
    a[(n, n)] = c;
    a[(0, n)] = s;
    a[(n, 0)] = s;
    a
}

fn nilpotent_generator(y: &[f64]) -> DMatrix<f64> {
    let n = y.len() + 1;
    let mut x = DMatrix::zeros(n + 1, n + 1);
    for (i, &v) in y.iter().enumerate() {
        x[(0, i + 1)] = v;
        x[(n, i + 1)] = v;
        x[(i + 1, 0)] = -v;
        x[(i + 1, n)] = v;
    }
    x
}

/// `n_y = exp(X_y) = I + X_y + X_y^2/2`, `y ∈ R^{n-1}`.
pub fn n_of(y: &[f64]) -> GroupElement {
    let x = nilpotent_generator(y);
    let x2 = &x * &x;
    let n = y.len() + 1;
    GroupElement { mat: DMatrix::identity(n + 1, n + 1) + x + x2 * 0.5 }
}

/// `n̄_y = θ(n_y) = J n_y J`.
pub fn nbar_of(y: &[f64]) -> GroupElement {
    GroupElement { mat: nbar_matrix(y) }
}

/// Explicit `J n_y J = [[1-r/2, y, -r/2], [-y^T, I, -y^T], [r/2, -y, 1+r/2]]`, `r = |y|^2`.
pub(crate) fn nbar_matrix(y: &[f64]) -> DMatrix<f64> {
    let n = y.len() + 1;
    let r = y.iter().map(|v| v * v).sum::<f64>();
    let mut g = DMatrix::identity(n + 1, n + 1);
    g[(0, 0)] = 1.0 - r / 2.0;
    g[(0, n)] = -r / 2.0;
    g[(n, 0)] = r / 2.0;
    g[(n, n)] = 1.0 + r / 2.0;
    for (i, &v) in y.iter().enumerate() {
        g[(0, i + 1)] = v;
        g[(n, i + 1)] = -v;
        g[(i + 1, 0)] = -v;
        g[(i + 1, n)] = -v;
    }
    g
}

/// `k ↦ diag(k, 1)`.
pub fn embed_k(k: &DMatrix<f64>) -> GroupElement {
    let n = k.nrows();
    let mut g = DMatrix::identity(n + 1, n + 1);
    g.view_mut((0, 0), (n, n)).copy_from(k);
    GroupElement { mat: g }
}

/// `m ↦ diag(1, m) ∈ SO(n)` for `m ∈ SO(n-1)`.
pub fn embed_m(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows() + 1;
    let mut k = DMatrix::identity(n, n);
    k.view_mut((1, 1), (n - 1, n - 1)).copy_from(m);
    k
}

/// Returns `(t, k)` with `g = k a_t n` (the `N` part is not formed).
pub(crate) fn iwasawa_kt(g: &DMatrix<f64>) -> (f64, DMatrix<f64>) {
    let n = g.nrows() - 1;
    let et = g[(n, 0)] + g[(n, n)];
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, 0)] = (g[(i, 0)] + g[(i, n)]) / et;
    }
    for j in 1..n {
        let yj = g[(n, j)];
        for i in 0..n {
            k[(i, j)] = g[(i, j)] - yj * k[(i, 0)];
        }
    }
    (et.ln(), k)
}

/// Iwasawa decomposition by forward substitution against `ξ_0 = e_1 + e_{n+1}`.
pub fn iwasawa(g: &GroupElement) -> IwasawaTriple {
    let n = g.n();
    let (t, k) = iwasawa_kt(&g.mat);
    let et = (-t).exp();
    let y = (1..n).map(|j| g.mat[(n, j)] * et).collect();
    IwasawaTriple { k, t, y }
}

/// `H(g) = t` from `g = k a_t n`.
pub fn h_of(g: &GroupElement) -> f64 {
    let n = g.n();
    (g.mat[(n, 0)] + g.mat[(n, n)]).ln()
}

/// `κ(g) = k` from `g = k a_t n`.
pub fn kappa_of(g: &GroupElement) -> DMatrix<f64> {
    iwasawa_kt(&g.mat).1
}

/// Rotation in the plane `span{e_1, b}` taking `e_1` to `b`; `diag(-1,-1,1,..)` at `b = -e_1`.
pub fn section(b: &[f64]) -> Result<DMatrix<f64>> {
    let norm = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if b.len() < 2 || (norm - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("boundary point must be a unit vector in R^n, n >= 2 (|b| = {norm})")));
    }
    Ok(section_unchecked(b))
}

pub(crate) fn section_unchecked(b: &[f64]) -> DMatrix<f64> {
    let n = b.len();
    let c = b[0];
    let mut k = DMatrix::identity(n, n);
    if 1.0 + c < 1e-14 {
        k[(0, 0)] = -1.0;
        k[(1, 1)] = -1.0;
        return k;
    }
    k[(0, 0)] = c;
    let d = 1.0 / (1.0 + c);
    for i in 1..n {
        k[(i, 0)] = b[i];
        k[(0, i)] = -b[i];
        for j in 1..n {
            k[(i, j)] -= b[i] * b[j] * d;
        }
    }
    k
}

/// `k = s(b) m` with `b = k e_1`; returns `(b, m)`.
pub fn m_part(k: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = k.nrows();
    let b: Vec<f64> = k.column(0).iter().copied().collect();
    let s = section_unchecked(&b);
    let full = s.transpose() * k;
    (b, full.view((1, 1), (n - 1, n - 1)).into_owned())
}

/// Action on the Poincaré ball through the hyperboloid model.
pub fn ball_action(g: &GroupElement, x: &[f64]) -> Result<Vec<f64>> {
    let n = g.n();
    if x.len() != n {
        return Err(Error::Domain(format!("ball point of dimension {} for n = {n}", x.len())));
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if r2 >= 1.0 {
        return Err(Error::Domain("point is not inside the unit ball".into()));
    }
    let mut lift = nalgebra::DVector::zeros(n + 1);
    for i in 0..n {
        lift[i] = 2.0 * x[i] / (1.0 - r2);
    }
    lift[n] = (1.0 + r2) / (1.0 - r2);
    let y = &g.mat * lift;
    Ok((0..n).map(|i| y[i] / (1.0 + y[n])).collect())
}

/// `g = k_0 a_t k_1` with `k_0 = s(b)`, `b` the direction of `g·o`.
pub fn polar(g: &GroupElement) -> (DMatrix<f64>, f64, DMatrix<f64>) {
    let n = g.n();
    let x: Vec<f64> = (0..n).map(|i| g.mat[(i, n)]).collect();
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let t = r.asinh();
    let b: Vec<f64> = if r > 1e-300 {
        x.iter().map(|v| v / r).collect()
    } else {
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        e
    };
    let k0 = section_unchecked(&b);
    let rest = geodesic_matrix(n, -t) * embed_k(&k0.transpose()).mat * &g.mat;
    let k1 = rest.view((0, 0), (n, n)).into_owned();
    (k0, t, k1)
}

/// Matrix exponential by scaling and squaring of a Taylor polynomial.
pub fn expm(x: &DMatrix<f64>) -> DMatrix<f64> {
    let m = x.nrows();
    let norm = x.amax() * m as f64;
    let mut s = 0;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        s += 1;
    }
    let xs = x * scale;
    let mut term = DMatrix::identity(m, m);
    let mut sum = DMatrix::identity(m, m);
    for k in 1..=18 {
        term = &term * &xs / k as f64;
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rotation(n: usize, angles: &[f64]) -> DMatrix<f64> {
        let mut x = DMatrix::zeros(n, n);
        let mut a = angles.iter().cycle();
        for i in 0..n {
            for j in i + 1..n {
                let v = *a.next().unwrap();
                x[(i, j)] = v;
                x[(j, i)] = -v;
            }
        }
        expm(&x)
    }

    fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
        (a - b).amax() <= tol
    }

    #[test]
    fn nbar_explicit_n2() {
        let y = 0.7;
        let g = nbar_of(&[y]);
        let expected = DMatrix::from_row_slice(
            3,
            3,
            &[1.0 - y * y / 2.0, y, -y * y / 2.0, -y, 1.0, -y, y * y / 2.0, -y, 1.0 + y * y / 2.0],
        );
        assert!(close(g.matrix(), &expected, 1e-15));
    }

    #[test]
    fn nbar_is_conjugated_n() {
        let y = [0.4, -1.1, 0.25];
        let j = j_matrix(4);
        assert!(close(nbar_of(&y).matrix(), &(&j * n_of(&y).matrix() * &j), 1e-15));
    }

    #[test]
    fn h_of_nbar() {
        for y in [vec![0.3, -1.2, 2.0], vec![0.0, 0.0, 0.0], vec![5.0, 1.0, -3.0]] {
            let r2: f64 = y.iter().map(|v| v * v).sum();
            assert!((h_of(&nbar_of(&y)) - (1.0 + r2).ln()).abs() < 1e-13);
        }
    }

    #[test]
    fn group_membership() {
        assert!(GroupElement::new(n_of(&[0.3, 0.4]).matrix().clone()).is_ok());
        assert!(GroupElement::new(geodesic(3, 2.0).matrix().clone()).is_ok());
        let mut bad = DMatrix::identity(4, 4);
        bad[(3, 3)] = -1.0;
        bad[(0, 0)] = -1.0;
        assert!(GroupElement::new(bad).is_err());
        let mut bad = DMatrix::identity(4, 4);
        bad[(0, 1)] = 0.1;
        assert!(GroupElement::new(bad).is_err());
    }

    #[test]
    fn section_at_antipode() {
        let s = section(&[-1.0, 0.0, 0.0]).unwrap();
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-1.0, -1.0, 1.0]));
        assert!(close(&s, &d, 0.0));
        assert!(section(&[0.5, 0.5, 0.0]).is_err());
    }

    #[test]
    fn section_of_e2_is_quarter_turn() {
        let s = section(&[0.0, 1.0]).unwrap();
        assert!(close(&s, &DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]), 1e-15));
    }

    #[test]
    fn ball_action_of_geodesic() {
        // Poincaré-ball coordinates: the origin moves to tanh(t/2) e_1.
        let t = 1.3;
        let x = ball_action(&geodesic(3, t), &[0.0, 0.0, 0.0]).unwrap();
        assert!((x[0] - (t / 2.0).tanh()).abs() < 1e-15);
        assert!(x[1].abs() < 1e-15 && x[2].abs() < 1e-15);
        let g = geodesic(3, 0.4).mul(&nbar_of(&[0.2, -0.5]));
        let h = embed_k(&rotation(3, &[0.3, -1.0, 0.7])).mul(&geodesic(3, -0.9));
        let p = [0.1, 0.2, -0.3];
        let lhs = ball_action(&g.mul(&h), &p).unwrap();
        let rhs = ball_action(&g, &ball_action(&h, &p).unwrap()).unwrap();
        assert!(lhs.iter().zip(&rhs).all(|(a, b)| (a - b).abs() < 1e-13));
    }

    #[test]
    fn expm_matches_boost() {
        let n = 3;
        let mut x = DMatrix::zeros(n + 1, n + 1);
        x[(0, n)] = 1.0;
        x[(n, 0)] = 1.0;
        assert!(close(&expm(&(x * 0.8)), geodesic(n, 0.8).matrix(), 1e-14));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn iwasawa_reassembles(angles in prop::collection::vec(-3.0f64..3.0, 10),
                               t in -3.0f64..3.0, y in prop::collection::vec(-2.0f64..2.0, 4),
                               angles2 in prop::collection::vec(-3.0f64..3.0, 10), s in -2.0f64..2.0) {
            let g = embed_k(&rotation(5, &angles)).mul(&geodesic(5, t)).mul(&nbar_of(&y))
                .mul(&embed_k(&rotation(5, &angles2))).mul(&geodesic(5, s));
            let tr = iwasawa(&g);
            let back = embed_k(&tr.k).mul(&geodesic(5, tr.t)).mul(&n_of(&tr.y));
            let scale = g.matrix().amax();
            prop_assert!(close(back.matrix(), g.matrix(), 1e-12 * scale));
            prop_assert!(close(&(tr.k.transpose() * &tr.k), &DMatrix::identity(5, 5), 1e-11));
        }

        #[test]
        fn h_is_right_man_invariant(angles in prop::collection::vec(-3.0f64..3.0, 6),
                                    m_angles in prop::collection::vec(-3.0f64..3.0, 3),
                                    t in -2.0f64..2.0, y in prop::collection::vec(-2.0f64..2.0, 3)) {
            let g = embed_k(&rotation(4, &angles)).mul(&geodesic(4, t));
            let m = embed_k(&embed_m(&rotation(3, &m_angles)));
            let moved = g.mul(&m).mul(&n_of(&y));
            prop_assert!((h_of(&moved) - h_of(&g)).abs() < 1e-12);
        }

        #[test]
        fn section_properties(v in prop::collection::vec(-1.0f64..1.0, 4)) {
            let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assume!(r > 1e-3);
            let b: Vec<f64> = v.iter().map(|x| x / r).collect();
            let s = section(&b).unwrap();
            prop_assert!(close(&(s.transpose() * &s), &DMatrix::identity(4, 4), 1e-13));
            prop_assert!(s.determinant() > 0.0);
            for i in 0..4 {
                prop_assert!((s[(i, 0)] - b[i]).abs() < 1e-15);
            }
        }

        #[test]
        fn m_part_reconstructs(angles in prop::collection::vec(-3.0f64..3.0, 10)) {
            let k = rotation(5, &angles);
            let (b, m) = m_part(&k);
            let back = section(&b).unwrap() * embed_m(&m);
            prop_assert!(close(&back, &k, 1e-12));
        }

        #[test]
        fn polar_reconstructs(angles in prop::collection::vec(-3.0f64..3.0, 6), t in 0.0f64..4.0,
                              angles2 in prop::collection::vec(-3.0f64..3.0, 6)) {
            let g = embed_k(&rotation(4, &angles)).mul(&geodesic(4, t)).mul(&embed_k(&rotation(4, &angles2)));
            let (k0, s, k1) = polar(&g);
            let back = embed_k(&k0).mul(&geodesic(4, s)).mul(&embed_k(&k1));
            prop_assert!(close(back.matrix(), g.matrix(), 1e-10 * g.matrix().amax()));
            prop_assert!((s - t).abs() < 1e-9);
        }
    }
}
