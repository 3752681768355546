//! Exterior algebra `Λ^p C^n` in the lexicographically ordered basis
//! `e_I = e_{i_1} ∧ ... ∧ e_{i_p}`, `i_1 < ... < i_p` (1-based).

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Complex matrix acting on some `Λ^p C^n`.
pub type EndoMatrix = DMatrix<Complex64>;

pub fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: usize = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Strictly increasing 1-based index tuple.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.iter().any(|&i| i == 0 || i > n) {
            return Err(Error::Domain(format!("indices {indices:?} out of range 1..={n}")));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain(format!("indices {indices:?} not strictly increasing")));
        }
        Ok(Self(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Position in the lexicographic list of `p`-subsets of `{1..n}`.
    pub fn rank(&self, n: usize) -> usize {
        let p = self.0.len();
        let mut r = 0;
        let mut prev = 0;
        for (pos, &i) in self.0.iter().enumerate() {
            for j in prev + 1..i {
                r += binom(n - j, p - pos - 1);
            }
            prev = i;
        }
        r
    }

    pub fn unrank(n: usize, p: usize, mut r: usize) -> Result<Self> {
        if r >= binom(n, p) {
            return Err(Error::Domain(format!("rank {r} out of range for C({n},{p})")));
        }
        let mut out = Vec::with_capacity(p);
        let mut j = 1;
        for pos in 0..p {
            loop {
                let c = binom(n - j, p - pos - 1);
                if r < c {
                    break;
                }
                r -= c;
                j += 1;
            }
            out.push(j);
            j += 1;
        }
        Ok(Self(out))
    }

    /// Complementary index set in `{1..n}`.
    pub fn complement(&self, n: usize) -> Self {
        Self((1..=n).filter(|i| !self.0.contains(i)).collect())
    }
}

/// All `p`-subsets of `{1..n}` in lexicographic order.
pub fn basis(n: usize, p: usize) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(binom(n, p));
    let mut cur: Vec<usize> = (1..=p).collect();
    if p > n {
        return out;
    }
    loop {
        out.push(MultiIndex(cur.clone()));
        let mut pos = p;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if cur[pos] < n - (p - 1 - pos) {
                cur[pos] += 1;
                for k in pos + 1..p {
                    cur[k] = cur[k - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Element of `Λ^p C^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PForm {
    pub n: usize,
    pub p: usize,
    pub coeffs: DVector<Complex64>,
}

impl PForm {
    pub fn zeros(n: usize, p: usize) -> Self {
        Self { n, p, coeffs: DVector::zeros(binom(n, p)) }
    }

    pub fn new(n: usize, p: usize, coeffs: DVector<Complex64>) -> Result<Self> {
        if p > n || coeffs.len() != binom(n, p) {
            return Err(Error::Domain(format!(
                "coefficient vector of length {} does not match C({n},{p})",
                coeffs.len()
            )));
        }
        Ok(Self { n, p, coeffs })
    }

    pub fn from_real(n: usize, p: usize, coeffs: &[f64]) -> Result<Self> {
        Self::new(n, p, DVector::from_iterator(coeffs.len(), coeffs.iter().map(|&x| Complex64::new(x, 0.0))))
    }

    pub fn basis_element(n: usize, idx: &MultiIndex) -> Self {
        let mut w = Self::zeros(n, idx.len());
        w.coeffs[idx.rank(n)] = Complex64::new(1.0, 0.0);
        w
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.norm()
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }
}

fn same_space(a: &PForm, b: &PForm) -> Result<()> {
    if a.n != b.n || a.p != b.p {
        return Err(Error::Domain(format!(
            "forms live in different spaces: Λ^{}C^{} vs Λ^{}C^{}",
            a.p, a.n, b.p, b.n
        )));
    }
    Ok(())
}

/// Hermitian inner product, conjugate-linear in the second slot.
pub fn inner(a: &PForm, b: &PForm) -> Result<Complex64> {
    same_space(a, b)?;
    Ok(a.coeffs.iter().zip(b.coeffs.iter()).map(|(x, y)| x * y.conj()).sum())
}

/// Matrix of `ι_{e_j}: Λ^p → Λ^{p-1}` (`j` is 1-based).
pub fn interior_matrix(n: usize, p: usize, j: usize) -> DMatrix<f64> {
    assert!(p >= 1 && j >= 1 && j <= n);
    let mut m = DMatrix::zeros(binom(n, p - 1), binom(n, p));
    for (col, idx) in basis(n, p).iter().enumerate() {
        if let Some(pos) = idx.0.iter().position(|&i| i == j) {
            let mut rest = idx.0.clone();
            rest.remove(pos);
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            m[(MultiIndex(rest).rank(n), col)] = sign;
        }
    }
    m
}

/// Matrix of `ε_{e_j} = e_j ∧ · : Λ^p → Λ^{p+1}`.
pub fn exterior_matrix(n: usize, p: usize, j: usize) -> DMatrix<f64> {
    assert!(p < n && j >= 1 && j <= n);
    interior_matrix(n, p + 1, j).transpose()
}

fn check_vector(v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::Domain(format!("vector of length {} in dimension {n}", v.len())));
    }
    Ok(())
}

/// `ι_v ω` with `ι_v e_I = Σ_r (-1)^{r-1} v_{i_r} e_{I \ i_r}`.
pub fn interior(v: &[f64], w: &PForm) -> Result<PForm> {
    check_vector(v, w.n)?;
    if w.p == 0 {
        return Err(Error::Degree("interior product of a 0-form".into()));
    }
    let mut out = PForm::zeros(w.n, w.p - 1);
    for (col, idx) in basis(w.n, w.p).iter().enumerate() {
        let c = w.coeffs[col];
        for (pos, &i) in idx.0.iter().enumerate() {
            let mut rest = idx.0.clone();
            rest.remove(pos);
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            out.coeffs[MultiIndex(rest).rank(w.n)] += c * (sign * v[i - 1]);
        }
    }
    Ok(out)
}

/// `ε_v ω = v ∧ ω`.
pub fn exterior_mul(v: &[f64], w: &PForm) -> Result<PForm> {
    check_vector(v, w.n)?;
    if w.p >= w.n {
        return Err(Error::Degree(format!("v ∧ ω is zero-dimensional for p = n = {}", w.n)));
    }
    let mut out = PForm::zeros(w.n, w.p + 1);
    for (col, idx) in basis(w.n, w.p).iter().enumerate() {
        let c = w.coeffs[col];
        for j in 1..=w.n {
            if idx.0.contains(&j) {
                continue;
            }
            let before = idx.0.iter().filter(|&&i| i < j).count();
            let mut merged = idx.0.clone();
            merged.insert(before, j);
            let sign = if before % 2 == 0 { 1.0 } else { -1.0 };
            out.coeffs[MultiIndex(merged).rank(w.n)] += c * (sign * v[j - 1]);
        }
    }
    Ok(out)
}

fn hodge_sign(idx: &MultiIndex) -> f64 {
    let inversions: usize = idx.0.iter().enumerate().map(|(r, &i)| i - 1 - r).sum();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Hodge star `⋆ e_I = sgn(I, I^c) e_{I^c}`.
pub fn hodge_star(w: &PForm) -> PForm {
    let mut out = PForm::zeros(w.n, w.n - w.p);
    for (col, idx) in basis(w.n, w.p).iter().enumerate() {
        out.coeffs[idx.complement(w.n).rank(w.n)] = w.coeffs[col] * hodge_sign(idx);
    }
    out
}

/// Determinant of a small square matrix stored row-major in `a` (destroyed).
fn det_small(a: &mut [f64], p: usize) -> f64 {
    let mut det = 1.0;
    for c in 0..p {
        let mut piv = c;
        for r in c + 1..p {
            if a[r * p + c].abs() > a[piv * p + c].abs() {
                piv = r;
            }
        }
        let pv = a[piv * p + c];
        if pv == 0.0 {
            return 0.0;
        }
        if piv != c {
            for k in 0..p {
                a.swap(c * p + k, piv * p + k);
            }
            det = -det;
        }
        det *= pv;
        for r in c + 1..p {
            let f = a[r * p + c] / pv;
            if f != 0.0 {
                for k in c..p {
                    a[r * p + k] -= f * a[c * p + k];
                }
            }
        }
    }
    det
}

/// `p`-th compound matrix: entry `(I, J)` is the minor `det k[I, J]`.
pub fn compound(k: &DMatrix<f64>, p: usize) -> DMatrix<f64> {
    let (rows, cols) = k.shape();
    let rb = basis(rows, p);
    let cb = basis(cols, p);
    let mut out = DMatrix::zeros(rb.len(), cb.len());
    match p {
        0 => out[(0, 0)] = 1.0,
        1 => out.copy_from(k),
        _ => {
            let mut buf = vec![0.0; p * p];
            for (a, ri) in rb.iter().enumerate() {
                for (b, ci) in cb.iter().enumerate() {
                    for (x, &r) in ri.0.iter().enumerate() {
                        for (y, &c) in ci.0.iter().enumerate() {
                            buf[x * p + y] = k[(r - 1, c - 1)];
                        }
                    }
                    out[(a, b)] = det_small(&mut buf, p);
                }
            }
        }
    }
    out
}

pub fn to_complex(m: &DMatrix<f64>) -> EndoMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Checks that `k` is a rotation (orthogonal with determinant one).
pub fn check_rotation(k: &DMatrix<f64>, tol: f64) -> Result<()> {
    if !k.is_square() {
        return Err(Error::Domain("rotation matrix must be square".into()));
    }
    let dev = (k.transpose() * k - DMatrix::identity(k.nrows(), k.nrows())).amax();
    if dev > tol {
        return Err(Error::Domain(format!("matrix is not orthogonal (deviation {dev:.3e})")));
    }
    if k.determinant() < 0.0 {
        return Err(Error::Domain("matrix has determinant -1".into()));
    }
    Ok(())
}

/// `τ_p(k) = Λ^p k` for `k ∈ SO(n)`.
pub fn tau(k: &DMatrix<f64>, p: usize) -> Result<EndoMatrix> {
    check_rotation(k, 1e-9)?;
    if p > k.nrows() {
        return Err(Error::Domain(format!("degree {p} exceeds dimension {}", k.nrows())));
    }
    Ok(to_complex(&compound(k, p)))
}

pub fn tau_apply(k: &DMatrix<f64>, w: &PForm) -> Result<PForm> {
    if k.nrows() != w.n {
        return Err(Error::Domain(format!("rotation of size {} acting on Λ^pC^{}", k.nrows(), w.n)));
    }
    let t = tau(k, w.p)?;
    Ok(PForm { n: w.n, p: w.p, coeffs: t * &w.coeffs })
}

/// `σ_q(m)` for `m ∈ SO(n-1)` acting on `Λ^q C^{n-1}`.
pub fn sigma_apply(m: &DMatrix<f64>, xi: &PForm) -> Result<PForm> {
    tau_apply(m, xi)
}

/// Matrix of the inclusion `Λ^q C^{n-1} → Λ^p C^n` with `C^{n-1} = span{e_2..e_n}`:
/// `ξ ↦ e_1 ∧ ξ` for `q = p-1` and `ξ ↦ ξ` for `q = p`.
pub fn embed_matrix(n: usize, p: usize, q: usize) -> DMatrix<f64> {
    assert!(q == p || q + 1 == p);
    let mut m = DMatrix::zeros(binom(n, p), binom(n - 1, q));
    for (col, idx) in basis(n - 1, q).iter().enumerate() {
        let mut shifted: Vec<usize> = idx.0.iter().map(|i| i + 1).collect();
        if q + 1 == p {
            shifted.insert(0, 1);
        }
        m[(MultiIndex(shifted).rank(n), col)] = 1.0;
    }
    m
}

/// `ι_q^p`: embeds `ξ ∈ Λ^q C^{n-1}` into `Λ^p C^n`.
pub fn embed(p: usize, xi: &PForm) -> Result<PForm> {
    if !(xi.p == p || xi.p + 1 == p) {
        return Err(Error::Degree(format!("cannot embed a {}-form into degree {p}", xi.p)));
    }
    let n = xi.n + 1;
    let m = to_complex(&embed_matrix(n, p, xi.p));
    Ok(PForm { n, p, coeffs: m * &xi.coeffs })
}

/// `π_p^q`: orthogonal projection `Λ^p C^n → Λ^q C^{n-1}` (adjoint of [`embed`]).
pub fn project(q: usize, w: &PForm) -> Result<PForm> {
    if !(q == w.p || q + 1 == w.p) {
        return Err(Error::Degree(format!("cannot project a {}-form to degree {q}", w.p)));
    }
    let m = to_complex(&embed_matrix(w.n, w.p, q).transpose());
    Ok(PForm { n: w.n - 1, p: q, coeffs: m * &w.coeffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(x: f64, y: f64) -> Complex64 {
        Complex64::new(x, y)
    }

    fn form_strategy(n: usize, p: usize) -> impl Strategy<Value = PForm> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), binom(n, p)).prop_map(move |v| {
            PForm::new(n, p, DVector::from_iterator(v.len(), v.into_iter().map(|(a, b)| c(a, b)))).unwrap()
        })
    }

    fn rotation_from_seed(n: usize, angles: &[f64]) -> DMatrix<f64> {
        let mut k = DMatrix::identity(n, n);
        let mut a = angles.iter();
        for i in 0..n {
            for j in i + 1..n {
                let th = *a.next().unwrap_or(&0.3);
                let mut g = DMatrix::identity(n, n);
                g[(i, i)] = th.cos();
                g[(j, j)] = th.cos();
                g[(i, j)] = -th.sin();
                g[(j, i)] = th.sin();
                k = k * g;
            }
        }
        k
    }

    #[test]
    fn rank_roundtrip_and_order() {
        for n in 1..=7 {
            for p in 0..=n {
                let b = basis(n, p);
                assert_eq!(b.len(), binom(n, p));
                for (r, idx) in b.iter().enumerate() {
                    assert_eq!(idx.rank(n), r);
                    assert_eq!(&MultiIndex::unrank(n, p, r).unwrap(), idx);
                }
                assert!(b.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn multiindex_validation() {
        assert!(MultiIndex::new(vec![2, 1], 3).is_err());
        assert!(MultiIndex::new(vec![0, 1], 3).is_err());
        assert!(MultiIndex::new(vec![1, 4], 3).is_err());
        assert!(MultiIndex::unrank(4, 2, 6).is_err());
    }

    #[test]
    fn interior_of_basis_wedge() {
        // ι_{e_2}(e_1 ∧ e_2 ∧ e_3) = -e_1 ∧ e_3
        let w = PForm::basis_element(3, &MultiIndex::new(vec![1, 2, 3], 3).unwrap());
        let r = interior(&[0.0, 1.0, 0.0], &w).unwrap();
        let target = MultiIndex::new(vec![1, 3], 3).unwrap().rank(3);
        assert_eq!(r.coeffs[target], c(-1.0, 0.0));
        assert_eq!(r.norm(), 1.0);
    }

    #[test]
    fn hodge_of_e1_in_r3() {
        let w = PForm::basis_element(3, &MultiIndex::new(vec![1], 3).unwrap());
        let s = hodge_star(&w);
        assert_eq!(s.coeffs[MultiIndex::new(vec![2, 3], 3).unwrap().rank(3)], c(1.0, 0.0));
        let w2 = PForm::basis_element(3, &MultiIndex::new(vec![2], 3).unwrap());
        assert_eq!(hodge_star(&w2).coeffs[MultiIndex::new(vec![1, 3], 3).unwrap().rank(3)], c(-1.0, 0.0));
    }

    #[test]
    fn tau_rejects_non_rotation() {
        let mut k = DMatrix::identity(3, 3);
        k[(0, 0)] = -1.0;
        assert!(tau(&k, 1).is_err());
        k[(0, 0)] = 1.1;
        assert!(tau(&k, 1).is_err());
    }

    #[test]
    fn degree_errors() {
        let z = PForm::zeros(3, 0);
        assert!(matches!(interior(&[1.0, 0.0, 0.0], &z), Err(Error::Degree(_))));
        assert!(interior(&[1.0, 0.0], &PForm::zeros(3, 1)).is_err());
        let top = PForm::zeros(3, 3);
        assert!(exterior_mul(&[1.0, 0.0, 0.0], &top).is_err());
    }

    #[test]
    fn compound_of_product_and_determinant() {
        let a = rotation_from_seed(4, &[0.1, 0.7, -0.4, 1.1, 0.2, -0.9]);
        let b = rotation_from_seed(4, &[0.5, -0.3, 0.8, 0.05, -1.2, 0.6]);
        for p in 0..=4 {
            let lhs = compound(&(&a * &b), p);
            let rhs = compound(&a, p) * compound(&b, p);
            assert!((lhs - rhs).amax() < 1e-13);
        }
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.5, -1.0, 3.0, 0.0, 0.25, 0.0, 1.0]);
        assert!((compound(&m, 3)[(0, 0)] - m.determinant()).abs() < 1e-13);
    }

    #[test]
    fn decomposition_of_lambda_p() {
        // Λ^p C^n = e_1 ∧ Λ^{p-1}C^{n-1} ⊕ Λ^p C^{n-1}
        for n in 2..=6 {
            for p in 1..n {
                let a = embed_matrix(n, p, p - 1);
                let b = embed_matrix(n, p, p);
                let sum = &a * a.transpose() + &b * b.transpose();
                assert!((sum - DMatrix::identity(binom(n, p), binom(n, p))).amax() < 1e-15);
                assert!((a.transpose() * &b).amax() == 0.0);
                assert!((a.transpose() * &a - DMatrix::identity(a.ncols(), a.ncols())).amax() == 0.0);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn interior_is_adjoint_of_exterior(w in form_strategy(5, 2), u in form_strategy(5, 3),
                                           v in prop::collection::vec(-2.0f64..2.0, 5)) {
            let lhs = inner(&exterior_mul(&v, &w).unwrap(), &u).unwrap();
            let rhs = inner(&w, &interior(&v, &u).unwrap()).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }

        #[test]
        fn hodge_squares_to_sign(w in form_strategy(5, 2), w3 in form_strategy(4, 1)) {
            let s = hodge_star(&hodge_star(&w));
            prop_assert!((s.coeffs - &w.coeffs).norm() < 1e-15);
            let s = hodge_star(&hodge_star(&w3));
            prop_assert!((s.coeffs + &w3.coeffs).norm() < 1e-15);
        }

        #[test]
        fn hodge_is_isometric(w in form_strategy(6, 3)) {
            prop_assert!((hodge_star(&w).norm() - w.norm()).abs() < 1e-13);
        }

        #[test]
        fn tau_preserves_inner_product(angles in prop::collection::vec(-3.0f64..3.0, 10),
                                       a in form_strategy(5, 2), b in form_strategy(5, 2)) {
            let k = rotation_from_seed(5, &angles);
            let ka = tau_apply(&k, &a).unwrap();
            let kb = tau_apply(&k, &b).unwrap();
            prop_assert!((inner(&ka, &kb).unwrap() - inner(&a, &b).unwrap()).norm() < 1e-12);
        }

        #[test]
        fn tau_commutes_with_hodge(angles in prop::collection::vec(-3.0f64..3.0, 6), w in form_strategy(4, 1)) {
            let k = rotation_from_seed(4, &angles);
            let lhs = hodge_star(&tau_apply(&k, &w).unwrap());
            let rhs = tau_apply(&k, &hodge_star(&w)).unwrap();
            prop_assert!((lhs.coeffs - rhs.coeffs).norm() < 1e-12);
        }

        #[test]
        fn interior_nilpotent(w in form_strategy(5, 3), v in prop::collection::vec(-2.0f64..2.0, 5)) {
            let r = interior(&v, &interior(&v, &w).unwrap()).unwrap();
            prop_assert!(r.norm() < 1e-12);
        }

        #[test]
        fn project_is_adjoint_of_embed(xi in form_strategy(4, 1), w in form_strategy(5, 2)) {
            let lhs = inner(&embed(2, &xi).unwrap(), &w).unwrap();
            let rhs = inner(&xi, &project(1, &w).unwrap()).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-13);
            let back = project(1, &embed(2, &xi).unwrap()).unwrap();
            prop_assert!((back.coeffs - &xi.coeffs).norm() < 1e-15);
        }

        #[test]
        fn embedding_is_m_equivariant(angles in prop::collection::vec(-3.0f64..3.0, 6),
                                      xi in form_strategy(4, 1)) {
            let m = rotation_from_seed(4, &angles);
            let mut k = DMatrix::identity(5, 5);
            k.view_mut((1, 1), (4, 4)).copy_from(&m);
            for p in [1usize, 2] {
                let lhs = tau_apply(&k, &embed(p, &xi).unwrap()).unwrap();
                let rhs = embed(p, &sigma_apply(&m, &xi).unwrap()).unwrap();
                prop_assert!((lhs.coeffs - rhs.coeffs).norm() < 1e-12);
            }
        }
    }
}
