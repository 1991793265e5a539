//! Dense complex matrices and the handful of decompositions the rest of the
//! crate needs: singular values, right singular vectors and Hermitian
//! eigendecompositions. Decompositions are delegated to `nalgebra`.

mod io;

pub use io::{
    matrix_from_json, matrix_to_json, parse_matrix_market, read_matrix, to_matrix_market,
    write_matrix, MatrixFormat,
};

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Square dense complex matrix stored row-major. Entries are always finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

/// JSON shape `{"n": int, "entries": [[re, im], ...]}`.
#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    n: usize,
    entries: Vec<[f64; 2]>,
}

impl TryFrom<MatrixRepr> for ComplexMatrix {
    type Error = Error;

    fn try_from(r: MatrixRepr) -> Result<Self> {
        let data = r
            .entries
            .iter()
            .map(|[re, im]| Complex64::new(*re, *im))
            .collect();
        ComplexMatrix::new(r.n, data)
    }
}

impl From<ComplexMatrix> for MatrixRepr {
    fn from(m: ComplexMatrix) -> Self {
        MatrixRepr {
            n: m.n,
            entries: m.data.iter().map(|z| [z.re, z.im]).collect(),
        }
    }
}

impl ComplexMatrix {
    pub fn new(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Structural("matrix dimension must be at least 1".into()));
        }
        if data.len() != n * n {
            return Err(Error::Structural(format!(
                "expected {} entries for a {n}x{n} matrix, found {}",
                n * n,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Input(format!(
                "non-finite entry at ({}, {})",
                pos / n,
                pos % n
            )));
        }
        Ok(ComplexMatrix { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self::new(n, data)
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Structural("rows must all have length n".into()));
        }
        Self::new(n, rows.concat())
    }

    /// Real-valued convenience constructor.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![Complex64::new(1.0, 0.0); n.max(1)])
    }

    pub fn zeros(n: usize) -> Self {
        let n = n.max(1);
        ComplexMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len().max(1);
        let mut m = Self::zeros(n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = *d;
        }
        m
    }

    pub fn real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::diagonal(&d)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn to_dmatrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }

    pub fn from_dmatrix(m: &DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Structural(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        Self::from_fn(n, |i, j| m[(i, j)])
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        ComplexMatrix { n, data }
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<Self> {
        self.check_same_dim(other)?;
        Self::from_dmatrix(&(self.to_dmatrix() * other.to_dmatrix()))
    }

    pub fn add(&self, other: &ComplexMatrix) -> Result<Self> {
        self.check_same_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Self::new(self.n, data)
    }

    pub fn sub(&self, other: &ComplexMatrix) -> Result<Self> {
        self.check_same_dim(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self::new(self.n, data)
    }

    pub fn scale(&self, factor: Complex64) -> Result<Self> {
        Self::new(self.n, self.data.iter().map(|z| z * factor).collect())
    }

    pub fn apply(&self, v: &ComplexVector) -> Result<ComplexVector> {
        if v.len() != self.n {
            return Err(Error::Structural(format!(
                "vector of length {} does not match matrix dimension {}",
                v.len(),
                self.n
            )));
        }
        let out = (0..self.n)
            .map(|i| {
                self.data[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(v.entries())
                    .map(|(a, x)| a * x)
                    .sum()
            })
            .collect();
        Ok(ComplexVector::new(out))
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn check_same_dim(&self, other: &ComplexMatrix) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Structural(format!(
                "dimension mismatch: {} vs {}",
                self.n, other.n
            )));
        }
        Ok(())
    }
}

/// Dense complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexVector {
    data: Vec<Complex64>,
}

impl ComplexVector {
    pub fn new(data: Vec<Complex64>) -> Self {
        ComplexVector { data }
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); n];
        data[index] = Complex64::new(1.0, 0.0);
        ComplexVector { data }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &ComplexVector) -> Complex64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

impl Serialize for ComplexVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.data.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }
}

/// Singular values in descending order, optionally with right singular
/// vectors stored as the columns of `right_vectors`.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub singular_values: Vec<f64>,
    pub right_vectors: Option<DMatrix<Complex64>>,
}

impl SvdResult {
    /// Smallest singular value (the last entry).
    pub fn smallest(&self) -> f64 {
        *self.singular_values.last().expect("non-empty spectrum")
    }

    pub fn largest(&self) -> f64 {
        self.singular_values[0]
    }

    pub fn right_vector(&self, index: usize) -> Option<ComplexVector> {
        self.right_vectors
            .as_ref()
            .map(|v| ComplexVector::new(v.column(index).iter().copied().collect()))
    }
}

/// Singular value decomposition of `a`. Values come from the bidiagonal
/// QR iteration, which is accurate to `eps * ||a||` in absolute terms.
pub fn svd(a: &ComplexMatrix, with_vectors: bool) -> SvdResult {
    let m = a.to_dmatrix();
    let dec = SVD::new(m, false, with_vectors);
    let singular_values = dec.singular_values.iter().copied().collect();
    let right_vectors = dec.v_t.map(|vt| vt.adjoint());
    SvdResult {
        singular_values,
        right_vectors,
    }
}

pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    svd(a, false).singular_values
}

/// Singular values as square roots of the eigenvalues of `A^H A`, descending.
///
/// Loses half the digits of the smallest singular values, so it is only
/// used as a cross-check.
pub fn singular_values_via_gram(a: &ComplexMatrix) -> Vec<f64> {
    let m = a.to_dmatrix();
    let gram = m.adjoint() * &m;
    let (vals, _) = hermitian_eigen(&gram);
    let mut out: Vec<f64> = vals.iter().map(|&x| x.max(0.0).sqrt()).collect();
    out.reverse();
    out
}

/// Largest singular value.
pub fn operator_norm(a: &ComplexMatrix) -> f64 {
    if a.n() == 1 {
        return a.get(0, 0).norm();
    }
    svd(a, false).largest()
}

/// `a - mu * I`, computed entrywise on the diagonal only.
pub fn shifted(a: &ComplexMatrix, mu: Complex64) -> ComplexMatrix {
    let n = a.n();
    let mut data = a.data.clone();
    for i in 0..n {
        data[i * n + i] -= mu;
    }
    ComplexMatrix { n, data }
}

/// Smallest singular value of `a`, with closed forms for n <= 2.
pub fn smallest_singular_value(a: &ComplexMatrix) -> f64 {
    match a.n() {
        1 => a.get(0, 0).norm(),
        2 => sigma_min_2x2(a.data[0], a.data[1], a.data[2], a.data[3]),
        _ => svd(a, false).smallest(),
    }
}

/// Smallest singular value of [[p, q], [r, s]].
///
/// A Givens rotation and two phase scalings bring the matrix to the real
/// triangle [[f, g], [0, h]], whose singular values are then taken with the
/// relatively accurate LAPACK `dlas2` recipe. The naive closed form loses
/// half the digits when the two singular values nearly coincide.
#[inline]
pub(crate) fn sigma_min_2x2(p: Complex64, q: Complex64, r: Complex64, s: Complex64) -> f64 {
    let big = p.l1_norm().max(q.l1_norm()).max(r.l1_norm()).max(s.l1_norm());
    if big > 0.0 && !(1e-100..=1e100).contains(&big) {
        // squares below would over- or underflow
        let k = 1.0 / big;
        return big * sigma_min_2x2(p * k, q * k, r * k, s * k);
    }
    let f = (p.norm_sqr() + r.norm_sqr()).sqrt();
    if f == 0.0 {
        return 0.0;
    }
    let g = (p.conj() * q + r.conj() * s).norm_sqr().sqrt() / f;
    let h = (p * s - q * r).norm_sqr().sqrt() / f;
    triangle_sigma_min(f, g, h)
}

fn triangle_sigma_min(f: f64, g: f64, h: f64) -> f64 {
    let (lo, hi) = if f < h { (f, h) } else { (h, f) };
    if lo == 0.0 {
        return 0.0;
    }
    if g < hi {
        let sum = 1.0 + lo / hi;
        let diff = (hi - lo) / hi;
        let ratio = (g / hi) * (g / hi);
        let c = 2.0 / ((sum * sum + ratio).sqrt() + (diff * diff + ratio).sqrt());
        lo * c
    } else {
        let ratio = hi / g;
        if ratio == 0.0 {
            return lo * hi / g;
        }
        let sum = 1.0 + lo / hi;
        let diff = (hi - lo) / hi;
        let c = 1.0 / ((1.0 + (sum * ratio).powi(2)).sqrt() + (1.0 + (diff * ratio).powi(2)).sqrt());
        2.0 * lo * c * ratio
    }
}

/// Eigen-decomposition of a Hermitian matrix. Eigenvalues ascending, with
/// eigenvectors in matching column order.
pub fn hermitian_eigen(h: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = h.nrows();
    let vecs = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (vals, vecs)
}

/// Inverse via LU; errors when the matrix is numerically singular.
pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let inv = a
        .to_dmatrix()
        .try_inverse()
        .ok_or_else(|| Error::Input("matrix is singular".into()))?;
    ComplexMatrix::from_dmatrix(&inv)
}

/// Serde helper storing a complex number as `[re, im]`.
pub(crate) mod c64_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

/// Serde helper for `Vec<Complex64>` as a list of `[re, im]` pairs.
pub(crate) mod c64_vec {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
        pairs.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
    }
}

/// Serde helper for `Option<Complex64>`.
pub(crate) mod c64_opt {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Option<Complex64>, s: S) -> Result<S::Ok, S::Error> {
        z.map(|z| [z.re, z.im]).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Complex64>, D::Error> {
        Ok(Option::<[f64; 2]>::deserialize(d)?.map(|[re, im]| Complex64::new(re, im)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&ComplexMatrix::identity(4)) - 1.0).abs() < 1e-14);
        let d = ComplexMatrix::real_diagonal(&[0.5, -0.25]);
        assert!((operator_norm(&d) - 0.5).abs() < 1e-14);
        let j = ComplexMatrix::from_real_rows(&[&[0.5, 1.0], &[0.0, 0.5]]).unwrap();
        let expected = ((1.5 + 2f64.sqrt()) / 2.0).sqrt();
        assert!((operator_norm(&j) - expected).abs() < 1e-12);
        assert!((expected - 1.2071).abs() < 1e-4);
    }

    #[test]
    fn non_finite_entries_rejected() {
        let err = ComplexMatrix::new(1, vec![c(f64::NAN, 0.0)]).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
        assert!(matches!(ComplexMatrix::new(0, vec![]), Err(Error::Structural(_))));
        assert!(matches!(
            ComplexMatrix::new(2, vec![c(1.0, 0.0); 3]),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn shifted_examples() {
        let s = shifted(&ComplexMatrix::identity(2), c(0.5, 0.0));
        assert_eq!(s, ComplexMatrix::real_diagonal(&[0.5, 0.5]));
        let s = shifted(&ComplexMatrix::zeros(2), c(0.0, 1.0));
        assert_eq!(s, ComplexMatrix::diagonal(&[c(0.0, -1.0), c(0.0, -1.0)]));
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let s = shifted(&a, c(1.0, 0.0));
        assert_eq!(
            s,
            ComplexMatrix::from_real_rows(&[&[-1.0, 1.0], &[0.0, -1.0]]).unwrap()
        );
    }

    #[test]
    fn two_by_two_closed_form_matches_svd() {
        let a = ComplexMatrix::from_rows(&[
            vec![c(0.3, -0.1), c(1.0, 0.2)],
            vec![c(-0.4, 0.0), c(0.05, 0.7)],
        ])
        .unwrap();
        let closed = smallest_singular_value(&a);
        let full = svd(&a, false).smallest();
        assert!((closed - full).abs() < 1e-14);
        // Jordan block shifted by 1: sigma_min = (sqrt(5) - 1) / 2
        let j = ComplexMatrix::from_real_rows(&[&[-1.0, 1.0], &[0.0, -1.0]]).unwrap();
        assert!((smallest_singular_value(&j) - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        // equal singular values: a scaled rotation
        let (cs, sn) = (0.6, 0.8);
        let rot = ComplexMatrix::from_rows(&[
            vec![c(0.7 * cs, 0.0), c(-0.7 * sn, 0.0)],
            vec![c(0.0, 0.7 * sn), c(0.0, 0.7 * cs)],
        ])
        .unwrap();
        assert!((smallest_singular_value(&rot) - 0.7).abs() < 1e-15);
        let huge = rot.scale(c(1e250, 0.0)).unwrap();
        assert!((smallest_singular_value(&huge) / 0.7e250 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn right_vectors_are_orthonormal() {
        let a = ComplexMatrix::from_fn(5, |i, j| c((i * 3 + j) as f64 * 0.1, (i as f64 - j as f64) * 0.2))
            .unwrap();
        let res = svd(&a, true);
        let v = res.right_vectors.as_ref().unwrap();
        let gram = v.adjoint() * v;
        for i in 0..5 {
            for j in 0..5 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - c(target, 0.0)).norm() < 1e-10);
            }
        }
        assert!(res.singular_values.windows(2).all(|w| w[0] >= w[1]));
        assert!(res.singular_values.iter().all(|&s| s >= 0.0));
    }

    fn arb_matrix(max_n: usize) -> impl Strategy<Value = ComplexMatrix> {
        (1..=max_n).prop_flat_map(|n| {
            prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
                ComplexMatrix::new(n, v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap()
            })
        })
    }

    fn haar_unitary(n: usize, seed: u64) -> ComplexMatrix {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        crate::matgen::haar_unitary(n, &mut rng)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn norm_is_unitarily_invariant(a in arb_matrix(16), s1 in any::<u64>(), s2 in any::<u64>()) {
            let u = haar_unitary(a.n(), s1);
            let v = haar_unitary(a.n(), s2);
            let uav = u.matmul(&a).unwrap().matmul(&v).unwrap();
            prop_assert!((operator_norm(&uav) - operator_norm(&a)).abs() < 1e-10);
        }

        #[test]
        fn svd_agrees_with_gram_route(a in arb_matrix(12)) {
            let direct = singular_values(&a);
            let gram = singular_values_via_gram(&a);
            for (x, y) in direct.iter().zip(&gram) {
                // sqrt of a perturbed eigenvalue: the Gram route is only
                // accurate to ~sqrt(eps) near zero.
                let tol = if *x < 1e-4 { 1e-7 } else { 1e-10 };
                prop_assert!((x - y).abs() < tol, "{x} vs {y}");
            }
        }

        #[test]
        fn shift_round_trip(a in arb_matrix(8), re in -64i32..64, im in -64i32..64) {
            // dyadic shifts keep the subtraction exact for dyadic entries
            let dyadic = ComplexMatrix::from_fn(a.n(), |i, j| {
                let z = a.get(i, j);
                c((z.re * 64.0).round() / 64.0, (z.im * 64.0).round() / 64.0)
            }).unwrap();
            let mu = c(re as f64 / 64.0, im as f64 / 64.0);
            let back = shifted(&shifted(&dyadic, mu), -mu);
            prop_assert_eq!(&back, &dyadic);
            // general entries: off-diagonal untouched, diagonal to one rounding
            let back = shifted(&shifted(&a, mu), -mu);
            for i in 0..a.n() {
                for j in 0..a.n() {
                    let d = (back.get(i, j) - a.get(i, j)).norm();
                    prop_assert!(d <= 4.0 * f64::EPSILON * (1.0 + mu.norm()));
                    if i != j { prop_assert_eq!(back.get(i, j), a.get(i, j)); }
                }
            }
        }
    }
}
