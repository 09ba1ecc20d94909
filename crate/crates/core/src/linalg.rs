//! Small dense linear algebra over the scalar types used at each place.
//!
//! Everything here is sized for matrices of dimension at most a few dozen
//! (wedge powers of `sl3` are the largest), so the algorithms are the plain
//! textbook ones: partial-pivot elimination, Faddeev-LeVerrier for
//! characteristic polynomials, Euclid for polynomial gcds.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Scalars of a completion `Q_v`: `f64` at the archimedean place, exact
/// rationals or [`PadicScalar`](crate::qs_arith::PadicScalar) elsewhere.
///
/// Constructors take a `&self` witness because p-adic values carry their
/// prime at runtime.
pub trait Field: Clone + fmt::Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_i64_like(&self, n: i64) -> Self;
    fn from_rational_like(&self, q: &BigRational) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn inv(&self) -> Option<Self>;
    /// The absolute value of the place this scalar lives at.
    fn magnitude(&self) -> f64;
    /// Whether the value is zero; `tol` is only consulted for floating values.
    fn is_negligible(&self, tol: f64) -> bool;
    /// Whether arithmetic on this type is exact (zero tests need no tolerance).
    fn is_exact_field() -> bool;

    fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|i| self.mul(&i))
    }
}

impl Field for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn one_like(&self) -> Self {
        1.0
    }
    fn from_i64_like(&self, n: i64) -> Self {
        n as f64
    }
    fn from_rational_like(&self, q: &BigRational) -> Self {
        q.to_f64().unwrap_or(f64::NAN)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        if *self == 0.0 {
            None
        } else {
            Some(1.0 / self)
        }
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_negligible(&self, tol: f64) -> bool {
        self.abs() <= tol
    }
    fn is_exact_field() -> bool {
        false
    }
}

impl Field for Complex64 {
    fn zero_like(&self) -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one_like(&self) -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_i64_like(&self, n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }
    fn from_rational_like(&self, q: &BigRational) -> Self {
        Complex64::new(q.to_f64().unwrap_or(f64::NAN), 0.0)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        if self.norm() == 0.0 {
            None
        } else {
            Some(self.inv())
        }
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_negligible(&self, tol: f64) -> bool {
        self.norm() <= tol
    }
    fn is_exact_field() -> bool {
        false
    }
}

impl Field for BigRational {
    fn zero_like(&self) -> Self {
        BigRational::zero()
    }
    fn one_like(&self) -> Self {
        BigRational::from_integer(1.into())
    }
    fn from_i64_like(&self, n: i64) -> Self {
        BigRational::from_integer(n.into())
    }
    fn from_rational_like(&self, q: &BigRational) -> Self {
        q.clone()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }
    fn magnitude(&self) -> f64 {
        self.abs().to_f64().unwrap_or(f64::INFINITY)
    }
    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }
    fn is_exact_field() -> bool {
        true
    }
}

/// Dense row-major matrix.
#[derive(Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[T]> = self.data.chunks(self.cols.max(1)).collect();
        f.debug_list().entries(rows).finish()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl<T> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data has wrong length");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Clone> Matrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self[(i, j)].clone());
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &i in rows {
            for &j in cols {
                data.push(self[(i, j)].clone());
            }
        }
        Matrix {
            rows: rows.len(),
            cols: cols.len(),
            data,
        }
    }
}

impl<T: Field> Matrix<T> {
    pub fn zeros_like(rows: usize, cols: usize, witness: &T) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![witness.zero_like(); rows * cols],
        }
    }

    pub fn identity_like(n: usize, witness: &T) -> Self {
        let mut m = Self::zeros_like(n, n, witness);
        for i in 0..n {
            m[(i, i)] = witness.one_like();
        }
        m
    }

    fn witness(&self) -> &T {
        &self.data[0]
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let w = self.witness();
        let mut out = Self::zeros_like(self.rows, other.cols, w);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_negligible(0.0) && T::is_exact_field() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a.mul(&other[(k, j)]);
                    out[(i, j)] = out[(i, j)].add(&prod);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matrix-vector product");
        (0..self.rows)
            .map(|i| {
                let mut acc = v[0].zero_like();
                for j in 0..self.cols {
                    acc = acc.add(&self[(i, j)].mul(&v[j]));
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|a| a.mul(s))
    }

    pub fn neg(&self) -> Self {
        self.map(Field::neg)
    }

    pub fn trace(&self) -> T {
        let mut acc = self.witness().zero_like();
        for i in 0..self.rows.min(self.cols) {
            acc = acc.add(&self[(i, i)]);
        }
        acc
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::identity_like(self.rows, self.witness());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Largest entry magnitude (the sup norm at this place).
    pub fn sup_norm(&self) -> f64 {
        self.data.iter().map(Field::magnitude).fold(0.0, f64::max)
    }

    pub fn is_negligible(&self, tol: f64) -> bool {
        self.data.iter().all(|a| a.is_negligible(tol))
    }

    /// Determinant by elimination with magnitude pivoting.
    pub fn det(&self) -> T {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut det = self.witness().one_like();
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[(i, col)].magnitude().total_cmp(&a[(j, col)].magnitude()))
                .unwrap();
            if a[(pivot, col)].is_negligible(0.0) {
                return self.witness().zero_like();
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                }
                det = det.neg();
            }
            let p = a[(col, col)].clone();
            det = det.mul(&p);
            let pinv = p.inv().unwrap();
            for i in col + 1..n {
                let factor = a[(i, col)].mul(&pinv);
                if factor.is_negligible(0.0) {
                    continue;
                }
                for j in col..n {
                    let t = factor.mul(&a[(col, j)]);
                    a[(i, j)] = a[(i, j)].sub(&t);
                }
            }
        }
        det
    }

    /// Gauss-Jordan inverse; `None` when a pivot vanishes.
    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square(), "inverse of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity_like(n, self.witness());
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| a[(i, col)].magnitude().total_cmp(&a[(j, col)].magnitude()))
                .unwrap();
            if a[(pivot, col)].is_negligible(0.0) {
                return None;
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let pinv = a[(col, col)].inv()?;
            for j in 0..n {
                a[(col, j)] = a[(col, j)].mul(&pinv);
                inv[(col, j)] = inv[(col, j)].mul(&pinv);
            }
            for i in 0..n {
                if i == col {
                    continue;
                }
                let factor = a[(i, col)].clone();
                if factor.is_negligible(0.0) {
                    continue;
                }
                for j in 0..n {
                    let t = factor.mul(&a[(col, j)]);
                    a[(i, j)] = a[(i, j)].sub(&t);
                    let t = factor.mul(&inv[(col, j)]);
                    inv[(i, j)] = inv[(i, j)].sub(&t);
                }
            }
        }
        Some(inv)
    }

    /// Commutator `AB - BA`.
    pub fn bracket(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Characteristic polynomial `det(xI - A)`, coefficients in increasing degree.
    pub fn charpoly(&self) -> Poly<T> {
        // Faddeev-LeVerrier; needs characteristic zero, which all our fields have.
        let n = self.rows;
        let w = self.witness();
        let mut coeffs = vec![w.zero_like(); n + 1];
        coeffs[n] = w.one_like();
        let id = Self::identity_like(n, w);
        let mut m = Self::zeros_like(n, n, w);
        for k in 1..=n {
            m = self.mul(&m).add(&id.scale(&coeffs[n - k + 1]));
            let am = self.mul(&m);
            let c = am.trace().neg().mul(&w.from_i64_like(k as i64).inv().unwrap());
            coeffs[n - k] = c;
        }
        Poly::new(coeffs)
    }
}

impl Matrix<f64> {
    pub fn identity(n: usize) -> Self {
        Self::identity_like(n, &0.0)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::zeros_like(rows, cols, &0.0)
    }

    /// Operator norm induced by the sup norm on row vectors acting on the left
    /// (`v -> v M`), i.e. the largest absolute column sum.
    pub fn row_action_norm(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Operator norm induced by the sup norm on column vectors (`v -> M v`).
    pub fn sup_operator_norm(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|a| a.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// Spectral norm via power iteration on `M^T M`.
    pub fn spectral_norm(&self) -> f64 {
        let mtm = self.transpose().mul(self);
        let n = mtm.rows;
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * i as f64).collect();
        let mut lambda = 0.0;
        for _ in 0..200 {
            let w = mtm.mul_vec(&v);
            let norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm == 0.0 {
                return 0.0;
            }
            let next: Vec<f64> = w.iter().map(|a| a / norm).collect();
            let delta: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
            v = next;
            lambda = norm;
            if delta < 1e-14 {
                break;
            }
        }
        lambda.sqrt()
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.data.iter().zip(&other.data).all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// Polynomial with coefficients in increasing degree; trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly<T> {
    coeffs: Vec<T>,
}

impl<T: Field> Poly<T> {
    pub fn new(mut coeffs: Vec<T>) -> Self {
        while coeffs.len() > 1 && coeffs.last().unwrap().is_negligible(0.0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_negligible(0.0)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Poly::new(vec![self.coeffs[0].zero_like()]);
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, c)| c.mul(&c.from_i64_like(i as i64 + 1)))
            .collect();
        Poly::new(coeffs)
    }

    fn monic(&self) -> Self {
        let lead = self.coeffs.last().unwrap().inv().expect("monic of zero polynomial");
        Poly::new(self.coeffs.iter().map(|c| c.mul(&lead)).collect())
    }

    /// Euclidean division `self = q * d + r`.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let w = &self.coeffs[0];
        let mut r = self.coeffs.clone();
        let dd = d.degree();
        let lead_inv = d.coeffs[dd].inv().unwrap();
        if self.degree() < dd {
            return (Poly::new(vec![w.zero_like()]), self.clone());
        }
        let mut q = vec![w.zero_like(); self.degree() - dd + 1];
        for k in (0..q.len()).rev() {
            let c = r[k + dd].mul(&lead_inv);
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k + j] = r[k + j].sub(&c.mul(dc));
            }
            q[k] = c;
        }
        r.truncate(dd.max(1));
        (Poly::new(q), Poly::new(r))
    }

    /// Monic gcd by Euclid; meaningful for exact fields.
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Square-free part `p / gcd(p, p')`, monic.
    pub fn squarefree_part(&self) -> Self {
        let g = self.gcd(&self.derivative());
        self.monic().div_rem(&g).0.monic()
    }

    pub fn eval_matrix(&self, m: &Matrix<T>) -> Matrix<T> {
        let n = m.rows();
        let w = &self.coeffs[0];
        let mut acc = Matrix::zeros_like(n, n, w);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(m).add(&Matrix::identity_like(n, w).scale(c));
        }
        acc
    }
}

/// Reduced row echelon form in place; returns the pivot columns.
///
/// `tol` is relative to the largest entry for floating matrices.
pub fn rref<T: Field>(m: &mut Matrix<T>, tol: f64) -> Vec<usize> {
    let (rows, cols) = (m.rows(), m.cols());
    let scale = m.sup_norm().max(f64::MIN_POSITIVE);
    let abs_tol = tol * scale;
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let pivot = (r..rows)
            .max_by(|&i, &j| m[(i, c)].magnitude().total_cmp(&m[(j, c)].magnitude()))
            .unwrap();
        if m[(pivot, c)].is_negligible(abs_tol) {
            for i in r..rows {
                m[(i, c)] = m[(i, c)].zero_like();
            }
            continue;
        }
        if pivot != r {
            for j in 0..cols {
                let tmp = m[(pivot, j)].clone();
                m[(pivot, j)] = m[(r, j)].clone();
                m[(r, j)] = tmp;
            }
        }
        let pinv = m[(r, c)].inv().unwrap();
        for j in 0..cols {
            m[(r, j)] = m[(r, j)].mul(&pinv);
        }
        for i in 0..rows {
            if i == r {
                continue;
            }
            let factor = m[(i, c)].clone();
            if factor.is_negligible(0.0) {
                continue;
            }
            for j in 0..cols {
                let t = factor.mul(&m[(r, j)]);
                m[(i, j)] = m[(i, j)].sub(&t);
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of `{x : M x = 0}`.
pub fn nullspace<T: Field>(m: &Matrix<T>, tol: f64) -> Vec<Vec<T>> {
    let mut a = m.clone();
    let pivots = rref(&mut a, tol);
    let cols = a.cols();
    let w = m.data()[0].clone();
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![w.zero_like(); cols];
            v[f] = w.one_like();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = a[(r, f)].neg();
            }
            v
        })
        .collect()
}

pub fn rank<T: Field>(vectors: &[Vec<T>], tol: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let mut m = Matrix::from_rows(vectors.to_vec());
    rref(&mut m, tol).len()
}

/// A basis (echelon rows) for the span of the given vectors.
pub fn span_basis<T: Field>(vectors: &[Vec<T>], tol: f64) -> Vec<Vec<T>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let mut m = Matrix::from_rows(vectors.to_vec());
    let k = rref(&mut m, tol).len();
    (0..k).map(|i| m.row(i).to_vec()).collect()
}

/// Whether `v` lies in the span of `basis` (relative tolerance for floats).
pub fn in_span<T: Field>(v: &[T], basis: &[Vec<T>], tol: f64) -> bool {
    if v.iter().all(|a| a.is_negligible(0.0)) {
        return true;
    }
    let r0 = rank(basis, tol);
    let mut with = basis.to_vec();
    with.push(v.to_vec());
    rank(&with, tol) == r0
}

/// Intersection of two subspaces given by (row) bases.
pub fn intersect<T: Field>(a: &[Vec<T>], b: &[Vec<T>], tol: f64) -> Vec<Vec<T>> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let d = a[0].len();
    let w = a[0][0].clone();
    // Solve sum x_i a_i - sum y_j b_j = 0.
    let mut m = Matrix::zeros_like(d, a.len() + b.len(), &w);
    for (i, ai) in a.iter().enumerate() {
        for r in 0..d {
            m[(r, i)] = ai[r].clone();
        }
    }
    for (j, bj) in b.iter().enumerate() {
        for r in 0..d {
            m[(r, a.len() + j)] = bj[r].neg();
        }
    }
    let sols = nullspace(&m, tol);
    let vecs: Vec<Vec<T>> = sols
        .iter()
        .map(|s| {
            let mut v = vec![w.zero_like(); d];
            for (i, ai) in a.iter().enumerate() {
                for r in 0..d {
                    v[r] = v[r].add(&s[i].mul(&ai[r]));
                }
            }
            v
        })
        .collect();
    span_basis(&vecs, tol)
}

/// Orthonormal basis (Gram-Schmidt, twice) of a real span.
pub fn orthonormalize(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let d: f64 = w.iter().zip(q).map(|(a, b)| a * b).sum();
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= d * qi;
                }
            }
        }
        let n = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        let scale = v.iter().map(|a| a * a).sum::<f64>().sqrt().max(1.0);
        if n > tol * scale {
            out.push(w.iter().map(|a| a / n).collect());
        }
    }
    out
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}
