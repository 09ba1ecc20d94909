use super::jordan::real_eigenvalues;
use super::{GroupElement, LieAlgElem};
use crate::error::{Error, Result};
use crate::linalg::{Field, Matrix};
use crate::qs_arith::{MatBlock, PadicScalar, DEFAULT_PRECISION};

/// Whether `x^n` vanishes to the given relative tolerance.
pub(super) fn is_nilpotent<T: Field>(x: &Matrix<T>, tol: f64) -> bool {
    let n = x.rows() as u32;
    let scale = x.sup_norm().max(1.0).powi(n as i32);
    x.pow(n).is_negligible(tol * scale)
}

/// `sum_{k < n} x^k / k!` for nilpotent `x`.
fn exp_nilpotent<T: Field>(x: &Matrix<T>) -> Matrix<T> {
    let w = &x.data()[0];
    let mut term = Matrix::identity_like(x.rows(), w);
    let mut acc = term.clone();
    for k in 1..x.rows() {
        term = term.mul(x).scale(&w.from_i64_like(k as i64).inv().unwrap());
        acc = acc.add(&term);
    }
    acc
}

/// `sum_{k < n} (-1)^{k+1} x^k / k` for nilpotent `x`.
pub(super) fn log_unipotent<T: Field>(x: &Matrix<T>) -> Matrix<T> {
    let w = &x.data()[0];
    let mut pow = x.clone();
    let mut acc = x.clone();
    for k in 2..x.rows() {
        pow = pow.mul(x);
        let c = w.from_i64_like(if k % 2 == 0 { -(k as i64) } else { k as i64 }).inv().unwrap();
        acc = acc.add(&pow.scale(&c));
    }
    acc
}

/// Matrix exponential by scaling and squaring.
pub fn exp_real(x: &Matrix<f64>) -> Matrix<f64> {
    if is_nilpotent(x, 1e-15) {
        return exp_nilpotent(x);
    }
    let norm = x.sup_operator_norm();
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let y = x.scale(&0.5f64.powi(s));
    let n = x.rows();
    let mut term = Matrix::identity(n);
    let mut acc = term.clone();
    for k in 1..30 {
        term = term.mul(&y).scale(&(1.0 / k as f64));
        acc = acc.add(&term);
        if term.sup_norm() < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        acc = acc.mul(&acc);
    }
    acc
}

/// Denman-Beavers square root; `None` when the iteration fails to settle.
fn sqrtm(a: &Matrix<f64>) -> Option<Matrix<f64>> {
    let mut y = a.clone();
    let mut z = Matrix::identity(a.rows());
    for _ in 0..100 {
        let yi = y.inverse()?;
        let zi = z.inverse()?;
        let ny = y.add(&zi).scale(&0.5);
        let nz = z.add(&yi).scale(&0.5);
        let delta = ny.sub(&y).sup_norm();
        y = ny;
        z = nz;
        if !delta.is_finite() {
            return None;
        }
        if delta <= 1e-15 * y.sup_norm() {
            return Some(y);
        }
    }
    None
}

/// Principal matrix logarithm by inverse scaling and squaring. Undefined
/// when an eigenvalue lies on the closed negative real axis.
pub fn log_real(g: &Matrix<f64>) -> Result<Matrix<f64>> {
    let n = g.rows();
    let id = Matrix::identity(n);
    let x = g.sub(&id);
    if is_nilpotent(&x, 1e-13) {
        return Ok(log_unipotent(&x));
    }
    let tol = 1e-9 * g.sup_norm().max(1.0);
    for l in real_eigenvalues(g) {
        if l.re <= tol && l.im.abs() <= tol {
            return Err(Error::LogUndefined(format!("eigenvalue {l} on the branch cut")));
        }
    }
    let mut a = g.clone();
    let mut k = 0;
    while a.sub(&id).sup_operator_norm() > 0.25 {
        a = sqrtm(&a).ok_or_else(|| Error::LogUndefined("square-root iteration diverged".into()))?;
        k += 1;
        if k > 64 {
            return Err(Error::LogUndefined("too many square roots".into()));
        }
    }
    // Gregory series: log a = 2 sum z^(2j+1) / (2j+1), z = (a - 1)(a + 1)^-1.
    let z = a
        .sub(&id)
        .mul(&a.add(&id).inverse().ok_or_else(|| Error::LogUndefined("singular a + 1".into()))?);
    let z2 = z.mul(&z);
    let mut term = z.clone();
    let mut acc = z.clone();
    for j in 1..40 {
        term = term.mul(&z2);
        let t = term.scale(&(1.0 / (2 * j + 1) as f64));
        acc = acc.add(&t);
        if t.sup_norm() < 1e-18 {
            break;
        }
    }
    let out = acc.scale(&(2.0 * 2f64.powi(k)));
    if !exp_real(&out).approx_eq(g, 1e-8 * g.sup_norm().max(1.0)) {
        return Err(Error::LogUndefined("logarithm failed to reproduce its input".into()));
    }
    Ok(out)
}

/// Smallest valuation among the entries, `None` for the zero matrix.
fn min_valuation(x: &Matrix<PadicScalar>) -> Option<i64> {
    x.data().iter().filter_map(PadicScalar::valuation).min()
}

/// Valuation bound `v > 1/(p-1)` for convergence of exp and log.
fn in_padic_radius(v: i64, p: u64) -> bool {
    (v as i128) * (p as i128 - 1) > 1
}

fn all_exact(x: &Matrix<PadicScalar>) -> bool {
    x.data().iter().all(PadicScalar::is_exact)
}

/// Absolute precision the series must reach: the coarsest input entry, or
/// [`DEFAULT_PRECISION`] digits past the leading valuation for exact input.
fn target_precision(x: &Matrix<PadicScalar>, v: i64) -> i64 {
    x.data()
        .iter()
        .filter(|e| !e.is_exact())
        .map(|e| e.valuation().unwrap_or(0) + e.precision() as i64)
        .min()
        .unwrap_or(v + DEFAULT_PRECISION as i64)
}

fn approx(x: &Matrix<PadicScalar>) -> Matrix<PadicScalar> {
    x.map(|e| if e.is_exact() && !e.is_zero() { e.to_approx(DEFAULT_PRECISION) } else { e.clone() })
}

/// p-adic exponential: exact on nilpotents, otherwise the power series on
/// `|x|_p < p^(-1/(p-1))`.
pub fn exp_padic(x: &Matrix<PadicScalar>) -> Result<Matrix<PadicScalar>> {
    let w = x.data()[0].clone();
    let p = w.prime();
    if all_exact(x) && is_nilpotent(x, 0.0) {
        return Ok(exp_nilpotent(x));
    }
    let Some(v) = min_valuation(x) else {
        return Ok(Matrix::identity_like(x.rows(), &w));
    };
    if !in_padic_radius(v, p) {
        return Err(Error::ExpDivergent(format!(
            "|X|_{p} = {p}^{} is outside the radius {p}^(-1/{})",
            -v,
            p - 1
        )));
    }
    let target = target_precision(x, v);
    let y = approx(x);
    let mut term = Matrix::identity_like(x.rows(), &w.one_like());
    let mut acc = term.clone();
    for k in 1u64.. {
        // Term k has valuation at least k (v - 1/(p-1)), which only grows.
        if (k as i64) * (v * (p as i64 - 1) - 1) >= target * (p as i64 - 1) {
            break;
        }
        term = term.mul(&y).scale(&PadicScalar::from_int(p, k as i64).inv().unwrap());
        acc = acc.add(&term);
    }
    Ok(acc)
}

/// p-adic logarithm on the same domain as [`exp_padic`] (exact on unipotents).
pub fn log_padic(g: &Matrix<PadicScalar>) -> Result<Matrix<PadicScalar>> {
    let w = g.data()[0].clone();
    let p = w.prime();
    let x = g.sub(&Matrix::identity_like(g.rows(), &w.one_like()));
    if all_exact(g) && is_nilpotent(&x, 0.0) {
        return Ok(log_unipotent(&x));
    }
    let Some(v) = min_valuation(&x) else {
        return Ok(Matrix::zeros_like(g.rows(), g.rows(), &w.zero_like()));
    };
    if !in_padic_radius(v, p) {
        return Err(Error::LogUndefined(format!(
            "|g - 1|_{p} = {p}^{} is outside the radius {p}^(-1/{})",
            -v,
            p - 1
        )));
    }
    let target = target_precision(&x, v);
    let y = approx(&x);
    let mut pow = y.clone();
    let mut acc = y.clone();
    for k in 2u64.. {
        // Term k has valuation at least k v - log_p k, which only grows.
        if k as i64 * v - (k as f64).log(p as f64).floor() as i64 >= target {
            break;
        }
        pow = pow.mul(&y);
        let c = PadicScalar::from_int(p, if k % 2 == 0 { -(k as i64) } else { k as i64 });
        acc = acc.add(&pow.scale(&c.inv().unwrap()));
    }
    Ok(acc)
}

pub fn exp(x: &LieAlgElem) -> Result<GroupElement> {
    let blocks = x
        .blocks()
        .iter()
        .map(|b| match b {
            MatBlock::Real(m) => Ok(MatBlock::Real(exp_real(m))),
            MatBlock::Padic(m) => exp_padic(m).map(MatBlock::Padic),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GroupElement::from_parts(x.tag(), x.places().to_vec(), blocks))
}

pub fn log(g: &GroupElement) -> Result<LieAlgElem> {
    let blocks = g
        .blocks()
        .iter()
        .map(|b| match b {
            MatBlock::Real(m) => log_real(m).map(MatBlock::Real),
            MatBlock::Padic(m) => log_padic(m).map(MatBlock::Padic),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LieAlgElem::from_parts(g.tag(), g.places().to_vec(), blocks))
}
