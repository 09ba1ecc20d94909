use num_complex::Complex64;
use num_rational::BigRational;

use super::expmap::{is_nilpotent, log_unipotent};
use super::{GroupElement, LieAlgElem};
use crate::linalg::{Field, Matrix, Poly};
use crate::qs_arith::{MatBlock, PadicScalar};

/// Roots of a real polynomial (coefficients in increasing degree) by
/// Durand-Kerner iteration.
fn poly_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let c: Vec<f64> = coeffs.iter().map(|a| a / lead).collect();
    let eval = |z: Complex64| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a);
    let bound = 1.0 + c[..n].iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * bound).collect();
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let denom = (0..n).filter(|&j| j != i).fold(Complex64::new(1.0, 0.0), |acc, j| acc * (z[i] - z[j]));
            if denom.norm() == 0.0 {
                z[i] += Complex64::new(1e-8, 1e-8) * bound;
                continue;
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved <= 1e-17 * bound {
            break;
        }
    }
    z
}

/// Eigenvalues of a real square matrix.
pub fn real_eigenvalues(g: &Matrix<f64>) -> Vec<Complex64> {
    poly_roots(g.charpoly().coeffs())
}

/// Groups roots closer than `tol` (single linkage) and returns cluster means.
fn cluster(roots: &[Complex64], tol: f64) -> Vec<Complex64> {
    let n = roots.len();
    let mut label: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in 0..i {
            if (roots[i] - roots[j]).norm() <= tol {
                let (a, b) = (label[i], label[j]);
                for l in label.iter_mut() {
                    if *l == a {
                        *l = b;
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    let mut seen: Vec<usize> = Vec::new();
    for i in 0..n {
        if seen.contains(&label[i]) {
            continue;
        }
        seen.push(label[i]);
        let members: Vec<Complex64> = (0..n).filter(|&j| label[j] == label[i]).map(|j| roots[j]).collect();
        out.push(members.iter().sum::<Complex64>() / members.len() as f64);
    }
    out
}

/// Real polynomial with the given (conjugation-closed) roots.
fn real_poly_from_roots(roots: &[Complex64]) -> Poly<f64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (k, a) in c.iter().enumerate() {
            next[k + 1] += a;
            next[k] -= a * r;
        }
        c = next;
    }
    Poly::new(c.iter().map(|z| z.re).collect())
}

/// Newton iteration `A <- A - q(A) q'(A)^-1` from `A = g`, converging to the
/// semisimple part when `q` is the square-free part of the characteristic polynomial.
fn newton_semisimple<T: Field>(g: &Matrix<T>, q: &Poly<T>, tol: f64) -> Option<Matrix<T>> {
    let dq = q.derivative();
    let mut a = g.clone();
    for _ in 0..60 {
        let qa = q.eval_matrix(&a);
        if qa.is_negligible(tol) {
            return Some(a);
        }
        a = a.sub(&qa.mul(&dq.eval_matrix(&a).inverse()?));
    }
    None
}

/// Jordan-Chevalley decomposition over an exact field.
pub fn jordan_exact<T: Field>(g: &Matrix<T>) -> (Matrix<T>, Matrix<T>) {
    let q = g.charpoly().squarefree_part();
    let gs = newton_semisimple(g, &q, 0.0).expect("Newton terminates over exact fields");
    let gu = gs.inverse().expect("g is invertible").mul(g);
    (gs, gu)
}

/// Newton with cluster centres refined twice by `tr(g P_c) / tr(P_c)`, where
/// `P_c` is the spectral projector of the current semisimple part.
fn semisimple_with_centers(g: &Matrix<f64>, mut centers: Vec<Complex64>, scale: f64) -> Option<Matrix<f64>> {
    let n = g.rows();
    let tol = 1e-13 * scale.powi(centers.len() as i32);
    let mut gs = newton_semisimple(g, &real_poly_from_roots(&centers), tol)?;
    for _ in 0..2 {
        let gc = gs.map(|x| Complex64::new(*x, 0.0));
        let g_c = g.map(|x| Complex64::new(*x, 0.0));
        let id = Matrix::identity_like(n, &Complex64::new(0.0, 0.0));
        let refined: Vec<Complex64> = centers
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let p = centers.iter().enumerate().filter(|&(j, _)| j != i).fold(id.clone(), |acc, (_, &d)| {
                    acc.mul(&gc.sub(&id.scale(&d))).scale(&(1.0 / (c - d)))
                });
                let k = p.trace();
                if k.norm() < 0.5 {
                    c
                } else {
                    g_c.mul(&p).trace() / k
                }
            })
            .collect();
        centers = refined;
        gs = newton_semisimple(g, &real_poly_from_roots(&centers), tol)?;
    }
    Some(gs)
}

/// Jordan decomposition of a real matrix. Eigenvalues closer than a tolerance
/// are treated as one; tolerances are tried from coarse to fine and the first
/// decomposition passing the structural checks wins.
pub fn jordan_real(g: &Matrix<f64>) -> (Matrix<f64>, Matrix<f64>) {
    let n = g.rows();
    let roots = real_eigenvalues(g);
    let scale = roots.iter().fold(1.0f64, |m, r| m.max(r.norm()));
    let id = Matrix::identity(n);
    for tol in [1e-4, 1e-6, 1e-8] {
        let centers = cluster(&roots, tol * scale);
        if centers.len() == n {
            break;
        }
        let Some(gs) = semisimple_with_centers(g, centers, scale) else {
            continue;
        };
        let Some(gsi) = gs.inverse() else { continue };
        let gu = gsi.mul(g);
        let commutes = gs.mul(&gu).approx_eq(&gu.mul(&gs), 1e-9 * g.sup_norm().max(1.0));
        if commutes && is_nilpotent(&gu.sub(&id), 1e-9) {
            return (gs, gu);
        }
    }
    (g.clone(), id)
}

/// `(g_s, g_u)` with `g = g_s g_u = g_u g_s`, per place.
pub fn jordan_decompose(g: &GroupElement) -> (GroupElement, GroupElement) {
    let mut ss = Vec::new();
    let mut us = Vec::new();
    for b in g.blocks() {
        match b {
            MatBlock::Real(m) => {
                let (s, u) = jordan_real(m);
                ss.push(MatBlock::Real(s));
                us.push(MatBlock::Real(u));
            }
            MatBlock::Padic(m) => {
                let p = m.data()[0].prime();
                let (s, u) = match m.data().iter().map(PadicScalar::to_rational).collect::<Option<Vec<_>>>() {
                    Some(qs) => {
                        let (s, u) = jordan_exact(&Matrix::<BigRational>::from_vec(m.rows(), m.cols(), qs));
                        let embed = |x: &BigRational| PadicScalar::from_rational(p, x.clone());
                        (s.map(embed), u.map(embed))
                    }
                    None => jordan_exact(m),
                };
                ss.push(MatBlock::Padic(s));
                us.push(MatBlock::Padic(u));
            }
        }
    }
    (
        GroupElement::from_parts(g.tag(), g.places().to_vec(), ss),
        GroupElement::from_parts(g.tag(), g.places().to_vec(), us),
    )
}

/// Whether `g` is unipotent at every place; if so and `g != 1`, the nilpotent
/// `X = log g` with `exp(tX)` passing through `g` at `t = 1`.
pub fn unipotent_analysis(g: &GroupElement) -> (bool, Option<LieAlgElem>) {
    let mut blocks = Vec::new();
    let mut trivial = true;
    for b in g.blocks() {
        match b {
            MatBlock::Real(m) => {
                let x = m.sub(&Matrix::identity(m.rows()));
                if !is_nilpotent(&x, 1e-10) {
                    return (false, None);
                }
                trivial &= x.is_negligible(1e-14);
                blocks.push(MatBlock::Real(log_unipotent(&x)));
            }
            MatBlock::Padic(m) => {
                let w = &m.data()[0];
                let x = m.sub(&Matrix::identity_like(m.rows(), &w.one_like()));
                if !is_nilpotent(&x, 0.0) {
                    return (false, None);
                }
                trivial &= x.is_negligible(0.0);
                blocks.push(MatBlock::Padic(log_unipotent(&x)));
            }
        }
    }
    if trivial {
        return (true, None);
    }
    (true, Some(LieAlgElem::from_parts(g.tag(), g.places().to_vec(), blocks)))
}
