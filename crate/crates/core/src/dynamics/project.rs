use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use super::reduce::{reduce_matrix, Reduced};
use super::window::{WindowSample, ZpMat};
use super::QuotientSpace;
use crate::error::{Error, Result};
use crate::groups::GroupElement;
use crate::lattice::{strong_approx_zp, ZpDecomposition, ZpRational};
use crate::linalg::Matrix;
use crate::qs_arith::{MatBlock, Place};

/// Hecke leaf `[[p^a, b], [0, p^-a]] SL2(Z)` of a projected `S`-arithmetic point.
pub type Leaf = ZpDecomposition;

/// Weighted points of the fundamental domain, one `(x, y, theta)` per real
/// `SL2` factor.
#[derive(Clone, Debug)]
pub struct EmpiricalMeasure {
    pub factors: usize,
    coords: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub leaves: Option<Vec<Leaf>>,
    pub seed: u64,
    pub count: usize,
}

impl EmpiricalMeasure {
    pub fn new(factors: usize, coords: Vec<[f64; 3]>, weights: Vec<f64>, seed: u64) -> Result<Self> {
        if factors == 0 || coords.len() != weights.len() * factors || weights.is_empty() {
            return Err(Error::invalid("coordinate and weight counts disagree"));
        }
        if weights.iter().any(|w| !(*w > 0.0)) || (super::fsum(weights.iter().copied()) - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("weights must be positive with total 1"));
        }
        let count = weights.len();
        Ok(EmpiricalMeasure { factors, coords, weights, leaves: None, seed, count })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Per-factor coordinates of point `i`.
    pub fn point(&self, i: usize) -> &[[f64; 3]] {
        &self.coords[i * self.factors..(i + 1) * self.factors]
    }

    /// Mass of the compact set `{y <= cap}` in every factor.
    pub fn mass_below_height(&self, cap: f64) -> f64 {
        (0..self.len()).filter(|&i| self.point(i).iter().all(|c| c[1] <= cap)).map(|i| self.weights[i]).sum::<f64>()
    }

    pub fn systoles(&self) -> Vec<f64> {
        (0..self.len()).map(|i| super::reduce::systole_of(self.point(i))).collect()
    }
}

fn zp_pow(p: u64, e: u32) -> Option<i128> {
    (p as i128).checked_pow(e)
}

fn zp_mul(a: ZpRational, b: ZpRational, p: u64) -> Option<ZpRational> {
    Some(ZpRational::new(a.num.checked_mul(b.num)?, a.exp + b.exp, p))
}

fn zp_add(a: ZpRational, b: ZpRational, p: u64) -> Option<ZpRational> {
    if a.num == 0 {
        return Some(b);
    }
    if b.num == 0 {
        return Some(a);
    }
    let e = a.exp.min(b.exp);
    let an = a.num.checked_mul(zp_pow(p, (a.exp - e) as u32)?)?;
    let bn = b.num.checked_mul(zp_pow(p, (b.exp - e) as u32)?)?;
    Some(ZpRational::new(an.checked_add(bn)?, e, p))
}

fn zp_neg(a: ZpRational) -> ZpRational {
    ZpRational { num: -a.num, exp: a.exp }
}

fn zp_matmul(a: &ZpMat, b: &ZpMat, p: u64) -> Option<ZpMat> {
    let e = |i: usize, j: usize| zp_add(zp_mul(a[i][0], b[0][j], p)?, zp_mul(a[i][1], b[1][j], p)?, p);
    Some([[e(0, 0)?, e(0, 1)?], [e(1, 0)?, e(1, 1)?]])
}

/// Adjugate, the inverse of a determinant-one matrix.
fn zp_adj(a: &ZpMat) -> ZpMat {
    [[a[1][1], zp_neg(a[0][1])], [zp_neg(a[1][0]), a[0][0]]]
}

/// `p`-adic block of `g` as a matrix over `Z[1/p]`.
fn zp_block(g: &GroupElement, p: u64) -> Result<ZpMat> {
    let Some(MatBlock::Padic(m)) = g.block_at(Place::Padic(p)) else {
        return Err(Error::invalid(format!("translator has no component at {p}")));
    };
    let conv = |i: usize, j: usize| -> Result<ZpRational> {
        let q = m[(i, j)]
            .to_rational()
            .ok_or_else(|| Error::NotRational(format!("translator entry ({i}, {j})")))?;
        let mut den = q.denom().clone();
        let mut exp = 0i32;
        let pb = BigInt::from(p);
        while !den.is_one() {
            let (d, r) = den.div_rem(&pb);
            if !r.is_zero() {
                return Err(Error::unsupported(format!("translator entry {q} is not in Z[1/{p}]")));
            }
            den = d;
            exp -= 1;
        }
        let num = q.numer().to_i128().ok_or_else(|| Error::unsupported("translator entry too large"))?;
        Ok(ZpRational::new(num, exp, p))
    };
    Ok([[conv(0, 0)?, conv(0, 1)?], [conv(1, 0)?, conv(1, 1)?]])
}

fn real_block(g: &GroupElement, size: usize) -> Result<Matrix<f64>> {
    let m = g.real_block().ok_or_else(|| Error::invalid("translator has no real component"))?;
    if m.rows() != size {
        return Err(Error::invalid("translator lives in a different group"));
    }
    Ok(m.clone())
}

/// Reduces `u^-1` for each real `SL2` block of `h`.
fn project_real(h: &Matrix<f64>, factors: usize) -> Result<Vec<Reduced>> {
    (0..factors)
        .map(|f| {
            let o = 2 * f;
            let (a, b, c, d) = (h[(o, o)], h[(o, o + 1)], h[(o + 1, o)], h[(o + 1, o + 1)]);
            reduce_matrix([[d, -b], [-c, a]])
        })
        .collect()
}

/// Points `g h_k` of `G / Gamma` for the window sample `h_k`, projected to the
/// fundamental domain; `p`-adic components are absorbed by strong approximation.
pub fn translate_and_project(samples: &WindowSample, g: &GroupElement, space: &QuotientSpace) -> Result<EmpiricalMeasure> {
    if samples.space != *space || g.tag() != space.tag || g.places() != space.places().as_slice() {
        return Err(Error::invalid("samples, translator and space disagree"));
    }
    let size = space.tag.matrix_size();
    let factors = space.factors();
    let g_real = real_block(g, size)?;
    let g_padic = match space.prime {
        Some(p) => {
            let gp = zp_block(g, p)?;
            // gamma depends on k modulo p^(2v) where p^-v bounds the denominators.
            let v = gp.iter().flatten().filter(|z| z.num != 0).map(|z| (-z.exp).max(0)).max().unwrap_or(0);
            if 2 * v as u32 + 4 > space.depth {
                return Err(Error::PrecisionLoss(format!(
                    "translator needs {} p-adic digits, samples carry {}",
                    2 * v + 4,
                    space.depth
                )));
            }
            Some((p, zp_adj(&gp)))
        }
        None => None,
    };
    let projected: Vec<(Vec<Reduced>, Option<Leaf>)> = samples
        .elements
        .par_iter()
        .map(|h| {
            let mut real = g_real.mul(&h.real);
            let mut leaf = None;
            if let Some((p, g_inv)) = &g_padic {
                let k = h.padic.ok_or_else(|| Error::invalid("sample lacks a p-adic component"))?;
                // (g k)^-1 = gamma kappa with gamma over Z[1/p]; the point is (real gamma, kappa^-1).
                let x = zp_matmul(&zp_adj(&k), g_inv, *p).ok_or_else(|| Error::PrecisionLoss("Z[1/p] overflow".into()))?;
                let dec = strong_approx_zp(x, *p).ok_or_else(|| Error::NoDecomposition("strong approximation overflow".into()))?;
                let gm = dec.gamma_f64(*p);
                real = real.mul(&Matrix::from_rows(vec![gm[0].to_vec(), gm[1].to_vec()]));
                leaf = Some(dec);
            }
            Ok((project_real(&real, factors)?, leaf))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut coords = Vec::with_capacity(projected.len() * factors);
    let mut leaves = Vec::new();
    for (r, l) in projected {
        coords.extend(r.iter().map(Reduced::coords));
        leaves.extend(l);
    }
    let mut mu = EmpiricalMeasure::new(factors, coords, samples.weights.clone(), samples.seed)?;
    if space.prime.is_some() {
        mu.leaves = Some(leaves);
    }
    Ok(mu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{sample_window, OmegaWindow};
    use crate::groups::{catalogue, GroupTag};
    use crate::linalg::rational;
    use std::collections::HashSet;

    fn diag(t: f64) -> GroupElement {
        GroupElement::sl2(t.exp(), 0.0, 0.0, (-t).exp()).unwrap()
    }

    /// Reduction by brute force over `z -> z + n` and `z -> -1/z`.
    fn oracle(z: (f64, f64)) -> (f64, f64) {
        let (mut x, mut y) = z;
        for _ in 0..1000 {
            x -= x.round();
            let r = x * x + y * y;
            if r >= 1.0 - 1e-12 {
                break;
            }
            (x, y) = (-x / r, y / r);
        }
        (x, y)
    }

    #[test]
    fn identity_translate_is_the_window() {
        let omega = OmegaWindow::ball(catalogue("sl2R.rotation").unwrap(), 4.0).unwrap();
        let s = sample_window(&omega, 500, 2).unwrap();
        let mu = translate_and_project(&s, &GroupElement::sl2(1.0, 0.0, 0.0, 1.0).unwrap(), &omega.space).unwrap();
        for i in 0..mu.len() {
            let [x, y, th] = mu.point(i)[0];
            assert!(x.abs() < 1e-12 && (y - 1.0).abs() < 1e-12);
            // k_t^-1 has angle t.
            let t = s.coords[i][0];
            let d = (th - 2.0 * t).rem_euclid(2.0 * std::f64::consts::PI);
            assert!(d < 1e-9 || (2.0 * std::f64::consts::PI - d) < 1e-9);
        }
    }

    #[test]
    fn expanding_circle_matches_moebius() {
        let omega = OmegaWindow::ball(catalogue("sl2R.rotation").unwrap(), 4.0).unwrap();
        let s = sample_window(&omega, 500, 4).unwrap();
        let mu = translate_and_project(&s, &diag(2.0), &omega.space).unwrap();
        for i in 0..mu.len() {
            // h^-1 . i = k^-1 . (e^-4 i).
            let t = s.coords[i][0];
            let (c, sn) = (t.cos(), t.sin());
            let w = (-4.0f64).exp();
            // (c z - s) / (s z + c) at z = i w.
            let (nr, ni) = (-sn, c * w);
            let (dr, di) = (c, sn * w);
            let q = dr * dr + di * di;
            let z = ((nr * dr + ni * di) / q, (ni * dr - nr * di) / q);
            let (ox, oy) = oracle(z);
            let [x, y, _] = mu.point(i)[0];
            assert!((y - oy).abs() < 1e-9 * oy.max(1.0), "{y} vs {oy}");
            assert!((x.abs() - ox.abs()).abs() < 1e-7);
        }
    }

    #[test]
    fn hecke_leaves_at_four() {
        let omega = OmegaWindow::ball(catalogue("sl2Q2.compact").unwrap(), 1.0).unwrap();
        let s = sample_window(&omega, 20_000, 5).unwrap();
        let places = [Place::Real, Place::Padic(2)];
        let a = Matrix::from_rows(vec![vec![rational(1, 2), rational(0, 1)], vec![rational(0, 1), rational(2, 1)]]);
        let g = GroupElement::new(
            GroupTag::SL2,
            places.to_vec(),
            vec![MatBlock::Real(Matrix::identity(2)), MatBlock::embed(Place::Padic(2), &a)],
        )
        .unwrap();
        let mu = translate_and_project(&s, &g, &omega.space).unwrap();
        let leaves: HashSet<Leaf> = mu.leaves.clone().unwrap().into_iter().collect();
        assert_eq!(leaves.len(), 6);
        // Each leaf carries mass 1/6.
        for l in &leaves {
            let m: f64 = mu.leaves.as_ref().unwrap().iter().zip(&mu.weights).filter(|(x, _)| *x == l).map(|(_, w)| w).sum();
            assert!((m - 1.0 / 6.0).abs() < 0.02, "{l:?}: {m}");
        }
    }

    #[test]
    fn right_gamma_invariance() {
        let omega = OmegaWindow::ball(catalogue("sl2R.full").unwrap(), 0.5).unwrap();
        let s = sample_window(&omega, 200, 8).unwrap();
        let mut moved = s.clone();
        let gamma = Matrix::from_rows(vec![vec![2.0, 1.0], vec![7.0, 4.0]]);
        for e in &mut moved.elements {
            e.real = e.real.mul(&gamma);
        }
        let g = diag(1.3);
        let (a, b) = (translate_and_project(&s, &g, &omega.space).unwrap(), translate_and_project(&moved, &g, &omega.space).unwrap());
        let tau = 2.0 * std::f64::consts::PI;
        for i in 0..a.len() {
            let ([x, y, t], [x2, y2, t2]) = (a.point(i)[0], b.point(i)[0]);
            assert!((x - x2).abs() < 1e-8 && (y - y2).abs() < 1e-8, "{x} {y} / {x2} {y2}");
            let d = (t - t2).rem_euclid(tau);
            assert!(d.min(tau - d) < 1e-8);
        }
    }
}
