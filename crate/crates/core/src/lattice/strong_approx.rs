//! `SL2(Q_p) = SL2(Z[1/p]) . SL2(Z_p)`, with the `Z[1/p]` factor in the
//! triangular form `[[p^a, b], [0, p^-a]]`, `b` reduced modulo `p^a`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::qs_arith::{rational_valuation, scale_by_power, truncate_mod_power, PadicScalar};

/// `(gamma, k)` with `gamma k = g`, `gamma` triangular over `Z[1/p]`, `k` in `SL2(Z_p)`.
pub fn strong_approx_reduce(g: &Matrix<PadicScalar>) -> Result<(Matrix<BigRational>, Matrix<BigRational>)> {
    if g.rows() != 2 || g.cols() != 2 {
        return Err(Error::invalid("strong approximation is implemented for 2x2 matrices"));
    }
    let p = g.data()[0].prime();
    let rat = g
        .data()
        .iter()
        .map(|x| {
            x.to_rational()
                .ok_or_else(|| Error::NotRational(format!("entry {x} is not an exact rational")))
        })
        .collect::<Result<Vec<_>>>()?;
    strong_approx_reduce_rational(&Matrix::from_vec(2, 2, rat), p)
}

pub fn strong_approx_reduce_rational(
    g: &Matrix<BigRational>,
    p: u64,
) -> Result<(Matrix<BigRational>, Matrix<BigRational>)> {
    if g.rows() != 2 || g.cols() != 2 {
        return Err(Error::invalid("strong approximation is implemented for 2x2 matrices"));
    }
    if !g.det().is_one() {
        return Err(Error::invalid("strong approximation needs det g = 1 exactly"));
    }
    let (g11, g12, g21, g22) = (&g[(0, 0)], &g[(0, 1)], &g[(1, 0)], &g[(1, 1)]);
    let vmin = [rational_valuation(g21, p), rational_valuation(g22, p)]
        .into_iter()
        .flatten()
        .min()
        .ok_or_else(|| Error::NoDecomposition("bottom row vanishes".into()))?;
    let a = -vmin;
    let r = scale_by_power(g21, p, a);
    let s = scale_by_power(g22, p, a);
    // One of r, s is a p-adic unit; solve for b against it.
    let b = if rational_valuation(&s, p) == Some(0) {
        truncate_mod_power(&(g12 / &s), p, a)
    } else {
        truncate_mod_power(&(g11 / &r), p, a)
    };
    let pa = scale_by_power(&BigRational::one(), p, a);
    let gamma = Matrix::from_rows(vec![
        vec![pa.clone(), b.clone()],
        vec![BigRational::zero(), pa.recip()],
    ]);
    let gamma_inv = Matrix::from_rows(vec![
        vec![pa.recip(), -b],
        vec![BigRational::zero(), pa],
    ]);
    let k = gamma_inv.mul(g);
    let integral = k
        .data()
        .iter()
        .all(|x| rational_valuation(x, p).is_none_or(|v| v >= 0));
    if !integral || !k.det().is_one() || gamma.mul(&k) != *g {
        return Err(Error::NoDecomposition(format!("internal failure on {g:?}")));
    }
    Ok((gamma, k))
}

/// `num * p^exp`, an element of `Z[1/p]` with small numerator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ZpRational {
    pub num: i128,
    pub exp: i32,
}

impl ZpRational {
    /// Normalises so that `num` is prime to `p` (or zero with `exp = 0`).
    pub fn new(num: i128, exp: i32, p: u64) -> Self {
        if num == 0 {
            return ZpRational { num: 0, exp: 0 };
        }
        let (mut n, mut e) = (num, exp);
        while n % p as i128 == 0 {
            n /= p as i128;
            e += 1;
        }
        ZpRational { num: n, exp: e }
    }

    pub fn valuation(&self) -> Option<i32> {
        (self.num != 0).then_some(self.exp)
    }

    pub fn to_f64(&self, p: u64) -> f64 {
        self.num as f64 * (p as f64).powi(self.exp)
    }

    pub fn to_rational(&self, p: u64) -> BigRational {
        scale_by_power(&BigRational::from_integer(BigInt::from(self.num)), p, self.exp as i64)
    }

    /// Integer value when `exp >= 0`, `None` on overflow or for fractions.
    fn to_integer(self, p: u64) -> Option<i128> {
        if self.num == 0 {
            return Some(0);
        }
        if self.exp < 0 {
            return None;
        }
        (p as i128).checked_pow(self.exp as u32)?.checked_mul(self.num)
    }
}

/// Triangular factor `[[p^a, b], [0, p^-a]]` of the strong-approximation decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ZpDecomposition {
    pub a: i32,
    pub b: ZpRational,
}

impl ZpDecomposition {
    pub fn gamma_f64(&self, p: u64) -> [[f64; 2]; 2] {
        let pa = (p as f64).powi(self.a);
        [[pa, self.b.to_f64(p)], [0.0, 1.0 / pa]]
    }
}

fn inv_mod(a: i128, m: i128) -> Option<i128> {
    let (mut r0, mut r1) = (a.rem_euclid(m), m);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    (r0 == 1).then(|| s0.rem_euclid(m))
}

/// Fixed-width version of [`strong_approx_reduce_rational`] for matrices over
/// `Z[1/p]`; returns only the `Z[1/p]` factor. `None` on overflow.
pub fn strong_approx_zp(g: [[ZpRational; 2]; 2], p: u64) -> Option<ZpDecomposition> {
    let vmin = [g[1][0].valuation(), g[1][1].valuation()]
        .into_iter()
        .flatten()
        .min()?;
    let a = -vmin;
    let shift = |x: ZpRational| ZpRational { num: x.num, exp: x.exp + a };
    let r = shift(g[1][0]).to_integer(p)?;
    let s = shift(g[1][1]).to_integer(p)?;
    let pi = p as i128;
    let (target, unit) = if s % pi != 0 { (g[0][1], s) } else { (g[0][0], r) };
    let b = match target.valuation() {
        Some(v) if v < a => {
            let m = pi.checked_pow((a - v) as u32)?;
            let res = (target.num.rem_euclid(m)).checked_mul(inv_mod(unit, m)?)?.rem_euclid(m);
            ZpRational::new(res, v, p)
        }
        _ => ZpRational { num: 0, exp: 0 },
    };
    Some(ZpDecomposition { a, b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rational;

    fn m(rows: [[(i64, i64); 2]; 2]) -> Matrix<BigRational> {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&(n, d)| rational(n, d)).collect())
                .collect(),
        )
    }

    #[test]
    fn already_triangular() {
        let g = m([[(1, 1), (1, 2)], [(0, 1), (1, 1)]]);
        let (gamma, k) = strong_approx_reduce_rational(&g, 2).unwrap();
        assert_eq!(gamma, g);
        assert_eq!(k, Matrix::identity_like(2, &rational(0, 1)));
    }

    #[test]
    fn lower_row_example() {
        let g = m([[(1, 2), (0, 1)], [(1, 1), (2, 1)]]);
        let (gamma, k) = strong_approx_reduce_rational(&g, 2).unwrap();
        assert_eq!(gamma, m([[(1, 1), (1, 2)], [(0, 1), (1, 1)]]));
        assert_eq!(k, m([[(0, 1), (-1, 1)], [(1, 1), (2, 1)]]));
    }

    #[test]
    fn identity_and_negative_exponent() {
        let id = m([[(1, 1), (0, 1)], [(0, 1), (1, 1)]]);
        assert_eq!(strong_approx_reduce_rational(&id, 2).unwrap(), (id.clone(), id));
        // diag(1/2, 2) is its own triangular factor, with a = -1.
        let d = m([[(1, 2), (0, 1)], [(0, 1), (2, 1)]]);
        let (gamma, _) = strong_approx_reduce_rational(&d, 2).unwrap();
        assert_eq!(gamma, d);
    }

    #[test]
    fn non_rational_entries_are_rejected() {
        let x = PadicScalar::from_int(2, 1).to_approx(10);
        let g = Matrix::from_rows(vec![
            vec![x.clone(), PadicScalar::zero(2)],
            vec![PadicScalar::zero(2), x],
        ]);
        assert!(matches!(strong_approx_reduce(&g), Err(Error::NotRational(_))));
    }

    #[test]
    fn fixed_width_agrees() {
        let p = 2;
        let cases = [[[3i64, 1], [5, 2]], [[1, 4], [1, 5]], [[7, 2], [3, 1]], [[0, -1], [1, 0]]];
        for k in cases {
            for i in 0..6 {
                // (diag(p^-i, p^i) k)^-1 = k^-1 diag(p^i, p^-i)
                let zr = |n: i64, e: i32| ZpRational::new(n as i128, e, p);
                let g = [[zr(k[1][1], i), zr(-k[0][1], -i)], [zr(-k[1][0], i), zr(k[0][0], -i)]];
                let fast = strong_approx_zp(g, p).unwrap();
                let exact = Matrix::from_rows(
                    g.iter().map(|r| r.iter().map(|x| x.to_rational(p)).collect()).collect(),
                );
                let (gamma, _) = strong_approx_reduce_rational(&exact, p).unwrap();
                assert_eq!(gamma[(0, 1)], fast.b.to_rational(p));
                assert_eq!(gamma[(0, 0)], scale_by_power(&BigRational::one(), p, fast.a as i64));
            }
        }
    }
}
