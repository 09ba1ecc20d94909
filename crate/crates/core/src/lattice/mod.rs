//! `Z_S`-lattices `Z_S^m g` in `Q_S^m` (row convention).

mod strong_approx;
mod tightness;

pub use strong_approx::{
    strong_approx_reduce, strong_approx_reduce_rational, strong_approx_zp, ZpDecomposition, ZpRational,
};
pub use tightness::{mahler_tightness_diagnostic, TightnessFlag, TightnessProfile, TightnessRow};

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::qs_arith::{
    per_place_norms, primes_of, rational_abs, scale_by_power, validate_places, ArchNorm, MatBlock, Place,
    QSVector,
};

/// Default cap on the number of coefficient rows `short_vectors` may visit.
pub const DEFAULT_BUDGET: u128 = 20_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ZSLattice {
    places: Vec<Place>,
    blocks: Vec<MatBlock>,
    exact: Option<Matrix<BigRational>>,
    arch: ArchNorm,
}

impl ZSLattice {
    /// Lattice with per-place basis blocks. `S` must contain the real place.
    pub fn new(places: Vec<Place>, blocks: Vec<MatBlock>) -> Result<Self> {
        validate_places(&places)?;
        if !places.contains(&Place::Real) {
            return Err(Error::invalid("Z_S is discrete in Q_S only when S contains the real place"));
        }
        if places.len() != blocks.len() {
            return Err(Error::invalid("one basis block per place is required"));
        }
        let m = blocks[0].rows();
        for (v, b) in places.iter().zip(&blocks) {
            if b.place() != *v || b.rows() != m {
                return Err(Error::invalid(format!("basis block at {v} has the wrong shape or place")));
            }
            if b.det_abs()? == 0.0 {
                return Err(Error::invalid(format!("basis is singular at {v}")));
            }
        }
        Ok(ZSLattice {
            places,
            blocks,
            exact: None,
            arch: ArchNorm::Euclidean,
        })
    }

    /// `Z_S^m g` for a rational `g`, embedded diagonally.
    pub fn from_rational(places: &[Place], g: Matrix<BigRational>) -> Result<Self> {
        if !g.is_square() || g.det().is_zero() {
            return Err(Error::invalid("lattice basis must be square and invertible"));
        }
        let blocks = places.iter().map(|&v| MatBlock::embed(v, &g)).collect();
        let mut l = Self::new(places.to_vec(), blocks)?;
        l.exact = Some(g);
        Ok(l)
    }

    /// `Z^m g` in `R^m`.
    pub fn from_real(g: Matrix<f64>) -> Result<Self> {
        Self::new(vec![Place::Real], vec![MatBlock::Real(g)])
    }

    /// Norm used on the real factor (Euclidean unless overridden).
    pub fn with_arch_norm(mut self, arch: ArchNorm) -> Self {
        self.arch = arch;
        self
    }

    pub fn arch_norm(&self) -> ArchNorm {
        self.arch
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn rank(&self) -> usize {
        self.blocks[0].rows()
    }

    pub fn blocks(&self) -> &[MatBlock] {
        &self.blocks
    }

    pub fn exact_basis(&self) -> Option<&Matrix<BigRational>> {
        self.exact.as_ref()
    }

    /// The same lattice presented by the basis `gamma g`.
    pub fn left_mul(&self, gamma: &Matrix<BigRational>) -> Result<Self> {
        let blocks = self
            .places
            .iter()
            .zip(&self.blocks)
            .map(|(&v, b)| MatBlock::embed(v, gamma).mul(b))
            .collect();
        let mut l = Self::new(self.places.clone(), blocks)?.with_arch_norm(self.arch);
        l.exact = self.exact.as_ref().map(|g| gamma.mul(g));
        Ok(l)
    }

    /// Image `c g` of a coefficient row.
    pub fn image(&self, c: &[BigRational]) -> Result<QSVector> {
        QSVector::new(self.places.clone(), self.blocks.iter().map(|b| b.left_apply(c)).collect())
    }

    /// `||g_inf^-1|| * prod_p ||g_p^-1||_p` for the row action: every lattice
    /// vector of content at most `b` is a unit multiple of `c g` with `c`
    /// integral and `|c_j| <= b` times this constant.
    pub fn coefficient_constant(&self) -> Result<f64> {
        let mut k = 1.0;
        for b in &self.blocks {
            let inv = b
                .inverse()
                .ok_or_else(|| Error::invalid("lattice basis is singular"))?;
            k *= match (&inv, self.arch) {
                (MatBlock::Real(m), ArchNorm::Euclidean) => m.spectral_norm() * (1.0 + 1e-12),
                _ => inv.row_action_norm()?,
            };
        }
        Ok(k)
    }

    /// Content norm of `c g`, with its exact square when `g` is rational.
    fn content_of(&self, c: &[BigRational]) -> Result<(f64, Option<BigRational>)> {
        if let Some(g) = &self.exact {
            let m = g.cols();
            let w: Vec<BigRational> = (0..m)
                .map(|k| c.iter().enumerate().fold(BigRational::zero(), |acc, (j, cj)| acc + cj * &g[(j, k)]))
                .collect();
            let mut sq = BigRational::one();
            for v in &self.places {
                sq *= match (v, self.arch) {
                    (Place::Real, ArchNorm::Euclidean) => w.iter().map(|x| x * x).sum(),
                    (Place::Real, ArchNorm::Sup) => w.iter().map(|x| x * x).max().unwrap(),
                    (Place::Padic(p), _) => w.iter().map(|x| rational_abs(x, *p)).max().unwrap().pow(2),
                };
            }
            return Ok((sq.to_f64().unwrap_or(f64::INFINITY).sqrt(), Some(sq)));
        }
        let v = self.image(c)?;
        Ok((per_place_norms(&v, self.arch)?.into_iter().product(), None))
    }

    /// Whether the coefficient row generates a direct summand of `Z_S^m`.
    fn is_primitive(&self, c: &[BigRational]) -> bool {
        let d = c.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
        let mut g = c
            .iter()
            .fold(BigInt::zero(), |acc, q| acc.gcd(&(q.numer() * (&d / q.denom()))));
        for p in primes_of(&self.places) {
            let pb = BigInt::from(p);
            while !g.is_zero() && (&g % &pb).is_zero() {
                g /= &pb;
            }
        }
        g.is_one()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShortVector {
    pub coeffs: Vec<BigRational>,
    pub image: QSVector,
    pub content: f64,
    /// Square of the content norm, present when the lattice basis is rational.
    pub content_squared: Option<BigRational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShortVectorSet {
    pub bound: f64,
    pub height_cap: u64,
    pub vectors: Vec<ShortVector>,
    /// Every primitive lattice vector of content at most `bound` is a
    /// `Z_S`-unit multiple of a listed one.
    pub complete: bool,
}

/// The distinct values `n * prod_p p^e` with `|n| <= cap`, `|e| <= ceil(log_p cap)`.
fn coefficient_values(primes: &[u64], cap: u64) -> Vec<BigRational> {
    let mut vals: BTreeSet<BigRational> = BTreeSet::new();
    let mut scales = vec![BigRational::one()];
    for &p in primes {
        let e = exponent_cap(p, cap);
        let mut next = Vec::new();
        for s in &scales {
            for k in -e..=e {
                next.push(scale_by_power(s, p, k));
            }
        }
        scales = next;
    }
    for n in -(cap as i64)..=(cap as i64) {
        let nb = BigRational::from_integer(BigInt::from(n));
        for s in &scales {
            vals.insert(&nb * s);
        }
    }
    vals.into_iter().collect()
}

fn exponent_cap(p: u64, cap: u64) -> i64 {
    let mut e = 0;
    let mut pe: u64 = 1;
    while pe < cap {
        pe = pe.saturating_mul(p);
        e += 1;
    }
    e
}

pub fn short_vectors(l: &ZSLattice, bound: f64, height_cap: u64) -> Result<ShortVectorSet> {
    short_vectors_with_budget(l, bound, height_cap, DEFAULT_BUDGET)
}

pub fn short_vectors_with_budget(
    l: &ZSLattice,
    bound: f64,
    height_cap: u64,
    budget: u128,
) -> Result<ShortVectorSet> {
    if !(bound > 0.0) {
        return Err(Error::invalid(format!("bound must be positive, got {bound}")));
    }
    let m = l.rank();
    let primes = primes_of(&l.places);
    let vals = coefficient_values(&primes, height_cap);
    let candidates = (vals.len() as u128).checked_pow(m as u32).unwrap_or(u128::MAX);
    if candidates > budget {
        return Err(Error::ExplosionGuard { candidates, budget });
    }
    let real_only = primes.is_empty();
    let g_inf = match &l.blocks[l.places.iter().position(|v| v.is_archimedean()).unwrap()] {
        MatBlock::Real(g) => g.clone(),
        MatBlock::Padic(_) => unreachable!(),
    };
    let fvals: Vec<f64> = vals.iter().map(|q| q.to_f64().unwrap()).collect();
    let slack = bound * (1.0 + 1e-9);
    let bound_sq = BigRational::from_float(bound).unwrap().pow(2);
    let total = vals.len().pow(m as u32);

    let found: Vec<Result<Option<ShortVector>>> = (0..total)
        .into_par_iter()
        .map(|mut idx| {
            let mut ix = vec![0usize; m];
            for slot in ix.iter_mut().rev() {
                *slot = idx % vals.len();
                idx /= vals.len();
            }
            if ix.iter().all(|&i| vals[i].is_zero()) {
                return Ok(None);
            }
            if real_only {
                // Cheap float filter before the exact recheck.
                let w = (0..m).map(|k| (0..m).map(|j| fvals[ix[j]] * g_inf[(j, k)]).sum::<f64>());
                let norm = match l.arch {
                    ArchNorm::Sup => w.fold(0.0f64, |a, x| a.max(x.abs())),
                    ArchNorm::Euclidean => w.map(|x| x * x).sum::<f64>().sqrt(),
                };
                if norm > slack {
                    return Ok(None);
                }
            }
            let c: Vec<BigRational> = ix.iter().map(|&i| vals[i].clone()).collect();
            if !l.is_primitive(&c) {
                return Ok(None);
            }
            let (content, exact) = l.content_of(&c)?;
            let keep = match &exact {
                Some(sq) => sq <= &bound_sq,
                None => content <= bound,
            };
            if !keep {
                return Ok(None);
            }
            Ok(Some(ShortVector {
                image: l.image(&c)?,
                coeffs: c,
                content,
                content_squared: exact,
            }))
        })
        .collect();
    let mut vectors = Vec::new();
    for r in found {
        if let Some(v) = r? {
            vectors.push(v);
        }
    }
    vectors.sort_by(|a, b| {
        a.content
            .total_cmp(&b.content)
            .then_with(|| a.coeffs.cmp(&b.coeffs))
    });
    let complete = height_cap as f64 >= bound * l.coefficient_constant()?;
    Ok(ShortVectorSet {
        bound,
        height_cap,
        vectors,
        complete,
    })
}

/// Unimodular integer `u` making the real block of `u g` LLL-reduced
/// (delta 0.99). It changes the basis, never the lattice.
fn lll_transform(l: &ZSLattice) -> Result<Matrix<BigRational>> {
    let real = l.places.iter().position(|v| v.is_archimedean()).unwrap();
    let MatBlock::Real(g) = &l.blocks[real] else { unreachable!() };
    let m = g.rows();
    let mut b: Vec<Vec<f64>> = (0..m).map(|i| g.row(i).to_vec()).collect();
    let mut u: Vec<Vec<i64>> = (0..m).map(|i| (0..m).map(|j| i64::from(i == j)).collect()).collect();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let gram_schmidt = |b: &[Vec<f64>]| {
        let mut star: Vec<Vec<f64>> = Vec::with_capacity(m);
        let mut mu = vec![vec![0.0; m]; m];
        for i in 0..m {
            let mut v = b[i].clone();
            for j in 0..i {
                mu[i][j] = dot(&b[i], &star[j]) / dot(&star[j], &star[j]);
                for (x, y) in v.iter_mut().zip(&star[j]) {
                    *x -= mu[i][j] * y;
                }
            }
            star.push(v);
        }
        (star, mu)
    };
    let mut k = 1;
    let mut steps = 0;
    while k < m {
        steps += 1;
        if steps > 10_000 {
            return Err(Error::invalid("basis reduction did not terminate"));
        }
        for j in (0..k).rev() {
            let (_, mu) = gram_schmidt(&b);
            let r = mu[k][j].round();
            if r != 0.0 {
                if r.abs() > 1e15 {
                    return Err(Error::invalid("basis reduction overflowed"));
                }
                let ri = r as i64;
                let (bj, uj) = (b[j].clone(), u[j].clone());
                for (x, y) in b[k].iter_mut().zip(&bj) {
                    *x -= r * y;
                }
                for (x, y) in u[k].iter_mut().zip(&uj) {
                    *x = ri
                        .checked_mul(*y)
                        .and_then(|z| x.checked_sub(z))
                        .ok_or_else(|| Error::invalid("basis reduction overflowed"))?;
                }
            }
        }
        let (star, mu) = gram_schmidt(&b);
        let lhs = dot(&star[k], &star[k]);
        let rhs = (0.99 - mu[k][k - 1].powi(2)) * dot(&star[k - 1], &star[k - 1]);
        if lhs >= rhs {
            k += 1;
        } else {
            b.swap(k, k - 1);
            u.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
    Ok(Matrix::from_rows(
        u.into_iter()
            .map(|row| row.into_iter().map(|x| BigRational::from_integer(BigInt::from(x))).collect())
            .collect(),
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeInvariants {
    pub covolume: f64,
    pub systole: f64,
    pub covolume_exact: Option<BigRational>,
    /// Exact square of the systole for rational bases.
    pub systole_squared: Option<BigRational>,
    pub complete: bool,
}

/// Covolume `|det g|_S` and systole (minimal nonzero content norm).
pub fn lattice_invariants(l: &ZSLattice) -> Result<LatticeInvariants> {
    let covolume_exact = l.exact.as_ref().map(|g| {
        let d = g.det();
        l.places.iter().fold(BigRational::one(), |acc, v| {
            acc * match v {
                Place::Real => d.abs(),
                Place::Padic(p) => rational_abs(&d, *p),
            }
        })
    });
    let covolume = match &covolume_exact {
        Some(c) => c.to_f64().unwrap(),
        None => l.blocks.iter().try_fold(1.0, |acc, b| Ok::<_, Error>(acc * b.det_abs()?))?,
    };

    let reduced = l.left_mul(&lll_transform(l)?)?;
    let l = &reduced;
    let m = l.rank();
    let k = l.coefficient_constant()?;
    // Basis rows are lattice vectors, so their contents bound the systole.
    let mut best = f64::INFINITY;
    for j in 0..m {
        let mut c = vec![BigRational::zero(); m];
        c[j] = BigRational::one();
        best = best.min(l.content_of(&c)?.0);
    }
    // A short exploratory pass usually tightens the estimate a lot.
    // The float `best` can sit just below an exact irrational content.
    let widen = |b: f64| b * (1.0 + 1e-12);
    let probe_cap = ((best * k).ceil() as u64).clamp(1, 6);
    let probe = short_vectors(l, widen(best), probe_cap)?;
    if let Some(v) = probe.vectors.first() {
        best = best.min(v.content);
    }
    let cap = ((best * k * (1.0 + 1e-9)).ceil() as u64).max(1);
    let set = short_vectors(l, widen(best), cap)?;
    let first = set
        .vectors
        .first()
        .ok_or_else(|| Error::invalid("systole search found no vector"))?;
    Ok(LatticeInvariants {
        covolume,
        systole: first.content,
        covolume_exact,
        systole_squared: first.content_squared.clone(),
        complete: set.complete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rational;

    fn q(n: i64) -> BigRational {
        rational(n, 1)
    }

    fn diag(a: BigRational, b: BigRational) -> Matrix<BigRational> {
        Matrix::from_rows(vec![vec![a, q(0)], vec![q(0), b]])
    }

    #[test]
    fn standard_lattice_short_vectors() {
        let l = ZSLattice::from_rational(&[Place::Real], diag(q(1), q(1))).unwrap();
        let s = short_vectors(&l, 1.0, 20).unwrap();
        assert_eq!(s.vectors.len(), 4);
        assert!(s.complete);
    }

    #[test]
    fn skewed_diagonal_lattice() {
        let l = ZSLattice::from_rational(&[Place::Real], diag(q(10), rational(1, 10))).unwrap();
        let s = short_vectors(&l, 0.5, 20).unwrap();
        let coeffs: Vec<_> = s.vectors.iter().map(|v| v.coeffs.clone()).collect();
        assert_eq!(coeffs, vec![vec![q(0), q(-1)], vec![q(0), q(1)]]);
        let inv = lattice_invariants(&l).unwrap();
        assert_eq!(inv.systole_squared, Some(rational(1, 100)));
        assert_eq!(inv.covolume_exact, Some(q(1)));
    }

    #[test]
    fn s_integers_have_systole_one() {
        let places = [Place::Real, Place::Padic(2)];
        let l = ZSLattice::from_rational(&places, diag(q(1), q(1))).unwrap();
        let s = short_vectors(&l, 0.9, 16).unwrap();
        assert!(s.vectors.is_empty());
        let inv = lattice_invariants(&l).unwrap();
        assert_eq!(inv.systole_squared, Some(q(1)));
        assert!(inv.complete);
    }

    #[test]
    fn gl_covolume() {
        let l = ZSLattice::from_rational(&[Place::Real], diag(q(2), q(1))).unwrap();
        assert_eq!(lattice_invariants(&l).unwrap().covolume, 2.0);
    }

    #[test]
    fn real_diagonal_lattice() {
        let t = 10f64.ln();
        let g = Matrix::from_rows(vec![vec![t.exp(), 0.0], vec![0.0, (-t).exp()]]);
        let inv = lattice_invariants(&ZSLattice::from_real(g).unwrap()).unwrap();
        assert!((inv.covolume - 1.0).abs() < 1e-12);
        assert!((inv.systole - 0.1).abs() < 1e-12);
    }

    #[test]
    fn sup_norm_lists_diagonals() {
        let l = ZSLattice::from_rational(&[Place::Real], diag(q(1), q(1)))
            .unwrap()
            .with_arch_norm(ArchNorm::Sup);
        assert_eq!(short_vectors(&l, 1.0, 20).unwrap().vectors.len(), 8);
    }

    #[test]
    fn explosion_guard() {
        let l = ZSLattice::from_rational(&[Place::Real], diag(q(1), q(1))).unwrap();
        assert!(matches!(
            short_vectors_with_budget(&l, 1.0, 100, 1000),
            Err(Error::ExplosionGuard { .. })
        ));
    }
}
