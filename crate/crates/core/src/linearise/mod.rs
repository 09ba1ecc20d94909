//! Exterior powers of the adjoint representation and the linear algebra used
//! near singular sets: orbit counting, stability, neighbourhoods, focusing.

mod dichotomy;
mod focusing;
mod orbit;
mod stability;

pub use dichotomy::{
    build_neighborhoods, complement_projector, dichotomy_check, Dichotomy, NeighborhoodParams, NeighborhoodTriple,
};
pub use focusing::{focusing_class_test, FocusingClass, FocusingReport, DEFAULT_FOCUS_FACTOR};
pub use orbit::{chi_count, gamma_matrix, orbit_point, ChiCount, GammaLabel, OrbitShape};
pub use stability::{
    lattice_probes, sphere_grid, stability_check, Representation, StabilityMode, StabilityReport, StabilityWitness,
};

use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::groups::{ad_matrix, exp_real, lie_from_coords, normalizer_algebra, GroupElement, GroupTag, LieAlgElem, LieSpan, SubgroupDescriptor};
use crate::linalg::{orthonormalize, Field, Matrix};
use crate::qs_arith::{MatBlock, Place};

/// Residual tolerance for membership tests at the real place.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Default enumeration budget for orbit scans.
pub const DEFAULT_ORBIT_BUDGET: u128 = 100_000_000;

/// `k`-element subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// `Lambda^k` of a square matrix in the basis of `subsets(n, k)`.
pub fn exterior_power<T: Field>(a: &Matrix<T>, subs: &[Vec<usize>]) -> Matrix<T> {
    let w = &a.data()[0];
    let n = subs.len();
    let mut out = Matrix::zeros_like(n, n, w);
    for (i, si) in subs.iter().enumerate() {
        for (j, sj) in subs.iter().enumerate() {
            out[(i, j)] = if si.is_empty() { w.one_like() } else { a.submatrix(si, sj).det() };
        }
    }
    out
}

/// Wedge of the rows of `b` (a `k x d` matrix) in the basis of `subsets(d, k)`.
pub fn wedge_rows<T: Field>(rows: &[Vec<T>], subs: &[Vec<usize>], one: &T) -> Vec<T> {
    if rows.is_empty() {
        return vec![one.one_like()];
    }
    let b = Matrix::from_rows(rows.to_vec());
    let all: Vec<usize> = (0..rows.len()).collect();
    subs.iter().map(|s| b.submatrix(&all, s).det()).collect()
}

/// `V = Lambda^{dim L} Lie(G)` with the line through `p_L`, at the real place.
#[derive(Clone, Debug)]
pub struct LinearisationBundle {
    l: SubgroupDescriptor,
    k: usize,
    subsets: Vec<Vec<usize>>,
    p_l: Vec<BigRational>,
    p_l_real: Vec<f64>,
    lie_real: Vec<Vec<f64>>,
    normalizer_lie: LieSpan,
    a_l: Vec<Vec<f64>>,
    shape: OrbitShape,
}

fn real_index(places: &[Place]) -> Result<usize> {
    places
        .iter()
        .position(|&v| v == Place::Real)
        .ok_or_else(|| Error::invalid("linearisation needs the real place"))
}

fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn build_bundle(l: &SubgroupDescriptor, tag: GroupTag) -> Result<LinearisationBundle> {
    if l.tag != tag {
        return Err(Error::invalid(format!("{} lives in {}, not {tag}", l.id, l.tag)));
    }
    let ri = real_index(&l.places)?;
    let d = tag.lie_dim();
    let basis = l.lie.coords_at(ri).to_vec();
    let k = basis.len();
    let subs = subsets(d, k);
    let p_l = wedge_rows(&basis, &subs, &BigRational::one());
    let p_l_real: Vec<f64> = p_l.iter().map(to_f64).collect();
    let lie_real = orthonormalize(&basis.iter().map(|r| r.iter().map(to_f64).collect()).collect::<Vec<_>>(), 1e-12);
    let mut b = LinearisationBundle {
        l: l.clone(),
        k,
        subsets: subs,
        p_l,
        p_l_real,
        lie_real,
        normalizer_lie: normalizer_algebra(l),
        a_l: Vec::new(),
        shape: OrbitShape::Generic,
    };
    b.shape = orbit::classify(&b);
    b.a_l = b.normalizer_span();
    Ok(b)
}

impl LinearisationBundle {
    pub fn subgroup(&self) -> &SubgroupDescriptor {
        &self.l
    }

    pub fn tag(&self) -> GroupTag {
        self.l.tag
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.subsets.len()
    }

    pub fn p_l(&self) -> &[BigRational] {
        &self.p_l
    }

    pub fn p_l_real(&self) -> &[f64] {
        &self.p_l_real
    }

    pub fn normalizer_lie(&self) -> &LieSpan {
        &self.normalizer_lie
    }

    pub fn shape(&self) -> OrbitShape {
        self.shape
    }

    /// Orthonormal basis of `A_L`.
    pub fn a_l(&self) -> &[Vec<f64>] {
        &self.a_l
    }

    pub fn with_a_l(mut self, basis: &[Vec<f64>]) -> Result<Self> {
        if basis.iter().any(|v| v.len() != self.dim()) {
            return Err(Error::invalid("A_L basis vectors have the wrong dimension"));
        }
        self.a_l = orthonormalize(basis, 1e-9);
        Ok(self)
    }

    /// Span of `eta_L` over sampled members of `X(L, W)`. Logs a warning when it
    /// disagrees with the current `A_L`.
    pub fn a_l_from_samples(&self, members: &[Matrix<f64>]) -> Vec<Vec<f64>> {
        let etas: Vec<Vec<f64>> = members.iter().map(|g| self.eta(g)).collect();
        let span = orthonormalize(&etas, 1e-8);
        if span.len() != self.a_l.len() || span.iter().any(|v| projection_residual(v, &self.a_l) > 1e-6) {
            log::warn!("sampled A_L for {} (dim {}) differs from the stored one (dim {})", self.l.id, span.len(), self.a_l.len());
        }
        span
    }

    /// `Lambda^k Ad(g)` for the real component `g`.
    pub fn rep(&self, g: &Matrix<f64>) -> Matrix<f64> {
        let ad = ad_matrix(self.tag(), g).expect("group elements are invertible");
        exterior_power(&ad, &self.subsets)
    }

    pub fn rep_element(&self, g: &GroupElement) -> Result<Matrix<f64>> {
        Ok(self.rep(real_part(g)?))
    }

    /// `eta_L(g) = rep(g) p_L`.
    pub fn eta(&self, g: &Matrix<f64>) -> Vec<f64> {
        self.rep(g).mul_vec(&self.p_l_real)
    }

    /// Orthogonal projector onto the complement of `A_L`.
    pub fn lambda_map(&self) -> Matrix<f64> {
        complement_projector(&self.a_l, self.dim())
    }

    fn normalizer_span(&self) -> Vec<Vec<f64>> {
        let tag = self.tag();
        let ri = real_index(self.normalizer_lie.places()).unwrap_or(0);
        let gens: Vec<Matrix<f64>> = self
            .normalizer_lie
            .coords_at(ri)
            .iter()
            .map(|c| lie_from_coords(tag, &c.iter().map(to_f64).collect::<Vec<_>>()))
            .collect();
        let mut members = vec![Matrix::identity(tag.matrix_size())];
        for (i, x) in gens.iter().enumerate() {
            for s in [0.5, -0.7] {
                members.push(exp_real(&x.scale(&s)));
            }
            if let Some(y) = gens.get(i + 1) {
                members.push(exp_real(&x.scale(&0.3)).mul(&exp_real(&y.scale(&-0.4))));
            }
        }
        orthonormalize(&members.iter().map(|g| self.eta(g)).collect::<Vec<_>>(), 1e-8)
    }
}

pub(crate) fn real_part(g: &GroupElement) -> Result<&Matrix<f64>> {
    g.real_block().ok_or_else(|| Error::invalid("element has no real component"))
}

/// Distance from `v` to the span of an orthonormal family.
pub fn projection_residual(v: &[f64], onb: &[Vec<f64>]) -> f64 {
    let mut r = v.to_vec();
    for q in onb {
        let d: f64 = r.iter().zip(q).map(|(a, b)| a * b).sum();
        for (ri, qi) in r.iter_mut().zip(q) {
            *ri -= d * qi;
        }
    }
    r.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn rational_block(b: &MatBlock) -> Result<Matrix<BigRational>> {
    match b {
        MatBlock::Real(_) => Err(Error::invalid("expected a p-adic block")),
        MatBlock::Padic(m) => {
            let data = m
                .data()
                .iter()
                .map(|x| x.to_rational().ok_or_else(|| Error::unsupported("membership test on inexact p-adic entries")))
                .collect::<Result<Vec<_>>>()?;
            Ok(Matrix::from_vec(m.rows(), m.cols(), data))
        }
    }
}

fn in_x(bundle_lie: &LieSpan, lie_real: &[Vec<f64>], w_gens: &[LieAlgElem], g: &GroupElement) -> Result<bool> {
    let tag = g.tag();
    let gi = g.inverse();
    for w in w_gens {
        if w.tag() != tag || w.places() != g.places() {
            return Err(Error::invalid("W generators and g live in different groups"));
        }
        let y = gi.adjoint(w);
        for (i, &v) in bundle_lie.places().iter().enumerate() {
            let Some(j) = y.places().iter().position(|&u| u == v) else { continue };
            match &y.blocks()[j] {
                MatBlock::Real(m) => {
                    let c = crate::groups::lie_coords(tag, m);
                    if projection_residual(&c, lie_real) > MEMBERSHIP_TOL * norm(&c).max(1.0) {
                        return Ok(false);
                    }
                }
                b @ MatBlock::Padic(_) => {
                    if !bundle_lie.contains(i, &rational_block(b)?) {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Whether `g` lies in `X(L, W)` and in `X*(L, W)`.
pub fn x_membership(
    bundle: &LinearisationBundle,
    w_gens: &[LieAlgElem],
    g: &GroupElement,
    exclusivity: &[SubgroupDescriptor],
) -> Result<(bool, bool)> {
    let inside = in_x(&bundle.l.lie, &bundle.lie_real, w_gens, g)?;
    if !inside {
        return Ok((false, false));
    }
    let dim_l: usize = bundle.l.dim().iter().sum();
    for k in exclusivity {
        if k.tag != bundle.tag() || k.dim().iter().sum::<usize>() >= dim_l {
            continue;
        }
        let ri = real_index(&k.places)?;
        let real: Vec<Vec<f64>> = k.lie.coords_at(ri).iter().map(|r| r.iter().map(to_f64).collect()).collect();
        if in_x(&k.lie, &orthonormalize(&real, 1e-12), w_gens, g)? {
            return Ok((true, false));
        }
    }
    Ok((true, true))
}

/// JSON record for linearisation reports.
#[derive(Clone, Debug, Serialize)]
pub struct LineariseRecord {
    pub op: String,
    pub inputs_digest: String,
    pub verdict: String,
    pub witness: serde_json::Value,
    pub curve: Vec<f64>,
}

impl LineariseRecord {
    pub fn new(op: &str, inputs: &impl Serialize, verdict: &str, witness: serde_json::Value, curve: Vec<f64>) -> Self {
        LineariseRecord {
            op: op.to_string(),
            inputs_digest: digest(inputs),
            verdict: verdict.to_string(),
            witness,
            curve,
        }
    }
}

/// SHA-256 of the JSON serialisation.
pub fn digest(inputs: &impl Serialize) -> String {
    let bytes = serde_json::to_vec(inputs).expect("inputs serialise");
    hex::encode(Sha256::digest(&bytes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::catalogue;

    fn bundle(id: &str) -> LinearisationBundle {
        let l = catalogue(id).unwrap();
        build_bundle(&l, l.tag).unwrap()
    }

    fn q(n: i64) -> BigRational {
        crate::linalg::rational(n, 1)
    }

    #[test]
    fn wedge_shapes() {
        let u = bundle("sl2R.unipotent");
        assert_eq!((u.k(), u.dim()), (1, 3));
        assert_eq!(u.p_l(), &[q(1), q(0), q(0)]);
        let f = bundle("sl2R.full");
        assert_eq!((f.k(), f.dim()), (3, 1));
        assert_eq!(f.p_l(), &[q(1)]);
        let t = bundle("sl2R.trivial");
        assert_eq!((t.k(), t.dim(), t.p_l()), (0, 1, &[q(1)][..]));
        assert_eq!(bundle("sl2xsl2.first_factor").dim(), 20);
        assert_eq!(bundle("sl3R.so3").dim(), 56);
    }

    #[test]
    fn weight_two_on_e() {
        let u = bundle("sl2R.unipotent");
        let t: f64 = 1.7;
        let g = Matrix::from_rows(vec![vec![t, 0.0], vec![0.0, 1.0 / t]]);
        let v = u.eta(&g);
        assert!((v[0] - t * t).abs() < 1e-12 && v[1].abs() < 1e-12 && v[2].abs() < 1e-12);
    }

    #[test]
    fn a_l_examples() {
        assert_eq!(bundle("sl2R.unipotent").a_l().len(), 1);
        assert_eq!(bundle("sl2R.full").a_l().len(), 1);
        // N(torus) is the torus itself at the Lie algebra level.
        let t = bundle("sl2R.torus");
        assert_eq!(t.a_l().len(), 1);
        assert!(projection_residual(&[0.0, 1.0, 0.0], t.a_l()) < 1e-12);
    }

    #[test]
    fn membership_examples() {
        let u = bundle("sl2R.unipotent");
        let e = LieAlgElem::real(GroupTag::SL2, Matrix::from_rows(vec![vec![0.0, 1.0], vec![0.0, 0.0]])).unwrap();
        let t = 0.8f64;
        let a = GroupElement::sl2(t.exp(), 0.0, 0.0, (-t).exp()).unwrap();
        let cat = [catalogue("sl2R.trivial").unwrap()];
        assert_eq!(x_membership(&u, std::slice::from_ref(&e), &a, &cat).unwrap(), (true, true));
        let c = std::f64::consts::FRAC_PI_4.cos();
        let r = GroupElement::sl2(c, -c, c, c).unwrap();
        assert_eq!(x_membership(&u, std::slice::from_ref(&e), &r, &cat).unwrap(), (false, false));
        let id = GroupElement::identity(GroupTag::SL2, &[Place::Real]);
        assert_eq!(x_membership(&u, &[e], &id, &cat).unwrap(), (true, true));
    }

    #[test]
    fn padic_membership_is_exact() {
        let l = catalogue("sl2Q2.unipotent").unwrap();
        let b = build_bundle(&l, GroupTag::SL2).unwrap();
        let places = [Place::Real, Place::Padic(2)];
        let e = crate::linalg::rational(1, 1);
        let z = crate::linalg::rational(0, 1);
        let w = LieAlgElem::from_rational(GroupTag::SL2, &places, &Matrix::from_rows(vec![vec![z.clone(), e.clone()], vec![z.clone(), z.clone()]])).unwrap();
        let n = GroupElement::from_rational(GroupTag::SL2, &places, &Matrix::from_rows(vec![vec![e.clone(), crate::linalg::rational(3, 4)], vec![z.clone(), e.clone()]])).unwrap();
        assert!(x_membership(&b, std::slice::from_ref(&w), &n, &[]).unwrap().0);
        let s = GroupElement::from_rational(GroupTag::SL2, &places, &Matrix::from_rows(vec![vec![z.clone(), e.clone().neg()], vec![e.clone(), z]])).unwrap();
        assert!(!x_membership(&b, &[w], &s, &[]).unwrap().0);
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(digest(&("a", 1)), digest(&("a", 1)));
        assert_ne!(digest(&("a", 1)), digest(&("a", 2)));
    }
}
