use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::{norm, real_part, LinearisationBundle};
use crate::error::{Error, Result};
use crate::groups::{ad_matrix, GroupElement, GroupTag};
use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum StabilityMode {
    Analytic,
    Arithmetic,
}

/// The linear representation in which stability is tested.
#[derive(Clone, Copy, Debug)]
pub enum Representation<'a> {
    /// The defining matrices.
    Standard,
    Adjoint(GroupTag),
    Exterior(&'a LinearisationBundle),
}

impl Representation<'_> {
    pub fn apply(&self, g: &Matrix<f64>) -> Matrix<f64> {
        match self {
            Representation::Standard => g.clone(),
            Representation::Adjoint(tag) => ad_matrix(*tag, g).expect("group elements are invertible"),
            Representation::Exterior(b) => b.rep(g),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityWitness {
    pub y_index: usize,
    /// Index of the `omega` attaining the sup for this `(y, v)`.
    pub omega_index: usize,
    pub v: Vec<f64>,
    /// `|y omega v|` along the `Omega` sample.
    pub norms: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub mode: StabilityMode,
    /// `c` (analytic) or `C` (arithmetic).
    pub constant: f64,
    pub threshold: f64,
    pub worst: StabilityWitness,
    pub pass: bool,
}

/// Deterministic probe vectors on the unit sphere of `R^dim`: an angle grid
/// in dimension 2 (containing the coordinate axes when `n` is a multiple of 4),
/// otherwise `+-e_i` plus seeded Gaussian directions.
pub fn sphere_grid(dim: usize, n: usize) -> Vec<Vec<f64>> {
    if dim == 2 {
        return (0..n)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
    }
    let mut out = Vec::new();
    for i in 0..dim {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; dim];
            v[i] = s;
            out.push(v);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_57ab);
    while out.len() < n.max(2 * dim) {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
        let r = norm(&v);
        if r > 1e-6 {
            out.push(v.iter().map(|x| x / r).collect());
        }
    }
    out
}

/// Primitive integer vectors in `Z^dim` with sup norm at most `bound`, one per sign pair.
pub fn lattice_probes(dim: usize, bound: i64) -> Vec<Vec<f64>> {
    let side = (2 * bound + 1) as usize;
    let total = side.pow(dim as u32);
    let mut out = Vec::new();
    for idx in 0..total {
        let mut r = idx;
        let v: Vec<i64> = (0..dim)
            .map(|_| {
                let c = (r % side) as i64 - bound;
                r /= side;
                c
            })
            .collect();
        let first = v.iter().find(|&&c| c != 0);
        if first.is_none_or(|&c| c < 0) {
            continue;
        }
        let g = v.iter().fold(0i64, |acc, &c| num_integer::gcd(acc, c));
        if g == 1 {
            out.push(v.iter().map(|&c| c as f64).collect());
        }
    }
    out
}

fn canonical_sign(v: &[f64]) -> Vec<f64> {
    let big = v.iter().cloned().fold(0.0f64, |m, x| if x.abs() > m.abs() + 1e-12 { x } else { m });
    if big < 0.0 {
        v.iter().map(|x| -x).collect()
    } else {
        v.to_vec()
    }
}

/// Stability of the `Omega`-sample under the translators `Y`.
///
/// Analytic mode computes `c = max_{y,v} |v| / sup_w |y w v|` and passes when
/// `c <= threshold`. Arithmetic mode computes `C = min_{y,v} max_w |y w v|` over
/// lattice probes and passes when `C >= threshold`.
pub fn stability_check(
    rep: Representation<'_>,
    y: &[GroupElement],
    omega: &[GroupElement],
    mode: StabilityMode,
    probes: &[Vec<f64>],
    threshold: f64,
) -> Result<StabilityReport> {
    if y.is_empty() || omega.is_empty() || probes.is_empty() {
        return Err(Error::invalid("stability check needs translators, an Omega sample and probes"));
    }
    let mats: Vec<Vec<Matrix<f64>>> = y
        .iter()
        .map(|yi| {
            let ym = real_part(yi)?;
            omega.iter().map(|w| Ok(rep.apply(&ym.mul(real_part(w)?)))).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let dim = mats[0][0].rows();
    if probes.iter().any(|v| v.len() != dim || norm(v) == 0.0) {
        return Err(Error::invalid(format!("probe vectors must be nonzero and of dimension {dim}")));
    }
    let pairs: Vec<(usize, usize)> = (0..y.len()).flat_map(|i| (0..probes.len()).map(move |j| (i, j))).collect();
    // (score, y, v, argmax omega); larger score is worse.
    let scored: Vec<(f64, usize, usize, usize)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let v = &probes[j];
            let (wk, best) = mats[i]
                .iter()
                .map(|m| norm(&m.mul_vec(v)))
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (k, x)| if x > acc.1 { (k, x) } else { acc });
            let score = match mode {
                StabilityMode::Analytic => norm(v) / best,
                StabilityMode::Arithmetic => -best,
            };
            (score, i, j, wk)
        })
        .collect();
    let &(score, yi, vj, wk) = scored
        .iter()
        .fold(None, |acc: Option<&(f64, usize, usize, usize)>, s| match acc {
            Some(a) if a.0 >= s.0 => Some(a),
            _ => Some(s),
        })
        .expect("nonempty");
    let v = canonical_sign(&probes[vj]);
    let worst = StabilityWitness {
        y_index: yi,
        omega_index: wk,
        norms: mats[yi].iter().map(|m| norm(&m.mul_vec(&v))).collect(),
        v,
    };
    let (constant, pass) = match mode {
        StabilityMode::Analytic => (score, score <= threshold),
        StabilityMode::Arithmetic => (-score, -score >= threshold),
    };
    Ok(StabilityReport {
        mode,
        constant,
        threshold,
        worst,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(t: f64) -> GroupElement {
        GroupElement::sl2(t.exp(), 0.0, 0.0, (-t).exp()).unwrap()
    }

    fn rot(t: f64) -> GroupElement {
        GroupElement::sl2(t.cos(), -t.sin(), t.sin(), t.cos()).unwrap()
    }

    fn torus_window() -> Vec<GroupElement> {
        (0..=20).map(|k| diag(-0.5 + 0.05 * k as f64)).collect()
    }

    fn circle() -> Vec<GroupElement> {
        (0..64).map(|k| rot(std::f64::consts::TAU * k as f64 / 64.0)).collect()
    }

    #[test]
    fn identity_translator_passes() {
        let id = vec![GroupElement::identity(GroupTag::SL2, &[crate::qs_arith::Place::Real])];
        let probes = sphere_grid(2, 64);
        let r = stability_check(Representation::Standard, &id, &circle(), StabilityMode::Analytic, &probes, 10.0).unwrap();
        assert!(r.pass && (r.constant - 1.0).abs() < 1e-12);
        let w = torus_window();
        let r = stability_check(Representation::Standard, &id, &w, StabilityMode::Analytic, &probes, 10.0).unwrap();
        let bound = w.iter().map(|g| real_part(g).unwrap().inverse().unwrap().spectral_norm()).fold(0.0, f64::max);
        assert!(r.pass && r.constant <= bound + 1e-9);
    }

    #[test]
    fn torus_translators_fail_on_e2() {
        let y: Vec<GroupElement> = (1..=5).map(|t| diag(t as f64)).collect();
        let r = stability_check(Representation::Standard, &y, &torus_window(), StabilityMode::Analytic, &sphere_grid(2, 64), 10.0).unwrap();
        assert!(!r.pass);
        assert_eq!(r.worst.y_index, 4);
        assert!(r.worst.v[0].abs() < 1e-12 && (r.worst.v[1] - 1.0).abs() < 1e-12);
        // sup over the window of e^{-t-s} is e^{-4.5}.
        assert!((r.constant - 4.5f64.exp()).abs() < 1e-9);
    }

    #[test]
    fn rotations_rescue_torus_translators() {
        let y: Vec<GroupElement> = (1..=5).map(|t| diag(t as f64)).collect();
        let r = stability_check(Representation::Standard, &y, &circle(), StabilityMode::Analytic, &sphere_grid(2, 64), 10.0).unwrap();
        assert!(r.pass && r.constant <= 1.0);
        let a = stability_check(Representation::Standard, &y, &circle(), StabilityMode::Arithmetic, &lattice_probes(2, 4), 1.0).unwrap();
        assert!(a.pass);
    }

    #[test]
    fn probes() {
        assert_eq!(lattice_probes(2, 1).len(), 4);
        assert_eq!(sphere_grid(3, 10).len(), 10);
        assert!(sphere_grid(2, 8).iter().any(|v| v[0].abs() < 1e-15 && v[1] == 1.0));
    }
}
