use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::{norm, real_part, LinearisationBundle};
use crate::error::{Error, Result};
use crate::groups::{GroupElement, GroupTag};
use crate::linalg::Matrix;

/// How `Gamma p_L` is enumerated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrbitShape {
    /// `p_L` is fixed by the generators of `Gamma`: a single orbit point.
    Fixed,
    /// `L` is the upper unipotent line in `SL2`: orbit points are
    /// `(a^2, -ac, -c^2)` for primitive `(a, c)` up to sign.
    UpperUnipotent,
    /// Bounded-height enumeration of `SL2(Z)` with no completeness certificate.
    Generic,
}

/// An element of `SL2(Z)` as `[a, b, c, d]`, or the identity for fixed orbits.
pub type GammaLabel = [i64; 4];

pub const GAMMA_IDENTITY: GammaLabel = [1, 0, 0, 1];

pub fn gamma_matrix(g: &GammaLabel) -> Matrix<f64> {
    Matrix::from_rows(vec![vec![g[0] as f64, g[1] as f64], vec![g[2] as f64, g[3] as f64]])
}

fn gamma_generators(tag: GroupTag) -> Vec<Matrix<f64>> {
    let s2 = [[0.0, -1.0], [1.0, 0.0]];
    let t2 = [[1.0, 1.0], [0.0, 1.0]];
    let embed = |m: [[f64; 2]; 2], off: usize, n: usize| {
        let mut out = Matrix::identity(n);
        for i in 0..2 {
            for j in 0..2 {
                out[(off + i, off + j)] = m[i][j];
            }
        }
        out
    };
    match tag {
        GroupTag::SL2 => vec![embed(s2, 0, 2), embed(t2, 0, 2)],
        GroupTag::SL2xSL2 => vec![embed(s2, 0, 4), embed(t2, 0, 4), embed(s2, 2, 4), embed(t2, 2, 4)],
        GroupTag::SL3 => {
            let mut out = Vec::new();
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        let mut m = Matrix::identity(3);
                        m[(i, j)] = 1.0;
                        out.push(m);
                    }
                }
            }
            out
        }
    }
}

pub(super) fn classify(b: &LinearisationBundle) -> OrbitShape {
    let p = b.p_l_real();
    let fixed = gamma_generators(b.tag()).iter().all(|g| {
        let img = b.rep(g).mul_vec(p);
        img.iter().zip(p).all(|(x, y)| (x - y).abs() <= 1e-9 * norm(p))
    });
    if fixed {
        OrbitShape::Fixed
    } else if b.tag() == GroupTag::SL2 && b.k() == 1 && p[1] == 0.0 && p[2] == 0.0 {
        OrbitShape::UpperUnipotent
    } else {
        OrbitShape::Generic
    }
}

/// `gamma p_L` for an enumerated `gamma`.
pub fn orbit_point(b: &LinearisationBundle, gamma: &GammaLabel) -> Vec<f64> {
    match b.shape() {
        OrbitShape::Fixed => b.p_l_real().to_vec(),
        OrbitShape::UpperUnipotent => {
            let s = b.p_l_real()[0];
            let (a, c) = (gamma[0] as f64, gamma[2] as f64);
            vec![s * a * a, -s * a * c, -s * c * c]
        }
        OrbitShape::Generic => b.eta(&gamma_matrix(gamma)),
    }
}

/// Complete a primitive column `(a, c)` to an element of `SL2(Z)`.
fn complete(a: i64, c: i64) -> GammaLabel {
    let g = a.extended_gcd(&c);
    debug_assert_eq!(g.gcd, 1);
    // a x + c y = 1, so d = x and b = -y.
    [a, -g.y, c, g.x]
}

pub(super) struct OrbitScan {
    pub points: Vec<(GammaLabel, Vec<f64>)>,
    pub certified: bool,
}

/// Orbit points `m gamma p_L` with norm at most `radius`, where `m = rep(h)`.
pub(super) fn scan(b: &LinearisationBundle, m: &Matrix<f64>, radius: f64, height: u64, budget: u128) -> Result<OrbitScan> {
    match b.shape() {
        OrbitShape::Fixed => {
            let v = m.mul_vec(b.p_l_real());
            let points = if norm(&v) <= radius { vec![(GAMMA_IDENTITY, v)] } else { vec![] };
            Ok(OrbitScan { points, certified: true })
        }
        OrbitShape::UpperUnipotent => {
            let m_inv = m.inverse().ok_or_else(|| Error::invalid("singular representation matrix"))?;
            // |(a^2, -ac, -c^2)| >= (sqrt 3 / 2)(a^2 + c^2); Frobenius bounds the operator norm.
            let w_max = radius * m_inv.frobenius() / b.p_l_real()[0].abs();
            let bound = (2.0 * w_max / 3f64.sqrt()) * (1.0 + 1e-9);
            let needed = bound.sqrt().floor() as u64;
            let h = needed.min(height) as i64;
            let candidates = (2 * h as u128 + 1) * (h as u128 + 1);
            if candidates > budget {
                return Err(Error::ExplosionGuard { candidates, budget });
            }
            let mut points = Vec::new();
            for a in 0..=h {
                let rest = bound - (a * a) as f64;
                if rest < 0.0 {
                    break;
                }
                let cm = (rest.sqrt().floor() as i64).min(h);
                for c in -cm..=cm {
                    if (a == 0 && c != 1) || a.gcd(&c) != 1 {
                        continue;
                    }
                    let gamma = complete(a, c);
                    let v = m.mul_vec(&orbit_point(b, &gamma));
                    if norm(&v) <= radius {
                        points.push((gamma, v));
                    }
                }
            }
            Ok(OrbitScan { points, certified: needed <= height })
        }
        OrbitShape::Generic => {
            if b.tag() != GroupTag::SL2 {
                return Err(Error::unsupported(format!("orbit enumeration for {} in {}", b.subgroup().id, b.tag())));
            }
            let h = height as i64;
            let candidates = (2 * h as u128 + 1).pow(3);
            if candidates > budget {
                return Err(Error::ExplosionGuard { candidates, budget });
            }
            let mut points: Vec<(GammaLabel, Vec<f64>)> = Vec::new();
            for a in -h..=h {
                for bb in -h..=h {
                    for c in -h..=h {
                        // a d - b c = 1 with |d| <= h.
                        let num = 1 + bb * c;
                        let d = if a != 0 {
                            if num % a != 0 {
                                continue;
                            }
                            num / a
                        } else if num == 0 {
                            0
                        } else {
                            continue;
                        };
                        let mut ds = vec![d];
                        if a == 0 {
                            ds = (-h..=h).collect();
                        }
                        for d in ds {
                            if d.abs() > h {
                                continue;
                            }
                            let gamma = [a, bb, c, d];
                            let v = m.mul_vec(&orbit_point(b, &gamma));
                            if norm(&v) <= radius && !points.iter().any(|(_, u)| same_point(u, &v)) {
                                points.push((gamma, v));
                            }
                        }
                    }
                }
            }
            Ok(OrbitScan { points, certified: false })
        }
    }
}

fn same_point(u: &[f64], v: &[f64]) -> bool {
    let s = norm(u).max(norm(v)).max(1.0);
    u.iter().zip(v).all(|(x, y)| (x - y).abs() <= 1e-9 * s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ChiCount {
    pub count: usize,
    /// False when the enumeration height was too small to certify completeness;
    /// `count` is then a lower bound.
    pub exact: bool,
}

/// `#(g Gamma p_L ∩ E)` for the Euclidean ball `E = B(center, radius)`.
pub fn chi_count(
    b: &LinearisationBundle,
    center: &[f64],
    radius: f64,
    closed: bool,
    g: &GroupElement,
    height: u64,
    budget: u128,
) -> Result<ChiCount> {
    if center.len() != b.dim() || !(radius >= 0.0) {
        return Err(Error::invalid("ball must live in V and have a nonnegative radius"));
    }
    let m = b.rep(real_part(g)?);
    let scan = scan(b, &m, norm(center) + radius, height, budget)?;
    let count = scan
        .points
        .iter()
        .filter(|(_, v)| {
            let d = norm(&v.iter().zip(center).map(|(x, y)| x - y).collect::<Vec<_>>());
            if closed {
                d <= radius * (1.0 + 1e-12)
            } else {
                d < radius
            }
        })
        .count();
    Ok(ChiCount { count, exact: scan.certified })
}
