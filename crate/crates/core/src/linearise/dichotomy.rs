use rayon::prelude::*;
use serde::Serialize;

use super::orbit::{orbit_point, scan, GammaLabel};
use super::{norm, real_part, LinearisationBundle};
use crate::error::{Error, Result};
use crate::groups::GroupElement;
use crate::linalg::{nullspace, orthonormalize, Matrix};

/// Relative width of the band around the boundary of `Phi` or `Psi` inside
/// which a comparison is treated as undecided.
const BOUNDARY_TOL: f64 = 1e-9;

/// Inputs to the neighbourhood construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NeighborhoodParams {
    pub d0_radius: f64,
    pub eps: f64,
    pub c: f64,
    pub alpha: f64,
    pub c_d: f64,
    pub c_m: f64,
    pub n_x: f64,
    pub lambda_b: f64,
}

impl NeighborhoodParams {
    /// `max(1, (c_d c_m N_X C lambda(B) / eps)^(1/alpha)) + 1`.
    pub fn m_good(&self) -> f64 {
        let base = self.c_d * self.c_m * self.n_x * self.c * self.lambda_b / self.eps;
        base.powf(1.0 / self.alpha).max(1.0) + 1.0
    }
}

/// `D`, `Phi` and `Psi` around `A_L`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NeighborhoodTriple {
    pub m_good: f64,
    pub r: f64,
    pub b: f64,
    pub lambda_map: Matrix<f64>,
    /// Radius of the closed ball `D` in `A_L`.
    pub d_radius: f64,
    /// Orthonormal basis of `A_L`.
    pub a_l: Vec<Vec<f64>>,
}

impl NeighborhoodTriple {
    fn lambda_norm(&self, v: &[f64]) -> f64 {
        norm(&self.lambda_map.mul_vec(v))
    }

    /// `|v| < M R` and `|Lambda v| < b`.
    pub fn in_phi(&self, v: &[f64]) -> bool {
        norm(v) < self.m_good * self.r && self.lambda_norm(v) < self.b
    }

    /// `|v| < R` and `|Lambda v| < b / M`.
    pub fn in_psi(&self, v: &[f64]) -> bool {
        norm(v) < self.r && self.lambda_norm(v) < self.b / self.m_good
    }

    fn classify(&self, v: &[f64], r: f64, b: f64) -> Side {
        let (n, l) = (norm(v), self.lambda_norm(v));
        let near = |x: f64, edge: f64| (x - edge).abs() <= BOUNDARY_TOL * edge.max(f64::MIN_POSITIVE);
        let inside = n < r && l < b;
        let clearly_out = (n > r && !near(n, r)) || (l > b && !near(l, b));
        if clearly_out {
            Side::Out
        } else if near(n, r) || near(l, b) {
            Side::Boundary
        } else if inside {
            Side::In
        } else {
            Side::Out
        }
    }

    fn side_phi(&self, v: &[f64]) -> Side {
        self.classify(v, self.m_good * self.r, self.b)
    }

    fn side_psi(&self, v: &[f64]) -> Side {
        self.classify(v, self.r, self.b / self.m_good)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    In,
    Out,
    Boundary,
}

/// Orthogonal projector onto the complement of an orthonormal family.
pub fn complement_projector(onb: &[Vec<f64>], dim: usize) -> Matrix<f64> {
    let mut p = Matrix::identity(dim);
    for q in onb {
        for i in 0..dim {
            for j in 0..dim {
                p[(i, j)] -= q[i] * q[j];
            }
        }
    }
    p
}

/// Smallest nonzero singular value of `lambda`, restricted to the complement of `A_L`.
fn sigma_min_plus(lambda: &Matrix<f64>, a_l: &[Vec<f64>]) -> Option<f64> {
    let dim = lambda.cols();
    let mut all = a_l.to_vec();
    all.extend((0..dim).map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect()));
    let comp: Vec<Vec<f64>> = orthonormalize(&all, 1e-9).split_off(a_l.len());
    if comp.is_empty() {
        return None;
    }
    let cols: Vec<Vec<f64>> = comp.iter().map(|q| lambda.mul_vec(q)).collect();
    let m = Matrix::from_rows(cols).transpose();
    let gram = m.transpose().mul(&m);
    gram.inverse().map(|gi| 1.0 / gi.spectral_norm().sqrt())
}

/// Builds `D`, `Phi`, `Psi` from the nondivergence constants.
///
/// `R = 2 D0` and `b = sigma_min^+(Lambda) D0`, half the least value of
/// `|Lambda|` over unit-normalised directions off `A_L` at radius `2 D0`.
pub fn build_neighborhoods(p: &NeighborhoodParams, lambda_map: &Matrix<f64>, a_l: &[Vec<f64>]) -> Result<NeighborhoodTriple> {
    let positive = [p.d0_radius, p.c, p.c_d, p.c_m, p.n_x, p.lambda_b].iter().all(|x| x.is_finite() && *x > 0.0);
    if !positive || !(p.eps > 0.0 && p.eps <= 1.0) || !(p.alpha > 0.0 && p.alpha <= 1.0) {
        return Err(Error::invalid(format!("bad neighbourhood constants {p:?}")));
    }
    let dim = lambda_map.cols();
    if !lambda_map.is_square() || a_l.iter().any(|v| v.len() != dim) {
        return Err(Error::invalid("Lambda and A_L must act on the same space"));
    }
    let a_l = orthonormalize(a_l, 1e-9);
    let kernel = nullspace(lambda_map, 1e-9);
    let scale = lambda_map.frobenius().max(1.0);
    let kills = a_l.iter().all(|v| norm(&lambda_map.mul_vec(v)) <= 1e-9 * scale);
    if kernel.len() != a_l.len() || !kills {
        return Err(Error::DegenerateLambda(format!(
            "kernel has dimension {} but A_L has dimension {}",
            kernel.len(),
            a_l.len()
        )));
    }
    let sigma = sigma_min_plus(lambda_map, &a_l).unwrap_or(1.0);
    let m_good = p.m_good();
    Ok(NeighborhoodTriple {
        m_good,
        r: 2.0 * p.d0_radius,
        b: sigma * p.d0_radius,
        lambda_map: lambda_map.clone(),
        d_radius: m_good * p.d0_radius,
        a_l,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Dichotomy {
    /// `g omega gamma p_L` lies in `Phi` for every sampled `omega`.
    Alternative1 { gamma: GammaLabel },
    /// Weighted fraction of `omega` whose orbit meets `Psi`.
    Alternative2 { fraction: f64 },
    Inconclusive { reason: String },
}

/// Decides which alternative of the nondivergence dichotomy the sample shows.
///
/// The second alternative is tested first; the first is searched among orbit
/// points of the first sampled `omega` that land in `Phi`.
pub fn dichotomy_check(
    bundle: &LinearisationBundle,
    g: &GroupElement,
    omega: &[(GroupElement, f64)],
    triple: &NeighborhoodTriple,
    eps: f64,
    height: u64,
    budget: u128,
) -> Result<Dichotomy> {
    if omega.is_empty() || omega.iter().any(|(_, w)| !(*w >= 0.0)) {
        return Err(Error::invalid("Omega sample must be nonempty with nonnegative weights"));
    }
    let total: f64 = omega.iter().map(|(_, w)| w).sum();
    if total <= 0.0 {
        return Err(Error::invalid("Omega weights sum to zero"));
    }
    let gm = real_part(g)?;
    let reps: Vec<Matrix<f64>> = omega
        .iter()
        .map(|(w, _)| Ok(bundle.rep(&gm.mul(real_part(w)?))))
        .collect::<Result<_>>()?;

    // Per omega: (meets Psi, touches the boundary of Psi, certified).
    let psi: Vec<(bool, bool, bool)> = reps
        .par_iter()
        .map(|m| {
            let s = scan(bundle, m, triple.r * (1.0 + 2.0 * BOUNDARY_TOL), height, budget)?;
            let sides: Vec<Side> = s.points.iter().map(|(_, v)| triple.side_psi(v)).collect();
            Ok((sides.contains(&Side::In), sides.contains(&Side::Boundary), s.certified))
        })
        .collect::<Result<_>>()?;
    if psi.iter().any(|t| !t.2) {
        return Ok(Dichotomy::Inconclusive {
            reason: format!("orbit enumeration up to height {height} is not certified for Psi"),
        });
    }
    let (mut lo, mut hi) = (0.0, 0.0);
    for ((_, w), &(meets, edge, _)) in omega.iter().zip(&psi) {
        if meets {
            lo += w;
        }
        if meets || edge {
            hi += w;
        }
    }
    let (lo, hi) = (lo / total, hi / total);
    if hi < eps {
        return Ok(Dichotomy::Alternative2 { fraction: hi });
    }
    let alt2_undecided = lo < eps;

    let first = scan(bundle, &reps[0], triple.m_good * triple.r * (1.0 + 2.0 * BOUNDARY_TOL), height, budget)?;
    let mut candidates: Vec<GammaLabel> = first
        .points
        .iter()
        .filter(|(_, v)| triple.side_phi(v) != Side::Out)
        .map(|(g, _)| *g)
        .collect();
    candidates.sort_by_key(|g| (g[0] * g[0] + g[2] * g[2], -g[0], g[2]));
    let mut ambiguous = alt2_undecided;
    for gamma in candidates {
        let p = orbit_point(bundle, &gamma);
        let sides: Vec<Side> = reps.par_iter().map(|m| triple.side_phi(&m.mul_vec(&p))).collect();
        if sides.iter().all(|s| *s == Side::In) && !alt2_undecided {
            return Ok(Dichotomy::Alternative1 { gamma });
        }
        if !sides.contains(&Side::Out) {
            ambiguous = true;
        }
    }
    let reason = if ambiguous {
        "orbit points on the boundary of Phi or Psi".to_string()
    } else if !first.certified {
        format!("orbit enumeration up to height {height} is not certified for Phi")
    } else {
        "neither alternative observed on the sample".to_string()
    };
    Ok(Dichotomy::Inconclusive { reason })
}
