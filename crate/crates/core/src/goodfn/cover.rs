use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qs_arith::rational_valuation;

/// A finite sample of the set to be covered.
#[derive(Clone, Debug, PartialEq)]
pub enum CoverSample {
    /// Points of `R^d` with the Euclidean metric.
    Real(Vec<Vec<f64>>),
    /// Exact points of `Q_p`.
    Padic { p: u64, points: Vec<BigRational> },
}

impl CoverSample {
    pub fn len(&self) -> usize {
        match self {
            CoverSample::Real(v) => v.len(),
            CoverSample::Padic { points, .. } => points.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Closed ball around the sample point `center`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoverBall {
    pub center: usize,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BesicovichCover {
    pub balls: Vec<CoverBall>,
    /// Largest number of balls through a stabbing point.
    pub multiplicity: usize,
    /// Sample points inside at least one ball.
    pub covered: usize,
    pub stab_points: usize,
}

fn padic_dist(a: &BigRational, b: &BigRational, p: u64) -> f64 {
    match rational_valuation(&(a - b), p) {
        None => 0.0,
        Some(v) => (p as f64).powi(-(v as i32)),
    }
}

/// Largest `p^k <= r`.
fn quantize(r: f64, p: u64) -> f64 {
    let pf = p as f64;
    let mut k = r.log(pf).floor() as i32;
    if pf.powi(k + 1) <= r {
        k += 1;
    }
    if pf.powi(k) > r {
        k -= 1;
    }
    pf.powi(k)
}

/// Greedy cover of the sample by balls `B(x_i, radius_fn(i))`.
///
/// Real place: largest radius first, skipping centers already covered.
/// Ultrametric place: the same rule on radii rounded down to powers of `p`,
/// which yields pairwise disjoint balls. Multiplicity is measured by stabbing
/// a grid (real) or the sample plus its midpoints (ultrametric).
pub fn besicovich_cover(sample: &CoverSample, radius_fn: impl Fn(usize) -> f64) -> Result<BesicovichCover> {
    if sample.is_empty() {
        return Err(Error::invalid("cannot cover an empty sample"));
    }
    let n = sample.len();
    let mut radii: Vec<f64> = (0..n).map(&radius_fn).collect();
    if radii.iter().any(|r| !(*r > 0.0) || !r.is_finite()) {
        return Err(Error::invalid("radii must be positive and finite"));
    }
    if let CoverSample::Padic { p, .. } = sample {
        for r in &mut radii {
            *r = quantize(*r, *p);
        }
    }
    let dist = |i: usize, j: usize| -> f64 {
        match sample {
            CoverSample::Real(v) => v[i].iter().zip(&v[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
            CoverSample::Padic { p, points } => padic_dist(&points[i], &points[j], *p),
        }
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| radii[b].total_cmp(&radii[a]).then(a.cmp(&b)));
    let mut balls: Vec<CoverBall> = Vec::new();
    for &i in &order {
        if balls.iter().any(|b| dist(b.center, i) <= b.radius) {
            continue;
        }
        balls.push(CoverBall { center: i, radius: radii[i] });
    }
    let covered = (0..n).filter(|&i| balls.iter().any(|b| dist(b.center, i) <= b.radius)).count();
    let (multiplicity, stab_points) = match sample {
        CoverSample::Real(v) => stab_real(v, &balls),
        CoverSample::Padic { p, points } => {
            let mut stabs = points.clone();
            for w in points.windows(2) {
                stabs.push((&w[0] + &w[1]) / BigRational::from_integer(2.into()));
            }
            let m = stabs
                .iter()
                .map(|x| balls.iter().filter(|b| padic_dist(&points[b.center], x, *p) <= b.radius).count())
                .max()
                .unwrap_or(0);
            (m, stabs.len())
        }
    };
    Ok(BesicovichCover {
        balls,
        multiplicity,
        covered,
        stab_points,
    })
}

/// Stabbing grid over the bounding box of the balls: ball endpoints and
/// midpoints in one dimension, a regular grid otherwise.
fn stab_real(v: &[Vec<f64>], balls: &[CoverBall]) -> (usize, usize) {
    let dim = v[0].len();
    let inside = |x: &[f64], b: &CoverBall| {
        v[b.center].iter().zip(x).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt() <= b.radius
    };
    let count = |x: &[f64]| balls.iter().filter(|b| inside(x, b)).count();
    if dim == 1 {
        // Multiplicity is constant between consecutive endpoints.
        let mut pts: Vec<f64> = balls.iter().flat_map(|b| [v[b.center][0] - b.radius, v[b.center][0] + b.radius]).collect();
        pts.sort_by(f64::total_cmp);
        let mut stabs = pts.clone();
        stabs.extend(pts.windows(2).map(|w| (w[0] + w[1]) / 2.0));
        let m = stabs.iter().map(|&x| count(&[x])).max().unwrap_or(0);
        return (m, stabs.len());
    }
    let (mut lo, mut hi) = (vec![f64::INFINITY; dim], vec![f64::NEG_INFINITY; dim]);
    for b in balls {
        for a in 0..dim {
            lo[a] = lo[a].min(v[b.center][a] - b.radius);
            hi[a] = hi[a].max(v[b.center][a] + b.radius);
        }
    }
    let per_axis = ((200_000f64).powf(1.0 / dim as f64).floor() as usize).max(2);
    let total = per_axis.pow(dim as u32);
    let m = (0..total)
        .map(|k| {
            let mut rem = k;
            let x: Vec<f64> = (0..dim)
                .map(|a| {
                    let j = rem % per_axis;
                    rem /= per_axis;
                    lo[a] + (hi[a] - lo[a]) * j as f64 / (per_axis - 1) as f64
                })
                .collect();
            count(&x)
        })
        .max()
        .unwrap_or(0);
    (m, total)
}
