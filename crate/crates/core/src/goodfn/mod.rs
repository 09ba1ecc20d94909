//! `(C, alpha)`-good functions on balls of `Q_v^d`, Besicovich covers and
//! parametrisation charts with measure-comparability constants.

mod chart;
mod cover;

pub use chart::{chart_with_density, Chart, ChartKind};
pub use cover::{besicovich_cover, BesicovichCover, CoverBall, CoverSample};

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::exp_real;
use crate::linalg::Matrix;
use crate::linearise::LinearisationBundle;
use crate::qs_arith::{rational_valuation, BallQS, Place, VecBlock};

/// Digit depth of the coset enumeration below each `p`-adic ball.
pub const PADIC_DEPTH: u32 = 6;

/// Fitting window for `fit_good`.
pub const FIT_EPS_RANGE: (f64, f64) = (1e-4, 1e-1);

/// Grid points per ball used by `fit_good`.
pub const FIT_POINTS: usize = 100_000;

type RealFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Evaluator {
    /// Univariate polynomial `sum c_k x^k`, usable at every place.
    Polynomial(Vec<BigRational>),
    /// Piecewise-linear interpolation of samples on an increasing 1-d grid.
    Tabulated { xs: Vec<f64>, ys: Vec<f64> },
    Function(RealFn),
}

/// A real-valued function on a ball, to be tested for `(C, alpha)`-goodness.
#[derive(Clone)]
pub struct GoodCandidate {
    pub name: String,
    pub domain: BallQS,
    pub eval: Evaluator,
}

impl fmt::Debug for GoodCandidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GoodCandidate").field("name", &self.name).field("domain", &self.domain).finish()
    }
}

fn single_factor(domain: &BallQS) -> Result<(Place, usize)> {
    match domain.factors() {
        [f] => Ok((f.place, f.dim())),
        _ => Err(Error::invalid("good-function domains are single-factor balls")),
    }
}

/// `[lo, hi]` as a real ball.
pub fn interval(lo: f64, hi: f64) -> Result<BallQS> {
    if !(hi > lo) {
        return Err(Error::invalid(format!("empty interval [{lo}, {hi}]")));
    }
    BallQS::new(
        vec![crate::qs_arith::BallFactor {
            place: Place::Real,
            center: VecBlock::Real(vec![(lo + hi) / 2.0]),
        }],
        (hi - lo) / 2.0,
    )
}

impl GoodCandidate {
    pub fn polynomial(name: &str, domain: BallQS, coeffs: Vec<BigRational>) -> Result<Self> {
        let (place, dim) = single_factor(&domain)?;
        if dim != 1 {
            return Err(Error::invalid(format!("polynomial {name} needs a 1-dimensional domain at {place}")));
        }
        Ok(GoodCandidate {
            name: name.to_string(),
            domain,
            eval: Evaluator::Polynomial(coeffs),
        })
    }

    /// `x^d` with integer coefficient 1.
    pub fn monomial(domain: BallQS, d: usize) -> Result<Self> {
        let mut c = vec![BigRational::zero(); d + 1];
        c[d] = BigRational::one();
        Self::polynomial(&format!("x^{d}"), domain, c)
    }

    pub fn from_fn(name: &str, domain: BallQS, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        if single_factor(&domain)?.0 != Place::Real {
            return Err(Error::invalid("black-box functions are supported at the real place"));
        }
        Ok(GoodCandidate {
            name: name.to_string(),
            domain,
            eval: Evaluator::Function(Arc::new(f)),
        })
    }

    pub fn tabulated(name: &str, domain: BallQS, xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let (place, dim) = single_factor(&domain)?;
        if place != Place::Real || dim != 1 || xs.len() != ys.len() || xs.len() < 2 || xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("tabulated functions need increasing 1-d real samples"));
        }
        Ok(GoodCandidate {
            name: name.to_string(),
            domain,
            eval: Evaluator::Tabulated { xs, ys },
        })
    }

    /// `x -> <e_k, rep(exp(sum x_i X_i)) v>`, or the norm when `coordinate` is `None`.
    pub fn matrix_coefficient(
        name: &str,
        domain: BallQS,
        bundle: Arc<LinearisationBundle>,
        generators: Vec<Matrix<f64>>,
        v: Vec<f64>,
        coordinate: Option<usize>,
    ) -> Result<Self> {
        let (_, dim) = single_factor(&domain)?;
        if generators.len() != dim || v.len() != bundle.dim() || coordinate.is_some_and(|k| k >= v.len()) {
            return Err(Error::invalid("matrix coefficient shape does not match its domain"));
        }
        Self::from_fn(name, domain, move |x| {
            let n = generators[0].rows();
            let lie = generators.iter().zip(x).fold(Matrix::zeros(n, n), |acc, (g, t)| acc.add(&g.scale(t)));
            let w = bundle.rep(&exp_real(&lie)).mul_vec(&v);
            match coordinate {
                Some(k) => w[k],
                None => w.iter().map(|a| a * a).sum::<f64>().sqrt(),
            }
        })
    }

    /// `max(|f|, |g|)` on the domain of `f`.
    pub fn sup_with(&self, other: &GoodCandidate) -> Result<Self> {
        if self.domain != other.domain {
            return Err(Error::invalid("sup of candidates on different domains"));
        }
        let (a, b) = (self.clone(), other.clone());
        Self::from_fn(&format!("max(|{}|, |{}|)", self.name, other.name), self.domain.clone(), move |x| {
            a.evaluate(x).abs().max(b.evaluate(x).abs())
        })
    }

    /// Value at a real point.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        match &self.eval {
            Evaluator::Polynomial(c) => c.iter().rev().fold(0.0, |acc, q| acc * x[0] + q.to_f64().unwrap_or(f64::NAN)),
            Evaluator::Tabulated { xs, ys } => {
                let t = x[0];
                let i = xs.partition_point(|&u| u <= t).clamp(1, xs.len() - 1);
                let (x0, x1) = (xs[i - 1], xs[i]);
                ys[i - 1] + (ys[i] - ys[i - 1]) * (t - x0) / (x1 - x0)
            }
            Evaluator::Function(f) => f(x),
        }
    }

    fn padic_value(&self, x: &BigRational) -> Option<BigRational> {
        match &self.eval {
            Evaluator::Polynomial(c) => Some(c.iter().rev().fold(BigRational::zero(), |acc, q| acc * x + q)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GoodConstants {
    pub c: f64,
    pub alpha: f64,
}

impl GoodConstants {
    pub fn new(c: f64, alpha: f64) -> Result<Self> {
        if !(c > 0.0) || !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(format!("need C > 0 and alpha in (0, 1], got ({c}, {alpha})")));
        }
        Ok(GoodConstants { c, alpha })
    }
}

/// Sublevel ratios `nu({|f| < eps |f|_B}) / nu(B)` of one sub-ball.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BallRow {
    pub label: String,
    pub sup: f64,
    pub ratios: Vec<f64>,
    /// Measure of grid cells whose membership is not resolved by the grid.
    pub errors: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodWitness {
    pub eps: f64,
    pub ball: String,
    pub measured: f64,
    pub bound: f64,
    pub estimator_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodVerdict {
    pub pass: bool,
    /// Worst `(ball, eps)` by `measured - bound - error`.
    pub worst: Option<GoodWitness>,
    pub max_estimator_error: f64,
    pub rows: Vec<BallRow>,
}

fn real_rows(f: &GoodCandidate, eps_grid: &[f64], n_points: usize) -> Result<Vec<BallRow>> {
    let ball = &f.domain;
    let (_, dim) = single_factor(ball)?;
    let center = match &ball.factors()[0].center {
        VecBlock::Real(c) => c.clone(),
        VecBlock::Padic(_) => unreachable!(),
    };
    let r = ball.radius();
    let levels = if dim == 1 { 3 } else { 2 };
    let per_axis = (n_points as f64).powf(1.0 / dim as f64).ceil() as usize;
    let mut boxes: Vec<(String, Vec<f64>)> = Vec::new();
    for level in 0..=levels {
        let parts = 1usize << level;
        for idx in 0..parts.pow(dim as u32) {
            let mut rem = idx;
            let lows: Vec<f64> = (0..dim)
                .map(|a| {
                    let j = rem % parts;
                    rem /= parts;
                    center[a] - r + 2.0 * r * j as f64 / parts as f64
                })
                .collect();
            boxes.push((format!("L{level}#{idx}"), lows));
        }
    }
    Ok(boxes
        .par_iter()
        .map(|(label, lows)| {
            let level: u32 = label[1..label.find('#').unwrap()].parse().unwrap();
            let side = 2.0 * r / (1u64 << level) as f64;
            let total = per_axis.pow(dim as u32);
            let vals: Vec<f64> = (0..total)
                .map(|k| {
                    let mut rem = k;
                    let x: Vec<f64> = (0..dim)
                        .map(|a| {
                            let j = rem % per_axis;
                            rem /= per_axis;
                            lows[a] + side * (j as f64 + 0.5) / per_axis as f64
                        })
                        .collect();
                    f.evaluate(&x).abs()
                })
                .collect();
            let sup = vals.iter().cloned().fold(0.0, f64::max);
            let mut ratios = Vec::with_capacity(eps_grid.len());
            let mut errors = Vec::with_capacity(eps_grid.len());
            for &eps in eps_grid {
                let t = eps * sup;
                let inside: Vec<bool> = vals.iter().map(|&v| v < t).collect();
                ratios.push(inside.iter().filter(|&&b| b).count() as f64 / total as f64);
                let mut edge = 0usize;
                for k in 0..total {
                    let mut stride = 1;
                    let mut rem = k;
                    let mut boundary = false;
                    for _ in 0..dim {
                        let j = rem % per_axis;
                        rem /= per_axis;
                        if (j + 1 < per_axis && inside[k + stride] != inside[k]) || (j > 0 && inside[k - stride] != inside[k]) {
                            boundary = true;
                        }
                        stride *= per_axis;
                    }
                    edge += boundary as usize;
                }
                errors.push(edge as f64 / total as f64);
            }
            BallRow {
                label: label.clone(),
                sup,
                ratios,
                errors,
            }
        })
        .collect())
}

fn padic_abs(q: &BigRational, p: u64) -> f64 {
    match rational_valuation(q, p) {
        None => 0.0,
        Some(v) => (p as f64).powi(-(v as i32)),
    }
}

fn padic_rows(f: &GoodCandidate, p: u64, eps_grid: &[f64]) -> Result<Vec<BallRow>> {
    let Evaluator::Polynomial(coeffs) = &f.eval else {
        return Err(Error::unsupported("p-adic goodness needs a polynomial candidate"));
    };
    let center = match &f.domain.factors()[0].center {
        VecBlock::Padic(c) => c[0].to_rational().ok_or_else(|| Error::invalid("p-adic ball center must be exact"))?,
        VecBlock::Real(_) => unreachable!(),
    };
    let rad = f.domain.effective_radius(Place::Padic(p));
    let k0 = -(rad.log(p as f64).round() as i64);
    let pk = |k: i64| -> BigRational {
        let base = BigRational::from_integer(BigInt::from(p));
        if k >= 0 {
            num_traits::pow(base, k as usize)
        } else {
            num_traits::pow(base, (-k) as usize).recip()
        }
    };
    // |f(x + h) - f(x)| <= lip |h| on the ball.
    let cmax = padic_abs(&center, p).max(rad);
    let lip = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, c)| padic_abs(c, p) * cmax.powi(j as i32 - 1))
        .fold(0.0, f64::max);
    let mut balls: Vec<(String, BigRational, i64)> = Vec::new();
    for level in 0..=2u32 {
        let n = p.pow(level);
        for j in 0..n {
            let c = &center + pk(k0) * BigRational::from_integer(BigInt::from(j));
            balls.push((format!("L{level}#{j}"), c, k0 + level as i64));
        }
    }
    let cells = p.pow(PADIC_DEPTH);
    Ok(balls
        .par_iter()
        .map(|(label, c, k)| {
            let step = pk(*k);
            let fine = (p as f64).powi(-((k + PADIC_DEPTH as i64) as i32));
            let vals: Vec<(f64, bool)> = (0..cells)
                .map(|t| {
                    let x = c + &step * BigRational::from_integer(BigInt::from(t));
                    let v = padic_abs(&f.padic_value(&x).expect("polynomial"), p);
                    (v, v <= lip * fine)
                })
                .collect();
            let sup = vals.iter().map(|v| v.0).fold(0.0, f64::max);
            let mut ratios = Vec::new();
            let mut errors = Vec::new();
            for &eps in eps_grid {
                let t = eps * sup;
                ratios.push(vals.iter().filter(|v| v.0 < t).count() as f64 / cells as f64);
                errors.push(vals.iter().filter(|v| v.1 && sup > 0.0).count() as f64 / cells as f64);
            }
            BallRow {
                label: label.clone(),
                sup,
                ratios,
                errors,
            }
        })
        .collect())
}

/// Sublevel table over the dyadic (or `p`-adic child) sub-ball family.
pub fn sublevel_table(f: &GoodCandidate, eps_grid: &[f64], n_points: usize) -> Result<Vec<BallRow>> {
    if eps_grid.is_empty() || eps_grid.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
        return Err(Error::invalid("eps grid must be a nonempty subset of (0, 1]"));
    }
    match single_factor(&f.domain)? {
        (Place::Real, _) => real_rows(f, eps_grid, n_points.max(1)),
        (Place::Padic(p), 1) => padic_rows(f, p, eps_grid),
        (Place::Padic(_), _) => Err(Error::unsupported("p-adic goodness in more than one variable")),
    }
}

/// Checks `nu({|f| < eps |f|_B}) <= C eps^alpha nu(B)` on every sub-ball and
/// every `eps`, allowing the reported estimator error.
pub fn verify_good(f: &GoodCandidate, consts: GoodConstants, eps_grid: &[f64], n_points: usize) -> Result<GoodVerdict> {
    let rows = sublevel_table(f, eps_grid, n_points)?;
    Ok(judge(rows, consts, eps_grid))
}

fn judge(rows: Vec<BallRow>, consts: GoodConstants, eps_grid: &[f64]) -> GoodVerdict {
    let mut worst: Option<(f64, GoodWitness)> = None;
    let mut max_err: f64 = 0.0;
    for row in &rows {
        for (i, &eps) in eps_grid.iter().enumerate() {
            let bound = consts.c * eps.powf(consts.alpha);
            let excess = row.ratios[i] - bound - row.errors[i];
            max_err = max_err.max(row.errors[i]);
            if worst.as_ref().is_none_or(|w| excess > w.0) {
                worst = Some((
                    excess,
                    GoodWitness {
                        eps,
                        ball: row.label.clone(),
                        measured: row.ratios[i],
                        bound,
                        estimator_error: row.errors[i],
                    },
                ));
            }
        }
    }
    GoodVerdict {
        pass: worst.as_ref().is_none_or(|w| w.0 <= 0.0),
        worst: worst.map(|w| w.1),
        max_estimator_error: max_err,
        rows,
    }
}

/// Empirical `(C, alpha)`: slope of the worst sublevel ratio against `eps` in
/// log-log coordinates over the fitting window, then `C` inflated so the
/// constants pass `verify_good` on the same grid.
pub fn fit_good(f: &GoodCandidate, eps_grid: &[f64]) -> Result<GoodConstants> {
    let rows = sublevel_table(f, eps_grid, FIT_POINTS)?;
    let envelope: Vec<f64> = (0..eps_grid.len()).map(|i| rows.iter().map(|r| r.ratios[i]).fold(0.0, f64::max)).collect();
    let pts: Vec<(f64, f64)> = eps_grid
        .iter()
        .zip(&envelope)
        .filter(|(e, r)| **e >= FIT_EPS_RANGE.0 && **e <= FIT_EPS_RANGE.1 && **r > 0.0)
        .map(|(e, r)| (e.ln(), r.ln()))
        .collect();
    if pts.len() < 2 {
        let c = envelope.iter().zip(eps_grid).map(|(r, e)| r / e).fold(0.0, f64::max);
        return Err(Error::DegenerateFit(format!(
            "{}: sublevel sets are empty on the fitting window; alpha = 1, C = {c}",
            f.name
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx;
    if !(slope > 0.0) {
        return Err(Error::DegenerateFit(format!("{}: nonpositive exponent {slope}", f.name)));
    }
    let alpha = slope.min(1.0);
    let c = rows
        .iter()
        .flat_map(|r| eps_grid.iter().enumerate().map(move |(i, e)| (r.ratios[i] - r.errors[i]).max(0.0) / e.powf(alpha)))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    // Absorb rounding in `c eps^alpha` so the fitted pair passes on its own data.
    Ok(GoodConstants { c: c * (1.0 + 1e-12), alpha })
}

/// `10^-4 .. 1` on a log grid with `per_decade` points per decade.
pub fn default_eps_grid(per_decade: usize) -> Vec<f64> {
    let n = 4 * per_decade;
    (0..=n).map(|k| 10f64.powf(-4.0 + k as f64 / per_decade as f64)).collect()
}
