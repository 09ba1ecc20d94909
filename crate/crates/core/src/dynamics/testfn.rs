use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::project::EmpiricalMeasure;
use super::{weighted_mean, Y_CAP};
use crate::error::{Error, Result};

/// Width of the ramp smoothing the cusp indicators.
pub const RAMP_WIDTH: f64 = 0.02;

/// A bounded continuous function of one factor's `(x, y, theta)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Probe {
    /// `{y > c}` smoothed by a linear ramp on `[c - RAMP_WIDTH, c]`.
    Cusp(f64),
    /// `cos 2 pi x` times a cutoff vanishing for `y <= 1.1`.
    CosX,
    SinX,
    /// `cos theta`, symmetrized across the arc `|z| = 1`.
    CosTheta,
    Cos2Theta,
    /// `min(1, 1 / y)`.
    InvY,
}

fn y_cutoff(y: f64) -> f64 {
    ((y - 1.1) / 0.2).clamp(0.0, 1.0)
}

/// Angle of the same point written through the arc pairing `z -> -1/z`.
fn paired_theta(x: f64, y: f64, t: f64) -> f64 {
    let s = y.sqrt();
    let (sn, cs) = (t / 2.0).sin_cos();
    2.0 * (s * cs + x / s * sn).atan2(-s * sn + x / s * cs)
}

/// `f(theta)` averaged with its arc partner near `|z| = 1`, which makes it
/// continuous on the quotient.
fn arc_symmetrized(x: f64, y: f64, t: f64, f: impl Fn(f64) -> f64) -> f64 {
    let lam = 1.0 - ((x * x + y * y - 1.0) / 0.1).clamp(0.0, 1.0);
    if lam == 0.0 {
        return f(t);
    }
    (1.0 - lam / 2.0) * f(t) + lam / 2.0 * f(paired_theta(x, y, t))
}

impl Probe {
    pub fn eval(&self, c: &[f64; 3]) -> f64 {
        let [x, y, t] = *c;
        match *self {
            Probe::Cusp(h) => ((y - h + RAMP_WIDTH) / RAMP_WIDTH).clamp(0.0, 1.0),
            Probe::CosX => (2.0 * PI * x).cos() * y_cutoff(y),
            Probe::SinX => (2.0 * PI * x).sin() * y_cutoff(y),
            Probe::CosTheta => arc_symmetrized(x, y, t, f64::cos),
            Probe::Cos2Theta => arc_symmetrized(x, y, t, |t| (2.0 * t).cos()),
            Probe::InvY => (1.0 / y).min(1.0),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Probe::Cusp(h) => format!("y>{h}"),
            Probe::CosX => "cos(2pi x)".into(),
            Probe::SinX => "sin(2pi x)".into(),
            Probe::CosTheta => "cos(theta)".into(),
            Probe::Cos2Theta => "cos(2theta)".into(),
            Probe::InvY => "1/y".into(),
        }
    }

    /// Haar average over `{y > Y_CAP}`.
    pub fn cusp_mean(&self) -> f64 {
        match self {
            Probe::Cusp(_) => 1.0,
            Probe::InvY => 1.0 / (2.0 * Y_CAP),
            _ => 0.0,
        }
    }

    /// Exact Haar integral over the unit tangent bundle of the modular surface.
    pub fn haar_integral(&self) -> f64 {
        match *self {
            // (3 / pi) int ramp dy / y^2 = (3 / pi) ln(c / (c - w)) / w.
            Probe::Cusp(c) => 3.0 / PI * (c / (c - RAMP_WIDTH)).ln() / RAMP_WIDTH,
            // (3 / pi) (area{y < 1} + int_1^inf y^-3 dy) = (3 / pi) (pi / 3 - 1 + 1 / 2).
            Probe::InvY => 1.0 - 3.0 / (2.0 * PI),
            _ => 0.0,
        }
    }
}

/// A product of probes on distinct factors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestFn {
    pub name: String,
    pub terms: Vec<(usize, Probe)>,
}

impl TestFn {
    pub fn eval(&self, point: &[[f64; 3]]) -> f64 {
        self.terms.iter().map(|(f, p)| p.eval(&point[*f])).product()
    }

    pub fn sup_norm(&self) -> f64 {
        1.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TestFunctionDict {
    pub name: String,
    pub fns: Vec<TestFn>,
}

const STANDARD: [Probe; 8] = [
    Probe::Cusp(1.5),
    Probe::Cusp(2.0),
    Probe::Cusp(3.0),
    Probe::CosX,
    Probe::SinX,
    Probe::CosTheta,
    Probe::Cos2Theta,
    Probe::InvY,
];

impl TestFunctionDict {
    /// The eight standard probes on one factor of an `n`-factor space.
    pub fn marginal(factor: usize, n: usize) -> Self {
        let prefix = if n > 1 { format!("f{}.", factor + 1) } else { String::new() };
        TestFunctionDict {
            name: if n > 1 { format!("factor{}", factor + 1) } else { "standard".into() },
            fns: STANDARD
                .iter()
                .map(|p| TestFn { name: format!("{prefix}{}", p.label()), terms: vec![(factor, *p)] })
                .collect(),
        }
    }

    pub fn standard() -> Self {
        Self::marginal(0, 1)
    }

    /// Both marginals of a two-factor space plus mixed products.
    pub fn joint() -> Self {
        let mut fns = Self::marginal(0, 2).fns;
        fns.extend(Self::marginal(1, 2).fns);
        let pairs = [
            (Probe::Cusp(1.5), Probe::CosTheta),
            (Probe::Cusp(2.0), Probe::Cos2Theta),
            (Probe::CosX, Probe::CosTheta),
            (Probe::InvY, Probe::CosTheta),
            (Probe::CosTheta, Probe::CosTheta),
            (Probe::Cos2Theta, Probe::Cos2Theta),
        ];
        for (a, b) in pairs {
            fns.push(TestFn { name: format!("f1.{}*f2.{}", a.label(), b.label()), terms: vec![(0, a), (1, b)] });
        }
        TestFunctionDict { name: "joint".into(), fns }
    }

    pub fn factors_used(&self) -> usize {
        self.fns.iter().flat_map(|f| f.terms.iter().map(|t| t.0 + 1)).max().unwrap_or(0)
    }
}

/// Integrals of a dictionary against one measure.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Integrals {
    pub names: Vec<String>,
    pub values: Vec<f64>,
    /// `3 sigma` Monte-Carlo half-widths (zero for exact values).
    pub err3: Vec<f64>,
}

pub fn integrate(mu: &EmpiricalMeasure, dict: &TestFunctionDict) -> Result<Integrals> {
    if dict.factors_used() > mu.factors {
        return Err(Error::invalid(format!("dictionary {} needs more factors than the measure has", dict.name)));
    }
    let mut values = Vec::with_capacity(dict.fns.len());
    let mut err3 = Vec::with_capacity(dict.fns.len());
    for f in &dict.fns {
        let vals: Vec<f64> = (0..mu.len()).into_par_iter().map(|i| f.eval(mu.point(i))).collect();
        let (m, e) = weighted_mean(&vals, &mu.weights);
        values.push(m);
        err3.push(e);
    }
    Ok(Integrals { names: dict.fns.iter().map(|f| f.name.clone()).collect(), values, err3 })
}

/// Exact Haar integrals of a dictionary whose terms all sit on Haar factors.
pub fn haar_integrals(dict: &TestFunctionDict) -> Integrals {
    Integrals {
        names: dict.fns.iter().map(|f| f.name.clone()).collect(),
        values: dict.fns.iter().map(|f| f.terms.iter().map(|(_, p)| p.haar_integral()).product()).collect(),
        err3: vec![0.0; dict.fns.len()],
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceReport {
    pub distance: f64,
    /// Function attaining the maximum.
    pub worst: String,
    /// Combined `3 sigma` half-width at the maximum.
    pub err3: f64,
    /// Per function: `|a - b| / sup`.
    pub gaps: Vec<f64>,
}

pub fn compare(a: &Integrals, b: &Integrals, dict: &TestFunctionDict) -> Result<DistanceReport> {
    if a.names != b.names || a.names.len() != dict.fns.len() {
        return Err(Error::invalid("integrals come from different dictionaries"));
    }
    let gaps: Vec<f64> = (0..a.values.len())
        .map(|i| (a.values[i] - b.values[i]).abs() / dict.fns[i].sup_norm())
        .collect();
    let (k, d) = gaps.iter().enumerate().fold((0, 0.0f64), |acc, (i, g)| if *g > acc.1 { (i, *g) } else { acc });
    Ok(DistanceReport {
        distance: d,
        worst: a.names.get(k).cloned().unwrap_or_default(),
        err3: (a.err3[k] + b.err3[k]) / dict.fns[k].sup_norm(),
        gaps,
    })
}

/// `max_f |int f d mu1 - int f d mu2| / |f|_sup` over the dictionary.
pub fn weak_distance(mu1: &EmpiricalMeasure, mu2: &EmpiricalMeasure, dict: &TestFunctionDict) -> Result<f64> {
    Ok(compare(&integrate(mu1, dict)?, &integrate(mu2, dict)?, dict)?.distance)
}
