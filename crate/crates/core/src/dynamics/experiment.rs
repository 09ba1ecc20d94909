use std::f64::consts::PI;

use serde::Serialize;

use rayon::prelude::*;

use super::project::translate_and_project;
use super::reference::{reference_sample, LimitFormulaSpec};
use super::testfn::{compare, integrate, DistanceReport, Integrals, TestFunctionDict};
use super::window::{sample_window, OmegaWindow, Window, WindowSample};
use super::{derive_seed, fsum, weighted_mean};
use crate::error::{Error, Result};
use crate::goodfn::ChartKind;
use crate::groups::{exp_real, GroupElement, SubgroupDescriptor};
use crate::lattice::TightnessProfile;
use crate::linalg::Matrix;
use crate::qs_arith::Place;

/// What the translates should do.
#[derive(Clone, Debug)]
pub enum Expectation {
    /// Converge to the limit built from `L`, `g_inf` and `n_inf`.
    Limit { l: SubgroupDescriptor, g_inf: GroupElement, n_inf: GroupElement },
    /// Leave every compact `{y <= cap}`: mass at most `max_mass` once the
    /// translator parameter reaches `min_param`.
    Escape { y_caps: Vec<f64>, max_mass: f64, min_param: f64 },
}

/// A weak-distance criterion against the limit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistanceCheck {
    pub dict: TestFunctionDict,
    pub tolerance: f64,
    /// Require `distance < tolerance` at every step, not only the last.
    pub every_step: bool,
    /// Require distances nonincreasing up to the combined `3 sigma` error.
    pub monotone: bool,
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub name: String,
    pub omega: OmegaWindow,
    /// `(parameter, g_i)` in order.
    pub translators: Vec<(f64, GroupElement)>,
    pub expectation: Expectation,
    pub samples: usize,
    pub reference_samples: usize,
    pub seed: u64,
    pub checks: Vec<DistanceCheck>,
    pub systole_thresholds: Vec<f64>,
    pub strong_check: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepReport {
    pub i: usize,
    pub param: f64,
    /// One per check.
    pub distances: Vec<DistanceReport>,
    /// Mass of `{y <= cap}` per escape cap, with `3 sigma` errors.
    pub compact_mass: Vec<(f64, f64, f64)>,
}

/// One line of the experiment CSV.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CsvRow {
    pub scenario: String,
    pub i: usize,
    pub translator_param: f64,
    pub test_fn: String,
    pub empirical: f64,
    pub reference: f64,
    pub mc_err: f64,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckVerdict {
    pub dict: String,
    pub tolerance: f64,
    pub distances: Vec<f64>,
    pub errors: Vec<f64>,
    pub monotone: Option<bool>,
    pub pass: bool,
}

/// Total variation between `g mu_Omega` and `mu_Omega` along `g_k -> e` in `H`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrongConvergence {
    pub scales: Vec<f64>,
    pub tv: Vec<f64>,
    pub decays: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub name: String,
    pub steps: Vec<StepReport>,
    pub rows: Vec<CsvRow>,
    pub checks: Vec<CheckVerdict>,
    pub escape: Option<bool>,
    pub tightness: TightnessProfile,
    pub strong: Option<StrongConvergence>,
    pub pass: bool,
}

/// Logarithm of each `SL2` block near the identity in closed form.
fn log_blocks(g: &Matrix<f64>) -> Matrix<f64> {
    let n = g.rows();
    let mut x = Matrix::zeros(n, n);
    for o in (0..n).step_by(2) {
        let h = (g[(o, o)] + g[(o + 1, o + 1)]) / 2.0;
        let f = if (h - 1.0).abs() < 1e-12 {
            1.0
        } else if h < 1.0 {
            let t = h.acos();
            t / t.sin()
        } else {
            let t = h.acosh();
            t / t.sinh()
        };
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { h } else { 0.0 };
                x[(o + i, o + j)] = f * (g[(o + i, o + j)] - id);
            }
        }
    }
    x
}

/// Chart coordinates of `g` by least squares against the chart basis.
fn chart_coords(basis: &[Matrix<f64>], g: &Matrix<f64>) -> Result<Vec<f64>> {
    let x = log_blocks(g);
    let dot = |a: &Matrix<f64>, b: &Matrix<f64>| a.data().iter().zip(b.data()).map(|(u, v)| u * v).sum::<f64>();
    let d = basis.len();
    let gram = Matrix::from_rows((0..d).map(|i| (0..d).map(|j| dot(&basis[i], &basis[j])).collect()).collect());
    let rhs: Vec<f64> = basis.iter().map(|b| dot(b, &x)).collect();
    let inv = gram.inverse().ok_or_else(|| Error::invalid("chart basis is degenerate"))?;
    Ok(inv.mul_vec(&rhs))
}

fn in_window(w: &Window, kind: ChartKind, y: &[f64]) -> bool {
    match w {
        Window::Ball { radius } => y.iter().map(|t| t * t).sum::<f64>().sqrt() < *radius,
        Window::Box { lo, hi } => y.iter().zip(lo.iter().zip(hi)).all(|(t, (a, b))| {
            let t = if kind == ChartKind::Angle { a + (t - a).rem_euclid(2.0 * PI) } else { *t };
            *a <= t && t < *b
        }),
        Window::Whole | Window::Point => true,
    }
}

/// Mass of `mu_Omega` leaving `Omega` under `exp(s X)` for the first chart
/// direction `X` and `s` shrinking to zero; bounds `|g mu_Omega - mu_Omega|`.
fn strong_convergence(samples: &WindowSample, omega: &OmegaWindow) -> Result<StrongConvergence> {
    let chart = &omega.chart;
    let size = match &omega.window {
        Window::Ball { radius } => *radius,
        Window::Box { lo, hi } => hi[0] - lo[0],
        Window::Whole | Window::Point => 0.0,
    };
    let scales: Vec<f64> = (1..=6).map(|k| size * 0.5f64.powi(k)).collect();
    let tv = if size == 0.0 {
        vec![0.0; scales.len()]
    } else {
        if chart.place != Place::Real {
            return Err(Error::unsupported("strong convergence check on a p-adic chart"));
        }
        let basis = chart.basis();
        scales
            .iter()
            .map(|&s| {
                let g = exp_real(&basis[0].scale(&s));
                let out: Vec<f64> = samples
                    .elements
                    .par_iter()
                    .enumerate()
                    .map(|(k, h)| {
                        // One-parameter groups are abelian: coordinates just shift.
                        let y = if chart.dim == 1 {
                            vec![samples.coords[k][0] + s]
                        } else {
                            chart_coords(basis, &g.mul(&h.real))?
                        };
                        Ok(f64::from(u8::from(!in_window(&omega.window, chart.kind, &y))))
                    })
                    .collect::<Result<_>>()?;
                Ok(fsum(out.iter().zip(&samples.weights).map(|(o, w)| o * w)))
            })
            .collect::<Result<Vec<f64>>>()?
    };
    let (first, last) = (tv[0], tv[tv.len() - 1]);
    Ok(StrongConvergence { decays: last <= 0.5 * first + 0.005 && last <= 0.05, scales, tv })
}

/// Runs `g_i mu_Omega` for every translator and checks it against the
/// expectation.
pub fn convergence_experiment(spec: &ExperimentSpec) -> Result<ConvergenceReport> {
    if spec.translators.is_empty() {
        return Err(Error::invalid("translator sequence is empty"));
    }
    if spec.samples == 0 || spec.reference_samples == 0 {
        return Err(Error::invalid("samples must be >= 1"));
    }
    let space = spec.omega.space;
    let reference: Vec<Integrals> = match &spec.expectation {
        Expectation::Limit { l, g_inf, n_inf } => {
            let lim = LimitFormulaSpec {
                g_inf: g_inf.clone(),
                n_inf: n_inf.clone(),
                l: l.clone(),
                omega: spec.omega.clone(),
            };
            let r = reference_sample(&lim, spec.reference_samples, derive_seed(spec.seed, &spec.name, 0))?;
            spec.checks.iter().map(|c| r.integrals(&c.dict)).collect::<Result<_>>()?
        }
        Expectation::Escape { .. } => {
            if !spec.checks.is_empty() {
                return Err(Error::invalid("escape scenarios have no limit to compare against"));
            }
            vec![]
        }
    };
    let caps: &[f64] = match &spec.expectation {
        Expectation::Escape { y_caps, .. } => y_caps,
        _ => &[],
    };

    let mut steps = Vec::new();
    let mut rows = Vec::new();
    let mut members = Vec::new();
    let mut strong = None;
    for (i, (param, g)) in spec.translators.iter().enumerate() {
        let samples = sample_window(&spec.omega, spec.samples, derive_seed(spec.seed, &spec.name, i as u64 + 1))?;
        if spec.strong_check && i == 0 {
            let n = samples.count.min(20_000);
            let mut sub = samples.clone();
            sub.elements.truncate(n);
            let total = fsum(sub.weights[..n].iter().copied());
            sub.weights = sub.weights[..n].iter().map(|w| w / total).collect();
            strong = Some(strong_convergence(&sub, &spec.omega)?);
        }
        let mu = translate_and_project(&samples, g, &space)?;
        let mut distances = Vec::new();
        for (c, refi) in spec.checks.iter().zip(&reference) {
            let emp = integrate(&mu, &c.dict)?;
            let d = compare(&emp, refi, &c.dict)?;
            for k in 0..c.dict.fns.len() {
                rows.push(CsvRow {
                    scenario: spec.name.clone(),
                    i,
                    translator_param: *param,
                    test_fn: format!("{}/{}", c.dict.name, c.dict.fns[k].name),
                    empirical: emp.values[k],
                    reference: refi.values[k],
                    mc_err: emp.err3[k] + refi.err3[k],
                    distance: d.distance,
                });
            }
            distances.push(d);
        }
        let mut compact_mass = Vec::new();
        for &cap in caps {
            let ind: Vec<f64> = (0..mu.len())
                .map(|k| f64::from(u8::from(mu.point(k).iter().all(|c| c[1] <= cap))))
                .collect();
            let (m, e) = weighted_mean(&ind, &mu.weights);
            rows.push(CsvRow {
                scenario: spec.name.clone(),
                i,
                translator_param: *param,
                test_fn: format!("mass(y<={cap})"),
                empirical: m,
                reference: 0.0,
                mc_err: e,
                distance: m,
            });
            compact_mass.push((cap, m, e));
        }
        members.push((format!("{}[{i}]", spec.name), mu.systoles(), mu.weights.clone()));
        steps.push(StepReport { i, param: *param, distances, compact_mass });
    }

    let checks: Vec<CheckVerdict> = spec
        .checks
        .iter()
        .enumerate()
        .map(|(c, chk)| {
            let distances: Vec<f64> = steps.iter().map(|s| s.distances[c].distance).collect();
            let errors: Vec<f64> = steps.iter().map(|s| s.distances[c].err3).collect();
            let ok = |k: usize| distances[k] < chk.tolerance + errors[k];
            let last = distances.len() - 1;
            let bound_ok = if chk.every_step { (0..=last).all(ok) } else { ok(last) };
            let monotone = chk
                .monotone
                .then(|| (0..last).all(|k| distances[k + 1] <= distances[k] + errors[k] + errors[k + 1]));
            CheckVerdict {
                dict: chk.dict.name.clone(),
                tolerance: chk.tolerance,
                pass: bound_ok && monotone.unwrap_or(true),
                distances,
                errors,
                monotone,
            }
        })
        .collect();
    let escape = match &spec.expectation {
        Expectation::Escape { max_mass, min_param, .. } => Some(
            steps
                .iter()
                .filter(|s| s.param >= *min_param)
                .all(|s| s.compact_mass.iter().all(|(_, m, _)| m < max_mass)),
        ),
        _ => None,
    };
    let tightness = TightnessProfile::from_samples(&spec.systole_thresholds, &members, 0.01);
    let pass = checks.iter().all(|c| c.pass) && escape.unwrap_or(true) && strong.as_ref().is_none_or(|s| s.decays);
    Ok(ConvergenceReport { name: spec.name.clone(), steps, rows, checks, escape, tightness, strong, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{catalogue, GroupTag};

    fn a(t: f64) -> GroupElement {
        GroupElement::sl2(t.exp(), 0.0, 0.0, (-t).exp()).unwrap()
    }

    #[test]
    fn translates_tending_to_identity_converge() {
        let omega = OmegaWindow::ball(catalogue("sl2R.rotation").unwrap(), PI).unwrap();
        let e = GroupElement::identity(GroupTag::SL2, &[Place::Real]);
        let spec = ExperimentSpec {
            name: "to_identity".into(),
            omega,
            translators: (7..=10).map(|k| (0.5f64.powi(k), a(0.5f64.powi(k)))).collect(),
            expectation: Expectation::Limit { l: catalogue("sl2R.trivial").unwrap(), g_inf: e.clone(), n_inf: e },
            samples: 20_000,
            reference_samples: 20_000,
            seed: 7,
            checks: vec![DistanceCheck {
                dict: TestFunctionDict::standard(),
                tolerance: 0.05,
                every_step: false,
                monotone: false,
            }],
            systole_thresholds: vec![0.5, 1.0],
            strong_check: true,
        };
        let r = convergence_experiment(&spec).unwrap();
        assert!(r.pass, "{:?} {:?} {:?}", r.checks, r.strong, r.steps[3].distances);
        assert_eq!(r.rows.len(), 4 * 8);
        assert_eq!(r.strong.unwrap().tv, vec![0.0; 6]);
    }

    #[test]
    fn strong_convergence_on_a_ball() {
        for (id, r) in [("sl2R.full", 0.3), ("sl2R.torus", 0.5)] {
            let omega = OmegaWindow::ball(catalogue(id).unwrap(), r).unwrap();
            let s = sample_window(&omega, 20_000, 5).unwrap();
            let sc = strong_convergence(&s, &omega).unwrap();
            assert!(sc.decays, "{id}: {sc:?}");
            assert!(sc.tv[0] > 0.2 && sc.tv.windows(2).all(|w| w[1] <= w[0] + 0.01), "{id}: {sc:?}");
        }
    }

    #[test]
    fn torus_window_escapes() {
        let omega = OmegaWindow::ball(catalogue("sl2R.torus").unwrap(), 0.5).unwrap();
        let spec = ExperimentSpec {
            name: "escape".into(),
            omega,
            translators: vec![(2.0, a(2.0)), (3.0, a(3.0))],
            expectation: Expectation::Escape { y_caps: vec![10.0], max_mass: 0.01, min_param: 2.0 },
            samples: 5_000,
            reference_samples: 1,
            seed: 1,
            checks: vec![],
            systole_thresholds: vec![0.5],
            strong_check: false,
        };
        let r = convergence_experiment(&spec).unwrap();
        assert_eq!(r.escape, Some(true));
        assert!(r.steps.iter().all(|s| s.compact_mass[0].1 == 0.0));
    }
}
