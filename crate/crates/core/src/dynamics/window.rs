use rand::Rng;
use rand_distr::StandardNormal;

use super::{par_chunks, QuotientSpace};
use crate::error::{Error, Result};
use crate::goodfn::{chart_with_density, Chart, ChartKind};
use crate::groups::SubgroupDescriptor;
use crate::lattice::ZpRational;
use crate::linalg::Matrix;

/// A region of chart coordinates.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub enum Window {
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Ball { radius: f64 },
    /// The whole compact `p`-adic group.
    Whole,
    /// The identity of a trivial group.
    Point,
}

/// `Omega` inside `H`, carrying the probability `mu_Omega`.
#[derive(Clone, Debug)]
pub struct OmegaWindow {
    pub h: SubgroupDescriptor,
    pub chart: Chart,
    pub window: Window,
    pub space: QuotientSpace,
}

impl OmegaWindow {
    pub fn new(h: SubgroupDescriptor, chart: Chart, window: Window) -> Result<Self> {
        let space = QuotientSpace::new(h.tag, &h.places)?;
        let tol = 1.0 + 1e-12;
        match (&window, chart.kind) {
            (Window::Point, ChartKind::Point) | (Window::Whole, ChartKind::Digit) => {}
            (Window::Ball { radius }, ChartKind::Exp | ChartKind::Angle) => {
                if !(*radius > 0.0) || *radius > chart.radius * tol {
                    return Err(Error::invalid(format!("window radius {radius} outside (0, {}]", chart.radius)));
                }
            }
            (Window::Box { lo, hi }, ChartKind::Exp | ChartKind::Angle) => {
                if lo.len() != chart.dim || hi.len() != chart.dim || lo.iter().zip(hi).any(|(a, b)| !(a < b)) {
                    return Err(Error::invalid("window box must have positive extent in every chart coordinate"));
                }
                let far: f64 = lo.iter().zip(hi).map(|(a, b)| a.abs().max(b.abs()).powi(2)).sum::<f64>().sqrt();
                let limit = if chart.kind == ChartKind::Angle { std::f64::consts::PI * 2.0 } else { chart.radius };
                if far > limit * tol {
                    return Err(Error::invalid(format!("window box leaves the chart of radius {limit}")));
                }
                if chart.kind == ChartKind::Angle && hi[0] - lo[0] > 2.0 * std::f64::consts::PI * tol {
                    return Err(Error::invalid("angle window longer than a full turn"));
                }
            }
            _ => return Err(Error::invalid(format!("window {window:?} does not fit a {:?} chart", chart.kind))),
        }
        if chart.kind == ChartKind::Digit && space.prime.is_none() {
            return Err(Error::invalid("digit chart without a p-adic place"));
        }
        Ok(OmegaWindow { h, chart, window, space })
    }

    /// The natural window of radius `radius`: the full group for compact
    /// `p`-adic and trivial subgroups, the full circle for one-parameter
    /// rotation groups once `radius >= pi`, a chart ball otherwise.
    pub fn ball(h: SubgroupDescriptor, radius: f64) -> Result<Self> {
        let chart = chart_with_density(&h, radius)?;
        let window = match chart.kind {
            ChartKind::Point => Window::Point,
            ChartKind::Digit => Window::Whole,
            ChartKind::Angle if radius >= std::f64::consts::PI => Window::Box {
                lo: vec![-std::f64::consts::PI],
                hi: vec![std::f64::consts::PI],
            },
            _ => Window::Ball { radius },
        };
        Self::new(h, chart, window)
    }
}

/// `SL2(Z_p)` element known modulo `p^depth`.
pub type ZpMat = [[ZpRational; 2]; 2];

/// A group element of a scenario: its real matrix and, for `S`-arithmetic
/// scenarios, its `p`-adic component.
#[derive(Clone, Debug, PartialEq)]
pub struct HPoint {
    pub real: Matrix<f64>,
    pub padic: Option<ZpMat>,
}

#[derive(Clone, Debug)]
pub struct WindowSample {
    pub space: QuotientSpace,
    pub elements: Vec<HPoint>,
    /// Chart coordinates of each draw (empty for digit and point charts).
    pub coords: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub seed: u64,
    pub count: usize,
}

fn uniform_ball(rng: &mut impl Rng, dim: usize, r: f64) -> Vec<f64> {
    let dir: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let n = dir.iter().map(|t| t * t).sum::<f64>().sqrt().max(1e-300);
    let s = r * rng.gen::<f64>().powf(1.0 / dim as f64);
    dir.iter().map(|t| t * s / n).collect()
}

pub(crate) fn identity_zp(p: u64) -> ZpMat {
    let one = ZpRational::new(1, 0, p);
    let zero = ZpRational::new(0, 0, p);
    [[one, zero], [zero, one]]
}

/// `n` i.i.d. chart-uniform draws from `Omega`, weighted by the chart's Haar
/// density and normalised to total mass 1.
pub fn sample_window(omega: &OmegaWindow, n: usize, seed: u64) -> Result<WindowSample> {
    if n == 0 {
        return Err(Error::invalid("samples must be >= 1"));
    }
    let chart = &omega.chart;
    let space = omega.space;
    let size = omega.h.tag.matrix_size();
    let draws: Vec<(HPoint, Vec<f64>, f64)> = par_chunks(n, seed, |rng, k| {
        (0..k)
            .map(|_| match (&omega.window, chart.kind) {
                (Window::Point, _) => Ok((
                    HPoint { real: Matrix::identity(size), padic: space.prime.map(identity_zp) },
                    vec![],
                    1.0,
                )),
                (Window::Whole, _) => {
                    let p = space.prime.unwrap();
                    let m = p.pow(space.depth);
                    let g = loop {
                        let x = [rng.gen_range(0..m), rng.gen_range(0..m), rng.gen_range(0..m)];
                        if let Some(g) = chart.theta_digits(x, space.depth) {
                            break g;
                        }
                    };
                    let z = |v: u64| ZpRational::new(v as i128, 0, p);
                    Ok((
                        HPoint {
                            real: Matrix::identity(size),
                            padic: Some([[z(g[0]), z(g[1])], [z(g[2]), z(g[3])]]),
                        },
                        vec![],
                        1.0,
                    ))
                }
                (w, _) => {
                    let x = match w {
                        Window::Ball { radius } => uniform_ball(rng, chart.dim, *radius),
                        Window::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| rng.gen_range(*a..*b)).collect(),
                        _ => unreachable!(),
                    };
                    let real = chart.theta_real(&x)?;
                    Ok((HPoint { real, padic: space.prime.map(identity_zp) }, x.clone(), chart.density(&x)))
                }
            })
            .collect()
    })?;
    let total = super::fsum(draws.iter().map(|d| d.2));
    let mut elements = Vec::with_capacity(n);
    let mut coords = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (e, c, w) in draws {
        elements.push(e);
        coords.push(c);
        weights.push(w / total);
    }
    Ok(WindowSample { space, elements, coords, weights, seed, count: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::catalogue;
    use std::f64::consts::PI;

    fn rotation_box(lo: f64, hi: f64) -> OmegaWindow {
        let h = catalogue("sl2R.rotation").unwrap();
        let chart = chart_with_density(&h, PI).unwrap();
        OmegaWindow::new(h, chart, Window::Box { lo: vec![lo], hi: vec![hi] }).unwrap()
    }

    #[test]
    fn quarter_circle_cosine_mean() {
        let s = sample_window(&rotation_box(0.0, PI / 2.0), 100_000, 11).unwrap();
        let vals: Vec<f64> = s.coords.iter().map(|c| c[0].cos()).collect();
        let (m, err) = super::super::weighted_mean(&vals, &s.weights);
        assert!((m - 2.0 / PI).abs() <= err, "{m} +- {err}");
        assert!(err < 0.005);
    }

    #[test]
    fn full_circle_has_mass_one() {
        let s = sample_window(&OmegaWindow::ball(catalogue("sl2R.rotation").unwrap(), PI).unwrap(), 5000, 1).unwrap();
        assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(s.count, 5000);
    }

    #[test]
    fn compact_padic_reduction_mod_two() {
        let omega = OmegaWindow::ball(catalogue("sl2Q2.compact").unwrap(), 1.0).unwrap();
        let s = sample_window(&omega, 60_000, 3).unwrap();
        let ind: Vec<f64> = s
            .elements
            .iter()
            .map(|e| {
                let k = e.padic.unwrap();
                let v = |z: ZpRational| z.to_f64(2).rem_euclid(2.0);
                let id = v(k[0][0]) == 1.0 && v(k[0][1]) == 0.0 && v(k[1][0]) == 0.0 && v(k[1][1]) == 1.0;
                f64::from(u8::from(id))
            })
            .collect();
        let (m, err) = super::super::weighted_mean(&ind, &s.weights);
        assert!((m - 1.0 / 6.0).abs() <= err, "{m} +- {err}");
    }

    #[test]
    fn exp_window_weights_follow_density() {
        let omega = OmegaWindow::ball(catalogue("sl2R.full").unwrap(), 0.5).unwrap();
        let s = sample_window(&omega, 2000, 9).unwrap();
        let (lo, hi) = s.weights.iter().fold((f64::INFINITY, 0.0f64), |(a, b), w| (a.min(*w), b.max(*w)));
        assert!(hi / lo <= omega.chart.c_m * omega.chart.c_m);
        assert!(hi > lo);
    }

    #[test]
    fn bad_windows() {
        assert!(sample_window(&rotation_box(0.0, 1.0), 0, 1).is_err());
        let h = catalogue("sl2R.full").unwrap();
        let chart = chart_with_density(&h, 0.1).unwrap();
        assert!(OmegaWindow::new(h.clone(), chart.clone(), Window::Ball { radius: 0.2 }).is_err());
        assert!(OmegaWindow::new(h, chart, Window::Whole).is_err());
    }
}
