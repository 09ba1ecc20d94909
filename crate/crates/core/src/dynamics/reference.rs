use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;

use super::project::{translate_and_project, EmpiricalMeasure};
use super::testfn::{integrate, Integrals, TestFn, TestFunctionDict};
use super::window::{sample_window, HPoint, OmegaWindow, WindowSample};
use super::{derive_seed, par_chunks, QuotientSpace};
use crate::error::{Error, Result};
use crate::groups::{lie_coords, ratner_class_test, FactorKind, GroupElement, SubgroupDescriptor};
use crate::linalg::{orthonormalize, Matrix};
use crate::linearise::projection_residual;
use crate::qs_arith::{MatBlock, Place};

/// Height above which Haar mass is handled in closed form.
pub const Y_CAP: f64 = 1e4;

/// Haar mass of `{y > Y_CAP}`.
fn cusp_mass() -> f64 {
    3.0 / (PI * Y_CAP)
}

/// `n` Haar-distributed points `(x, y, theta)` of the domain truncated at
/// `y <= Y_CAP`, drawn by rejection in `(x, 1 / y)` where Haar is uniform.
pub fn haar_fundamental_sample(n: usize, seed: u64) -> Result<Vec<[f64; 3]>> {
    let smax = 2.0 / 3f64.sqrt();
    par_chunks(n, seed, |rng, k| {
        let mut out = Vec::with_capacity(k);
        while out.len() < k {
            let x = rng.gen_range(-0.5..0.5);
            let s = rng.gen_range(1.0 / Y_CAP..smax);
            let theta = rng.gen_range(0.0..2.0 * PI);
            if s * s * (1.0 - x * x) <= 1.0 {
                out.push([x, 1.0 / s, theta]);
            }
        }
        Ok(out)
    })
}

/// `h` whose point `h Gamma` has coordinates `c`, i.e. `h^-1 = n_x a_y k_(theta/2)`.
pub(crate) fn haar_element(c: &[f64; 3]) -> [[f64; 2]; 2] {
    let [x, y, t] = *c;
    let (s, r) = (y.sqrt(), (t / 2.0).sin_cos());
    let (sn, cs) = r;
    // n_x a_y = [[s, x / s], [0, 1 / s]] times k_phi = [[cos, -sin], [sin, cos]].
    let u = [[s * cs + x / s * sn, -s * sn + x / s * cs], [sn / s, cs / s]];
    [[u[1][1], -u[0][1]], [-u[1][0], u[0][0]]]
}

/// Data of the limit `g_inf . int_Omega (omega n_inf mu_L) d mu(omega)`.
#[derive(Clone, Debug)]
pub struct LimitFormulaSpec {
    pub g_inf: GroupElement,
    pub n_inf: GroupElement,
    pub l: SubgroupDescriptor,
    pub omega: OmegaWindow,
}

fn real_index(places: &[Place]) -> Result<usize> {
    places.iter().position(|v| *v == Place::Real).ok_or_else(|| Error::invalid("no real place"))
}

fn check_normalizes(n: &GroupElement, l: &SubgroupDescriptor) -> Result<()> {
    let i = real_index(&l.places)?;
    let tag = l.tag;
    let basis: Vec<Matrix<f64>> =
        l.lie.basis_at(i).iter().map(|m| m.map(|q| q.to_f64().unwrap_or(f64::NAN))).collect();
    let onb = orthonormalize(&basis.iter().map(|b| lie_coords(tag, b)).collect::<Vec<_>>(), 1e-10);
    let nr = n.real_block().ok_or_else(|| Error::invalid("n_inf has no real component"))?;
    let ni = nr.inverse().ok_or_else(|| Error::invalid("n_inf is singular"))?;
    for b in &basis {
        let v = lie_coords(tag, &nr.mul(b).mul(&ni));
        let scale = v.iter().map(|t| t * t).sum::<f64>().sqrt().max(1.0);
        if projection_residual(&v, &onb) > 1e-8 * scale {
            return Err(Error::invalid(format!("n_inf does not normalize Lie({})", l.id)));
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Fiber {
    Haar,
    Horocycle,
    Point,
}

fn fibers(l: &SubgroupDescriptor, space: &QuotientSpace) -> Result<Vec<Fiber>> {
    let unsupported = || Error::UnsupportedL(l.id.clone());
    if l.places != space.places() || l.tag != space.tag {
        return Err(Error::invalid(format!("{} does not live on the scenario space", l.id)));
    }
    let i = real_index(&l.places)?;
    // Every place must carry the same kind as the real one.
    if l.factors.iter().any(|k| *k != l.factors[i]) {
        return Err(unsupported());
    }
    let kinds = match &l.factors[i] {
        FactorKind::Product(v) => v.clone(),
        k => vec![k.clone()],
    };
    if kinds.len() != space.factors() {
        return Err(unsupported());
    }
    kinds
        .iter()
        .map(|k| match k {
            FactorKind::FullSL => Ok(Fiber::Haar),
            FactorKind::UnipotentUpper => Ok(Fiber::Horocycle),
            FactorKind::Trivial => Ok(Fiber::Point),
            FactorKind::LieSpan if l.lie.dims()[i] == 0 => Ok(Fiber::Point),
            _ => Err(unsupported()),
        })
        .collect()
}

/// A sample of the limit measure together with the factors drawn from
/// truncated Haar.
pub(crate) struct ReferenceSample {
    pub mu: EmpiricalMeasure,
    haar: Vec<bool>,
}

impl ReferenceSample {
    /// Dictionary integrals with the mass above `Y_CAP` restored to first
    /// order on Haar factors.
    pub fn integrals(&self, dict: &TestFunctionDict) -> Result<Integrals> {
        let mut out = integrate(&self.mu, dict)?;
        let m = cusp_mass();
        for (k, f) in dict.fns.iter().enumerate() {
            let hits = f.terms.iter().filter(|(i, _)| self.haar[*i]).count();
            if hits == 0 {
                continue;
            }
            let mf = 1.0 - (1.0 - m).powi(hits as i32);
            let mut tail = 1.0;
            for (i, p) in &f.terms {
                tail *= if self.haar[*i] {
                    p.cusp_mean()
                } else {
                    let single = TestFunctionDict {
                        name: String::new(),
                        fns: vec![TestFn { name: String::new(), terms: vec![(*i, *p)] }],
                    };
                    integrate(&self.mu, &single)?.values[0]
                };
            }
            out.values[k] = (1.0 - mf) * out.values[k] + mf * tail;
            // The translated cusp need not stay in the cusp.
            out.err3[k] += 2.0 * mf;
        }
        Ok(out)
    }
}

pub(crate) fn reference_sample(spec: &LimitFormulaSpec, n: usize, seed: u64) -> Result<ReferenceSample> {
    let space = spec.omega.space;
    let verdict = ratner_class_test(&spec.l);
    if !verdict.in_class {
        return Err(Error::invalid(format!("{} is not in the Ratner class", spec.l.id)));
    }
    check_normalizes(&spec.n_inf, &spec.l)?;
    let fib = fibers(&spec.l, &space)?;
    if spec.g_inf.places() != space.places().as_slice() || spec.n_inf.places() != space.places().as_slice() {
        return Err(Error::invalid("g_inf and n_inf must live on the scenario space"));
    }
    if let Some(p) = space.prime {
        let trivial = match spec.n_inf.block_at(Place::Padic(p)) {
            Some(MatBlock::Padic(m)) => (0..2).all(|i| {
                (0..2).all(|j| m[(i, j)].to_rational().is_some_and(|q| q == BigRational::from_integer(BigInt::from(u8::from(i == j)))))
            }),
            _ => false,
        };
        if !trivial {
            return Err(Error::unsupported("n_inf with a nontrivial p-adic component"));
        }
    }
    let omega = sample_window(&spec.omega, n, derive_seed(seed, "reference/omega", 0))?;
    let size = space.tag.matrix_size();
    let haar_pts: Vec<Vec<[f64; 3]>> = fib
        .iter()
        .enumerate()
        .map(|(f, k)| match k {
            Fiber::Haar => haar_fundamental_sample(n, derive_seed(seed, "reference/haar", f as u64)),
            _ => Ok(vec![]),
        })
        .collect::<Result<_>>()?;
    let horo: Vec<Vec<f64>> = fib
        .iter()
        .enumerate()
        .map(|(f, k)| match k {
            Fiber::Horocycle => par_chunks(n, derive_seed(seed, "reference/horocycle", f as u64), |rng, c| {
                Ok((0..c).map(|_| rng.gen::<f64>()).collect())
            }),
            _ => Ok(vec![]),
        })
        .collect::<Result<_>>()?;
    let n_real = spec.n_inf.real_block().ok_or_else(|| Error::invalid("n_inf has no real component"))?;
    let elements: Vec<HPoint> = omega
        .elements
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let mut y = Matrix::identity(size);
            for (f, kind) in fib.iter().enumerate() {
                let b = match kind {
                    Fiber::Haar => haar_element(&haar_pts[f][k]),
                    Fiber::Horocycle => [[1.0, horo[f][k]], [0.0, 1.0]],
                    Fiber::Point => continue,
                };
                for (r, row) in b.iter().enumerate() {
                    for (c, v) in row.iter().enumerate() {
                        y[(2 * f + r, 2 * f + c)] = *v;
                    }
                }
            }
            HPoint { real: w.real.mul(n_real).mul(&y), padic: w.padic }
        })
        .collect();
    let ws = WindowSample { space, elements, coords: vec![], weights: omega.weights, seed, count: n };
    let mu = translate_and_project(&ws, &spec.g_inf, &space)?;
    Ok(ReferenceSample { mu, haar: fib.iter().map(|f| *f == Fiber::Haar).collect() })
}

/// Double Monte-Carlo integrals of `dict` against the limit measure, with
/// `3 sigma` errors.
pub fn reference_limit_measure(spec: &LimitFormulaSpec, dict: &TestFunctionDict, n: usize, seed: u64) -> Result<Integrals> {
    reference_sample(spec, n, seed)?.integrals(dict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{haar_integrals, reduce_matrix, weighted_mean, Probe};
    use crate::groups::{catalogue, GroupTag};

    fn spec(l: &str, omega: OmegaWindow) -> LimitFormulaSpec {
        let places = omega.space.places();
        let e = GroupElement::identity(omega.space.tag, &places);
        LimitFormulaSpec { g_inf: e.clone(), n_inf: e, l: catalogue(l).unwrap(), omega }
    }

    #[test]
    fn haar_element_reduces_to_its_coordinates() {
        for c in haar_fundamental_sample(2000, 4).unwrap() {
            let h = haar_element(&c);
            let r = reduce_matrix([[h[1][1], -h[0][1]], [-h[1][0], h[0][0]]]).unwrap();
            assert_eq!(r.gamma, [1, 0, 0, 1]);
            assert!((r.x - c[0]).abs() < 1e-9 && (r.y - c[1]).abs() < 1e-9 * c[1]);
            let d = (r.theta - c[2]).rem_euclid(2.0 * PI);
            assert!(d.min(2.0 * PI - d) < 1e-9);
        }
    }

    #[test]
    fn haar_cusp_probe() {
        let rot = OmegaWindow::ball(catalogue("sl2R.rotation").unwrap(), PI).unwrap();
        let d = TestFunctionDict::standard();
        let r = reference_limit_measure(&spec("sl2R.full", rot), &d, 100_000, 1).unwrap();
        let exact = haar_integrals(&d);
        for k in 0..d.fns.len() {
            assert!((r.values[k] - exact.values[k]).abs() <= r.err3[k], "{}: {} vs {}", d.fns[k].name, r.values[k], exact.values[k]);
        }
        assert!((r.values[1] - 3.0 / (2.0 * PI)).abs() < 0.005 + r.err3[1]);
    }

    #[test]
    fn trivial_fiber_is_the_window() {
        let rot = OmegaWindow::ball(catalogue("sl2R.rotation").unwrap(), PI).unwrap();
        let d = TestFunctionDict::standard();
        let r = reference_limit_measure(&spec("sl2R.trivial", rot.clone()), &d, 20_000, 2).unwrap();
        let s = sample_window(&rot, 20_000, derive_seed(2, "reference/omega", 0)).unwrap();
        let g = GroupElement::identity(GroupTag::SL2, &[Place::Real]);
        let direct = integrate(&translate_and_project(&s, &g, &rot.space).unwrap(), &d).unwrap();
        assert_eq!(r, direct);
    }

    #[test]
    fn first_factor_marginal_is_the_circle() {
        let omega = OmegaWindow::ball(catalogue("sl2xsl2.diag_rotation").unwrap(), PI).unwrap();
        let r = reference_sample(&spec("sl2xsl2.first_factor", omega.clone()), 50_000, 3).unwrap();
        let d2 = TestFunctionDict::marginal(1, 2);
        let refd = r.integrals(&d2).unwrap();
        let s = sample_window(&omega, 50_000, 99).unwrap();
        let g = GroupElement::identity(GroupTag::SL2xSL2, &[Place::Real]);
        let circle = integrate(&translate_and_project(&s, &g, &omega.space).unwrap(), &d2).unwrap();
        let rep = crate::dynamics::compare(&refd, &circle, &d2).unwrap();
        assert!(rep.distance <= rep.err3, "{rep:?}");
        // Factor one is Haar.
        let d1 = TestFunctionDict::marginal(0, 2);
        let v = r.integrals(&d1).unwrap();
        let (m, e) = weighted_mean(&r.mu.systoles(), &r.mu.weights);
        assert!(m.is_finite() && e > 0.0);
        assert!((v.values[1] - Probe::Cusp(2.0).haar_integral()).abs() <= v.err3[1]);
    }

    #[test]
    fn unsupported_and_invalid_limits() {
        let rot = OmegaWindow::ball(catalogue("sl2R.rotation").unwrap(), PI).unwrap();
        let d = TestFunctionDict::standard();
        assert!(matches!(
            reference_limit_measure(&spec("sl2R.borel", rot.clone()), &d, 10, 1),
            Err(Error::InvalidInput(_) | Error::UnsupportedL(_))
        ));
        assert!(matches!(
            reference_limit_measure(&spec("sl2R.rotation", rot.clone()), &d, 10, 1),
            Err(Error::InvalidInput(_) | Error::UnsupportedL(_))
        ));
        let mut s = spec("sl2R.unipotent", rot);
        s.n_inf = GroupElement::sl2(0.0, -1.0, 1.0, 0.0).unwrap();
        assert!(matches!(reference_limit_measure(&s, &d, 10, 1), Err(Error::InvalidInput(_))));
    }
}
