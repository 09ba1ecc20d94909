use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::{ad_lie, exp_padic, exp_real, FactorKind, GroupTag, SubgroupDescriptor};
use crate::linalg::Matrix;
use crate::qs_arith::{PadicScalar, Place};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ChartKind {
    /// `t -> exp(t K)` on a one-parameter compact subgroup.
    Angle,
    /// `x -> exp(sum x_i X_i)` over a basis of `Lie(H)`.
    Exp,
    /// Matrix entries as `p`-adic digits on `SL2(Z_p)`.
    Digit,
    /// The trivial group.
    Point,
}

/// A parametrisation of a neighbourhood in `H` by a ball of `Q_v^dim`, with
/// `c_m^-1 mu <= Theta_* lambda <= c_m mu` for Haar `mu` normalised to have
/// density 1 at the chart origin.
#[derive(Clone, Debug, Serialize)]
pub struct Chart {
    pub kind: ChartKind,
    pub subgroup: String,
    pub tag: GroupTag,
    pub place: Place,
    pub dim: usize,
    pub radius: f64,
    pub c_m: f64,
    /// Range of the sampled Jacobian before the safety margin.
    pub jacobian_range: (f64, f64),
    #[serde(skip)]
    basis: Vec<Matrix<BigRational>>,
    #[serde(skip)]
    basis_real: Vec<Matrix<f64>>,
    /// `ad Y_j` restricted to `Lie(H)`, in basis coordinates.
    #[serde(skip)]
    ad_restricted: Vec<Matrix<f64>>,
}

const JACOBIAN_SAMPLES: usize = 4096;
const JACOBIAN_SEED: u64 = 0x6a61_636f_6269;
const SAFETY: f64 = 1.1;

fn to_f64(m: &Matrix<BigRational>) -> Matrix<f64> {
    m.map(|q| q.to_f64().unwrap_or(f64::NAN))
}

fn is_circle(kind: &FactorKind) -> bool {
    match kind {
        FactorKind::Rotation => true,
        FactorKind::DiagonalEmbedding(k) => is_circle(k),
        _ => false,
    }
}

/// Builds the chart of `H` at its first place with a nonzero Lie algebra,
/// preferring the real place.
pub fn chart_with_density(h: &SubgroupDescriptor, radius: f64) -> Result<Chart> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::invalid("chart radius must be positive and finite"));
    }
    let dims = h.lie.dims();
    let Some(i) = (0..h.places.len()).find(|&i| dims[i] > 0) else {
        return Ok(Chart {
            kind: ChartKind::Point,
            subgroup: h.id.clone(),
            tag: h.tag,
            place: h.places[0],
            dim: 0,
            radius,
            c_m: 1.0,
            jacobian_range: (1.0, 1.0),
            basis: vec![],
            basis_real: vec![],
            ad_restricted: vec![],
        });
    };
    let place = h.places[i];
    let basis = h.lie.basis_at(i);
    let coords: Vec<Vec<f64>> = h.lie.coords_at(i).iter().map(|c| c.iter().map(|q| q.to_f64().unwrap()).collect()).collect();
    let basis_real: Vec<Matrix<f64>> = basis.iter().map(to_f64).collect();
    let dim = basis.len();
    let mut chart = Chart {
        kind: ChartKind::Exp,
        subgroup: h.id.clone(),
        tag: h.tag,
        place,
        dim,
        radius,
        c_m: 1.0,
        jacobian_range: (1.0, 1.0),
        ad_restricted: restricted_ad(h.tag, &basis_real, &coords)?,
        basis,
        basis_real,
    };
    match place {
        Place::Padic(p) => {
            if h.factors[i] == FactorKind::CompactPadic && h.tag == GroupTag::SL2 {
                chart.kind = ChartKind::Digit;
                chart.dim = 3;
                chart.radius = 1.0;
            } else if radius >= (p as f64).powf(-1.0 / (p as f64 - 1.0)) {
                return Err(Error::ExpDivergent(format!(
                    "chart radius {radius} is outside the {p}-adic convergence radius {p}^(-1/{})",
                    p - 1
                )));
            }
            // Both charts push the uniform measure to Haar exactly.
        }
        Place::Real => {
            if dim == 1 && is_circle(&h.factors[i]) {
                chart.kind = ChartKind::Angle;
                // One full turn; the basis element has period 2 pi.
                chart.radius = radius.min(std::f64::consts::PI);
            } else {
                let (lo, hi) = chart.sample_jacobian();
                chart.jacobian_range = (lo, hi);
                let worst = hi.max(1.0 / lo);
                chart.c_m = 1.0 + SAFETY * (worst - 1.0);
            }
        }
    }
    Ok(chart)
}

/// Matrices of `ad Y_j` on `Lie(H)` in the coordinates of the basis `Y`.
fn restricted_ad(tag: GroupTag, basis: &[Matrix<f64>], coords: &[Vec<f64>]) -> Result<Vec<Matrix<f64>>> {
    let k = basis.len();
    if k == 0 {
        return Ok(vec![]);
    }
    let b = Matrix::from_rows(coords.to_vec()).transpose();
    let bt = b.transpose();
    let gram_inv = bt.mul(&b).inverse().ok_or_else(|| Error::invalid("dependent Lie basis"))?;
    let pinv = gram_inv.mul(&bt);
    Ok(basis.iter().map(|y| pinv.mul(&ad_lie(tag, y)).mul(&b)).collect())
}

impl Chart {
    pub fn basis(&self) -> &[Matrix<f64>] {
        &self.basis_real
    }

    fn lie_point(&self, x: &[f64]) -> Matrix<f64> {
        let n = self.tag.matrix_size();
        self.basis_real.iter().zip(x).fold(Matrix::zeros(n, n), |acc, (y, t)| acc.add(&y.scale(t)))
    }

    /// `Theta(x)` at the real place.
    pub fn theta_real(&self, x: &[f64]) -> Result<Matrix<f64>> {
        match (self.kind, self.place) {
            (ChartKind::Point, _) => Ok(Matrix::identity(self.tag.matrix_size())),
            (ChartKind::Angle | ChartKind::Exp, Place::Real) if x.len() == self.dim => Ok(exp_real(&self.lie_point(x))),
            _ => Err(Error::invalid("not a real chart of matching dimension")),
        }
    }

    /// `Theta(x)` for a `p`-adic exponential chart with rational coordinates.
    pub fn theta_padic(&self, x: &[BigRational]) -> Result<Matrix<PadicScalar>> {
        let (ChartKind::Exp, Place::Padic(p)) = (self.kind, self.place) else {
            return Err(Error::invalid("not a p-adic exponential chart"));
        };
        if x.len() != self.dim {
            return Err(Error::invalid("chart coordinate has the wrong dimension"));
        }
        let n = self.tag.matrix_size();
        let mut acc = Matrix::zeros_like(n, n, &BigRational::from_integer(0.into()));
        for (y, t) in self.basis.iter().zip(x) {
            acc = acc.add(&y.scale(t));
        }
        exp_padic(&acc.map(|q| PadicScalar::from_rational(p, q.clone())))
    }

    /// Haar density of `Theta_* lambda` at `Theta(x)` relative to its value at
    /// the origin: `|det (1 - e^{-ad X}) / ad X|` on `Lie(H)`.
    pub fn density(&self, x: &[f64]) -> f64 {
        if self.kind != ChartKind::Exp || self.place != Place::Real || self.dim == 0 {
            return 1.0;
        }
        let a = self
            .ad_restricted
            .iter()
            .zip(x)
            .fold(Matrix::zeros(self.dim, self.dim), |acc, (m, t)| acc.add(&m.scale(t)));
        let neg = a.neg();
        let mut term = Matrix::identity(self.dim);
        let mut sum = term.clone();
        for k in 1..60 {
            term = term.mul(&neg).scale(&(1.0 / (k as f64 + 1.0)));
            sum = sum.add(&term);
            if term.sup_norm() < 1e-17 {
                break;
            }
        }
        sum.det().abs()
    }

    /// Deterministic sample of the ball: a seeded uniform cloud plus the
    /// points `+-radius e_i`.
    fn sample_jacobian(&self) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(JACOBIAN_SEED);
        let mut pts: Vec<Vec<f64>> = Vec::with_capacity(JACOBIAN_SAMPLES + 2 * self.dim);
        for i in 0..self.dim {
            for s in [-1.0, 1.0] {
                let mut v = vec![0.0; self.dim];
                v[i] = s * self.radius;
                pts.push(v);
            }
        }
        for _ in 0..JACOBIAN_SAMPLES {
            let dir: Vec<f64> = (0..self.dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let n = dir.iter().map(|t| t * t).sum::<f64>().sqrt().max(1e-300);
            let r = self.radius * rng.gen::<f64>().powf(1.0 / self.dim as f64);
            pts.push(dir.iter().map(|t| t * r / n).collect());
        }
        pts.iter()
            .map(|x| self.density(x))
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), j| (lo.min(j), hi.max(j)))
    }

    /// The digit chart on `SL2(Z_p)` modulo `p^depth`.
    ///
    /// `x = (x0, x1, x2)` maps to `[[x0, x1], [x2, (1 + x1 x2) / x0]]` when
    /// `x0` is a unit, to `[[x0, (x0 x2 - 1) / x1], [x1, x2]]` when only `x1`
    /// is a unit, and is outside the chart otherwise. Each branch is a
    /// bijection onto its image, so uniform digits push forward to Haar.
    pub fn theta_digits(&self, x: [u64; 3], depth: u32) -> Option<[u64; 4]> {
        let (ChartKind::Digit, Place::Padic(p)) = (self.kind, self.place) else {
            return None;
        };
        digit_matrix(p, depth, x)
    }

    /// Chart-domain measure inside `Z_p^3`.
    pub fn digit_domain_measure(&self) -> f64 {
        match (self.kind, self.place) {
            (ChartKind::Digit, Place::Padic(p)) => 1.0 - 1.0 / (p * p) as f64,
            _ => 1.0,
        }
    }
}

fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let g = (a as i128).extended_gcd(&(m as i128));
    (g.gcd == 1).then(|| g.x.rem_euclid(m as i128) as u64)
}

pub(crate) fn digit_matrix(p: u64, depth: u32, x: [u64; 3]) -> Option<[u64; 4]> {
    let m = p.checked_pow(depth)?;
    let [x0, x1, x2] = x.map(|t| t % m);
    let mulm = |a: u64, b: u64| ((a as u128 * b as u128) % m as u128) as u64;
    if x0 % p != 0 {
        let d = mulm((1 + mulm(x1, x2)) % m, inv_mod(x0, m)?);
        Some([x0, x1, x2, d])
    } else if x1 % p != 0 {
        let b = mulm((mulm(x0, x2) + m - 1 % m) % m, inv_mod(x1, m)?);
        Some([x0, b, x1, x2])
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::catalogue;
    use std::collections::HashSet;

    #[test]
    fn rotation_angle_chart() {
        let c = chart_with_density(&catalogue("sl2R.rotation").unwrap(), 10.0).unwrap();
        assert_eq!(c.kind, ChartKind::Angle);
        assert_eq!(c.c_m, 1.0);
        assert!((c.radius - std::f64::consts::PI).abs() < 1e-15);
        let g = c.theta_real(&[0.3]).unwrap();
        assert!((g[(0, 0)] - 0.3f64.cos()).abs() < 1e-12);
    }

    #[test]
    fn sl2_exp_chart_is_nearly_isometric() {
        let c = chart_with_density(&catalogue("sl2R.full").unwrap(), 0.1).unwrap();
        assert_eq!(c.kind, ChartKind::Exp);
        assert!(c.c_m >= 1.0 && c.c_m <= 1.1, "{}", c.c_m);
        assert_eq!(c.density(&[0.0; 3]), 1.0);
    }

    #[test]
    fn unipotent_and_torus_charts_are_exact() {
        for id in ["sl2R.unipotent", "sl2R.torus", "sl3R.heisenberg"] {
            let c = chart_with_density(&catalogue(id).unwrap(), 2.0).unwrap();
            assert!((c.c_m - 1.0).abs() < 1e-12, "{id}: {}", c.c_m);
        }
    }

    #[test]
    fn digit_chart_counts_sl2_mod_8() {
        let c = chart_with_density(&catalogue("sl2Q2.compact").unwrap(), 1.0).unwrap();
        assert_eq!((c.kind, c.c_m), (ChartKind::Digit, 1.0));
        let mut seen = HashSet::new();
        let mut hits = 0;
        for a in 0..8 {
            for b in 0..8 {
                for d in 0..8 {
                    if let Some(g) = c.theta_digits([a, b, d], 3) {
                        hits += 1;
                        assert_eq!((g[0] * g[3] + 64 - g[1] * g[2] % 8) % 8, 1);
                        seen.insert(g);
                    }
                }
            }
        }
        assert_eq!((hits, seen.len()), (384, 384));
        assert!((c.digit_domain_measure() - 384.0 / 512.0).abs() < 1e-15);
    }

    #[test]
    fn padic_exp_radius() {
        use crate::groups::{lie_basis, LieSpan};
        use crate::linalg::rational;
        let span = LieSpan::new(GroupTag::SL2, vec![Place::Padic(2)], vec![lie_basis(GroupTag::SL2)]).unwrap();
        let h = SubgroupDescriptor::from_span("sl2Q2only", span, true, false).unwrap();
        assert!(matches!(chart_with_density(&h, 0.5), Err(Error::ExpDivergent(_))));
        let c = chart_with_density(&h, 0.25).unwrap();
        assert_eq!((c.kind, c.c_m, c.dim), (ChartKind::Exp, 1.0, 3));
        // exp(4 e) is exact.
        let g = c.theta_padic(&[rational(4, 1), rational(0, 1), rational(0, 1)]).unwrap();
        assert_eq!(g[(0, 1)].to_rational(), Some(rational(4, 1)));
        assert_eq!(chart_with_density(&catalogue("sl2Q2.full").unwrap(), 0.25).unwrap().place, Place::Real);
        assert_eq!(chart_with_density(&catalogue("sl2Q3.compact").unwrap(), 1.0).unwrap().kind, ChartKind::Digit);
    }

    #[test]
    fn trivial_group_is_a_point() {
        let c = chart_with_density(&catalogue("sl2R.trivial").unwrap(), 1.0).unwrap();
        assert_eq!((c.kind, c.dim, c.c_m), (ChartKind::Point, 0, 1.0));
    }
}
