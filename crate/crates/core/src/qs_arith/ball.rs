use crate::error::{Error, Result};

use super::{Component, Place, VecBlock};

/// One factor `Q_v^d` of a product space, with the ball's center there.
#[derive(Clone, Debug, PartialEq)]
pub struct BallFactor {
    pub place: Place,
    pub center: VecBlock,
}

impl BallFactor {
    pub fn dim(&self) -> usize {
        self.center.len()
    }
}

/// Closed ball `{x : max_v ||x_v - c_v||_v <= r}` in `prod_v Q_v^(d_v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallQS {
    factors: Vec<BallFactor>,
    radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BallMeasure {
    pub volume: f64,
    pub c_d: f64,
    /// One line per factor: the closed form used for its doubling constant.
    pub certificate: Vec<String>,
}

impl BallQS {
    pub fn new(factors: Vec<BallFactor>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!("ball radius must be positive, got {radius}")));
        }
        if factors.is_empty() {
            return Err(Error::invalid("ball needs at least one factor"));
        }
        Ok(BallQS { factors, radius })
    }

    /// Ball around the origin of `Q_v^dim`.
    pub fn centered(place: Place, dim: usize, radius: f64) -> Result<Self> {
        let center = match place {
            Place::Real => VecBlock::Real(vec![0.0; dim]),
            Place::Padic(p) => VecBlock::Padic(vec![super::PadicScalar::zero(p); dim]),
        };
        Self::new(vec![BallFactor { place, center }], radius)
    }

    pub fn factors(&self) -> &[BallFactor] {
        &self.factors
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// The radius the ball actually has in the factor at `v`: at an
    /// ultrametric place it is the largest `p^k <= radius`.
    pub fn effective_radius(&self, v: Place) -> f64 {
        quantize(v, self.radius)
    }

    /// `a * B` for a single-factor ball.
    pub fn scale(&self, a: &Component) -> Result<BallQS> {
        if self.factors.len() != 1 {
            return Err(Error::invalid("scaling is defined for single-factor balls"));
        }
        let f = &self.factors[0];
        let k = a.abs()?;
        if k == 0.0 {
            return Err(Error::invalid("cannot scale a ball by zero"));
        }
        let center = match (&f.center, a) {
            (VecBlock::Real(c), Component::Real(x)) => VecBlock::Real(c.iter().map(|y| y * x).collect()),
            (VecBlock::Padic(c), Component::Padic(x)) => VecBlock::Padic(c.iter().map(|y| y.mul(x)).collect()),
            _ => return Err(Error::invalid("scalar and ball live at different places")),
        };
        let radius = match f.place {
            Place::Real => self.radius * k,
            Place::Padic(_) => self.effective_radius(f.place) * k,
        };
        BallQS::new(
            vec![BallFactor {
                place: f.place,
                center,
            }],
            radius,
        )
    }
}

fn quantize(v: Place, r: f64) -> f64 {
    match v {
        Place::Real => r,
        Place::Padic(p) => {
            let pf = p as f64;
            let pow = |k: i32| if k >= 0 { pf.powi(k) } else { 1.0 / pf.powi(-k) };
            // Radii that are powers of p up to float rounding snap to that power.
            let near = r.log(pf).round() as i32;
            if (pow(near) - r).abs() <= 1e-12 * r {
                return pow(near);
            }
            let mut k = r.log(pf).floor() as i32;
            if pow(k + 1) <= r {
                k += 1;
            }
            if pow(k) > r {
                k -= 1;
            }
            pow(k)
        }
    }
}

/// Smallest `c` with `vol(3B) <= c vol(B)` for every ball of `Q_v^dim`.
pub fn doubling_constant(v: Place, dim: usize) -> (f64, String) {
    let d = dim as i32;
    match v {
        Place::Real => (3f64.powi(d), format!("inf: Lebesgue, (3r/r)^{dim} = 3^{dim}")),
        Place::Padic(2) => (
            2f64.powi(d),
            format!("Q2: B(3*2^k) = B(2^(k+1)), ratio 2 per coordinate, 2^{dim}"),
        ),
        Place::Padic(3) => (
            3f64.powi(d),
            format!("Q3: B(3*3^k) = B(3^(k+1)), ratio 3 per coordinate, 3^{dim}"),
        ),
        Place::Padic(p) => (1.0, format!("Q{p}: 3*{p}^k < {p}^(k+1), so B(3r) = B(r), ratio 1")),
    }
}

/// Product Haar volume (Lebesgue at the real place, `vol(Z_p) = 1`) and the
/// doubling constant of the ambient product space.
pub fn ball_volume_and_doubling(b: &BallQS) -> BallMeasure {
    let mut volume = 1.0;
    let mut c_d = 1.0;
    let mut certificate = Vec::new();
    for f in &b.factors {
        let d = f.dim() as i32;
        let r = b.effective_radius(f.place);
        volume *= match f.place {
            Place::Real => (2.0 * r).powi(d),
            Place::Padic(_) => r.powi(d),
        };
        let (c, line) = doubling_constant(f.place, f.dim());
        c_d *= c;
        certificate.push(line);
    }
    BallMeasure {
        volume,
        c_d,
        certificate,
    }
}
