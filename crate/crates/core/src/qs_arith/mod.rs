//! Arithmetic over `Q_S`: places, per-place absolute values, norms, balls.

mod ball;
mod padic;
mod place;

pub use ball::{ball_volume_and_doubling, doubling_constant, BallFactor, BallMeasure, BallQS};
pub use padic::{
    rational_abs, rational_valuation, truncate_mod_power, PadicScalar, DEFAULT_PRECISION,
};
pub(crate) use padic::scale_by_power;
pub use place::{is_prime, primes_of, validate_places, Place};

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// One coordinate of an element of `Q_S` at a given place.
#[derive(Clone, Debug, PartialEq)]
pub enum Component {
    Real(f64),
    Padic(PadicScalar),
}

impl Component {
    pub fn embed(place: Place, q: &BigRational) -> Component {
        match place {
            Place::Real => Component::Real(q.to_f64().unwrap_or(f64::NAN)),
            Place::Padic(p) => Component::Padic(PadicScalar::from_rational(p, q.clone())),
        }
    }

    pub fn abs(&self) -> Result<f64> {
        match self {
            Component::Real(x) => Ok(x.abs()),
            Component::Padic(x) => x.abs(),
        }
    }

    /// Absolute value as an exact rational (floats convert exactly).
    pub fn abs_rational(&self) -> Result<BigRational> {
        match self {
            Component::Real(x) => BigRational::from_float(x.abs())
                .ok_or_else(|| Error::invalid(format!("non-finite real value {x}"))),
            Component::Padic(x) => x.abs_rational(),
        }
    }

    fn place_matches(&self, v: Place) -> bool {
        match (self, v) {
            (Component::Real(_), Place::Real) => true,
            (Component::Padic(x), Place::Padic(p)) => x.prime() == p,
            _ => false,
        }
    }
}

/// An element of `Q_S`: one component per place of `S`.
#[derive(Clone, Debug, PartialEq)]
pub struct QSScalar {
    places: Vec<Place>,
    components: Vec<Component>,
}

impl QSScalar {
    pub fn new(places: Vec<Place>, components: Vec<Component>) -> Result<Self> {
        validate_places(&places)?;
        if places.len() != components.len() {
            return Err(Error::invalid("one component per place is required"));
        }
        for (v, c) in places.iter().zip(&components) {
            if !c.place_matches(*v) {
                return Err(Error::invalid(format!("component {c:?} does not live at {v}")));
            }
        }
        Ok(QSScalar { places, components })
    }

    /// The diagonal image of a rational number.
    pub fn from_rational(places: &[Place], q: &BigRational) -> Result<Self> {
        let comps = places.iter().map(|&v| Component::embed(v, q)).collect();
        Self::new(places.to_vec(), comps)
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn component(&self, v: Place) -> Option<&Component> {
        self.places.iter().position(|&w| w == v).map(|i| &self.components[i])
    }
}

/// `|x_v|_v`, with `|p|_p = 1/p`.
pub fn place_abs(x: &QSScalar, v: Place) -> Result<f64> {
    x.component(v)
        .ok_or_else(|| Error::invalid(format!("scalar has no component at {v}")))?
        .abs()
}

/// Per-place coordinates of a vector.
#[derive(Clone, Debug, PartialEq)]
pub enum VecBlock {
    Real(Vec<f64>),
    Padic(Vec<PadicScalar>),
}

impl VecBlock {
    pub fn len(&self) -> usize {
        match self {
            VecBlock::Real(v) => v.len(),
            VecBlock::Padic(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn embed(place: Place, qs: &[BigRational]) -> VecBlock {
        match place {
            Place::Real => VecBlock::Real(qs.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect()),
            Place::Padic(p) => {
                VecBlock::Padic(qs.iter().map(|q| PadicScalar::from_rational(p, q.clone())).collect())
            }
        }
    }

    fn matches(&self, v: Place) -> bool {
        match (self, v) {
            (VecBlock::Real(_), Place::Real) => true,
            (VecBlock::Padic(xs), Place::Padic(p)) => xs.iter().all(|x| x.prime() == p),
            _ => false,
        }
    }

    /// Sup norm at this place.
    pub fn sup_norm(&self) -> Result<f64> {
        match self {
            VecBlock::Real(v) => Ok(v.iter().fold(0.0, |m, x| m.max(x.abs()))),
            VecBlock::Padic(v) => v.iter().try_fold(0.0f64, |m, x| Ok(m.max(x.abs()?))),
        }
    }

    pub fn euclidean_norm(&self) -> Result<f64> {
        match self {
            VecBlock::Real(v) => Ok(v.iter().map(|x| x * x).sum::<f64>().sqrt()),
            VecBlock::Padic(_) => self.sup_norm(),
        }
    }

    fn sup_norm_rational(&self) -> Result<BigRational> {
        let mut best = BigRational::zero();
        match self {
            VecBlock::Real(v) => {
                for x in v {
                    let a = BigRational::from_float(x.abs())
                        .ok_or_else(|| Error::invalid(format!("non-finite real value {x}")))?;
                    if a > best {
                        best = a;
                    }
                }
            }
            VecBlock::Padic(v) => {
                for x in v {
                    let a = x.abs_rational()?;
                    if a > best {
                        best = a;
                    }
                }
            }
        }
        Ok(best)
    }
}

/// A vector in `Q_S^m`, stored as one block per place.
#[derive(Clone, Debug, PartialEq)]
pub struct QSVector {
    places: Vec<Place>,
    blocks: Vec<VecBlock>,
}

impl QSVector {
    pub fn new(places: Vec<Place>, blocks: Vec<VecBlock>) -> Result<Self> {
        validate_places(&places)?;
        if places.len() != blocks.len() {
            return Err(Error::invalid("one block per place is required"));
        }
        for (v, b) in places.iter().zip(&blocks) {
            if !b.matches(*v) {
                return Err(Error::invalid(format!("block does not live at {v}")));
            }
        }
        if blocks.iter().all(VecBlock::is_empty) {
            return Err(Error::invalid("vector must be nonempty"));
        }
        Ok(QSVector { places, blocks })
    }

    /// Diagonal embedding of a rational vector.
    pub fn from_rationals(places: &[Place], qs: &[BigRational]) -> Result<Self> {
        let blocks = places.iter().map(|&v| VecBlock::embed(v, qs)).collect();
        Self::new(places.to_vec(), blocks)
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn blocks(&self) -> &[VecBlock] {
        &self.blocks
    }

    pub fn block(&self, v: Place) -> Option<&VecBlock> {
        self.places.iter().position(|&w| w == v).map(|i| &self.blocks[i])
    }

    pub fn dim(&self) -> usize {
        self.blocks[0].len()
    }
}

/// Per-place square matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum MatBlock {
    Real(Matrix<f64>),
    Padic(Matrix<PadicScalar>),
}

impl MatBlock {
    pub fn embed(place: Place, m: &Matrix<BigRational>) -> MatBlock {
        match place {
            Place::Real => MatBlock::Real(m.map(|q| q.to_f64().unwrap_or(f64::NAN))),
            Place::Padic(p) => MatBlock::Padic(m.map(|q| PadicScalar::from_rational(p, q.clone()))),
        }
    }

    pub fn place(&self) -> Place {
        match self {
            MatBlock::Real(_) => Place::Real,
            MatBlock::Padic(m) => Place::Padic(m.data()[0].prime()),
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            MatBlock::Real(m) => m.rows(),
            MatBlock::Padic(m) => m.rows(),
        }
    }

    pub fn mul(&self, other: &MatBlock) -> MatBlock {
        match (self, other) {
            (MatBlock::Real(a), MatBlock::Real(b)) => MatBlock::Real(a.mul(b)),
            (MatBlock::Padic(a), MatBlock::Padic(b)) => MatBlock::Padic(a.mul(b)),
            _ => panic!("multiplying blocks from different places"),
        }
    }

    pub fn inverse(&self) -> Option<MatBlock> {
        match self {
            MatBlock::Real(a) => a.inverse().map(MatBlock::Real),
            MatBlock::Padic(a) => a.inverse().map(MatBlock::Padic),
        }
    }

    /// `|det|_v`.
    pub fn det_abs(&self) -> Result<f64> {
        match self {
            MatBlock::Real(a) => Ok(a.det().abs()),
            MatBlock::Padic(a) => a.det().abs(),
        }
    }

    /// Operator norm of `w -> w M` for the sup norm at this place.
    pub fn row_action_norm(&self) -> Result<f64> {
        match self {
            MatBlock::Real(a) => Ok(a.row_action_norm()),
            MatBlock::Padic(a) => a.data().iter().try_fold(0.0f64, |m, x| Ok(m.max(x.abs()?))),
        }
    }

    /// Row vector `c` (rational coefficients) times the block.
    pub fn left_apply(&self, c: &[BigRational]) -> VecBlock {
        match self {
            MatBlock::Real(a) => {
                let cf: Vec<f64> = c.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect();
                VecBlock::Real(
                    (0..a.cols())
                        .map(|k| (0..a.rows()).map(|j| cf[j] * a[(j, k)]).sum())
                        .collect(),
                )
            }
            MatBlock::Padic(a) => {
                let p = a.data()[0].prime();
                let cp: Vec<PadicScalar> =
                    c.iter().map(|q| PadicScalar::from_rational(p, q.clone())).collect();
                VecBlock::Padic(
                    (0..a.cols())
                        .map(|k| {
                            (0..a.rows()).fold(PadicScalar::zero(p), |acc, j| acc.add(&cp[j].mul(&a[(j, k)])))
                        })
                        .collect(),
                )
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormMode {
    /// `max_v ||x_v||_v`
    Max,
    /// `prod_v ||x_v||_v`
    Content,
}

/// Norm used on the archimedean factor; ultrametric factors always use sup.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArchNorm {
    #[default]
    Sup,
    Euclidean,
}

/// Per-place norms `||x_v||_v` in the order of `S`.
pub fn per_place_norms(x: &QSVector, arch: ArchNorm) -> Result<Vec<f64>> {
    x.blocks
        .iter()
        .map(|b| match (b, arch) {
            (VecBlock::Real(_), ArchNorm::Euclidean) => b.euclidean_norm(),
            _ => b.sup_norm(),
        })
        .collect()
}

pub fn vector_norm(x: &QSVector, mode: NormMode) -> Result<f64> {
    vector_norm_with(x, mode, ArchNorm::Sup)
}

pub fn vector_norm_with(x: &QSVector, mode: NormMode, arch: ArchNorm) -> Result<f64> {
    match mode {
        NormMode::Max => Ok(per_place_norms(x, arch)?.into_iter().fold(0.0, f64::max)),
        NormMode::Content if arch == ArchNorm::Sup => {
            Ok(content_norm_exact(x)?.to_f64().unwrap_or(f64::INFINITY))
        }
        NormMode::Content => Ok(per_place_norms(x, arch)?.into_iter().product()),
    }
}

/// Content (product) norm with sup norms at every place, computed exactly.
/// Floats enter as the dyadic rationals they are.
pub fn content_norm_exact(x: &QSVector) -> Result<BigRational> {
    let mut acc = BigRational::one();
    for b in &x.blocks {
        acc *= b.sup_norm_rational()?;
    }
    Ok(acc)
}

/// Content norm of a rational vector diagonally embedded in `Q_S^m`.
pub fn rational_content_norm(places: &[Place], qs: &[BigRational]) -> BigRational {
    let mut acc = BigRational::one();
    for v in places {
        let m = qs
            .iter()
            .map(|q| match v {
                Place::Real => q.abs(),
                Place::Padic(p) => rational_abs(q, *p),
            })
            .max()
            .unwrap_or_else(BigRational::zero);
        acc *= m;
    }
    acc
}
