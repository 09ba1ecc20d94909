use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::{GroupElement, GroupTag};

pub const REDUCE_MAX_STEPS: usize = 10_000;

const TOL: f64 = 1e-12;

/// `gamma g . i = x + i y` in the standard domain, with rotation angle
/// `theta = 2 phi mod 2 pi` where `gamma g = n_x a_y k_phi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Reduced {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    /// `[a, b, c, d]` of `gamma` in `SL2(Z)`.
    pub gamma: [i64; 4],
}

impl Reduced {
    pub fn coords(&self) -> [f64; 3] {
        [self.x, self.y, self.theta]
    }
}

fn mat_mul(a: [i64; 4], b: [i64; 4]) -> [i64; 4] {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

/// Reduces the coset `SL2(Z) m` for `m = [[a, b], [c, d]]` by the `T`/`S`
/// iteration.
pub fn reduce_matrix(m: [[f64; 2]; 2]) -> Result<Reduced> {
    let [[mut a, mut b], [mut c, mut d]] = m;
    let mut gamma = [1i64, 0, 0, 1];
    for _ in 0..REDUCE_MAX_STEPS {
        let q = c * c + d * d;
        let x = (a * c + b * d) / q;
        let y = 1.0 / q;
        if x.abs() > 0.5 + TOL {
            let n = x.round();
            a -= n * c;
            b -= n * d;
            gamma = mat_mul([1, -(n as i64), 0, 1], gamma);
            continue;
        }
        if x * x + y * y < 1.0 - TOL {
            (a, b, c, d) = (-c, -d, a, b);
            gamma = mat_mul([0, -1, 1, 0], gamma);
            continue;
        }
        let theta = (2.0 * c.atan2(d)).rem_euclid(2.0 * std::f64::consts::PI);
        return Ok(Reduced { x, y, theta, gamma });
    }
    Err(Error::NonTermination(REDUCE_MAX_STEPS))
}

/// Reduction of the real `SL2` element `g`.
pub fn reduce_fundamental(g: &GroupElement) -> Result<Reduced> {
    if g.tag() != GroupTag::SL2 {
        return Err(Error::invalid("reduction needs an SL2 element"));
    }
    let m = g.real_block().ok_or_else(|| Error::invalid("reduction needs a real component"))?;
    reduce_matrix([[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]])
}

/// Systole `y^(-1/2)` of the unimodular lattice `Z^2 u` for a reduced point,
/// minimised over the factors.
pub fn systole_of(point: &[[f64; 3]]) -> f64 {
    point.iter().map(|c| c[1].powf(-0.5)).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{lattice_invariants, ZSLattice};
    use crate::linalg::Matrix;

    #[test]
    fn examples() {
        let r = reduce_matrix([[1.0, 5.0], [0.0, 1.0]]).unwrap();
        assert_eq!((r.x, r.y, r.gamma), (0.0, 1.0, [1, -5, 0, 1]));
        let r = reduce_matrix([[0.5, 0.0], [0.0, 2.0]]).unwrap();
        assert!((r.y - 4.0).abs() < 1e-15 && r.x.abs() < 1e-15);
        assert_eq!(r.gamma, [0, -1, 1, 0]);
        let r = reduce_matrix([[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!((r.x, r.y, r.theta, r.gamma), (0.0, 1.0, 0.0, [1, 0, 0, 1]));
    }

    #[test]
    fn theta_ignores_sign() {
        let t: f64 = 0.7;
        let k = [[t.cos(), -t.sin()], [t.sin(), t.cos()]];
        let neg = [[-k[0][0], -k[0][1]], [-k[1][0], -k[1][1]]];
        let (a, b) = (reduce_matrix(k).unwrap(), reduce_matrix(neg).unwrap());
        assert!((a.theta - 1.4).abs() < 1e-12);
        assert!((a.theta - b.theta).abs() < 1e-12);
    }

    #[test]
    fn systole_matches_enumeration() {
        for m in [[[2.0, 1.0], [3.0, 2.0]], [[0.1, 0.0], [0.0, 10.0]], [[1.0, 0.3], [0.0, 1.0]]] {
            let r = reduce_matrix(m).unwrap();
            let u = Matrix::from_rows(vec![m[0].to_vec(), m[1].to_vec()]);
            let s = lattice_invariants(&ZSLattice::from_real(u).unwrap()).unwrap().systole;
            assert!((s - systole_of(&[r.coords()])).abs() < 1e-9, "{s}");
        }
    }
}
