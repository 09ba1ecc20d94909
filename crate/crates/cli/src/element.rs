//! Numbers, parameter grids and group-element templates as they appear in
//! scenario files.

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use qsdyn_core::linalg::Matrix;
use qsdyn_core::qs_arith::MatBlock;
use qsdyn_core::{GroupElement, GroupTag, Place};

/// An exact rational (`3`, `-2/7`) or a decimal real (`0.5`, `1e-3`).
#[derive(Clone, Debug, PartialEq)]
pub enum Num {
    Exact(BigRational),
    Real(f64),
}

impl Num {
    pub fn to_f64(&self) -> f64 {
        match self {
            Num::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Num::Real(x) => *x,
        }
    }

    pub fn to_i64(&self) -> Option<i64> {
        match self {
            Num::Exact(q) if q.is_integer() => q.to_integer().to_i64(),
            Num::Real(x) if x.fract() == 0.0 && x.abs() < 1e15 => Some(*x as i64),
            _ => None,
        }
    }
}

impl FromStr for Num {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let decimal = s.contains(['.', 'e', 'E']) || s.ends_with("inf") || s.ends_with("NaN");
        if decimal {
            let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
            if !x.is_finite() {
                return Err(format!("`{s}` is not finite"));
            }
            return Ok(Num::Real(x));
        }
        if s.split_once('/').is_some_and(|(_, d)| d.trim().trim_start_matches('0').is_empty()) {
            return Err(format!("`{s}` has a zero denominator"));
        }
        let q = BigRational::from_str(s).map_err(|_| format!("`{s}` is not a number"))?;
        Ok(Num::Exact(q))
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Exact(q) if q.is_integer() => write!(f, "{}", q.numer()),
            Num::Exact(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            Num::Real(x) => write!(f, "{x:?}"),
        }
    }
}

pub fn parse_real(s: &str) -> Result<f64, String> {
    s.parse::<Num>().map(|n| n.to_f64())
}

pub fn fmt_real(x: f64) -> String {
    format!("{x:?}")
}

pub fn parse_reals(s: &str) -> Result<Vec<f64>, String> {
    crate::ini::split_list(s).iter().map(|t| parse_real(t)).collect()
}

pub fn fmt_reals(xs: &[f64]) -> String {
    xs.iter().map(|x| fmt_real(*x)).collect::<Vec<_>>().join(", ")
}

pub fn parse_nums(s: &str) -> Result<Vec<Num>, String> {
    crate::ini::split_list(s).iter().map(|t| t.parse()).collect()
}

pub fn fmt_nums(xs: &[Num]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// A parameter grid: an explicit list or `linspace(lo, hi, n)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Grid {
    List(Vec<Num>),
    Linspace { lo: f64, hi: f64, n: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<Num> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Linspace { lo, hi, n } => (0..*n)
                .map(|k| {
                    let t = if *n == 1 { 0.0 } else { k as f64 / (*n - 1) as f64 };
                    Num::Real(lo + (hi - lo) * t)
                })
                .collect(),
        }
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some(body) = s.strip_prefix("linspace(").and_then(|r| r.strip_suffix(')')) {
            let parts = crate::ini::split_list(body);
            if parts.len() != 3 {
                return Err("linspace takes (lo, hi, n)".into());
            }
            let n: usize = parts[2].parse().map_err(|_| format!("`{}` is not a point count", parts[2]))?;
            if n == 0 {
                return Err("parameter grid must be nonempty".into());
            }
            return Ok(Grid::Linspace { lo: parse_real(&parts[0])?, hi: parse_real(&parts[1])?, n });
        }
        let v = parse_nums(s)?;
        if v.is_empty() {
            return Err("parameter grid must be nonempty".into());
        }
        Ok(Grid::List(v))
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grid::List(v) => f.write_str(&fmt_nums(v)),
            Grid::Linspace { lo, hi, n } => write!(f, "linspace({lo:?}, {hi:?}, {n})"),
        }
    }
}

/// Argument of an element template: the grid parameter `t` or a constant.
#[derive(Clone, Debug, PartialEq)]
pub enum Arg {
    T,
    Const(Num),
}

/// Element templates:
/// `e`, `diag(x)` = diag(e^x, e^-x), `rotation(x)`, `unipotent(x)` = [[1, x], [0, 1]],
/// `lower(x)`, `hecke(i)` = diag(p^-i, p^i) at the `p`-adic place and `e` at the
/// real one, and `(A, B)` in `SL2 x SL2`.
#[derive(Clone, Debug, PartialEq)]
pub enum ElemTemplate {
    Identity,
    Diag(Arg),
    Rotation(Arg),
    Unipotent(Arg),
    Lower(Arg),
    Hecke(Arg),
    Pair(Box<ElemTemplate>, Box<ElemTemplate>),
}

impl FromStr for ElemTemplate {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s == "e" {
            return Ok(ElemTemplate::Identity);
        }
        if let Some(body) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
            let parts = crate::ini::split_list(body);
            if parts.len() != 2 {
                return Err(format!("`{s}`: a pair has two components"));
            }
            return Ok(ElemTemplate::Pair(Box::new(parts[0].parse()?), Box::new(parts[1].parse()?)));
        }
        let (head, arg) = s
            .split_once('(')
            .and_then(|(h, r)| r.strip_suffix(')').map(|a| (h.trim(), a.trim())))
            .ok_or_else(|| format!("`{s}` is not an element"))?;
        let arg = if arg == "t" { Arg::T } else { Arg::Const(arg.parse()?) };
        Ok(match head {
            "diag" => ElemTemplate::Diag(arg),
            "rotation" => ElemTemplate::Rotation(arg),
            "unipotent" => ElemTemplate::Unipotent(arg),
            "lower" => ElemTemplate::Lower(arg),
            "hecke" => ElemTemplate::Hecke(arg),
            _ => return Err(format!("unknown element family `{head}`")),
        })
    }
}

impl fmt::Display for ElemTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (head, arg) = match self {
            ElemTemplate::Identity => return f.write_str("e"),
            ElemTemplate::Pair(a, b) => return write!(f, "({a}, {b})"),
            ElemTemplate::Diag(a) => ("diag", a),
            ElemTemplate::Rotation(a) => ("rotation", a),
            ElemTemplate::Unipotent(a) => ("unipotent", a),
            ElemTemplate::Lower(a) => ("lower", a),
            ElemTemplate::Hecke(a) => ("hecke", a),
        };
        match arg {
            Arg::T => write!(f, "{head}(t)"),
            Arg::Const(n) => write!(f, "{head}({n})"),
        }
    }
}

fn padic_identity(p: u64) -> MatBlock {
    MatBlock::embed(Place::Padic(p), &Matrix::identity_like(2, &BigRational::one()))
}

impl ElemTemplate {
    pub fn uses_t(&self) -> bool {
        match self {
            ElemTemplate::Identity => false,
            ElemTemplate::Pair(a, b) => a.uses_t() || b.uses_t(),
            ElemTemplate::Diag(a)
            | ElemTemplate::Rotation(a)
            | ElemTemplate::Unipotent(a)
            | ElemTemplate::Lower(a)
            | ElemTemplate::Hecke(a) => *a == Arg::T,
        }
    }

    /// The element at parameter `t` over `places`.
    pub fn build(&self, tag: GroupTag, places: &[Place], t: Option<&Num>) -> Result<GroupElement, String> {
        let arg = |a: &Arg| -> Result<Num, String> {
            match a {
                Arg::T => t.cloned().ok_or_else(|| "template uses `t` but no parameter is given".to_string()),
                Arg::Const(n) => Ok(n.clone()),
            }
        };
        let err = |e: qsdyn_core::Error| e.to_string();
        if let ElemTemplate::Pair(a, b) = self {
            if tag != GroupTag::SL2xSL2 {
                return Err(format!("pairs live in SL2xSL2, not {tag}"));
            }
            let (x, y) = (a.build(GroupTag::SL2, places, t)?, b.build(GroupTag::SL2, places, t)?);
            return GroupElement::pair(&x, &y).map_err(err);
        }
        if let ElemTemplate::Identity = self {
            return Ok(GroupElement::identity(tag, places));
        }
        if tag != GroupTag::SL2 {
            return Err(format!("`{self}` is an SL2 element but the group is {tag}"));
        }
        let padic = places.iter().find_map(|v| match v {
            Place::Padic(p) => Some(*p),
            Place::Real => None,
        });
        let real = |m: [[f64; 2]; 2]| -> Result<GroupElement, String> {
            let m = Matrix::from_rows(vec![m[0].to_vec(), m[1].to_vec()]);
            let blocks = places
                .iter()
                .map(|v| match v {
                    Place::Real => MatBlock::Real(m.clone()),
                    Place::Padic(p) => padic_identity(*p),
                })
                .collect();
            GroupElement::new(tag, places.to_vec(), blocks).map_err(err)
        };
        match self {
            ElemTemplate::Diag(a) => {
                let x = arg(a)?.to_f64();
                real([[x.exp(), 0.0], [0.0, (-x).exp()]])
            }
            ElemTemplate::Rotation(a) => {
                let (s, c) = arg(a)?.to_f64().sin_cos();
                real([[c, -s], [s, c]])
            }
            ElemTemplate::Unipotent(a) => real([[1.0, arg(a)?.to_f64()], [0.0, 1.0]]),
            ElemTemplate::Lower(a) => real([[1.0, 0.0], [arg(a)?.to_f64(), 1.0]]),
            ElemTemplate::Hecke(a) => {
                let p = padic.ok_or("hecke elements need a p-adic place")?;
                let i = arg(a)?.to_i64().ok_or("hecke exponents are integers")?;
                let pi = BigRational::from_integer(num_bigint::BigInt::from(p).pow(i.unsigned_abs() as u32));
                let top = if i >= 0 { pi.recip() } else { pi.clone() };
                let m = Matrix::from_rows(vec![vec![top.clone(), BigRational::zero()], vec![BigRational::zero(), top.recip()]]);
                let blocks = places
                    .iter()
                    .map(|v| match v {
                        Place::Real => MatBlock::Real(Matrix::identity(2)),
                        Place::Padic(_) => MatBlock::embed(*v, &m),
                    })
                    .collect();
                GroupElement::new(tag, places.to_vec(), blocks).map_err(err)
            }
            ElemTemplate::Identity | ElemTemplate::Pair(..) => unreachable!(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for s in ["3", "-2/7", "0.5", "1e-5", "2.0", "4/2"] {
            let n: Num = s.parse().unwrap();
            assert_eq!(n.to_string().parse::<Num>().unwrap(), n);
        }
        assert_eq!("4/2".parse::<Num>().unwrap().to_string(), "2");
        assert!("inf".parse::<Num>().is_err());
        assert!("1/0".parse::<Num>().is_err());
    }

    #[test]
    fn grids() {
        let g: Grid = "linspace(-0.5, 0.5, 21)".parse().unwrap();
        let v = g.values();
        assert_eq!(v.len(), 21);
        assert_eq!(v[0].to_f64(), -0.5);
        assert_eq!(v[20].to_f64(), 0.5);
        assert_eq!(g.to_string().parse::<Grid>().unwrap(), g);
        assert!("".parse::<Grid>().is_err());
        assert!("linspace(0, 1, 0)".parse::<Grid>().is_err());
    }

    #[test]
    fn templates() {
        for s in ["e", "diag(t)", "(diag(t), e)", "hecke(t)", "rotation(1/2)", "(unipotent(0.25), lower(t))"] {
            let t: ElemTemplate = s.parse().unwrap();
            assert_eq!(t.to_string(), s);
        }
        assert!("shear(t)".parse::<ElemTemplate>().is_err());
        let g = "diag(t)".parse::<ElemTemplate>().unwrap().build(GroupTag::SL2, &[Place::Real], Some(&Num::Real(1.0))).unwrap();
        assert!((g.real_block().unwrap()[(0, 0)] - 1f64.exp()).abs() < 1e-15);
        let places = [Place::Real, Place::Padic(2)];
        let h = "hecke(t)".parse::<ElemTemplate>().unwrap();
        assert!(h.build(GroupTag::SL2, &places, Some(&"3".parse().unwrap())).is_ok());
        assert!(h.build(GroupTag::SL2, &[Place::Real], Some(&"3".parse().unwrap())).is_err());
        assert!(h.build(GroupTag::SL2, &places, Some(&"0.5".parse().unwrap())).is_err());
    }
}
