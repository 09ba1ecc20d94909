//! Elements of `Q_p` with an exact-rational fast path.
//!
//! A value is either an exact rational, a truncated expansion
//! `p^v * u + O(p^(v + digits))` with `u` a unit, or a value known only to
//! vanish modulo some power of `p`. Exact values stay exact through
//! `+ - * /`; mixing with a truncated value truncates.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::Field;

pub const DEFAULT_PRECISION: u32 = 32;

#[derive(Clone, Debug)]
enum Repr {
    Exact(BigRational),
    /// `p^valuation * unit`, with `unit` in `[1, p^digits)` and prime to `p`.
    Approx {
        valuation: i64,
        unit: BigInt,
        digits: u32,
    },
    /// Congruent to zero modulo `p^absolute`, nothing more is known.
    Vanished { absolute: i64 },
}

#[derive(Clone, Debug)]
pub struct PadicScalar {
    prime: u64,
    precision: u32,
    repr: Repr,
}

fn pow_p(p: u64, n: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), n as usize)
}

/// Writes a nonzero integer as `p^v * m` with `m` prime to `p`.
fn split_p(n: &BigInt, p: u64) -> (i64, BigInt) {
    let pb = BigInt::from(p);
    let mut m = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return (v, m);
        }
        m = q;
        v += 1;
    }
}

pub(crate) fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.mod_floor(m).extended_gcd(m);
    debug_assert!(e.gcd.is_one(), "no inverse modulo {m}");
    e.x.mod_floor(m)
}

/// `p`-adic valuation of a rational, `None` for zero.
pub fn rational_valuation(q: &BigRational, p: u64) -> Option<i64> {
    if q.is_zero() {
        return None;
    }
    let (vn, _) = split_p(q.numer(), p);
    let (vd, _) = split_p(q.denom(), p);
    Some(vn - vd)
}

/// For nonzero `q = p^v * u`, returns `v` and `u mod p^digits`.
fn unit_residue(q: &BigRational, p: u64, digits: u32) -> (i64, BigInt) {
    let (vn, n) = split_p(q.numer(), p);
    let (vd, d) = split_p(q.denom(), p);
    let m = pow_p(p, digits);
    let r = (n * mod_inverse(&d, &m)).mod_floor(&m);
    (vn - vd, r)
}

/// Representative in `[0, p^a)` of a rational modulo `p^a Z_p`, as an element
/// of `Z[1/p]` (the truncated `p`-adic expansion). `q` must be `p`-integral
/// away from `p`, which every rational is.
pub fn truncate_mod_power(q: &BigRational, p: u64, a: i64) -> BigRational {
    let v = match rational_valuation(q, p) {
        None => return BigRational::zero(),
        Some(v) => v,
    };
    if v >= a {
        return BigRational::zero();
    }
    let (_, u) = unit_residue(q, p, (a - v) as u32);
    scale_by_power(&BigRational::from_integer(u), p, v)
}

pub(crate) fn scale_by_power(q: &BigRational, p: u64, e: i64) -> BigRational {
    let pe = BigRational::from_integer(pow_p(p, e.unsigned_abs() as u32));
    if e >= 0 {
        q * pe
    } else {
        q / pe
    }
}

impl PadicScalar {
    pub fn from_rational(p: u64, q: BigRational) -> Self {
        PadicScalar {
            prime: p,
            precision: DEFAULT_PRECISION,
            repr: Repr::Exact(q),
        }
    }

    pub fn from_int(p: u64, n: i64) -> Self {
        Self::from_rational(p, BigRational::from_integer(n.into()))
    }

    pub fn from_ratio(p: u64, n: i64, d: i64) -> Self {
        Self::from_rational(p, BigRational::new(n.into(), d.into()))
    }

    pub fn zero(p: u64) -> Self {
        Self::from_int(p, 0)
    }

    pub fn one(p: u64) -> Self {
        Self::from_int(p, 1)
    }

    /// `p^valuation * sum digits[i] p^i + O(p^(valuation + digits.len()))`.
    pub fn from_digits(p: u64, valuation: i64, digits: &[u32]) -> Self {
        let n = digits.len() as u32;
        let mut unit = BigInt::zero();
        for &d in digits.iter().rev() {
            unit = unit * BigInt::from(p) + BigInt::from(d % p as u32);
        }
        let repr = if unit.is_zero() {
            Repr::Vanished {
                absolute: valuation + n as i64,
            }
        } else {
            let (w, u) = split_p(&unit, p);
            Repr::Approx {
                valuation: valuation + w,
                unit: u,
                digits: n - w as u32,
            }
        };
        PadicScalar {
            prime: p,
            precision: n.max(1),
            repr,
        }
    }

    pub fn with_precision(mut self, precision: u32) -> Self {
        assert!(precision > 0, "precision must be positive");
        self.precision = precision;
        self
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.repr, Repr::Exact(_))
    }

    /// Exactly zero (not merely zero to the current precision).
    pub fn is_zero(&self) -> bool {
        matches!(&self.repr, Repr::Exact(q) if q.is_zero())
    }

    pub fn is_vanished(&self) -> bool {
        matches!(self.repr, Repr::Vanished { .. })
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match &self.repr {
            Repr::Exact(q) => Some(q),
            _ => None,
        }
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        self.as_rational().cloned()
    }

    /// Valuation; `None` for zero or for a value that vanished.
    pub fn valuation(&self) -> Option<i64> {
        match &self.repr {
            Repr::Exact(q) => rational_valuation(q, self.prime),
            Repr::Approx { valuation, .. } => Some(*valuation),
            Repr::Vanished { .. } => None,
        }
    }

    /// Relative precision in digits; `None` when exact.
    pub fn relative_precision(&self) -> Option<u32> {
        match &self.repr {
            Repr::Exact(_) => None,
            Repr::Approx { digits, .. } => Some(*digits),
            Repr::Vanished { .. } => Some(0),
        }
    }

    fn absolute_precision(&self) -> Option<i64> {
        match &self.repr {
            Repr::Exact(_) => None,
            Repr::Approx {
                valuation, digits, ..
            } => Some(valuation + *digits as i64),
            Repr::Vanished { absolute } => Some(*absolute),
        }
    }

    /// A lower bound for the valuation, `None` standing for `+inf`.
    fn valuation_floor(&self) -> Option<i64> {
        match &self.repr {
            Repr::Vanished { absolute } => Some(*absolute),
            _ => self.valuation(),
        }
    }

    /// `|x|_p = p^(-v)`, normalised so that `|p|_p = 1/p`.
    pub fn abs(&self) -> Result<f64> {
        match &self.repr {
            Repr::Vanished { absolute } => Err(Error::PrecisionLoss(format!(
                "value is O({}^{absolute}) with no significant digits",
                self.prime
            ))),
            _ => Ok(match self.valuation() {
                None => 0.0,
                Some(v) => (self.prime as f64).powi(-(v as i32)),
            }),
        }
    }

    /// `|x|_p` as an exact rational.
    pub fn abs_rational(&self) -> Result<BigRational> {
        self.abs()?;
        Ok(match self.valuation() {
            None => BigRational::zero(),
            Some(v) => scale_by_power(&BigRational::one(), self.prime, -v),
        })
    }

    /// The first `precision` base-`p` digits of the unit part, least significant first.
    pub fn unit_digits(&self) -> Vec<u32> {
        let (n, unit) = match &self.repr {
            Repr::Exact(q) if q.is_zero() => return Vec::new(),
            Repr::Exact(q) => (self.precision, unit_residue(q, self.prime, self.precision).1),
            Repr::Approx { unit, digits, .. } => (*digits, unit.clone()),
            Repr::Vanished { .. } => return Vec::new(),
        };
        let pb = BigInt::from(self.prime);
        let mut u = unit;
        (0..n)
            .map(|_| {
                let (q, r) = u.div_rem(&pb);
                u = q;
                r.to_u32().unwrap()
            })
            .collect()
    }

    /// Truncates an exact value to `digits` relative digits.
    pub fn to_approx(&self, digits: u32) -> Self {
        let repr = match &self.repr {
            Repr::Exact(q) if q.is_zero() => Repr::Exact(q.clone()),
            Repr::Exact(q) => {
                let (v, u) = unit_residue(q, self.prime, digits);
                Repr::Approx {
                    valuation: v,
                    unit: u,
                    digits,
                }
            }
            other => other.clone(),
        };
        PadicScalar {
            prime: self.prime,
            precision: self.precision,
            repr,
        }
    }

    /// `(self / p^vmin) mod p^(n - vmin)`; requires the valuation to be at least `vmin`.
    fn shifted_residue(&self, vmin: i64, n: i64) -> BigInt {
        let p = self.prime;
        let m = pow_p(p, (n - vmin) as u32);
        match &self.repr {
            Repr::Exact(q) => match rational_valuation(q, p) {
                None => BigInt::zero(),
                Some(v) if v >= n => BigInt::zero(),
                Some(v) => {
                    let (_, u) = unit_residue(q, p, (n - v) as u32);
                    (u * pow_p(p, (v - vmin) as u32)).mod_floor(&m)
                }
            },
            Repr::Approx {
                valuation, unit, ..
            } => {
                if *valuation >= n {
                    BigInt::zero()
                } else {
                    (unit * pow_p(p, (valuation - vmin) as u32)).mod_floor(&m)
                }
            }
            Repr::Vanished { .. } => BigInt::zero(),
        }
    }

    fn check_prime(&self, other: &Self) {
        assert_eq!(self.prime, other.prime, "mixing scalars of different primes");
    }

    fn build(&self, other: &Self, repr: Repr) -> Self {
        PadicScalar {
            prime: self.prime,
            precision: self.precision.min(other.precision),
            repr,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_prime(other);
        if let (Repr::Exact(a), Repr::Exact(b)) = (&self.repr, &other.repr) {
            return self.build(other, Repr::Exact(a + b));
        }
        let n = match (self.absolute_precision(), other.absolute_precision()) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => unreachable!(),
        };
        let vmin = [self.valuation_floor(), other.valuation_floor()]
            .into_iter()
            .flatten()
            .min()
            .unwrap_or(n);
        if vmin >= n {
            return self.build(other, Repr::Vanished { absolute: n });
        }
        let m = pow_p(self.prime, (n - vmin) as u32);
        let s = (self.shifted_residue(vmin, n) + other.shifted_residue(vmin, n)).mod_floor(&m);
        if s.is_zero() {
            return self.build(other, Repr::Vanished { absolute: n });
        }
        let (w, u) = split_p(&s, self.prime);
        let v = vmin + w;
        self.build(
            other,
            Repr::Approx {
                valuation: v,
                unit: u,
                digits: (n - v) as u32,
            },
        )
    }

    pub fn neg(&self) -> Self {
        let repr = match &self.repr {
            Repr::Exact(q) => Repr::Exact(-q),
            Repr::Approx {
                valuation,
                unit,
                digits,
            } => {
                let m = pow_p(self.prime, *digits);
                Repr::Approx {
                    valuation: *valuation,
                    unit: (&m - unit).mod_floor(&m),
                    digits: *digits,
                }
            }
            Repr::Vanished { absolute } => Repr::Vanished {
                absolute: *absolute,
            },
        };
        PadicScalar {
            prime: self.prime,
            precision: self.precision,
            repr,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_prime(other);
        let p = self.prime;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Exact(a), Repr::Exact(b)) => Repr::Exact(a * b),
            (Repr::Exact(z), _) | (_, Repr::Exact(z)) if z.is_zero() => Repr::Exact(z.clone()),
            (Repr::Vanished { absolute: a }, Repr::Vanished { absolute: b }) => {
                Repr::Vanished { absolute: a + b }
            }
            (Repr::Vanished { absolute }, x) | (x, Repr::Vanished { absolute }) => {
                let v = match x {
                    Repr::Exact(q) => rational_valuation(q, p).unwrap(),
                    Repr::Approx { valuation, .. } => *valuation,
                    Repr::Vanished { .. } => unreachable!(),
                };
                Repr::Vanished {
                    absolute: absolute + v,
                }
            }
            (
                Repr::Approx {
                    valuation,
                    unit,
                    digits,
                },
                Repr::Exact(q),
            )
            | (
                Repr::Exact(q),
                Repr::Approx {
                    valuation,
                    unit,
                    digits,
                },
            ) => {
                let (vq, uq) = unit_residue(q, p, *digits);
                Repr::Approx {
                    valuation: valuation + vq,
                    unit: (unit * uq).mod_floor(&pow_p(p, *digits)),
                    digits: *digits,
                }
            }
            (
                Repr::Approx {
                    valuation: va,
                    unit: ua,
                    digits: da,
                },
                Repr::Approx {
                    valuation: vb,
                    unit: ub,
                    digits: db,
                },
            ) => {
                let d = (*da).min(*db);
                Repr::Approx {
                    valuation: va + vb,
                    unit: (ua * ub).mod_floor(&pow_p(p, d)),
                    digits: d,
                }
            }
        };
        self.build(other, repr)
    }

    pub fn inv(&self) -> Option<Self> {
        let repr = match &self.repr {
            Repr::Exact(q) if q.is_zero() => return None,
            Repr::Exact(q) => Repr::Exact(q.recip()),
            Repr::Approx {
                valuation,
                unit,
                digits,
            } => Repr::Approx {
                valuation: -valuation,
                unit: mod_inverse(unit, &pow_p(self.prime, *digits)),
                digits: *digits,
            },
            Repr::Vanished { .. } => return None,
        };
        Some(PadicScalar {
            prime: self.prime,
            precision: self.precision,
            repr,
        })
    }

    pub fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|i| self.mul(&i))
    }

    fn checked(self) -> Result<Self> {
        match self.relative_precision() {
            Some(d) if d < self.precision => Err(Error::PrecisionLoss(format!(
                "{d} significant digits left, {} required",
                self.precision
            ))),
            _ => Ok(self),
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.add(other).checked()
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.sub(other).checked()
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.mul(other).checked()
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        match other.inv() {
            Some(i) => self.mul(&i).checked(),
            None => Err(Error::PrecisionLoss("division by a vanishing value".into())),
        }
    }
}

impl PartialEq for PadicScalar {
    fn eq(&self, other: &Self) -> bool {
        if self.prime != other.prime {
            return false;
        }
        match (&self.repr, &other.repr) {
            (Repr::Exact(a), Repr::Exact(b)) => a == b,
            _ => {
                let d = self.sub(other);
                d.is_zero() || d.is_vanished()
            }
        }
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Exact(q) => write!(f, "{q}"),
            Repr::Approx {
                valuation, digits, ..
            } => {
                let ds: Vec<String> = self.unit_digits().iter().map(u32::to_string).collect();
                write!(
                    f,
                    "{}^{} * [{}] + O({}^{})",
                    self.prime,
                    valuation,
                    ds.join(","),
                    self.prime,
                    valuation + *digits as i64
                )
            }
            Repr::Vanished { absolute } => write!(f, "O({}^{absolute})", self.prime),
        }
    }
}

impl Field for PadicScalar {
    fn zero_like(&self) -> Self {
        PadicScalar::zero(self.prime).with_precision(self.precision)
    }
    fn one_like(&self) -> Self {
        PadicScalar::one(self.prime).with_precision(self.precision)
    }
    fn from_i64_like(&self, n: i64) -> Self {
        PadicScalar::from_int(self.prime, n).with_precision(self.precision)
    }
    fn from_rational_like(&self, q: &BigRational) -> Self {
        PadicScalar::from_rational(self.prime, q.clone()).with_precision(self.precision)
    }
    fn add(&self, other: &Self) -> Self {
        PadicScalar::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        PadicScalar::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        PadicScalar::mul(self, other)
    }
    fn neg(&self) -> Self {
        PadicScalar::neg(self)
    }
    fn inv(&self) -> Option<Self> {
        PadicScalar::inv(self)
    }
    fn magnitude(&self) -> f64 {
        self.abs().unwrap_or(0.0)
    }
    fn is_negligible(&self, _tol: f64) -> bool {
        self.is_zero() || self.is_vanished()
    }
    fn is_exact_field() -> bool {
        true
    }
}

/// `|q|_p` for a rational, exactly.
pub fn rational_abs(q: &BigRational, p: u64) -> BigRational {
    match rational_valuation(q, p) {
        None => BigRational::zero(),
        Some(v) => scale_by_power(&BigRational::one(), p, -v),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valuation_and_abs() {
        assert_eq!(PadicScalar::from_int(5, 5).abs().unwrap(), 0.2);
        assert_eq!(PadicScalar::from_ratio(5, 1, 25).abs().unwrap(), 25.0);
        assert_eq!(PadicScalar::zero(7).abs().unwrap(), 0.0);
    }

    #[test]
    fn digits_of_minus_one() {
        let x = PadicScalar::from_int(2, -1).with_precision(5);
        assert_eq!(x.unit_digits(), vec![1, 1, 1, 1, 1]);
    }

    #[test]
    fn approx_arithmetic_matches_exact() {
        let a = PadicScalar::from_ratio(3, 7, 5);
        let b = PadicScalar::from_ratio(3, -2, 9);
        let aa = a.to_approx(20);
        let bb = b.to_approx(20);
        assert_eq!(aa.mul(&bb), a.mul(&b));
        assert_eq!(aa.add(&bb), a.add(&b));
        assert_eq!(aa.div(&bb).unwrap(), a.div(&b).unwrap());
    }

    #[test]
    fn cancellation_reports_precision_loss() {
        let a = PadicScalar::from_int(2, 1).to_approx(8).with_precision(8);
        let b = PadicScalar::from_int(2, 1 + 256).to_approx(8);
        // 1 and 257 agree to 8 binary digits, so the difference vanishes.
        let d = a.sub(&b);
        assert!(d.is_vanished());
        assert!(d.abs().is_err());
        assert!(matches!(a.checked_sub(&b), Err(Error::PrecisionLoss(_))));
    }

    #[test]
    fn truncation_mod_power() {
        // 1/3 = ...0101011 in Q_2; mod 2^3 it is 011 = 3.
        let q = BigRational::new(1.into(), 3.into());
        assert_eq!(truncate_mod_power(&q, 2, 3), BigRational::from_integer(3.into()));
        // 1/2 mod 1 is 1/2.
        let h = BigRational::new(1.into(), 2.into());
        assert_eq!(truncate_mod_power(&h, 2, 0), h);
    }
}
