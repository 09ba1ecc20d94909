use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A place of `Q`: the archimedean one or a prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Place {
    Real,
    Padic(u64),
}

impl Place {
    pub fn padic(p: u64) -> Result<Place> {
        if is_prime(p) {
            Ok(Place::Padic(p))
        } else {
            Err(Error::invalid(format!("{p} is not prime")))
        }
    }

    pub fn prime(self) -> Option<u64> {
        match self {
            Place::Real => None,
            Place::Padic(p) => Some(p),
        }
    }

    pub fn is_archimedean(self) -> bool {
        matches!(self, Place::Real)
    }

    /// Parses `inf`, `R`, `Q7`, or a bare prime.
    pub fn parse(s: &str) -> Result<Place> {
        let t = s.trim();
        match t {
            "inf" | "R" | "oo" | "real" => Ok(Place::Real),
            _ => {
                let digits = t.strip_prefix('Q').unwrap_or(t);
                let p: u64 = digits
                    .parse()
                    .map_err(|_| Error::invalid(format!("cannot parse place {t:?}")))?;
                Place::padic(p)
            }
        }
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Real => write!(f, "inf"),
            Place::Padic(p) => write!(f, "Q{p}"),
        }
    }
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Checks that `places` is a valid ordered set `S`.
pub fn validate_places(places: &[Place]) -> Result<()> {
    if places.is_empty() {
        return Err(Error::invalid("S must contain at least one place"));
    }
    for (i, v) in places.iter().enumerate() {
        if let Place::Padic(p) = v {
            if !is_prime(*p) {
                return Err(Error::invalid(format!("{p} is not prime")));
            }
        }
        if places[..i].contains(v) {
            return Err(Error::invalid(format!("place {v} listed twice")));
        }
    }
    Ok(())
}

/// The finite primes of `S`, in order.
pub fn primes_of(places: &[Place]) -> Vec<u64> {
    places.iter().filter_map(|v| v.prime()).collect()
}
