//! Monte-Carlo engine on `G / Gamma` for `SL2(R)`, `SL2(R) x SL2(R)` and
//! `SL2(R x Q_p)` with `Gamma = SL2(Z)`, `SL2(Z)^2` or `SL2(Z[1/p])`.
//!
//! A point `h Gamma` is recorded through the coset `Gamma h^-1`, i.e. by the
//! reduced image of `h^-1 . i` in the standard fundamental domain together
//! with a rotation angle. At a `p`-adic place the `SL2(Z_p)` component is
//! absorbed by strong approximation and only the Hecke leaf is kept.

mod experiment;
mod project;
mod reduce;
mod reference;
mod testfn;
mod window;

pub use experiment::{
    convergence_experiment, CheckVerdict, CsvRow, DistanceCheck, Expectation, ExperimentSpec, ConvergenceReport, StepReport,
    StrongConvergence,
};
pub use project::{translate_and_project, EmpiricalMeasure, Leaf};
pub use reduce::{reduce_fundamental, reduce_matrix, systole_of, Reduced, REDUCE_MAX_STEPS};
pub use reference::{haar_fundamental_sample, reference_limit_measure, LimitFormulaSpec, Y_CAP};
pub use testfn::{
    compare, haar_integrals, integrate, weak_distance, DistanceReport, Integrals, Probe, TestFn, TestFunctionDict,
};
pub use window::{sample_window, HPoint, OmegaWindow, Window, WindowSample, ZpMat};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::groups::GroupTag;
use crate::qs_arith::Place;

/// Samples per random stream; results do not depend on the worker count.
pub const CHUNK: usize = 4096;

/// Child seed for `(label, index)` under a master seed.
pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    h.update(index.to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(chunk);
    r
}

/// Runs `f(rng, count)` on fixed-size chunks of `0..n`, each with its own
/// ChaCha stream, and concatenates the results in chunk order.
pub(crate) fn par_chunks<T: Send>(n: usize, seed: u64, f: impl Fn(&mut ChaCha8Rng, usize) -> Result<Vec<T>> + Sync) -> Result<Vec<T>> {
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Result<Vec<T>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let count = CHUNK.min(n - c * CHUNK);
            f(&mut chunk_rng(seed, c as u64), count)
        })
        .collect();
    let mut out = Vec::with_capacity(n);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

/// The quotient a scenario lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct QuotientSpace {
    pub tag: GroupTag,
    pub prime: Option<u64>,
    /// `p`-adic digits carried by samples of `SL2(Z_p)`.
    pub depth: u32,
}

impl QuotientSpace {
    pub fn new(tag: GroupTag, places: &[Place]) -> Result<Self> {
        let prime = match places {
            [Place::Real] => None,
            [Place::Real, Place::Padic(p)] if tag == GroupTag::SL2 => Some(*p),
            _ => return Err(Error::unsupported(format!("quotient of {tag} over {places:?}"))),
        };
        if tag == GroupTag::SL3 {
            return Err(Error::unsupported("quotients of SL3"));
        }
        let depth = prime.map_or(0, |p| ((60.0 / (p as f64).log2()).floor() as u32).min(24));
        Ok(QuotientSpace { tag, prime, depth })
    }

    /// Number of real `SL2` factors.
    pub fn factors(&self) -> usize {
        match self.tag {
            GroupTag::SL2xSL2 => 2,
            _ => 1,
        }
    }

    pub fn places(&self) -> Vec<Place> {
        match self.prime {
            None => vec![Place::Real],
            Some(p) => vec![Place::Real, Place::Padic(p)],
        }
    }
}

/// Compensated sum, so totals of many small weights stay within `1e-15`.
pub(crate) fn fsum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = s + v;
        c += if s.abs() >= v.abs() { (s - t) + v } else { (v - t) + s };
        s = t;
    }
    s + c
}

/// Weighted mean and `3 sigma` half-width of `values` under normalised `weights`,
/// summed in index order.
pub(crate) fn weighted_mean(values: &[f64], weights: &[f64]) -> (f64, f64) {
    let mean = fsum(values.iter().zip(weights).map(|(v, w)| v * w));
    let var = fsum(values.iter().zip(weights).map(|(v, w)| w * w * (v - mean) * (v - mean)));
    (mean, 3.0 * var.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn seeds_differ_by_label_and_index() {
        let a = derive_seed(1, "s1", 0);
        assert_ne!(a, derive_seed(1, "s1", 1));
        assert_ne!(a, derive_seed(1, "s2", 0));
        assert_ne!(a, derive_seed(2, "s1", 0));
        assert_eq!(a, derive_seed(1, "s1", 0));
    }

    #[test]
    fn chunking_is_worker_independent() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| {
                par_chunks(10_000, 5, |rng, k| Ok((0..k).map(|_| rng.gen::<u64>()).collect())).unwrap()
            })
        };
        assert_eq!(run(1), run(4));
    }
}
