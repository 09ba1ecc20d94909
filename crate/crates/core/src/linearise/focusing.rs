use num_traits::ToPrimitive;
use serde::Serialize;

use super::{norm, real_part};
use crate::error::{Error, Result};
use crate::groups::{ad_matrix, SubgroupDescriptor};
use crate::qs_arith::Place;

/// Growth allowed over the initial value before a curve counts as unbounded.
pub const DEFAULT_FOCUS_FACTOR: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FocusingClass {
    /// The sequence lies in `O(1) Z_G(H)` at the Lie algebra level.
    O1Z,
    NotO1Z,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FocusingReport {
    pub class: FocusingClass,
    /// `max_X |Ad_{g_i} X|` over a basis of `Lie(H)`.
    pub curve: Vec<f64>,
    /// The same maximum at the identity.
    pub baseline: f64,
    pub factor: f64,
    /// Least-squares slope of `log curve` against `log |g_i|_op`.
    pub growth_exponent: Option<f64>,
}

/// Classifies `(g_i)` by boundedness of `Ad_{g_i}` on `Lie(H)` at the real place.
pub fn focusing_class_test(h: &SubgroupDescriptor, g_seq: &[crate::groups::GroupElement], factor: f64) -> Result<FocusingReport> {
    let ri = h
        .places
        .iter()
        .position(|&v| v == Place::Real)
        .ok_or_else(|| Error::invalid("focusing test needs the real place"))?;
    let basis: Vec<Vec<f64>> = h
        .lie
        .coords_at(ri)
        .iter()
        .map(|c| c.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect())
        .collect();
    let baseline = basis.iter().map(|x| norm(x)).fold(0.0, f64::max);
    let mut curve = Vec::with_capacity(g_seq.len());
    let mut op_norms = Vec::with_capacity(g_seq.len());
    for g in g_seq {
        if g.tag() != h.tag {
            return Err(Error::invalid("sequence and subgroup live in different groups"));
        }
        let m = real_part(g)?;
        let ad = ad_matrix(h.tag, m).ok_or_else(|| Error::invalid("singular translator"))?;
        curve.push(basis.iter().map(|x| norm(&ad.mul_vec(x))).fold(0.0, f64::max));
        op_norms.push(m.spectral_norm());
    }
    let bounded = curve.iter().all(|&c| c <= factor * baseline);
    Ok(FocusingReport {
        class: if bounded { FocusingClass::O1Z } else { FocusingClass::NotO1Z },
        growth_exponent: slope(&op_norms, &curve),
        curve,
        baseline,
        factor,
    })
}

fn slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 1.0 + 1e-9 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx < 1e-18 {
        return None;
    }
    Some(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}
