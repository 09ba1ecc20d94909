use serde::{Deserialize, Serialize};

use super::{lattice_invariants, ZSLattice};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TightnessFlag {
    Bounded,
    Escaping,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightnessRow {
    pub label: String,
    /// Mass with systole below each threshold (nondecreasing in the threshold).
    pub mass_below: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightnessProfile {
    pub thresholds: Vec<f64>,
    pub rows: Vec<TightnessRow>,
    /// Per threshold, the largest mass over the family.
    pub sup_mass: Vec<f64>,
    pub flag: TightnessFlag,
}

impl TightnessProfile {
    /// Profile of a family of weighted systole samples. The family counts as
    /// escaping when, at every threshold, some member has more than
    /// `escape_mass` below it.
    pub fn from_samples(thresholds: &[f64], members: &[(String, Vec<f64>, Vec<f64>)], escape_mass: f64) -> Self {
        let rows: Vec<TightnessRow> = members
            .iter()
            .map(|(label, systoles, weights)| TightnessRow {
                label: label.clone(),
                mass_below: thresholds
                    .iter()
                    .map(|&e| {
                        systoles
                            .iter()
                            .zip(weights)
                            .filter(|(s, _)| **s < e)
                            .map(|(_, w)| w)
                            .sum()
                    })
                    .collect(),
            })
            .collect();
        let sup_mass: Vec<f64> = (0..thresholds.len())
            .map(|i| rows.iter().map(|r| r.mass_below[i]).fold(0.0, f64::max))
            .collect();
        let flag = if thresholds.is_empty() {
            TightnessFlag::Undetermined
        } else if sup_mass.iter().all(|&m| m > escape_mass) {
            TightnessFlag::Escaping
        } else {
            TightnessFlag::Bounded
        };
        TightnessProfile {
            thresholds: thresholds.to_vec(),
            rows,
            sup_mass,
            flag,
        }
    }
}

/// Mahler diagnostic for a family of lattices: the indicator `systole < e`
/// per member and threshold.
pub fn mahler_tightness_diagnostic(family: &[ZSLattice], thresholds: &[f64]) -> Result<TightnessProfile> {
    if family.is_empty() {
        return Err(Error::invalid("lattice family must be nonempty"));
    }
    let members = family
        .iter()
        .enumerate()
        .map(|(i, l)| Ok((format!("member {i}"), vec![lattice_invariants(l)?.systole], vec![1.0])))
        .collect::<Result<Vec<_>>>()?;
    Ok(TightnessProfile::from_samples(thresholds, &members, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn diag_lattice(t: f64) -> ZSLattice {
        ZSLattice::from_real(Matrix::from_rows(vec![vec![t.exp(), 0.0], vec![0.0, (-t).exp()]])).unwrap()
    }

    #[test]
    fn standard_lattice_is_bounded() {
        let p = mahler_tightness_diagnostic(&[diag_lattice(0.0)], &[0.5]).unwrap();
        assert_eq!(p.sup_mass, vec![0.0]);
        assert_eq!(p.flag, TightnessFlag::Bounded);
    }

    #[test]
    fn diagonal_flow_escapes() {
        let fam: Vec<_> = (1..=5).map(|t| diag_lattice(t as f64)).collect();
        let p = mahler_tightness_diagnostic(&fam, &[0.1]).unwrap();
        assert_eq!(p.flag, TightnessFlag::Escaping);
        let below: Vec<f64> = p.rows.iter().map(|r| r.mass_below[0]).collect();
        assert_eq!(below, vec![0.0, 0.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn no_thresholds() {
        let p = mahler_tightness_diagnostic(&[diag_lattice(0.0)], &[]).unwrap();
        assert!(p.sup_mass.is_empty());
        assert_eq!(p.flag, TightnessFlag::Undetermined);
    }
}
