use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{lie_basis, GroupTag, LieSpan};
use crate::error::{Error, Result};
use crate::linalg::{rational, Matrix};
use crate::qs_arith::{Place, is_prime};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FactorKind {
    Trivial,
    Rotation,
    DiagonalTorus,
    UnipotentUpper,
    FullSL,
    CompactPadic,
    DiagonalEmbedding(Box<FactorKind>),
    Product(Vec<FactorKind>),
    /// Given only by its Lie algebra.
    LieSpan,
}

/// A subgroup of `G(Q_S)` from the catalogue, or a conjugate of one.
#[derive(Clone, Debug, PartialEq)]
pub struct SubgroupDescriptor {
    pub id: String,
    pub tag: GroupTag,
    pub places: Vec<Place>,
    pub factors: Vec<FactorKind>,
    pub lie: LieSpan,
    /// Nilpotent elements of the Lie algebra at each place (root vectors).
    pub nilpotents: Vec<Vec<Matrix<BigRational>>>,
    /// Defined over `Q`.
    pub rational: bool,
    pub compact: bool,
    /// `[L(Q_S) : L‡]` when the subgroup is in the Ratner class.
    pub dagger_index: Option<u64>,
}

impl SubgroupDescriptor {
    /// A subgroup given by a rational Lie span; nilpotent basis vectors are
    /// taken as its nilpotent generators.
    pub fn from_span(id: &str, lie: LieSpan, rational: bool, compact: bool) -> Result<Self> {
        if !lie.is_closed_under_bracket() {
            return Err(Error::invalid(format!("{id}: span is not a Lie subalgebra")));
        }
        let n = lie.tag().matrix_size() as u32;
        let nilpotents = (0..lie.places().len())
            .map(|i| lie.basis_at(i).into_iter().filter(|x| x.pow(n).data().iter().all(Zero::is_zero)).collect())
            .collect();
        Ok(SubgroupDescriptor {
            id: id.to_string(),
            tag: lie.tag(),
            places: lie.places().to_vec(),
            factors: vec![FactorKind::LieSpan; lie.places().len()],
            lie,
            nilpotents,
            rational,
            compact,
            dagger_index: None,
        })
    }

    /// The conjugate `g L g^-1` by a rational element.
    pub fn conjugate(&self, g: &Matrix<BigRational>) -> Result<Self> {
        let gi = g.inverse().ok_or_else(|| Error::invalid("conjugating matrix is singular"))?;
        let mut out = self.clone();
        out.id = format!("{}^g", self.id);
        out.lie = self.lie.conjugate(g)?;
        out.nilpotents = self
            .nilpotents
            .iter()
            .map(|ns| ns.iter().map(|x| g.mul(x).mul(&gi)).collect())
            .collect();
        Ok(out)
    }

    pub fn dim(&self) -> Vec<usize> {
        self.lie.dims()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RatnerWitness {
    /// Nilpotent elements whose generated subalgebra is `Lie(L)`, per place.
    Nilpotents(Vec<Vec<Matrix<BigRational>>>),
    EmptyNilpotentCone { place: Place },
    /// A direction of `Lie(L)` outside the subalgebra generated by nilpotents.
    CharacterDirection { place: Place, direction: Matrix<BigRational> },
    NotDefinedOverQ,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatnerVerdict {
    pub in_class: bool,
    pub witness: RatnerWitness,
}

/// Whether `L` is generated by unipotents up to Zariski closure over `Q`,
/// decided at the Lie algebra level from the stored nilpotent elements.
pub fn ratner_class_test(l: &SubgroupDescriptor) -> RatnerVerdict {
    let n = l.tag.matrix_size() as u32;
    for (i, ns) in l.nilpotents.iter().enumerate() {
        debug_assert!(ns.iter().all(|x| l.lie.contains(i, x) && x.pow(n).data().iter().all(Zero::is_zero)));
    }
    for (i, &v) in l.places.iter().enumerate() {
        let gen = LieSpan::generated(l.tag, &[v], &[l.nilpotents[i].clone()]).expect("nilpotents lie in Lie(G)");
        if gen.dims()[0] == l.lie.dims()[i] {
            continue;
        }
        if gen.is_zero() {
            return RatnerVerdict {
                in_class: false,
                witness: RatnerWitness::EmptyNilpotentCone { place: v },
            };
        }
        let direction = l
            .lie
            .basis_at(i)
            .into_iter()
            .find(|x| !gen.contains(0, x))
            .expect("dimensions differ");
        return RatnerVerdict {
            in_class: false,
            witness: RatnerWitness::CharacterDirection { place: v, direction },
        };
    }
    if !l.rational {
        return RatnerVerdict {
            in_class: false,
            witness: RatnerWitness::NotDefinedOverQ,
        };
    }
    RatnerVerdict {
        in_class: true,
        witness: RatnerWitness::Nilpotents(l.nilpotents.clone()),
    }
}

fn q(n: i64) -> BigRational {
    rational(n, 1)
}

fn m2(a: i64, b: i64, c: i64, d: i64) -> Matrix<BigRational> {
    Matrix::from_rows(vec![vec![q(a), q(b)], vec![q(c), q(d)]])
}

fn e3(i: usize, j: usize) -> Matrix<BigRational> {
    let mut m = Matrix::zeros_like(3, 3, &q(0));
    m[(i, j)] = q(1);
    m
}

fn in_factor(k: usize, x: &Matrix<BigRational>) -> Matrix<BigRational> {
    let mut m = Matrix::zeros_like(4, 4, &q(0));
    for i in 0..2 {
        for j in 0..2 {
            m[(2 * k + i, 2 * k + j)] = x[(i, j)].clone();
        }
    }
    m
}

fn diag_pair(x: &Matrix<BigRational>) -> Matrix<BigRational> {
    in_factor(0, x).add(&in_factor(1, x))
}

struct Entry {
    tag: GroupTag,
    places: Vec<Place>,
    factors: Vec<FactorKind>,
    lie: Vec<Vec<Matrix<BigRational>>>,
    nilpotents: Vec<Vec<Matrix<BigRational>>>,
    rational: bool,
    compact: bool,
    dagger_index: Option<u64>,
}

impl Entry {
    fn real(tag: GroupTag, factor: FactorKind, lie: Vec<Matrix<BigRational>>, nilp: Vec<Matrix<BigRational>>) -> Self {
        Entry {
            tag,
            places: vec![Place::Real],
            factors: vec![factor],
            lie: vec![lie],
            nilpotents: vec![nilp],
            rational: true,
            compact: false,
            dagger_index: None,
        }
    }

    fn compact(mut self) -> Self {
        self.compact = true;
        self
    }

    fn dagger(mut self, index: u64) -> Self {
        self.dagger_index = Some(index);
        self
    }
}

pub fn catalogue_ids() -> Vec<String> {
    let mut ids: Vec<String> = [
        "sl2R.rotation",
        "sl2R.torus",
        "sl2R.unipotent",
        "sl2R.borel",
        "sl2R.full",
        "sl2R.trivial",
        "sl2Q2.compact",
        "sl2Q3.compact",
        "sl2Q5.compact",
        "sl2Q2.full",
        "sl2Q2.unipotent",
        "sl2xsl2.diag_rotation",
        "sl2xsl2.first_factor",
        "sl2xsl2.second_factor",
        "sl2xsl2.full",
        "sl3R.full",
        "sl3R.torus",
        "sl3R.so3",
        "sl3R.heisenberg",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    ids.sort();
    ids
}

/// Look up a catalogue subgroup. `sl2Q{p}.compact` accepts any prime `p`;
/// `sl2Qp.compact` means `p = 2`.
pub fn catalogue(id: &str) -> Result<SubgroupDescriptor> {
    let unknown = || Error::UnknownSubgroup(id.to_string());
    let (e, h, f) = (m2(0, 1, 0, 0), m2(1, 0, 0, -1), m2(0, 0, 1, 0));
    let k = m2(0, 1, -1, 0);
    let entry = match id {
        "sl2R.rotation" => Entry::real(GroupTag::SL2, FactorKind::Rotation, vec![k], vec![]).compact(),
        "sl2R.torus" => Entry::real(GroupTag::SL2, FactorKind::DiagonalTorus, vec![h], vec![]),
        "sl2R.unipotent" => {
            Entry::real(GroupTag::SL2, FactorKind::UnipotentUpper, vec![e.clone()], vec![e]).dagger(1)
        }
        "sl2R.borel" => Entry::real(GroupTag::SL2, FactorKind::LieSpan, vec![e.clone(), h], vec![e]),
        "sl2R.full" => Entry::real(GroupTag::SL2, FactorKind::FullSL, lie_basis(GroupTag::SL2), vec![e, f]).dagger(1),
        "sl2R.trivial" => Entry::real(GroupTag::SL2, FactorKind::Trivial, vec![], vec![]).compact().dagger(1),
        "sl2Q2.full" | "sl2Q2.unipotent" => {
            let (kind, lie, nilp) = if id.ends_with("full") {
                (FactorKind::FullSL, lie_basis(GroupTag::SL2), vec![e, f])
            } else {
                (FactorKind::UnipotentUpper, vec![e.clone()], vec![e])
            };
            Entry {
                tag: GroupTag::SL2,
                places: vec![Place::Real, Place::Padic(2)],
                factors: vec![kind.clone(), kind],
                lie: vec![lie.clone(), lie],
                nilpotents: vec![nilp.clone(), nilp],
                rational: true,
                compact: false,
                dagger_index: Some(1),
            }
        }
        "sl2xsl2.diag_rotation" => Entry::real(
            GroupTag::SL2xSL2,
            FactorKind::DiagonalEmbedding(Box::new(FactorKind::Rotation)),
            vec![diag_pair(&k)],
            vec![],
        )
        .compact(),
        "sl2xsl2.first_factor" | "sl2xsl2.second_factor" => {
            let i = usize::from(id.ends_with("second_factor"));
            let mut kinds = vec![FactorKind::Trivial, FactorKind::Trivial];
            kinds[i] = FactorKind::FullSL;
            Entry::real(
                GroupTag::SL2xSL2,
                FactorKind::Product(kinds),
                lie_basis(GroupTag::SL2).iter().map(|x| in_factor(i, x)).collect(),
                vec![in_factor(i, &e), in_factor(i, &f)],
            )
            .dagger(1)
        }
        "sl2xsl2.full" => Entry::real(
            GroupTag::SL2xSL2,
            FactorKind::Product(vec![FactorKind::FullSL, FactorKind::FullSL]),
            lie_basis(GroupTag::SL2xSL2),
            vec![in_factor(0, &e), in_factor(0, &f), in_factor(1, &e), in_factor(1, &f)],
        )
        .dagger(1),
        "sl3R.full" => Entry::real(
            GroupTag::SL3,
            FactorKind::FullSL,
            lie_basis(GroupTag::SL3),
            [(0, 1), (0, 2), (1, 2), (1, 0), (2, 0), (2, 1)].iter().map(|&(i, j)| e3(i, j)).collect(),
        )
        .dagger(1),
        "sl3R.torus" => Entry::real(
            GroupTag::SL3,
            FactorKind::DiagonalTorus,
            vec![e3(0, 0).sub(&e3(1, 1)), e3(1, 1).sub(&e3(2, 2))],
            vec![],
        ),
        "sl3R.so3" => Entry::real(
            GroupTag::SL3,
            FactorKind::Rotation,
            [(0, 1), (0, 2), (1, 2)].iter().map(|&(i, j)| e3(i, j).sub(&e3(j, i))).collect(),
            vec![],
        )
        .compact(),
        "sl3R.heisenberg" => {
            let n: Vec<_> = [(0, 1), (0, 2), (1, 2)].iter().map(|&(i, j)| e3(i, j)).collect();
            Entry::real(GroupTag::SL3, FactorKind::UnipotentUpper, n.clone(), n).dagger(1)
        }
        _ => {
            let p = id
                .strip_prefix("sl2Q")
                .and_then(|r| r.strip_suffix(".compact"))
                .ok_or_else(unknown)?;
            let p = if p == "p" { 2 } else { p.parse::<u64>().map_err(|_| unknown())? };
            if !is_prime(p) {
                return Err(unknown());
            }
            Entry {
                tag: GroupTag::SL2,
                places: vec![Place::Real, Place::Padic(p)],
                factors: vec![FactorKind::Trivial, FactorKind::CompactPadic],
                lie: vec![vec![], lie_basis(GroupTag::SL2)],
                nilpotents: vec![vec![], vec![e, f]],
                rational: false,
                compact: true,
                dagger_index: None,
            }
        }
    };
    Ok(SubgroupDescriptor {
        id: id.to_string(),
        tag: entry.tag,
        lie: LieSpan::new(entry.tag, entry.places.clone(), entry.lie)?,
        places: entry.places,
        factors: entry.factors,
        nilpotents: entry.nilpotents,
        rational: entry.rational,
        compact: entry.compact,
        dagger_index: entry.dagger_index,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{centralizer_algebra, h_invariant_core, normalizer_algebra};

    #[test]
    fn every_entry_is_a_subalgebra() {
        for id in catalogue_ids() {
            let d = catalogue(&id).unwrap();
            assert!(d.lie.is_closed_under_bracket(), "{id}");
            for (i, ns) in d.nilpotents.iter().enumerate() {
                assert!(ns.iter().all(|x| d.lie.contains(i, x)), "{id}");
            }
        }
        assert!(matches!(catalogue("sl2R.nope"), Err(Error::UnknownSubgroup(_))));
        assert!(matches!(catalogue("sl2Q4.compact"), Err(Error::UnknownSubgroup(_))));
        assert_eq!(catalogue("sl2Qp.compact").unwrap().places[1], Place::Padic(2));
    }

    #[test]
    fn centralizers() {
        let z = centralizer_algebra(&catalogue("sl2R.rotation").unwrap());
        assert_eq!(z.basis_at(0), vec![m2(0, 1, -1, 0)]);
        let z = centralizer_algebra(&catalogue("sl2R.torus").unwrap());
        assert_eq!(z.basis_at(0), vec![m2(1, 0, 0, -1)]);
        assert!(centralizer_algebra(&catalogue("sl2R.full").unwrap()).is_zero());
        // Trivial H centralises everything.
        assert_eq!(centralizer_algebra(&catalogue("sl2R.trivial").unwrap()).dims(), vec![3]);
    }

    #[test]
    fn invariant_cores() {
        let h = catalogue("sl2xsl2.diag_rotation").unwrap();
        let l = catalogue("sl2xsl2.first_factor").unwrap();
        assert_eq!(h_invariant_core(&h, &l).unwrap(), l.lie);
        let h = catalogue("sl2R.rotation").unwrap();
        assert!(h_invariant_core(&h, &catalogue("sl2R.unipotent").unwrap()).unwrap().is_zero());
        let full = catalogue("sl2R.full").unwrap();
        assert_eq!(h_invariant_core(&h, &full).unwrap(), full.lie);
        // The torus normalises the Borel.
        let b = catalogue("sl2R.borel").unwrap();
        assert_eq!(h_invariant_core(&catalogue("sl2R.torus").unwrap(), &b).unwrap(), b.lie);
        assert!(h_invariant_core(&h, &catalogue("sl2xsl2.full").unwrap()).is_err());
    }

    #[test]
    fn normalizers() {
        let b = catalogue("sl2R.borel").unwrap();
        assert_eq!(normalizer_algebra(&catalogue("sl2R.unipotent").unwrap()), b.lie);
        assert_eq!(normalizer_algebra(&catalogue("sl2R.torus").unwrap()).dims(), vec![1]);
        assert_eq!(normalizer_algebra(&catalogue("sl2xsl2.first_factor").unwrap()).dims(), vec![6]);
    }

    #[test]
    fn ratner_verdicts() {
        let v = ratner_class_test(&catalogue("sl2R.full").unwrap());
        assert!(v.in_class);
        assert_eq!(v.witness, RatnerWitness::Nilpotents(vec![vec![m2(0, 1, 0, 0), m2(0, 0, 1, 0)]]));
        assert!(ratner_class_test(&catalogue("sl2R.unipotent").unwrap()).in_class);
        assert_eq!(
            ratner_class_test(&catalogue("sl2R.torus").unwrap()).witness,
            RatnerWitness::EmptyNilpotentCone { place: Place::Real }
        );
        assert_eq!(
            ratner_class_test(&catalogue("sl2R.borel").unwrap()).witness,
            RatnerWitness::CharacterDirection {
                place: Place::Real,
                direction: m2(1, 0, 0, -1)
            }
        );
        assert!(!ratner_class_test(&catalogue("sl2Q2.compact").unwrap()).in_class);
        for id in ["sl2R.trivial", "sl2Q2.full", "sl2xsl2.first_factor", "sl3R.full", "sl3R.heisenberg"] {
            assert!(ratner_class_test(&catalogue(id).unwrap()).in_class, "{id}");
        }
        for id in ["sl2R.rotation", "sl2xsl2.diag_rotation", "sl3R.so3", "sl3R.torus"] {
            assert!(!ratner_class_test(&catalogue(id).unwrap()).in_class, "{id}");
        }
    }

    #[test]
    fn from_span_detects_nilpotents() {
        let lie = LieSpan::uniform(GroupTag::SL2, &[Place::Real], vec![m2(0, 1, 0, 0), m2(1, 0, 0, -1)]).unwrap();
        let d = SubgroupDescriptor::from_span("borel", lie, true, false).unwrap();
        assert_eq!(d.nilpotents, vec![vec![m2(0, 1, 0, 0)]]);
        let bad = LieSpan::uniform(GroupTag::SL2, &[Place::Real], vec![m2(0, 1, 0, 0), m2(0, 0, 1, 0)]).unwrap();
        assert!(SubgroupDescriptor::from_span("bad", bad, true, false).is_err());
    }
}
