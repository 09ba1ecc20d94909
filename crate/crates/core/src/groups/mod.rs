//! Matrix groups `SL2`, `SL2 x SL2` and `SL3` over `Q_S`, with their Lie algebras.

mod catalogue;
mod expmap;
mod jordan;
mod lie;

pub use catalogue::{
    catalogue, catalogue_ids, ratner_class_test, FactorKind, RatnerVerdict, RatnerWitness, SubgroupDescriptor,
};
pub use expmap::{exp, exp_padic, exp_real, log, log_padic, log_real};
pub use jordan::{jordan_decompose, jordan_exact, jordan_real, real_eigenvalues, unipotent_analysis};
pub use lie::{
    ad_lie, ad_matrix, centralizer_algebra, h_invariant_core, lie_basis, lie_coords, lie_from_coords,
    normalizer_algebra, LieSpan,
};

use std::fmt;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Field, Matrix};
use crate::qs_arith::{validate_places, MatBlock, PadicScalar, Place};

/// Relative tolerance for determinant and structure checks at the real place.
pub const REAL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupTag {
    SL2,
    SL2xSL2,
    SL3,
}

impl GroupTag {
    /// Size of the ambient matrices (`SL2 x SL2` sits block-diagonally in 4x4).
    pub fn matrix_size(self) -> usize {
        match self {
            GroupTag::SL2 => 2,
            GroupTag::SL2xSL2 => 4,
            GroupTag::SL3 => 3,
        }
    }

    pub fn lie_dim(self) -> usize {
        match self {
            GroupTag::SL2 => 3,
            GroupTag::SL2xSL2 => 6,
            GroupTag::SL3 => 8,
        }
    }

    /// `(offset, size)` of the diagonal blocks carrying the group.
    pub fn diagonal_blocks(self) -> &'static [(usize, usize)] {
        match self {
            GroupTag::SL2 => &[(0, 2)],
            GroupTag::SL2xSL2 => &[(0, 2), (2, 2)],
            GroupTag::SL3 => &[(0, 3)],
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sl2" => Ok(GroupTag::SL2),
            "sl2xsl2" => Ok(GroupTag::SL2xSL2),
            "sl3" => Ok(GroupTag::SL3),
            other => Err(Error::invalid(format!("unknown group tag {other:?}"))),
        }
    }
}

impl fmt::Display for GroupTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupTag::SL2 => "SL2",
            GroupTag::SL2xSL2 => "SL2xSL2",
            GroupTag::SL3 => "SL3",
        })
    }
}

/// Entries outside the diagonal blocks must vanish.
fn check_block_shape<T: Field>(tag: GroupTag, m: &Matrix<T>, tol: f64) -> Result<()> {
    let n = tag.matrix_size();
    if m.rows() != n || m.cols() != n {
        return Err(Error::invalid(format!("{tag} needs {n}x{n} matrices, got {}x{}", m.rows(), m.cols())));
    }
    let blocks = tag.diagonal_blocks();
    let owner = |i: usize| blocks.iter().position(|&(o, s)| i >= o && i < o + s);
    let scale = m.sup_norm().max(1.0);
    for i in 0..n {
        for j in 0..n {
            if owner(i) != owner(j) && !m[(i, j)].is_negligible(tol * scale) {
                return Err(Error::invalid(format!("entry ({i},{j}) breaks the {tag} block structure")));
            }
        }
    }
    Ok(())
}

fn check_det_one<T: Field>(tag: GroupTag, m: &Matrix<T>) -> Result<()> {
    for &(o, s) in tag.diagonal_blocks() {
        let idx: Vec<usize> = (o..o + s).collect();
        let b = m.submatrix(&idx, &idx);
        let d = b.det().sub(&b[(0, 0)].one_like());
        let tol = REAL_TOL * b.sup_norm().max(1.0).powi(s as i32);
        if !d.is_negligible(tol) {
            return Err(Error::invalid(format!("{tag} factor has determinant off 1 by {}", d.magnitude())));
        }
    }
    Ok(())
}

fn check_traceless<T: Field>(tag: GroupTag, m: &Matrix<T>) -> Result<()> {
    for &(o, s) in tag.diagonal_blocks() {
        let t = (o..o + s).fold(m[(o, o)].zero_like(), |acc, i| acc.add(&m[(i, i)]));
        if !t.is_negligible(1e-10 * m.sup_norm().max(1.0)) {
            return Err(Error::invalid(format!("{tag} Lie element has a factor with trace {}", t.magnitude())));
        }
    }
    Ok(())
}

fn check_places(places: &[Place], blocks: &[MatBlock], n: usize) -> Result<()> {
    validate_places(places)?;
    if places.len() != blocks.len() {
        return Err(Error::invalid("one matrix block per place is required"));
    }
    for (v, b) in places.iter().zip(blocks) {
        if b.place() != *v || b.rows() != n {
            return Err(Error::invalid(format!("block at {v} has the wrong place or size")));
        }
    }
    Ok(())
}

/// An element of `G(Q_S)`: one matrix per place.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    tag: GroupTag,
    places: Vec<Place>,
    blocks: Vec<MatBlock>,
}

impl GroupElement {
    pub fn new(tag: GroupTag, places: Vec<Place>, blocks: Vec<MatBlock>) -> Result<Self> {
        check_places(&places, &blocks, tag.matrix_size())?;
        for b in &blocks {
            match b {
                MatBlock::Real(m) => {
                    if m.data().iter().any(|x| !x.is_finite()) {
                        return Err(Error::invalid("non-finite matrix entry"));
                    }
                    check_block_shape(tag, m, REAL_TOL)?;
                    check_det_one(tag, m)?;
                }
                MatBlock::Padic(m) => {
                    check_block_shape(tag, m, 0.0)?;
                    check_det_one(tag, m)?;
                }
            }
        }
        Ok(GroupElement { tag, places, blocks })
    }

    pub(crate) fn from_parts(tag: GroupTag, places: Vec<Place>, blocks: Vec<MatBlock>) -> Self {
        GroupElement { tag, places, blocks }
    }

    pub fn real(tag: GroupTag, m: Matrix<f64>) -> Result<Self> {
        Self::new(tag, vec![Place::Real], vec![MatBlock::Real(m)])
    }

    /// `SL2(R)` element from its entries.
    pub fn sl2(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::real(GroupTag::SL2, Matrix::from_rows(vec![vec![a, b], vec![c, d]]))
    }

    /// A rational matrix embedded diagonally at every place.
    pub fn from_rational(tag: GroupTag, places: &[Place], m: &Matrix<BigRational>) -> Result<Self> {
        Self::new(tag, places.to_vec(), places.iter().map(|&v| MatBlock::embed(v, m)).collect())
    }

    pub fn identity(tag: GroupTag, places: &[Place]) -> Self {
        let n = tag.matrix_size();
        let blocks = places
            .iter()
            .map(|&v| match v {
                Place::Real => MatBlock::Real(Matrix::identity(n)),
                Place::Padic(p) => MatBlock::Padic(Matrix::identity_like(n, &PadicScalar::one(p))),
            })
            .collect();
        GroupElement {
            tag,
            places: places.to_vec(),
            blocks,
        }
    }

    /// `(a, b)` in `SL2 x SL2` from two `SL2` elements on the same places.
    pub fn pair(a: &GroupElement, b: &GroupElement) -> Result<Self> {
        if a.tag != GroupTag::SL2 || b.tag != GroupTag::SL2 || a.places != b.places {
            return Err(Error::invalid("pair needs two SL2 elements over the same places"));
        }
        let blocks = a
            .blocks
            .iter()
            .zip(&b.blocks)
            .map(|(x, y)| match (x, y) {
                (MatBlock::Real(x), MatBlock::Real(y)) => MatBlock::Real(block_diag(x, y, &0.0)),
                (MatBlock::Padic(x), MatBlock::Padic(y)) => {
                    MatBlock::Padic(block_diag(x, y, &x.data()[0].zero_like()))
                }
                _ => unreachable!("places agree"),
            })
            .collect();
        Ok(GroupElement {
            tag: GroupTag::SL2xSL2,
            places: a.places.clone(),
            blocks,
        })
    }

    /// The `i`-th `SL2` factor of an `SL2 x SL2` element.
    pub fn factor(&self, i: usize) -> Result<GroupElement> {
        if self.tag != GroupTag::SL2xSL2 || i > 1 {
            return Err(Error::invalid("factor() applies to SL2xSL2 with index 0 or 1"));
        }
        let idx = [2 * i, 2 * i + 1];
        let blocks = self
            .blocks
            .iter()
            .map(|b| match b {
                MatBlock::Real(m) => MatBlock::Real(m.submatrix(&idx, &idx)),
                MatBlock::Padic(m) => MatBlock::Padic(m.submatrix(&idx, &idx)),
            })
            .collect();
        Ok(GroupElement {
            tag: GroupTag::SL2,
            places: self.places.clone(),
            blocks,
        })
    }

    pub fn tag(&self) -> GroupTag {
        self.tag
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn blocks(&self) -> &[MatBlock] {
        &self.blocks
    }

    pub fn block_at(&self, v: Place) -> Option<&MatBlock> {
        self.places.iter().position(|&w| w == v).map(|i| &self.blocks[i])
    }

    pub fn real_block(&self) -> Option<&Matrix<f64>> {
        match self.block_at(Place::Real) {
            Some(MatBlock::Real(m)) => Some(m),
            _ => None,
        }
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        assert!(
            self.tag == other.tag && self.places == other.places,
            "multiplying elements of different groups"
        );
        GroupElement {
            tag: self.tag,
            places: self.places.clone(),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.mul(b)).collect(),
        }
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            tag: self.tag,
            places: self.places.clone(),
            blocks: self
                .blocks
                .iter()
                .map(|b| b.inverse().expect("group elements are invertible"))
                .collect(),
        }
    }

    /// `Ad_g X = g X g^-1`.
    pub fn adjoint(&self, x: &LieAlgElem) -> LieAlgElem {
        assert!(self.tag == x.tag && self.places == x.places, "adjoint across different groups");
        let inv = self.inverse();
        LieAlgElem {
            tag: self.tag,
            places: self.places.clone(),
            blocks: self
                .blocks
                .iter()
                .zip(&x.blocks)
                .zip(&inv.blocks)
                .map(|((g, x), gi)| g.mul(x).mul(gi))
                .collect(),
        }
    }
}

fn block_diag<T: Field>(a: &Matrix<T>, b: &Matrix<T>, zero: &T) -> Matrix<T> {
    let (n, m) = (a.rows(), b.rows());
    let mut out = Matrix::zeros_like(n + m, n + m, zero);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = a[(i, j)].clone();
        }
    }
    for i in 0..m {
        for j in 0..m {
            out[(n + i, n + j)] = b[(i, j)].clone();
        }
    }
    out
}

/// An element of `Lie(G)(Q_S)`: one traceless matrix per place.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgElem {
    tag: GroupTag,
    places: Vec<Place>,
    blocks: Vec<MatBlock>,
}

impl LieAlgElem {
    pub fn new(tag: GroupTag, places: Vec<Place>, blocks: Vec<MatBlock>) -> Result<Self> {
        check_places(&places, &blocks, tag.matrix_size())?;
        for b in &blocks {
            match b {
                MatBlock::Real(m) => {
                    check_block_shape(tag, m, REAL_TOL)?;
                    check_traceless(tag, m)?;
                }
                MatBlock::Padic(m) => {
                    check_block_shape(tag, m, 0.0)?;
                    check_traceless(tag, m)?;
                }
            }
        }
        Ok(LieAlgElem { tag, places, blocks })
    }

    pub(crate) fn from_parts(tag: GroupTag, places: Vec<Place>, blocks: Vec<MatBlock>) -> Self {
        LieAlgElem { tag, places, blocks }
    }

    pub fn real(tag: GroupTag, m: Matrix<f64>) -> Result<Self> {
        Self::new(tag, vec![Place::Real], vec![MatBlock::Real(m)])
    }

    pub fn from_rational(tag: GroupTag, places: &[Place], m: &Matrix<BigRational>) -> Result<Self> {
        Self::new(tag, places.to_vec(), places.iter().map(|&v| MatBlock::embed(v, m)).collect())
    }

    pub fn tag(&self) -> GroupTag {
        self.tag
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn blocks(&self) -> &[MatBlock] {
        &self.blocks
    }

    pub fn real_block(&self) -> Option<&Matrix<f64>> {
        self.places.iter().position(|&v| v == Place::Real).and_then(|i| match &self.blocks[i] {
            MatBlock::Real(m) => Some(m),
            _ => None,
        })
    }

    pub fn bracket(&self, other: &LieAlgElem) -> LieAlgElem {
        assert!(self.tag == other.tag && self.places == other.places, "bracket across different algebras");
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| match (a, b) {
                (MatBlock::Real(a), MatBlock::Real(b)) => MatBlock::Real(a.bracket(b)),
                (MatBlock::Padic(a), MatBlock::Padic(b)) => MatBlock::Padic(a.bracket(b)),
                _ => unreachable!("places agree"),
            })
            .collect();
        LieAlgElem {
            tag: self.tag,
            places: self.places.clone(),
            blocks,
        }
    }
}
