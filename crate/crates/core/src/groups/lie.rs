use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{GroupTag, SubgroupDescriptor};
use crate::error::{Error, Result};
use crate::linalg::{in_span, nullspace, span_basis, Field, Matrix};
use crate::qs_arith::Place;

/// Coordinates of a traceless block-structured matrix in the standard basis
/// `(e, h, f)` per `SL2` factor, or `(E12, E13, E23, H1, H2, E21, E31, E32)` for `SL3`.
pub fn lie_coords<T: Field>(tag: GroupTag, x: &Matrix<T>) -> Vec<T> {
    match tag {
        GroupTag::SL2 | GroupTag::SL2xSL2 => tag
            .diagonal_blocks()
            .iter()
            .flat_map(|&(o, _)| [x[(o, o + 1)].clone(), x[(o, o)].clone(), x[(o + 1, o)].clone()])
            .collect(),
        GroupTag::SL3 => vec![
            x[(0, 1)].clone(),
            x[(0, 2)].clone(),
            x[(1, 2)].clone(),
            x[(0, 0)].clone(),
            x[(2, 2)].neg(),
            x[(1, 0)].clone(),
            x[(2, 0)].clone(),
            x[(2, 1)].clone(),
        ],
    }
}

pub fn lie_from_coords<T: Field>(tag: GroupTag, c: &[T]) -> Matrix<T> {
    let n = tag.matrix_size();
    let mut x = Matrix::zeros_like(n, n, &c[0]);
    match tag {
        GroupTag::SL2 | GroupTag::SL2xSL2 => {
            for (k, &(o, _)) in tag.diagonal_blocks().iter().enumerate() {
                x[(o, o + 1)] = c[3 * k].clone();
                x[(o, o)] = c[3 * k + 1].clone();
                x[(o + 1, o + 1)] = c[3 * k + 1].neg();
                x[(o + 1, o)] = c[3 * k + 2].clone();
            }
        }
        GroupTag::SL3 => {
            x[(0, 1)] = c[0].clone();
            x[(0, 2)] = c[1].clone();
            x[(1, 2)] = c[2].clone();
            x[(0, 0)] = c[3].clone();
            x[(1, 1)] = c[4].sub(&c[3]);
            x[(2, 2)] = c[4].neg();
            x[(1, 0)] = c[5].clone();
            x[(2, 0)] = c[6].clone();
            x[(2, 1)] = c[7].clone();
        }
    }
    x
}

pub fn lie_basis(tag: GroupTag) -> Vec<Matrix<BigRational>> {
    let d = tag.lie_dim();
    (0..d)
        .map(|i| {
            let c: Vec<BigRational> = (0..d)
                .map(|j| if i == j { BigRational::one() } else { BigRational::zero() })
                .collect();
            lie_from_coords(tag, &c)
        })
        .collect()
}

/// Matrix of `Ad_g` on `Lie(G)` in the standard basis (columns are images).
pub fn ad_matrix<T: Field>(tag: GroupTag, g: &Matrix<T>) -> Option<Matrix<T>> {
    let gi = g.inverse()?;
    let w = &g.data()[0];
    let d = tag.lie_dim();
    let mut out = Matrix::zeros_like(d, d, w);
    for (j, b) in lie_basis(tag).iter().enumerate() {
        let bj = b.map(|q| w.from_rational_like(q));
        let img = lie_coords(tag, &g.mul(&bj).mul(&gi));
        for (i, c) in img.into_iter().enumerate() {
            out[(i, j)] = c;
        }
    }
    Some(out)
}

/// Matrix of `ad_X = [X, .]` in the standard basis.
pub fn ad_lie<T: Field>(tag: GroupTag, x: &Matrix<T>) -> Matrix<T> {
    let w = &x.data()[0];
    let d = tag.lie_dim();
    let mut out = Matrix::zeros_like(d, d, w);
    for (j, b) in lie_basis(tag).iter().enumerate() {
        let bj = b.map(|q| w.from_rational_like(q));
        for (i, c) in lie_coords(tag, &x.bracket(&bj)).into_iter().enumerate() {
            out[(i, j)] = c;
        }
    }
    out
}

/// A rational subspace of `Lie(G)` at each place of `S`.
///
/// Bases are kept in reduced echelon form so equal spans compare equal.
#[derive(Clone, Debug, PartialEq)]
pub struct LieSpan {
    tag: GroupTag,
    places: Vec<Place>,
    coords: Vec<Vec<Vec<BigRational>>>,
}

impl LieSpan {
    pub fn new(tag: GroupTag, places: Vec<Place>, bases: Vec<Vec<Matrix<BigRational>>>) -> Result<Self> {
        if places.len() != bases.len() {
            return Err(Error::invalid("one spanning set per place is required"));
        }
        let n = tag.matrix_size();
        let mut coords = Vec::with_capacity(bases.len());
        for basis in &bases {
            for x in basis {
                if x.rows() != n || x.cols() != n || lie_from_coords(tag, &lie_coords(tag, x)) != *x {
                    return Err(Error::invalid(format!("matrix {x:?} is not in Lie({tag})")));
                }
            }
            coords.push(span_basis(&basis.iter().map(|x| lie_coords(tag, x)).collect::<Vec<_>>(), 0.0));
        }
        Ok(LieSpan { tag, places, coords })
    }

    /// The same span at every place.
    pub fn uniform(tag: GroupTag, places: &[Place], basis: Vec<Matrix<BigRational>>) -> Result<Self> {
        Self::new(tag, places.to_vec(), vec![basis; places.len()])
    }

    pub fn zero(tag: GroupTag, places: &[Place]) -> Self {
        LieSpan {
            tag,
            places: places.to_vec(),
            coords: vec![Vec::new(); places.len()],
        }
    }

    fn from_coords(tag: GroupTag, places: Vec<Place>, coords: Vec<Vec<Vec<BigRational>>>) -> Self {
        let coords = coords.iter().map(|c| span_basis(c, 0.0)).collect();
        LieSpan { tag, places, coords }
    }

    pub fn tag(&self) -> GroupTag {
        self.tag
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn dims(&self) -> Vec<usize> {
        self.coords.iter().map(Vec::len).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Vec::is_empty)
    }

    pub fn coords_at(&self, i: usize) -> &[Vec<BigRational>] {
        &self.coords[i]
    }

    pub fn basis_at(&self, i: usize) -> Vec<Matrix<BigRational>> {
        self.coords[i].iter().map(|c| lie_from_coords(self.tag, c)).collect()
    }

    pub fn contains(&self, i: usize, x: &Matrix<BigRational>) -> bool {
        in_span(&lie_coords(self.tag, x), &self.coords[i], 0.0)
    }

    /// Whether each place's span is a Lie subalgebra.
    pub fn is_closed_under_bracket(&self) -> bool {
        (0..self.places.len()).all(|i| {
            let b = self.basis_at(i);
            b.iter()
                .enumerate()
                .all(|(j, x)| b[j + 1..].iter().all(|y| self.contains(i, &x.bracket(y))))
        })
    }

    /// Lie subalgebra generated by the given elements, per place.
    pub fn generated(tag: GroupTag, places: &[Place], gens: &[Vec<Matrix<BigRational>>]) -> Result<Self> {
        let mut span = Self::new(tag, places.to_vec(), gens.to_vec())?;
        loop {
            let mut grown = Vec::with_capacity(places.len());
            for i in 0..places.len() {
                let b = span.basis_at(i);
                let mut all: Vec<Vec<BigRational>> = span.coords[i].clone();
                for x in &b {
                    for y in &b {
                        all.push(lie_coords(tag, &x.bracket(y)));
                    }
                }
                grown.push(all);
            }
            let next = Self::from_coords(tag, places.to_vec(), grown);
            if next.dims() == span.dims() {
                return Ok(span);
            }
            span = next;
        }
    }

    /// `Ad_g` applied to every place's span, for rational `g`.
    pub fn conjugate(&self, g: &Matrix<BigRational>) -> Result<Self> {
        let ad = ad_matrix(self.tag, g).ok_or_else(|| Error::invalid("conjugating matrix is singular"))?;
        let coords = self.coords.iter().map(|c| c.iter().map(|v| ad.mul_vec(v)).collect()).collect();
        Ok(Self::from_coords(self.tag, self.places.clone(), coords))
    }
}

fn same_ambient(h: &SubgroupDescriptor, l: &SubgroupDescriptor) -> Result<()> {
    if h.tag != l.tag || h.places != l.places {
        return Err(Error::invalid(format!(
            "{} and {} live in different ambient groups",
            h.id, l.id
        )));
    }
    Ok(())
}

/// `Lie(Z_G(H))`: elements of `Lie(G)` commuting with `Lie(H)`, per place.
pub fn centralizer_algebra(h: &SubgroupDescriptor) -> LieSpan {
    let tag = h.tag;
    let d = tag.lie_dim();
    let coords = (0..h.places.len())
        .map(|i| {
            let gens = h.lie.basis_at(i);
            if gens.is_empty() {
                return identity_rows(d);
            }
            // Stack ad_Y for every generator; X commutes iff ad_Y X = 0 for all Y.
            let blocks: Vec<Matrix<BigRational>> = gens.iter().map(|y| ad_lie(tag, y)).collect();
            let rows: Vec<Vec<BigRational>> = blocks
                .iter()
                .flat_map(|m| (0..d).map(move |r| m.row(r).to_vec()))
                .collect();
            nullspace(&Matrix::from_rows(rows), 0.0)
        })
        .collect();
    LieSpan::from_coords(tag, h.places.clone(), coords)
}

/// Largest subspace of `Lie(L)` stable under `ad Lie(H)` at each place,
/// that is, `Lie(M)` for `M` the intersection of the `H`-conjugates of `L`.
pub fn h_invariant_core(h: &SubgroupDescriptor, l: &SubgroupDescriptor) -> Result<LieSpan> {
    same_ambient(h, l)?;
    let tag = h.tag;
    let d = tag.lie_dim();
    let mut coords = Vec::with_capacity(h.places.len());
    for i in 0..h.places.len() {
        let ads: Vec<Matrix<BigRational>> = h.lie.basis_at(i).iter().map(|y| ad_lie(tag, y)).collect();
        let mut v: Vec<Vec<BigRational>> = l.lie.coords_at(i).to_vec();
        let mut rounds = 0;
        loop {
            if v.is_empty() {
                break;
            }
            let next = shrink_to_stable(&v, &ads, d);
            if next.len() == v.len() {
                break;
            }
            v = next;
            rounds += 1;
            if rounds > d {
                return Err(Error::NonStabilizing(rounds));
            }
        }
        coords.push(v);
    }
    Ok(LieSpan::from_coords(tag, h.places.clone(), coords))
}

/// `{v in V : A v in V for each A}`.
fn shrink_to_stable(v: &[Vec<BigRational>], ads: &[Matrix<BigRational>], d: usize) -> Vec<Vec<BigRational>> {
    let mut out = v.to_vec();
    for a in ads {
        out = preimage(&out, a, v, d);
        if out.is_empty() {
            break;
        }
    }
    span_basis(&out, 0.0)
}

/// `{x in U : A x in W}` for subspaces `U`, `W` given by bases.
fn preimage(u: &[Vec<BigRational>], a: &Matrix<BigRational>, w: &[Vec<BigRational>], d: usize) -> Vec<Vec<BigRational>> {
    if u.is_empty() {
        return Vec::new();
    }
    // Annihilator of W: rows n with n . w = 0.
    let ann = if w.is_empty() {
        identity_rows(d)
    } else {
        nullspace(&Matrix::from_rows(w.to_vec()), 0.0)
    };
    if ann.is_empty() {
        return u.to_vec();
    }
    // Conditions on coefficients c: n . A (sum c_k u_k) = 0.
    let au: Vec<Vec<BigRational>> = u.iter().map(|x| a.mul_vec(x)).collect();
    let rows: Vec<Vec<BigRational>> = ann
        .iter()
        .map(|n| {
            au.iter()
                .map(|y| n.iter().zip(y).fold(BigRational::zero(), |acc, (p, q)| acc + p * q))
                .collect()
        })
        .collect();
    let sols = nullspace(&Matrix::from_rows(rows), 0.0);
    sols.iter()
        .map(|c| {
            (0..d)
                .map(|r| c.iter().zip(u).fold(BigRational::zero(), |acc, (ck, uk)| acc + ck * &uk[r]))
                .collect()
        })
        .collect()
}

fn identity_rows(d: usize) -> Vec<Vec<BigRational>> {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect()
}

/// `Lie(N_G(L))`: elements `X` with `[X, Lie(L)] ⊆ Lie(L)`, per place.
pub fn normalizer_algebra(l: &SubgroupDescriptor) -> LieSpan {
    let tag = l.tag;
    let d = tag.lie_dim();
    let coords = (0..l.places.len())
        .map(|i| {
            let basis = l.lie.coords_at(i);
            if basis.is_empty() {
                return identity_rows(d);
            }
            let ann = nullspace(&Matrix::from_rows(basis.to_vec()), 0.0);
            if ann.is_empty() {
                return identity_rows(d);
            }
            // n . [X, b] = -n . ad_b X for every annihilator n and basis element b.
            let rows: Vec<Vec<BigRational>> = l
                .lie
                .basis_at(i)
                .iter()
                .flat_map(|b| {
                    let ad = ad_lie(tag, b);
                    ann.iter()
                        .map(|n| (0..d).map(|c| (0..d).fold(BigRational::zero(), |acc, r| acc + &n[r] * &ad[(r, c)])).collect())
                        .collect::<Vec<Vec<BigRational>>>()
                })
                .collect();
            nullspace(&Matrix::from_rows(rows), 0.0)
        })
        .collect();
    LieSpan::from_coords(tag, l.places.clone(), coords)
}
