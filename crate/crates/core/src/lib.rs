//! Computable pieces of S-arithmetic homogeneous dynamics.
//!
//! * [`qs_arith`]: places, p-adic scalars, norms and balls over `Q_S`.
//! * [`lattice`]: `Z_S`-lattices, systoles, Mahler diagnostics, strong approximation.
//! * [`groups`]: `SL2`, `SL2 x SL2`, `SL3` over `Q_S` and a subgroup catalogue.
//! * [`linearise`]: wedge representations, singular sets, neighbourhoods, focusing.
//! * [`goodfn`]: `(C, alpha)`-good functions, Besicovich covers, charts.
//! * [`dynamics`]: Monte-Carlo translates on `SL2(Z)\SL2(R)` and friends.

pub mod dynamics;
pub mod error;
pub mod goodfn;
pub mod groups;
pub mod lattice;
pub mod linalg;
pub mod linearise;
pub mod qs_arith;

pub use error::{Error, Result};
pub use groups::{GroupElement, GroupTag, LieAlgElem, LieSpan, RatnerVerdict, SubgroupDescriptor};
pub use lattice::{ShortVectorSet, TightnessProfile, ZSLattice};
pub use linalg::{Field, Matrix};
pub use qs_arith::{Place, PadicScalar, QSScalar, QSVector};
