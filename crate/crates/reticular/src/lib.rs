//! Exact classification of function germs on an r-corner under reticular
//! R/K equivalence (codimension, finite determinacy, versal unfoldings,
//! simple-class recognition), and numerical extraction of the caustics and
//! wavefronts of the reticular Lagrangian/Legendrian maps defined by their
//! generating families.
//!
//! All algebra is exact rational arithmetic; floating point enters only in
//! the mesh solvers of [`geom`].

pub mod catalog;
pub mod classify;
pub mod cli;
pub mod geom;
pub mod jets;
pub mod linalg;
pub mod local;
pub mod parse;
pub mod poly;
pub mod unfold;

pub use classify::{classify, is_simple, split, ClassifyOutcome, GermClass};
pub use local::{codimension, determinacy_bound, membership, tangent_module, Codim, Mode};
pub use parse::parse_poly;
pub use poly::{CornerPoly, Mono, VarSet};
pub use unfold::{build_versal, check_versality, stability_verdict, FamilyKind, GeneratingFamily};
