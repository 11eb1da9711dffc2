//! Exact computation with F_q-linear sets of PG(r-1, q^n).
//!
//! The crate is layered bottom-up: [`gf`] gives field arithmetic in the
//! tower F_p ⊆ F_q ⊆ F_{q^n}, [`linpoly`] linearized polynomials, [`dickson`]
//! their Dickson matrices and principal minors, [`linset`] subspaces and the
//! linear sets they define, and [`classify`] decides how two subspaces with
//! the same linear set are related.

pub mod error;
pub mod dickson;
pub mod gf;
pub mod linpoly;
pub mod linset;
pub mod classify;
pub mod cli;

pub use error::{Error, Result};
pub use dickson::{diag_similar, DicksonMatrix, Fingerprint};
pub use gf::{Elem, FieldTower};
pub use linpoly::LinPoly;
