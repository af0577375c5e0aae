//! Exact symbolic verification of Capelli-type determinant identities in the
//! Weyl algebra `p x = x p + h`.
//!
//! * [`weyl`]: generators, ordered polynomials and normal ordering.
//! * [`identities`]: the polarization matrices, column and row determinants,
//!   permanents, and algebraic verification of the Capelli, Turnbull,
//!   antisymmetric Turnbull and Howe-Umeda-Kostant-Sahi identities.
//! * [`combinatorics`]: the object families behind the expanded determinants,
//!   their weights and links, and the sign-reversing involutions.

pub mod combinatorics;
pub mod error;
pub mod identities;
pub mod perm;
pub mod weyl;

pub use error::{Error, Result};
pub use identities::{IdentityKind, Limits};
pub use weyl::{CommutationSetting, NormalPolynomial, Polynomial, Space, SymmetryMode};
