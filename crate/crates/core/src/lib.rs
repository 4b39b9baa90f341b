//! Eigenvalue problems for Lamé's differential equation
//!
//! ```text
//! w'' + (h - ν(ν+1) k² sn²(z, k)) w = 0
//! ```
//!
//! The crate computes Floquet eigenvalues through Hill's discriminant,
//! generalized Lamé–Wangerin eigenvalues through symmetric tridiagonal
//! operators in the variable `η = (sn z − i cn z)²`, the corresponding
//! eigenfunctions on the segment `(iK', 2K + iK')` and in the strip
//! `0 ≤ Im z < K'`, algebraic Lamé functions, Lamé polynomials, and
//! the `k → 0` limits. The [`analysis`] module checks the comparison,
//! zero counting and limit statements numerically.
//!
//! Everything is implemented from scratch on `f64`; there is no shared
//! mutable state and all functions are safe to call concurrently.

pub mod analysis;
pub mod elliptic;
pub mod error;
pub mod floquet;
pub mod recurrence;
pub mod special;
pub mod spectra;
pub mod wangerin;

pub use elliptic::{JacobiTriple, Modulus};
pub use error::{LameError, Result};
pub use recurrence::{LameParams, RecurrenceKind, RecurrenceRow};
pub use spectra::{Eigenpair, TridiagonalMatrix};
pub use wangerin::{Form, Normalization, SeriesEigenfunction};



