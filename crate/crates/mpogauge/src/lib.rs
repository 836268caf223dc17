//! Matrix-product-operator symmetries of finite groups and fusion categories.
//!
//! The crate builds MPO representations, solves their fusion data (fusion
//! tensors, 3-cocycle, unit vector, Z matrices) and implements dense gauging
//! and symmetrization maps at small system sizes. Every construction has a
//! brute-force counterpart used by the test suite.

pub mod anomaly;
pub mod category;
pub mod error;
pub mod fixtures;
pub mod fusion;
pub mod gauging;
pub mod group;
pub mod io;
pub mod linalg;
pub mod mpo;
pub mod mps;
pub mod report;
pub mod suite;
pub mod tensor;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
pub use tensor::Tensor;

/// Default residual tolerance for verified identities.
pub const DEFAULT_TOL: f64 = 1e-9;
