//! Einstein metrics for algebraic curvature tensors.
//!
//! Given a (4,0) tensor with the symmetries of a Riemann tensor, find the
//! contravariant metric `g^ab` of unit determinant under which it is Einstein,
//! `R_abcd g^ac = λ g_bd`. Such metrics are the critical points of the scalar
//! curvature `R(g) = R_abcd g^ac g^bd` on the unit-determinant slice; for
//! strictly sectionally positive tensors the critical point exists, is unique
//! and is the minimum.
//!
//! Modules:
//! - [`tensor`]: storage, validation and contractions of curvature tensors;
//! - [`spd`]: geometry of the unit-determinant slice of SPD matrices;
//! - [`solver`]: gradient, Hessian, geodesic descent with Newton acceleration;
//! - [`bounds`]: sectional-curvature estimates and the coercivity region;
//! - [`oracle`]: fixtures, brute-force minimization, finite differences;
//! - [`io`]: JSON-ready file schemas.

// `!(x > 0.0)` is used deliberately so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod solver;
pub mod spd;
pub mod tensor;

pub use error::{Error, Result};
pub use solver::{solve_einstein, verify_einstein, SolveOptions, SolveReport, SolveStatus};
pub use spd::{geodesic, geodesic_distance, normalize_det, TangentPerturbation, UpperMetric};
pub use tensor::{validate_symmetries, CurvatureTensor, Plane, SymmetryReport, Tensor4};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
