//! Rigorous computation of fixed points of the m-th order
//! Feigenbaum-Cvitanovic renormalization operator for even unimodal maps,
//! together with validated enclosures of the universal constants alpha and
//! lambda.
//!
//! The pipeline discretizes candidate maps with Chebyshev series, runs a
//! non-rigorous Newton solver to locate approximate fixed points, and then
//! certifies them with a Newton-Kantorovich contraction argument carried out
//! in weighted `l^1` coefficient norms using outward-rounded interval
//! arithmetic throughout.

pub mod cheb;
pub mod ellipse;
pub mod error;
pub mod estimates;
pub mod linalg;
pub mod newton;
pub mod operator;
pub mod scalar;
pub mod validator;
#[doc(hidden)]
pub mod testutil;

pub use cheb::{ChebSeries, DctPlan, GridValues, Parity};
pub use error::{Error, Result};
pub use newton::SeedSpec;
pub use operator::{CandidatePair, RenormProblem};
pub use scalar::{ComplexBox, Scalar};
pub use validator::{CertSettings, Certificate, EigenPair};
