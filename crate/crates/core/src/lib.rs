//! Massless helicity representations, cone quadrature, the SU(2,2) tube
//! kernel and the free nets built from them.

pub mod conequad;
pub mod config;
pub mod conformal;
pub mod convergence;
pub mod error;
pub mod freenet;
pub mod poincare;
pub mod report;
pub mod rules;
pub mod sampling;
pub mod spinalg;
pub mod suites;

pub use error::{Error, Result};
