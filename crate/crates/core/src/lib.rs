//! Guaranteed-cost coherent controller synthesis for linear quantum systems.
//!
//! Rank-constrained LMIs are solved by alternating projections, with a
//! bisection on the cost bound. Every reported bound comes with a
//! certificate that is re-checked independently.

pub mod error;
pub mod example;
pub mod linalg;
pub mod lmi;
pub mod model;
pub mod oracle;
pub mod par;
pub mod rcsolve;
pub mod synth;
pub mod tol;

pub use error::{Error, Result};
