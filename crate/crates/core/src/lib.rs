//! Numerics for the large deviations of normalised excursions and bridges of
//! spectrally positive α-stable Lévy processes.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod ldp_harness;
pub mod path_space;
pub mod quad;
pub mod rate_functions;
pub mod sampling;
pub mod stable_math;
pub mod stats;
pub mod variational;

pub use error::{Error, Result};
pub use quad::QuadratureSpec;
pub use stable_math::{make_params, StableParams};
