//! Harmonic-measure distribution functions of the slit domains that
//! approximate the middle-thirds Cantor set.
//!
//! The pipeline maps the exterior of `m = 2^ℓ` slits onto the exterior of `m`
//! circles, computes the harmonic measures of those circles with Neumann-kernel
//! integral equations, and assembles the h-function from step heights (capture
//! circle in a gap) and Möbius-regularized arc solutions (capture circle across
//! a slit).
//!
//! ```
//! use hfun_core::{geometry::BasepointMode, pipeline::{Pipeline, PipelineConfig}};
//!
//! let p = Pipeline::build(2, BasepointMode::LeftExterior, &PipelineConfig::default()).unwrap();
//! println!("{:?}", p.step_heights());
//! ```

// `!(x > 0.0)` also rejects NaN; index loops follow the quadrature sums.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod asymfit;
pub mod bie;
pub mod conformal;
pub mod error;
pub mod format;
pub mod geometry;
pub mod harmonic;
pub mod hfun;
pub mod oracle;
pub mod pipeline;
pub mod reference;

pub use error::{Error, Result};
