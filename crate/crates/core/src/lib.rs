//! Numerical engine for Gauss–Bonnet–Chern masses of asymptotically Euclidean
//! metrics and immersions.
//!
//! The crate is organised bottom-up: [`tensor`] holds the antisymmetrized
//! curvature contractions, [`intrinsic`] and [`extrinsic`] evaluate pointwise
//! geometry of metrics and immersions, [`quadrature`] and [`mass`] turn those
//! into flux and bulk integrals, and [`models`] is the zoo of analytic test
//! geometries.

// `!(x > 0.0)` guards are deliberate: they also reject NaN. Index loops mirror tensor notation.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::manual_is_multiple_of)]

pub mod error;
pub mod extrinsic;
pub mod identities;
pub mod intrinsic;
pub mod jet;
pub mod linalg;
pub mod mass;
pub mod models;
pub mod quadrature;
pub mod report;
pub mod summation;
pub mod tensor;

pub use error::{Error, Result};
pub use extrinsic::{extrinsic_at, ExtrinsicPoint, ImmersionFormula, ImmersionModel, ImmersionSample, MeanCurvatureSet};
pub use intrinsic::{curvature_at, CurvaturePoint, MetricFormula, MetricModel, MetricSample, RiemannSign};
pub use jet::{Dual, Jet, Scalar};
pub use mass::{ConstantVariant, FluxSeries, MassEstimate, Method};
pub use models::{make_model, Model, ModelSpec};
pub use quadrature::SphereQuadrature;
pub use report::IdentityReport;
pub use tensor::{DenseTensor, MultiIndex, Slot, Symmetry};
