//! Multi-queue allocation of scarce housing with agent-based tenants and a
//! surrogate-assisted policy search.
//!
//! The numeric kernels (metrics, ridge regression, assignment, aggregation)
//! are generic over [`num::Scalar`]; the simulation itself runs in `f64`.
//! Aliases for the common `f64` instantiations live at the crate root.

pub mod agents;
pub mod engine;
pub mod evaluate;
pub mod metrics;
pub mod num;
pub mod optimizer;
pub mod policy;
pub mod scenario;

pub use num::Scalar;

/// Metrics in `f64`.
pub type Report = metrics::MetricsReport<f64>;
/// Aggregation weights in `f64`.
pub type Weights = metrics::MetricWeights<f64>;
/// Min-max normalization bounds in `f64`.
pub type Normalization = metrics::NormalizationStats<f64>;
/// Ridge model in `f64`.
pub type Ridge = optimizer::RidgeModel<f64>;
/// Assignment result in `f64`.
pub type AssignmentF64 = optimizer::Assignment<f64>;
/// Exact rational scalar.
pub type Rational = num_rational::Ratio<i64>;
