//! Measures how suitable a set of data transformations is for invariant
//! learning.
//!
//! The pipeline: materialize finite orbits for every sample point
//! ([`transforms`]), take minimum distances between orbits and close them
//! under shortest paths to get the induced pseudometric ([`metric`]), then
//! estimate the sample covering number — the smallest subset of the sample
//! that covers everything within a resolution epsilon ([`cover`]).
//! Transformations with small covering numbers recover the dataset from few
//! representatives, which is the suitability signal. The [`complexity`] and
//! [`bounds`] modules evaluate the matching model-complexity and
//! generalization-bound formulas for norm-bounded linear classes.

pub mod bounds;
pub mod complexity;
pub mod cover;
pub mod data;
pub mod error;
pub mod metric;
mod rng;
pub mod transforms;

pub use data::{DataPoint, DistanceMatrix, Sample, TensorShape};
pub use error::{Error, Result};
pub use metric::{OrbitDistanceMatrix, PseudometricMatrix};
pub use transforms::{Orbit, TransformSpec};
