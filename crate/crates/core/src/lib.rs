//! The 1-2 model on the hexagonal lattice.
//!
//! A 1-2 model configuration is a set of edges such that every vertex is
//! incident to one or two of them. This crate provides the lattice geometry,
//! configurations and their weights, exact enumeration, a block heat-bath
//! sampler, homogeneous-cluster census, the configuration surgeries behind
//! the uniqueness argument for infinite homogeneous clusters, and the
//! compatible-partition combinatorics that bound the number of encounter
//! boxes.
//!
//! Numeric code is generic over the scalar type (see [`scalar`]); the aliases
//! below fix the common choices.

pub mod census;
pub mod configuration;
pub mod error;
pub mod exact;
pub mod lattice;
pub mod partition;
pub mod sampler;
pub mod scalar;
pub mod surgery;

pub use configuration::{Configuration, LocalCode, Weights};
pub use error::{Error, Result};
pub use lattice::{Boundary, BoxSpec, EdgeId, EdgeKind, Geometry, VertexId};

use num_rational::BigRational;

pub type Weights64 = Weights<f64>;
pub type Weights32 = Weights<f32>;
/// Exact rational weights; partition functions come out exact.
pub type ExactWeights = Weights<BigRational>;
/// Unit weights in integers count configurations.
pub type CountWeights = Weights<u64>;
pub type Distribution64 = exact::Distribution<f64>;
pub type ExactDistribution = exact::Distribution<BigRational>;
pub type Chain64 = sampler::Chain<f64>;

