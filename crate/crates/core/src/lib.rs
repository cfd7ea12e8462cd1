//! Exact computation of the minimal free resolutions attached to the
//! chip-firing theory of a connected undirected multigraph with a sink:
//! the parking-function ideal `M_G`, the toppling ideal `I_G`, and the
//! one-parameter homogenized family interpolating between them, together
//! with a battery of independent correctness checks.

pub mod corpus;
pub mod cw;
pub mod error;
pub mod export;
pub mod graph;
pub mod linalg;
pub mod partition;
pub mod poly;
pub mod resolution;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{Divisor, Multigraph};
pub use partition::{
    connected_partitions, n_acyclic_partitions, AcyclicPartition, ChipClass, ConnectedPartition,
    DirectedQuotientEdge,
};
pub use poly::{Assignment, Monomial, PolyMatrix, Polynomial};
pub use resolution::{
    betti, build_complex, minimal_generators, weight_vector, BasisElement, FreeComplex, IdealKind,
    WeightVector,
};
