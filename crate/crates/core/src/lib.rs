//! Noisy opinion dynamics on networks: simulation, spectral predictions of
//! stationary opinion diversity, and the statistics used to compare them.

pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod influence;
pub mod linalg;
pub mod rng;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{TrustMatrix, UndirectedGraph};
pub use spectral::{DiversityKind, DiversityPrediction, Spectrum};
