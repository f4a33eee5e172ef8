pub mod cloud;
pub mod error;
pub mod experiments;
pub mod homology;
pub mod info;
pub mod manifolds;
pub mod neighbors;
pub mod rng;
pub mod stats;

pub use cloud::PointCloud;
pub use error::{Error, Result};
