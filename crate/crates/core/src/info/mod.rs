//! Information measures: nearest-neighbour estimators for continuous clouds
//! and exact sums for discrete distributions.

mod continuous;
mod discrete;

pub use continuous::*;
pub use discrete::*;
