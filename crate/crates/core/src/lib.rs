//! Point-process simulation, probability distances and explicit Poisson-type
//! approximation bounds for functionals of Poisson and binomial processes.

pub mod bounds;
pub mod error;
pub mod experiments;
pub mod metrics;
pub mod geometry;
pub mod glauber;
pub mod process;
pub mod quad;
pub mod rng;
pub mod transform;

pub use error::{Error, Result};
pub use geometry::{AffineFlat, Domain, Point};
pub use process::{Configuration, SpaceTag};
pub use rng::SeededRng;
