//! Matching of 2D occupancy maps through their area segmentation.

pub mod error;
pub mod evaluation;
pub mod features;
pub mod geometry;
pub mod map_io;
pub mod matching;
pub mod segmentation;
pub mod transform;

pub use error::{Error, Result};
