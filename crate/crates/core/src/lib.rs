//! Haar-wavelet filtering, segmentation and k-nearest-neighbour classification
//! of monophonic melodies in symbolic form.

pub mod classifier;
pub mod cli;
pub mod contrapuntal;
pub mod experiments;
pub mod error;
pub mod ingest;
pub mod segmentation;
pub mod signal;
pub mod wavelet;

pub use error::{Error, Result};
