//! Multi-object tracking with geometric re-identification.
//!
//! Detections carry an axis-aligned 3D box and an eight-view shape
//! descriptor. Online association combines a descriptor cost with a
//! generalized-IoU spatial cost and solves each frame as a linear
//! assignment; offline recovery pools every tracklet, classifies it
//! against a linear SVM gallery with a per-view majority vote, and groups
//! tracklets into per-identity trajectories.

pub mod assignment;
pub mod association;
pub mod config;
pub mod error;
pub mod features;
pub mod gallery;
pub mod geometry;
pub mod imprints;
pub mod io;
pub mod metrics;
pub mod model;
pub mod par;
pub mod pipeline;
pub mod recovery;
pub mod simulator;

pub use error::{Error, Result};
pub use model::*;
