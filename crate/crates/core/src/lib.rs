//! Offline fingerprint-photograph authentication.
//!
//! The pipeline turns a colour photograph of a fingertip into a [`Template`]
//! of minutiae with 256-bit binary descriptors, and compares templates with a
//! ratio test followed by RANSAC similarity verification:
//!
//! 1. **segmentation** – HSV skin mask, morphological cleanup, ellipse fit.
//! 2. **enhance** – Gaussian smoothing, CLAHE, adaptive mean binarization.
//! 3. **skeleton** – Zhang-Suen thinning to one-pixel ridges, staircase pruning.
//! 4. **minutiae** – ridge endings and bifurcations by neighbour count.
//! 5. **descriptor** – steered binary tests around each minutia.
//! 6. **matcher** – Hamming brute force, ratio test, RANSAC.
//!
//! Templates serialize to a fixed little-endian layout of 40 bytes per
//! feature ([`store`]), and [`synth`] renders deterministic synthetic finger
//! photographs for testing and evaluation.

pub mod config;
pub mod descriptor;
pub mod enhance;
pub mod error;
pub mod imgops;
pub mod io;
pub mod matcher;
pub mod minutiae;
pub mod pipeline;
pub mod report;
pub mod rng;
pub mod segmentation;
pub mod skeleton;
pub mod store;
pub mod synth;

pub use descriptor::{Descriptor256, Template, TestPattern};
pub use error::{Error, Result};
pub use imgops::{BinaryImage, GrayImage, RgbImage};
pub use matcher::{MatchConfig, MatchResult, RansacConfig, SimilarityTransform};
pub use minutiae::{Angle, Minutia, MinutiaKind};
pub use pipeline::{extract_template, PipelineConfig};
