//! Near-field SAR simulation and restoration toolkit.
//!
//! The toolkit models the spatially-variant degradation of near-field SAR
//! images through blockwise wavenumber-domain masks, provides classical
//! restoration baselines (proximal-gradient L1 deconvolution, CLEAN, SVA),
//! and an unrolled model-based restoration network trained end to end.
//! A stepped-frequency echo simulator with time-domain backprojection
//! serves as an independent physics-level cross-check of the operator path.

pub mod config;
pub mod container;
pub mod echo;
pub mod geometry;
pub mod image;
pub mod metrics;
pub mod operator;
pub mod scenes;
pub mod solvers;
pub mod spectral;
pub mod unrolled;

pub use geometry::{ResolutionEstimate, SceneGeometry, ScenePoint};
pub use image::{ComplexImage, ImageGrid, KGrid};
pub use spectral::BlockMaskBank;
