//! Unrolled model-based restoration network.
pub mod layers;
