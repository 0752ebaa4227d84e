//! Multiresolution clump finding for spectroscopic data cubes.
//!
//! A cube is decomposed with a separable 3D wavelet transform that only
//! keeps the low-pass (AAA) branch. Each level is reconstructed to full
//! size, segmented with a gradient-ascent clump finder whose thresholds
//! scale with that level's RMS, and clumps are linked across adjacent
//! levels into a tree.

pub mod clumping;
pub mod cube;
pub mod error;
pub mod hierarchy;
pub mod io;
pub mod mra;
pub mod pipeline;
pub mod stats;
pub mod synth;
pub mod wavelet;

pub use clumping::{fellwalker, Caa, Clump, ClumpParams, Neighborhood};
pub use cube::{Cube, Dims, Meta};
pub use error::{Error, Result};
pub use hierarchy::{link_levels, HierarchyTree, LinkMode};
pub use mra::{decompose, Border, MraLevel};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineReport, RmsMode};
pub use wavelet::{filter_bank, Family, FilterBank, Wavelet};
