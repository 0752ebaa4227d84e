//! Cube persistence: a minimal FITS subset and headerless little-endian raw files.

pub mod fits;
pub mod raw;

pub use fits::{load_fits, save_fits};
pub use raw::{load_labels_raw, load_raw, save_labels_raw, save_raw};
