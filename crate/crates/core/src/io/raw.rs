//! Headerless raw cubes: little-endian values, C order (axis 2 fastest).
//! Dims travel out of band.

use std::fs;
use std::path::Path;

use ndarray::Array3;

use crate::cube::{Cube, Dims};
use crate::error::{Error, Result};

/// Reads a float64 cube. NaN values become blank voxels.
pub fn load_raw(path: impl AsRef<Path>, dims: Dims) -> Result<Cube> {
    let bytes = read_sized(path.as_ref(), dims, 8)?;
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Cube::from_shape_vec(dims, values)
}

pub fn save_raw(cube: &Cube, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = Vec::with_capacity(cube.len() * 8);
    for v in cube.to_nan_vec() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Reads an int32 label cube (the clump assignment export format).
pub fn load_labels_raw(path: impl AsRef<Path>, dims: Dims) -> Result<Array3<i32>> {
    let bytes = read_sized(path.as_ref(), dims, 4)?;
    let values = bytes
        .chunks_exact(4)
        .map(|c| i32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Array3::from_shape_vec(dims, values).expect("size checked"))
}

pub fn save_labels_raw(labels: &Array3<i32>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut bytes = Vec::with_capacity(labels.len() * 4);
    for v in labels.iter() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_sized(path: &Path, dims: Dims, width: u64) -> Result<Vec<u8>> {
    if dims.contains(&0) {
        return Err(Error::InvalidParameter(format!("dims must be positive: {dims:?}")));
    }
    let expected = dims.iter().map(|&d| d as u64).product::<u64>() * width;
    let found = fs::metadata(path).map_err(|e| Error::io(path, e))?.len();
    if found != expected {
        return Err(Error::SizeMismatch {
            dims,
            expected,
            found,
        });
    }
    fs::read(path).map_err(|e| Error::io(path, e))
}
