//! Dense 3D intensity cube with a blank-voxel mask.
//!
//! Axes are `(frequency, y, x)` and storage is C-order, so axis 2 varies
//! fastest. Blank voxels always carry `0.0` in the data array; only the
//! clump finder looks at the mask.

use indexmap::IndexMap;
use ndarray::{Array3, Zip};

use crate::error::{Error, Result};

pub type Dims = [usize; 3];

/// Ordered header / provenance entries.
pub type Meta = IndexMap<String, String>;

#[derive(Debug, Clone, PartialEq)]
pub struct Cube {
    data: Array3<f64>,
    blank: Array3<bool>,
    meta: Meta,
}

impl Cube {
    /// Wraps a fully valid array. Every voxel must be finite.
    pub fn new(data: Array3<f64>) -> Result<Self> {
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidCube(format!(
                "non-finite value at linear index {pos}; use Cube::from_nan_blanks"
            )));
        }
        check_dims(data.dim())?;
        let blank = Array3::from_elem(data.raw_dim(), false);
        Ok(Cube {
            data,
            blank,
            meta: Meta::new(),
        })
    }

    /// Builds a cube from raw values where NaN marks a blank voxel.
    /// Infinities are rejected.
    pub fn from_nan_blanks(mut data: Array3<f64>) -> Result<Self> {
        check_dims(data.dim())?;
        let mut blank = Array3::from_elem(data.raw_dim(), false);
        let mut bad = false;
        Zip::from(&mut data).and(&mut blank).for_each(|v, b| {
            if v.is_nan() {
                *b = true;
                *v = 0.0;
            } else if v.is_infinite() {
                bad = true;
            }
        });
        if bad {
            return Err(Error::InvalidCube("infinite voxel value".into()));
        }
        Ok(Cube {
            data,
            blank,
            meta: Meta::new(),
        })
    }

    pub fn with_mask(mut data: Array3<f64>, blank: Array3<bool>) -> Result<Self> {
        if data.dim() != blank.dim() {
            let (a, b, c) = blank.dim();
            return Err(Error::DimsMismatch {
                expected: dims_of(&data),
                found: [a, b, c],
            });
        }
        check_dims(data.dim())?;
        let mut bad = false;
        Zip::from(&mut data).and(&blank).for_each(|v, &b| {
            if b {
                *v = 0.0;
            } else if !v.is_finite() {
                bad = true;
            }
        });
        if bad {
            return Err(Error::InvalidCube("non-finite value outside blank mask".into()));
        }
        Ok(Cube {
            data,
            blank,
            meta: Meta::new(),
        })
    }

    pub fn from_shape_vec(dims: Dims, values: Vec<f64>) -> Result<Self> {
        let data = Array3::from_shape_vec(dims, values)
            .map_err(|e| Error::InvalidCube(e.to_string()))?;
        Cube::from_nan_blanks(data)
    }

    pub fn constant(dims: Dims, value: f64) -> Result<Self> {
        Cube::new(Array3::from_elem(dims, value))
    }

    pub(crate) fn from_transform(data: Array3<f64>) -> Self {
        let blank = Array3::from_elem(data.raw_dim(), false);
        Cube {
            data,
            blank,
            meta: Meta::new(),
        }
    }

    pub fn dims(&self) -> Dims {
        dims_of(&self.data)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &Array3<f64> {
        &self.data
    }

    pub fn blank_mask(&self) -> &Array3<bool> {
        &self.blank
    }

    pub fn is_blank(&self, idx: Dims) -> bool {
        self.blank[idx]
    }

    pub fn blank_count(&self) -> usize {
        self.blank.iter().filter(|&&b| b).count()
    }

    pub fn meta(&self) -> &Meta {
        &self.meta
    }

    pub fn meta_mut(&mut self) -> &mut Meta {
        &mut self.meta
    }

    pub fn with_meta(mut self, meta: Meta) -> Self {
        self.meta = meta;
        self
    }

    /// Iterator over the values of non-blank voxels in storage order.
    pub fn valid_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.data
            .iter()
            .zip(self.blank.iter())
            .filter(|(_, &b)| !b)
            .map(|(&v, _)| v)
    }

    /// Values with blanks restored to NaN, in C order.
    pub fn to_nan_vec(&self) -> Vec<f64> {
        self.data
            .iter()
            .zip(self.blank.iter())
            .map(|(&v, &b)| if b { f64::NAN } else { v })
            .collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Cube> {
        Cube::with_mask(self.data.mapv(f), self.blank.clone())
    }
}

pub(crate) fn dims_of<T>(a: &Array3<T>) -> Dims {
    let (d0, d1, d2) = a.dim();
    [d0, d1, d2]
}

fn check_dims((d0, d1, d2): (usize, usize, usize)) -> Result<()> {
    if d0 == 0 || d1 == 0 || d2 == 0 {
        return Err(Error::InvalidCube(format!(
            "all axes must be non-empty, got ({d0}, {d1}, {d2})"
        )));
    }
    Ok(())
}
