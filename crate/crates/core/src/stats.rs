//! Scalar statistics over the non-blank voxels of a cube.

use serde::{Deserialize, Serialize};

use crate::cube::Cube;
use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: usize,
    pub rms: f64,
    /// Shannon entropy in bits.
    pub entropy: f64,
    pub voxel_count: usize,
}

impl LevelStats {
    pub fn compute(level: usize, cube: &Cube, bins: usize) -> Result<Self> {
        Ok(LevelStats {
            level,
            rms: rms(cube)?,
            entropy: entropy(cube, bins)?,
            voxel_count: cube.len() - cube.blank_count(),
        })
    }
}

/// Root mean square of all non-blank voxels.
pub fn rms(cube: &Cube) -> Result<f64> {
    let (sum, n) = cube
        .valid_values()
        .fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    if n == 0 {
        return Err(Error::AllBlank);
    }
    Ok((sum / n as f64).sqrt())
}

/// Histogram entropy (base 2) over `bins` equal-width bins spanning the
/// value range. A zero-width range has entropy 0.
pub fn entropy(cube: &Cube, bins: usize) -> Result<f64> {
    if bins < 2 {
        return Err(Error::InvalidParameter(format!("entropy needs at least 2 bins, got {bins}")));
    }
    let (min, max, n) = cube.valid_values().fold(
        (f64::INFINITY, f64::NEG_INFINITY, 0usize),
        |(lo, hi, n), v| (lo.min(v), hi.max(v), n + 1),
    );
    if n == 0 {
        return Err(Error::AllBlank);
    }
    let width = max - min;
    if width <= 0.0 {
        return Ok(0.0);
    }
    let mut counts = vec![0usize; bins];
    for v in cube.valid_values() {
        let b = ((v - min) / width * bins as f64) as usize;
        counts[b.min(bins - 1)] += 1;
    }
    let total = n as f64;
    let h = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum::<f64>();
    Ok(h.max(0.0))
}

/// Noise estimate: standard deviation after iteratively rejecting values
/// further than `kappa` standard deviations from the mean.
pub fn sigma_clipped_rms(cube: &Cube, kappa: f64, max_iter: usize) -> Result<f64> {
    if kappa.is_nan() || kappa <= 0.0 {
        return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
    }
    let mut values: Vec<f64> = cube.valid_values().collect();
    if values.is_empty() {
        return Err(Error::AllBlank);
    }
    let mut std = 0.0;
    for _ in 0..max_iter.max(1) {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        let before = values.len();
        values.retain(|v| (v - mean).abs() <= kappa * std);
        if values.len() == before || values.is_empty() {
            break;
        }
    }
    Ok(std)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cube_of(v: Vec<f64>) -> Cube {
        let n = v.len();
        Cube::from_shape_vec([n, 1, 1], v).unwrap()
    }

    #[test]
    fn rms_examples() {
        assert_eq!(rms(&Cube::constant([3, 3, 3], -2.5).unwrap()).unwrap(), 2.5);
        let r = rms(&cube_of(vec![3.0, 4.0])).unwrap();
        assert!((r - 12.5f64.sqrt()).abs() < 1e-15);
        assert!((r - 3.535_533_91).abs() < 1e-8);
    }

    #[test]
    fn rms_ignores_blanks() {
        let c = cube_of(vec![3.0, f64::NAN, 3.0]);
        assert_eq!(rms(&c).unwrap(), 3.0);
        assert!(matches!(rms(&cube_of(vec![f64::NAN; 2])), Err(Error::AllBlank)));
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&Cube::constant([2, 2, 2], 7.0).unwrap(), 256).unwrap(), 0.0);
        let c = cube_of(vec![1.0, 5.0, 1.0, 5.0]);
        assert!((entropy(&c, 256).unwrap() - 1.0).abs() < 1e-15);
        assert!(entropy(&c, 1).is_err());
        let uniform = cube_of((0..256).map(f64::from).collect());
        assert!((entropy(&uniform, 256).unwrap() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn sigma_clip_rejects_outlier() {
        let mut v: Vec<f64> = (0..200).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        v.push(1000.0);
        let c = cube_of(v);
        let s = sigma_clipped_rms(&c, 3.0, 10).unwrap();
        assert!((s - 1.0).abs() < 1e-12, "{s}");
        assert!(rms(&c).unwrap() > 50.0);
    }

    proptest! {
        #[test]
        fn rms_homogeneous(v in prop::collection::vec(-1e3f64..1e3, 1..64), k in -10.0f64..10.0) {
            let c = cube_of(v.clone());
            let scaled = cube_of(v.iter().map(|x| x * k).collect());
            let lhs = rms(&scaled).unwrap();
            let rhs = k.abs() * rms(&c).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
        }

        #[test]
        fn entropy_bounded_and_affine_invariant(
            v in prop::collection::vec(-1000i32..1000, 2..200),
            exp in -4i32..4,
            shift in -64i32..64,
        ) {
            // integer data and power-of-two scale keep the bin arithmetic exact
            let v: Vec<f64> = v.into_iter().map(f64::from).collect();
            let c = cube_of(v.clone());
            let h = entropy(&c, 64).unwrap();
            prop_assert!((0.0..=6.0 + 1e-12).contains(&h));
            let s = 2f64.powi(exp);
            let mapped = cube_of(v.iter().map(|x| x * s + f64::from(shift) * s).collect());
            let h2 = entropy(&mapped, 64).unwrap();
            prop_assert!((h - h2).abs() < 1e-9, "{} vs {}", h, h2);
        }
    }
}
