//! Multilevel 3D decomposition that keeps only the all-low-pass (AAA)
//! branch, and low-pass-only reconstruction back to the original size.
//!
//! Geometry follows the usual symmetric-extension DWT convention: a line of
//! `n` samples filtered with `L` taps yields `floor((n + L - 1) / 2)`
//! coefficients, and synthesis takes `target` samples starting at offset
//! `L - 2` of the zero-interleaved full convolution.

use std::str::FromStr;

use log::warn;
use ndarray::{Array3, ArrayView1, ArrayViewMut1, Axis, Zip};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cube::{Cube, Dims};
use crate::error::{Error, Result};
use crate::wavelet::FilterBank;

/// Signal extension used beyond the ends of each line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Border {
    /// Half-point mirror: `... x1 x0 | x0 x1 ... xn-1 | xn-1 xn-2 ...`
    #[default]
    Symmetric,
    Periodic,
    Zero,
}

impl FromStr for Border {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "symmetric" => Ok(Border::Symmetric),
            "periodic" => Ok(Border::Periodic),
            "zero" => Ok(Border::Zero),
            _ => Err(Error::InvalidParameter(format!("unknown border mode {s:?}"))),
        }
    }
}

impl Border {
    /// Maps a possibly out-of-range index onto the line, or `None` for zero padding.
    #[inline]
    fn index(self, n: usize, i: isize) -> Option<usize> {
        let n_i = n as isize;
        if (0..n_i).contains(&i) {
            return Some(i as usize);
        }
        match self {
            Border::Symmetric => {
                let r = i.rem_euclid(2 * n_i) as usize;
                Some(if r < n { r } else { 2 * n - 1 - r })
            }
            Border::Periodic => Some(i.rem_euclid(n_i) as usize),
            Border::Zero => None,
        }
    }
}

/// Number of coefficients produced from `n` samples by `taps` taps.
pub fn coeff_len(n: usize, taps: usize) -> usize {
    (n + taps - 1) / 2
}

/// Approximation dims after each of `levels` steps (entry 0 is `dims`).
pub fn approx_dims(dims: Dims, taps: usize, levels: usize) -> Vec<Dims> {
    let mut out = vec![dims];
    for _ in 0..levels {
        let prev = *out.last().unwrap();
        out.push(prev.map(|n| coeff_len(n, taps)));
    }
    out
}

fn downsample_line(x: ArrayView1<f64>, taps: &[f64], border: Border, mut y: ArrayViewMut1<f64>) {
    let n = x.len();
    let l = taps.len();
    let pad = l as isize - 1;
    // extended line, index t holds x[t - pad]
    let ext: Vec<f64> = (-pad..n as isize + pad)
        .map(|i| border.index(n, i).map_or(0.0, |j| x[j]))
        .collect();
    for (k, out) in y.iter_mut().enumerate() {
        // y[k] = Σ_j taps[j] · x[2k + 1 - j]
        let base = 2 * k + 1 + l - 1;
        *out = taps.iter().enumerate().map(|(j, t)| t * ext[base - j]).sum();
    }
}

fn upsample_line(a: ArrayView1<f64>, taps: &[f64], mut y: ArrayViewMut1<f64>) {
    let n = a.len() as isize;
    let l = taps.len() as isize;
    for (m, out) in y.iter_mut().enumerate() {
        let m = m as isize;
        // taps index j = m + L - 2 - 2i must fall in [0, L)
        let lo = (m - 1).div_euclid(2) + (m - 1).rem_euclid(2);
        let hi = (m + l - 2).div_euclid(2);
        let mut acc = 0.0;
        for i in lo.max(0)..=hi.min(n - 1) {
            acc += a[i as usize] * taps[(m + l - 2 - 2 * i) as usize];
        }
        *out = acc;
    }
}

fn check_axis(axis: usize) -> Result<()> {
    if axis > 2 {
        return Err(Error::InvalidParameter(format!("axis {axis} out of range")));
    }
    Ok(())
}

/// Filters every line along `axis` with `taps` and keeps every second sample.
pub fn conv_downsample_axis(cube: &Cube, axis: usize, taps: &[f64], border: Border) -> Result<Cube> {
    Ok(Cube::from_transform(downsample_array(
        cube.data(),
        axis,
        taps,
        border,
    )?))
}

fn downsample_array(data: &Array3<f64>, axis: usize, taps: &[f64], border: Border) -> Result<Array3<f64>> {
    check_axis(axis)?;
    if taps.is_empty() {
        return Err(Error::EmptyTaps);
    }
    let n = data.len_of(Axis(axis));
    if n < 2 {
        return Err(Error::AxisTooShort { axis, len: n });
    }
    let mut shape = data.raw_dim();
    shape[axis] = coeff_len(n, taps.len());
    let mut out = Array3::zeros(shape);
    Zip::from(data.lanes(Axis(axis)))
        .and(out.lanes_mut(Axis(axis)))
        .par_for_each(|x, y| downsample_line(x, taps, border, y));
    Ok(out)
}

/// Zero-interleaves every line along `axis`, filters with `taps`, and crops
/// to `target_len` samples.
pub fn upsample_conv_axis(cube: &Cube, axis: usize, taps: &[f64], target_len: usize) -> Result<Cube> {
    Ok(Cube::from_transform(upsample_array(
        cube.data(),
        axis,
        taps,
        target_len,
    )?))
}

fn upsample_array(data: &Array3<f64>, axis: usize, taps: &[f64], target_len: usize) -> Result<Array3<f64>> {
    check_axis(axis)?;
    if taps.is_empty() {
        return Err(Error::EmptyTaps);
    }
    let n = data.len_of(Axis(axis));
    if target_len == 0 || coeff_len(target_len, taps.len()) != n {
        return Err(Error::InconsistentLength {
            axis,
            target: target_len,
            coeffs: n,
            taps: taps.len(),
        });
    }
    let mut shape = data.raw_dim();
    shape[axis] = target_len;
    let mut out = Array3::zeros(shape);
    Zip::from(data.lanes(Axis(axis)))
        .and(out.lanes_mut(Axis(axis)))
        .par_for_each(|a, y| upsample_line(a, taps, y));
    Ok(out)
}

/// One analysis step returning only the AAA sub-cube. Detail sub-cubes are
/// never computed.
pub fn dwt3d_step(cube: &Cube, bank: &FilterBank, border: Border) -> Result<Cube> {
    let a0 = downsample_array(cube.data(), 0, bank.lo_d, border)?;
    let a1 = downsample_array(&a0, 1, bank.lo_d, border)?;
    drop(a0);
    let a2 = downsample_array(&a1, 2, bank.lo_d, border)?;
    Ok(Cube::from_transform(a2))
}

/// One synthesis step with all detail inputs taken as zero. Axes are
/// processed 2, 1, 0 and each is cropped to its size in `target_dims`.
pub fn idwt3d_step(approx: &Cube, bank: &FilterBank, target_dims: Dims) -> Result<Cube> {
    let l = bank.len();
    let expected = target_dims.map(|n| coeff_len(n, l));
    if approx.dims() != expected {
        return Err(Error::DimsMismatch {
            expected,
            found: approx.dims(),
        });
    }
    let r2 = upsample_array(approx.data(), 2, bank.lo_r, target_dims[2])?;
    let r1 = upsample_array(&r2, 1, bank.lo_r, target_dims[1])?;
    drop(r2);
    let r0 = upsample_array(&r1, 0, bank.lo_r, target_dims[0])?;
    Ok(Cube::from_transform(r0))
}

/// Low-pass approximation of a single line.
pub fn approx_1d(x: &[f64], taps: &[f64], border: Border) -> Result<Vec<f64>> {
    let a = Array3::from_shape_vec((x.len(), 1, 1), x.to_vec())
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(downsample_array(&a, 0, taps, border)?.into_raw_vec_and_offset().0)
}

/// Zero-detail synthesis of a single line.
pub fn reconstruct_1d(a: &[f64], taps: &[f64], target_len: usize) -> Result<Vec<f64>> {
    let arr = Array3::from_shape_vec((a.len(), 1, 1), a.to_vec())
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(upsample_array(&arr, 0, taps, target_len)?.into_raw_vec_and_offset().0)
}

#[derive(Debug, Clone)]
pub struct MraLevel {
    pub level: usize,
    /// The CA_j coefficient sub-cube.
    pub approx: Cube,
    /// Full-size low-pass reconstruction from `approx`.
    pub recon: Cube,
    /// Input dims of each analysis step that produced this level; entry `s`
    /// is the crop target when undoing step `s + 1`.
    pub step_dims: Vec<Dims>,
}

/// Rebuilds a full-size cube from CA_j by `step_dims.len()` synthesis steps.
pub fn reconstruct_level(approx: &Cube, bank: &FilterBank, step_dims: &[Dims]) -> Result<Cube> {
    let mut cur = approx.clone();
    for &dims in step_dims.iter().rev() {
        cur = idwt3d_step(&cur, bank, dims)?;
    }
    Ok(cur)
}

/// Computes levels `0..=max_level`. Stops early, with a warning, when an
/// axis of the current approximation is shorter than the filter.
///
/// Level 0 is the input itself. Reconstructions carry the input's blank
/// mask so masked voxels stay excluded downstream.
pub fn decompose(cube: &Cube, bank: &FilterBank, max_level: usize, border: Border) -> Result<Vec<MraLevel>> {
    if max_level < 1 {
        return Err(Error::InvalidParameter("max_level must be at least 1".into()));
    }
    let l = bank.len();
    let mut approxes = vec![cube.clone()];
    for level in 1..=max_level {
        let prev = approxes.last().unwrap();
        if prev.dims().iter().any(|&n| n < l) {
            warn!(
                "stopping at level {} of {max_level}: approximation dims {:?} shorter than {l} taps",
                level - 1,
                prev.dims()
            );
            break;
        }
        let next = dwt3d_step(prev, bank, border).map_err(|e| e.at_level(level))?;
        approxes.push(next);
    }
    let dims: Vec<Dims> = approxes.iter().map(Cube::dims).collect();

    approxes
        .into_par_iter()
        .enumerate()
        .map(|(level, approx)| {
            let step_dims = dims[..level].to_vec();
            let recon = if level == 0 {
                cube.clone()
            } else {
                let r = reconstruct_level(&approx, bank, &step_dims).map_err(|e| e.at_level(level))?;
                Cube::with_mask(r.data().clone(), cube.blank_mask().clone())?
            };
            Ok(MraLevel {
                level,
                approx,
                recon,
                step_dims,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::Wavelet;
    use std::f64::consts::SQRT_2;

    fn line_cube(v: &[f64]) -> Cube {
        Cube::from_shape_vec([v.len(), 1, 1], v.to_vec()).unwrap()
    }

    #[test]
    fn haar_constant_line() {
        let haar = Wavelet::HAAR.bank().unwrap();
        let out = conv_downsample_axis(&line_cube(&[1.0; 4]), 0, haar.lo_d, Border::Symmetric).unwrap();
        assert_eq!(out.dims(), [2, 1, 1]);
        for v in out.data() {
            assert!((v - SQRT_2).abs() < 1e-15);
        }
        let back = upsample_conv_axis(&out, 0, haar.lo_r, 4).unwrap();
        for v in back.data() {
            assert!((v - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn haar_impulse_line() {
        // pad [1,0,0,0] to [1 | 1,0,0,0 | 0], convolve with [h,h], keep odd outputs
        let haar = Wavelet::HAAR.bank().unwrap();
        let out = approx_1d(&[1.0, 0.0, 0.0, 0.0], haar.lo_d, Border::Symmetric).unwrap();
        assert_eq!(out, vec![std::f64::consts::FRAC_1_SQRT_2, 0.0]);
    }

    #[test]
    fn empty_taps_and_short_axis() {
        let c = Cube::constant([4, 2, 2], 1.0).unwrap();
        assert!(matches!(conv_downsample_axis(&c, 0, &[], Border::Symmetric), Err(Error::EmptyTaps)));
        let flat = Cube::constant([4, 1, 2], 1.0).unwrap();
        assert!(matches!(
            conv_downsample_axis(&flat, 1, &[0.5, 0.5], Border::Symmetric),
            Err(Error::AxisTooShort { axis: 1, len: 1 })
        ));
        assert!(conv_downsample_axis(&c, 3, &[1.0], Border::Symmetric).is_err());
    }

    #[test]
    fn inconsistent_target_len() {
        let haar = Wavelet::HAAR.bank().unwrap();
        let a = line_cube(&[SQRT_2, SQRT_2]);
        assert!(matches!(
            upsample_conv_axis(&a, 0, haar.lo_r, 7),
            Err(Error::InconsistentLength { target: 7, coeffs: 2, .. })
        ));
        // both 3 and 4 samples map onto 2 Haar coefficients
        assert!(upsample_conv_axis(&a, 0, haar.lo_r, 3).is_ok());
    }

    #[test]
    fn step_sizes_follow_rule() {
        let db5 = Wavelet::DB5.bank().unwrap();
        let c = Cube::constant([41, 20, 9], 2.0).unwrap();
        let a = dwt3d_step(&c, &db5, Border::Symmetric).unwrap();
        assert_eq!(a.dims(), [25, 14, 9]);
        assert!(matches!(
            idwt3d_step(&a, &db5, [41, 20, 12]),
            Err(Error::DimsMismatch { .. })
        ));
    }

    #[test]
    fn haar_constant_cube_gain() {
        let haar = Wavelet::HAAR.bank().unwrap();
        let c = Cube::constant([8, 8, 8], 3.0).unwrap();
        let a = dwt3d_step(&c, &haar, Border::Symmetric).unwrap();
        assert_eq!(a.dims(), [4, 4, 4]);
        for v in a.data() {
            assert!((v - 3.0 * 2f64.powf(1.5)).abs() < 1e-12);
        }
        let back = idwt3d_step(&a, &haar, [8, 8, 8]).unwrap();
        for v in back.data() {
            assert!((v - 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn haar_impulse_spreads_over_block() {
        let haar = Wavelet::HAAR.bank().unwrap();
        let mut data = Array3::zeros((8, 8, 8));
        data[[3, 4, 5]] = 8.0;
        let c = Cube::new(data).unwrap();
        let a = dwt3d_step(&c, &haar, Border::Symmetric).unwrap();
        let r = idwt3d_step(&a, &haar, [8, 8, 8]).unwrap();
        for ((i, j, k), v) in r.data().indexed_iter() {
            let inside = i / 2 == 1 && j / 2 == 2 && k / 2 == 2;
            let want = if inside { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-12, "({i},{j},{k}) = {v}");
        }
    }

    #[test]
    fn decompose_levels_and_early_stop() {
        let db5 = Wavelet::DB5.bank().unwrap();
        let c = Cube::constant([16, 16, 16], 1.5).unwrap();
        assert!(decompose(&c, &db5, 0, Border::Symmetric).is_err());
        // 16 -> 12 -> 10 -> 9: level 4 needs a 9-long axis to be filtered by 10 taps
        let levels = decompose(&c, &db5, 6, Border::Symmetric).unwrap();
        assert_eq!(levels.len(), 4);
        for lv in &levels {
            assert_eq!(lv.recon.dims(), [16, 16, 16]);
            assert_eq!(lv.step_dims.len(), lv.level);
            for v in lv.recon.data() {
                assert!((v - 1.5).abs() < 1e-9, "level {}: {v}", lv.level);
            }
        }
        assert_eq!(levels[0].approx, c);
    }

    #[test]
    fn recon_keeps_blank_mask() {
        let db5 = Wavelet::DB5.bank().unwrap();
        let mut v = vec![1.0; 12 * 12 * 12];
        v[100] = f64::NAN;
        let c = Cube::from_shape_vec([12, 12, 12], v).unwrap();
        let levels = decompose(&c, &db5, 1, Border::Symmetric).unwrap();
        assert_eq!(levels[1].recon.blank_mask(), c.blank_mask());
        assert_eq!(levels[1].recon.data().as_slice().unwrap()[100], 0.0);
    }

    #[test]
    fn periodic_and_zero_modes() {
        let db5 = Wavelet::DB5.bank().unwrap();
        let x = [2.0; 13];
        let p = approx_1d(&x, db5.lo_d, Border::Periodic).unwrap();
        assert!(p.iter().all(|v| (v - 2.0 * SQRT_2).abs() < 1e-12));
        let z = approx_1d(&x, db5.lo_d, Border::Zero).unwrap();
        assert!((z[0] - 2.0 * SQRT_2).abs() > 1e-3);
        assert_eq!("zero".parse::<Border>().unwrap(), Border::Zero);
    }
}
