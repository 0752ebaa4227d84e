//! Primary-HDU-only FITS reader and writer for 3D floating point cubes.
//!
//! Only `BITPIX` -32 and -64 are understood. No extensions, no compression,
//! no WCS handling. FITS stores NAXIS1 fastest, which is exactly our axis 2,
//! so the payload maps onto a C-order `(NAXIS3, NAXIS2, NAXIS1)` array
//! without reordering.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array3;

use crate::cube::{Cube, Meta};
use crate::error::{Error, Result};

const BLOCK: usize = 2880;
const CARD: usize = 80;

/// Keys that describe the data layout. They are regenerated on write and
/// never copied from `meta`.
const STRUCTURAL: &[&str] = &[
    "SIMPLE", "BITPIX", "NAXIS", "NAXIS1", "NAXIS2", "NAXIS3", "EXTEND", "BSCALE", "BZERO", "END",
];

pub fn load_fits(path: impl AsRef<Path>) -> Result<Cube> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_fits(&bytes)
}

/// Parses an in-memory FITS file.
pub fn parse_fits(bytes: &[u8]) -> Result<Cube> {
    let (cards, data_start) = read_header(bytes)?;

    let first = cards.first().map(|(k, _)| k.as_str());
    if first != Some("SIMPLE") {
        return Err(Error::Header("first card must be SIMPLE".into()));
    }
    let get = |key: &str| cards.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
    let get_int = |key: &str| -> Result<i64> {
        let raw = get(key).ok_or_else(|| Error::Header(format!("missing {key}")))?;
        raw.trim()
            .parse::<i64>()
            .map_err(|_| Error::Header(format!("{key} is not an integer: {raw:?}")))
    };
    let get_float = |key: &str, default: f64| -> Result<f64> {
        match get(key) {
            None => Ok(default),
            Some(raw) => parse_fits_float(raw)
                .ok_or_else(|| Error::Header(format!("{key} is not a number: {raw:?}"))),
        }
    };

    let bitpix = get_int("BITPIX")?;
    let naxis = get_int("NAXIS")?;
    if naxis != 3 {
        return Err(Error::UnsupportedDimensionality(naxis));
    }
    if bitpix != -32 && bitpix != -64 {
        return Err(Error::UnsupportedBitpix(bitpix));
    }
    let mut naxes = [0usize; 3];
    for (i, n) in naxes.iter_mut().enumerate() {
        let v = get_int(&format!("NAXIS{}", i + 1))?;
        if v <= 0 {
            return Err(Error::Header(format!("NAXIS{} must be positive, got {v}", i + 1)));
        }
        *n = v as usize;
    }
    let bscale = get_float("BSCALE", 1.0)?;
    let bzero = get_float("BZERO", 0.0)?;

    let count = naxes.iter().product::<usize>();
    let width = (bitpix.unsigned_abs() / 8) as usize;
    let expected = count * width;
    let payload = &bytes[data_start.min(bytes.len())..];
    if payload.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: payload.len(),
        });
    }

    let scale = |v: f64| if v.is_nan() { v } else { v * bscale + bzero };
    let values: Vec<f64> = if width == 8 {
        payload[..expected]
            .chunks_exact(8)
            .map(|c| scale(f64::from_be_bytes(c.try_into().unwrap())))
            .collect()
    } else {
        payload[..expected]
            .chunks_exact(4)
            .map(|c| scale(f32::from_be_bytes(c.try_into().unwrap()) as f64))
            .collect()
    };

    let dims = [naxes[2], naxes[1], naxes[0]];
    let data = Array3::from_shape_vec(dims, values).expect("length checked above");
    let mut meta = Meta::new();
    for (k, v) in cards {
        match meta.get_mut(&k) {
            // COMMENT / HISTORY style repeats
            Some(existing) => {
                existing.push('\n');
                existing.push_str(&v);
            }
            None => {
                meta.insert(k, v);
            }
        }
    }
    Ok(Cube::from_nan_blanks(data)?.with_meta(meta))
}

/// Returns `(key, value)` pairs in header order and the byte offset of the data unit.
fn read_header(bytes: &[u8]) -> Result<(Vec<(String, String)>, usize)> {
    let mut cards = Vec::new();
    let mut offset = 0;
    loop {
        if offset + BLOCK > bytes.len() {
            return Err(Error::Header("no END card before end of file".into()));
        }
        for card in bytes[offset..offset + BLOCK].chunks_exact(CARD) {
            let text = std::str::from_utf8(card)
                .map_err(|_| Error::Header("non-ASCII header card".into()))?;
            let key = text[..8].trim_end().to_string();
            if key == "END" {
                return Ok((cards, offset + BLOCK));
            }
            if key.is_empty() {
                continue;
            }
            let value = if &text[8..10] == "= " {
                card_value(&text[10..])
            } else {
                text[8..].trim().to_string()
            };
            cards.push((key, value));
        }
        offset += BLOCK;
    }
}

/// Value field with any trailing `/ comment` removed. String values keep
/// their quotes so they can be written back verbatim.
fn card_value(field: &str) -> String {
    let trimmed = field.trim_start();
    if trimmed.starts_with('\'') {
        let b = trimmed.as_bytes();
        let mut i = 1;
        while i < b.len() {
            if b[i] == b'\'' {
                if i + 1 < b.len() && b[i + 1] == b'\'' {
                    i += 2;
                    continue;
                }
                return trimmed[..=i].to_string();
            }
            i += 1;
        }
        trimmed.trim_end().to_string()
    } else {
        match trimmed.find('/') {
            Some(p) => trimmed[..p].trim().to_string(),
            None => trimmed.trim().to_string(),
        }
    }
}

fn parse_fits_float(raw: &str) -> Option<f64> {
    raw.trim().replace(['D', 'd'], "E").parse().ok()
}

/// Quotes a string as a FITS character value.
pub fn fits_string(s: &str) -> String {
    format!("'{:<8}'", s.replace('\'', "''"))
}

/// Writes the cube as a BITPIX=-64 primary HDU. Blank voxels become NaN.
pub fn save_fits(cube: &Cube, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = encode_fits(cube);
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}

pub fn encode_fits(cube: &Cube) -> Vec<u8> {
    let [d0, d1, d2] = cube.dims();
    let mut header = String::new();
    let mut push = |card: String| {
        let mut c: String = card.chars().take(CARD).collect();
        while c.len() < CARD {
            c.push(' ');
        }
        header.push_str(&c);
    };
    push(format!("{:<8}= {:>20}", "SIMPLE", "T"));
    push(format!("{:<8}= {:>20}", "BITPIX", -64));
    push(format!("{:<8}= {:>20}", "NAXIS", 3));
    push(format!("{:<8}= {:>20}", "NAXIS1", d2));
    push(format!("{:<8}= {:>20}", "NAXIS2", d1));
    push(format!("{:<8}= {:>20}", "NAXIS3", d0));
    for (k, v) in cube.meta() {
        if STRUCTURAL.contains(&k.as_str()) || k.len() > 8 || !is_fits_key(k) {
            continue;
        }
        if k == "COMMENT" || k == "HISTORY" {
            for line in v.lines() {
                push(format!("{k:<8}{line}"));
            }
        } else if v.len() <= 70 && !v.contains('\n') {
            push(format!("{k:<8}= {v:>20}"));
        }
    }
    push("END".to_string());
    let mut bytes = header.into_bytes();
    pad_to_block(&mut bytes, b' ');

    bytes.reserve(cube.len() * 8 + BLOCK);
    for v in cube.to_nan_vec() {
        bytes.extend_from_slice(&v.to_be_bytes());
    }
    pad_to_block(&mut bytes, 0);
    bytes
}

fn is_fits_key(k: &str) -> bool {
    !k.is_empty()
        && k
            .bytes()
            .all(|b| b.is_ascii_uppercase() || b.is_ascii_digit() || b == b'-' || b == b'_')
}

fn pad_to_block(bytes: &mut Vec<u8>, fill: u8) {
    let rem = bytes.len() % BLOCK;
    if rem != 0 {
        bytes.resize(bytes.len() + BLOCK - rem, fill);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(cards: &[&str]) -> Vec<u8> {
        let mut s = String::new();
        for c in cards {
            s.push_str(&format!("{c:<80}"));
        }
        s.push_str(&format!("{:<80}", "END"));
        let mut b = s.into_bytes();
        pad_to_block(&mut b, b' ');
        b
    }

    fn cube_file(bitpix: i32, naxis: usize, values: &[f64]) -> Vec<u8> {
        let mut cards = vec![
            "SIMPLE  =                    T".to_string(),
            format!("BITPIX  = {bitpix:>20}"),
            format!("NAXIS   = {naxis:>20}"),
        ];
        for i in 1..=naxis {
            cards.push(format!("NAXIS{i}  = {:>20}", 2));
        }
        let refs: Vec<&str> = cards.iter().map(String::as_str).collect();
        let mut b = header(&refs);
        for v in values {
            if bitpix == -64 {
                b.extend_from_slice(&v.to_be_bytes());
            } else {
                b.extend_from_slice(&(*v as f32).to_be_bytes());
            }
        }
        pad_to_block(&mut b, 0);
        b
    }

    #[test]
    fn reads_minimal_cube() {
        let c = parse_fits(&cube_file(-64, 3, &[1.0; 8])).unwrap();
        assert_eq!(c.dims(), [2, 2, 2]);
        assert!(c.data().iter().all(|&v| v == 1.0));
        assert_eq!(c.blank_count(), 0);
    }

    #[test]
    fn nan_voxel_is_blank() {
        let mut v = [1.0; 8];
        v[3] = f64::NAN;
        let c = parse_fits(&cube_file(-64, 3, &v)).unwrap();
        assert!(c.is_blank([0, 1, 1]));
        assert_eq!(c.data()[[0, 1, 1]], 0.0);
        assert_eq!(c.blank_count(), 1);
    }

    #[test]
    fn reads_float32() {
        let v: Vec<f64> = (0..8).map(|i| i as f64 * 0.5).collect();
        let c = parse_fits(&cube_file(-32, 3, &v)).unwrap();
        assert_eq!(c.data().iter().copied().collect::<Vec<_>>(), v);
    }

    #[test]
    fn axis_order_is_naxis3_first() {
        let cards = [
            "SIMPLE  =                    T",
            "BITPIX  =                  -64",
            "NAXIS   =                    3",
            "NAXIS1  =                    4",
            "NAXIS2  =                    3",
            "NAXIS3  =                    2",
        ];
        let mut b = header(&cards);
        for i in 0..24 {
            b.extend_from_slice(&(i as f64).to_be_bytes());
        }
        let c = parse_fits(&b).unwrap();
        assert_eq!(c.dims(), [2, 3, 4]);
        // NAXIS1 index 3, NAXIS2 index 1, NAXIS3 index 1
        assert_eq!(c.data()[[1, 1, 3]], (3 + 4 + 12) as f64);
    }

    #[test]
    fn applies_bscale_bzero() {
        let cards = [
            "SIMPLE  =                    T",
            "BITPIX  =                  -64",
            "NAXIS   =                    3",
            "NAXIS1  =                    2",
            "NAXIS2  =                    2",
            "NAXIS3  =                    2",
            "BSCALE  =                  2.0 / scale",
            "BZERO   =               1.0D0",
            "OBJECT  = 'Orion KL'           / target",
        ];
        let mut b = header(&cards);
        for _ in 0..8 {
            b.extend_from_slice(&3.0f64.to_be_bytes());
        }
        let c = parse_fits(&b).unwrap();
        assert!(c.data().iter().all(|&v| v == 7.0));
        assert_eq!(c.meta()["OBJECT"], "'Orion KL'");
        assert_eq!(c.meta()["BSCALE"], "2.0");
    }

    #[test]
    fn distinct_errors() {
        assert!(matches!(
            parse_fits(&cube_file(-64, 2, &[1.0; 4])),
            Err(Error::UnsupportedDimensionality(2))
        ));
        assert!(matches!(
            parse_fits(&cube_file(16, 3, &[])),
            Err(Error::UnsupportedBitpix(16))
        ));
        let mut b = cube_file(-64, 3, &[]);
        b.truncate(BLOCK + 16);
        assert!(matches!(parse_fits(&b), Err(Error::Truncated { .. })));
        assert!(matches!(parse_fits(b"SIMPLE"), Err(Error::Header(_))));
        assert!(matches!(
            load_fits("/nonexistent/cube.fits"),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn unsupported_dimensionality_message() {
        let err = parse_fits(&cube_file(-64, 2, &[1.0; 4])).unwrap_err();
        assert!(err.to_string().contains("unsupported dimensionality"));
    }

    #[test]
    fn write_read_round_trip() {
        let v: Vec<f64> = (0..24).map(|i| (i as f64).sin() * 1e3).collect();
        let mut c = Cube::from_shape_vec([2, 3, 4], v).unwrap();
        c.meta_mut().insert("WAVELET".into(), fits_string("db5"));
        c.meta_mut().insert("not a key".into(), "x".into());
        let back = parse_fits(&encode_fits(&c)).unwrap();
        assert_eq!(back.data(), c.data());
        assert_eq!(back.meta()["WAVELET"], "'db5     '");
        assert!(!back.meta().contains_key("not a key"));
        assert_eq!(encode_fits(&c).len() % BLOCK, 0);
    }
}
