//! C ABI for mrclump.
//!
//! Cubes and analyses are opaque heap handles owned by the caller and
//! released with their `_free` function. Every fallible call returns an
//! [`MrcStatus`]; on failure a message is available from
//! [`mrc_last_error`] on the same thread until the next failing call.
//! Strings handed out by the library are freed with [`mrc_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;
use std::sync::Arc;

use mrclump::io::{load_fits, load_raw, save_fits, save_raw};
use mrclump::pipeline::{analyze, write_exports, Analysis, Input, PipelineConfig};
use mrclump::synth::{generate_synthetic, Noise, SynthSpec};
use mrclump::{Border, Cube, Error, LinkMode, Neighborhood, RmsMode, Wavelet};

/// Result of every fallible call.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MrcStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidArgument = 2,
    Io = 3,
    Format = 4,
    Unsupported = 5,
    Numeric = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

pub const MRC_RMS_VARIABLE: i32 = 0;
pub const MRC_RMS_FIXED: i32 = 1;
pub const MRC_LINK_CENTROID: i32 = 0;
pub const MRC_LINK_PEAK: i32 = 1;
pub const MRC_BORDER_SYMMETRIC: i32 = 0;
pub const MRC_BORDER_PERIODIC: i32 = 1;
pub const MRC_BORDER_ZERO: i32 = 2;
pub const MRC_TAPS_LO_D: i32 = 0;
pub const MRC_TAPS_HI_D: i32 = 1;
pub const MRC_TAPS_LO_R: i32 = 2;
pub const MRC_TAPS_HI_R: i32 = 3;

/// Opaque cube handle.
pub struct MrcCube(Cube);

/// Opaque result of [`mrc_analyze`].
pub struct MrcAnalysis {
    analysis: Analysis,
    config: PipelineConfig,
}

/// Pipeline settings. Start from [`mrc_options_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct MrcOptions {
    /// Wavelet name such as "db5"; NULL means db5.
    pub wavelet: *const c_char,
    pub max_level: u32,
    /// `MRC_RMS_VARIABLE` or `MRC_RMS_FIXED`.
    pub rms_mode: i32,
    pub noise_mult: f64,
    pub min_dip_mult: f64,
    pub min_pix: u32,
    /// 6 or 26.
    pub neighborhood: u32,
    pub bins: u32,
    /// `MRC_LINK_CENTROID` or `MRC_LINK_PEAK`.
    pub link_mode: i32,
    /// One of the `MRC_BORDER_*` constants.
    pub border: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MrcLevelRow {
    pub level: usize,
    pub rms: f64,
    pub entropy: f64,
    pub n_clumps: usize,
    pub biggest_pix: usize,
    pub mean_pix: f64,
    /// RMS handed to the clump finder at this level.
    pub rms_used: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MrcTreeSummary {
    pub n_nodes: usize,
    pub n_edges: usize,
    pub n_isolated: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Fail(MrcStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn status_of(e: &Error) -> MrcStatus {
    match e {
        Error::Io { .. } => MrcStatus::Io,
        Error::UnsupportedDimensionality(_)
        | Error::UnsupportedBitpix(_)
        | Error::Truncated { .. }
        | Error::Header(_)
        | Error::SizeMismatch { .. }
        | Error::Serde(_)
        | Error::Csv(_) => MrcStatus::Format,
        Error::UnsupportedWavelet(_) => MrcStatus::Unsupported,
        Error::AllBlank | Error::ZeroIntensity => MrcStatus::Numeric,
        Error::AtLevel { source, .. } => status_of(source),
        _ => MrcStatus::InvalidArgument,
    }
}

fn null(what: &str) -> Fail {
    Fail(MrcStatus::NullArgument, format!("{what} is NULL"))
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(MrcStatus::InvalidArgument, msg.into())
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MrcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MrcStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("panic: {msg}"));
            MrcStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, Fail> {
    str_arg(p, what).map(PathBuf::from)
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

fn into_handle<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

fn into_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| invalid("string contains an interior NUL"))
}

unsafe fn copy_out<T: Copy>(src: &[T], buf: *mut T, len: usize) -> Result<(), Fail> {
    if buf.is_null() {
        return Err(null("buffer"));
    }
    if len < src.len() {
        return Err(Fail(
            MrcStatus::BufferTooSmall,
            format!("buffer holds {len} elements, need {}", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mrc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mrc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mrc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a cube from `d0*d1*d2` doubles in C order (axis 2 fastest). NaN
/// marks a blank voxel.
///
/// # Safety
/// `data` must point to `d0*d1*d2` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mrc_cube_from_data(
    data: *const f64,
    d0: usize,
    d1: usize,
    d2: usize,
    out: *mut *mut MrcCube,
) -> MrcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        if data.is_null() {
            return Err(null("data"));
        }
        let n = d0
            .checked_mul(d1)
            .and_then(|v| v.checked_mul(d2))
            .ok_or_else(|| invalid("dims overflow"))?;
        let values = std::slice::from_raw_parts(data, n).to_vec();
        let cube = Cube::from_shape_vec([d0, d1, d2], values)?;
        *out = into_handle(MrcCube(cube));
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mrc_cube_load_fits(path: *const c_char, out: *mut *mut MrcCube) -> MrcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cube = load_fits(path_arg(path, "path")?)?;
        *out = into_handle(MrcCube(cube));
        Ok(())
    })
}

/// Loads little-endian float64 samples with the given dims.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mrc_cube_load_raw(
    path: *const c_char,
    d0: usize,
    d1: usize,
    d2: usize,
    out: *mut *mut MrcCube,
) -> MrcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cube = load_raw(path_arg(path, "path")?, [d0, d1, d2])?;
        *out = into_handle(MrcCube(cube));
        Ok(())
    })
}

/// Seeded cube of `n_gaussians` blended Gaussians plus white noise whose
/// standard deviation is `noise_fraction` times the noiseless peak.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mrc_cube_synth(
    d0: usize,
    d1: usize,
    d2: usize,
    n_gaussians: usize,
    noise_fraction: f64,
    seed: u64,
    out: *mut *mut MrcCube,
) -> MrcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let spec = SynthSpec::blended([d0, d1, d2], n_gaussians, Noise::PeakFraction(noise_fraction), seed);
        let cube = generate_synthetic(&spec, seed)?;
        *out = into_handle(MrcCube(cube));
        Ok(())
    })
}

/// # Safety
/// `cube` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mrc_cube_save_fits(cube: *const MrcCube, path: *const c_char) -> MrcStatus {
    guard(|| {
        let cube = ref_arg(cube, "cube")?;
        save_fits(&cube.0, path_arg(path, "path")?)?;
        Ok(())
    })
}

/// # Safety
/// `cube` must be a live handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mrc_cube_save_raw(cube: *const MrcCube, path: *const c_char) -> MrcStatus {
    guard(|| {
        let cube = ref_arg(cube, "cube")?;
        save_raw(&cube.0, path_arg(path, "path")?)?;
        Ok(())
    })
}

/// Writes the three axis lengths to `dims`.
///
/// # Safety
/// `cube` must be a live handle; `dims` must have room for 3 values.
#[no_mangle]
pub unsafe extern "C" fn mrc_cube_dims(cube: *const MrcCube, dims: *mut usize) -> MrcStatus {
    guard(|| {
        let cube = ref_arg(cube, "cube")?;
        copy_out(&cube.0.dims(), dims, 3)
    })
}

/// Copies the samples in C order, NaN for blanks.
///
/// # Safety
/// `cube` must be a live handle; `buf` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mrc_cube_copy_data(cube: *const MrcCube, buf: *mut f64, len: usize) -> MrcStatus {
    guard(|| {
        let cube = ref_arg(cube, "cube")?;
        copy_out(&cube.0.to_nan_vec(), buf, len)
    })
}

/// # Safety
/// `cube` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn mrc_cube_free(cube: *mut MrcCube) {
    if !cube.is_null() {
        drop(Box::from_raw(cube));
    }
}

/// Copies one filter of a wavelet bank. `which` is one of the
/// `MRC_TAPS_*` constants. The tap count is always written to `out_len`;
/// pass a NULL `buf` to query it.
///
/// # Safety
/// `wavelet` must be a NUL-terminated string, `out_len` writable and `buf`
/// NULL or valid for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn mrc_filter_taps(
    wavelet: *const c_char,
    which: i32,
    buf: *mut f64,
    cap: usize,
    out_len: *mut usize,
) -> MrcStatus {
    guard(|| {
        let out_len = out_arg(out_len, "out_len")?;
        let w: Wavelet = str_arg(wavelet, "wavelet")?.parse()?;
        let bank = w.bank()?;
        let taps = match which {
            MRC_TAPS_LO_D => bank.lo_d,
            MRC_TAPS_HI_D => bank.hi_d,
            MRC_TAPS_LO_R => bank.lo_r,
            MRC_TAPS_HI_R => bank.hi_r,
            _ => return Err(invalid(format!("unknown filter selector {which}"))),
        };
        *out_len = taps.len();
        if buf.is_null() {
            return Ok(());
        }
        copy_out(taps, buf, cap)
    })
}

#[no_mangle]
pub extern "C" fn mrc_options_default() -> MrcOptions {
    let config = PipelineConfig::new(Input::Memory(Arc::new(
        Cube::constant([1, 1, 1], 0.0).expect("1x1x1 cube"),
    )));
    MrcOptions {
        wavelet: ptr::null(),
        max_level: config.max_level as u32,
        rms_mode: MRC_RMS_VARIABLE,
        noise_mult: config.clump.noise_mult,
        min_dip_mult: config.clump.min_dip_mult,
        min_pix: config.clump.min_pix as u32,
        neighborhood: 26,
        bins: config.bins as u32,
        link_mode: MRC_LINK_CENTROID,
        border: MRC_BORDER_SYMMETRIC,
    }
}

unsafe fn build_config(cube: &Cube, opts: &MrcOptions) -> Result<PipelineConfig, Fail> {
    let mut config = PipelineConfig::new(Input::Memory(Arc::new(cube.clone())));
    if !opts.wavelet.is_null() {
        config.wavelet = str_arg(opts.wavelet, "wavelet")?.parse()?;
    }
    config.max_level = opts.max_level as usize;
    config.rms_mode = match opts.rms_mode {
        MRC_RMS_VARIABLE => RmsMode::Variable,
        MRC_RMS_FIXED => RmsMode::Fixed,
        v => return Err(invalid(format!("unknown rms mode {v}"))),
    };
    config.clump.noise_mult = opts.noise_mult;
    config.clump.min_dip_mult = opts.min_dip_mult;
    config.clump.min_pix = opts.min_pix as usize;
    config.clump.neighborhood = match opts.neighborhood {
        6 => Neighborhood::Faces,
        26 => Neighborhood::Full,
        v => return Err(invalid(format!("neighborhood must be 6 or 26, got {v}"))),
    };
    config.bins = opts.bins as usize;
    config.link_mode = match opts.link_mode {
        MRC_LINK_CENTROID => LinkMode::Centroid,
        MRC_LINK_PEAK => LinkMode::Peak,
        v => return Err(invalid(format!("unknown link mode {v}"))),
    };
    config.border = match opts.border {
        MRC_BORDER_SYMMETRIC => Border::Symmetric,
        MRC_BORDER_PERIODIC => Border::Periodic,
        MRC_BORDER_ZERO => Border::Zero,
        v => return Err(invalid(format!("unknown border mode {v}"))),
    };
    config.validate()?;
    Ok(config)
}

/// Decomposes, segments and links `cube`. `opts` may be NULL for defaults.
///
/// # Safety
/// `cube` must be a live handle, `opts` NULL or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mrc_analyze(
    cube: *const MrcCube,
    opts: *const MrcOptions,
    out: *mut *mut MrcAnalysis,
) -> MrcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cube = ref_arg(cube, "cube")?;
        let opts = opts.as_ref().copied().unwrap_or_else(|| mrc_options_default());
        let config = build_config(&cube.0, &opts)?;
        let analysis = analyze(&cube.0, &config)?;
        *out = into_handle(MrcAnalysis { analysis, config });
        Ok(())
    })
}

/// Number of levels computed, including level 0. Returns 0 for NULL.
///
/// # Safety
/// `a` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mrc_analysis_level_count(a: *const MrcAnalysis) -> usize {
    a.as_ref().map_or(0, |a| a.analysis.levels.len())
}

unsafe fn level_of<'a>(a: *const MrcAnalysis, level: usize) -> Result<&'a mrclump::pipeline::LevelResult, Fail> {
    let a = ref_arg(a, "analysis")?;
    a.analysis
        .levels
        .get(level)
        .ok_or_else(|| invalid(format!("level {level} out of range (have {})", a.analysis.levels.len())))
}

/// # Safety
/// `a` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mrc_analysis_level_row(a: *const MrcAnalysis, level: usize, out: *mut MrcLevelRow) -> MrcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let lv = level_of(a, level)?;
        let row = ref_arg(a, "analysis")?.analysis.report.levels[level];
        *out = MrcLevelRow {
            level: row.level,
            rms: row.rms,
            entropy: row.entropy,
            n_clumps: row.n_clumps,
            biggest_pix: row.biggest_pix,
            mean_pix: row.mean_pix,
            rms_used: lv.rms_used,
        };
        Ok(())
    })
}

/// Copies the clump labels of `level` in C order; 0 is background.
///
/// # Safety
/// `a` must be a live handle; `buf` must have room for `len` values.
#[no_mangle]
pub unsafe extern "C" fn mrc_analysis_labels(a: *const MrcAnalysis, level: usize, buf: *mut i32, len: usize) -> MrcStatus {
    guard(|| {
        let lv = level_of(a, level)?;
        let labels = lv.caa.labels.as_standard_layout();
        copy_out(labels.as_slice().expect("standard layout"), buf, len)
    })
}

/// Copies the full-size reconstruction of `level`, NaN for blanks.
///
/// # Safety
/// `a` must be a live handle; `buf` must have room for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mrc_analysis_recon(a: *const MrcAnalysis, level: usize, buf: *mut f64, len: usize) -> MrcStatus {
    guard(|| {
        let lv = level_of(a, level)?;
        copy_out(&lv.recon.to_nan_vec(), buf, len)
    })
}

/// # Safety
/// `a` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mrc_analysis_tree_summary(a: *const MrcAnalysis, out: *mut MrcTreeSummary) -> MrcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let t = ref_arg(a, "analysis")?.analysis.report.tree;
        *out = MrcTreeSummary {
            n_nodes: t.n_nodes,
            n_edges: t.n_edges,
            n_isolated: t.n_isolated,
        };
        Ok(())
    })
}

/// Hierarchy as JSON. Free the string with [`mrc_string_free`].
///
/// # Safety
/// `a` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mrc_analysis_tree_json(a: *const MrcAnalysis, out: *mut *mut c_char) -> MrcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let json = ref_arg(a, "analysis")?.analysis.tree.to_json()?;
        *out = into_c_string(json)?;
        Ok(())
    })
}

/// Hierarchy as Graphviz DOT. Free the string with [`mrc_string_free`].
///
/// # Safety
/// `a` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn mrc_analysis_tree_dot(a: *const MrcAnalysis, out: *mut *mut c_char) -> MrcStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = into_c_string(ref_arg(a, "analysis")?.analysis.tree.to_dot())?;
        Ok(())
    })
}

/// Writes every export (stats, catalog, CAAs, FITS reconstructions, trees)
/// into `dir`, creating it if needed.
///
/// # Safety
/// `a` must be a live handle; `dir` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mrc_analysis_write(a: *const MrcAnalysis, dir: *const c_char) -> MrcStatus {
    guard(|| {
        let a = ref_arg(a, "analysis")?;
        write_exports(&a.analysis, &a.config, &path_arg(dir, "dir")?)?;
        Ok(())
    })
}

/// # Safety
/// `a` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn mrc_analysis_free(a: *mut MrcAnalysis) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}
