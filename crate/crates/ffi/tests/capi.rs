use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use mrclump::pipeline::{analyze, load_catalog, load_stats_csv, Input, PipelineConfig};
use mrclump::synth::{generate_synthetic, Noise, SynthSpec};
use mrclump::{Cube, HierarchyTree, Wavelet};
use mrclump_ffi::*;

fn last_error() -> String {
    let p = mrc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn small_synth() -> *mut MrcCube {
    let mut cube = ptr::null_mut();
    let s = unsafe { mrc_cube_synth(20, 24, 24, 3, 0.05, 11, &mut cube) };
    assert_eq!(s, MrcStatus::Ok);
    cube
}

#[test]
fn cube_from_data_round_trips() {
    let mut data: Vec<f64> = (0..24).map(f64::from).collect();
    data[5] = f64::NAN;
    let mut cube = ptr::null_mut();
    unsafe {
        assert_eq!(mrc_cube_from_data(data.as_ptr(), 2, 3, 4, &mut cube), MrcStatus::Ok);
        let mut dims = [0usize; 3];
        assert_eq!(mrc_cube_dims(cube, dims.as_mut_ptr()), MrcStatus::Ok);
        assert_eq!(dims, [2, 3, 4]);

        let mut back = vec![0.0; 24];
        assert_eq!(mrc_cube_copy_data(cube, back.as_mut_ptr(), back.len()), MrcStatus::Ok);
        assert!(back[5].is_nan());
        for (i, (a, b)) in data.iter().zip(&back).enumerate() {
            if i != 5 {
                assert_eq!(a, b);
            }
        }

        let mut short = vec![0.0; 10];
        assert_eq!(
            mrc_cube_copy_data(cube, short.as_mut_ptr(), short.len()),
            MrcStatus::BufferTooSmall
        );
        assert!(last_error().contains("need 24"));
        mrc_cube_free(cube);
    }
}

#[test]
fn null_arguments_are_reported() {
    unsafe {
        let mut cube = ptr::null_mut();
        assert_eq!(mrc_cube_from_data(ptr::null(), 1, 1, 1, &mut cube), MrcStatus::NullArgument);
        assert_eq!(last_error(), "data is NULL");
        assert_eq!(mrc_cube_load_fits(ptr::null(), &mut cube), MrcStatus::NullArgument);
        assert_eq!(mrc_cube_dims(ptr::null(), [0usize; 3].as_mut_ptr()), MrcStatus::NullArgument);
        assert_eq!(mrc_analysis_level_count(ptr::null()), 0);
        mrc_cube_free(ptr::null_mut());
        mrc_analysis_free(ptr::null_mut());
        mrc_string_free(ptr::null_mut());
    }
}

#[test]
fn io_and_format_errors_map_to_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = cstr(dir.path().join("nope.fits").to_str().unwrap());
    let mut cube = ptr::null_mut();
    unsafe {
        assert_eq!(mrc_cube_load_fits(missing.as_ptr(), &mut cube), MrcStatus::Io);
        assert!(cube.is_null());

        let junk = dir.path().join("junk.fits");
        std::fs::write(&junk, vec![b' '; 2880]).unwrap();
        let junk = cstr(junk.to_str().unwrap());
        assert_eq!(mrc_cube_load_fits(junk.as_ptr(), &mut cube), MrcStatus::Format);

        let raw = dir.path().join("short.raw");
        std::fs::write(&raw, [0u8; 16]).unwrap();
        let raw = cstr(raw.to_str().unwrap());
        assert_eq!(mrc_cube_load_raw(raw.as_ptr(), 2, 2, 2, &mut cube), MrcStatus::Format);
        assert!(last_error().contains("size mismatch"));
    }
}

#[test]
fn filter_taps_match_the_library() {
    let name = cstr("db5");
    let mut n = 0usize;
    unsafe {
        assert_eq!(
            mrc_filter_taps(name.as_ptr(), MRC_TAPS_LO_D, ptr::null_mut(), 0, &mut n),
            MrcStatus::Ok
        );
        assert_eq!(n, 10);
        let mut buf = vec![0.0; n];
        for (which, expect) in [
            (MRC_TAPS_LO_D, Wavelet::DB5.bank().unwrap().lo_d),
            (MRC_TAPS_HI_D, Wavelet::DB5.bank().unwrap().hi_d),
            (MRC_TAPS_LO_R, Wavelet::DB5.bank().unwrap().lo_r),
            (MRC_TAPS_HI_R, Wavelet::DB5.bank().unwrap().hi_r),
        ] {
            assert_eq!(mrc_filter_taps(name.as_ptr(), which, buf.as_mut_ptr(), n, &mut n), MrcStatus::Ok);
            assert_eq!(buf, expect);
        }
        assert_eq!(
            mrc_filter_taps(name.as_ptr(), MRC_TAPS_LO_D, buf.as_mut_ptr(), 4, &mut n),
            MrcStatus::BufferTooSmall
        );
        assert_eq!(
            mrc_filter_taps(name.as_ptr(), 9, buf.as_mut_ptr(), n, &mut n),
            MrcStatus::InvalidArgument
        );
        let bad = cstr("db7");
        assert_eq!(
            mrc_filter_taps(bad.as_ptr(), MRC_TAPS_LO_D, buf.as_mut_ptr(), n, &mut n),
            MrcStatus::Unsupported
        );
    }
}

#[test]
fn analysis_matches_core_pipeline() {
    let spec = SynthSpec::blended([20, 24, 24], 3, Noise::PeakFraction(0.05), 11);
    let reference_cube = generate_synthetic(&spec, 11).unwrap();
    let mut config = PipelineConfig::new(Input::Synthetic { spec, seed: 11 });
    config.max_level = 3;
    config.clump.min_pix = 8;
    let reference = analyze(&reference_cube, &config).unwrap();

    let cube = small_synth();
    unsafe {
        let mut opts = mrc_options_default();
        opts.max_level = 3;
        opts.min_pix = 8;
        let mut a = ptr::null_mut();
        assert_eq!(mrc_analyze(cube, &opts, &mut a), MrcStatus::Ok);
        assert_eq!(mrc_analysis_level_count(a), 4);

        for (j, lr) in reference.levels.iter().enumerate() {
            let mut row = MrcLevelRow::default();
            assert_eq!(mrc_analysis_level_row(a, j, &mut row), MrcStatus::Ok);
            let want = reference.report.levels[j];
            assert_eq!(row.level, want.level);
            assert_eq!(row.rms, want.rms);
            assert_eq!(row.entropy, want.entropy);
            assert_eq!(row.n_clumps, want.n_clumps);
            assert_eq!(row.biggest_pix, want.biggest_pix);
            assert_eq!(row.mean_pix, want.mean_pix);
            assert_eq!(row.rms_used, lr.rms_used);

            let mut labels = vec![0i32; 20 * 24 * 24];
            assert_eq!(mrc_analysis_labels(a, j, labels.as_mut_ptr(), labels.len()), MrcStatus::Ok);
            assert_eq!(labels, lr.caa.labels.iter().copied().collect::<Vec<_>>());

            let mut recon = vec![0.0; labels.len()];
            assert_eq!(mrc_analysis_recon(a, j, recon.as_mut_ptr(), recon.len()), MrcStatus::Ok);
            assert_eq!(recon, lr.recon.to_nan_vec());
        }
        let mut row = MrcLevelRow::default();
        assert_eq!(mrc_analysis_level_row(a, 4, &mut row), MrcStatus::InvalidArgument);

        let mut summary = MrcTreeSummary::default();
        assert_eq!(mrc_analysis_tree_summary(a, &mut summary), MrcStatus::Ok);
        assert_eq!(summary.n_nodes, reference.tree.nodes.len());
        assert_eq!(summary.n_edges, reference.tree.edges.len());

        let mut json = ptr::null_mut();
        assert_eq!(mrc_analysis_tree_json(a, &mut json), MrcStatus::Ok);
        let tree = HierarchyTree::from_json(CStr::from_ptr(json).to_str().unwrap()).unwrap();
        assert_eq!(tree, reference.tree);
        mrc_string_free(json);

        let mut dot = ptr::null_mut();
        assert_eq!(mrc_analysis_tree_dot(a, &mut dot), MrcStatus::Ok);
        assert!(CStr::from_ptr(dot).to_str().unwrap().starts_with("digraph"));
        mrc_string_free(dot);

        mrc_analysis_free(a);
        mrc_cube_free(cube);
    }
}

#[test]
fn bad_options_are_rejected() {
    let cube = small_synth();
    let mut a = ptr::null_mut();
    unsafe {
        let mut opts = mrc_options_default();
        opts.neighborhood = 8;
        assert_eq!(mrc_analyze(cube, &opts, &mut a), MrcStatus::InvalidArgument);
        assert!(last_error().contains("neighborhood"));

        let mut opts = mrc_options_default();
        opts.max_level = 0;
        assert_eq!(mrc_analyze(cube, &opts, &mut a), MrcStatus::InvalidArgument);

        let mut opts = mrc_options_default();
        let name = cstr("sym9");
        opts.wavelet = name.as_ptr();
        assert_eq!(mrc_analyze(cube, &opts, &mut a), MrcStatus::Unsupported);
        assert!(a.is_null());
        mrc_cube_free(cube);
    }
}

#[test]
fn exports_reload_with_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = cstr(dir.path().to_str().unwrap());
    let cube = small_synth();
    unsafe {
        let mut opts = mrc_options_default();
        opts.max_level = 2;
        opts.min_pix = 8;
        let mut a = ptr::null_mut();
        assert_eq!(mrc_analyze(cube, &opts, &mut a), MrcStatus::Ok);
        assert_eq!(mrc_analysis_write(a, out.as_ptr()), MrcStatus::Ok);

        let rows = load_stats_csv(dir.path().join("stats.csv")).unwrap();
        assert_eq!(rows.len(), 3);
        let catalog = load_catalog(dir.path().join("catalog.json")).unwrap();
        assert_eq!(catalog.len(), rows.iter().map(|r| r.n_clumps).sum::<usize>());
        for j in 0..3 {
            assert!(dir.path().join(format!("caa_L{j}.raw")).is_file());
            assert!(dir.path().join(format!("recon_L{j}.fits")).is_file());
        }

        let fits = cstr(dir.path().join("cube.fits").to_str().unwrap());
        assert_eq!(mrc_cube_save_fits(cube, fits.as_ptr()), MrcStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(mrc_cube_load_fits(fits.as_ptr(), &mut back), MrcStatus::Ok);
        let raw = cstr(dir.path().join("cube.raw").to_str().unwrap());
        assert_eq!(mrc_cube_save_raw(back, raw.as_ptr()), MrcStatus::Ok);
        let mut again = ptr::null_mut();
        assert_eq!(mrc_cube_load_raw(raw.as_ptr(), 20, 24, 24, &mut again), MrcStatus::Ok);
        let mut x = vec![0.0; 20 * 24 * 24];
        let mut y = vec![0.0; x.len()];
        mrc_cube_copy_data(cube, x.as_mut_ptr(), x.len());
        mrc_cube_copy_data(again, y.as_mut_ptr(), y.len());
        assert_eq!(x, y);

        mrc_cube_free(again);
        mrc_cube_free(back);
        mrc_analysis_free(a);
        mrc_cube_free(cube);
    }
}

#[test]
fn null_options_use_defaults() {
    let data: Vec<f64> = vec![1.0; 12 * 12 * 12];
    let mut cube = ptr::null_mut();
    unsafe {
        assert_eq!(mrc_cube_from_data(data.as_ptr(), 12, 12, 12, &mut cube), MrcStatus::Ok);
        let mut a = ptr::null_mut();
        assert_eq!(mrc_analyze(cube, ptr::null(), &mut a), MrcStatus::Ok);
        let reference = analyze(
            &Cube::constant([12, 12, 12], 1.0).unwrap(),
            &PipelineConfig::new(Input::Fits("unused".into())),
        )
        .unwrap();
        assert_eq!(mrc_analysis_level_count(a), reference.levels.len());
        let mut summary = MrcTreeSummary::default();
        mrc_analysis_tree_summary(a, &mut summary);
        assert_eq!(summary, MrcTreeSummary::default());
        mrc_analysis_free(a);
        mrc_cube_free(cube);
    }
}

#[test]
fn header_compiles_as_c() {
    let header_dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    assert!(header_dir.join("mrclump.h").is_file());
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found, skipping header check");
        return;
    };
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        r#"#include "mrclump.h"
int main(void) {
    MrcCube *cube = NULL;
    MrcStatus s = mrc_cube_synth(8, 8, 8, 1, 0.0, 1, &cube);
    struct MrcOptions o = mrc_options_default();
    MrcAnalysis *a = NULL;
    if (s == MRC_STATUS_OK) s = mrc_analyze(cube, &o, &a);
    struct MrcLevelRow row;
    if (s == MRC_STATUS_OK) s = mrc_analysis_level_row(a, 0, &row);
    mrc_analysis_free(a);
    mrc_cube_free(cube);
    return s == MRC_STATUS_OK ? 0 : 1;
}
"#,
    )
    .unwrap();
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Wextra", "-Werror", "-fsyntax-only", "-I"])
        .arg(&header_dir)
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success(), "header failed to compile");
}

fn which_cc() -> Result<String, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .map(String::from)
        .ok_or(())
}
