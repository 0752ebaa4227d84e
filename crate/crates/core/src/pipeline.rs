//! End-to-end run: load or synthesize a cube, decompose it, segment every
//! level, link the levels and write the requested exports.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use log::{info, warn};
use ndarray::Array3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clumping::{clump_metrics, fellwalker, Caa, Clump, ClumpParams, Neighborhood};
use crate::cube::{Cube, Dims};
use crate::error::{Error, Result};
use crate::hierarchy::{link_levels, node_id, HierarchyTree, LevelClumps, LinkMode};
use crate::io::{fits, load_fits, load_raw, save_fits, save_labels_raw, save_raw};
use crate::mra::{decompose, Border};
use crate::stats::{sigma_clipped_rms, LevelStats, DEFAULT_BINS};
use crate::synth::{generate_synthetic, SynthSpec};
use crate::wavelet::Wavelet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RmsMode {
    /// Recompute the RMS on every reconstruction.
    #[default]
    Variable,
    /// Use the original cube's RMS at every level.
    Fixed,
}

impl FromStr for RmsMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "variable" => Ok(RmsMode::Variable),
            "fixed" => Ok(RmsMode::Fixed),
            _ => Err(Error::InvalidParameter(format!("unknown rms mode {s:?}"))),
        }
    }
}

/// How the clumping scale is measured on a cube.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum RmsEstimator {
    /// Plain root mean square of the whole signal.
    #[default]
    Signal,
    /// Standard deviation after kappa-sigma clipping.
    SigmaClipped { kappa: f64, max_iter: usize },
}

impl RmsEstimator {
    fn measure(self, cube: &Cube, stats: &LevelStats) -> Result<f64> {
        match self {
            RmsEstimator::Signal => Ok(stats.rms),
            RmsEstimator::SigmaClipped { kappa, max_iter } => sigma_clipped_rms(cube, kappa, max_iter),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CubeFormat {
    #[default]
    Fits,
    Raw,
}

impl FromStr for CubeFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fits" => Ok(CubeFormat::Fits),
            "raw" => Ok(CubeFormat::Raw),
            _ => Err(Error::InvalidParameter(format!("unknown cube format {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Input {
    Fits(PathBuf),
    Raw { path: PathBuf, dims: Dims },
    Synthetic { spec: SynthSpec, seed: u64 },
    /// A cube already in memory, for library callers.
    #[serde(skip)]
    Memory(Arc<Cube>),
}

impl Input {
    pub fn load(&self) -> Result<Cube> {
        match self {
            Input::Fits(path) => load_fits(path),
            Input::Raw { path, dims } => load_raw(path, *dims),
            Input::Synthetic { spec, seed } => generate_synthetic(spec, *seed),
            Input::Memory(cube) => Ok(Cube::clone(cube)),
        }
    }
}

/// Clumping parameters except the RMS, which the pipeline supplies per level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClumpSettings {
    pub noise_mult: f64,
    pub min_dip_mult: f64,
    pub min_pix: usize,
    pub neighborhood: Neighborhood,
}

impl Default for ClumpSettings {
    fn default() -> Self {
        let p = ClumpParams::with_rms(1.0);
        ClumpSettings {
            noise_mult: p.noise_mult,
            min_dip_mult: p.min_dip_mult,
            min_pix: p.min_pix,
            neighborhood: p.neighborhood,
        }
    }
}

impl ClumpSettings {
    pub fn with_rms(self, rms: f64) -> ClumpParams {
        ClumpParams {
            rms,
            noise_mult: self.noise_mult,
            min_dip_mult: self.min_dip_mult,
            min_pix: self.min_pix,
            neighborhood: self.neighborhood,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Emit {
    pub recon: bool,
    pub caa: bool,
    pub catalog: bool,
    pub stats: bool,
    pub tree_dot: bool,
    pub tree_json: bool,
}

impl Emit {
    pub const ALL: Emit = Emit {
        recon: true,
        caa: true,
        catalog: true,
        stats: true,
        tree_dot: true,
        tree_json: true,
    };
    pub const NONE: Emit = Emit {
        recon: false,
        caa: false,
        catalog: false,
        stats: false,
        tree_dot: false,
        tree_json: false,
    };

    /// Parses a comma-separated list such as `stats,tree-dot`.
    pub fn parse_list(list: &str) -> Result<Emit> {
        let mut e = Emit::NONE;
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match item {
                "recon" => e.recon = true,
                "caa" => e.caa = true,
                "catalog" => e.catalog = true,
                "stats" => e.stats = true,
                "tree-dot" => e.tree_dot = true,
                "tree-json" => e.tree_json = true,
                "all" => e = Emit::ALL,
                "none" => {}
                _ => return Err(Error::InvalidParameter(format!("unknown export {item:?}"))),
            }
        }
        Ok(e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub input: Input,
    pub wavelet: Wavelet,
    pub border: Border,
    pub max_level: usize,
    pub rms_mode: RmsMode,
    pub rms_estimator: RmsEstimator,
    pub clump: ClumpSettings,
    pub bins: usize,
    pub link_mode: LinkMode,
    pub out_dir: Option<PathBuf>,
    pub emit: Emit,
    pub recon_format: CubeFormat,
}

impl PipelineConfig {
    pub fn new(input: Input) -> Self {
        PipelineConfig {
            input,
            wavelet: Wavelet::DB5,
            border: Border::Symmetric,
            max_level: 4,
            rms_mode: RmsMode::Variable,
            rms_estimator: RmsEstimator::Signal,
            clump: ClumpSettings::default(),
            bins: DEFAULT_BINS,
            link_mode: LinkMode::Centroid,
            out_dir: None,
            emit: Emit::ALL,
            recon_format: CubeFormat::Fits,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_level < 1 {
            return Err(Error::InvalidParameter("max_level must be at least 1".into()));
        }
        if self.bins < 2 {
            return Err(Error::InvalidParameter("bins must be at least 2".into()));
        }
        self.wavelet.bank()?;
        self.clump.with_rms(1.0).validate()
    }
}

/// One row of `stats.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub level: usize,
    pub rms: f64,
    pub entropy: f64,
    pub n_clumps: usize,
    pub biggest_pix: usize,
    pub mean_pix: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeSummary {
    pub n_nodes: usize,
    pub n_edges: usize,
    pub n_isolated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub wavelet: String,
    pub rms_mode: RmsMode,
    pub levels: Vec<LevelRow>,
    /// RMS handed to the clump finder at each level.
    pub rms_used: Vec<f64>,
    pub tree: TreeSummary,
}

#[derive(Debug, Clone)]
pub struct LevelResult {
    pub level: usize,
    pub recon: Cube,
    pub stats: LevelStats,
    pub rms_used: f64,
    pub caa: Caa,
    pub clumps: Vec<Clump>,
}

/// Everything a run computes, for callers that want more than the report.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub levels: Vec<LevelResult>,
    pub tree: HierarchyTree,
    pub report: PipelineReport,
}

/// Catalog record; one per clump per level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub node: String,
    pub level: usize,
    pub id: u32,
    pub n_pix: usize,
    pub peak_pos: Dims,
    pub peak_val: f64,
    pub total_intensity: f64,
    pub centroid: [f64; 3],
}

impl From<&Clump> for CatalogEntry {
    fn from(c: &Clump) -> Self {
        CatalogEntry {
            node: node_id(c.level, c.id),
            level: c.level,
            id: c.id,
            n_pix: c.n_pix(),
            peak_pos: c.peak_pos,
            peak_val: c.peak_val,
            total_intensity: c.total_intensity,
            centroid: c.centroid,
        }
    }
}

pub fn run_pipeline(config: &PipelineConfig) -> Result<PipelineReport> {
    config.validate()?;
    let cube = config.input.load()?;
    let analysis = analyze(&cube, config)?;
    if let Some(dir) = &config.out_dir {
        write_exports(&analysis, config, dir)?;
    }
    Ok(analysis.report)
}

/// Runs decomposition, statistics, clumping and linking on an in-memory cube.
pub fn analyze(cube: &Cube, config: &PipelineConfig) -> Result<Analysis> {
    config.validate()?;
    let bank = config.wavelet.bank()?;
    let mra = decompose(cube, &bank, config.max_level, config.border)?;
    if mra.len() <= config.max_level {
        warn!(
            "{}: only {} of {} levels computed",
            config.wavelet,
            mra.len() - 1,
            config.max_level
        );
    }

    let base_stats = LevelStats::compute(0, cube, config.bins).map_err(|e| e.at_level(0))?;
    let fixed_rms = config.rms_estimator.measure(cube, &base_stats).map_err(|e| e.at_level(0))?;

    let levels: Vec<LevelResult> = mra
        .into_par_iter()
        .map(|lv| {
            let level = lv.level;
            let recon = lv.recon;
            let inner = || -> Result<LevelResult> {
                let stats = LevelStats::compute(level, &recon, config.bins)?;
                let rms_used = match config.rms_mode {
                    RmsMode::Fixed => fixed_rms,
                    RmsMode::Variable => config.rms_estimator.measure(&recon, &stats)?,
                };
                let (caa, mut clumps) = if rms_used > 0.0 {
                    fellwalker(&recon, &config.clump.with_rms(rms_used))?
                } else {
                    warn!("level {level}: zero rms, no clumps");
                    let labels = Array3::zeros(recon.data().raw_dim());
                    (Caa { labels, n_clumps: 0 }, Vec::new())
                };
                for c in &mut clumps {
                    c.level = level;
                }
                Ok(LevelResult {
                    level,
                    recon,
                    stats,
                    rms_used,
                    caa,
                    clumps,
                })
            };
            inner().map_err(|e| e.at_level(level))
        })
        .collect::<Result<_>>()?;

    let linkable: Vec<LevelClumps<'_>> = levels
        .iter()
        .map(|l| LevelClumps {
            level: l.level,
            cube: &l.recon,
            caa: &l.caa,
            clumps: &l.clumps,
        })
        .collect();
    let tree = link_levels(&linkable, config.link_mode)?;

    let rows = levels
        .iter()
        .map(|l| {
            let (n_clumps, biggest_pix, mean_pix) = clump_metrics(&l.clumps);
            LevelRow {
                level: l.level,
                rms: l.stats.rms,
                entropy: l.stats.entropy,
                n_clumps,
                biggest_pix,
                mean_pix,
            }
        })
        .collect();
    let report = PipelineReport {
        wavelet: config.wavelet.to_string(),
        rms_mode: config.rms_mode,
        levels: rows,
        rms_used: levels.iter().map(|l| l.rms_used).collect(),
        tree: TreeSummary {
            n_nodes: tree.nodes.len(),
            n_edges: tree.edges.len(),
            n_isolated: tree.isolated().len(),
        },
    };
    info!(
        "{}: {} levels, {} nodes, {} edges",
        report.wavelet,
        report.levels.len(),
        report.tree.n_nodes,
        report.tree.n_edges
    );
    Ok(Analysis {
        levels,
        tree,
        report,
    })
}

pub fn stats_csv(rows: &[LevelRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn load_stats_csv(path: impl AsRef<Path>) -> Result<Vec<LevelRow>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn load_catalog(path: impl AsRef<Path>) -> Result<Vec<CatalogEntry>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_exports(analysis: &Analysis, config: &PipelineConfig, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let write = |name: &str, text: String| -> Result<()> {
        let p = dir.join(name);
        fs::write(&p, text).map_err(|e| Error::io(&p, e))
    };
    let emit = config.emit;
    if emit.stats {
        write("stats.csv", stats_csv(&analysis.report.levels)?)?;
    }
    if emit.catalog {
        let entries: Vec<CatalogEntry> = analysis
            .levels
            .iter()
            .flat_map(|l| l.clumps.iter().map(CatalogEntry::from))
            .collect();
        write("catalog.json", serde_json::to_string_pretty(&entries)?)?;
    }
    for l in &analysis.levels {
        if emit.caa {
            save_labels_raw(&l.caa.labels, dir.join(format!("caa_L{}.raw", l.level)))?;
        }
        if emit.recon {
            match config.recon_format {
                CubeFormat::Fits => {
                    let mut cube = l.recon.clone();
                    let meta = cube.meta_mut();
                    meta.insert("WAVELET".into(), fits::fits_string(&config.wavelet.to_string()));
                    meta.insert("MRALEVEL".into(), l.level.to_string());
                    save_fits(&cube, dir.join(format!("recon_L{}.fits", l.level)))?;
                }
                CubeFormat::Raw => save_raw(&l.recon, dir.join(format!("recon_L{}.raw", l.level)))?,
            }
        }
    }
    if emit.tree_dot {
        write("tree.dot", analysis.tree.to_dot())?;
    }
    if emit.tree_json {
        write("tree.json", analysis.tree.to_json()?)?;
    }
    Ok(())
}
