use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use mrclump::clumping::Neighborhood;
use mrclump::io::{save_fits, save_raw};
use mrclump::pipeline::{run_pipeline, stats_csv, ClumpSettings, CubeFormat, Emit, Input, PipelineConfig, RmsMode};
use mrclump::synth::{generate_synthetic, Noise, SynthSpec};
use mrclump::{Border, Dims, LinkMode, Wavelet};

#[derive(Parser)]
#[command(name = "mrclump", version, about = "Multiresolution 3D wavelet clump finding for spectroscopic cubes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a cube, find clumps at every level and link them.
    Run(RunArgs),
    /// Write a seeded synthetic cube of blended Gaussians.
    Synth(SynthArgs),
    /// Print the filter taps of one or all wavelets.
    BankDump {
        #[arg(long)]
        wavelet: Option<String>,
    },
}

#[derive(Args)]
struct SynthOpts {
    /// Cube dims as axis0,axis1,axis2 (frequency first).
    #[arg(long = "synth-dims", default_value = "41,100,100", value_parser = parse_dims)]
    synth_dims: Dims,
    /// Number of Gaussian components.
    #[arg(long = "synth-gaussians", default_value_t = 10)]
    synth_gaussians: usize,
    /// Noise standard deviation as a fraction of the noiseless peak.
    #[arg(long = "synth-noise", default_value_t = 0.1)]
    synth_noise: f64,
    /// JSON generator spec; overrides the other synth options.
    #[arg(long = "synth-spec")]
    synth_spec: Option<PathBuf>,
}

impl SynthOpts {
    fn spec(&self, seed: u64) -> Result<SynthSpec> {
        match &self.synth_spec {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                Ok(serde_json::from_str(&text)?)
            }
            None => Ok(SynthSpec::blended(
                self.synth_dims,
                self.synth_gaussians,
                Noise::PeakFraction(self.synth_noise),
                seed,
            )),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Input cube; when omitted a synthetic cube is generated.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "fits")]
    format: CubeFormat,
    /// Dims for raw input, axis0,axis1,axis2.
    #[arg(long, value_parser = parse_dims)]
    dims: Option<Dims>,
    #[arg(long, default_value = "db5")]
    wavelet: Wavelet,
    #[arg(long, default_value_t = 4)]
    levels: usize,
    #[arg(long = "rms-mode", default_value = "variable")]
    rms_mode: RmsMode,
    #[arg(long = "noise-mult", default_value_t = 2.0)]
    noise_mult: f64,
    #[arg(long = "min-dip-mult", default_value_t = 3.0)]
    min_dip_mult: f64,
    #[arg(long = "min-pix", default_value_t = 16)]
    min_pix: usize,
    /// 6 or 26.
    #[arg(long, default_value = "26")]
    neighborhood: Neighborhood,
    #[arg(long, default_value = "symmetric")]
    border: Border,
    #[arg(long, default_value_t = 256)]
    bins: usize,
    #[arg(long = "link-mode", default_value = "centroid")]
    link_mode: LinkMode,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    /// Comma-separated: recon,caa,catalog,stats,tree-dot,tree-json.
    #[arg(long, default_value = "all")]
    emit: String,
    /// File format for exported reconstructions.
    #[arg(long = "recon-format", default_value = "fits")]
    recon_format: CubeFormat,
    #[command(flatten)]
    synth: SynthOpts,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    synth: SynthOpts,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "fits")]
    format: CubeFormat,
}

fn parse_dims(s: &str) -> Result<Dims, String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts.as_slice() {
        &[a, b, c] if a > 0 && b > 0 && c > 0 => Ok([a, b, c]),
        _ => Err(format!("expected three positive integers, got {s:?}")),
    }
}

fn run(args: RunArgs) -> Result<()> {
    let input = match (&args.input, args.format) {
        (Some(p), CubeFormat::Fits) => Input::Fits(p.clone()),
        (Some(p), CubeFormat::Raw) => {
            let Some(dims) = args.dims else {
                bail!("--dims is required for raw input");
            };
            Input::Raw { path: p.clone(), dims }
        }
        (None, _) => Input::Synthetic {
            spec: args.synth.spec(args.seed)?,
            seed: args.seed,
        },
    };
    let mut config = PipelineConfig::new(input);
    config.wavelet = args.wavelet;
    config.border = args.border;
    config.max_level = args.levels;
    config.rms_mode = args.rms_mode;
    config.clump = ClumpSettings {
        noise_mult: args.noise_mult,
        min_dip_mult: args.min_dip_mult,
        min_pix: args.min_pix,
        neighborhood: args.neighborhood,
    };
    config.bins = args.bins;
    config.link_mode = args.link_mode;
    config.out_dir = args.out_dir;
    config.emit = Emit::parse_list(&args.emit)?;
    config.recon_format = args.recon_format;

    let report = run_pipeline(&config)?;
    print!("{}", stats_csv(&report.levels)?);
    println!(
        "# tree: {} nodes, {} edges, {} isolated",
        report.tree.n_nodes, report.tree.n_edges, report.tree.n_isolated
    );
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let spec = args.synth.spec(args.seed)?;
    let cube = generate_synthetic(&spec, args.seed)?;
    match args.format {
        CubeFormat::Fits => save_fits(&cube, &args.out)?,
        CubeFormat::Raw => save_raw(&cube, &args.out)?,
    }
    let [a, b, c] = cube.dims();
    println!("wrote {} ({a},{b},{c})", args.out.display());
    Ok(())
}

fn bank_dump(wavelet: Option<String>) -> Result<()> {
    let wavelets = match wavelet {
        Some(name) => vec![name.parse::<Wavelet>()?],
        None => Wavelet::ALL.to_vec(),
    };
    for w in wavelets {
        let bank = w.bank()?;
        println!("{w} ({} taps)", bank.len());
        for (name, taps) in [("lo_d", bank.lo_d), ("hi_d", bank.hi_d), ("lo_r", bank.lo_r), ("hi_r", bank.hi_r)] {
            let list: Vec<String> = taps.iter().map(|t| format!("{t:.17e}")).collect();
            println!("  {name}: [{}]", list.join(", "));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Synth(args) => synth(args),
        Command::BankDump { wavelet } => bank_dump(wavelet),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
