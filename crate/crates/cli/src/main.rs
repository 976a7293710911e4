use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use volpg::harness::experiments::{convergence_csv, convergence_slope, write_iteration_study};
use volpg::harness::{self, cached_reference, compute_mse, load_scene, Mode, RenderConfig};
use volpg::scene::Scene;
use volpg::transport::{read_records, TraceConfig};
use volpg::Image;

#[derive(Parser)]
#[command(name = "volpg", version, about = "Volumetric path tracer with path-graph refinement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render one image.
    Render(RenderArgs),
    /// Print the mean squared error between two PFM images.
    Mse { a: PathBuf, b: PathBuf },
    /// Score pt and pg renders over sample counts and seeds against a reference.
    Convergence(ConvergenceArgs),
    /// Score pg renders after different numbers of solver iterations.
    Iterations(IterationArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Pt,
    Pg,
    Reference,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Pt => Mode::Pt,
            ModeArg::Pg => Mode::Pg,
            ModeArg::Reference => Mode::Reference,
        }
    }
}

#[derive(Args)]
struct SceneArgs {
    /// Preset name (fogbox, gridpuff) or scene file.
    #[arg(long)]
    scene: String,
    /// Override the camera resolution, e.g. 128x128.
    #[arg(long, value_parser = parse_resolution)]
    resolution: Option<(usize, usize)>,
}

impl SceneArgs {
    fn load(&self) -> Result<Scene> {
        let mut scene = load_scene(&self.scene).with_context(|| format!("loading scene '{}'", self.scene))?;
        if let Some((w, h)) = self.resolution {
            scene.camera.width = w;
            scene.camera.height = h;
        }
        Ok(scene)
    }
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 32)]
    cluster_size: usize,
    #[arg(long, default_value_t = 10)]
    iterations: u32,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long, default_value_t = 64)]
    max_depth: u32,
    /// Depth at which Russian roulette starts.
    #[arg(long, default_value_t = 8)]
    rr_start: u32,
    /// Minimum Russian roulette survival probability.
    #[arg(long, default_value_t = 0.05)]
    rr_floor: f64,
    /// Extra direct samples at each path's first vertex.
    #[arg(long, default_value_t = 0)]
    extra_direct: u32,
    /// Use the cluster-aggregated direct radiance at the first vertex.
    #[arg(long)]
    aggregate_direct: bool,
}

impl SolverArgs {
    fn trace(&self) -> TraceConfig {
        TraceConfig { max_depth: self.max_depth, rr_start: self.rr_start, rr_floor: self.rr_floor }
    }

    fn config(&self, mode: Mode, spp: u32, seed: u64) -> RenderConfig {
        RenderConfig {
            mode,
            spp,
            seed,
            cluster_size: self.cluster_size,
            iterations: self.iterations,
            tol: self.tol,
            trace: self.trace(),
            extra_direct: self.extra_direct,
            aggregate_direct: self.aggregate_direct,
            dump_records: None,
            residual_csv: None,
        }
    }
}

#[derive(Args)]
struct RenderArgs {
    #[command(flatten)]
    scene: SceneArgs,
    #[arg(long, value_enum, default_value = "pt")]
    mode: ModeArg,
    #[arg(long, default_value_t = 1)]
    spp: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    solver: SolverArgs,
    /// Write every path record to this file.
    #[arg(long)]
    dump_records: Option<PathBuf>,
    /// Refine a previously dumped record file instead of tracing (pg mode).
    #[arg(long, conflicts_with = "dump_records")]
    records: Option<PathBuf>,
    /// Write per-iteration solver residuals as CSV.
    #[arg(long)]
    residual_csv: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReferenceArgs {
    /// Existing reference image; rendered and cached when absent.
    #[arg(long)]
    reference: Option<PathBuf>,
    #[arg(long, default_value_t = 4096)]
    reference_spp: u32,
    #[arg(long, default_value_t = 1 << 32)]
    reference_seed: u64,
    #[arg(long, default_value = ".volpg-cache")]
    cache_dir: PathBuf,
}

impl ReferenceArgs {
    fn load(&self, scene: &Scene, trace: &TraceConfig) -> Result<Image> {
        match &self.reference {
            Some(p) => Ok(Image::read_pfm(p)?),
            None => {
                eprintln!("reference: {} spp (cached in {})", self.reference_spp, self.cache_dir.display());
                Ok(cached_reference(scene, self.reference_spp, self.reference_seed, trace, &self.cache_dir)?)
            }
        }
    }
}

#[derive(Args)]
struct ConvergenceArgs {
    #[command(flatten)]
    scene: SceneArgs,
    #[arg(long, value_delimiter = ',', default_value = "1,4,16,64")]
    spp_list: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    seeds: Vec<u64>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "pt,pg")]
    methods: Vec<ModeArg>,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    reference: ReferenceArgs,
    /// CSV output; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IterationArgs {
    #[command(flatten)]
    scene: SceneArgs,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,5,10,20")]
    iteration_list: Vec<u32>,
    #[arg(long, default_value_t = 1)]
    spp: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    reference: ReferenceArgs,
    /// Directory for per-count images and CSV files.
    #[arg(long)]
    out_dir: PathBuf,
}

fn parse_resolution(s: &str) -> Result<(usize, usize), String> {
    let (w, h) = s.split_once('x').ok_or("expected WIDTHxHEIGHT")?;
    let w: usize = w.parse().map_err(|_| format!("bad width '{w}'"))?;
    let h: usize = h.parse().map_err(|_| format!("bad height '{h}'"))?;
    if w == 0 || h == 0 {
        return Err("resolution must be positive".into());
    }
    Ok((w, h))
}

fn render(args: RenderArgs) -> Result<()> {
    let mut cfg = args.solver.config(args.mode.into(), args.spp, args.seed);
    cfg.dump_records = args.dump_records;
    cfg.residual_csv = args.residual_csv;
    let result = match &args.records {
        Some(path) => {
            if cfg.mode != Mode::Pg {
                bail!("--records requires --mode pg");
            }
            let set = read_records(path)?;
            let result = harness::refine_records(&set, &cfg)?;
            if let Some(csv) = &cfg.residual_csv {
                harness::render::write_residual_csv(csv, &result.residuals)?;
            }
            result
        }
        None => harness::render(&args.scene.load()?, &cfg)?,
    };
    if let Some(last) = result.residuals.last() {
        eprintln!("solve: {} iterations, final residual {last:.3e}", result.residuals.len());
    }
    result.image.write_pfm(&args.out)?;
    Ok(())
}

fn convergence(args: ConvergenceArgs) -> Result<()> {
    let scene = args.scene.load()?;
    let base = args.solver.config(Mode::Pt, 1, 0);
    let reference = args.reference.load(&scene, &base.trace)?;
    let methods: Vec<Mode> = args.methods.iter().map(|&m| m.into()).collect();
    let rows = harness::run_convergence(&scene, &base, &methods, &args.spp_list, &args.seeds, &reference)?;
    let csv = convergence_csv(&rows);
    match &args.out {
        Some(p) => std::fs::write(p, csv).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{csv}"),
    }
    for m in methods {
        if let Some(s) = convergence_slope(&rows, m) {
            eprintln!("log-log slope ({m:?}): {s:.3}");
        }
    }
    Ok(())
}

fn iterations(args: IterationArgs) -> Result<()> {
    let scene = args.scene.load()?;
    let cfg = args.solver.config(Mode::Pg, args.spp, args.seed);
    let reference = args.reference.load(&scene, &cfg.trace)?;
    let study = harness::run_iteration_study(&scene, &cfg, &args.iteration_list, &reference)?;
    write_iteration_study(&study, &args.out_dir)?;
    for s in &study.snapshots {
        println!("{:>4} iterations  mse {:.6e}", s.iterations, s.mse);
    }
    Ok(())
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    harness::configure_threads()?;
    match cli.command {
        Command::Render(a) => render(a),
        Command::Mse { a, b } => {
            let mse = compute_mse(&Image::read_pfm(&a)?, &Image::read_pfm(&b)?)?;
            println!("{mse:e}");
            Ok(())
        }
        Command::Convergence(a) => convergence(a),
        Command::Iterations(a) => iterations(a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
