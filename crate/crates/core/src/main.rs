//! Command-line front end: dataset generation, scale sweeps, peak/plateau
//! estimation, CI-coverage validation, and SVG plotting.
//!
//! Exit codes: 0 success, 1 runtime/computation failure, 2 usage error.
//! Every file-producing run writes a `<out>.manifest.json` with the fully
//! resolved configuration; re-running from a manifest reproduces the output
//! bit-for-bit (modulo timestamp). The `SPREAD_THREADS` environment
//! variable sets the worker count; results do not depend on it.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use spreadim::data::{sample_subset, swiss_roll, uniform_hypercube, RNG_NAME};
use spreadim::error::Error;
use spreadim::experiment::{
    coverage_validation, dimension_profile, estimate_intrinsic_dimension, PlateauParams,
};
use spreadim::metric::{load_distance_matrix, load_points, write_points, MetricSpace, SubsetIndex};
use spreadim::plot::write_profile_svg;
use spreadim::profile_io::{read_profile_csv, write_profile_csv};
use spreadim::spread::ScaleGrid;
use spreadim::uncertainty::ErrorFormula;

#[derive(Parser)]
#[command(name = "spreadim", version, about = "Spread dimension of finite metric spaces")]
struct Cli {
    /// Optional JSON config file; command-line flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic point cloud and write it as CSV.
    Generate(GenerateArgs),
    /// Sweep the (pseudo) spread dimension over a scale grid and write a
    /// profile CSV.
    Sweep(SweepArgs),
    /// Extract the peak/plateau dimension estimate from a profile CSV.
    Estimate(EstimateArgs),
    /// Monte-Carlo validation of confidence-interval coverage.
    ValidateCoverage(CoverageArgs),
    /// Render a profile CSV as a static SVG chart.
    Plot(PlotArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Shape to generate: swiss-roll or hypercube.
    #[arg(long)]
    shape: String,
    #[arg(long)]
    n: Option<usize>,
    /// Ambient dimension (hypercube only).
    #[arg(long)]
    dim: Option<usize>,
    /// Gaussian noise standard deviation (swiss-roll only).
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Point-cloud or distance-matrix file.
    #[arg(long)]
    input: PathBuf,
    /// Treat the input as a precomputed distance matrix.
    #[arg(long, default_value_t = false)]
    matrix: bool,
    /// Subset size, or "full" for the exact O(n^2) spread dimension.
    #[arg(short)]
    k: Option<String>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    z: Option<f64>,
    #[arg(long, value_enum)]
    variant: Option<ErrorFormula>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    profile: PathBuf,
    /// Plateau band half-width around the candidate integer level.
    #[arg(long, default_value_t = 0.25)]
    band: f64,
    /// Minimum plateau extent as a fraction of the grid span.
    #[arg(long, default_value_t = 0.10)]
    min_span_frac: f64,
}

#[derive(Args)]
struct CoverageArgs {
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    variant: Option<ErrorFormula>,
    /// Also write the report JSON here (it is always printed to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    profile: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

/// Defaults shared with an optional JSON config file. Flags beat config,
/// config beats these defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    n: Option<usize>,
    dim: Option<usize>,
    noise: Option<f64>,
    k: Option<String>,
    t_min: Option<f64>,
    t_max: Option<f64>,
    steps: Option<usize>,
    seed: Option<u64>,
    z: Option<f64>,
    variant: Option<ErrorFormula>,
    trials: Option<usize>,
}

const USAGE_EXIT: u8 = 2;
const RUNTIME_EXIT: u8 = 1;

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Err(msg) = init_thread_pool() {
        eprintln!("error: {}", msg);
        return ExitCode::from(USAGE_EXIT);
    }

    let config = match cli.config.as_deref().map(load_config).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {}", e);
            return ExitCode::from(USAGE_EXIT);
        }
    };

    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args, &config),
        Command::Sweep(args) => cmd_sweep(args, &config),
        Command::Estimate(args) => cmd_estimate(args),
        Command::ValidateCoverage(args) => cmd_validate_coverage(args, &config),
        Command::Plot(args) => cmd_plot(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::Usage(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(USAGE_EXIT)
        }
        Err(CmdError::Runtime(msg)) => {
            eprintln!("error: {}", msg);
            ExitCode::from(RUNTIME_EXIT)
        }
    }
}

enum CmdError {
    Usage(String),
    Runtime(String),
}

impl From<Error> for CmdError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::IndexOutOfRange(_) => CmdError::Usage(e.to_string()),
            other => CmdError::Runtime(other.to_string()),
        }
    }
}

fn init_thread_pool() -> Result<(), String> {
    if let Ok(raw) = std::env::var("SPREAD_THREADS") {
        let threads: usize = raw
            .parse()
            .map_err(|_| format!("SPREAD_THREADS must be an integer >= 1, got {:?}", raw))?;
        if threads == 0 {
            return Err("SPREAD_THREADS must be >= 1".into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    Ok(())
}

fn load_config(path: &Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {}", path.display(), e))?;
    serde_json::from_str(&text).map_err(|e| format!("bad config {}: {}", path.display(), e))
}

fn timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

#[derive(Serialize)]
struct RunManifest {
    command: String,
    version: String,
    rng: String,
    timestamp_unix: u64,
    config: serde_json::Value,
}

fn write_manifest(out: &Path, command: &str, config: serde_json::Value) -> Result<(), CmdError> {
    let manifest = RunManifest {
        command: command.to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        rng: RNG_NAME.to_string(),
        timestamp_unix: timestamp(),
        config,
    };
    let path = manifest_path(out);
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CmdError::Runtime(e.to_string()))?;
    std::fs::write(&path, text).map_err(|e| {
        CmdError::Runtime(format!("cannot write manifest {}: {}", path.display(), e))
    })?;
    Ok(())
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn cmd_generate(args: GenerateArgs, config: &FileConfig) -> Result<(), CmdError> {
    let n = args.n.or(config.n).unwrap_or(10_000);
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let cloud = match args.shape.as_str() {
        "swiss-roll" => {
            let noise = args.noise.or(config.noise).unwrap_or(0.0);
            swiss_roll(n, seed, noise)?
        }
        "hypercube" => {
            let dim = args.dim.or(config.dim).unwrap_or(2);
            uniform_hypercube(n, dim, seed)?
        }
        other => {
            return Err(CmdError::Usage(format!(
                "unknown shape {:?} (expected swiss-roll or hypercube)",
                other
            )))
        }
    };
    // a bad output path is an argument problem, not a computation failure
    write_points(&cloud, &args.out)
        .map_err(|e| CmdError::Usage(format!("cannot write {}: {}", args.out.display(), e)))?;
    eprintln!(
        "generated {} x {} {} -> {}",
        cloud.n_points(),
        cloud.ambient_dim(),
        args.shape,
        args.out.display()
    );
    write_manifest(
        &args.out,
        "generate",
        json!({
            "shape": args.shape,
            "n": n,
            "dim": if args.shape == "hypercube" { Some(args.dim.or(config.dim).unwrap_or(2)) } else { None },
            "noise": if args.shape == "swiss-roll" { Some(args.noise.or(config.noise).unwrap_or(0.0)) } else { None },
            "seed": seed,
            "out": args.out,
        }),
    )
}

fn cmd_sweep(args: SweepArgs, config: &FileConfig) -> Result<(), CmdError> {
    let t_min = args.t_min.or(config.t_min).unwrap_or(0.0);
    let t_max = args.t_max.or(config.t_max).unwrap_or(15.0);
    let steps = args.steps.or(config.steps).unwrap_or(200);
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let z = args.z.or(config.z).unwrap_or(1.96);
    let variant = args.variant.or(config.variant).unwrap_or_default();
    let k_spec = args
        .k
        .clone()
        .or_else(|| config.k.clone())
        .unwrap_or_else(|| "100".to_string());
    if t_min > t_max {
        return Err(CmdError::Usage(format!(
            "t-min {} must not exceed t-max {}",
            t_min, t_max
        )));
    }

    let space = if args.matrix {
        MetricSpace::Matrix(load_distance_matrix(&args.input)?)
    } else {
        MetricSpace::Points(load_points(&args.input)?)
    };
    let n = space.n_points();
    let subset = if k_spec == "full" {
        SubsetIndex::full(n)?
    } else {
        let k: usize = k_spec
            .parse()
            .map_err(|_| CmdError::Usage(format!("k must be an integer or \"full\", got {:?}", k_spec)))?;
        if k > n {
            return Err(CmdError::Usage(format!("k = {} exceeds n = {}", k, n)));
        }
        if k == n {
            SubsetIndex::full(n)?
        } else {
            sample_subset(n, k, seed)?
        }
    };
    eprintln!("sweeping {} scales on n = {}, k = {}", steps, n, subset.len());
    let grid = if steps == 1 {
        ScaleGrid::new(vec![t_min])?
    } else {
        ScaleGrid::linspace(t_min, t_max, steps)?
    };
    let profile = dimension_profile(&space, &subset, &grid, z, variant)?;
    write_profile_csv(&profile, &args.out)
        .map_err(|e| CmdError::Usage(format!("cannot write {}: {}", args.out.display(), e)))?;
    eprintln!("wrote profile -> {}", args.out.display());
    if profile.meta.clamped_variances > 0 {
        eprintln!(
            "warning: {} scale(s) had negative propagated variance clamped to 0",
            profile.meta.clamped_variances
        );
    }
    write_manifest(
        &args.out,
        "sweep",
        json!({
            "input": args.input,
            "matrix": args.matrix,
            "k": k_spec,
            "t_min": t_min,
            "t_max": t_max,
            "steps": steps,
            "seed": seed,
            "z": z,
            "variant": variant,
            "out": args.out,
        }),
    )
}

fn cmd_estimate(args: EstimateArgs) -> Result<(), CmdError> {
    let profile = read_profile_csv(&args.profile)?;
    let estimate = estimate_intrinsic_dimension(
        &profile,
        PlateauParams {
            band: args.band,
            min_span_frac: args.min_span_frac,
        },
    )?;
    let text = serde_json::to_string_pretty(&estimate)
        .map_err(|e| CmdError::Runtime(e.to_string()))?;
    println!("{}", text);
    Ok(())
}

fn cmd_validate_coverage(args: CoverageArgs, config: &FileConfig) -> Result<(), CmdError> {
    let trials = args.trials.or(config.trials).unwrap_or(100);
    let n = args.n.or(config.n).unwrap_or(10_000);
    let k = args.k.or(config.k.as_ref().and_then(|s| s.parse().ok())).unwrap_or(100);
    let t_min = args.t_min.or(config.t_min).unwrap_or(0.0);
    let t_max = args.t_max.or(config.t_max).unwrap_or(15.0);
    let steps = args.steps.or(config.steps).unwrap_or(200);
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let variant = args.variant.or(config.variant).unwrap_or_default();
    if trials == 0 {
        return Err(CmdError::Usage("trials must be >= 1".into()));
    }
    // coverage grids exclude t = 0: use the first `steps` positive values of
    // an even partition of (t_min, t_max]
    let h = (t_max - t_min) / steps as f64;
    let values: Vec<f64> = (1..=steps).map(|i| t_min + h * i as f64).collect();
    let grid = ScaleGrid::new(values)?;
    eprintln!(
        "running {} trials, n = {}, k = {}, {} scales in ({}, {}]",
        trials, n, k, steps, t_min, t_max
    );
    let report = coverage_validation(trials, n, k, &grid, seed, variant)?;
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| CmdError::Runtime(e.to_string()))?;
    println!("{}", text);
    if let Some(out) = &args.out {
        std::fs::write(out, &text)
            .map_err(|e| CmdError::Runtime(format!("cannot write {}: {}", out.display(), e)))?;
        write_manifest(
            out,
            "validate-coverage",
            json!({
                "trials": trials,
                "n": n,
                "k": k,
                "t_min": t_min,
                "t_max": t_max,
                "steps": steps,
                "seed": seed,
                "variant": variant,
                "out": out,
            }),
        )?;
    }
    Ok(())
}

fn cmd_plot(args: PlotArgs) -> Result<(), CmdError> {
    let profile = read_profile_csv(&args.profile)?;
    write_profile_svg(&profile, &args.out)
        .map_err(|e| CmdError::Runtime(format!("cannot write {}: {}", args.out.display(), e)))?;
    eprintln!("wrote plot -> {}", args.out.display());
    Ok(())
}
