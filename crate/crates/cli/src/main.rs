use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::Settings;

#[derive(Debug, Parser)]
#[command(
    name = "gfbbm",
    version,
    about = "Solitary waves of the generalized fractional BBM equation"
)]
struct Cli {
    /// TOML file with default values for any flag (flags take precedence).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute a solitary wave with the Petviashvili iteration.
    Solve(WaveArgs),
    /// Classify (alpha, c) points from the sign of dK/dc.
    Classify(ClassifyArgs),
    /// Evolve a perturbed solitary wave with pseudo-spectral RK4.
    Evolve(EvolveArgs),
    /// Dense spectrum of the linearized operator and the index count.
    Spectrum(SpectrumArgs),
    /// Solve and classify every point of an (alpha, c) lattice.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Order of the fractional derivative, in (0, 2].
    #[arg(long)]
    alpha: Option<f64>,
    /// Nonlinearity exponent (positive integer).
    #[arg(long)]
    p: Option<u32>,
    /// Wave speed.
    #[arg(long)]
    c: Option<f64>,
}

#[derive(Debug, Args)]
struct GridArgs {
    /// Half-length L of the periodic domain [-L, L).
    #[arg(long)]
    half_length: Option<f64>,
    /// Number of grid points (power of two).
    #[arg(long)]
    n_points: Option<usize>,
    /// Interpret the half-length in units of the natural length 1/theta.
    #[arg(long)]
    scaled_domain: bool,
    /// Petviashvili tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct WaveArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    alpha_min: Option<f64>,
    #[arg(long)]
    alpha_max: Option<f64>,
    #[arg(long)]
    c_min: Option<f64>,
    #[arg(long)]
    c_max: Option<f64>,
    /// Lattice spacing in both alpha and c.
    #[arg(long)]
    resolution: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvolveArgs {
    #[command(flatten)]
    wave: WaveArgs,
    /// Start from a profile CSV written by `solve` (sidecar: same stem, .json).
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Perturbation factor: u0 = gamma * Q_c.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    sample_interval: Option<f64>,
    /// Also write full fields at every sample to snapshots.bin.
    #[arg(long)]
    snapshots: bool,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    wave: WaveArgs,
    /// Speed increment for the momentum derivative.
    #[arg(long)]
    dc: Option<f64>,
    /// Also compute the eigenvalues of J L_c (dense nonsymmetric solve).
    #[arg(long)]
    growing_modes: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    classify: ClassifyArgs,
    #[command(flatten)]
    grid: SweepGridArgs,
}

#[derive(Debug, Args)]
struct SweepGridArgs {
    #[arg(long)]
    half_length: Option<f64>,
    #[arg(long)]
    n_points: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
}

fn flag(b: bool) -> Option<bool> {
    b.then_some(true)
}

impl WaveArgs {
    fn settings(&self) -> Settings {
        Settings {
            alpha: self.model.alpha,
            p: self.model.p,
            c: self.model.c,
            half_length: self.grid.half_length,
            n_points: self.grid.n_points,
            scaled_domain: flag(self.grid.scaled_domain),
            tolerance: self.grid.tolerance,
            max_iterations: self.grid.max_iterations,
            out_dir: self.grid.out_dir.clone(),
            ..Settings::default()
        }
    }
}

impl ClassifyArgs {
    fn settings(&self) -> Settings {
        Settings {
            alpha: self.model.alpha,
            p: self.model.p,
            c: self.model.c,
            alpha_min: self.alpha_min,
            alpha_max: self.alpha_max,
            c_min: self.c_min,
            c_max: self.c_max,
            resolution: self.resolution,
            out_dir: self.out_dir.clone(),
            ..Settings::default()
        }
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Solve(_) => "solve",
            Command::Classify(_) => "classify",
            Command::Evolve(_) => "evolve",
            Command::Spectrum(_) => "spectrum",
            Command::Sweep(_) => "sweep",
        }
    }

    fn settings(&self) -> Settings {
        match self {
            Command::Solve(a) => a.settings(),
            Command::Classify(a) => a.settings(),
            Command::Evolve(a) => Settings {
                profile: a.profile.clone(),
                gamma: a.gamma,
                dt: a.dt,
                t_final: a.t_final,
                sample_interval: a.sample_interval,
                snapshots: flag(a.snapshots),
                ..a.wave.settings()
            },
            Command::Spectrum(a) => Settings {
                dc: a.dc,
                growing_modes: flag(a.growing_modes),
                ..a.wave.settings()
            },
            Command::Sweep(a) => Settings {
                half_length: a.grid.half_length,
                n_points: a.grid.n_points,
                tolerance: a.grid.tolerance,
                max_iterations: a.grid.max_iterations,
                ..a.classify.settings()
            },
        }
    }
}

fn run(cli: Cli) -> gfbbm::Result<()> {
    let name = cli.command.name();
    let settings = config::resolve(name, cli.command.settings(), cli.config.as_deref())?;
    match cli.command {
        Command::Solve(_) => commands::solve(&settings),
        Command::Classify(_) => commands::classify(&settings),
        Command::Evolve(_) => commands::evolve(&settings),
        Command::Spectrum(_) => commands::spectrum(&settings),
        Command::Sweep(_) => commands::sweep(&settings),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gfbbm: [{}] {e}", e.class());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
