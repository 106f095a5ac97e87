use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod commands;
mod output;

#[derive(Parser, Debug)]
#[command(name = "hexstar", version, about = "Exact diagonalization of the 12-site hexagram XXZ model")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Power-law exponent of the couplings.
    #[arg(long, global = true, default_value_t = 6.0, allow_negative_numbers = true)]
    alpha: f64,

    /// Anisotropy J_z/J (1 is the Heisenberg point).
    #[arg(long, global = true, default_value_t = 1.0, allow_negative_numbers = true)]
    jz_over_j: f64,

    /// Initial state: xi, chi, config:F, zeta:THETA_OUT,PHI_OUT,THETA_IN,PHI_IN,
    /// or groundstate (schmidt only).
    #[arg(long, global = true, default_value = "xi")]
    state: String,

    /// Magnetization sector M, or "all".
    #[arg(long, global = true, allow_negative_numbers = true)]
    sector: Option<String>,

    /// End of the time window in units of h/J.
    #[arg(long, global = true, default_value_t = 1.0)]
    t_max: f64,

    /// Number of time points including both ends.
    #[arg(long, global = true, default_value_t = 2001)]
    t_steps: usize,

    /// Degeneracy tolerance relative to the spectral width.
    #[arg(long, global = true, default_value_t = 1e-8)]
    tol_deg: f64,

    /// Threshold on the norm of a cluster projection for spectral support.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol_support: f64,

    /// Output file (written atomically); stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Irrep multiplicities per sector and multiplets per total spin.
    SymmetryTables,
    /// Eigenvalues with symmetry labels.
    Spectrum,
    /// Histogram of eigenspace dimensions over the full spectrum.
    Degeneracy,
    /// Ground-state energy, degeneracy and label over a J_z/J grid.
    GroundScan {
        #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
        jz_from: f64,
        #[arg(long, default_value_t = 3.0, allow_negative_numbers = true)]
        jz_to: f64,
        #[arg(long, default_value_t = 31)]
        jz_points: usize,
    },
    /// Outcome probabilities in one sector, with a JSON sidecar of statistics.
    Dynamics,
    /// Return probability of the sector component of the initial state.
    ReturnProb,
    /// Schmidt numbers over all inequivalent bipartitions.
    Schmidt,
    /// Closed-form (A2g, M=5) block compared with the numerical engine.
    AnalyticM5,
    /// Site coordinates and squared distances.
    Geometry,
}

/// Everything a run depends on, echoed into every output file.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub alpha: f64,
    pub jz_over_j: f64,
    pub state: String,
    pub sector: String,
    pub t_max: f64,
    pub t_steps: usize,
    pub tol_deg: f64,
    pub tol_support: f64,
    pub output: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Numerical(String),
    Io(String),
    State(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Io(_) => 4,
            Failure::State(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numerical(m) | Failure::Io(m) | Failure::State(m) => m,
        }
    }
}

impl From<hexstar::Error> for Failure {
    fn from(e: hexstar::Error) -> Self {
        match e {
            hexstar::Error::InvalidInput(_) | hexstar::Error::SectorOutOfRange(_) | hexstar::Error::EmptySector(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Numerical(e.to_string()),
        }
    }
}

fn validate(cli: Cli) -> Result<RunConfig, Failure> {
    let usage = |m: String| Err(Failure::Usage(m));
    if !(cli.alpha > 0.0 && cli.alpha.is_finite()) {
        return usage(format!("--alpha must be positive, got {}", cli.alpha));
    }
    if !cli.jz_over_j.is_finite() {
        return usage("--jz-over-j must be finite".into());
    }
    if !(cli.t_max >= 0.0 && cli.t_max.is_finite()) {
        return usage(format!("--t-max must be non-negative, got {}", cli.t_max));
    }
    if cli.t_steps == 0 {
        return usage("--t-steps must be at least 1".into());
    }
    if !(cli.tol_deg > 0.0 && cli.tol_deg < 1.0) {
        return usage(format!("--tol-deg must lie in (0, 1), got {}", cli.tol_deg));
    }
    if !(cli.tol_support > 0.0 && cli.tol_support < 1.0) {
        return usage(format!("--tol-support must lie in (0, 1), got {}", cli.tol_support));
    }
    if let Command::GroundScan { jz_from, jz_to, jz_points } = &cli.command {
        if *jz_points < 2 || !(jz_from < jz_to) {
            return usage("ground-scan needs --jz-from < --jz-to and at least 2 points".into());
        }
    }
    let sector = cli.sector.unwrap_or_else(|| "all".into());
    if sector != "all" {
        match sector.parse::<i32>() {
            Ok(m) if (-6..=6).contains(&m) => {}
            _ => return usage(format!("--sector must be an integer in -6..=6 or \"all\", got {sector:?}")),
        }
    }
    Ok(RunConfig {
        command: cli.command,
        alpha: cli.alpha,
        jz_over_j: cli.jz_over_j,
        state: cli.state,
        sector,
        t_max: cli.t_max,
        t_steps: cli.t_steps,
        tol_deg: cli.tol_deg,
        tol_support: cli.tol_support,
        output: cli.output,
        format: cli.format,
    })
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(value) = std::env::var("HEXSTAR_THREADS") {
        let n: usize = value
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::Usage(format!("HEXSTAR_THREADS must be a positive integer, got {value:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = configure_threads()
        .and_then(|_| validate(cli))
        .and_then(|config| commands::run(&config));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("hexstar: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
