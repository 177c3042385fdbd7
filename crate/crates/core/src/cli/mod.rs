//! The `qrev` command line: dataset emission and the verification suite.
//!
//! Exit codes: `0` success, `1` a verification check failed, `2` bad input or
//! an I/O error.

pub mod datasets;
pub mod overlay;
pub mod state_spec;
pub mod table;
pub mod verify;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use datasets::{multimode_sweep, phase_diagram, protocol_comparison, pure_endpoint, Range};
use state_spec::StateSpec;
use table::{Format, Table};
use verify::{run_verify, Subset, Tolerances};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qrev", version, about = "Minimum-cost Gaussian reverse diffusion: datasets and verification")]
pub struct Cli {
    /// Loss rate γ; all rates are reported in these units.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub gamma: f64,
    /// Output directory (datasets default to ./qrev-out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Replace a verification tolerance, e.g. `matching=1e-6`. Repeatable.
    #[arg(long = "tol-override", global = true, value_name = "NAME=VALUE")]
    pub tol_override: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bayes CP and exact-cost grids over (r, ν) plus the experimental overlay.
    PhaseDiagram {
        #[arg(long, default_value_t = 2.0)]
        r_max: f64,
        #[arg(long, default_value_t = 12.0)]
        nu_max: f64,
        #[arg(long, default_value_t = 100)]
        r_points: usize,
        #[arg(long, default_value_t = 100)]
        nu_points: usize,
    },
    /// Exact, Bayes, isotropic and Petz costs along r at fixed ν.
    Compare {
        #[arg(long)]
        nu: f64,
        #[arg(long, default_value_t = 1.5)]
        r_max: f64,
        #[arg(long, default_value_t = 151)]
        r_points: usize,
    },
    /// t·Z_min(t) collapse near a pure squeezed endpoint.
    PureEndpoint {
        /// Comma-separated squeezings, all > 0.
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 1.5])]
        r: Vec<f64>,
        /// Smallest time, in units of 1/γ.
        #[arg(long, default_value_t = 1e-7)]
        t_min: f64,
        #[arg(long, default_value_t = 0.1)]
        t_max: f64,
        #[arg(long, default_value_t = 40)]
        per_decade: usize,
    },
    /// Additive optimum along the loss path of a multimode state file.
    Multimode {
        #[arg(long)]
        spec: PathBuf,
        /// Window start, in units of 1/γ.
        #[arg(long, default_value_t = 0.05)]
        t_start: f64,
        #[arg(long, default_value_t = 2.0)]
        t_end: f64,
        #[arg(long, default_value_t = 40)]
        steps: usize,
    },
    /// Run the invariant suite and print a JSON report.
    Verify {
        /// Restrict to these groups (repeatable or comma-separated).
        #[arg(long, value_enum, value_delimiter = ',')]
        subset: Vec<Subset>,
    },
}

/// Settings shared by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub gamma: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, String> {
        if !(cli.gamma > 0.0 && cli.gamma.is_finite()) {
            return Err(format!("--gamma must be positive, got {}", cli.gamma));
        }
        let mut tolerances = Tolerances::default();
        for o in &cli.tol_override {
            tolerances.apply_override(o).map_err(|e| e.to_string())?;
        }
        Ok(Self { gamma: cli.gamma, out: cli.out.clone(), format: cli.format, tolerances })
    }

    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("qrev-out"))
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Verify(String),
}

impl From<crate::Error> for Failure {
    fn from(e: crate::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn write_tables(dir: &Path, format: Format, tables: &[(&str, &Table)]) -> Result<Vec<PathBuf>, Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for (name, t) in tables {
        let path = dir.join(format!("{name}.{}", format.extension()));
        std::fs::write(&path, t.encode(format)).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<(), Failure> {
    let cfg = RunConfig::from_cli(cli).map_err(Failure::Usage)?;
    let g = cfg.gamma;
    let written = match &cli.command {
        Command::PhaseDiagram { r_max, nu_max, r_points, nu_points } => {
            let pd = phase_diagram(g, Range::new(0.0, *r_max, *r_points)?, Range::new(1.0, *nu_max, *nu_points)?)?;
            write_tables(
                &cfg.out_dir(),
                cfg.format,
                &[
                    ("phase_bayes", &pd.bayes),
                    ("phase_zmin", &pd.z_min),
                    ("phase_boundary", &pd.boundary),
                    ("overlay", &pd.overlay),
                ],
            )?
        }
        Command::Compare { nu, r_max, r_points } => {
            let t = protocol_comparison(g, *nu, Range::new(0.0, *r_max, *r_points)?)?;
            write_tables(&cfg.out_dir(), cfg.format, &[("protocol_comparison", &t)])?
        }
        Command::PureEndpoint { r, t_min, t_max, per_decade } => {
            let times = crate::asymptotics::log_grid(t_min / g, t_max / g, *per_decade)?;
            let data = pure_endpoint(g, r, &times)?;
            write_tables(&cfg.out_dir(), cfg.format, &[("pure_endpoint", &data.curves), ("pure_endpoint_fit", &data.fits)])?
        }
        Command::Multimode { spec, t_start, t_end, steps } => {
            let parsed = StateSpec::from_path(spec).map_err(|e| Failure::Usage(format!("{}: {e}", spec.display())))?;
            if *steps < 2 || !(t_start >= &0.0 && t_start < t_end) {
                return Err(Failure::Usage(format!("bad time window [{t_start}, {t_end}] with {steps} steps")));
            }
            let times = crate::frame::uniform_times(t_start / g, t_end / g, *steps);
            let t = multimode_sweep(&parsed.covariance()?, g, &times)?;
            write_tables(&cfg.out_dir(), cfg.format, &[("multimode", &t)])?
        }
        Command::Verify { subset } => {
            let report = run_verify(g, subset, &cfg.tolerances)?;
            let json = report.to_json();
            if let Some(dir) = &cfg.out {
                std::fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))?;
                let path = dir.join("verify_report.json");
                std::fs::write(&path, &json).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            }
            out.write_all(json.as_bytes()).map_err(|e| Failure::Usage(e.to_string()))?;
            return match report.first_failure {
                None => Ok(()),
                Some(name) => Err(Failure::Verify(name)),
            };
        }
    };
    for p in written {
        writeln!(out, "{}", p.display()).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{}", e.render()) } else { write!(out, "{}", e.render()) };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Verify(name)) => {
            let _ = writeln!(err, "verification failed: {name}");
            EXIT_VERIFY_FAILED
        }
    }
}
