//! `ldx`: Darboux frames, invariants, hyperbolic and de Sitter surfaces and
//! their singularities for curves on spacelike hypersurfaces.

mod commands;
mod config;
mod error;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::Context;
use crate::config::{KindName, RunConfig};
use crate::error::CliError;
use crate::output::write_or_print;

#[derive(Parser, Debug)]
#[command(name = "ldx", version, about = "Lorentzian Darboux frames and the singularities of their surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Darboux frame, its invariants and the singularity witnesses as CSV.
    Frame(Common),
    /// Scalar invariants, the regime and derived quantities as CSV.
    Invariants(Common),
    /// Singular locus of a surface with the classification of each point.
    Locus(Common),
    /// Sampled surface as CSV, optionally as an OBJ mesh.
    Surface(Common),
    /// Locus classification cross-checked against height-function orders.
    Classify(Common),
    /// Run the invariant check suite.
    Verify(Common),
    /// List the builtin curves, or print the configuration of one.
    Examples { name: Option<String> },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KindArg {
    Hyperbolic,
    Desitter,
}

#[derive(Args, Debug)]
struct Common {
    /// TOML configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Use a builtin curve instead of a configuration file.
    #[arg(long, value_name = "NAME", conflicts_with = "config")]
    builtin: Option<String>,
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// Arc-length range.
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    range: Option<Vec<f64>>,
    #[arg(long, value_name = "N")]
    samples: Option<usize>,
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    theta_range: Option<Vec<f64>>,
    #[arg(long, value_name = "N")]
    theta_samples: Option<usize>,
    /// OBJ output path (surface).
    #[arg(long, value_name = "PATH")]
    obj: Option<PathBuf>,
    /// CSV output path; standard output when absent.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Tolerance override, repeatable.
    #[arg(long, value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// Arc-length values for frame and invariants, comma-separated or repeated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    at: Vec<f64>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match (&self.config, &self.builtin) {
            (Some(p), _) => RunConfig::load(p)?,
            (None, Some(name)) => RunConfig::from_builtin(name),
            (None, None) => return Err(CliError::config("one of --config or --builtin is required")),
        };
        if let Some(k) = self.kind {
            cfg.output.kind = Some(match k {
                KindArg::Hyperbolic => KindName::Hyperbolic,
                KindArg::Desitter => KindName::Desitter,
            });
        }
        if let Some(r) = &self.range {
            cfg.grid.range = Some([r[0], r[1]]);
        }
        if let Some(n) = self.samples {
            cfg.grid.samples = Some(n);
        }
        if let Some(r) = &self.theta_range {
            cfg.grid.theta_range = Some([r[0], r[1]]);
        }
        if let Some(n) = self.theta_samples {
            cfg.grid.theta_samples = Some(n);
        }
        if let Some(p) = &self.obj {
            cfg.output.obj = Some(p.clone());
        }
        if let Some(p) = &self.csv {
            cfg.output.csv = Some(p.clone());
        }
        for t in &self.tol {
            cfg.tolerances.set(t)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("LDX_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::config(format!("LDX_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(format!("cannot set up {n} threads: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    let (common, cmd) = match &cli.command {
        Command::Examples { name } => return write_or_print(None, &commands::examples(name.as_deref())?),
        Command::Frame(c)
        | Command::Invariants(c)
        | Command::Locus(c)
        | Command::Surface(c)
        | Command::Classify(c)
        | Command::Verify(c) => (c, &cli.command),
    };
    let cfg = common.resolve()?;
    let csv_path = cfg.output.csv.clone();

    if let Command::Verify(_) = cmd {
        let spec = cfg.system_spec()?;
        let checks = match ldx_core::frame::compile_system(spec) {
            Ok(sys) => verify::run(&Context { config: cfg, sys }),
            Err(e @ (ldx_core::Error::Parse(_) | ldx_core::Error::InvalidInput(_))) => return Err(e.into()),
            Err(e) => vec![verify::failed_compile(&e)],
        };
        let mut text: String = checks.iter().map(|c| c.line() + "\n").collect();
        let failed = checks.iter().filter(|c| c.outcome == verify::Outcome::Fail).count();
        let skipped = checks.iter().filter(|c| c.outcome == verify::Outcome::Skip).count();
        text.push_str(&format!(
            "verify: {} passed, {failed} failed, {skipped} skipped\n",
            checks.len() - failed - skipped
        ));
        write_or_print(None, &text)?;
        return match checks.iter().find(|c| c.outcome == verify::Outcome::Fail) {
            Some(c) => Err(CliError::verify(format!("{failed} check(s) failed, first: {}", c.name))),
            None => Ok(()),
        };
    }

    let ctx = Context::new(cfg)?;
    match cmd {
        Command::Frame(c) => write_or_print(csv_path.as_deref(), &commands::frame(&ctx, &c.at)?),
        Command::Invariants(c) => write_or_print(csv_path.as_deref(), &commands::invariants(&ctx, &c.at)?),
        Command::Locus(_) => {
            let (csv, outcome) = commands::locus(&ctx);
            write_or_print(csv_path.as_deref(), &csv)?;
            outcome
        }
        Command::Classify(_) => {
            let report = commands::classify(&ctx)?;
            write_or_print(csv_path.as_deref(), &report.csv)?;
            for (class, n) in &report.counts {
                eprintln!("{}: {n}", class.name());
            }
            if report.disagreements > 0 {
                return Err(CliError::verify(format!(
                    "{} point(s) disagree with the height-function oracle",
                    report.disagreements
                )));
            }
            Ok(())
        }
        Command::Surface(_) => {
            let out = commands::surface(&ctx)?;
            write_or_print(csv_path.as_deref(), &out.csv)?;
            if let Some(p) = &ctx.config.output.obj {
                std::fs::write(p, &out.mesh.text).map_err(|e| CliError::io(format!("cannot write {}: {e}", p.display())))?;
                eprintln!("wrote {} vertices, {} triangles to {}", out.mesh.vertices, out.mesh.triangles, p.display());
            }
            Ok(())
        }
        Command::Verify(_) | Command::Examples { .. } => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit as u8)
        }
    }
}
