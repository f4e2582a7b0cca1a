use clap::{Args, Parser, Subcommand, ValueEnum};
use equistress::config::{CaseConfig, Method};
use equistress::error::{exit, AppError};
use equistress::run::{self, Overrides};
use std::path::PathBuf;
use std::process::ExitCode;

/// Guaranteed error bounds for linear elasticity finite element solutions.
#[derive(Parser)]
#[command(name = "equistress", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the FE problem and write the displacement and stress fields.
    Solve(Common),
    /// Compute the error bound with the standard or enhanced construction.
    Estimate(Common),
    /// Run enhanced estimates over a list of fractions or thresholds.
    Sweep(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Standard,
    Enhanced,
}

#[derive(Clone, Copy, ValueEnum)]
enum CriterionArg {
    Radius,
    Edge,
    Area,
    Estimate,
}

#[derive(Args)]
struct Common {
    /// Case file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Gmsh MSH 2.2 file replacing the mesh of the case file.
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long, value_enum)]
    criterion: Option<CriterionArg>,
    /// Comma-separated shares of the elements to optimize.
    #[arg(long, value_delimiter = ',', num_args = 1.., conflicts_with = "thresholds")]
    fractions: Option<Vec<f64>>,
    /// Comma-separated criterion thresholds.
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
    thresholds: Option<Vec<f64>>,
    /// Uniform refinement levels of the reference solution (0 disables it).
    #[arg(long)]
    ref_levels: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            mesh: self.mesh.clone(),
            method: self.method.map(|m| match m {
                MethodArg::Standard => Method::Standard,
                MethodArg::Enhanced => Method::Enhanced,
            }),
            criterion: self.criterion.map(|c| {
                match c {
                    CriterionArg::Radius => "radius",
                    CriterionArg::Edge => "edge",
                    CriterionArg::Area => "area",
                    CriterionArg::Estimate => "estimate",
                }
                .to_string()
            }),
            fractions: self.fractions.clone(),
            thresholds: self.thresholds.clone(),
            ref_levels: self.ref_levels,
            out: self.out.clone(),
        }
    }

    fn config(&self) -> Result<CaseConfig, AppError> {
        let mut cfg = CaseConfig::load(&self.config)?;
        self.overrides().apply(&mut cfg)?;
        if let Some(n) = self.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| AppError::Usage(format!("cannot start {n} threads: {e}")))?;
        }
        Ok(cfg)
    }
}

fn execute(cli: &Cli) -> Result<(), AppError> {
    match &cli.command {
        Command::Solve(c) => {
            let r = run::run_solve(&c.config()?)?;
            println!("solved {}: {} elements, {} nodes, energy norm {:.6e}", r.case, r.mesh.n_elements, r.mesh.n_nodes, r.energy_norm);
        }
        Command::Estimate(c) => {
            let r = run::run_estimate(&c.config()?)?;
            print!("{} estimate for {}: theta = {:.6e}", r.method, r.case, r.theta);
            if let (Some(err), Some(eta)) = (r.reference_error, r.effectivity) {
                print!(", reference error = {err:.6e}, effectivity = {eta:.4}");
            }
            println!();
        }
        Command::Sweep(c) => {
            let cfg = c.config()?;
            let (r, _) = run::run_sweep(&cfg)?;
            println!("sweep for {}: {} rows written to {}", r.case, r.n_rows, cfg.output.dir.join("sweep.csv").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            let mut msg = e.to_string();
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                let text = s.to_string();
                if !msg.contains(&text) {
                    msg.push_str(": ");
                    msg.push_str(&text);
                }
                source = s.source();
            }
            eprintln!("error: {msg}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
