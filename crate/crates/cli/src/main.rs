use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use exmass_cli::{
    run_mass, run_sweep, run_verify, to_json, write_mass_outputs, write_sweep_outputs, write_verify_outputs,
    zoo_rows, CliError, CliResult, RunConfig,
};
use exmass_core::mass::{ConstantVariant, FieldChoice, Method};

// A closed stdout (e.g. piping into `head`) is not an error worth reporting.
macro_rules! out {
    ($($t:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(name = "exmass", version, about = "Mass integrals of asymptotically Euclidean metrics and immersions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extrapolated mass by one or more methods.
    Mass(RunArgs),
    /// Pointwise identity suite (and optionally the flux/bulk identity).
    Verify(RunArgs),
    /// Resolution and ladder refinement study.
    Sweep(RunArgs),
    /// List the built-in models.
    Zoo {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstantArg {
    Proof,
    Printed,
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldArg {
    Position,
    Gradient,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Zoo key (see `exmass zoo`).
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    q: Option<usize>,
    /// coordinate-adm, coordinate-gbc, lovelock-flux or bulk-identity; repeatable.
    #[arg(long)]
    method: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_enum)]
    constant: Option<ConstantArg>,
    #[arg(long, value_enum)]
    field: Option<FieldArg>,
    #[arg(long)]
    nodes: Option<usize>,
    /// Also check the flux/bulk identity (verify only).
    #[arg(long)]
    main_identity: bool,
    /// Debug: negate the Riemann tensor (negative control for verify).
    #[arg(long)]
    flip_sign: bool,
}

impl RunArgs {
    fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(m) = &self.model {
            cfg.model = None;
            cfg.zoo = Some(m.clone());
        }
        if let Some(q) = self.q {
            cfg.q = q;
        }
        if !self.method.is_empty() {
            cfg.methods = self
                .method
                .iter()
                .map(|s| s.parse::<Method>().map_err(|e| CliError::Config(format!("--method: {e}"))))
                .collect::<CliResult<_>>()?;
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        if let Some(c) = self.constant {
            cfg.constant = match c {
                ConstantArg::Proof => ConstantVariant::Proof,
                ConstantArg::Printed => ConstantVariant::Printed,
            };
        }
        if let Some(f) = self.field {
            cfg.field = match f {
                FieldArg::Position => FieldChoice::Position,
                FieldArg::Gradient => FieldChoice::Gradient,
            };
        }
        if let Some(n) = self.nodes {
            cfg.nodes = n;
        }
        cfg.suite.main_identity |= self.main_identity;
        cfg.flip_sign |= self.flip_sign;
        Ok(cfg)
    }

    fn install_threads(&self) -> CliResult<()> {
        if let Some(t) = self.threads {
            if t == 0 {
                return Err(CliError::Config("--threads must be positive".into()));
            }
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(())
    }
}

fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Zoo { json } => {
            let rows = zoo_rows()?;
            if json {
                out!("{}", to_json(&rows));
            } else {
                for r in rows {
                    out!(
                        "{:24} {:9} n={} tau={:<5} {}",
                        r.key, r.kind, r.n, r.decay_order, r.description
                    );
                }
            }
            Ok(true)
        }
        Command::Mass(args) => {
            args.install_threads()?;
            let cfg = args.resolve()?;
            let records = run_mass(&cfg)?;
            match &cfg.out {
                Some(dir) => write_mass_outputs(dir, &records)?,
                None => out!("{}", to_json(&records)),
            }
            for r in &records {
                eprintln!(
                    "{} q={} {}: {:.8} ± {:.2e}",
                    r.model,
                    r.q,
                    r.method.as_str(),
                    r.extrapolated,
                    r.error
                );
            }
            Ok(records.iter().all(|r| r.pass))
        }
        Command::Verify(args) => {
            args.install_threads()?;
            let cfg = args.resolve()?;
            let reports = run_verify(&cfg)?;
            match &cfg.out {
                Some(dir) => write_verify_outputs(dir, &reports)?,
                None => out!("{}", to_json(&reports)),
            }
            for r in &reports {
                eprintln!(
                    "{} {:28} q={:?} max={:.3e} tol={:.1e}",
                    if r.pass { "PASS" } else { "FAIL" },
                    r.identity,
                    r.q,
                    r.max_residual,
                    r.tolerance
                );
            }
            Ok(reports.iter().all(|r| r.pass))
        }
        Command::Sweep(args) => {
            args.install_threads()?;
            let cfg = args.resolve()?;
            let rows = run_sweep(&cfg)?;
            match &cfg.out {
                Some(dir) => write_sweep_outputs(dir, &rows)?,
                None => out!("{}", to_json(&rows)),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("exmass: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
