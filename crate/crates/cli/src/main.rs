use aniso_ppa::nalgebra::DVector;
use aniso_ppa::operators::OperatorSpec;
use aniso_ppa_cli::commands::{
    self, cmd_rate_study, cmd_run, cmd_verify, format_rate_table, format_verify_table, VerifyArgs,
};
use aniso_ppa_cli::config::ConfigFile;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Experiment runner and verification harness for anisotropic proximal
/// point and augmented Lagrangian solvers.
#[derive(Parser)]
#[command(name = "aniso-ppa", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the experiment described by a config file.
    Run {
        /// Path to the flat INI-style experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's `out` key).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed override for seeded problems and suites.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the built-in identity verification suites and print the table.
    Verify {
        /// Uniform tolerance override for every suite.
        #[arg(long)]
        tol: Option<f64>,
        /// Sample points per grid cell.
        #[arg(long, default_value_t = 100)]
        points: usize,
        /// Seed of the sample streams.
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        /// Directory to also write the table into.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep kernels × relaxation parameters on one operator and fit
    /// convergence orders on the distance tails.
    RateStudy {
        /// Operator spec, e.g. `growth_linear` or `identity:dim=3`.
        #[arg(long)]
        operator: String,
        /// Semicolon-separated kernel specs, e.g. `iso_power:p=2; sep_power:p=3`.
        #[arg(long)]
        kernels: String,
        /// Comma-separated relaxation parameters.
        #[arg(long, default_value = "1.0")]
        lambdas: String,
        /// Outer iteration budget per cell.
        #[arg(long, default_value_t = 60)]
        iters: usize,
        /// Tail length of the order fits.
        #[arg(long, default_value_t = 20)]
        tail: usize,
        /// Comma-separated starting point (defaults to all ones).
        #[arg(long)]
        x0: Option<String>,
        /// Directory to also write the table into.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(ok) => {
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool, aniso_ppa_cli::Error> {
    match cli.command {
        Command::Run { config, out, seed } => {
            let cfg = ConfigFile::from_path(&config)?;
            let artifacts = cmd_run(&cfg, out.as_deref(), seed)?;
            print!("{}", artifacts.summary);
            for f in &artifacts.files {
                eprintln!("wrote {}", f.display());
            }
            Ok(artifacts.ok)
        }
        Command::Verify {
            tol,
            points,
            seed,
            out,
        } => {
            let args = VerifyArgs {
                points,
                seed,
                tol,
                threads: commands::thread_cap(),
            };
            let (reports, ok) = cmd_verify(&args)?;
            let table = format_verify_table(&reports);
            print!("{table}");
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("verify.txt"), &table)?;
            }
            Ok(ok)
        }
        Command::RateStudy {
            operator,
            kernels,
            lambdas,
            iters,
            tail,
            x0,
            out,
        } => {
            let op = OperatorSpec::parse(&operator)?;
            let kernel_specs: Vec<String> = kernels
                .split(';')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            let lambdas = parse_f64_list(&lambdas, "lambdas")?;
            let x0 = match x0 {
                Some(raw) => {
                    let values = parse_f64_list(&raw, "x0")?;
                    if values.len() != op.dim() {
                        return Err(aniso_ppa_cli::Error::Config(format!(
                            "--x0 expects {} components, got {}",
                            op.dim(),
                            values.len()
                        )));
                    }
                    DVector::from_vec(values)
                }
                None => DVector::from_element(op.dim(), 1.0),
            };
            let rows = cmd_rate_study(
                &op,
                &kernel_specs,
                &lambdas,
                iters,
                tail,
                &x0,
                commands::thread_cap(),
            )?;
            let table = format_rate_table(&rows);
            print!("{table}");
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(dir.join("rate_study.csv"), &table)?;
            }
            Ok(true)
        }
    }
}

fn parse_f64_list(raw: &str, flag: &str) -> Result<Vec<f64>, aniso_ppa_cli::Error> {
    raw.split(',')
        .map(|part| {
            part.trim().parse::<f64>().map_err(|_| {
                aniso_ppa_cli::Error::Config(format!("--{flag}: cannot parse `{}`", part.trim()))
            })
        })
        .collect()
}
