use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use heralded_cli::check::run_checks;
use heralded_cli::figures::{emit_figure_bundle, Figure};
use heralded_cli::scenario::{run_scenario, RunOptions, RunReport};
use heralded_cli::CliError;

#[derive(Parser)]
#[command(name = "heralded", version, about = "Scenario runner for reflection-based heralded entanglement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory for CSV and JSON files.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Frequency grid points (overrides the config).
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    /// Seed for the randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a TOML config.
    Run { config: PathBuf },
    /// Write the data behind a figure (fig4, fig5, fig6, or all).
    Figures { which: String },
    /// Randomized invariant checks.
    Check {
        #[arg(long, default_value_t = 200)]
        cases: usize,
    },
}

fn report(r: &RunReport) {
    println!("wrote {} ({} rows)", r.csv_path.display(), r.rows);
    for p in &r.extra_paths {
        println!("wrote {}", p.display());
    }
    println!("wrote {}", r.summary_path.display());
    if !r.converged {
        eprintln!("warning: an optimizer did not converge; see the summary");
    }
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("{e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions { out_dir: cli.out.clone(), grid_points: cli.grid_points };
    match cli.command {
        Command::Run { config } => match run_scenario(&config, &opts) {
            Ok(r) => {
                report(&r);
                ExitCode::from(r.exit_code() as u8)
            }
            Err(e) => fail(e),
        },
        Command::Figures { which } => {
            let figures: Vec<Figure> = if which == "all" {
                Figure::ALL.to_vec()
            } else {
                match which.parse() {
                    Ok(f) => vec![f],
                    Err(msg) => return fail(CliError::config("figure", msg)),
                }
            };
            let mut code = 0;
            for f in figures {
                match emit_figure_bundle(f, &opts) {
                    Ok(r) => {
                        report(&r);
                        code = code.max(r.exit_code());
                    }
                    Err(e) => return fail(e),
                }
            }
            ExitCode::from(code as u8)
        }
        Command::Check { cases } => {
            let results = run_checks(cli.seed, cases);
            for r in &results {
                println!(
                    "{} {} ({} cases, {} failures, worst margin {:.3e})",
                    if r.passed() { "PASS" } else { "FAIL" },
                    r.name,
                    r.cases,
                    r.failures,
                    r.worst
                );
            }
            if results.iter().all(|r| r.passed()) {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
