use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use illposed::expansion::FlowModel;
use illposed::experiment::{
    emit_report, run_all, run_discontinuity, run_lemma31, run_oracle_check, run_proposition,
    ExperimentConfig, OutputFormat, RunReport,
};

#[derive(Parser)]
#[command(name = "illposed", version, about = "Norm-discontinuity experiments for compressible and incompressible Navier-Stokes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the `out` key.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "both")]
    format: OutputFormat,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Regularity-shifted Besov norms of the data across levels.
    Lemma31,
    /// Order-by-order bounds of the expansion.
    Prop,
    /// Gap between solution and data, compressible model.
    Theorem,
    /// Gap between solution and data, incompressible model.
    Corollary,
    /// Expansion against direct integration.
    Oracle,
    /// Every run, including the cutoff, data, semigroup and Bernstein checks.
    All,
}

fn execute(command: Command, config: &ExperimentConfig) -> illposed::Result<Vec<RunReport>> {
    Ok(match command {
        Command::Lemma31 => vec![run_lemma31(config)?],
        Command::Prop => vec![run_proposition(config)?],
        Command::Theorem => vec![run_discontinuity(config, FlowModel::Compressible)?],
        Command::Corollary => vec![run_discontinuity(config, FlowModel::Incompressible)?],
        Command::Oracle => vec![run_oracle_check(config)?],
        Command::All => run_all(config)?,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match &cli.config {
        Some(path) => ExperimentConfig::load(path),
        None => ExperimentConfig::parse(""),
    };
    let mut config = match config {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(out) = cli.out {
        config.out = out;
    }
    if config.large {
        eprintln!("estimated peak memory: {:.2} GiB", config.memory_estimate_gib());
    }
    if matches!(cli.command, Command::Oracle) && !config.oracle {
        eprintln!("error: the oracle run needs oracle = true");
        return ExitCode::from(2);
    }

    let reports = match execute(cli.command, &config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let mut all_pass = true;
    for report in &reports {
        println!("[{}] {:.1} s", report.run_id, report.wall_clock.as_secs_f64());
        for c in &report.checks {
            println!(
                "  {} {}: {:.6e} (tolerance {:e}; {})",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.tolerance,
                c.detail
            );
        }
        for note in &report.notes {
            println!("  note: {note}");
        }
        match emit_report(report, &config.out, cli.format) {
            Ok(paths) => {
                for p in paths {
                    println!("  wrote {}", p.display());
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
        all_pass &= report.passed();
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
