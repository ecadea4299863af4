use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod fixture;
mod report;

/// Verify character-sum expansions, local-factor inversion and twist
/// decompositions on concrete Dirichlet series, and run the phase and
/// contradiction-audit computations.
#[derive(Parser)]
#[command(name = "twistcert", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Global {
    /// Emit the report as JSON
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the report to this file instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for sampled sweeps
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Expansion of e(-an/D) on reduced residues into characters
    #[command(name = "verify-lemma1")]
    VerifyLemma1(commands::Lemma1Args),
    /// Principal restriction of a series through its local inverses
    #[command(name = "verify-lemma2")]
    VerifyLemma2(commands::Lemma2Args),
    /// Decomposition of the additive twist into character twists
    #[command(name = "verify-lemma3")]
    VerifyLemma3(commands::Lemma3Args),
    /// Detect polynomial local inverses
    Split(commands::SplitArgs),
    /// Degree, conductor and internal shift from gamma data
    Invariants(commands::InvariantsArgs),
    /// Dump the decomposition terms
    Decompose(commands::DecomposeArgs),
    /// Pole location and index of a standard twist
    Pole(commands::PoleArgs),
    /// Critical point and asymptotics of the stationary phase
    Phase(commands::PhaseArgs),
    /// Run the contradiction audit on a twist hypothesis
    Audit(commands::AuditArgs),
    /// Saturation witnesses and independence rank
    Saturation(commands::SaturationArgs),
    /// Write a fixture file
    #[command(name = "gen-fixture")]
    GenFixture(commands::GenFixtureArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let result = match &cli.command {
        Command::VerifyLemma1(a) => commands::lemma1(a, g),
        Command::VerifyLemma2(a) => commands::lemma2(a, g),
        Command::VerifyLemma3(a) => commands::lemma3(a, g),
        Command::Split(a) => commands::split(a),
        Command::Invariants(a) => commands::invariants(a),
        Command::Decompose(a) => commands::decompose(a),
        Command::Pole(a) => commands::pole(a),
        Command::Phase(a) => commands::phase(a),
        Command::Audit(a) => commands::audit(a),
        Command::Saturation(a) => commands::saturation(a),
        Command::GenFixture(a) => return finish_raw(commands::gen_fixture(a), g),
    };
    match result.and_then(|r| r.emit(g.json, g.out.as_deref()).map(|_| r.pass)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

/// Commands whose output is a document rather than a report.
fn finish_raw(body: anyhow::Result<String>, g: &Global) -> ExitCode {
    let written = body.and_then(|text| match &g.out {
        Some(path) => std::fs::write(path, text).map_err(|e| anyhow::anyhow!("writing {}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    });
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
