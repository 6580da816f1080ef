use clap::{Parser, Subcommand};

use ctqt_core::protocol::Fault;

use crate::report::{run_experiments, write_report};
use crate::spec::{parse_config, RunArgs};
use crate::verify::{run_suite, Suite};
use crate::CliError;

/// Threshold-controlled quantum teleportation experiments.
#[derive(Debug, Parser)]
#[command(name = "ctqt", version, args_conflicts_with_subcommands = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a self-check suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Make Bob skip his phase corrections.
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

fn verify(suite: Suite, seed: u64, inject_fault: bool) -> Result<(), CliError> {
    let fault = if inject_fault { Fault::SkipPhaseRecovery } else { Fault::None };
    let checks = run_suite(suite, seed, fault);
    let failed = checks.iter().filter(|c| !c.passed()).count();
    for c in &checks {
        match &c.failure {
            None => println!("ok   {}::{}", c.suite, c.name),
            Some(why) => println!("FAIL {}::{}: {why}", c.suite, c.name),
        }
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    match failed {
        0 => Ok(()),
        n => Err(CliError::Verification(format!("{n} check(s) failed"))),
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Some(Command::Verify { suite, seed, inject_fault }) => verify(suite, seed, inject_fault),
        None => {
            let spec = parse_config(&cli.run)?;
            let report = run_experiments(&spec)?;
            write_report(&report, spec.format, spec.out.as_deref())
        }
    }
}

/// Parses `args` (program name first), runs, and returns the exit status.
pub fn main_with<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
