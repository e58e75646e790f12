//! Batch checker for hint/coercion scripts.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hintelab::front::{Flags, Session};

#[derive(Parser)]
#[command(name = "hintelab", version, about = "A miniature dependently-typed checker with unification hints and nonuniform coercions")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Obligations {
    /// Report obligations as generated axioms and continue.
    Emit,
    /// Treat any produced obligation as an error.
    Fail,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a script file and print each command's output
    Check {
        file: PathBuf,
        /// Write a unification trace to stderr
        #[arg(long)]
        trace: bool,
        /// Hint recursion bound
        #[arg(long, default_value_t = 8)]
        max_hint_depth: usize,
        /// Reduction step budget
        #[arg(long, default_value_t = 1_000_000)]
        fuel: u64,
        #[arg(long, value_enum, default_value_t = Obligations::Emit)]
        obligations: Obligations,
        /// Print the hint database after the script finishes
        #[arg(long)]
        dump_hints: bool,
        /// Print the coercion database after the script finishes
        #[arg(long)]
        dump_coercions: bool,
        /// Continue past failed commands
        #[arg(long)]
        keep_going: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Command::Check {
            file,
            trace,
            max_hint_depth,
            fuel,
            obligations,
            dump_hints,
            dump_coercions,
            keep_going,
        } => {
            let mut session = Session::new(Flags {
                trace,
                max_hint_depth,
                fuel,
                obligations_fail: obligations == Obligations::Fail,
                keep_going,
            });
            let code = session.run_file(&file);
            if dump_hints {
                session.dump_hints();
            }
            if dump_coercions {
                session.dump_coercions();
            }
            print!("{}", session.output);
            eprint!("{}", session.trace_output);
            ExitCode::from(code as u8)
        }
    }
}
