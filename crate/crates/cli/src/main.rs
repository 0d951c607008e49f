use cacsa::{run_source, Options};
use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

/// Checker for dependent types with size annotations. Exit codes: 0 ok,
/// 1 type or constraint error, 2 parse or validation error, 3 out of fuel.
#[derive(Parser)]
#[command(name = "cacsa", version)]
struct Cli {
    /// Input file (declarations and goals, usually .cacsa)
    file: PathBuf,

    /// Rewrite-step budget per normalization
    #[arg(long, default_value_t = 100_000)]
    fuel: u64,

    /// Print each goal's constraint pipeline (input, simplified, solution)
    #[arg(long)]
    dump_constraints: bool,

    /// Print the types inferred for every subterm
    #[arg(long)]
    trace: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match std::fs::read_to_string(&cli.file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("{}: {e}", cli.file.display());
            return ExitCode::from(2);
        }
    };
    let opts = Options {
        fuel: cli.fuel,
        dump_constraints: cli.dump_constraints,
        trace: cli.trace,
    };
    let name = cli.file.display().to_string();
    let outcome = run_source(&name, &text, &opts);
    print!("{}", outcome.report);
    ExitCode::from(outcome.exit_code as u8)
}
