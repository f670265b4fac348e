use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use exptype::commands::{run, Command, Overrides};
use exptype::manifest::load_manifest;
use exptype::report::render;
use exptype::{UsageError, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "exptype", version, about = "Certify exponential type of formal connections with quadratic poles")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args)]
struct Common {
    /// TOML manifest describing the field, ring or connection, and run parameters.
    #[arg(long)]
    manifest: PathBuf,
    /// Comma-separated odd primes.
    #[arg(long, value_delimiter = ',')]
    primes: Option<Vec<u64>>,
    /// Truncation order in t.
    #[arg(long)]
    t_order: Option<usize>,
    /// Truncation order in q.
    #[arg(long)]
    q_order: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Largest denominator accepted for rational indicial roots.
    #[arg(long)]
    root_bound: Option<u64>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Reject unknown manifest keys instead of warning.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Split, certify the residual connections, and test p-curvature prime by prime.
    Certify(Common),
    /// Elementary splitting: exponents, block ranks, projector leading terms.
    Split(Common),
    /// Check the axioms and theorem chain for a Frobenius-linear action.
    SteenrodVerify(Common),
    /// Twisted de Rham analogue for a potential with an isolated critical point.
    Mf(Common),
}

fn main() -> ExitCode {
    // clap exits with 2 on bad arguments, which would read as inconclusive
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE as u8 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (cmd, args) = match cli.command {
        Cmd::Certify(a) => (Command::Certify, a),
        Cmd::Split(a) => (Command::Split, a),
        Cmd::SteenrodVerify(a) => (Command::SteenrodVerify, a),
        Cmd::Mf(a) => (Command::Mf, a),
    };
    match execute(cmd, &args) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}

fn execute(cmd: Command, a: &Common) -> Result<i32, UsageError> {
    let loaded = load_manifest(&a.manifest)?;
    if !loaded.unknown_keys.is_empty() {
        let keys = loaded.unknown_keys.join(", ");
        if a.strict {
            return Err(UsageError(format!("unknown manifest keys: {keys}")));
        }
        eprintln!("warning: ignoring unknown manifest keys: {keys}");
    }
    let o = Overrides { primes: a.primes.clone(), t_order: a.t_order, q_order: a.q_order, seed: a.seed, root_bound: a.root_bound };
    let out = run(cmd, &loaded, &o)?;
    let text = render(&out.report);
    match &a.json {
        Some(p) => std::fs::write(p, &text).map_err(|e| UsageError(format!("cannot write {}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    eprintln!("{}: {}", cmd.name(), out.status.name());
    Ok(out.exit_code)
}
