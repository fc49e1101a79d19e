use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use projein::connection::BUILTINS;
use projein_cli::explain::explain;
use projein_cli::{pipeline, resolve, CliError, Manifest, Overrides, Report, Ring};

#[derive(Parser)]
#[command(name = "projein", version, about = "Projective invariants and Einstein-metrisability checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a manifest and write a JSON report.
    Run {
        manifest: PathBuf,
        /// Report path; overrides [output] path. Without either, the report goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        ring: Option<Ring>,
        /// Relative tolerance on the float ring.
        #[arg(long)]
        tol: Option<f64>,
        /// Sampling seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Record wall-clock timings in the report.
        #[arg(long)]
        timing: bool,
    },
    /// Summarize a report.
    Explain { report: PathBuf },
    /// List the builtin geometries.
    ListBuiltins,
}

fn run(manifest: &Path, out: Option<PathBuf>, ov: Overrides, timing: bool) -> Result<(), CliError> {
    let m = Manifest::load(manifest)?;
    let out = out.or_else(|| {
        m.output.path.as_ref().map(|p| manifest.parent().unwrap_or(Path::new(".")).join(p))
    });
    let plan = resolve(m, &ov)?;
    let report = pipeline::run(&plan, timing)?;
    let json = report.to_json();
    match out {
        Some(path) => {
            std::fs::write(&path, json).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            if let Some(v) = &report.verdict {
                eprintln!("{}", v.classification);
            }
        }
        None => print!("{json}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { manifest, out, ring, tol, seed, timing } => run(&manifest, out, Overrides { ring, tol, seed }, timing),
        Command::Explain { report } => std::fs::read_to_string(&report)
            .map_err(|e| CliError::Report(format!("{}: {e}", report.display())))
            .and_then(|t| Report::from_json(&t))
            .map(|r| print!("{}", explain(&r))),
        Command::ListBuiltins => {
            for (name, n, desc) in BUILTINS {
                let dim = if *n == 0 { "n".to_string() } else { n.to_string() };
                println!("{name:<16} {dim:>2}  {desc}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("projein: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
