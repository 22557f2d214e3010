use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser};
use projcone::cli::{run_command, CommandArgs, ConnectionSource, RunConfig, EXIT_INPUT};

/// Projective structures through the Thomas cone.
#[derive(Parser, Debug)]
#[command(name = "projcone", version)]
#[command(group(ArgGroup::new("source").required(true).args(["conn", "builtin"])))]
struct Cli {
    /// check | invariants | cone | flatness | geodesic | rho-geodesic | equiv | develop
    command: String,
    /// Connection document (JSON, schema 1).
    #[arg(long)]
    conn: Option<PathBuf>,
    /// Builtin connection: flat, alpha_shift or nonflat_demo, with optional `:key=value,...`.
    #[arg(long)]
    builtin: Option<String>,
    /// Second connection document for `equiv` (default: the zero connection).
    #[arg(long)]
    other: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    grid: usize,
    #[arg(long = "flat-tol", default_value_t = 1e-8)]
    flat_tol: f64,
    #[arg(long, default_value_t = 1e-2)]
    step: f64,
    #[arg(long = "match-tol", default_value_t = 1e-5)]
    match_tol: f64,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    from: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    dir: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    fiber: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    base: Option<Vec<f64>>,
    /// JSON array of target points for `develop`.
    #[arg(long)]
    targets: Option<PathBuf>,
    /// Exit with status 1 when `flatness` finds NON_FLAT.
    #[arg(long = "expect-flat")]
    expect_flat: bool,
    /// Directory receiving report.json and any CSV artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &PathBuf) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("error: cannot read {}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let loaded = (|| -> Result<_, String> {
        let source = match (&cli.conn, &cli.builtin) {
            (Some(p), _) => ConnectionSource::Document(read(p)?),
            (None, Some(b)) => ConnectionSource::Builtin(b.clone()),
            (None, None) => unreachable!("clap enforces the source group"),
        };
        let other = cli
            .other
            .as_ref()
            .map(read)
            .transpose()?
            .map(ConnectionSource::Document);
        let targets = cli.targets.as_ref().map(read).transpose()?;
        Ok((source, other, targets))
    })();
    let (source, other, targets) = match loaded {
        Ok(v) => v,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let config = RunConfig {
        flat_tol: cli.flat_tol,
        step: cli.step,
        match_tol: cli.match_tol,
        grid: cli.grid,
        out_dir: cli.out.clone(),
        ..RunConfig::default()
    };
    let args = CommandArgs {
        from: cli.from,
        dir: cli.dir,
        fiber: cli.fiber,
        base: cli.base,
        targets,
        other,
        expect_flat: cli.expect_flat,
    };
    let outcome = run_command(&cli.command, &source, &config, &args);
    if let Some(msg) = &outcome.message {
        eprintln!("{msg}");
    }
    match &config.out_dir {
        Some(dir) => {
            let written = std::fs::create_dir_all(dir).and_then(|_| {
                outcome
                    .artifacts
                    .iter()
                    .try_for_each(|a| std::fs::write(dir.join(&a.name), &a.contents))
            });
            if let Err(e) = written {
                eprintln!("error: cannot write to {}: {e}", dir.display());
                return ExitCode::from(EXIT_INPUT);
            }
        }
        None => {
            if let Some(primary) = outcome.artifacts.first() {
                print!("{}", primary.contents);
            }
        }
    }
    ExitCode::from(outcome.status)
}
