use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use retain_cli::experiment::{generate, simulate};
use retain_cli::sweep::run_sweep;
use retain_cli::{load_config, run_experiment, write_bundle, Bundle, CliError, RunOptions, StrategySpec};

#[derive(Parser)]
#[command(name = "retain", version, about = "Fire-retaining games on truncated Cayley graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the truncated graph and write it as an adjacency list.
    Generate(Common),
    /// Play the configured game; write the transcript and snapshots.
    Simulate(Common),
    /// Play the game and run the configured analyses.
    Analyze(Common),
    /// Play a transported game and certify it against its source.
    Transport(Common),
    /// Run every combination of `a|b` alternatives in the config.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's `out` key.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fail if the config asks for randomness.
    #[arg(long)]
    seedless: bool,
    /// Comma-separated turns to snapshot (default: first and last).
    #[arg(long, value_delimiter = ',')]
    snapshot_turns: Option<Vec<usize>>,
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions {
            seedless: self.seedless,
            snapshot_turns: self.snapshot_turns.clone(),
        }
    }
}

fn out_dir(common: &Common, from_config: Option<&Path>) -> PathBuf {
    common
        .out
        .clone()
        .or_else(|| from_config.map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn finish(bundle: &Bundle, dir: &Path) -> Result<i32, CliError> {
    write_bundle(bundle, dir)?;
    if let Some(report) = bundle.file("report.txt") {
        print!("{report}");
    }
    if let Some(why) = &bundle.certification_failure {
        return Err(CliError::Certification(why.clone()));
    }
    Ok(bundle.exit_code())
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Sweep(common) => {
            let text = std::fs::read_to_string(&common.config).map_err(|e| CliError::io(&common.config, e))?;
            let base = common.config.parent().map(Path::to_path_buf).unwrap_or_default();
            let out = out_dir(&common, None);
            let rows = run_sweep(&text, &base, &out, &common.options())?;
            for r in &rows {
                println!("run-{:03} exit={} {}", r.run, r.exit_code, r.outcome);
            }
            Ok(if rows.iter().any(|r| r.exit_code == 1) { 1 } else { 0 })
        }
        Command::Generate(common) => {
            let cfg = load_config(&common.config, common.seedless)?;
            finish(&generate(&cfg)?, &out_dir(&common, cfg.out.as_deref())).map(|_| 0)
        }
        Command::Simulate(common) => {
            let cfg = load_config(&common.config, common.seedless)?;
            let bundle = simulate(&cfg, &common.options())?;
            finish(&bundle, &out_dir(&common, cfg.out.as_deref())).map(|_| 0)
        }
        Command::Analyze(common) => {
            let cfg = load_config(&common.config, common.seedless)?;
            finish(&run_experiment(&cfg, &common.options())?, &out_dir(&common, cfg.out.as_deref()))
        }
        Command::Transport(common) => {
            let cfg = load_config(&common.config, common.seedless)?;
            if !matches!(cfg.strategy, StrategySpec::Transport { .. }) {
                return Err(CliError::Config {
                    line: 0,
                    msg: "transport needs strategy=transport:<source-config>:<c>:<q>".into(),
                });
            }
            finish(&run_experiment(&cfg, &common.options())?, &out_dir(&common, cfg.out.as_deref()))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
