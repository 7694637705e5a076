use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use goalnav::harness::{eval_logs, replay, run_suite, EpisodeLog, RunConfig};
use goalnav::sim::load_episode;
use goalnav::Error;

#[derive(Parser)]
#[command(
    name = "goalnav",
    version,
    about = "Multi-goal navigation agent and benchmark harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate and run a suite of episodes.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write map snapshots every N steps (default 50 when given bare).
        #[arg(long, num_args = 0..=1, default_missing_value = "50")]
        snapshots: Option<usize>,
        /// Worker threads; 0 uses every core.
        #[arg(long)]
        parallel: Option<usize>,
    },
    /// Re-execute a log against its episode and report the first divergence.
    Replay {
        #[arg(long)]
        log: PathBuf,
        /// Episode sidecar; defaults to the one next to the log.
        #[arg(long)]
        episode: Option<PathBuf>,
    },
    /// Recompute the summary table from a directory of logs.
    Eval {
        #[arg(long)]
        logs: PathBuf,
        #[arg(long, default_value = "goalnav")]
        method: String,
    },
}

fn exit_code(e: &Error) -> ExitCode {
    match e {
        Error::Config(_) => ExitCode::from(1),
        _ => ExitCode::from(2),
    }
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    exit_code(&e)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            episodes,
            out,
            snapshots,
            parallel,
        } => {
            let mut cfg = match config {
                Some(p) => match RunConfig::load(&p) {
                    Ok(c) => c,
                    Err(e) => return fail(e),
                },
                None => RunConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(n) = episodes {
                cfg.episode_count = n;
            }
            if let Some(o) = out {
                cfg.out_dir = o;
            }
            if let Some(s) = snapshots {
                cfg.snapshot_period = s;
            }
            if let Some(p) = parallel {
                cfg.parallel = p;
            }
            if let Err(e) = cfg.validate() {
                return fail(e);
            }
            match run_suite(&cfg) {
                Ok(outcome) => {
                    print!("{}", outcome.table);
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Replay { log, episode } => {
            let sidecar = episode.unwrap_or_else(|| {
                let name = log
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                log.with_file_name(format!("{name}.episode.toml"))
            });
            let spec = match load_episode(&sidecar) {
                Ok(s) => s,
                Err(e) => return fail(e),
            };
            let log = match EpisodeLog::read(&log) {
                Ok(l) => l,
                Err(e) => return fail(e),
            };
            match replay(&log, &spec) {
                Ok(report) if report.is_clean() => {
                    println!("ok: {} steps replayed without divergence", report.steps_checked);
                    ExitCode::SUCCESS
                }
                Ok(report) => {
                    println!(
                        "divergence at step {}: {}",
                        report.first_divergence.unwrap_or_default(),
                        report.detail.unwrap_or_default()
                    );
                    ExitCode::from(2)
                }
                Err(e) => fail(e),
            }
        }
        Command::Eval { logs, method } => match eval_logs(&logs, &method) {
            Ok(outcome) => {
                print!("{}", outcome.table);
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
    }
}
