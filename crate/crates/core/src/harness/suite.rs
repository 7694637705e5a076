use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{aggregate, format_table, EpisodeResult, Summary};
use crate::sim::{generate_episode, save_episode};

use super::config::RunConfig;
use super::episode::{run_episode_into, verify_log_metrics, EpisodeLog};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub results: Vec<EpisodeResult>,
    pub summary: Summary,
    pub table: String,
}

pub fn episode_stem(index: usize) -> String {
    format!("ep_{index:04}")
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Generates, saves and runs one episode; the log is written even when the
/// run fails.
fn run_one(cfg: &RunConfig, index: usize, episodes: &Path, snapshots: &Path) -> Result<EpisodeResult> {
    let stem = episode_stem(index);
    let spec = generate_episode(cfg.episode_seed(index), &cfg.world)?;
    save_episode(&spec, episodes, &stem)?;
    let snap_dir = snapshots.join(&stem);
    if cfg.snapshot_period > 0 {
        create_dir(&snap_dir)?;
    }
    let palette = spec.palette.clone();
    let mut log = EpisodeLog::default();
    let outcome = run_episode_into(
        &spec,
        &cfg.agent,
        cfg.snapshot_period,
        |step, agent| {
            write(&snap_dir.join(format!("occ_{step:05}.pgm")), &agent.occupancy.to_pgm())?;
            write(
                &snap_dir.join(format!("goal_{step:05}.ppm")),
                &agent.goal_map.to_ppm(&palette),
            )
        },
        &mut log,
    );
    log.write(&episodes.join(format!("{stem}.jsonl")))?;
    outcome.map_err(|e| Error::InvalidInput(format!("episode {index} (seed {}): {e}", cfg.episode_seed(index))))
}

fn results_jsonl(results: &[EpisodeResult]) -> String {
    results
        .iter()
        .map(|r| serde_json::to_string(r).expect("results serialize") + "\n")
        .collect()
}

/// Runs `cfg.episode_count` episodes seeded `seed, seed + 1, ...` and writes
/// under `cfg.out_dir`: `config.toml`, `episodes/ep_NNNN.{world,episode.toml,jsonl}`,
/// `results.jsonl`, `summary.txt` and `summary.json`.
pub fn run_suite(cfg: &RunConfig) -> Result<SuiteOutcome> {
    cfg.validate()?;
    let out = &cfg.out_dir;
    let episodes = out.join("episodes");
    let snapshots = out.join("snapshots");
    create_dir(&episodes)?;
    cfg.save(&out.join("config.toml"))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallel)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<Result<EpisodeResult>> = pool.install(|| {
        (0..cfg.episode_count)
            .into_par_iter()
            .map(|i| run_one(cfg, i, &episodes, &snapshots))
            .collect()
    });
    let mut results = Vec::with_capacity(outcomes.len());
    let mut first_err = None;
    for o in outcomes {
        match o {
            Ok(r) => results.push(r),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    write(&out.join("results.jsonl"), results_jsonl(&results).as_bytes())?;
    if let Some(e) = first_err {
        return Err(e);
    }
    let summary = aggregate(&results)?;
    let table = format_table(&[(cfg.method.as_str(), &summary)]);
    write(&out.join("summary.txt"), table.as_bytes())?;
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    write(&out.join("summary.json"), json.as_bytes())?;
    Ok(SuiteOutcome {
        results,
        summary,
        table,
    })
}

/// Recomputes the table from every `*.jsonl` episode log in `dir` (or in
/// `dir/episodes` when present), checking each log's stored result.
pub fn eval_logs(dir: &Path, method: &str) -> Result<SuiteOutcome> {
    let dir: PathBuf = if dir.join("episodes").is_dir() {
        dir.join("episodes")
    } else {
        dir.to_path_buf()
    };
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map_err(|e| Error::io(&dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    paths.sort();
    let mut results = Vec::with_capacity(paths.len());
    for p in &paths {
        let log = EpisodeLog::read(p)?;
        let r = verify_log_metrics(&log).map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display())))?;
        results.push(r);
    }
    let summary = aggregate(&results)?;
    let table = format_table(&[(method, &summary)]);
    Ok(SuiteOutcome {
        results,
        summary,
        table,
    })
}
