//! Episode and suite runners, logs, replay and evaluation.

mod config;
mod episode;
mod suite;

pub use config::RunConfig;
pub use episode::{
    agent_config_for, replay, run_episode, run_episode_into, verify_log_metrics, EpisodeLog, ReplayReport, StepRecord,
};
pub use suite::{episode_stem, eval_logs, run_suite, SuiteOutcome};
