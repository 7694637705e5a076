use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Cell;
use crate::metrics::{segment_geodesics, EpisodeResult, MetricsInput};
use crate::policy::{AgentConfig, AgentState, Mode};
use crate::sim::{Action, EpisodeSpec, EpisodeStatus, Pose, Simulator};

/// One simulator step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    /// Pose after the action.
    pub pose: Pose,
    pub action: Action,
    pub mode: Mode,
    pub target: Option<Cell>,
    pub collided: bool,
    pub goals_found: usize,
    pub status: EpisodeStatus,
    /// Present on the terminal record only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<EpisodeResult>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub records: Vec<StepRecord>,
}

impl EpisodeLog {
    pub fn terminal(&self) -> Option<&StepRecord> {
        self.records.last().filter(|r| r.status.is_terminal())
    }

    pub fn result(&self) -> Option<&EpisodeResult> {
        self.terminal()?.result.as_ref()
    }

    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut records = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let r: StepRecord =
                serde_json::from_str(line).map_err(|e| Error::parse("episode log", format!("line {}: {e}", i + 1)))?;
            records.push(r);
        }
        Ok(EpisodeLog { records })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        w.write_all(self.to_jsonl().as_bytes())
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut text = String::new();
        for line in std::io::BufReader::new(file).lines() {
            text.push_str(&line.map_err(|e| Error::io(path, e))?);
            text.push('\n');
        }
        Self::from_jsonl(&text)
    }
}

/// Agent configuration adjusted to what the agent is told about the task and
/// its own body.
pub fn agent_config_for(spec: &EpisodeSpec, base: &AgentConfig) -> AgentConfig {
    AgentConfig {
        success_radius: spec.success_radius,
        agent_radius: spec.world.agent_radius(),
        ..base.clone()
    }
}

/// Drives decide -> step until the episode ends. Records are appended to
/// `log` as they happen, so a failed run leaves the partial trace behind.
/// `snapshot` is called every `snapshot_period` steps (and at the end) with
/// the step index and agent.
pub fn run_episode_into(
    spec: &EpisodeSpec,
    agent_cfg: &AgentConfig,
    snapshot_period: usize,
    mut snapshot: impl FnMut(usize, &AgentState) -> Result<()>,
    log: &mut EpisodeLog,
) -> Result<EpisodeResult> {
    let mut sim = Simulator::new(spec.clone())?;
    let mut agent = AgentState::new(
        agent_config_for(spec, agent_cfg),
        spec.start,
        spec.goal_sequence.clone(),
        spec.palette.clone(),
        spec.sim.camera,
        spec.sim.turn_angle,
    )?;
    let mut obs = sim.observation().clone();
    loop {
        let step = sim.steps();
        let decision = agent.decide(&obs)?;
        if decision.action == Action::Found && agent.goal_estimate().is_none() {
            return Err(Error::ContractViolation(format!(
                "Found with an empty goal channel at step {step}"
            )));
        }
        let before = sim.pose();
        let out = sim.step(decision.action)?;
        agent.acknowledge(before, out.collided, out.goals_found);
        log.records.push(StepRecord {
            step,
            pose: sim.pose(),
            action: decision.action,
            mode: decision.mode,
            target: decision.target,
            collided: out.collided,
            goals_found: out.goals_found,
            status: out.episode_status,
            metrics: None,
            result: None,
        });
        if snapshot_period > 0 && (step + 1) % snapshot_period == 0 {
            snapshot(step + 1, &agent)?;
        }
        if out.episode_status.is_terminal() {
            if snapshot_period > 0 && (step + 1) % snapshot_period != 0 {
                snapshot(step + 1, &agent)?;
            }
            break;
        }
        obs = out.observation;
    }
    let start = (spec.start.x, spec.start.y);
    let input = MetricsInput::new(
        sim.status(),
        sim.goals_found(),
        sim.path_length(),
        segment_geodesics(&spec.world, start, &spec.goal_sequence)?,
    )?;
    let result = EpisodeResult::compute(&input, sim.steps());
    let last = log.records.last_mut().expect("at least one step");
    last.metrics = Some(input);
    last.result = Some(result.clone());
    Ok(result)
}

pub fn run_episode(spec: &EpisodeSpec, agent_cfg: &AgentConfig) -> Result<(EpisodeResult, EpisodeLog)> {
    let mut log = EpisodeLog::default();
    let result = run_episode_into(spec, agent_cfg, 0, |_, _| Ok(()), &mut log)?;
    Ok((result, log))
}

/// Outcome of re-executing a log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub steps_checked: usize,
    /// First step whose pose, collision flag, goal count or status differs.
    pub first_divergence: Option<usize>,
    pub detail: Option<String>,
}

impl ReplayReport {
    pub fn is_clean(&self) -> bool {
        self.first_divergence.is_none()
    }
}

/// Re-executes the recorded actions and compares every step.
pub fn replay(log: &EpisodeLog, spec: &EpisodeSpec) -> Result<ReplayReport> {
    let mut sim = Simulator::new(spec.clone())?;
    let diverged = |step: usize, detail: String, checked: usize| ReplayReport {
        steps_checked: checked,
        first_divergence: Some(step),
        detail: Some(detail),
    };
    for (i, r) in log.records.iter().enumerate() {
        if r.step != i {
            return Ok(diverged(i, format!("record {i} has step index {}", r.step), i));
        }
        if sim.status().is_terminal() {
            return Ok(diverged(i, "log continues after the episode ended".into(), i));
        }
        let out = sim.step(r.action)?;
        let pose = sim.pose();
        let mismatch = if pose != r.pose {
            Some(format!("pose {:?} vs logged {:?}", pose, r.pose))
        } else if out.collided != r.collided {
            Some(format!("collided {} vs logged {}", out.collided, r.collided))
        } else if out.goals_found != r.goals_found {
            Some(format!("goals_found {} vs logged {}", out.goals_found, r.goals_found))
        } else if out.episode_status != r.status {
            Some(format!("status {:?} vs logged {:?}", out.episode_status, r.status))
        } else {
            None
        };
        if let Some(d) = mismatch {
            return Ok(diverged(i, d, i + 1));
        }
    }
    if !sim.status().is_terminal() {
        let n = log.records.len();
        return Ok(diverged(n, "log ends before the episode does".into(), n));
    }
    Ok(ReplayReport {
        steps_checked: log.records.len(),
        first_divergence: None,
        detail: None,
    })
}

/// Recomputes the terminal record's metrics and checks them against the
/// stored result.
pub fn verify_log_metrics(log: &EpisodeLog) -> Result<EpisodeResult> {
    let last = log
        .terminal()
        .ok_or_else(|| Error::InvalidInput("log has no terminal record".into()))?;
    let (input, stored) = match (&last.metrics, &last.result) {
        (Some(i), Some(r)) => (i, r),
        _ => return Err(Error::InvalidInput("terminal record lacks metrics".into())),
    };
    input.validate()?;
    let again = EpisodeResult::compute(input, log.records.len());
    if &again != stored {
        return Err(Error::InvalidInput(format!(
            "stored result {stored:?} disagrees with recomputed {again:?}"
        )));
    }
    Ok(again)
}
