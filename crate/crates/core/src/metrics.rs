//! Success, Progress, SPL and PPL.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{goal_point, EpisodeStatus, Geodesic, WorldGrid};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsInput {
    pub status: EpisodeStatus,
    /// Goals found, `l`.
    pub goals_found: usize,
    /// Goals in the episode, `k`.
    pub k: usize,
    /// Meters traveled by the agent, `p`.
    pub path_length: f64,
    /// `d_{i-1,i}` for `i = 1..=k`, meters; position 0 is the start.
    pub segment_geodesics: Vec<f64>,
}

impl MetricsInput {
    pub fn new(
        status: EpisodeStatus,
        goals_found: usize,
        path_length: f64,
        segment_geodesics: Vec<f64>,
    ) -> Result<Self> {
        let input = MetricsInput {
            status,
            goals_found,
            k: segment_geodesics.len(),
            path_length,
            segment_geodesics,
        };
        input.validate()?;
        Ok(input)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.path_length >= 0.0) || !self.path_length.is_finite() {
            return Err(Error::InvalidInput(format!(
                "path length {} must be >= 0",
                self.path_length
            )));
        }
        if self.k == 0 || self.segment_geodesics.len() != self.k {
            return Err(Error::InvalidInput(format!(
                "{} segment distances for k = {}",
                self.segment_geodesics.len(),
                self.k
            )));
        }
        if let Some(d) = self.segment_geodesics.iter().find(|d| !(**d > 0.0) || !d.is_finite()) {
            return Err(Error::InvalidInput(format!("segment distance {d} must be > 0")));
        }
        if self.goals_found > self.k {
            return Err(Error::InvalidInput(format!(
                "l = {} exceeds k = {}",
                self.goals_found, self.k
            )));
        }
        Ok(())
    }
}

/// Ground-truth `d_{i-1,i}` from `start` through the goal points in order.
pub fn segment_geodesics(world: &WorldGrid, start: (f64, f64), goal_sequence: &[u8]) -> Result<Vec<f64>> {
    let geo = Geodesic::new(world);
    let mut prev = start;
    let mut out = Vec::with_capacity(goal_sequence.len());
    for &color in goal_sequence {
        let p = goal_point(world, color)?;
        out.push(geo.distance(prev, p)?);
        prev = p;
    }
    Ok(out)
}

pub fn success(input: &MetricsInput) -> f64 {
    if input.status == EpisodeStatus::Success && input.goals_found == input.k {
        1.0
    } else {
        0.0
    }
}

pub fn progress(input: &MetricsInput) -> f64 {
    input.goals_found as f64 / input.k as f64
}

fn weighted(s: f64, d: f64, p: f64) -> f64 {
    let denom = p.max(d);
    if denom == 0.0 {
        s
    } else {
        s * (d / denom)
    }
}

pub fn spl(input: &MetricsInput) -> f64 {
    let d: f64 = input.segment_geodesics.iter().sum();
    weighted(success(input), d, input.path_length)
}

pub fn ppl(input: &MetricsInput) -> f64 {
    if input.goals_found == 0 {
        return 0.0;
    }
    let d: f64 = input.segment_geodesics[..input.goals_found].iter().sum();
    weighted(progress(input), d, input.path_length)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub success: f64,
    pub progress: f64,
    pub spl: f64,
    pub ppl: f64,
    pub steps: usize,
    pub termination: EpisodeStatus,
}

impl EpisodeResult {
    pub fn compute(input: &MetricsInput, steps: usize) -> Self {
        EpisodeResult {
            success: success(input),
            progress: progress(input),
            spl: spl(input),
            ppl: ppl(input),
            steps,
            termination: input.status,
        }
    }
}

/// Means over a set of episodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub episodes: usize,
    pub success: f64,
    pub progress: f64,
    pub ppl: f64,
    pub spl: f64,
}

pub fn aggregate(results: &[EpisodeResult]) -> Result<Summary> {
    if results.is_empty() {
        return Err(Error::InvalidInput("cannot aggregate zero episodes".into()));
    }
    let n = results.len() as f64;
    let mean = |f: fn(&EpisodeResult) -> f64| results.iter().map(f).sum::<f64>() / n;
    Ok(Summary {
        episodes: results.len(),
        success: mean(|r| r.success),
        progress: mean(|r| r.progress),
        ppl: mean(|r| r.ppl),
        spl: mean(|r| r.spl),
    })
}

/// Aligned plain-text table, one row per `(method, summary)`, two decimals.
pub fn format_table(rows: &[(&str, &Summary)]) -> String {
    let headers = ["Method", "Success", "Progress", "PPL", "SPL"];
    let body: Vec<[String; 5]> = rows
        .iter()
        .map(|(name, s)| {
            [
                name.to_string(),
                format!("{:.2}", s.success),
                format!("{:.2}", s.progress),
                format!("{:.2}", s.ppl),
                format!("{:.2}", s.spl),
            ]
        })
        .collect();
    let mut widths = headers.map(str::len);
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: [&str; 5]| {
        let parts: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i == 0 {
                    format!("{:<w$}", c, w = widths[i])
                } else {
                    format!("{:>w$}", c, w = widths[i])
                }
            })
            .collect();
        parts.join(" | ")
    };
    let mut out = line(headers);
    out.push('\n');
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&rule.join("-+-"));
    out.push('\n');
    for row in &body {
        out.push_str(&line([&row[0], &row[1], &row[2], &row[3], &row[4]]));
        out.push('\n');
    }
    out
}
