use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

use super::render::render;
use super::world::Terrain;
use super::{Action, EpisodeSpec, Observation, Pose};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EpisodeStatus {
    Ongoing,
    Success,
    FailWrongFound,
    FailTimeout,
}

impl EpisodeStatus {
    pub fn is_terminal(self) -> bool {
        self != EpisodeStatus::Ongoing
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub observation: Observation,
    pub collided: bool,
    pub episode_status: EpisodeStatus,
    pub goals_found: usize,
}

/// Live state of one episode.
#[derive(Clone, Debug)]
pub struct Simulator {
    spec: EpisodeSpec,
    pose: Pose,
    status: EpisodeStatus,
    goals_found: usize,
    steps: usize,
    path_length: f64,
    observation: Observation,
}

impl Simulator {
    pub fn new(spec: EpisodeSpec) -> Result<Self> {
        spec.validate()?;
        let pose = Pose::new(spec.start.x, spec.start.y, spec.start.theta);
        if spec.world.disk_collides(pose.x, pose.y, spec.world.agent_radius()) {
            return Err(Error::InvalidInput(format!(
                "start pose ({}, {}) overlaps an obstacle",
                pose.x, pose.y
            )));
        }
        let observation = render(&spec.world, pose, &spec.sim.camera)?;
        Ok(Simulator {
            spec,
            pose,
            status: EpisodeStatus::Ongoing,
            goals_found: 0,
            steps: 0,
            path_length: 0.0,
            observation,
        })
    }

    pub fn spec(&self) -> &EpisodeSpec {
        &self.spec
    }

    pub fn pose(&self) -> Pose {
        self.pose
    }

    pub fn status(&self) -> EpisodeStatus {
        self.status
    }

    pub fn goals_found(&self) -> usize {
        self.goals_found
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Meters actually traveled; blocked moves and turns contribute nothing.
    pub fn path_length(&self) -> f64 {
        self.path_length
    }

    pub fn observation(&self) -> &Observation {
        &self.observation
    }

    /// Ground-truth distance from the agent to the center of the goal it
    /// must find next.
    pub fn distance_to_current_goal(&self) -> Option<f64> {
        let color = *self.spec.goal_sequence.get(self.goals_found)?;
        let cyl = self.spec.world.cylinder(color)?;
        Some(self.pose.distance_to(cyl.center.0, cyl.center.1))
    }

    pub fn step(&mut self, action: Action) -> Result<StepOutcome> {
        if self.status.is_terminal() {
            return Err(Error::ContractViolation(format!(
                "action {action:?} after episode ended with {:?}",
                self.status
            )));
        }
        let mut collided = false;
        match action {
            Action::MoveForward => {
                if self.try_move() {
                    self.path_length += self.spec.sim.forward_step;
                } else {
                    collided = true;
                }
            }
            Action::TurnLeft => {
                self.pose.theta = math::normalize_angle(self.pose.theta + self.spec.sim.turn_angle);
            }
            Action::TurnRight => {
                self.pose.theta = math::normalize_angle(self.pose.theta - self.spec.sim.turn_angle);
            }
            Action::Found => {
                let within = self
                    .distance_to_current_goal()
                    .is_some_and(|d| d <= self.spec.success_radius);
                if within {
                    self.goals_found += 1;
                    if self.goals_found == self.spec.goal_sequence.len() {
                        self.status = EpisodeStatus::Success;
                    }
                } else {
                    self.status = EpisodeStatus::FailWrongFound;
                }
            }
        }
        self.steps += 1;
        if self.status == EpisodeStatus::Ongoing && self.steps >= self.spec.max_steps {
            self.status = EpisodeStatus::FailTimeout;
        }
        self.observation = render(&self.spec.world, self.pose, &self.spec.sim.camera)?;
        Ok(StepOutcome {
            observation: self.observation.clone(),
            collided,
            episode_status: self.status,
            goals_found: self.goals_found,
        })
    }

    /// Moves forward unless the swept agent disk touches a non-free cell.
    fn try_move(&mut self) -> bool {
        let world = &self.spec.world;
        let (fx, fy) = math::forward(self.pose.theta);
        let dist = self.spec.sim.forward_step;
        let samples = ((dist / (world.resolution() * 0.25)).ceil() as usize).max(1);
        let r = world.agent_radius();
        for i in 1..=samples {
            let t = dist * i as f64 / samples as f64;
            let (x, y) = (self.pose.x + fx * t, self.pose.y + fy * t);
            if world.disk_collides(x, y, r) {
                return false;
            }
        }
        let (x, y) = (self.pose.x + fx * dist, self.pose.y + fy * dist);
        debug_assert_eq!(world.terrain(world.cell_of(x, y)), Terrain::Free);
        self.pose.x = x;
        self.pose.y = y;
        true
    }
}
