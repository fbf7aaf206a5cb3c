//! Base-motion terms for a heterogeneous flock of robots and humans.
//!
//! Every term is a pure function of the agent list (robots plus the humans
//! currently detected inside the boundary region). The engine composes them
//! with a [`WeightGains`] vector and caps the result with [`limit_step`].

mod boundary;
mod mode;
mod terms;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vec2::Vec2;

pub use boundary::{BoundaryError, BoundaryRegion};
pub use mode::{ModeId, ModeTable, WeightGains};
pub use terms::{
    alignment_term, bounds_aversion_term, circling_term, cohesion_term, compose_step,
    follow_term, limit_step, linearity_term, robot_lane, robot_rank, separation_term, TermParams, TermSet,
    TERM_CLAMP_NORM,
};

/// Agent identifier, unique within a snapshot. Robots and humans share the id space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AgentId(pub u32);

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Robot,
    Human,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub id: AgentId,
    pub kind: AgentKind,
    pub position: Vec2,
    pub velocity: Vec2,
    pub heading: f64,
}

impl AgentState {
    pub fn robot(id: u32, position: Vec2) -> Self {
        Self {
            id: AgentId(id),
            kind: AgentKind::Robot,
            position,
            velocity: Vec2::ZERO,
            heading: 0.0,
        }
    }

    pub fn human(id: u32, position: Vec2) -> Self {
        Self {
            kind: AgentKind::Human,
            ..Self::robot(id, position)
        }
    }

    pub fn with_velocity(mut self, velocity: Vec2) -> Self {
        self.velocity = velocity;
        self
    }

    pub fn is_robot(&self) -> bool {
        self.kind == AgentKind::Robot
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlockError {
    #[error("agent not found: {0}")]
    AgentNotFound(AgentId),
    #[error("agent {0} is not a robot")]
    NotARobot(AgentId),
}

pub(crate) fn find_agent(agents: &[AgentState], id: AgentId) -> Result<&AgentState, FlockError> {
    agents
        .iter()
        .find(|a| a.id == id)
        .ok_or(FlockError::AgentNotFound(id))
}
