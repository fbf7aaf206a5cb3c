use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::Gesture;
use crate::flock::{AgentId, ModeId};
use crate::vec2::Vec2;

/// Who decides the active weight mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Condition {
    HumanChoreographer,
    ModelPrediction,
    /// Cycle Cohesion → Separation → Alignment, one control cycle each.
    Control,
    Fixed { mode: ModeId },
}

impl Condition {
    /// Whether the condition, not external commands, owns the active mode.
    pub fn owns_mode(self) -> bool {
        matches!(self, Condition::ModelPrediction | Condition::Control)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::HumanChoreographer => f.write_str("human_choreographer"),
            Condition::ModelPrediction => f.write_str("model_prediction"),
            Condition::Control => f.write_str("control"),
            Condition::Fixed { mode } => write!(f, "fixed({mode})"),
        }
    }
}

/// Input to the engine. Takes effect at the start of the next tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Command {
    SetMode { mode: ModeId },
    AddHuman { id: AgentId, position: Vec2 },
    MoveHuman { id: AgentId, position: Vec2 },
    RemoveHuman { id: AgentId },
    SetGesture { id: AgentId, gesture: Option<Gesture> },
    SetCondition { condition: Condition },
    Start,
    Pause,
}

impl Command {
    /// Human this command refers to, if any.
    pub fn human_id(&self) -> Option<AgentId> {
        match self {
            Command::AddHuman { id, .. }
            | Command::MoveHuman { id, .. }
            | Command::RemoveHuman { id }
            | Command::SetGesture { id, .. } => Some(*id),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CommandError {
    #[error("unknown human {0}")]
    UnknownHuman(AgentId),
    #[error("id {0} belongs to a robot")]
    RobotId(AgentId),
    #[error("weight mode is owned by the {0} condition")]
    ModeOwned(Condition),
    #[error("position ({x}, {y}) is more than 5 m outside the boundary region", x = .0.x, y = .0.y)]
    OutOfRange(Vec2),
    #[error("position is not finite")]
    NonFinite,
}

/// Successful command acknowledgement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ack {
    /// Tick at which the command takes effect.
    pub effective_tick: u64,
}
