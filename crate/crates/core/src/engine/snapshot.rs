use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::Condition;
use crate::behavior::{GazeTarget, Gesture, LightColor, ResponseAction};
use crate::flock::{AgentId, AgentState, ModeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobotLight {
    pub robot_id: AgentId,
    pub color: LightColor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobotArm {
    pub robot_id: AgentId,
    pub trajectory: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanGesture {
    pub human_id: AgentId,
    pub gesture: Gesture,
}

/// Complete observable state after one service step. Immutable once emitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlockSnapshot {
    pub tick: u64,
    pub sim_time_s: f64,
    pub running: bool,
    /// Robots by ascending id, then every human by ascending id (including
    /// humans outside the region, who are not part of the flock).
    pub agents: Vec<AgentState>,
    pub active_mode: ModeId,
    pub condition: Option<Condition>,
    pub responses: Vec<ResponseAction>,
    pub gaze: Vec<GazeTarget>,
    pub lights: Vec<RobotLight>,
    pub arms: Vec<RobotArm>,
    /// Debounced gestures currently held.
    pub active_gestures: Vec<HumanGesture>,
    /// Gestures that became active on this tick.
    pub gesture_onsets: Vec<HumanGesture>,
    pub fault: Option<String>,
}

impl FlockSnapshot {
    pub fn robots(&self) -> impl Iterator<Item = &AgentState> {
        self.agents.iter().filter(|a| a.is_robot())
    }

    pub fn humans(&self) -> impl Iterator<Item = &AgentState> {
        self.agents.iter().filter(|a| !a.is_robot())
    }

    pub fn agent(&self, id: AgentId) -> Option<&AgentState> {
        self.agents.iter().find(|a| a.id == id)
    }

    pub fn light(&self, robot: AgentId) -> Option<LightColor> {
        self.lights
            .iter()
            .find(|l| l.robot_id == robot)
            .map(|l| l.color)
    }

    /// Canonical serialization: compact JSON with fields in declaration order.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("snapshot serializes")
    }

    /// Hex SHA-256 of [`Self::canonical_bytes`].
    pub fn state_hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_bytes()))
    }
}
