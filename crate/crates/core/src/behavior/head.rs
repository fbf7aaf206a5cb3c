use serde::{Deserialize, Serialize};

use crate::flock::AgentId;
use crate::vec2::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "human_id", rename_all = "snake_case")]
pub enum GazeKind {
    Human(AgentId),
    RegionCenter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GazeTarget {
    pub robot_id: AgentId,
    pub target: GazeKind,
}

/// What the head controller needs to know about a detected human.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HumanView {
    pub id: AgentId,
    pub position: Vec2,
    pub gesturing: bool,
}

/// One gaze target per robot.
///
/// Any gesturing human draws every robot's gaze (lowest id if several);
/// otherwise each robot looks at its nearest human, or the region center
/// when nobody is present.
pub fn head_targets(robots: &[(AgentId, Vec2)], humans: &[HumanView]) -> Vec<GazeTarget> {
    let gesturing = humans.iter().filter(|h| h.gesturing).min_by_key(|h| h.id);
    robots
        .iter()
        .map(|&(robot_id, pos)| {
            let target = if let Some(g) = gesturing {
                GazeKind::Human(g.id)
            } else {
                humans
                    .iter()
                    .min_by(|a, b| {
                        a.position
                            .distance(pos)
                            .total_cmp(&b.position.distance(pos))
                            .then(a.id.cmp(&b.id))
                    })
                    .map_or(GazeKind::RegionCenter, |h| GazeKind::Human(h.id))
            };
            GazeTarget { robot_id, target }
        })
        .collect()
}
