use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vec2::{Vec2, Vec3};

/// Wrists closer than this (3D distance) count as hands together.
pub const HANDS_TOGETHER_MAX_M: f64 = 0.08;

const MAX_SHOULDER_SPAN_M: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gesture {
    HandsTogether,
    RightHandUp,
    LeftHandUp,
}

impl Gesture {
    pub const ALL: [Gesture; 3] = [
        Gesture::HandsTogether,
        Gesture::RightHandUp,
        Gesture::LeftHandUp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Gesture::HandsTogether => "hands_together",
            Gesture::RightHandUp => "right_hand_up",
            Gesture::LeftHandUp => "left_hand_up",
        }
    }
}

impl fmt::Display for Gesture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Body keypoints of one detected human. Any keypoint may be missing.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HumanKeypoints {
    pub human_id: u32,
    pub position: Vec2,
    pub left_wrist: Option<Vec3>,
    pub right_wrist: Option<Vec3>,
    pub left_shoulder: Option<Vec3>,
    pub right_shoulder: Option<Vec3>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KeypointError {
    #[error("human {0}: non-finite keypoint")]
    NonFinite(u32),
    #[error("human {0}: shoulders {1:.3} m apart")]
    ShoulderSpan(u32, f64),
}

impl HumanKeypoints {
    pub fn validate(&self) -> Result<(), KeypointError> {
        let points = [
            self.left_wrist,
            self.right_wrist,
            self.left_shoulder,
            self.right_shoulder,
        ];
        if !self.position.is_finite() || points.iter().flatten().any(|p| !p.is_finite()) {
            return Err(KeypointError::NonFinite(self.human_id));
        }
        if let (Some(l), Some(r)) = (self.left_shoulder, self.right_shoulder) {
            let span = l.distance(r);
            if span >= MAX_SHOULDER_SPAN_M {
                return Err(KeypointError::ShoulderSpan(self.human_id, span));
            }
        }
        Ok(())
    }

    /// A standing body at `position` holding `pose`, with all four keypoints
    /// present. Shoulders sit at 1.4 m.
    pub fn posed(human_id: u32, position: Vec2, pose: Option<Gesture>) -> Self {
        let at = |dx: f64, z: f64| Some(Vec3::new(position.x + dx, position.y, z));
        let (left_wrist, right_wrist) = match pose {
            None => (at(-0.25, 0.9), at(0.25, 0.9)),
            Some(Gesture::HandsTogether) => (at(-0.02, 1.2), at(0.02, 1.2)),
            Some(Gesture::RightHandUp) => (at(-0.25, 0.9), at(0.3, 1.8)),
            Some(Gesture::LeftHandUp) => (at(-0.3, 1.8), at(0.25, 0.9)),
        };
        Self {
            human_id,
            position,
            left_wrist,
            right_wrist,
            left_shoulder: at(-0.2, 1.4),
            right_shoulder: at(0.2, 1.4),
        }
    }

    /// Height a wrist must exceed to count as raised: the highest present shoulder.
    fn shoulder_reference(&self) -> Option<f64> {
        [self.left_shoulder, self.right_shoulder]
            .iter()
            .flatten()
            .map(|s| s.z)
            .reduce(f64::max)
    }
}

/// Classify a static gesture. Hands together takes priority over either
/// hand up, and right hand up over left hand up.
pub fn classify_gesture(kp: &HumanKeypoints) -> Option<Gesture> {
    if let (Some(l), Some(r)) = (kp.left_wrist, kp.right_wrist) {
        if l.distance(r) < HANDS_TOGETHER_MAX_M {
            return Some(Gesture::HandsTogether);
        }
    }
    let shoulder = kp.shoulder_reference()?;
    if kp.right_wrist.is_some_and(|w| w.z > shoulder) {
        return Some(Gesture::RightHandUp);
    }
    if kp.left_wrist.is_some_and(|w| w.z > shoulder) {
        return Some(Gesture::LeftHandUp);
    }
    None
}

/// Requires a classification to persist for `hold_ticks` consecutive ticks
/// before it becomes the active gesture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GestureDebouncer {
    hold_ticks: u32,
    candidate: Option<Gesture>,
    count: u32,
    active: Option<Gesture>,
}

impl GestureDebouncer {
    pub fn new(hold_ticks: u32) -> Self {
        Self {
            hold_ticks: hold_ticks.max(1),
            candidate: None,
            count: 0,
            active: None,
        }
    }

    /// Feed this tick's raw classification. Returns the gesture on the tick
    /// it becomes active (its onset).
    pub fn update(&mut self, raw: Option<Gesture>) -> Option<Gesture> {
        if raw == self.candidate {
            self.count = self.count.saturating_add(1);
        } else {
            self.candidate = raw;
            self.count = 1;
        }
        if self.count >= self.hold_ticks && self.active != self.candidate {
            self.active = self.candidate;
            return self.active;
        }
        None
    }

    pub fn active(&self) -> Option<Gesture> {
        self.active
    }
}
