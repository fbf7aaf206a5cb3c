use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{Gesture, SoundSource};
use crate::flock::AgentId;
use crate::vec2::Vec2;

/// Heading rate of a spin in place: one full turn over the spin's duration.
pub const SPIN_RATE_RAD_S: f64 = TAU / 12.0;

/// Completion tolerance on accumulated elapsed time.
const ELAPSED_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LightColor {
    LightBlue,
    Yellow,
    Orange,
    Green,
    DarkBlue,
}

/// The part of the robot a response occupies. One response per subsystem at a time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subsystem {
    Head,
    Base,
    Gripper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseKind {
    GazeUp,
    SpinInPlace,
    GripperOpenClose,
    PulseGreen,
}

impl ResponseKind {
    pub fn duration_s(self) -> f64 {
        match self {
            ResponseKind::GazeUp => 4.0,
            ResponseKind::SpinInPlace => 12.0,
            ResponseKind::GripperOpenClose | ResponseKind::PulseGreen => 2.0,
        }
    }

    pub fn light(self) -> LightColor {
        match self {
            ResponseKind::GazeUp => LightColor::Orange,
            ResponseKind::SpinInPlace | ResponseKind::PulseGreen => LightColor::Green,
            ResponseKind::GripperOpenClose => LightColor::DarkBlue,
        }
    }

    pub fn subsystem(self) -> Subsystem {
        match self {
            ResponseKind::GazeUp => Subsystem::Head,
            ResponseKind::SpinInPlace | ResponseKind::PulseGreen => Subsystem::Base,
            ResponseKind::GripperOpenClose => Subsystem::Gripper,
        }
    }

    pub fn sound_source(self) -> SoundSource {
        match self {
            ResponseKind::GazeUp => SoundSource::Head,
            ResponseKind::SpinInPlace | ResponseKind::PulseGreen => SoundSource::Base,
            ResponseKind::GripperOpenClose => SoundSource::Gripper,
        }
    }

    /// Heading rotation applied while running.
    pub fn rotation_rate(self) -> f64 {
        match self {
            ResponseKind::SpinInPlace => SPIN_RATE_RAD_S,
            _ => 0.0,
        }
    }

    /// Whether the robot's flocking displacement is suppressed while running.
    pub fn holds_base(self) -> bool {
        self == ResponseKind::SpinInPlace
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseAction {
    pub kind: ResponseKind,
    pub robot_id: AgentId,
    pub elapsed_s: f64,
    pub light_color: LightColor,
}

impl ResponseAction {
    pub fn new(kind: ResponseKind, robot_id: AgentId) -> Self {
        Self {
            kind,
            robot_id,
            elapsed_s: 0.0,
            light_color: kind.light(),
        }
    }

    pub fn is_complete(&self) -> bool {
        self.elapsed_s >= self.kind.duration_s() - ELAPSED_EPS
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResponseStatus {
    Running,
    Completed,
}

/// Start the response to `gesture` on `robot_id`, or `None` if the subsystem
/// it needs is already busy with one of `active` (the running response carries on).
///
/// A spin becomes a green pulse when any other robot in `robot_positions`
/// is closer than `spin_denial_radius`.
pub fn begin_response(
    robot_id: AgentId,
    gesture: Gesture,
    robot_positions: &[(AgentId, Vec2)],
    active: &[ResponseAction],
    spin_denial_radius: f64,
) -> Option<ResponseAction> {
    let mut kind = match gesture {
        Gesture::HandsTogether => ResponseKind::GazeUp,
        Gesture::LeftHandUp => ResponseKind::GripperOpenClose,
        Gesture::RightHandUp => ResponseKind::SpinInPlace,
    };
    if kind == ResponseKind::SpinInPlace {
        let me = robot_positions.iter().find(|(id, _)| *id == robot_id)?.1;
        let crowded = robot_positions
            .iter()
            .any(|(id, p)| *id != robot_id && p.distance(me) < spin_denial_radius);
        if crowded {
            kind = ResponseKind::PulseGreen;
        }
    }
    let busy = active
        .iter()
        .any(|a| a.robot_id == robot_id && a.kind.subsystem() == kind.subsystem());
    (!busy).then(|| ResponseAction::new(kind, robot_id))
}

/// Advance by `dt`. Completes on the tick elapsed time reaches the duration.
pub fn tick_response(action: &mut ResponseAction, dt: f64) -> ResponseStatus {
    let duration = action.kind.duration_s();
    action.elapsed_s = (action.elapsed_s + dt).min(duration);
    if action.is_complete() {
        action.elapsed_s = duration;
        ResponseStatus::Completed
    } else {
        ResponseStatus::Running
    }
}

/// Light-ring color: the most recently begun active response wins, then
/// yellow when a human is in the region, otherwise light blue.
pub fn light_color(active: &[ResponseAction], human_present: bool) -> LightColor {
    match active.last() {
        Some(a) => a.light_color,
        None if human_present => LightColor::Yellow,
        None => LightColor::LightBlue,
    }
}
