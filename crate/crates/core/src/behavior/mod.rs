//! Gesture perception and the robot responses it drives: response state
//! machines, head gaze selection, light-ring colors and the arm service.

mod arm;
mod gesture;
mod head;
mod response;

use serde::{Deserialize, Serialize};

pub use arm::{arm_service_tick, ArmState, ARM_TRAJECTORY_DURATIONS_S};
pub use gesture::{
    classify_gesture, Gesture, GestureDebouncer, HumanKeypoints, KeypointError,
    HANDS_TOGETHER_MAX_M,
};
pub use head::{head_targets, GazeKind, GazeTarget, HumanView};
pub use response::{
    begin_response, light_color, tick_response, LightColor, ResponseAction, ResponseKind,
    ResponseStatus, Subsystem, SPIN_RATE_RAD_S,
};

/// Which part of the robot produced a sound trigger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SoundSource {
    Gripper,
    Base,
    Head,
    Arm,
}
