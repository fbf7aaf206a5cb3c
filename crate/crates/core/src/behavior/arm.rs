use serde::{Deserialize, Serialize};

use crate::rng::SplitMix64;

/// Nominal durations of the four choreographed arm trajectories.
pub const ARM_TRAJECTORY_DURATIONS_S: [f64; 4] = [8.0, 10.0, 12.0, 14.0];

/// Which arm trajectory a robot is playing and how far into it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmState {
    pub trajectory: u8,
    pub elapsed_s: f64,
}

impl ArmState {
    pub fn start(rng: &mut SplitMix64) -> Self {
        Self {
            trajectory: rng.below(4) as u8,
            elapsed_s: 0.0,
        }
    }

    pub fn duration_s(&self) -> f64 {
        ARM_TRAJECTORY_DURATIONS_S[usize::from(self.trajectory)]
    }
}

/// Advance the arm by `dt`. When the current trajectory finishes, a new one is
/// drawn uniformly from the four; returns `true` on such a switch.
pub fn arm_service_tick(arm: &mut ArmState, dt: f64, rng: &mut SplitMix64) -> bool {
    arm.elapsed_s += dt;
    if arm.elapsed_s >= arm.duration_s() - 1e-9 {
        *arm = ArmState::start(rng);
        true
    } else {
        false
    }
}
