use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::flock::{BoundaryRegion, ModeTable, TermParams};

/// Simulation parameters. Serialized verbatim into session-log headers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EngineConfig {
    pub boundary: BoundaryRegion,
    pub tick_hz: u32,
    pub v_max: f64,
    pub d_min: f64,
    pub circling_period_s: f64,
    pub linearity_period_s: f64,
    pub mode_table: ModeTable,
    pub seed: u64,
    pub model_interval_s: f64,
    pub control_cycle_s: f64,
    /// Consecutive ticks a gesture must be seen before it triggers.
    pub gesture_hold_ticks: u32,
    /// A spin becomes a green pulse when another robot is closer than this.
    pub spin_denial_radius_m: f64,
    /// Per robot, per human, per tick probability that the human is missed.
    pub detection_dropout: f64,
    /// Log a snapshot every this many ticks (1 = full rate).
    pub snapshot_every_ticks: u32,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            boundary: BoundaryRegion::square(15.0).expect("valid default region"),
            tick_hz: 20,
            v_max: 1.0,
            d_min: 1.5,
            circling_period_s: 50.0,
            linearity_period_s: 37.0,
            mode_table: ModeTable::default(),
            seed: 0,
            model_interval_s: 30.0,
            control_cycle_s: 30.0,
            gesture_hold_ticks: 3,
            spin_denial_radius_m: 1.5,
            detection_dropout: 0.0,
            snapshot_every_ticks: 4,
        }
    }
}

impl EngineConfig {
    pub fn with_boundary(mut self, boundary: BoundaryRegion) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn dt(&self) -> f64 {
        1.0 / f64::from(self.tick_hz)
    }

    pub fn ticks_for(&self, seconds: f64) -> u64 {
        (seconds * f64::from(self.tick_hz)).round().max(0.0) as u64
    }

    pub fn term_params(&self) -> TermParams {
        TermParams {
            d_min: self.d_min,
            circling_period_s: self.circling_period_s,
            linearity_period_s: self.linearity_period_s,
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        self.boundary.validate()?;
        let bad = |what: &str| Err(EngineError::Config(what.to_string()));
        if self.tick_hz == 0 {
            return bad("tick_hz must be positive");
        }
        let positive = [
            ("v_max", self.v_max),
            ("d_min", self.d_min),
            ("circling_period_s", self.circling_period_s),
            ("linearity_period_s", self.linearity_period_s),
            ("model_interval_s", self.model_interval_s),
            ("control_cycle_s", self.control_cycle_s),
            ("spin_denial_radius_m", self.spin_denial_radius_m),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(EngineError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.ticks_for(self.model_interval_s) == 0 || self.ticks_for(self.control_cycle_s) == 0 {
            return bad("mode intervals must span at least one tick");
        }
        if !(0.0..=1.0).contains(&self.detection_dropout) {
            return bad("detection_dropout must lie in [0, 1]");
        }
        if self.gesture_hold_ticks == 0 || self.snapshot_every_ticks == 0 {
            return bad("gesture_hold_ticks and snapshot_every_ticks must be positive");
        }
        let invalid = self.mode_table.invalid_modes();
        if !invalid.is_empty() {
            return Err(EngineError::Config(format!(
                "negative or non-finite gains for modes {invalid:?}"
            )));
        }
        Ok(())
    }
}
