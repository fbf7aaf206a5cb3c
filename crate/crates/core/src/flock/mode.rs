use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The seven named weight modes.
///
/// Declaration order is significant: it is the tie-break order used when the
/// classifier scores two modes equally, and the class index inside a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeId {
    Default,
    Following,
    Linear,
    Circling,
    Cohesion,
    Alignment,
    Separation,
}

impl ModeId {
    pub const ALL: [ModeId; 7] = [
        ModeId::Default,
        ModeId::Following,
        ModeId::Linear,
        ModeId::Circling,
        ModeId::Cohesion,
        ModeId::Alignment,
        ModeId::Separation,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<ModeId> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ModeId::Default => "default",
            ModeId::Following => "following",
            ModeId::Linear => "linear",
            ModeId::Circling => "circling",
            ModeId::Cohesion => "cohesion",
            ModeId::Alignment => "alignment",
            ModeId::Separation => "separation",
        }
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModeId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        ModeId::ALL
            .into_iter()
            .find(|m| m.name() == lower)
            .ok_or_else(|| format!("unknown weight mode '{s}'"))
    }
}

/// Gains `{k_c, k_s, k_a, k_phi, k_pi, k_lambda, k_beta}` applied to the seven terms.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WeightGains {
    pub cohesion: f64,
    pub separation: f64,
    pub alignment: f64,
    pub follow: f64,
    pub circling: f64,
    pub linearity: f64,
    pub bounds: f64,
}

impl WeightGains {
    pub const ZERO: WeightGains = WeightGains::from_array([0.0; 7]);

    pub const fn from_array(k: [f64; 7]) -> Self {
        Self {
            cohesion: k[0],
            separation: k[1],
            alignment: k[2],
            follow: k[3],
            circling: k[4],
            linearity: k[5],
            bounds: k[6],
        }
    }

    pub fn to_array(self) -> [f64; 7] {
        [
            self.cohesion,
            self.separation,
            self.alignment,
            self.follow,
            self.circling,
            self.linearity,
            self.bounds,
        ]
    }

    /// Finite and non-negative.
    pub fn is_valid(&self) -> bool {
        self.to_array().iter().all(|k| k.is_finite() && *k >= 0.0)
    }
}

impl Add for WeightGains {
    type Output = WeightGains;
    fn add(self, rhs: WeightGains) -> WeightGains {
        let (a, b) = (self.to_array(), rhs.to_array());
        WeightGains::from_array(std::array::from_fn(|i| a[i] + b[i]))
    }
}

/// Gains for each named mode. Defaults set the namesake gain and bounds
/// aversion to 1.0; `Default` blends several terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModeTable {
    pub default: WeightGains,
    pub following: WeightGains,
    pub linear: WeightGains,
    pub circling: WeightGains,
    pub cohesion: WeightGains,
    pub alignment: WeightGains,
    pub separation: WeightGains,
}

impl Default for ModeTable {
    fn default() -> Self {
        Self {
            default: WeightGains::from_array([0.3, 0.6, 0.2, 0.4, 0.0, 0.0, 1.0]),
            following: WeightGains::from_array([0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0]),
            linear: WeightGains::from_array([0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0]),
            circling: WeightGains::from_array([0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0]),
            cohesion: WeightGains::from_array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
            alignment: WeightGains::from_array([0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]),
            separation: WeightGains::from_array([0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]),
        }
    }
}

impl ModeTable {
    pub fn gains(&self, mode: ModeId) -> WeightGains {
        match mode {
            ModeId::Default => self.default,
            ModeId::Following => self.following,
            ModeId::Linear => self.linear,
            ModeId::Circling => self.circling,
            ModeId::Cohesion => self.cohesion,
            ModeId::Alignment => self.alignment,
            ModeId::Separation => self.separation,
        }
    }

    pub fn gains_mut(&mut self, mode: ModeId) -> &mut WeightGains {
        match mode {
            ModeId::Default => &mut self.default,
            ModeId::Following => &mut self.following,
            ModeId::Linear => &mut self.linear,
            ModeId::Circling => &mut self.circling,
            ModeId::Cohesion => &mut self.cohesion,
            ModeId::Alignment => &mut self.alignment,
            ModeId::Separation => &mut self.separation,
        }
    }

    pub fn with_gains(mut self, mode: ModeId, gains: WeightGains) -> Self {
        *self.gains_mut(mode) = gains;
        self
    }

    /// Modes whose gains are negative or non-finite.
    pub fn invalid_modes(&self) -> Vec<ModeId> {
        ModeId::ALL
            .into_iter()
            .filter(|m| !self.gains(*m).is_valid())
            .collect()
    }

    /// Modes with no bounds aversion. Robots are still hard-clamped to the
    /// region, but such a table deviates from the shipped convention.
    pub fn modes_without_bounds_aversion(&self) -> Vec<ModeId> {
        ModeId::ALL
            .into_iter()
            .filter(|m| self.gains(*m).bounds <= 0.0)
            .collect()
    }
}
