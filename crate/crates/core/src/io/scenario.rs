//! Scripted sessions.
//!
//! A scenario is a JSON file:
//!
//! ```json
//! {
//!   "name": "walker",
//!   "boundary": { "x_min": 0, "x_max": 15, "y_min": 0, "y_max": 15 },
//!   "robots": [{ "x": 3, "y": 3 }],
//!   "humans": [1],
//!   "seed": 7,
//!   "condition": { "kind": "control" },
//!   "duration_s": 60,
//!   "timeline": [
//!     { "time_s": 0, "command": { "type": "add_human", "id": 1, "position": { "x": 1, "y": 1 } } },
//!     { "walk": { "id": 1, "from": { "x": 1, "y": 1 }, "to": { "x": 9, "y": 9 }, "start_s": 1, "duration_s": 10 } }
//!   ]
//! }
//! ```
//!
//! `boundary.margin_m` is optional. `engine` may hold any [`EngineConfig`]
//! field except `boundary` and `seed`, which come from the top level. A walk
//! expands to one `move_human` per tick. An entry at `time_s` takes effect on
//! the tick that starts at that time, i.e. tick `round(time_s * tick_hz) + 1`.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::log::{parse_log, LogError, SessionLog};
use super::session::Session;
use crate::engine::{Command, CommandError, Condition, Engine, EngineConfig, EngineError};
use crate::flock::{AgentId, BoundaryError, BoundaryRegion};
use crate::learn::Model;
use crate::vec2::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin_m: Option<f64>,
}

impl BoundarySpec {
    pub fn region(&self) -> Result<BoundaryRegion, BoundaryError> {
        match self.margin_m {
            Some(m) => BoundaryRegion::with_margin(self.x_min, self.x_max, self.y_min, self.y_max, m),
            None => BoundaryRegion::new(self.x_min, self.x_max, self.y_min, self.y_max),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Walk {
    pub id: AgentId,
    pub from: Vec2,
    pub to: Vec2,
    pub start_s: f64,
    pub duration_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimelineEntry {
    At { time_s: f64, command: Command },
    Walk { walk: Walk },
}

impl TimelineEntry {
    pub fn time_s(&self) -> f64 {
        match self {
            TimelineEntry::At { time_s, .. } => *time_s,
            TimelineEntry::Walk { walk } => walk.start_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub boundary: BoundarySpec,
    pub robots: Vec<Vec2>,
    #[serde(default)]
    pub humans: Vec<AgentId>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub condition: Option<Condition>,
    pub duration_s: f64,
    #[serde(default)]
    pub timeline: Vec<TimelineEntry>,
    #[serde(default)]
    pub engine: Option<EngineConfig>,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("scenario schema: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("tick {tick}: command rejected: {source}")]
    Command { tick: u64, source: CommandError },
    #[error(transparent)]
    Log(#[from] LogError),
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    parse_scenario(&std::fs::read_to_string(path)?)
}

/// Parse, validate and sort the timeline.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut scenario: Scenario = serde_json::from_str(text)?;
    scenario.timeline.sort_by(|a, b| a.time_s().total_cmp(&b.time_s()));
    scenario.validate()?;
    Ok(scenario)
}

impl Scenario {
    pub fn engine_config(&self) -> Result<EngineConfig, ScenarioError> {
        let mut config = self.engine.clone().unwrap_or_default();
        config.boundary = self
            .boundary
            .region()
            .map_err(|e| invalid("boundary", e.to_string()))?;
        config.seed = self.seed;
        config.validate().map_err(|e| invalid("engine", e.to_string()))?;
        Ok(config)
    }

    pub fn total_ticks(&self) -> Result<u64, ScenarioError> {
        Ok(self.engine_config()?.ticks_for(self.duration_s))
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let config = self.engine_config()?;
        if self.name.trim().is_empty() {
            return Err(invalid("name", "must not be empty"));
        }
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(invalid("duration_s", format!("must be positive, got {}", self.duration_s)));
        }
        if self.robots.is_empty() {
            return Err(invalid("robots", "at least one robot is required"));
        }
        for (i, p) in self.robots.iter().enumerate() {
            if !p.is_finite() || !config.boundary.contains(*p) {
                return Err(invalid(format!("robots[{i}]"), "outside the boundary"));
            }
        }
        let robot_ids: BTreeSet<u32> = (0..self.robots.len() as u32).collect();
        let mut declared = BTreeSet::new();
        for (i, id) in self.humans.iter().enumerate() {
            if robot_ids.contains(&id.0) {
                return Err(invalid(format!("humans[{i}]"), format!("id {id} is a robot id")));
            }
            if !declared.insert(*id) {
                return Err(invalid(format!("humans[{i}]"), format!("id {id} declared twice")));
            }
        }

        let mut present: BTreeSet<AgentId> = BTreeSet::new();
        for (i, entry) in self.timeline.iter().enumerate() {
            let field = format!("timeline[{i}]");
            let t = entry.time_s();
            if !t.is_finite() || t < 0.0 || t > self.duration_s {
                return Err(invalid(field, format!("time {t} outside 0..={}", self.duration_s)));
            }
            match entry {
                TimelineEntry::At { command, .. } => {
                    if let Some(id) = command.human_id() {
                        if !declared.contains(&id) {
                            return Err(invalid(
                                format!("{field}.command.id"),
                                format!("human {id} is not declared"),
                            ));
                        }
                        match command {
                            Command::AddHuman { .. } => {
                                present.insert(id);
                            }
                            Command::RemoveHuman { .. } => {
                                present.remove(&id);
                            }
                            _ if !present.contains(&id) => {
                                return Err(invalid(
                                    format!("{field}.command.id"),
                                    format!("human {id} is not in the scene at {t} s"),
                                ))
                            }
                            _ => {}
                        }
                    }
                }
                TimelineEntry::Walk { walk } => {
                    if !declared.contains(&walk.id) {
                        return Err(invalid(
                            format!("{field}.walk.id"),
                            format!("human {} is not declared", walk.id),
                        ));
                    }
                    if !present.contains(&walk.id) {
                        return Err(invalid(
                            format!("{field}.walk.id"),
                            format!("human {} is not in the scene at {t} s", walk.id),
                        ));
                    }
                    if !(walk.duration_s.is_finite() && walk.duration_s >= 0.0) {
                        return Err(invalid(format!("{field}.walk.duration_s"), "must be non-negative"));
                    }
                    if !walk.from.is_finite() || !walk.to.is_finite() {
                        return Err(invalid(format!("{field}.walk"), "non-finite position"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Timeline expanded to `(effective tick, command)`, in application order.
    pub fn events(&self) -> Result<Vec<(u64, Command)>, ScenarioError> {
        let config = self.engine_config()?;
        let hz = f64::from(config.tick_hz);
        let tick_at = |t: f64| (t * hz).round() as u64 + 1;
        let mut events = Vec::new();
        if let Some(condition) = self.condition {
            events.push((1, Command::SetCondition { condition }));
        }
        for entry in &self.timeline {
            match *entry {
                TimelineEntry::At { time_s, command } => events.push((tick_at(time_s), command)),
                TimelineEntry::Walk { walk } => {
                    let k0 = tick_at(walk.start_s);
                    let k1 = tick_at(walk.start_s + walk.duration_s);
                    for k in k0..=k1 {
                        let f = if k1 == k0 {
                            1.0
                        } else {
                            (k - k0) as f64 / (k1 - k0) as f64
                        };
                        let position = walk.from + (walk.to - walk.from) * f;
                        events.push((k, Command::MoveHuman { id: walk.id, position }));
                    }
                }
            }
        }
        events.sort_by_key(|e| e.0);
        Ok(events)
    }
}

/// Knobs for a headless run.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the scenario duration.
    pub ticks: Option<u64>,
    pub model: Option<Model>,
    pub session_id: Option<String>,
}

/// Run a scenario headless, streaming the session log into `out`.
pub fn run_scenario<W: Write>(
    scenario: &Scenario,
    options: &RunOptions,
    out: W,
) -> Result<(Engine, W), ScenarioError> {
    let mut engine = Engine::new(scenario.engine_config()?, &scenario.robots)?;
    if let Some(model) = &options.model {
        engine = engine.with_model(model.clone());
    }
    let ticks = match options.ticks {
        Some(t) => t,
        None => scenario.total_ticks()?,
    };
    let session_id = options.session_id.clone().unwrap_or_else(|| scenario.name.clone());
    let mut session = Session::start(engine, &session_id, out)?;
    let events = scenario.events()?;
    let mut next = 0;
    for tick in 1..=ticks {
        while next < events.len() && events[next].0 <= tick {
            session
                .apply_command(events[next].1)
                .map_err(|source| ScenarioError::Command { tick, source })?;
            next += 1;
        }
        session.step()?;
    }
    Ok(session.finish()?)
}

/// Run a scenario and return the parsed log.
pub fn run_scenario_to_log(scenario: &Scenario, options: &RunOptions) -> Result<SessionLog, ScenarioError> {
    let (_, bytes) = run_scenario(scenario, options, Vec::new())?;
    let text = String::from_utf8(bytes).expect("json is utf-8");
    Ok(parse_log(&text)?)
}
