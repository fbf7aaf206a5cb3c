//! The fixed-rate service step.
//!
//! [`Engine`] is single-owner: commands are queued with [`Engine::apply_command`]
//! and take effect at the start of the next [`Engine::step`]. Each step runs,
//! in order: command application, human ingestion, gesture debouncing,
//! gesture responses, head gaze, the mode source, flocking terms, capped
//! integration with boundary clamping, lights and arms, then record emission.
//! Identical config, seed and command sequence give identical snapshots.

mod command;
mod config;
mod replay;
mod snapshot;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::f64::consts::PI;
use std::sync::Arc;

use thiserror::Error;

use crate::behavior::{
    arm_service_tick, begin_response, classify_gesture, head_targets, light_color, tick_response,
    ArmState, GazeTarget, Gesture, GestureDebouncer, HumanKeypoints, HumanView, ResponseAction,
    ResponseStatus,
};
use crate::features::{build_feature_vector, FeatureVector};
use crate::flock::{
    compose_step, limit_step, AgentId, AgentState, BoundaryError, ModeId, TermSet,
};
use crate::io::log::{LogRecord, SessionHeader, LOG_VERSION};
use crate::learn::{predict_mode, Model};
use crate::rng::SplitMix64;
use crate::vec2::Vec2;

pub use command::{Ack, Command, CommandError, Condition};
pub use config::EngineConfig;
pub use replay::{replay, verify_log, Divergence, ReplayError, ReplayReport};
pub use snapshot::{FlockSnapshot, HumanGesture, RobotArm, RobotLight};

pub const MAX_ROBOTS: usize = 10;
/// Humans may wander this far outside the region.
pub const HUMAN_RANGE_M: f64 = 5.0;
/// Robots are clamped this far inside the region edges.
const EDGE_INSET: f64 = 1e-9;

const CONTROL_CYCLE: [ModeId; 3] = [ModeId::Cohesion, ModeId::Separation, ModeId::Alignment];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("a flock needs 1 to {MAX_ROBOTS} robots, got {0}")]
    RobotCount(usize),
    #[error("robot {index} at ({x}, {y}) is outside the boundary region", x = .position.x, y = .position.y)]
    RobotOutside { index: usize, position: Vec2 },
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error("invalid config: {0}")]
    Config(String),
}

/// Why the engine stopped itself.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineFault {
    #[error("model prediction condition set but no model is loaded")]
    NoModel,
}

#[derive(Debug, Clone)]
struct Robot {
    state: AgentState,
    responses: Vec<ResponseAction>,
    finished: BTreeSet<usize>,
    arm: ArmState,
}

#[derive(Debug, Clone)]
struct Human {
    state: AgentState,
    pose: Option<Gesture>,
    debouncer: GestureDebouncer,
    moved_to: Option<Vec2>,
}

/// State commands are validated against: the state after all queued commands apply.
#[derive(Debug, Clone)]
struct Projection {
    humans: BTreeSet<AgentId>,
    condition: Option<Condition>,
}

pub struct Engine {
    config: EngineConfig,
    dt: f64,
    tick: u64,
    running_ticks: u64,
    running: bool,
    fault: Option<EngineFault>,
    robots: Vec<Robot>,
    humans: BTreeMap<AgentId, Human>,
    active_mode: ModeId,
    condition: Option<Condition>,
    condition_started: u64,
    pending: VecDeque<Command>,
    pending_labels: Vec<(ModeId, FeatureVector)>,
    projection: Projection,
    arm_rng: SplitMix64,
    detect_rng: SplitMix64,
    model: Option<Arc<Model>>,
    initial_robots: Vec<Vec2>,
    records: Vec<LogRecord>,
    snapshot: FlockSnapshot,
}

impl Engine {
    /// Robots get ids `0..n` in the order given.
    pub fn new(config: EngineConfig, robots: &[Vec2]) -> Result<Self, EngineError> {
        config.validate()?;
        if robots.is_empty() || robots.len() > MAX_ROBOTS {
            return Err(EngineError::RobotCount(robots.len()));
        }
        for (index, &position) in robots.iter().enumerate() {
            if !position.is_finite() || !config.boundary.contains(position) {
                return Err(EngineError::RobotOutside { index, position });
            }
        }
        let without = config.mode_table.modes_without_bounds_aversion();
        if !without.is_empty() {
            log::warn!("modes without bounds aversion: {without:?}");
        }

        let mut root = SplitMix64::new(config.seed);
        let mut arm_rng = root.fork();
        let detect_rng = root.fork();
        let robot_states = robots
            .iter()
            .enumerate()
            .map(|(i, &p)| Robot {
                state: AgentState::robot(i as u32, p),
                responses: Vec::new(),
                finished: BTreeSet::new(),
                arm: ArmState::start(&mut arm_rng),
            })
            .collect();

        let mut engine = Self {
            dt: config.dt(),
            config,
            tick: 0,
            running_ticks: 0,
            running: true,
            fault: None,
            robots: robot_states,
            humans: BTreeMap::new(),
            active_mode: ModeId::Default,
            condition: None,
            condition_started: 0,
            pending: VecDeque::new(),
            pending_labels: Vec::new(),
            projection: Projection {
                humans: BTreeSet::new(),
                condition: None,
            },
            arm_rng,
            detect_rng,
            model: None,
            initial_robots: robots.to_vec(),
            records: Vec::new(),
            snapshot: FlockSnapshot {
                tick: 0,
                sim_time_s: 0.0,
                running: true,
                agents: Vec::new(),
                active_mode: ModeId::Default,
                condition: None,
                responses: Vec::new(),
                gaze: Vec::new(),
                lights: Vec::new(),
                arms: Vec::new(),
                active_gestures: Vec::new(),
                gesture_onsets: Vec::new(),
                fault: None,
            },
        };
        let gaze = engine.compute_gaze(&engine.detected_humans());
        engine.snapshot = engine.build_snapshot(gaze, Vec::new());
        engine
            .records
            .push(LogRecord::Snapshot { tick: 0, snapshot: engine.snapshot.clone() });
        Ok(engine)
    }

    pub fn with_model(mut self, model: Model) -> Self {
        self.model = Some(Arc::new(model));
        self
    }

    pub fn set_model(&mut self, model: Option<Arc<Model>>) {
        self.model = model;
    }

    pub fn model(&self) -> Option<&Model> {
        self.model.as_deref()
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn sim_time_s(&self) -> f64 {
        self.running_ticks as f64 * self.dt
    }

    pub fn active_mode(&self) -> ModeId {
        self.active_mode
    }

    pub fn condition(&self) -> Option<Condition> {
        self.condition
    }

    pub fn fault(&self) -> Option<&EngineFault> {
        self.fault.as_ref()
    }

    pub fn is_running(&self) -> bool {
        self.running
    }

    /// Latest emitted snapshot.
    pub fn snapshot(&self) -> &FlockSnapshot {
        &self.snapshot
    }

    /// Header describing this engine for a session log.
    pub fn session_header(&self, session_id: impl Into<String>) -> SessionHeader {
        SessionHeader {
            version: LOG_VERSION,
            session_id: session_id.into(),
            started_at: None,
            seed: self.config.seed,
            config: self.config.clone(),
            robots: self.initial_robots.clone(),
            model: self.model.as_deref().cloned(),
        }
    }

    /// Records emitted since the last call, in log order.
    pub fn take_records(&mut self) -> Vec<LogRecord> {
        std::mem::take(&mut self.records)
    }

    /// Features of the current state.
    pub fn current_features(&self) -> FeatureVector {
        let agents = self.flock_agents(&self.detected_humans());
        build_feature_vector(&agents, &self.config.boundary)
            .expect("a flock always has at least one robot")
    }

    /// Validate and queue a command for the next tick.
    pub fn apply_command(&mut self, cmd: Command) -> Result<Ack, CommandError> {
        self.validate(&cmd)?;
        match cmd {
            Command::AddHuman { id, .. } => {
                self.projection.humans.insert(id);
            }
            Command::RemoveHuman { id } => {
                self.projection.humans.remove(&id);
            }
            Command::SetCondition { condition } => self.projection.condition = Some(condition),
            Command::SetMode { mode } if self.projection.condition == Some(Condition::HumanChoreographer) => {
                self.pending_labels.push((mode, self.current_features()));
            }
            _ => {}
        }
        self.pending.push_back(cmd);
        Ok(Ack {
            effective_tick: self.tick + 1,
        })
    }

    fn validate(&self, cmd: &Command) -> Result<(), CommandError> {
        if let Command::AddHuman { position, .. } | Command::MoveHuman { position, .. } = cmd {
            if !position.is_finite() {
                return Err(CommandError::NonFinite);
            }
            if self.config.boundary.outside_distance(*position) > HUMAN_RANGE_M {
                return Err(CommandError::OutOfRange(*position));
            }
        }
        match cmd {
            Command::AddHuman { id, .. } => {
                if self.robots.iter().any(|r| r.state.id == *id) {
                    return Err(CommandError::RobotId(*id));
                }
            }
            Command::MoveHuman { id, .. }
            | Command::RemoveHuman { id }
            | Command::SetGesture { id, .. } => {
                if !self.projection.humans.contains(id) {
                    return Err(CommandError::UnknownHuman(*id));
                }
            }
            Command::SetMode { .. } => {
                if let Some(c) = self.projection.condition.filter(|c| c.owns_mode()) {
                    return Err(CommandError::ModeOwned(c));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Execute one service step and return the new snapshot.
    pub fn step(&mut self) -> &FlockSnapshot {
        self.tick += 1;
        let tick = self.tick;
        let was = (self.active_mode, self.condition, self.running);

        let commands: Vec<Command> = self.pending.drain(..).collect();
        for cmd in &commands {
            self.execute(*cmd);
        }
        let labels = std::mem::take(&mut self.pending_labels);

        let mut sounds: Vec<(AgentId, crate::behavior::SoundSource)> = Vec::new();
        let mut onsets: Vec<crate::engine::HumanGesture> = Vec::new();

        if self.running {
            self.ingest_humans();
            let detected = self.detected_humans();
            onsets = self.debounce_gestures(&detected);
            self.run_responses(&onsets, &mut sounds);
            self.run_mode_source();
        }

        let detected = self.detected_humans();
        let gaze = self.compute_gaze(&detected);

        if self.running {
            self.move_robots(&detected);
            for robot in &mut self.robots {
                if arm_service_tick(&mut robot.arm, self.dt, &mut self.arm_rng) {
                    sounds.push((robot.state.id, crate::behavior::SoundSource::Arm));
                }
            }
            self.running_ticks += 1;
        } else {
            for h in self.humans.values_mut() {
                h.moved_to = None;
            }
        }

        self.snapshot = self.build_snapshot(gaze, onsets);

        let now = (self.active_mode, self.condition, self.running);
        let every = u64::from(self.config.snapshot_every_ticks);
        if tick.is_multiple_of(every) || now != was || !self.snapshot.gesture_onsets.is_empty() {
            self.records.push(LogRecord::Snapshot {
                tick,
                snapshot: self.snapshot.clone(),
            });
        }
        for command in commands {
            self.records.push(LogRecord::Command { tick, command });
        }
        for (mode, features) in labels {
            self.records.push(LogRecord::TrainingLabel { tick, mode, features });
        }
        for (robot_id, source) in sounds {
            self.records.push(LogRecord::SoundEvent { tick, robot_id, source });
        }
        &self.snapshot
    }

    /// Run `n` steps.
    pub fn run_ticks(&mut self, n: u64) -> &FlockSnapshot {
        for _ in 0..n {
            self.step();
        }
        &self.snapshot
    }

    fn execute(&mut self, cmd: Command) {
        match cmd {
            Command::SetMode { mode } => self.active_mode = mode,
            Command::AddHuman { id, position } => match self.humans.get_mut(&id) {
                // The same person reported twice is one human.
                Some(h) => h.moved_to = Some(position),
                None => {
                    self.humans.insert(
                        id,
                        Human {
                            state: AgentState::human(id.0, position),
                            pose: None,
                            debouncer: GestureDebouncer::new(self.config.gesture_hold_ticks),
                            moved_to: None,
                        },
                    );
                }
            },
            Command::MoveHuman { id, position } => {
                if let Some(h) = self.humans.get_mut(&id) {
                    h.moved_to = Some(position);
                }
            }
            Command::RemoveHuman { id } => {
                self.humans.remove(&id);
            }
            Command::SetGesture { id, gesture } => {
                if let Some(h) = self.humans.get_mut(&id) {
                    h.pose = gesture;
                }
            }
            Command::SetCondition { condition } => {
                self.condition = Some(condition);
                self.condition_started = self.running_ticks;
                if let Condition::Fixed { mode } = condition {
                    self.active_mode = mode;
                }
            }
            Command::Start => {
                self.running = true;
                self.fault = None;
            }
            Command::Pause => self.running = false,
        }
    }

    fn ingest_humans(&mut self) {
        let dt = self.dt;
        for h in self.humans.values_mut() {
            match h.moved_to.take() {
                Some(p) => {
                    h.state.velocity = (p - h.state.position) / dt;
                    h.state.position = p;
                }
                None => h.state.velocity = Vec2::ZERO,
            }
        }
    }

    fn detected_humans(&self) -> Vec<AgentState> {
        self.humans
            .values()
            .filter(|h| self.config.boundary.contains(h.state.position))
            .map(|h| h.state)
            .collect()
    }

    fn debounce_gestures(&mut self, detected: &[AgentState]) -> Vec<HumanGesture> {
        let mut onsets = Vec::new();
        for (id, h) in self.humans.iter_mut() {
            let raw = if detected.iter().any(|d| d.id == *id) {
                let kp = HumanKeypoints::posed(id.0, h.state.position, h.pose);
                classify_gesture(&kp)
            } else {
                None
            };
            if let Some(gesture) = h.debouncer.update(raw) {
                onsets.push(HumanGesture {
                    human_id: *id,
                    gesture,
                });
            }
        }
        onsets
    }

    fn run_responses(
        &mut self,
        onsets: &[HumanGesture],
        sounds: &mut Vec<(AgentId, crate::behavior::SoundSource)>,
    ) {
        for robot in &mut self.robots {
            let done = std::mem::take(&mut robot.finished);
            let mut idx = 0;
            robot.responses.retain(|_| {
                let keep = !done.contains(&idx);
                idx += 1;
                keep
            });
        }
        let positions: Vec<(AgentId, Vec2)> =
            self.robots.iter().map(|r| (r.state.id, r.state.position)).collect();
        for onset in onsets {
            for robot in &mut self.robots {
                if let Some(action) = begin_response(
                    robot.state.id,
                    onset.gesture,
                    &positions,
                    &robot.responses,
                    self.config.spin_denial_radius_m,
                ) {
                    sounds.push((robot.state.id, action.kind.sound_source()));
                    robot.responses.push(action);
                }
            }
        }
        for robot in &mut self.robots {
            for (i, action) in robot.responses.iter_mut().enumerate() {
                let before = action.elapsed_s;
                let status = tick_response(action, self.dt);
                let turned = action.kind.rotation_rate() * (action.elapsed_s - before);
                if turned != 0.0 {
                    robot.state.heading = wrap_angle(robot.state.heading + turned);
                }
                if status == ResponseStatus::Completed {
                    robot.finished.insert(i);
                }
            }
        }
    }

    fn run_mode_source(&mut self) {
        let elapsed = self.running_ticks - self.condition_started;
        match self.condition {
            Some(Condition::Control) => {
                let cycle = self.config.ticks_for(self.config.control_cycle_s);
                self.active_mode = CONTROL_CYCLE[((elapsed / cycle) % 3) as usize];
            }
            Some(Condition::ModelPrediction) => {
                let interval = self.config.ticks_for(self.config.model_interval_s);
                if elapsed.is_multiple_of(interval) {
                    match self.model.clone() {
                        Some(model) => {
                            let features = self.current_features();
                            match predict_mode(&model, &features) {
                                Ok(mode) => self.active_mode = mode,
                                Err(e) => log::warn!("prediction failed: {e}"),
                            }
                        }
                        None => {
                            log::error!("{}", EngineFault::NoModel);
                            self.fault = Some(EngineFault::NoModel);
                            self.running = false;
                        }
                    }
                }
            }
            _ => {}
        }
    }

    fn compute_gaze(&self, detected: &[AgentState]) -> Vec<GazeTarget> {
        let robots: Vec<(AgentId, Vec2)> =
            self.robots.iter().map(|r| (r.state.id, r.state.position)).collect();
        let humans: Vec<HumanView> = detected
            .iter()
            .map(|h| HumanView {
                id: h.id,
                position: h.position,
                gesturing: self.humans[&h.id].debouncer.active().is_some(),
            })
            .collect();
        head_targets(&robots, &humans)
    }

    fn flock_agents(&self, humans: &[AgentState]) -> Vec<AgentState> {
        self.robots
            .iter()
            .map(|r| r.state)
            .chain(humans.iter().copied())
            .collect()
    }

    fn move_robots(&mut self, detected: &[AgentState]) {
        let t = self.sim_time_s();
        let gains = self.config.mode_table.gains(self.active_mode);
        let params = self.config.term_params();
        let boundary = self.config.boundary;
        let all = self.flock_agents(detected);
        let dropout = self.config.detection_dropout;

        // One detection draw per (robot, human) pair, robots ascending.
        let mut visible: Vec<Vec<AgentState>> = Vec::with_capacity(self.robots.len());
        for _ in &self.robots {
            if dropout > 0.0 {
                let rng = &mut self.detect_rng;
                visible.push(
                    all.iter()
                        .filter(|a| a.is_robot() || rng.next_f64() >= dropout)
                        .copied()
                        .collect(),
                );
            } else {
                visible.push(Vec::new());
            }
        }

        let mut deltas = Vec::with_capacity(self.robots.len());
        for (robot, seen) in self.robots.iter().zip(&visible) {
            if robot.responses.iter().any(|a| a.kind.holds_base()) {
                deltas.push(Vec2::ZERO);
                continue;
            }
            let agents = if dropout > 0.0 { seen } else { &all };
            let terms = TermSet::compute(agents, robot.state.id, t, &boundary, &params)
                .expect("robot is part of its own agent list");
            deltas.push(limit_step(compose_step(&terms, &gains), self.config.v_max, self.dt));
        }

        let inner = |lo: f64, hi: f64, v: f64| v.clamp(lo + EDGE_INSET, hi - EDGE_INSET);
        for (robot, delta) in self.robots.iter_mut().zip(deltas) {
            let old = robot.state.position;
            let moved = old + delta;
            let clamped = Vec2::new(
                inner(boundary.x_min, boundary.x_max, moved.x),
                inner(boundary.y_min, boundary.y_max, moved.y),
            );
            let actual = clamped - old;
            robot.state.position = clamped;
            robot.state.velocity = actual / self.dt;
            if !robot.responses.iter().any(|a| a.kind.holds_base()) && actual.norm() > 1e-9 {
                robot.state.heading = actual.y.atan2(actual.x);
            }
        }
    }

    fn build_snapshot(&self, gaze: Vec<GazeTarget>, gesture_onsets: Vec<HumanGesture>) -> FlockSnapshot {
        let human_present = self
            .humans
            .values()
            .any(|h| self.config.boundary.contains(h.state.position));
        FlockSnapshot {
            tick: self.tick,
            sim_time_s: self.sim_time_s(),
            running: self.running,
            agents: self
                .robots
                .iter()
                .map(|r| r.state)
                .chain(self.humans.values().map(|h| h.state))
                .collect(),
            active_mode: self.active_mode,
            condition: self.condition,
            responses: self
                .robots
                .iter()
                .flat_map(|r| r.responses.iter().copied())
                .collect(),
            gaze,
            lights: self
                .robots
                .iter()
                .map(|r| RobotLight {
                    robot_id: r.state.id,
                    color: light_color(&r.responses, human_present),
                })
                .collect(),
            arms: self
                .robots
                .iter()
                .map(|r| RobotArm {
                    robot_id: r.state.id,
                    trajectory: r.arm.trajectory,
                })
                .collect(),
            active_gestures: self
                .humans
                .iter()
                .filter_map(|(id, h)| {
                    h.debouncer.active().map(|gesture| HumanGesture {
                        human_id: *id,
                        gesture,
                    })
                })
                .collect(),
            gesture_onsets,
            fault: self.fault.as_ref().map(ToString::to_string),
        }
    }
}

fn wrap_angle(a: f64) -> f64 {
    let mut a = a % (2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    } else if a <= -PI {
        a += 2.0 * PI;
    }
    a
}
