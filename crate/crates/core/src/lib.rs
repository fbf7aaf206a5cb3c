//! Deterministic simulator for mixed human/robot flocks.
//!
//! Robots steer by a weighted sum of seven boid-style terms. The active
//! weight mode is picked by a choreographer, a fixed control cycle, or a
//! classifier trained on choreographer choices. Humans are scripted agents
//! whose gestures trigger timed robot responses.
//!
//! ```
//! use murmur::engine::{Command, Condition, Engine, EngineConfig};
//! use murmur::flock::ModeId;
//! use murmur::vec2::Vec2;
//!
//! let mut engine = Engine::new(EngineConfig::default(), &[Vec2::new(3.0, 3.0), Vec2::new(9.0, 9.0)]).unwrap();
//! engine.apply_command(Command::SetCondition { condition: Condition::Fixed { mode: ModeId::Cohesion } }).unwrap();
//! let snap = engine.run_ticks(20);
//! assert_eq!(snap.active_mode, ModeId::Cohesion);
//! ```

pub mod behavior;
pub mod engine;
pub mod features;
pub mod flock;
pub mod io;
pub mod learn;
pub mod rng;
pub mod vec2;
