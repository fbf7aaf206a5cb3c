use std::collections::BTreeMap;

use thiserror::Error;

use super::{Command, CommandError, Engine, EngineError, FlockSnapshot};
use crate::io::log::{LogRecord, SessionLog};

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("cannot rebuild engine from header: {0}")]
    Engine(#[from] EngineError),
    #[error("tick {tick}: logged command {command:?} rejected on replay: {source}")]
    Rejected {
        tick: u64,
        command: Command,
        source: CommandError,
    },
    #[error("command logged at tick 0")]
    TickZeroCommand,
    #[error("replay diverged at tick {tick}: expected state {expected}, got {actual}")]
    Divergence {
        tick: u64,
        expected: String,
        actual: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divergence {
    pub tick: u64,
    pub expected: String,
    pub actual: String,
}

/// Outcome of re-executing a log.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub final_tick: u64,
    pub final_state_hash: String,
    /// Footer hash, `None` for a truncated log.
    pub expected_hash: Option<String>,
    /// First logged snapshot whose replayed state differs.
    pub first_divergence: Option<Divergence>,
    pub snapshots_checked: usize,
    /// One snapshot per replayed tick, `1..=final_tick`.
    pub snapshots: Vec<FlockSnapshot>,
}

impl ReplayReport {
    pub fn matches(&self) -> bool {
        self.first_divergence.is_none()
            && self
                .expected_hash
                .as_ref()
                .is_none_or(|h| *h == self.final_state_hash)
    }
}

/// Re-run the logged command stream from the header state.
pub fn replay(log: &SessionLog) -> Result<ReplayReport, ReplayError> {
    let header = &log.header;
    let mut engine = Engine::new(header.config.clone(), &header.robots)?;
    if let Some(model) = &header.model {
        engine = engine.with_model(model.clone());
    }

    let mut commands: BTreeMap<u64, Vec<Command>> = BTreeMap::new();
    let mut logged: BTreeMap<u64, String> = BTreeMap::new();
    for record in &log.records {
        match record {
            LogRecord::Command { tick, command } => {
                if *tick == 0 {
                    return Err(ReplayError::TickZeroCommand);
                }
                commands.entry(*tick).or_default().push(*command);
            }
            LogRecord::Snapshot { tick, snapshot } => {
                logged.insert(*tick, snapshot.state_hash());
            }
            _ => {}
        }
    }

    let final_tick = log.final_tick();
    let mut first_divergence = None;
    let mut checked = 0;
    let mut check = |engine: &Engine, first: &mut Option<Divergence>| {
        if let Some(hash) = logged.get(&engine.tick()) {
            checked += 1;
            let actual = engine.snapshot().state_hash();
            if first.is_none() && *hash != actual {
                *first = Some(Divergence {
                    tick: engine.tick(),
                    expected: hash.clone(),
                    actual,
                });
            }
        }
    };
    check(&engine, &mut first_divergence);
    let mut snapshots = Vec::with_capacity(final_tick as usize);
    for tick in 1..=final_tick {
        for command in commands.remove(&tick).unwrap_or_default() {
            engine
                .apply_command(command)
                .map_err(|source| ReplayError::Rejected {
                    tick,
                    command,
                    source,
                })?;
        }
        snapshots.push(engine.step().clone());
        check(&engine, &mut first_divergence);
    }

    Ok(ReplayReport {
        final_tick,
        final_state_hash: engine.snapshot().state_hash(),
        expected_hash: log.footer.as_ref().map(|f| f.final_state_hash.clone()),
        first_divergence,
        snapshots_checked: checked,
        snapshots,
    })
}

/// Replay and require every logged snapshot and the footer hash to match.
pub fn verify_log(log: &SessionLog) -> Result<ReplayReport, ReplayError> {
    let report = replay(log)?;
    if let Some(d) = report.first_divergence.clone() {
        return Err(ReplayError::Divergence {
            tick: d.tick,
            expected: d.expected,
            actual: d.actual,
        });
    }
    if let Some(expected) = &report.expected_hash {
        if *expected != report.final_state_hash {
            return Err(ReplayError::Divergence {
                tick: report.final_tick,
                expected: expected.clone(),
                actual: report.final_state_hash.clone(),
            });
        }
    }
    Ok(report)
}
