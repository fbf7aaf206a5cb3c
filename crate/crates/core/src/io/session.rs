use std::io::Write;

use super::log::{LogError, LogWriter};
use crate::engine::{Ack, Command, CommandError, Engine, FlockSnapshot};

/// An engine bound to a log writer: every step's records are appended as
/// they are produced.
pub struct Session<W: Write> {
    engine: Engine,
    writer: LogWriter<W>,
}

impl<W: Write> Session<W> {
    pub fn start(mut engine: Engine, session_id: &str, out: W) -> Result<Self, LogError> {
        let mut writer = LogWriter::new(out);
        writer.write_header(&engine.session_header(session_id))?;
        for record in engine.take_records() {
            writer.write_record(&record)?;
        }
        Ok(Self { engine, writer })
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    /// Mutable access for things that do not produce records (model swaps).
    pub fn engine_mut(&mut self) -> &mut Engine {
        &mut self.engine
    }

    pub fn apply_command(&mut self, cmd: Command) -> Result<Ack, CommandError> {
        self.engine.apply_command(cmd)
    }

    pub fn step(&mut self) -> Result<&FlockSnapshot, LogError> {
        self.engine.step();
        for record in self.engine.take_records() {
            self.writer.write_record(&record)?;
        }
        Ok(self.engine.snapshot())
    }

    pub fn flush(&mut self) -> Result<(), LogError> {
        self.writer.flush()
    }

    /// Write the footer and hand back the engine and the sink.
    pub fn finish(mut self) -> Result<(Engine, W), LogError> {
        let hash = self.engine.snapshot().state_hash();
        self.writer.finish(self.engine.tick(), &hash)?;
        Ok((self.engine, self.writer.into_inner()))
    }
}
