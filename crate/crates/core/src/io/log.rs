//! Line-delimited JSON session logs.
//!
//! A log is one header line, then records ordered by `(tick, kind)`, then an
//! optional footer. Every line is a JSON object with a `"type"` field:
//!
//! | `type`           | fields                                                         |
//! |------------------|----------------------------------------------------------------|
//! | `header`         | `version`, `session_id`, `started_at`, `seed`, `config`, `robots`, `model` |
//! | `snapshot`       | `tick`, `snapshot`                                             |
//! | `command`        | `tick`, `command`                                              |
//! | `training_label` | `tick`, `mode`, `features`                                     |
//! | `sound_event`    | `tick`, `robot_id`, `source`                                   |
//! | `footer`         | `final_tick`, `final_state_hash`, `records_digest`             |
//!
//! Within a tick, kinds appear in the order listed. `records_digest` is the
//! hex SHA-256 of every byte before the footer line, so any edit to the body
//! of a finished log is detected. A log without a footer (the writer died)
//! still reads, with a warning.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::behavior::SoundSource;
use crate::engine::{Command, EngineConfig, FlockSnapshot};
use crate::features::FeatureVector;
use crate::flock::{AgentId, ModeId};
use crate::learn::Model;
use crate::vec2::Vec2;

pub const LOG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub version: u32,
    pub session_id: String,
    /// Wall-clock stamp, only when the caller asks for one; `None` keeps
    /// logs of identical runs byte-identical.
    pub started_at: Option<String>,
    pub seed: u64,
    pub config: EngineConfig,
    pub robots: Vec<Vec2>,
    pub model: Option<Model>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionFooter {
    pub final_tick: u64,
    pub final_state_hash: String,
    pub records_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogRecord {
    Snapshot {
        tick: u64,
        snapshot: FlockSnapshot,
    },
    Command {
        tick: u64,
        command: Command,
    },
    TrainingLabel {
        tick: u64,
        mode: ModeId,
        features: FeatureVector,
    },
    SoundEvent {
        tick: u64,
        robot_id: AgentId,
        source: SoundSource,
    },
}

impl LogRecord {
    pub fn tick(&self) -> u64 {
        match self {
            LogRecord::Snapshot { tick, .. }
            | LogRecord::Command { tick, .. }
            | LogRecord::TrainingLabel { tick, .. }
            | LogRecord::SoundEvent { tick, .. } => *tick,
        }
    }

    /// Position of this record's kind within a tick.
    pub fn kind_rank(&self) -> u8 {
        match self {
            LogRecord::Snapshot { .. } => 0,
            LogRecord::Command { .. } => 1,
            LogRecord::TrainingLabel { .. } => 2,
            LogRecord::SoundEvent { .. } => 3,
        }
    }

    fn order_key(&self) -> (u64, u8) {
        (self.tick(), self.kind_rank())
    }
}

#[allow(clippy::large_enum_variant)]
#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum Meta {
    Header(SessionHeader),
    Footer(SessionFooter),
}

#[allow(clippy::large_enum_variant)]
enum Line {
    Meta(Meta),
    Record(LogRecord),
}

fn decode_line(body: &str) -> Result<Line, serde_json::Error> {
    let value: serde_json::Value = serde_json::from_str(body)?;
    match value.get("type").and_then(|t| t.as_str()) {
        Some("header" | "footer") => serde_json::from_value(value).map(Line::Meta),
        _ => serde_json::from_value(value).map(Line::Record),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionLog {
    pub header: SessionHeader,
    pub records: Vec<LogRecord>,
    pub footer: Option<SessionFooter>,
    pub warnings: Vec<String>,
}

impl SessionLog {
    pub fn is_truncated(&self) -> bool {
        self.footer.is_none()
    }

    /// Last tick covered by the log.
    pub fn final_tick(&self) -> u64 {
        self.footer.as_ref().map_or_else(
            || self.records.last().map_or(0, LogRecord::tick),
            |f| f.final_tick,
        )
    }

    pub fn commands(&self) -> impl Iterator<Item = (u64, &Command)> {
        self.records.iter().filter_map(|r| match r {
            LogRecord::Command { tick, command } => Some((*tick, command)),
            _ => None,
        })
    }

    pub fn snapshots(&self) -> impl Iterator<Item = &FlockSnapshot> {
        self.records.iter().filter_map(|r| match r {
            LogRecord::Snapshot { snapshot, .. } => Some(snapshot),
            _ => None,
        })
    }

    /// Serialize to the on-disk text form.
    pub fn to_text(&self) -> Result<String, LogError> {
        let mut w = LogWriter::new(Vec::new());
        w.write_header(&self.header)?;
        for r in &self.records {
            w.write_record(r)?;
        }
        if let Some(f) = &self.footer {
            w.finish(f.final_tick, &f.final_state_hash)?;
        }
        Ok(String::from_utf8(w.into_inner()).expect("json is utf-8"))
    }
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("log i/o: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: malformed record: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: record (tick {tick}, kind {kind}) is out of order")]
    Ordering { line: usize, tick: u64, kind: u8 },
    #[error("line {line}: expected the header first")]
    MissingHeader { line: usize },
    #[error("line {line}: second header")]
    DuplicateHeader { line: usize },
    #[error("line {line}: content after footer")]
    AfterFooter { line: usize },
    #[error("empty log")]
    Empty,
    #[error("unsupported log version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("log content digest mismatch: footer {expected}, content {actual}")]
    DigestMismatch { expected: String, actual: String },
    #[error("writer misuse: {0}")]
    Writer(&'static str),
}

/// Streaming writer. Enforces header-first and record ordering.
pub struct LogWriter<W: Write> {
    out: W,
    digest: Sha256,
    last: Option<(u64, u8)>,
    header_written: bool,
    finished: bool,
}

impl LogWriter<BufWriter<File>> {
    pub fn create(path: impl AsRef<Path>) -> Result<Self, LogError> {
        Ok(Self::new(BufWriter::new(File::create(path)?)))
    }
}

impl<W: Write> LogWriter<W> {
    pub fn new(out: W) -> Self {
        Self {
            out,
            digest: Sha256::new(),
            last: None,
            header_written: false,
            finished: false,
        }
    }

    fn write_line<T: Serialize>(&mut self, value: &T) -> Result<(), LogError> {
        let mut bytes = serde_json::to_vec(value).map_err(io::Error::other)?;
        bytes.push(b'\n');
        self.digest.update(&bytes);
        self.out.write_all(&bytes)?;
        Ok(())
    }

    pub fn write_header(&mut self, header: &SessionHeader) -> Result<(), LogError> {
        if self.header_written {
            return Err(LogError::Writer("header already written"));
        }
        self.write_line(&Meta::Header(header.clone()))?;
        self.header_written = true;
        Ok(())
    }

    pub fn write_record(&mut self, record: &LogRecord) -> Result<(), LogError> {
        if !self.header_written || self.finished {
            return Err(LogError::Writer("record outside header/footer"));
        }
        let key = record.order_key();
        if self.last.is_some_and(|last| key < last) {
            return Err(LogError::Writer("record out of order"));
        }
        self.last = Some(key);
        self.write_line(record)
    }

    /// Write the footer and flush.
    pub fn finish(&mut self, final_tick: u64, final_state_hash: &str) -> Result<(), LogError> {
        if !self.header_written || self.finished {
            return Err(LogError::Writer("footer outside an open log"));
        }
        let records_digest = hex::encode(self.digest.clone().finalize());
        let footer = SessionFooter {
            final_tick,
            final_state_hash: final_state_hash.to_string(),
            records_digest,
        };
        let mut bytes = serde_json::to_vec(&Meta::Footer(footer)).map_err(io::Error::other)?;
        bytes.push(b'\n');
        self.out.write_all(&bytes)?;
        self.out.flush()?;
        self.finished = true;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<(), LogError> {
        self.out.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

pub fn read_log(path: impl AsRef<Path>) -> Result<SessionLog, LogError> {
    let bytes = std::fs::read(path)?;
    let text = String::from_utf8(bytes).map_err(|e| LogError::Malformed {
        line: 0,
        reason: e.to_string(),
    })?;
    parse_log(&text)
}

/// Parse and validate log text.
pub fn parse_log(text: &str) -> Result<SessionLog, LogError> {
    let mut header: Option<SessionHeader> = None;
    let mut records: Vec<LogRecord> = Vec::new();
    let mut footer: Option<SessionFooter> = None;
    let mut warnings = Vec::new();
    let mut digest = Sha256::new();
    let mut last: Option<(u64, u8)> = None;

    let raw_lines: Vec<&str> = text.split_inclusive('\n').collect();
    let count = raw_lines.len();
    for (idx, raw) in raw_lines.into_iter().enumerate() {
        let line_no = idx + 1;
        let body = raw.strip_suffix('\n').unwrap_or(raw);
        if footer.is_some() {
            if body.trim().is_empty() {
                continue;
            }
            return Err(LogError::AfterFooter { line: line_no });
        }
        let parsed = match decode_line(body) {
            Ok(l) => l,
            Err(e) => {
                // A crash can leave a partial final line.
                if idx + 1 == count && !raw.ends_with('\n') && header.is_some() {
                    warnings.push(format!("line {line_no}: discarded partial trailing line"));
                    break;
                }
                return Err(LogError::Malformed {
                    line: line_no,
                    reason: e.to_string(),
                });
            }
        };
        match parsed {
            Line::Meta(Meta::Header(h)) => {
                if header.is_some() {
                    return Err(LogError::DuplicateHeader { line: line_no });
                }
                if idx != 0 {
                    return Err(LogError::MissingHeader { line: 1 });
                }
                if h.version != LOG_VERSION {
                    return Err(LogError::Version {
                        found: h.version,
                        expected: LOG_VERSION,
                    });
                }
                header = Some(h);
                digest.update(raw.as_bytes());
            }
            Line::Record(r) => {
                if header.is_none() {
                    return Err(LogError::MissingHeader { line: line_no });
                }
                let key = r.order_key();
                if last.is_some_and(|l| key < l) {
                    return Err(LogError::Ordering {
                        line: line_no,
                        tick: key.0,
                        kind: key.1,
                    });
                }
                last = Some(key);
                records.push(r);
                digest.update(raw.as_bytes());
            }
            Line::Meta(Meta::Footer(f)) => {
                if header.is_none() {
                    return Err(LogError::MissingHeader { line: line_no });
                }
                let actual = hex::encode(digest.clone().finalize());
                if actual != f.records_digest {
                    return Err(LogError::DigestMismatch {
                        expected: f.records_digest,
                        actual,
                    });
                }
                footer = Some(f);
            }
        }
    }

    let header = header.ok_or(LogError::Empty)?;
    if footer.is_none() {
        let w = "log has no footer; treating it as truncated".to_string();
        log::warn!("{w}");
        warnings.push(w);
    }
    Ok(SessionLog {
        header,
        records,
        footer,
        warnings,
    })
}
