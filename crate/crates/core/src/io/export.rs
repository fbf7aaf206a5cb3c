use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use super::log::{parse_log, read_log, LogError, LogRecord, SessionLog};
use crate::learn::TrainingExample;

/// One example per choreographer-labelled mode selection.
pub fn export_training_data(log: &SessionLog) -> Vec<TrainingExample> {
    log.records
        .iter()
        .filter_map(|r| match r {
            LogRecord::TrainingLabel {
                tick,
                mode,
                features,
            } => Some(TrainingExample {
                features: *features,
                label: *mode,
                tick: *tick,
                session: log.header.session_id.clone(),
            }),
            _ => None,
        })
        .collect()
}

/// Export several sessions. Repeated session ids get a `#n` suffix so every
/// example can be traced back to one session.
pub fn export_sessions(logs: &[SessionLog]) -> Vec<TrainingExample> {
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    let mut out = Vec::new();
    for log in logs {
        let n = seen.entry(log.header.session_id.as_str()).or_insert(0);
        *n += 1;
        let suffix = (*n > 1).then(|| format!("#{n}"));
        for mut ex in export_training_data(log) {
            if let Some(s) = &suffix {
                ex.session.push_str(s);
            }
            out.push(ex);
        }
    }
    out
}

/// Split text holding several logs back to back and parse each one.
pub fn parse_concatenated(text: &str) -> Result<Vec<SessionLog>, LogError> {
    let mut starts = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        if line.starts_with("{\"type\":\"header\"") {
            starts.push(offset);
        }
        offset += line.len();
    }
    if starts.is_empty() {
        return parse_log(text).map(|l| vec![l]);
    }
    starts.push(text.len());
    starts.windows(2).map(|w| parse_log(&text[w[0]..w[1]])).collect()
}

/// `*.jsonl` files directly inside `dir`, sorted by name.
pub fn log_files(dir: impl AsRef<Path>) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    Ok(files)
}

/// Read every log in a directory.
pub fn read_log_dir(dir: impl AsRef<Path>) -> Result<Vec<SessionLog>, LogError> {
    log_files(dir)?.iter().map(read_log).collect()
}
