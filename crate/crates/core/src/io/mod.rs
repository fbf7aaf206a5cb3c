//! Session logs, scenario scripts, training-data export and statistics.

pub mod export;
pub mod log;
pub mod scenario;
pub mod session;
pub mod stats;

pub use export::{export_sessions, export_training_data, parse_concatenated, read_log_dir};
pub use log::{
    parse_log, read_log, LogError, LogRecord, LogWriter, SessionFooter, SessionHeader, SessionLog,
    LOG_VERSION,
};
pub use scenario::{
    load_scenario, parse_scenario, run_scenario, run_scenario_to_log, RunOptions, Scenario,
    ScenarioError, TimelineEntry, Walk,
};
pub use session::Session;
pub use stats::{gesture_histogram, gesture_histogram_csv, mode_histogram, mode_histogram_csv};
