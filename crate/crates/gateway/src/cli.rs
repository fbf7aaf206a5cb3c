//! `murmur` command line.
//!
//! Exit codes: 0 success, 1 failure, 2 usage error, 3 replay divergence.
//! With `--json`, failures print `{"error": <kind>, "message": <text>}` on stderr.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use murmur::engine::{verify_log, Command, Condition, Engine, EngineConfig, ReplayError};
use murmur::features::build_feature_vector;
use murmur::io::{
    export_sessions, gesture_histogram, gesture_histogram_csv, load_scenario, mode_histogram,
    mode_histogram_csv, read_log, read_log_dir, run_scenario, RunOptions,
};
use murmur::learn::{load_model, predict_mode, save_model, train, TrainConfig};
use murmur::vec2::Vec2;

use crate::server::{Gateway, ServeOptions};

#[derive(Debug, Parser)]
#[command(name = "murmur", version, about = "Deterministic human/robot flock simulator")]
pub struct Cli {
    /// Print errors as JSON on stderr.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Run a scenario headless and write its session log.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Number of ticks to run (default: the scenario duration).
        #[arg(long, conflicts_with = "seconds")]
        ticks: Option<u64>,
        #[arg(long)]
        seconds: Option<f64>,
        /// Log path; defaults to `<scenario name>.jsonl` in the log directory.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long, env = "MURMUR_LOG_DIR")]
        log_dir: Option<PathBuf>,
        /// Classifier for the model-prediction condition.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Log a snapshot every tick instead of every fourth.
        #[arg(long)]
        full_rate: bool,
    },
    /// Serve the live WebSocket protocol.
    Serve {
        #[arg(long, env = "MURMUR_ADDR", default_value = "127.0.0.1:8765")]
        addr: String,
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, env = "MURMUR_LOG_DIR")]
        log_dir: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value_t = 10.0)]
        state_rate: f64,
        /// Run ticks as fast as possible instead of at the tick rate.
        #[arg(long)]
        fast: bool,
        /// Stop after this many ticks.
        #[arg(long)]
        ticks: Option<u64>,
    },
    /// Train a classifier from choreographer labels in a directory of logs.
    Train {
        #[arg(long, env = "MURMUR_LOG_DIR")]
        log_dir: PathBuf,
        #[arg(long)]
        model_out: PathBuf,
        #[arg(long, default_value_t = 500)]
        epochs: usize,
        #[arg(long, default_value_t = 0.5)]
        learning_rate: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Predict a mode for every logged snapshot.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        log: PathBuf,
        /// CSV report path; stdout when omitted.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Re-execute a log.
    Replay {
        #[arg(long)]
        log: PathBuf,
        /// Fail unless every logged snapshot and the final state match.
        #[arg(long)]
        verify: bool,
    },
    /// Mode-occupancy and gesture histograms as CSV.
    Stats {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        mode_hist: bool,
        #[arg(long)]
        gesture_hist: bool,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub kind: &'static str,
    pub message: String,
    pub exit: u8,
}

impl CliError {
    fn new(kind: &'static str, message: impl std::fmt::Display) -> Self {
        Self {
            kind,
            message: message.to_string(),
            exit: 1,
        }
    }
}

macro_rules! from_error {
    ($($t:ty => $kind:literal),* $(,)?) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::new($kind, e)
            }
        }
    )*};
}

from_error!(
    std::io::Error => "io",
    murmur::io::LogError => "log",
    murmur::io::ScenarioError => "scenario",
    murmur::learn::LearnError => "model",
    murmur::engine::EngineError => "engine",
    crate::server::GatewayError => "gateway",
);

impl From<ReplayError> for CliError {
    fn from(e: ReplayError) -> Self {
        let exit = if matches!(e, ReplayError::Divergence { .. }) { 3 } else { 1 };
        Self {
            kind: "replay",
            message: e.to_string(),
            exit,
        }
    }
}

/// Entry point used by the binary.
pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let json = std::env::args().any(|a| a == "--json");
            if json && e.use_stderr() {
                eprintln!("{}", json!({ "error": "usage", "message": e.to_string().trim() }));
                return ExitCode::from(2);
            }
            e.print().ok();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let json = cli.json;
    let mut out = std::io::stdout().lock();
    match execute(cli.command, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if json {
                eprintln!("{}", json!({ "error": e.kind, "message": e.message }));
            } else {
                eprintln!("error: {}", e.message);
            }
            ExitCode::from(e.exit)
        }
    }
}

pub fn execute(cmd: Cmd, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        Cmd::Run {
            scenario,
            ticks,
            seconds,
            log,
            log_dir,
            model,
            full_rate,
        } => {
            let mut s = load_scenario(&scenario)?;
            if full_rate {
                let mut cfg = s.engine.clone().unwrap_or_default();
                cfg.snapshot_every_ticks = 1;
                s.engine = Some(cfg);
            }
            let config = s.engine_config()?;
            let ticks = match (ticks, seconds) {
                (Some(t), _) => Some(t),
                (None, Some(sec)) if sec.is_finite() && sec > 0.0 => Some(config.ticks_for(sec)),
                (None, Some(sec)) => return Err(CliError::new("usage", format!("--seconds must be positive, got {sec}"))),
                (None, None) => None,
            };
            let path = match (log, log_dir) {
                (Some(p), _) => p,
                (None, Some(dir)) => dir.join(format!("{}.jsonl", s.name)),
                (None, None) => return Err(CliError::new("usage", "give --log or --log-dir (or MURMUR_LOG_DIR)")),
            };
            let options = RunOptions {
                ticks,
                model: model.map(load_model).transpose()?,
                session_id: None,
            };
            let file = BufWriter::new(File::create(&path)?);
            let (engine, mut file) = run_scenario(&s, &options, file)?;
            file.flush()?;
            let snap = engine.snapshot();
            writeln!(
                out,
                "ran {} ticks ({:.2} s), final mode {}, state {}\nlog: {}",
                snap.tick,
                snap.sim_time_s,
                snap.active_mode,
                snap.state_hash(),
                path.display()
            )?;
            Ok(())
        }
        Cmd::Serve {
            addr,
            scenario,
            log_dir,
            model,
            state_rate,
            fast,
            ticks,
        } => serve(addr, scenario, log_dir, model, state_rate, fast, ticks, out),
        Cmd::Train {
            log_dir,
            model_out,
            epochs,
            learning_rate,
            seed,
        } => {
            let logs = read_log_dir(&log_dir)?;
            let examples = export_sessions(&logs);
            if examples.is_empty() {
                return Err(CliError::new(
                    "no_training_examples",
                    format!("no training examples in {}", log_dir.display()),
                ));
            }
            let trained = train(&examples, &TrainConfig { epochs, learning_rate, seed })?;
            save_model(&trained.model, &model_out)?;
            let r = &trained.report;
            writeln!(
                out,
                "trained on {} examples from {} logs: loss {:.4}, training accuracy {:.1}%",
                r.examples,
                logs.len(),
                r.final_loss,
                r.training_accuracy * 100.0
            )?;
            for w in &r.warnings {
                writeln!(out, "warning: {w}")?;
            }
            writeln!(out, "model: {}", model_out.display())?;
            Ok(())
        }
        Cmd::Predict { model, log, report } => {
            let model = load_model(model)?;
            let log = read_log(log)?;
            let boundary = log.header.config.boundary;
            let mut csv = String::from("tick,active_mode,predicted_mode\n");
            let (mut n, mut agree) = (0usize, 0usize);
            for snap in log.snapshots() {
                let features = build_feature_vector(&snap.agents, &boundary)
                    .map_err(|e| CliError::new("features", e))?;
                let predicted = predict_mode(&model, &features)?;
                csv.push_str(&format!("{},{},{}\n", snap.tick, snap.active_mode, predicted));
                n += 1;
                agree += usize::from(predicted == snap.active_mode);
            }
            match report {
                Some(p) => {
                    std::fs::write(&p, &csv)?;
                    writeln!(out, "{n} snapshots, {agree} agree with the active mode; report: {}", p.display())?;
                }
                None => out.write_all(csv.as_bytes())?,
            }
            Ok(())
        }
        Cmd::Replay { log, verify } => {
            let log = read_log(log)?;
            for w in &log.warnings {
                writeln!(out, "warning: {w}")?;
            }
            let report = if verify {
                verify_log(&log)?
            } else {
                murmur::engine::replay(&log)?
            };
            let status = if report.matches() { "match" } else { "MISMATCH" };
            writeln!(
                out,
                "replayed {} ticks, {} logged snapshots checked: {status}\nfinal state {}",
                report.final_tick, report.snapshots_checked, report.final_state_hash
            )?;
            if let Some(d) = &report.first_divergence {
                writeln!(out, "first divergence at tick {}", d.tick)?;
            }
            Ok(())
        }
        Cmd::Stats {
            log,
            mode_hist,
            gesture_hist,
            out: path,
        } => {
            let log = read_log(log)?;
            let (modes, gestures) = if mode_hist || gesture_hist {
                (mode_hist, gesture_hist)
            } else {
                (true, true)
            };
            let mut text = String::new();
            if modes {
                text.push_str(&mode_histogram_csv(&mode_histogram(&log)));
            }
            if gestures {
                if modes {
                    text.push('\n');
                }
                text.push_str(&gesture_histogram_csv(&gesture_histogram(&log)));
            }
            match path {
                Some(p) => std::fs::write(p, text)?,
                None => out.write_all(text.as_bytes())?,
            }
            Ok(())
        }
    }
}

/// Default live setup: six robots on a ring, choreographer in charge.
fn default_live_engine() -> Result<(Engine, Vec<(u64, Command)>), CliError> {
    let config = EngineConfig::default();
    let c = config.boundary.center();
    let robots: Vec<Vec2> = (0..6)
        .map(|i| {
            let a = std::f64::consts::TAU * f64::from(i) / 6.0;
            c + Vec2::new(a.cos(), a.sin()) * 4.0
        })
        .collect();
    let engine = Engine::new(config, &robots)?;
    let script = vec![(1, Command::SetCondition { condition: Condition::HumanChoreographer })];
    Ok((engine, script))
}

#[allow(clippy::too_many_arguments)]
fn serve(
    addr: String,
    scenario: Option<PathBuf>,
    log_dir: Option<PathBuf>,
    model: Option<PathBuf>,
    state_rate: f64,
    fast: bool,
    ticks: Option<u64>,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let (mut engine, script, name) = match &scenario {
        Some(p) => {
            let s = load_scenario(p)?;
            let engine = Engine::new(s.engine_config()?, &s.robots)?;
            (engine, s.events()?, s.name)
        }
        None => {
            let (e, script) = default_live_engine()?;
            (e, script, "live".to_string())
        }
    };
    if let Some(m) = model {
        engine = engine.with_model(load_model(m)?);
    }
    let log_path = log_dir.as_deref().map(|d| next_log_path(d, &name)).transpose()?;
    let options = ServeOptions {
        state_rate_hz: state_rate,
        realtime: !fast,
        log_path: log_path.clone(),
        session_id: name,
        script,
        max_ticks: ticks,
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let gateway = Gateway::start(engine, &addr, options).await?;
        writeln!(out, "listening on ws://{}", gateway.local_addr())?;
        if let Some(p) = &log_path {
            writeln!(out, "logging to {}", p.display())?;
        }
        out.flush()?;
        loop {
            tokio::select! {
                _ = tokio::signal::ctrl_c() => break,
                _ = tokio::time::sleep(std::time::Duration::from_millis(100)) => {
                    if gateway.is_finished() {
                        break;
                    }
                }
            }
        }
        let engine = gateway.shutdown().await?;
        writeln!(out, "stopped at tick {}", engine.tick())?;
        Ok(())
    })
}

/// `<dir>/<name>.jsonl`, or `<name>-2.jsonl` and so on if taken.
fn next_log_path(dir: &Path, name: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut path = dir.join(format!("{name}.jsonl"));
    let mut n = 2;
    while path.exists() {
        path = dir.join(format!("{name}-{n}.jsonl"));
        n += 1;
    }
    Ok(path)
}
