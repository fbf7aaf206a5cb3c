use std::collections::BTreeMap;
use std::fmt::Write;

use super::log::SessionLog;
use crate::behavior::Gesture;
use crate::flock::ModeId;

/// Seconds of running sim time spent in each mode.
///
/// The engine logs a snapshot whenever the mode or the running flag changes,
/// so the state between two logged snapshots is the earlier one's.
pub fn mode_histogram(log: &SessionLog) -> BTreeMap<ModeId, f64> {
    let dt = 1.0 / f64::from(log.header.config.tick_hz);
    let mut ticks: BTreeMap<ModeId, u64> = BTreeMap::new();
    let mut prev: Option<(u64, ModeId, bool)> = None;
    let mut credit = |mode: ModeId, running: bool, n: u64| {
        if running && n > 0 {
            *ticks.entry(mode).or_insert(0) += n;
        }
    };
    for snap in log.snapshots() {
        if let Some((tick, mode, running)) = prev {
            credit(mode, running, snap.tick.saturating_sub(tick + 1));
        }
        if snap.tick > 0 {
            credit(snap.active_mode, snap.running, 1);
        }
        prev = Some((snap.tick, snap.active_mode, snap.running));
    }
    if let Some((tick, mode, running)) = prev {
        credit(mode, running, log.final_tick().saturating_sub(tick));
    }
    ticks.into_iter().map(|(m, n)| (m, n as f64 * dt)).collect()
}

/// Debounced gesture onsets per gesture.
pub fn gesture_histogram(log: &SessionLog) -> BTreeMap<Gesture, u64> {
    let mut counts = BTreeMap::new();
    for snap in log.snapshots() {
        for onset in &snap.gesture_onsets {
            *counts.entry(onset.gesture).or_insert(0) += 1;
        }
    }
    counts
}

/// Running sim time covered by the log.
pub fn logged_sim_time(log: &SessionLog) -> f64 {
    mode_histogram(log).values().sum()
}

pub fn mode_histogram_csv(hist: &BTreeMap<ModeId, f64>) -> String {
    let mut out = String::from("mode,seconds\n");
    for (mode, s) in hist {
        writeln!(out, "{mode},{s:.2}").unwrap();
    }
    out
}

pub fn gesture_histogram_csv(hist: &BTreeMap<Gesture, u64>) -> String {
    let mut out = String::from("gesture,count\n");
    for (g, n) in hist {
        writeln!(out, "{},{n}", g.name()).unwrap();
    }
    out
}
