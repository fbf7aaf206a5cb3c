// Run any scenario file and print its histograms.
// 
// `cargo run --example scenario -- crates/core/scenarios/flock_walker_gestures.json`

use std::path::PathBuf;

use murmur::io::{
    gesture_histogram, gesture_histogram_csv, load_scenario, mode_histogram, mode_histogram_csv,
    run_scenario_to_log, RunOptions,
};

pub fn main() {
    let path = std::env::args()
        .nth(1)
        .filter(|a| a.ends_with(".json"))
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/flock_walker_gestures.json"));
    let scenario = match load_scenario(&path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{}: {e}", path.display());
            std::process::exit(1);
        }
    };
    let log = run_scenario_to_log(&scenario, &RunOptions::default()).unwrap();
    println!("{}: {} records", scenario.name, log.records.len());
    print!("{}", mode_histogram_csv(&mode_histogram(&log)));
    print!("{}", gesture_histogram_csv(&gesture_histogram(&log)));
}
