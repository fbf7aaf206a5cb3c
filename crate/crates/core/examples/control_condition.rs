// The 90 s control condition, summarised as a mode-occupancy histogram.

use std::path::PathBuf;

use murmur::io::{load_scenario, mode_histogram, mode_histogram_csv, run_scenario_to_log, RunOptions};

pub fn main() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/control90.json");
    let scenario = load_scenario(path).unwrap();
    let log = run_scenario_to_log(&scenario, &RunOptions::default()).unwrap();
    print!("{}", mode_histogram_csv(&mode_histogram(&log)));
    let footer = log.footer.as_ref().unwrap();
    println!("final tick {}, state {}", footer.final_tick, footer.final_state_hash);
}
