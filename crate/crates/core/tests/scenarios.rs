use std::path::PathBuf;

use murmur::behavior::Gesture;
use murmur::engine::Command;
use murmur::flock::{AgentId, ModeId};
use murmur::io::{
    gesture_histogram, load_scenario, mode_histogram, parse_scenario, run_scenario_to_log, RunOptions,
    ScenarioError, TimelineEntry,
};

fn shipped(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

#[test]
fn reference_scenarios_load() {
    for name in ["solo_circling.json", "flock_walker_gestures.json", "control90.json"] {
        let s = load_scenario(shipped(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        let times: Vec<f64> = s.timeline.iter().map(TimelineEntry::time_s).collect();
        assert!(times.windows(2).all(|w| w[0] <= w[1]), "{name} timeline unsorted");
    }
}

#[test]
fn empty_timeline_is_valid() {
    let s = parse_scenario(
        r#"{"name":"bare","boundary":{"x_min":0,"x_max":5,"y_min":0,"y_max":5},
            "robots":[{"x":1,"y":1}],"duration_s":1}"#,
    )
    .unwrap();
    assert!(s.timeline.is_empty());
    assert_eq!(s.total_ticks().unwrap(), 20);
}

#[test]
fn undeclared_human_is_rejected_with_field() {
    let err = parse_scenario(
        r#"{"name":"x","boundary":{"x_min":0,"x_max":5,"y_min":0,"y_max":5},
            "robots":[{"x":1,"y":1}],"duration_s":2,
            "timeline":[{"time_s":0,"command":{"type":"add_human","id":9,"position":{"x":1,"y":2}}}]}"#,
    )
    .unwrap_err();
    match err {
        ScenarioError::Invalid { field, reason } => {
            assert_eq!(field, "timeline[0].command.id");
            assert!(reason.contains("not declared"), "{reason}");
        }
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn schema_errors_name_the_field() {
    let err = parse_scenario(r#"{"name":"x","boundary":{"x_min":0,"x_max":5,"y_min":0,"y_max":5},"robots":[],"duration_s":"long"}"#)
        .unwrap_err();
    assert!(err.to_string().contains("duration_s") || err.to_string().contains("string"), "{err}");
    let err = parse_scenario(r#"{"name":"x","boundary":{"x_min":0,"x_max":5,"y_min":0,"y_max":5},"robots":[],"duration_s":1}"#)
        .unwrap_err();
    assert!(err.to_string().starts_with("robots:"), "{err}");
}

#[test]
fn timeline_is_sorted_on_load() {
    let s = parse_scenario(
        r#"{"name":"x","boundary":{"x_min":0,"x_max":5,"y_min":0,"y_max":5},
            "robots":[{"x":1,"y":1}],"duration_s":5,
            "timeline":[{"time_s":3,"command":{"type":"pause"}},{"time_s":1,"command":{"type":"start"}}]}"#,
    )
    .unwrap();
    assert_eq!(s.timeline[0].time_s(), 1.0);
}

#[test]
fn walk_expands_per_tick() {
    let s = parse_scenario(
        r#"{"name":"w","boundary":{"x_min":0,"x_max":10,"y_min":0,"y_max":10},
            "robots":[{"x":1,"y":1}],"humans":[5],"duration_s":3,
            "timeline":[{"time_s":0,"command":{"type":"add_human","id":5,"position":{"x":2,"y":2}}},
                        {"walk":{"id":5,"from":{"x":2,"y":2},"to":{"x":4,"y":2},"start_s":1,"duration_s":1}}]}"#,
    )
    .unwrap();
    let moves: Vec<_> = s
        .events()
        .unwrap()
        .into_iter()
        .filter(|(_, c)| matches!(c, Command::MoveHuman { .. }))
        .collect();
    assert_eq!(moves.len(), 21);
    assert_eq!(moves[0].0, 21);
    match moves[20].1 {
        Command::MoveHuman { id, position } => {
            assert_eq!(id, AgentId(5));
            assert_eq!((position.x, position.y), (4.0, 2.0));
        }
        _ => unreachable!(),
    }
}

#[test]
fn walker_scenario_shows_all_gestures() {
    let s = load_scenario(shipped("flock_walker_gestures.json")).unwrap();
    let log = run_scenario_to_log(&s, &RunOptions::default()).unwrap();
    let g = gesture_histogram(&log);
    for gesture in Gesture::ALL {
        assert_eq!(g.get(&gesture), Some(&1), "{gesture:?}");
    }
    let hist = mode_histogram(&log);
    assert!(hist.contains_key(&ModeId::Following));
    assert!(hist.contains_key(&ModeId::Linear));
    let total: f64 = hist.values().sum();
    assert!((total - 45.0).abs() < 1e-9, "{total}");
}

#[test]
fn fixed_linear_histogram() {
    let s = parse_scenario(
        r#"{"name":"lin","boundary":{"x_min":0,"x_max":15,"y_min":0,"y_max":15},
            "robots":[{"x":3,"y":3},{"x":9,"y":4}],"condition":{"kind":"fixed","mode":"linear"},"duration_s":60}"#,
    )
    .unwrap();
    let log = run_scenario_to_log(&s, &RunOptions::default()).unwrap();
    let hist = mode_histogram(&log);
    assert_eq!(hist.len(), 1);
    assert!((hist[&ModeId::Linear] - 60.0).abs() < 1e-9);
    assert!(gesture_histogram(&log).is_empty());
}
