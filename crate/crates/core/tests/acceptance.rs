//! Acceptance runner: one line per criterion, nonzero exit if any fails.

mod common;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use murmur::behavior::{classify_gesture, Gesture, HumanKeypoints, LightColor, ResponseKind};
use murmur::engine::{verify_log, Command, Condition, Engine, EngineConfig};
use murmur::features::{best_fit_cubic, build_feature_vector, fit_cubic, measure_of_spread, regional_density};
use murmur::flock::{AgentId, AgentState, BoundaryRegion, ModeId, WeightGains};
use murmur::io::{load_scenario, mode_histogram, parse_log, run_scenario, RunOptions};
use murmur::learn::{load_model, predict_mode, save_model, train, TrainConfig};
use murmur::rng::SplitMix64;
use murmur::vec2::{Vec2, Vec3};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn term_oracle() -> Outcome {
    let start = Instant::now();
    let errors = common::term_oracle_errors(1000, 0xacce);
    let secs = start.elapsed().as_secs_f64();
    let (name, worst) = errors
        .iter()
        .copied()
        .fold(("", 0.0), |a, b| if b.1 > a.1 { b } else { a });
    outcome(
        worst < 1e-10 && secs < 5.0,
        format!("1000 configs, max abs err {worst:.2e} ({name}) < 1e-10, {secs:.2} s < 5 s"),
    )
}

fn circling() -> Outcome {
    let scenario = load_scenario(scenario_path("solo_circling.json")).unwrap();
    let config = scenario.engine_config().unwrap();
    assert_eq!(
        config.mode_table.circling,
        WeightGains::from_array([0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0])
    );
    let start = Instant::now();
    let mut engine = Engine::new(config.clone(), &scenario.robots).unwrap();
    for (_, cmd) in scenario.events().unwrap() {
        engine.apply_command(cmd).unwrap();
    }
    let total = config.ticks_for(200.0);
    let tail_from = config.ticks_for(150.0);
    let center = config.boundary.center();
    let (mut sum, mut n) = (0.0, 0);
    for k in 1..=total {
        let snap = engine.step();
        if k > tail_from {
            sum += snap.agents[0].position.distance(center);
            n += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let mean = sum / n as f64;
    let r = config.boundary.circling_radius();
    let rel = (mean - r).abs() / r;
    outcome(
        rel <= 0.15 && secs < 2.0 && engine.active_mode() == ModeId::Circling,
        format!("mean radius {mean:.3} m vs r = {r} m, rel err {:.2}% <= 15%, {secs:.2} s < 2 s", rel * 100.0),
    )
}

fn control_schedule() -> Outcome {
    let scenario = load_scenario(scenario_path("control90.json")).unwrap();
    let (_, bytes) = run_scenario(&scenario, &RunOptions::default(), Vec::new()).unwrap();
    let log = parse_log(std::str::from_utf8(&bytes).unwrap()).unwrap();
    let hist = mode_histogram(&log);
    let get = |m| hist.get(&m).copied().unwrap_or(0.0);
    let (c, s, a) = (get(ModeId::Cohesion), get(ModeId::Separation), get(ModeId::Alignment));
    let ok = hist.len() == 3 && [c, s, a].iter().all(|v| (v - 30.0).abs() <= 0.05 + 1e-9);
    // Order: the mode sequence in snapshots must be C, S, A.
    let mut order = Vec::new();
    for snap in log.snapshots().filter(|s| s.tick > 0) {
        if order.last() != Some(&snap.active_mode) {
            order.push(snap.active_mode);
        }
    }
    let in_order = order == [ModeId::Cohesion, ModeId::Separation, ModeId::Alignment];
    outcome(
        ok && in_order,
        format!("Cohesion/Separation/Alignment = {c:.2}/{s:.2}/{a:.2} s, each 30 +- 0.05 s, order {order:?}"),
    )
}

fn separation() -> Outcome {
    let mut rng = SplitMix64::new(2024);
    let center = Vec2::new(7.5, 7.5);
    let robots: Vec<Vec2> = (0..6)
        .map(|_| loop {
            let p = Vec2::new(rng.range_f64(-1.0, 1.0), rng.range_f64(-1.0, 1.0));
            if p.norm() <= 1.0 {
                break center + p;
            }
        })
        .collect();
    let mut engine = Engine::new(EngineConfig::default(), &robots).unwrap();
    let fixed = Condition::Fixed { mode: ModeId::Separation };
    engine.apply_command(Command::SetCondition { condition: fixed }).unwrap();
    let start_min = min_pairwise(&robots);
    let snap = engine.run_ticks(EngineConfig::default().ticks_for(30.0));
    let now: Vec<Vec2> = snap.robots().map(|r| r.position).collect();
    let d = min_pairwise(&now);
    outcome(
        d >= 1.5,
        format!("6 robots in 2 m disc (start min {start_min:.3} m), min pairwise after 30 s {d:.4} m >= 1.5 m"),
    )
}

fn min_pairwise(p: &[Vec2]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            best = best.min(p[i].distance(p[j]));
        }
    }
    best
}

fn gesture_pipeline() -> Outcome {
    let scenario = load_scenario(scenario_path("flock_walker_gestures.json")).unwrap();
    let mut config = scenario.engine_config().unwrap();
    config.snapshot_every_ticks = 1;
    let dt = config.dt();
    let mut engine = Engine::new(config.clone(), &scenario.robots).unwrap();
    let events = scenario.events().unwrap();
    let mut next = 0;

    // (robot, kind) -> ticks present; kind -> colors seen while it was the newest.
    let mut present: BTreeMap<(u32, ResponseKind), u64> = BTreeMap::new();
    let mut colors_ok = true;
    let mut substitution_ok = true;
    let mut seen_spin = false;
    let mut seen_pulse = false;
    let mut prev_positions: Vec<Vec2> = scenario.robots.clone();
    for tick in 1..=scenario.total_ticks().unwrap() {
        while next < events.len() && events[next].0 <= tick {
            engine.apply_command(events[next].1).unwrap();
            next += 1;
        }
        let snap = engine.step().clone();
        for r in &snap.responses {
            *present.entry((r.robot_id.0, r.kind)).or_insert(0) += 1;
            let newest = snap
                .responses
                .iter()
                .filter(|o| o.robot_id == r.robot_id)
                .min_by(|a, b| a.elapsed_s.total_cmp(&b.elapsed_s))
                .unwrap();
            if newest == r && snap.light(r.robot_id) != Some(r.kind.light()) {
                colors_ok = false;
            }
        }
        for onset in &snap.gesture_onsets {
            if onset.gesture != Gesture::RightHandUp {
                continue;
            }
            for (i, p) in prev_positions.iter().enumerate() {
                let crowded = prev_positions
                    .iter()
                    .enumerate()
                    .any(|(j, q)| j != i && p.distance(*q) < config.spin_denial_radius_m);
                let got = snap
                    .responses
                    .iter()
                    .find(|r| r.robot_id.0 == i as u32 && r.elapsed_s <= dt + 1e-9)
                    .map(|r| r.kind);
                let want = if crowded { ResponseKind::PulseGreen } else { ResponseKind::SpinInPlace };
                seen_spin |= want == ResponseKind::SpinInPlace;
                seen_pulse |= want == ResponseKind::PulseGreen;
                substitution_ok &= got == Some(want);
            }
        }
        prev_positions = snap.robots().map(|r| r.position).collect();
    }

    let expect = [
        (ResponseKind::GripperOpenClose, 2.0, LightColor::DarkBlue),
        (ResponseKind::GazeUp, 4.0, LightColor::Orange),
        (ResponseKind::SpinInPlace, 12.0, LightColor::Green),
        (ResponseKind::PulseGreen, 2.0, LightColor::Green),
    ];
    let mut durations_ok = true;
    let mut summary = Vec::new();
    for (kind, secs, color) in expect {
        colors_ok &= kind.light() == color;
        let runs: Vec<f64> = present
            .iter()
            .filter(|((_, k), _)| *k == kind)
            .map(|(_, n)| *n as f64 * dt)
            .collect();
        durations_ok &= !runs.is_empty() && runs.iter().all(|d| (d - secs).abs() <= dt + 1e-9);
        summary.push(format!("{}x{kind:?}", runs.len()));
    }

    // Both hands up and together: the together reading wins.
    let mut kp = HumanKeypoints::posed(1, Vec2::new(1.0, 1.0), Some(Gesture::HandsTogether));
    let up = |w: Option<Vec3>| w.map(|v| Vec3 { z: 1.8, ..v });
    kp.left_wrist = up(kp.left_wrist);
    kp.right_wrist = up(kp.right_wrist);
    let priority_ok = classify_gesture(&kp) == Some(Gesture::HandsTogether);

    outcome(
        durations_ok && colors_ok && priority_ok && substitution_ok && seen_spin && seen_pulse,
        format!(
            "durations 2/4/12 s +- 1 tick: {durations_ok} [{}], colors: {colors_ok}, \
             hands-together priority: {priority_ok}, pulse substitution: {substitution_ok} (spin seen {seen_spin}, pulse seen {seen_pulse})",
            summary.join(" ")
        ),
    )
}

fn robots_at(points: &[(f64, f64)]) -> Vec<AgentState> {
    points
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| AgentState::robot(i as u32, Vec2::new(x, y)))
        .collect()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

fn feature_formulas() -> Outcome {
    let b10 = BoundaryRegion::square(10.0).unwrap();
    let mut checks: Vec<(&str, bool)> = Vec::new();
    checks.push(("rho mean", close(&regional_density(&robots_at(&[(2.0, 2.0), (4.0, 6.0)]), &b10).unwrap(), &[0.3, 0.4], 1e-12)));
    checks.push(("rho corner", regional_density(&robots_at(&[(10.0, 10.0)]), &b10).unwrap() == [1.0, 1.0]));
    checks.push(("rho origin", regional_density(&robots_at(&[(0.0, 0.0), (0.0, 0.0)]), &b10).unwrap() == [0.0, 0.0]));
    checks.push(("rho empty", regional_density(&[], &b10).is_err()));
    let spread = |p: &[(f64, f64)]| measure_of_spread(&robots_at(p), AgentId(0)).unwrap();
    checks.push(("sigma symmetric", spread(&[(0.0, 0.0), (1.0, 0.0), (-1.0, 0.0)]) == 0.0));
    checks.push(("sigma skew", (spread(&[(0.0, 0.0), (2.0, 0.0), (2.0, 2.0)]) - 1.49071).abs() < 1e-4));
    checks.push(("sigma alone", spread(&[(3.0, 3.0)]) == 0.0));
    let cubic = |p: &[(f64, f64)]| best_fit_cubic(&robots_at(p)).unwrap();
    checks.push(("cubic constant", close(&cubic(&[(0.0, 1.0), (1.0, 1.0), (2.0, 1.0), (3.0, 1.0)]), &[1.0, 0.0, 0.0, 0.0], 1e-9)));
    checks.push(("cubic line", close(&cubic(&[(0.0, 0.0), (1.0, 2.0), (2.0, 4.0), (3.0, 6.0)]), &[0.0, 2.0, 0.0, 0.0], 1e-9)));
    let gen: Vec<(f64, f64)> = (0..5).map(|x| { let x = f64::from(x); (x, 1.0 + x - 0.5 * x * x * x) }).collect();
    checks.push(("cubic generator", close(&cubic(&gen), &[1.0, 1.0, 0.0, -0.5], 1e-6)));
    let single = build_feature_vector(&robots_at(&[(5.0, 5.0)]), &b10).unwrap();
    let single_ok = single.rho == [0.5, 0.5] && single.sigma_mean == 0.0 && single.sigma_std == 0.0
        && (single.alpha[0] + 5.0 * single.alpha[1] + 25.0 * single.alpha[2] + 125.0 * single.alpha[3] - 5.0).abs() < 1e-6;
    checks.push(("vector single robot", single_ok));
    let line = build_feature_vector(&robots_at(&[(1.0, 1.0), (2.0, 1.0), (3.0, 1.0)]), &b10).unwrap();
    let interp = [1.0, 2.0, 3.0].iter().all(|x| {
        let a = line.alpha;
        (a[0] + a[1] * x + a[2] * x * x + a[3] * x * x * x - 1.0).abs() < 1e-6
    });
    checks.push(("vector line", interp && (line.sigma_mean - 2.0 / 3.0).abs() < 1e-12));
    checks.push(("vector empty", build_feature_vector(&[], &b10).is_err()));

    let mut rng = SplitMix64::new(77);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let c: [f64; 4] = std::array::from_fn(|_| rng.range_f64(-2.0, 2.0));
        let n = 4 + rng.below(8) as usize;
        let pts: Vec<Vec2> = (0..n)
            .map(|k| {
                let x = k as f64 * 15.0 / n as f64 + rng.range_f64(0.0, 0.5);
                Vec2::new(x, c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x)
            })
            .collect();
        let got = fit_cubic(&pts).unwrap();
        for (g, w) in got.iter().zip(c) {
            worst = worst.max((g - w).abs());
        }
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    outcome(
        failed.is_empty() && worst < 1e-6,
        format!("{} worked examples, failed {failed:?}; 500 generating cubics, max coef err {worst:.2e} < 1e-6", checks.len()),
    )
}

fn classifier() -> Outcome {
    let data = common::seven_clusters(100, 3);
    let trained = train(&data, &TrainConfig::default()).unwrap();
    let acc = trained.report.training_accuracy;
    let grad = (0..5).map(common::gradient_check).fold(0.0, f64::max);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    save_model(&trained.model, &path).unwrap();
    let back = load_model(&path).unwrap();
    let same = data
        .iter()
        .all(|e| predict_mode(&trained.model, &e.features).unwrap() == predict_mode(&back, &e.features).unwrap());
    outcome(
        acc >= 0.95 && grad < 1e-5 && same,
        format!("accuracy {:.1}% >= 95%, gradient rel err {grad:.2e} < 1e-5, round-trip predictions equal: {same}", acc * 100.0),
    )
}

fn determinism_replay() -> Outcome {
    let scenario = load_scenario(scenario_path("flock_walker_gestures.json")).unwrap();
    let run = || run_scenario(&scenario, &RunOptions::default(), Vec::new()).unwrap().1;
    let a = run();
    let b = run();
    let identical = a == b;
    let text = String::from_utf8(a).unwrap();
    let verified = verify_log(&parse_log(&text).unwrap()).is_ok();

    // Flip single bits inside command records; every flip must be caught.
    let mut rng = SplitMix64::new(5);
    let mut offsets = Vec::new();
    let mut pos = 0;
    for line in text.split_inclusive('\n') {
        if line.contains("\"type\":\"command\"") {
            offsets.push((pos, line.len() - 1));
        }
        pos += line.len();
    }
    let trials = 200;
    let mut caught = 0;
    for _ in 0..trials {
        let (start, len) = offsets[rng.below(offsets.len() as u64) as usize];
        let at = start + rng.below(len as u64) as usize;
        let mut bytes = text.clone().into_bytes();
        bytes[at] ^= 1 << rng.below(8);
        let detected = match std::str::from_utf8(&bytes) {
            Err(_) => true,
            Ok(t) => match parse_log(t) {
                Err(_) => true,
                Ok(log) => verify_log(&log).is_err(),
            },
        };
        caught += usize::from(detected);
    }
    outcome(
        identical && verified && caught == trials,
        format!("byte-identical logs: {identical}, verify: {verified}, single-bit command flips caught {caught}/{trials}"),
    )
}

fn containment() -> Outcome {
    let mut rng = SplitMix64::new(31337);
    let mut ticks = 0u64;
    let mut worst_step: f64 = 0.0;
    let mut escapes = 0u64;
    let mut cap = 0.0;
    while ticks < 10_000 {
        let w = rng.range_f64(2.0, 25.0);
        let l = rng.range_f64(2.0, 25.0);
        let x0 = rng.range_f64(-10.0, 10.0);
        let y0 = rng.range_f64(-10.0, 10.0);
        let b = BoundaryRegion::new(x0, x0 + w, y0, y0 + l).unwrap();
        let mut config = EngineConfig::default().with_boundary(b).with_seed(rng.next_u64());
        for mode in ModeId::ALL {
            *config.mode_table.gains_mut(mode) = WeightGains::from_array(std::array::from_fn(|_| rng.range_f64(0.0, 20.0)));
        }
        config.detection_dropout = if rng.next_f64() < 0.3 { 0.2 } else { 0.0 };
        cap = config.v_max * config.dt();
        let n = 1 + rng.below(10) as usize;
        let robots: Vec<Vec2> = (0..n)
            .map(|_| Vec2::new(rng.range_f64(b.x_min, b.x_max), rng.range_f64(b.y_min, b.y_max)))
            .collect();
        let mut engine = Engine::new(config, &robots).unwrap();
        let mut prev = robots;
        for k in 0..250 {
            if k % 10 == 0 {
                let mode = ModeId::ALL[rng.below(7) as usize];
                engine.apply_command(Command::SetMode { mode }).unwrap();
                let p = Vec2::new(rng.range_f64(b.x_min - 3.0, b.x_max + 3.0), rng.range_f64(b.y_min - 3.0, b.y_max + 3.0));
                engine.apply_command(Command::AddHuman { id: AgentId(50 + rng.below(3) as u32), position: p }).unwrap();
                let g = [None, Some(Gesture::HandsTogether), Some(Gesture::RightHandUp), Some(Gesture::LeftHandUp)];
                engine
                    .apply_command(Command::SetGesture { id: AgentId(50), gesture: g[rng.below(4) as usize] })
                    .ok();
            }
            let snap = engine.step();
            let now: Vec<Vec2> = snap.robots().map(|r| r.position).collect();
            for (a, z) in prev.iter().zip(&now) {
                worst_step = worst_step.max(a.distance(*z));
                if !(z.x > b.x_min && z.x < b.x_max && z.y > b.y_min && z.y < b.y_max) {
                    escapes += 1;
                }
            }
            prev = now;
            ticks += 1;
        }
    }
    outcome(
        escapes == 0 && worst_step <= cap + 1e-9,
        format!("{ticks} fuzz ticks, escapes {escapes}, max step {worst_step:.6} m <= v_max*dt + 1e-9 = {:.6} m", cap + 1e-9),
    )
}

fn throughput() -> Outcome {
    let robots: Vec<Vec2> = (0..10)
        .map(|i| Vec2::new(1.0 + f64::from(i % 5) * 3.0, 3.0 + f64::from(i / 5) * 6.0))
        .collect();
    let mut engine = Engine::new(EngineConfig::default(), &robots).unwrap();
    let warm = 200;
    engine.run_ticks(warm);
    let ticks = 4000u32;
    let start = Instant::now();
    for k in 0..ticks {
        if k % 400 == 0 {
            let mode = ModeId::ALL[(k / 400) as usize % 7];
            engine.apply_command(Command::SetMode { mode }).unwrap();
        }
        engine.step();
        engine.take_records();
    }
    let mean_ms = start.elapsed().as_secs_f64() * 1e3 / f64::from(ticks);
    let factor = 50.0 / mean_ms;
    outcome(
        mean_ms < 2.5,
        format!("10 robots, mean step {mean_ms:.4} ms < 2.5 ms ({factor:.0}x real time)"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("term-oracle", term_oracle),
        ("circling-reproduction", circling),
        ("control-schedule", control_schedule),
        ("separation-behavior", separation),
        ("gesture-pipeline", gesture_pipeline),
        ("feature-formulas", feature_formulas),
        ("classifier-sanity", classifier),
        ("determinism-replay", determinism_replay),
        ("containment-speed-cap", containment),
        ("throughput", throughput),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
