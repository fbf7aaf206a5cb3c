// A lone robot on the circling path, sampled every 10 s.

use std::path::PathBuf;

use murmur::engine::Engine;
use murmur::io::load_scenario;

pub fn main() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios/solo_circling.json");
    let scenario = load_scenario(path).unwrap();
    let config = scenario.engine_config().unwrap();
    let mut engine = Engine::new(config.clone(), &scenario.robots).unwrap();
    for (_, cmd) in scenario.events().unwrap() {
        engine.apply_command(cmd).unwrap();
    }
    let center = config.boundary.center();
    println!("target radius {:.2} m", config.boundary.circling_radius());
    for _ in 0..20 {
        let snap = engine.run_ticks(config.ticks_for(10.0));
        let p = snap.robots().next().unwrap().position;
        println!(
            "t={:>5.1} s  pos=({:>5.2}, {:>5.2})  r={:.3}",
            snap.sim_time_s,
            p.x,
            p.y,
            p.distance(center)
        );
    }
}
