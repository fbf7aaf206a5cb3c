// Run one flock through every weight mode and print a motion signature per mode.

use murmur::engine::{Command, Condition, Engine, EngineConfig};
use murmur::flock::{AgentId, ModeId};
use murmur::vec2::Vec2;

pub fn main() {
    let robots: Vec<Vec2> = (0..6)
        .map(|i| Vec2::new(2.0 + 2.0 * f64::from(i), 4.0 + f64::from(i % 3) * 3.0))
        .collect();
    println!("{:<12} {:>10} {:>10} {:>12}", "mode", "speed m/s", "spread m", "min gap m");
    for mode in ModeId::ALL {
        let mut engine = Engine::new(EngineConfig::default(), &robots).unwrap();
        engine
            .apply_command(Command::SetCondition { condition: Condition::Fixed { mode } })
            .unwrap();
        // Someone to follow.
        engine
            .apply_command(Command::AddHuman { id: AgentId(100), position: Vec2::new(12.0, 12.0) })
            .unwrap();
        let snap = engine.run_ticks(400);
        let pos: Vec<Vec2> = snap.robots().map(|r| r.position).collect();
        let speed = snap.robots().map(|r| r.velocity.norm()).sum::<f64>() / pos.len() as f64;
        let c = pos.iter().fold(Vec2::ZERO, |a, p| a + *p) / pos.len() as f64;
        let spread = pos.iter().map(|p| p.distance(c)).sum::<f64>() / pos.len() as f64;
        let mut gap = f64::INFINITY;
        for (i, p) in pos.iter().enumerate() {
            for q in &pos[i + 1..] {
                gap = gap.min(p.distance(*q));
            }
        }
        println!("{:<12} {speed:>10.3} {spread:>10.3} {gap:>12.3}", mode.name());
    }
}
