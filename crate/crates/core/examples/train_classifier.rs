// Record a choreographed session, train a classifier on it, then let the
// classifier drive the flock.

use murmur::engine::{Command, Condition, Engine, EngineConfig};
use murmur::flock::{AgentId, ModeId};
use murmur::io::{export_training_data, parse_log, Session};
use murmur::learn::{train, TrainConfig};
use murmur::vec2::Vec2;

pub fn main() {
    let robots = [Vec2::new(3.0, 3.0), Vec2::new(6.0, 4.0), Vec2::new(9.0, 9.0), Vec2::new(12.0, 5.0)];
    let engine = Engine::new(EngineConfig::default().with_seed(3), &robots).unwrap();
    let mut session = Session::start(engine, "rehearsal", Vec::new()).unwrap();
    session
        .apply_command(Command::SetCondition { condition: Condition::HumanChoreographer })
        .unwrap();
    session
        .apply_command(Command::AddHuman { id: AgentId(20), position: Vec2::new(7.5, 7.5) })
        .unwrap();
    // The choreographer rotates through the modes, picking one every two seconds.
    let plan = [ModeId::Cohesion, ModeId::Separation, ModeId::Linear, ModeId::Circling, ModeId::Following];
    for k in 0..2400u64 {
        if k % 40 == 0 {
            let mode = plan[(k / 40) as usize % plan.len()];
            session.apply_command(Command::SetMode { mode }).unwrap();
        }
        session.step().unwrap();
    }
    let (_, bytes) = session.finish().unwrap();
    let log = parse_log(std::str::from_utf8(&bytes).unwrap()).unwrap();
    let examples = export_training_data(&log);
    println!("{} labelled examples", examples.len());

    let trained = train(&examples, &TrainConfig::default()).unwrap();
    println!(
        "training accuracy {:.1}%, loss {:.3}",
        trained.report.training_accuracy * 100.0,
        trained.report.final_loss
    );
    for w in &trained.report.warnings {
        println!("warning: {w}");
    }

    let mut engine = Engine::new(EngineConfig::default(), &robots).unwrap().with_model(trained.model);
    engine
        .apply_command(Command::SetCondition { condition: Condition::ModelPrediction })
        .unwrap();
    for _ in 0..4 {
        let snap = engine.run_ticks(600);
        println!("t={:>5.1} s predicted mode {}", snap.sim_time_s, snap.active_mode);
    }
}
