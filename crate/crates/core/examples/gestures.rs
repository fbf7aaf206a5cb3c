// A human makes each gesture in turn; print every response as it starts and ends.

use murmur::behavior::Gesture;
use murmur::engine::{Command, Engine, EngineConfig};
use murmur::flock::{AgentId, ModeId};
use murmur::vec2::Vec2;

pub fn main() {
    // Robots 0 and 1 are close together, so a spin request becomes a green pulse for them.
    let robots = [Vec2::new(4.0, 4.0), Vec2::new(4.8, 4.4), Vec2::new(11.0, 10.0)];
    let mut config = EngineConfig::default();
    // Keep the robots where they are so the spacing stays put.
    *config.mode_table.gains_mut(ModeId::Default) = murmur::flock::WeightGains::ZERO;
    let mut engine = Engine::new(config, &robots).unwrap();
    let id = AgentId(7);
    engine.apply_command(Command::AddHuman { id, position: Vec2::new(7.0, 7.0) }).unwrap();

    let script = [
        (20u64, Some(Gesture::RightHandUp)),
        (60, None),
        (300, Some(Gesture::LeftHandUp)),
        (340, None),
        (420, Some(Gesture::HandsTogether)),
        (460, None),
    ];
    let mut active: Vec<(AgentId, String)> = Vec::new();
    for tick in 1..=520u64 {
        for (at, gesture) in script {
            if at == tick {
                engine.apply_command(Command::SetGesture { id, gesture }).unwrap();
            }
        }
        let snap = engine.step();
        for onset in &snap.gesture_onsets {
            println!("{:>6.2} s  gesture {}", snap.sim_time_s, onset.gesture.name());
        }
        let now: Vec<(AgentId, String)> = snap
            .responses
            .iter()
            .map(|r| (r.robot_id, format!("{:?}", r.kind)))
            .collect();
        for r in &now {
            if !active.contains(r) {
                let light = snap.light(r.0).unwrap();
                println!("{:>6.2} s  robot {} starts {} (light {light:?})", snap.sim_time_s, r.0, r.1);
            }
        }
        for r in &active {
            if !now.contains(r) {
                println!("{:>6.2} s  robot {} done with {}", snap.sim_time_s, r.0, r.1);
            }
        }
        active = now;
    }
}
