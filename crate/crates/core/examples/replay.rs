// Write a session log, replay it and show that tampering is caught.

use murmur::engine::{verify_log, Command, Engine, EngineConfig};
use murmur::flock::{AgentId, ModeId};
use murmur::io::{parse_log, Session};
use murmur::vec2::Vec2;

pub fn main() {
    let dir = std::env::temp_dir().join(format!("murmur-replay-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("session.jsonl");

    let engine = Engine::new(EngineConfig::default(), &[Vec2::new(2.0, 2.0), Vec2::new(9.0, 4.0)]).unwrap();
    let file = std::fs::File::create(&path).unwrap();
    let mut session = Session::start(engine, "demo", file).unwrap();
    session.apply_command(Command::AddHuman { id: AgentId(5), position: Vec2::new(7.0, 7.0) }).unwrap();
    for k in 0..300 {
        if k == 100 {
            session.apply_command(Command::SetMode { mode: ModeId::Following }).unwrap();
        }
        session.step().unwrap();
    }
    session.finish().unwrap();

    let text = std::fs::read_to_string(&path).unwrap();
    println!("{} lines in {}", text.lines().count(), path.display());
    let report = verify_log(&parse_log(&text).unwrap()).unwrap();
    println!("replay matches: {} ({} snapshots checked)", report.matches(), report.snapshots_checked);

    let tampered = text.replacen("\"mode\":\"following\"", "\"mode\":\"linear\"", 1);
    match parse_log(&tampered) {
        Ok(_) => println!("tampering went unnoticed"),
        Err(e) => println!("tampered log rejected: {e}"),
    }
    std::fs::remove_dir_all(&dir).ok();
}
