// Start a gateway in-process, claim the choreographer role over a WebSocket,
// switch modes and watch the state stream follow along.

use futures_util::{SinkExt, StreamExt};
use serde_json::json;
use tokio_tungstenite::tungstenite::Message;

use murmur::engine::{Command, Condition, Engine, EngineConfig};
use murmur::vec2::Vec2;
use murmur_gateway::{Frame, FrameKind, Gateway, ServeOptions};

#[tokio::main]
pub async fn main() {
    let robots: Vec<Vec2> = (0..5).map(|i| Vec2::new(3.0 + 2.0 * f64::from(i), 7.5)).collect();
    let engine = Engine::new(EngineConfig::default(), &robots).unwrap();
    let options = ServeOptions {
        script: vec![(1, Command::SetCondition { condition: Condition::HumanChoreographer })],
        ..ServeOptions::default()
    };
    let gateway = Gateway::start(engine, "127.0.0.1:0", options).await.unwrap();
    println!("gateway on ws://{}", gateway.local_addr());

    let (mut ws, _) = tokio_tungstenite::connect_async(format!("ws://{}", gateway.local_addr()))
        .await
        .unwrap();
    ws.send(Message::text(json!({"type": "hello", "role": "choreographer", "protocol": 1}).to_string()))
        .await
        .unwrap();

    let modes = ["cohesion", "linear", "circling"];
    let mut sent = 0;
    let mut states = 0;
    while let Some(Ok(msg)) = ws.next().await {
        let Message::Text(text) = msg else { continue };
        let frame: Frame = serde_json::from_str(text.as_str()).unwrap();
        match frame.kind {
            FrameKind::Hello => println!("hello as {}", frame.payload["role"]),
            FrameKind::Ack => println!("ack, effective at tick {}", frame.payload["effective_tick"]),
            FrameKind::Error => println!("error: {}", frame.payload["reason"]),
            FrameKind::State => {
                states += 1;
                let s = &frame.payload["snapshot"];
                if states % 5 == 0 {
                    println!("tick {:>4} mode {}", s["tick"], s["active_mode"]);
                }
                if states % 15 == 0 {
                    if sent == modes.len() {
                        break;
                    }
                    let command = json!({"type": "set_mode", "mode": modes[sent]});
                    ws.send(Message::text(
                        json!({"type": "command", "request_id": sent, "command": command}).to_string(),
                    ))
                    .await
                    .unwrap();
                    sent += 1;
                }
            }
        }
    }
    ws.close(None).await.ok();
    let engine = gateway.shutdown().await.unwrap();
    println!("stopped at tick {}", engine.tick());
}
