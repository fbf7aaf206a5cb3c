//! Wire protocol: JSON text frames over WebSocket.
//!
//! Server to client, every message is a [`Frame`]:
//!
//! ```json
//! {"kind": "state", "seq": 12, "payload": {"snapshot": {...}, "gap": 0}}
//! ```
//!
//! | `kind`  | payload                                                   |
//! |---------|-----------------------------------------------------------|
//! | `hello` | `protocol`, `role`, `config` (the engine config)          |
//! | `state` | `snapshot`, `gap` (state frames dropped since the last one) |
//! | `ack`   | `request_id`, `effective_tick`                            |
//! | `error` | `request_id` (when known), `reason`                       |
//!
//! `seq` starts at 1 and increases by one per frame on each connection.
//!
//! Client to server:
//!
//! ```json
//! {"type": "hello", "role": "choreographer", "protocol": 1}
//! {"type": "command", "request_id": 7, "command": {"type": "set_mode", "mode": "following"}}
//! ```
//!
//! Connections start as observers. Sending commands needs the choreographer
//! role, which one connection at a time may hold.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use murmur::engine::{Command, EngineConfig, FlockSnapshot};

pub const PROTOCOL_VERSION: u32 = 1;
/// Client frames larger than this are refused unparsed.
pub const MAX_CLIENT_FRAME: usize = 64 * 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameKind {
    Hello,
    State,
    Ack,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub kind: FrameKind,
    pub seq: u64,
    pub payload: Value,
}

impl Frame {
    pub fn to_text(&self) -> String {
        serde_json::to_string(self).expect("frames serialize")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Observer,
    Choreographer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClientMessage {
    Hello { role: Role, protocol: u32 },
    Command { request_id: u64, command: Command },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("frame of {0} bytes exceeds the {MAX_CLIENT_FRAME} byte limit")]
    TooLarge(usize),
    #[error("frame is not UTF-8 text")]
    NotText,
    #[error("malformed frame: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{error}")]
pub struct Rejected {
    /// Request id, when the frame carried a readable one.
    pub request_id: Option<u64>,
    pub error: DecodeError,
}

/// Decode one client frame. Never panics.
pub fn decode_client(bytes: &[u8]) -> Result<ClientMessage, Rejected> {
    let fail = |request_id, error| Rejected { request_id, error };
    if bytes.len() > MAX_CLIENT_FRAME {
        return Err(fail(None, DecodeError::TooLarge(bytes.len())));
    }
    let text = std::str::from_utf8(bytes).map_err(|_| fail(None, DecodeError::NotText))?;
    let value: Value = serde_json::from_str(text)
        .map_err(|e| fail(None, DecodeError::Malformed(e.to_string())))?;
    let request_id = value.get("request_id").and_then(Value::as_u64);
    serde_json::from_value(value).map_err(|e| fail(request_id, DecodeError::Malformed(e.to_string())))
}

/// Server-side frame payloads.
pub fn hello_payload(role: Role, config: &EngineConfig) -> Value {
    json!({ "protocol": PROTOCOL_VERSION, "role": role, "config": config })
}

pub fn state_payload(snapshot: &FlockSnapshot, gap: u64) -> Value {
    json!({ "snapshot": snapshot, "gap": gap })
}

pub fn ack_payload(request_id: u64, effective_tick: u64) -> Value {
    json!({ "request_id": request_id, "effective_tick": effective_tick })
}

pub fn error_payload(request_id: Option<u64>, reason: &str) -> Value {
    json!({ "request_id": request_id, "reason": reason })
}

/// Numbers outgoing frames for one connection.
#[derive(Debug, Default)]
pub struct Sequencer {
    last: u64,
}

impl Sequencer {
    pub fn frame(&mut self, kind: FrameKind, payload: Value) -> Frame {
        self.last += 1;
        Frame {
            kind,
            seq: self.last,
            payload,
        }
    }
}
