//! Live WebSocket gateway and command-line front end for the murmur engine.

pub mod cli;
pub mod protocol;
pub mod server;

pub use protocol::{ClientMessage, Frame, FrameKind, Role, PROTOCOL_VERSION};
pub use server::{Gateway, GatewayError, ServeOptions};
