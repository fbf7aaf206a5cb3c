//! Live gateway. The engine runs on its own thread at the configured tick
//! rate; connections talk to it only through a command queue and a snapshot
//! broadcast, so a slow client can never stall a tick.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{mpsc, Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use futures_util::{SinkExt, StreamExt};
use serde_json::Value;
use thiserror::Error;
use tokio::net::{TcpListener, TcpStream};
use tokio::sync::{broadcast, oneshot};
use tokio_tungstenite::tungstenite::Message;

use murmur::engine::{Ack, Command, CommandError, Engine, EngineConfig, FlockSnapshot};
use murmur::io::{LogError, Session};

use crate::protocol::{
    ack_payload, decode_client, error_payload, hello_payload, state_payload, ClientMessage,
    FrameKind, Role, Sequencer, PROTOCOL_VERSION,
};

/// Snapshots buffered per connection before the oldest are dropped.
const STATE_BUFFER: usize = 16;

#[derive(Debug, Clone)]
pub struct ServeOptions {
    pub state_rate_hz: f64,
    /// Pace ticks to wall-clock time; otherwise run as fast as possible.
    pub realtime: bool,
    pub log_path: Option<PathBuf>,
    pub session_id: String,
    /// Commands applied at fixed ticks, e.g. a scenario timeline.
    pub script: Vec<(u64, Command)>,
    /// Stop the engine after this many ticks.
    pub max_ticks: Option<u64>,
}

impl Default for ServeOptions {
    fn default() -> Self {
        Self {
            state_rate_hz: 10.0,
            realtime: true,
            log_path: None,
            session_id: "live".into(),
            script: Vec::new(),
            max_ticks: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum GatewayError {
    #[error("gateway i/o: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("state rate must be positive, got {0}")]
    StateRate(f64),
    #[error("engine thread panicked")]
    EnginePanicked,
    #[error("scripted command at tick {tick} rejected: {source}")]
    Script { tick: u64, source: CommandError },
}

type Reply = oneshot::Sender<Result<Ack, CommandError>>;

struct Shared {
    commands: Mutex<mpsc::Sender<(Command, Reply)>>,
    snapshots: broadcast::Sender<Arc<FlockSnapshot>>,
    config: EngineConfig,
    choreographer: Mutex<Option<u64>>,
    next_conn: AtomicU64,
}

impl Shared {
    fn claim(&self, conn: u64) -> bool {
        let mut holder = self.choreographer.lock().unwrap();
        match *holder {
            Some(c) if c != conn => false,
            _ => {
                *holder = Some(conn);
                true
            }
        }
    }

    fn release(&self, conn: u64) {
        let mut holder = self.choreographer.lock().unwrap();
        if *holder == Some(conn) {
            *holder = None;
        }
    }
}

pub struct Gateway {
    local_addr: SocketAddr,
    shared: Arc<Shared>,
    stop: Arc<AtomicBool>,
    engine: Option<thread::JoinHandle<Result<Engine, GatewayError>>>,
    accept: tokio::task::JoinHandle<()>,
}

impl Gateway {
    /// Bind `addr` and start the engine loop. Must be called inside a tokio runtime.
    pub async fn start(engine: Engine, addr: &str, options: ServeOptions) -> Result<Self, GatewayError> {
        if !(options.state_rate_hz.is_finite() && options.state_rate_hz > 0.0) {
            return Err(GatewayError::StateRate(options.state_rate_hz));
        }
        let listener = TcpListener::bind(addr).await?;
        let local_addr = listener.local_addr()?;
        let (cmd_tx, cmd_rx) = mpsc::channel();
        let (snap_tx, _) = broadcast::channel(STATE_BUFFER);
        let shared = Arc::new(Shared {
            commands: Mutex::new(cmd_tx),
            snapshots: snap_tx.clone(),
            config: engine.config().clone(),
            choreographer: Mutex::new(None),
            next_conn: AtomicU64::new(1),
        });
        let stop = Arc::new(AtomicBool::new(false));
        let sink: Box<dyn Write + Send> = match &options.log_path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(io::sink()),
        };
        let session = Session::start(engine, &options.session_id, sink)?;
        let engine_stop = stop.clone();
        let handle = thread::Builder::new()
            .name("murmur-engine".into())
            .spawn(move || engine_loop(session, cmd_rx, snap_tx, engine_stop, options))?;

        let accept_shared = shared.clone();
        let accept = tokio::spawn(async move {
            loop {
                match listener.accept().await {
                    Ok((stream, peer)) => {
                        let s = accept_shared.clone();
                        tokio::spawn(async move {
                            if let Err(e) = connection(stream, s).await {
                                log::debug!("connection {peer}: {e}");
                            }
                        });
                    }
                    Err(e) => log::warn!("accept failed: {e}"),
                }
            }
        });
        log::info!("gateway listening on ws://{local_addr}");
        Ok(Self {
            local_addr,
            shared,
            stop,
            engine: Some(handle),
            accept,
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    /// In-process snapshot feed, same decimation as the state frames.
    pub fn subscribe(&self) -> broadcast::Receiver<Arc<FlockSnapshot>> {
        self.shared.snapshots.subscribe()
    }

    /// Whether the engine loop has stopped on its own (tick limit reached).
    pub fn is_finished(&self) -> bool {
        self.engine.as_ref().is_none_or(|h| h.is_finished())
    }

    /// Stop the engine, close the log and hand the engine back.
    pub async fn shutdown(mut self) -> Result<Engine, GatewayError> {
        self.stop.store(true, Ordering::SeqCst);
        self.accept.abort();
        let handle = self.engine.take().expect("engine joined once");
        tokio::task::spawn_blocking(move || handle.join())
            .await
            .map_err(|_| GatewayError::EnginePanicked)?
            .map_err(|_| GatewayError::EnginePanicked)?
    }
}

fn engine_loop(
    mut session: Session<Box<dyn Write + Send>>,
    commands: mpsc::Receiver<(Command, Reply)>,
    snapshots: broadcast::Sender<Arc<FlockSnapshot>>,
    stop: Arc<AtomicBool>,
    options: ServeOptions,
) -> Result<Engine, GatewayError> {
    let config = session.engine().config().clone();
    let tick = Duration::from_secs_f64(config.dt());
    let every = ((f64::from(config.tick_hz) / options.state_rate_hz).round() as u64).max(1);
    let mut script = options.script.into_iter().peekable();
    let mut deadline = Instant::now();
    let _ = snapshots.send(Arc::new(session.engine().snapshot().clone()));
    while !stop.load(Ordering::SeqCst) {
        let next = session.engine().tick() + 1;
        while let Some((_, cmd)) = script.next_if(|(t, _)| *t <= next) {
            session
                .apply_command(cmd)
                .map_err(|source| GatewayError::Script { tick: next, source })?;
        }
        while let Ok((cmd, reply)) = commands.try_recv() {
            let _ = reply.send(session.apply_command(cmd));
        }
        let snap = session.step()?;
        if snap.tick % every == 0 {
            // No receivers is fine; lagging receivers lose the oldest frames.
            let _ = snapshots.send(Arc::new(snap.clone()));
        }
        if options.max_ticks.is_some_and(|m| snap.tick >= m) {
            break;
        }
        if options.realtime {
            deadline += tick;
            let now = Instant::now();
            if deadline > now {
                thread::sleep(deadline - now);
            } else if now - deadline > tick * 20 {
                // Far behind (suspended process): resynchronize instead of bursting.
                deadline = now;
            }
        }
    }
    let (engine, mut sink) = session.finish()?;
    sink.flush()?;
    Ok(engine)
}

async fn connection(stream: TcpStream, shared: Arc<Shared>) -> Result<(), tokio_tungstenite::tungstenite::Error> {
    let ws = tokio_tungstenite::accept_async(stream).await?;
    let (mut sink, mut source) = ws.split();
    let conn = shared.next_conn.fetch_add(1, Ordering::Relaxed);
    let mut seq = Sequencer::default();
    let mut role = Role::Observer;
    let mut states = shared.snapshots.subscribe();
    let mut gap = 0u64;

    macro_rules! send {
        ($kind:expr, $payload:expr) => {{
            let frame = seq.frame($kind, $payload);
            sink.send(Message::text(frame.to_text())).await
        }};
    }

    send!(FrameKind::Hello, hello_payload(role, &shared.config))?;
    let result = loop {
        tokio::select! {
            incoming = source.next() => {
                let bytes: Vec<u8> = match incoming {
                    None | Some(Ok(Message::Close(_))) => break Ok(()),
                    Some(Err(e)) => break Err(e),
                    Some(Ok(Message::Text(t))) => t.as_bytes().to_vec(),
                    Some(Ok(Message::Binary(b))) => b.to_vec(),
                    Some(Ok(_)) => continue,
                };
                let (kind, payload) = handle_client(&bytes, conn, &mut role, &shared).await;
                if let Err(e) = send!(kind, payload) {
                    break Err(e);
                }
            }
            state = states.recv() => match state {
                Ok(snap) => {
                    if let Err(e) = send!(FrameKind::State, state_payload(&snap, gap)) {
                        break Err(e);
                    }
                    gap = 0;
                }
                Err(broadcast::error::RecvError::Lagged(n)) => gap += n,
                Err(broadcast::error::RecvError::Closed) => break Ok(()),
            },
        }
    };
    shared.release(conn);
    result
}

async fn handle_client(bytes: &[u8], conn: u64, role: &mut Role, shared: &Shared) -> (FrameKind, Value) {
    let message = match decode_client(bytes) {
        Ok(m) => m,
        Err(r) => return (FrameKind::Error, error_payload(r.request_id, &r.error.to_string())),
    };
    match message {
        ClientMessage::Hello { protocol, .. } if protocol != PROTOCOL_VERSION => (
            FrameKind::Error,
            error_payload(
                None,
                &format!("unsupported protocol version {protocol} (server speaks {PROTOCOL_VERSION})"),
            ),
        ),
        ClientMessage::Hello { role: Role::Choreographer, .. } => {
            if shared.claim(conn) {
                *role = Role::Choreographer;
                (FrameKind::Hello, hello_payload(*role, &shared.config))
            } else {
                (FrameKind::Error, error_payload(None, "role taken"))
            }
        }
        ClientMessage::Hello { role: Role::Observer, .. } => {
            shared.release(conn);
            *role = Role::Observer;
            (FrameKind::Hello, hello_payload(*role, &shared.config))
        }
        ClientMessage::Command { request_id, .. } if *role != Role::Choreographer => {
            (FrameKind::Error, error_payload(Some(request_id), "role required"))
        }
        ClientMessage::Command { request_id, command } => {
            let (tx, rx) = oneshot::channel();
            let queued = shared.commands.lock().unwrap().send((command, tx)).is_ok();
            let reply = if queued { rx.await.ok() } else { None };
            match reply {
                Some(Ok(ack)) => (FrameKind::Ack, ack_payload(request_id, ack.effective_tick)),
                Some(Err(e)) => (FrameKind::Error, error_payload(Some(request_id), &e.to_string())),
                None => (FrameKind::Error, error_payload(Some(request_id), "engine stopped")),
            }
        }
    }
}
