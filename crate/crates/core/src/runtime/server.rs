//! Telemetry service. Three threads hand off by channel: a paced sample
//! producer, the decode loop (sole owner of decoder, hand and session),
//! and client I/O. A client speaks newline-delimited JSON over plain TCP
//! or over WebSocket; other HTTP GETs are answered from the UI directory.

use std::io::{BufRead, BufReader, ErrorKind, Read, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream};
use std::path::{Component, Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use crossbeam_channel::{bounded, select, unbounded, Receiver, Sender, TryRecvError};
use log::{debug, info, warn};
use serde::{Deserialize, Serialize};
use tungstenite::Message;

use crate::models::ModelCheckpoint;
use crate::synth::{ArtifactFlags, Finger, SignalGenerator};
use crate::{LabelVector, SAMPLE_RATE, WINDOW_HOP, WINDOW_LEN};

use super::decoder::StreamDecoder;
use super::kinematics::{force_map, kinematics_step, Gains, HandState};
use super::protocol::{parse_client, ClientMessage, ServerMessage, SessionAction};
use super::session::{SessionConfig, SessionMode, SessionRecorder, TrackingSession};
use super::source::{FrameSource, SineScript, SourceFrame, SynthSource};
use super::RuntimeError;

const HOP: Duration = Duration::from_millis(50);
const TICK_DT: f64 = WINDOW_HOP as f64 / SAMPLE_RATE;
/// A tick finishing more than one hop after its last sample was due is a
/// missed deadline.
const DEADLINE: Duration = HOP;
const OUTBOX: usize = 1024;
const PEEK_TIMEOUT: Duration = Duration::from_millis(250);
const WS_POLL: Duration = Duration::from_millis(5);

#[derive(Debug, Clone)]
pub struct ServeConfig {
    pub bind: String,
    pub ckpt: ModelCheckpoint,
    pub generator: SignalGenerator,
    pub seed: u64,
    pub gains: Gains,
    pub ui_dir: Option<PathBuf>,
    /// Pace the producer at 1 kHz; off, it runs as fast as the loop reads.
    pub realtime: bool,
    /// Stop after this much stream time.
    pub duration_s: Option<f64>,
    /// Scripted sine session started at sample 0 without a client.
    pub script: Option<SessionConfig>,
}

impl ServeConfig {
    pub fn new(bind: impl Into<String>, ckpt: ModelCheckpoint) -> Self {
        Self {
            bind: bind.into(),
            ckpt,
            generator: SignalGenerator::default(),
            seed: 42,
            gains: Gains::default(),
            ui_dir: None,
            realtime: true,
            duration_s: None,
            script: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ServeStats {
    pub ticks: u64,
    pub skipped: u64,
    pub faults: u64,
    pub missed_deadlines: u64,
    pub tick_ms_p50: f64,
    pub tick_ms_p99: f64,
    pub tick_ms_max: f64,
    pub max_lateness_ms: f64,
    pub sessions: Vec<TrackingSession>,
}

pub struct ServeHandle {
    local_addr: SocketAddr,
    stop: Arc<AtomicBool>,
    events: Sender<Event>,
    decode: JoinHandle<Result<ServeStats, RuntimeError>>,
    accept: JoinHandle<()>,
}

impl ServeHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.local_addr
    }

    pub fn stop(&self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = self.events.send(Event::Stop);
    }

    /// Waits for the decode loop to end (duration reached or `stop`).
    pub fn join(self) -> Result<ServeStats, RuntimeError> {
        let stats = self.decode.join().expect("decode loop panicked");
        self.stop.store(true, Ordering::SeqCst);
        let _ = self.accept.join();
        stats
    }
}

/// Runs the service until its duration elapses (forever without one).
pub fn serve(config: ServeConfig) -> Result<ServeStats, RuntimeError> {
    spawn_serve(config)?.join()
}

pub fn spawn_serve(config: ServeConfig) -> Result<ServeHandle, RuntimeError> {
    config.ckpt.validate()?;
    if let Some(s) = &config.script {
        s.validate()?;
    }
    let listener = TcpListener::bind(&config.bind)?;
    listener.set_nonblocking(true)?;
    let local_addr = listener.local_addr()?;
    info!("listening on {local_addr}");

    let stop = Arc::new(AtomicBool::new(false));
    let (block_tx, block_rx) = bounded::<Block>(4);
    let (cmd_tx, cmd_rx) = unbounded::<SourceCommand>();
    let (event_tx, event_rx) = unbounded::<Event>();

    let source = SynthSource::new(&config.generator, config.seed, ArtifactFlags::none());
    let realtime = config.realtime;
    let epoch = Instant::now();
    thread::Builder::new()
        .name("producer".into())
        .spawn(move || produce(source, realtime, epoch, block_tx, cmd_rx))?;

    let loop_state = DecodeLoop::new(&config, cmd_tx, epoch);
    let decode = thread::Builder::new()
        .name("decode".into())
        .spawn(move || loop_state.run(block_rx, event_rx))?;

    let io = IoContext {
        events: event_tx.clone(),
        ui_dir: config.ui_dir.clone(),
    };
    let accept_stop = stop.clone();
    let accept = thread::Builder::new()
        .name("accept".into())
        .spawn(move || accept_loop(listener, io, accept_stop))?;

    Ok(ServeHandle {
        local_addr,
        stop,
        events: event_tx,
        decode,
        accept,
    })
}

// ---- producer ----

struct Block {
    frames: Vec<SourceFrame>,
    /// When the block's last sample is due.
    due: Instant,
}

enum SourceCommand {
    Labels(LabelVector),
    Script(SineScript),
    StopScript,
}

fn produce(mut source: SynthSource, realtime: bool, epoch: Instant, out: Sender<Block>, commands: Receiver<SourceCommand>) {
    let mut k: u32 = 0;
    loop {
        k += 1;
        let due = epoch + HOP * k;
        if realtime {
            let now = Instant::now();
            if due > now {
                thread::sleep(due - now);
            }
        }
        loop {
            match commands.try_recv() {
                Ok(SourceCommand::Labels(l)) => source.set_labels(l),
                Ok(SourceCommand::Script(s)) => source.start_script(s),
                Ok(SourceCommand::StopScript) => source.stop_script(),
                Err(TryRecvError::Empty) => break,
                Err(TryRecvError::Disconnected) => return,
            }
        }
        let frames: Vec<SourceFrame> = (0..WINDOW_HOP).filter_map(|_| source.next_frame()).collect();
        if out.send(Block { frames, due }).is_err() {
            return;
        }
    }
}

// ---- decode loop ----

enum Event {
    Connected { gen: u64, tx: Sender<ServerMessage> },
    Disconnected { gen: u64 },
    Control { gen: u64, msg: ClientMessage },
    Model { gen: u64, result: Result<Box<ModelCheckpoint>, String> },
    Stop,
}

struct ActiveSession {
    recorder: SessionRecorder,
    samples: u64,
    scripted: bool,
    /// Owned by a client, so it pauses while none is connected.
    interactive: bool,
}

struct DecodeLoop {
    decoder: StreamDecoder,
    hand: HandState,
    commands: Sender<SourceCommand>,
    client: Option<(u64, Sender<ServerMessage>)>,
    pending: Vec<Event>,
    session: Option<ActiveSession>,
    script: Option<SessionConfig>,
    limit: Option<u64>,
    realtime: bool,
    seq: u64,
    stats: ServeStats,
    tick_us: Vec<u64>,
    epoch: Instant,
}

impl DecodeLoop {
    fn new(config: &ServeConfig, commands: Sender<SourceCommand>, epoch: Instant) -> Self {
        Self {
            decoder: StreamDecoder::new(config.ckpt.clone()),
            hand: HandState::new(config.gains),
            commands,
            client: None,
            pending: Vec::new(),
            session: None,
            script: config.script,
            limit: config.duration_s.map(|d| (d * SAMPLE_RATE).round() as u64),
            realtime: config.realtime,
            seq: 0,
            stats: ServeStats::default(),
            tick_us: Vec::new(),
            epoch,
        }
    }

    fn run(mut self, blocks: Receiver<Block>, events: Receiver<Event>) -> Result<ServeStats, RuntimeError> {
        if let Some(cfg) = self.script {
            self.start_session(SessionMode::Sine, &cfg, true, false);
        }
        // Without pacing there is no arrival deadline to miss.
        let underrun_after = if self.realtime { HOP * 2 } else { Duration::from_secs(3600) };
        let mut last_block = Instant::now();
        loop {
            if self.limit.is_some_and(|l| self.decoder.samples() >= l) {
                break;
            }
            select! {
                recv(blocks) -> b => match b {
                    Ok(block) => {
                        last_block = Instant::now();
                        self.on_block(block)?;
                    }
                    Err(_) => break,
                },
                recv(events) -> e => match e {
                    Ok(Event::Stop) | Err(_) => break,
                    Ok(ev) => self.on_event(ev),
                },
                default(underrun_after.saturating_sub(last_block.elapsed())) => {
                    last_block = Instant::now();
                    self.skip("underrun")?;
                }
            }
        }
        if let Some(s) = self.session.take() {
            self.end_session(s, "service stopped");
        }
        Ok(self.finish_stats())
    }

    fn on_event(&mut self, ev: Event) {
        match ev {
            Event::Connected { gen, tx } => {
                if let Some((old, _)) = self.client.take() {
                    info!("client {gen} takes over from client {old}");
                }
                let hello = ServerMessage::Hello {
                    seq: self.seq,
                    model: self.decoder.checkpoint().kind,
                    gains: self.hand.gains,
                };
                let _ = tx.try_send(hello);
                self.client = Some((gen, tx));
            }
            Event::Disconnected { gen } => {
                if self.client.as_ref().is_some_and(|(g, _)| *g == gen) {
                    info!("client {gen} disconnected");
                    self.client = None;
                }
            }
            other => self.pending.push(other),
        }
    }

    fn is_current(&self, gen: u64) -> bool {
        self.client.as_ref().is_some_and(|(g, _)| *g == gen)
    }

    fn send(&self, msg: ServerMessage) {
        if let Some((_, tx)) = &self.client {
            if tx.try_send(msg).is_err() {
                debug!("client outbox full, dropping message");
            }
        }
    }

    fn ack(&self, of: &str) {
        self.send(ServerMessage::Ack { of: of.into(), seq: self.seq });
    }

    fn error(&self, of: &str, message: String) {
        self.send(ServerMessage::Error { of: Some(of.into()), message });
    }

    fn apply_pending(&mut self) {
        for ev in std::mem::take(&mut self.pending) {
            match ev {
                Event::Control { gen, msg } if self.is_current(gen) => self.apply_control(msg),
                Event::Model { gen, result } if self.is_current(gen) => match result {
                    Ok(ckpt) => {
                        info!("model switched to {}", ckpt.kind);
                        self.decoder.set_model(*ckpt);
                        self.ack("load_model");
                    }
                    Err(e) => self.error("load_model", e),
                },
                _ => {}
            }
        }
    }

    fn apply_control(&mut self, msg: ClientMessage) {
        let of = msg.kind();
        match msg {
            ClientMessage::SetActivation { values } => {
                let _ = self.commands.send(SourceCommand::Labels(values));
                self.ack(of);
            }
            ClientMessage::SetGains { k_alpha, k_f } => {
                let g = self.hand.gains;
                match Gains::new(k_alpha.unwrap_or(g.k_alpha), k_f.unwrap_or(g.k_f)) {
                    Ok(g) => {
                        self.hand.gains = g;
                        self.ack(of);
                    }
                    Err(e) => self.error(of, e.to_string()),
                }
            }
            ClientMessage::Session { action: SessionAction::Stop, .. } => match self.session.take() {
                Some(s) => {
                    self.ack(of);
                    self.end_session(s, "stopped");
                }
                None => self.error(of, "no session running".into()),
            },
            ClientMessage::Session { action: SessionAction::Start, mode, freq, finger, duration, scripted, scope } => {
                if self.session.is_some() {
                    return self.error(of, "a session is already running".into());
                }
                let finger = match finger.map(|f| f.resolve()).transpose() {
                    Ok(f) => f.unwrap_or(Finger::Index),
                    Err(e) => return self.error(of, e),
                };
                let defaults = SessionConfig::default();
                let cfg = SessionConfig {
                    freq_hz: freq.unwrap_or(defaults.freq_hz),
                    duration_s: duration.unwrap_or(defaults.duration_s),
                    finger,
                    scope: scope.unwrap_or_default(),
                };
                if let Err(e) = cfg.validate() {
                    return self.error(of, e.to_string());
                }
                self.ack(of);
                self.start_session(mode, &cfg, scripted.unwrap_or(false), true);
            }
            ClientMessage::LoadModel { .. } => {
                // files are read on the I/O side and arrive as Event::Model
                self.error(of, "unexpected load_model".into());
            }
        }
    }

    fn start_session(&mut self, mode: SessionMode, cfg: &SessionConfig, scripted: bool, interactive: bool) {
        let start = self.decoder.samples();
        info!("session start: {mode:?} {} Hz on {} at sample {start}", cfg.freq_hz, cfg.finger);
        if scripted && mode == SessionMode::Sine {
            let _ = self.commands.send(SourceCommand::Script(SineScript {
                freq_hz: cfg.freq_hz,
                finger: cfg.finger,
                scope: cfg.scope,
                start,
            }));
        }
        self.session = Some(ActiveSession {
            recorder: SessionRecorder::new(mode, cfg.freq_hz, cfg.finger, start),
            samples: cfg.samples(),
            scripted,
            interactive,
        });
    }

    fn end_session(&mut self, s: ActiveSession, reason: &str) {
        if s.scripted {
            let _ = self.commands.send(SourceCommand::StopScript);
        }
        let partial = s.recorder.session().clone();
        let (session, reason) = match s.recorder.finish() {
            Ok(done) => (done, reason.to_string()),
            Err(e) => (partial, format!("{reason}; {e}")),
        };
        info!("session end: {reason}");
        self.send(ServerMessage::SessionEnd {
            reason,
            freq: session.freq_hz,
            finger: session.finger,
            metrics: session.metrics.clone(),
            t: session.times.clone(),
            target: session.target.clone(),
            decoded: session.decoded.clone(),
        });
        self.stats.sessions.push(session);
    }

    fn paused(&self) -> bool {
        self.session.as_ref().is_some_and(|s| s.interactive) && self.client.is_none()
    }

    fn skip(&mut self, reason: &str) -> Result<(), RuntimeError> {
        self.send(ServerMessage::Skip { seq: self.seq, reason: reason.into() });
        self.seq += 1;
        self.stats.skipped += 1;
        let paused = self.paused();
        if let Some(s) = self.session.as_mut().filter(|_| !paused) {
            if let Err(e) = s.recorder.skip() {
                let s = self.session.take().expect("session present");
                self.end_session(s, &format!("aborted: {e}"));
            }
        }
        Ok(())
    }

    fn on_block(&mut self, block: Block) -> Result<(), RuntimeError> {
        let started = Instant::now();
        let mut tick = None;
        for frame in &block.frames {
            if let Some(t) = self.decoder.push_frame(&frame.samples)? {
                tick = Some(t);
            }
        }
        let n = self.decoder.samples() as usize;
        let boundary = n >= WINDOW_LEN && (n - WINDOW_LEN) % WINDOW_HOP == 0;
        if block.frames.len() < WINDOW_HOP {
            self.skip("underrun")?;
        } else if let Some(tick) = tick {
            let hand = kinematics_step(&self.hand, &tick.labels, TICK_DT);
            self.hand = hand;
            let paused = self.paused();
            let mut target = None;
            let mut done = false;
            if let Some(s) = self.session.as_mut().filter(|_| !paused) {
                target = s.recorder.record(&tick);
                done = self.decoder.samples() - s.recorder.start_sample() >= s.samples;
            }
            self.send(ServerMessage::Tick {
                seq: self.seq,
                t: tick.t,
                labels: tick.labels,
                forces: force_map(&tick.labels, self.hand.gains.k_f),
                angles: self.hand.angles(),
                target,
            });
            self.seq += 1;
            self.stats.ticks += 1;
            if done {
                let s = self.session.take().expect("session present");
                self.end_session(s, "completed");
            }
        } else if boundary {
            self.stats.faults += 1;
            self.skip("model fault")?;
        }
        // controls land between ticks
        self.apply_pending();
        let finished = Instant::now();
        if boundary {
            self.tick_us.push((finished - started).as_micros() as u64);
            if self.realtime {
                let late = finished.saturating_duration_since(block.due);
                self.stats.max_lateness_ms = self.stats.max_lateness_ms.max(late.as_secs_f64() * 1e3);
                if late > DEADLINE {
                    self.stats.missed_deadlines += 1;
                    warn!(
                        "tick {} finished {:.1} ms late ({:.1} s in)",
                        self.seq,
                        late.as_secs_f64() * 1e3,
                        (finished - self.epoch).as_secs_f64()
                    );
                }
            }
        }
        Ok(())
    }

    fn finish_stats(mut self) -> ServeStats {
        self.tick_us.sort_unstable();
        let pct = |p: f64| -> f64 {
            if self.tick_us.is_empty() {
                return 0.0;
            }
            let i = ((p * self.tick_us.len() as f64).ceil() as usize).clamp(1, self.tick_us.len()) - 1;
            self.tick_us[i] as f64 / 1e3
        };
        self.stats.tick_ms_p50 = pct(0.50);
        self.stats.tick_ms_p99 = pct(0.99);
        self.stats.tick_ms_max = pct(1.0);
        self.stats.faults = self.stats.faults.max(self.decoder.faults());
        self.stats
    }
}

// ---- client I/O ----

#[derive(Clone)]
struct IoContext {
    events: Sender<Event>,
    ui_dir: Option<PathBuf>,
}

fn accept_loop(listener: TcpListener, io: IoContext, stop: Arc<AtomicBool>) {
    let mut gen = 0u64;
    while !stop.load(Ordering::SeqCst) {
        match listener.accept() {
            Ok((stream, peer)) => {
                gen += 1;
                let io = io.clone();
                let id = gen;
                let spawned = thread::Builder::new()
                    .name(format!("client-{id}"))
                    .spawn(move || {
                        if let Err(e) = handle_connection(stream, id, &io) {
                            debug!("connection {id} from {peer}: {e}");
                        }
                    });
                if let Err(e) = spawned {
                    warn!("cannot spawn client thread: {e}");
                }
            }
            Err(e) if e.kind() == ErrorKind::WouldBlock => thread::sleep(Duration::from_millis(20)),
            Err(e) => {
                warn!("accept failed: {e}");
                thread::sleep(Duration::from_millis(20));
            }
        }
    }
}

enum Transport {
    Lines,
    WebSocket,
    Http,
}

/// Sniffs the first bytes: an HTTP GET is either a WebSocket upgrade or a
/// static file request; anything else (including silence) is NDJSON.
fn sniff(stream: &TcpStream) -> std::io::Result<Transport> {
    stream.set_read_timeout(Some(PEEK_TIMEOUT))?;
    let mut buf = [0u8; 4096];
    let deadline = Instant::now() + PEEK_TIMEOUT;
    let mut seen = 0;
    loop {
        match stream.peek(&mut buf) {
            Ok(0) => break,
            Ok(n) => {
                seen = n;
                let head = &buf[..n];
                if !b"GET ".starts_with(&head[..n.min(4)]) {
                    return Ok(Transport::Lines);
                }
                if let Some(end) = find(head, b"\r\n\r\n") {
                    let headers = String::from_utf8_lossy(&head[..end]).to_ascii_lowercase();
                    let upgrade = headers.lines().any(|l| l.starts_with("upgrade:") && l.contains("websocket"));
                    return Ok(if upgrade { Transport::WebSocket } else { Transport::Http });
                }
                if n == buf.len() {
                    return Ok(Transport::Http);
                }
            }
            Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {}
            Err(e) => return Err(e),
        }
        if Instant::now() >= deadline {
            break;
        }
        thread::sleep(Duration::from_millis(2));
    }
    Ok(if seen >= 4 { Transport::Http } else { Transport::Lines })
}

fn find(hay: &[u8], needle: &[u8]) -> Option<usize> {
    hay.windows(needle.len()).position(|w| w == needle)
}

fn handle_connection(stream: TcpStream, gen: u64, io: &IoContext) -> std::io::Result<()> {
    stream.set_nonblocking(false)?;
    stream.set_nodelay(true)?;
    match sniff(&stream)? {
        Transport::Lines => {
            stream.set_read_timeout(None)?;
            serve_lines(stream, gen, io)
        }
        Transport::WebSocket => serve_websocket(stream, gen, io),
        Transport::Http => {
            stream.set_read_timeout(Some(Duration::from_secs(5)))?;
            serve_static(stream, io.ui_dir.as_deref())
        }
    }
}

/// Parses one inbound text message and forwards it, or replies with an
/// error right away.
fn handle_inbound(text: &str, gen: u64, io: &IoContext, reply: &Sender<ServerMessage>) {
    if text.trim().is_empty() {
        return;
    }
    match parse_client(text) {
        Ok(ClientMessage::LoadModel { path }) => {
            let result = ModelCheckpoint::load(Path::new(&path))
                .map(Box::new)
                .map_err(|e| format!("{path}: {e}"));
            let _ = io.events.send(Event::Model { gen, result });
        }
        Ok(msg) => {
            let _ = io.events.send(Event::Control { gen, msg });
        }
        Err((of, message)) => {
            let _ = reply.try_send(ServerMessage::Error { of, message });
        }
    }
}

fn serve_lines(stream: TcpStream, gen: u64, io: &IoContext) -> std::io::Result<()> {
    let (tx, rx) = bounded::<ServerMessage>(OUTBOX);
    let mut writer = stream.try_clone()?;
    let closer = stream.try_clone()?;
    let write_thread = thread::spawn(move || {
        for msg in rx {
            if writer.write_all(msg.to_line().as_bytes()).is_err() {
                break;
            }
        }
        // displaced or stopped: unblock the reader
        let _ = closer.shutdown(Shutdown::Both);
    });
    let _ = io.events.send(Event::Connected { gen, tx: tx.clone() });
    let mut reader = BufReader::new(stream);
    let mut line = String::new();
    loop {
        line.clear();
        match reader.read_line(&mut line) {
            Ok(0) | Err(_) => break,
            Ok(_) => handle_inbound(&line, gen, io, &tx),
        }
    }
    let _ = io.events.send(Event::Disconnected { gen });
    drop(tx);
    let _ = write_thread.join();
    Ok(())
}

fn serve_websocket(stream: TcpStream, gen: u64, io: &IoContext) -> std::io::Result<()> {
    stream.set_read_timeout(Some(Duration::from_secs(5)))?;
    let mut ws = tungstenite::accept(stream).map_err(|e| std::io::Error::other(e.to_string()))?;
    ws.get_ref().set_read_timeout(Some(WS_POLL))?;
    let (tx, rx) = bounded::<ServerMessage>(OUTBOX);
    let _ = io.events.send(Event::Connected { gen, tx: tx.clone() });
    'conn: loop {
        loop {
            match rx.try_recv() {
                Ok(msg) => {
                    if ws.send(Message::text(msg.to_line().trim_end())).is_err() {
                        break 'conn;
                    }
                }
                Err(TryRecvError::Empty) => break,
                Err(TryRecvError::Disconnected) => {
                    let _ = ws.close(None);
                    let _ = ws.flush();
                    break 'conn;
                }
            }
        }
        match ws.read() {
            Ok(Message::Text(t)) => handle_inbound(t.as_str(), gen, io, &tx),
            Ok(Message::Binary(b)) => handle_inbound(&String::from_utf8_lossy(&b), gen, io, &tx),
            Ok(Message::Close(_)) => break,
            Ok(_) => {}
            Err(tungstenite::Error::Io(e)) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut) => {}
            Err(_) => break,
        }
    }
    let _ = io.events.send(Event::Disconnected { gen });
    Ok(())
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()).unwrap_or("") {
        "html" => "text/html; charset=utf-8",
        "js" | "mjs" => "text/javascript",
        "css" => "text/css",
        "json" | "map" => "application/json",
        "svg" => "image/svg+xml",
        "png" => "image/png",
        "ico" => "image/x-icon",
        "wasm" => "application/wasm",
        _ => "application/octet-stream",
    }
}

/// Maps a request path onto `root`, refusing anything that climbs out.
fn resolve_static(root: &Path, url_path: &str) -> Option<PathBuf> {
    let path = url_path.split(['?', '#']).next().unwrap_or("/");
    let rel = Path::new(path.trim_start_matches('/'));
    if rel.components().any(|c| !matches!(c, Component::Normal(_))) {
        return None;
    }
    let mut full = root.join(rel);
    if full.is_dir() {
        full = full.join("index.html");
    }
    full.is_file().then_some(full)
}

fn serve_static(mut stream: TcpStream, root: Option<&Path>) -> std::io::Result<()> {
    let mut head = Vec::new();
    let mut byte = [0u8; 1];
    while find(&head, b"\r\n\r\n").is_none() && head.len() < 16 * 1024 {
        if stream.read(&mut byte)? == 0 {
            break;
        }
        head.push(byte[0]);
    }
    let request = String::from_utf8_lossy(&head);
    let target = request.lines().next().and_then(|l| l.split_whitespace().nth(1)).unwrap_or("/");
    let file = root.and_then(|r| resolve_static(r, target));
    let (status, ctype, body) = match file.as_deref().map(|f| (f, std::fs::read(f))) {
        Some((f, Ok(body))) => ("200 OK", content_type(f), body),
        _ => ("404 Not Found", "text/plain", b"not found\n".to_vec()),
    };
    write!(
        stream,
        "HTTP/1.1 {status}\r\nContent-Type: {ctype}\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
        body.len()
    )?;
    stream.write_all(&body)?;
    stream.flush()
}
