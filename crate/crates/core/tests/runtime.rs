use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::time::{Duration, Instant};

use serde_json::Value;
use twopoint::dsp::FilterChain;
use twopoint::models::{Hyper, ModelCheckpoint, ModelKind};
use twopoint::pipeline::{fit_subject, prepare_all, window_features};
use twopoint::runtime::{
    run_sine_session, scripted_sine_session, spawn_serve, stream_decode, FrameSource, Gains, PassThrough, Playback,
    RuntimeError, ScriptScope, ServeConfig, SessionConfig, SineScript, SourceFrame, StreamDecoder, SynthSource, TickDecoder,
    LABEL_CLAMP,
};
use twopoint::synth::{ArtifactFlags, CohortConfig, Finger};
use twopoint::CHANNELS;

fn cohort() -> CohortConfig {
    CohortConfig {
        subjects: 1,
        reps: 3,
        duration_s: 2.0,
        seed: 7,
        ..CohortConfig::default()
    }
}

fn trained(kind: ModelKind) -> ModelCheckpoint {
    let records = prepare_all(&cohort().subject(0).records().unwrap()).unwrap();
    fit_subject(&records, kind, &Hyper::default()).unwrap().checkpoint
}

#[test]
fn playback_decode_matches_offline_chain_bit_for_bit() {
    let subject = cohort().subject(0);
    for kind in [ModelKind::Ln, ModelKind::Dd, ModelKind::Mlp, ModelKind::Cnn] {
        let ckpt = ModelCheckpoint::init(kind, 5);
        for (g, rep) in [(1u8, 0usize), (6, 1), (10, 2)] {
            let gesture = twopoint::synth::gesture(g).unwrap();
            let (sig, labels) = subject.record(&gesture, rep).unwrap();
            let mut playback = Playback::new(sig.clone(), *labels.values());
            let frames = std::iter::from_fn(|| playback.next_frame().map(|f| f.samples));
            let ticks = stream_decode(frames, &ckpt).unwrap();

            let rect = FilterChain::streaming(CHANNELS).apply_record(&sig.channels).unwrap();
            let offline = window_features(&rect, 1.0).unwrap();
            assert_eq!(ticks.len(), offline.len());
            for (tick, x) in ticks.iter().zip(&offline) {
                let want = ckpt.predict(x).map(|v| v.clamp(-LABEL_CLAMP, LABEL_CLAMP));
                assert_eq!(tick.labels, want, "{kind} gesture {g} tick {}", tick.index);
            }
        }
    }
}

#[test]
fn pass_through_oracle_tracks_exactly() {
    let gen = cohort().subject_generator(0);
    let cfg = SessionConfig { freq_hz: 0.5, duration_s: 8.0, finger: Finger::Ring, ..SessionConfig::default() };
    let mut src = SynthSource::new(&gen, 3, ArtifactFlags::none());
    src.start_script(SineScript { freq_hz: 0.5, finger: Finger::Ring, scope: ScriptScope::Finger, start: 0 });
    let s = run_sine_session(&cfg, &mut src, &mut PassThrough::default()).unwrap();
    let m = s.metrics.unwrap();
    assert_eq!(s.target.len(), (8000 - 200) / 50 + 1);
    assert!(m.rmse < 1e-12, "{m:?}");
    assert!(m.r2.unwrap() > 1.0 - 1e-12);
    assert_eq!(s.skipped, 0);
}

#[derive(Default)]
struct Silent(PassThrough);

impl TickDecoder for Silent {
    fn push(&mut self, frame: &SourceFrame) -> Result<Option<twopoint::runtime::DecodeTick>, RuntimeError> {
        Ok(self.0.push(frame)?.map(|t| twopoint::runtime::DecodeTick { labels: [0.0; 5], ..t }))
    }
}

#[test]
fn zero_decoder_has_rmse_of_a_unit_sine() {
    let gen = cohort().subject_generator(0);
    // 0.25 Hz over 20 s: whole periods, and ticks land symmetrically
    let cfg = SessionConfig { freq_hz: 0.25, duration_s: 20.0, finger: Finger::Index, ..SessionConfig::default() };
    let mut src = SynthSource::new(&gen, 3, ArtifactFlags::none());
    let s = run_sine_session(&cfg, &mut src, &mut Silent::default()).unwrap();
    let rmse = s.metrics.unwrap().rmse;
    assert!((rmse - 0.5f64.sqrt()).abs() < 0.01, "{rmse}");
}

struct Starved<S>(S, u64);

impl<S: FrameSource> FrameSource for Starved<S> {
    fn next_frame(&mut self) -> Option<SourceFrame> {
        self.1 += 1;
        if (2000..3000).contains(&self.1) {
            None
        } else {
            self.0.next_frame()
        }
    }
}

#[test]
fn long_underrun_aborts_the_session() {
    let gen = cohort().subject_generator(0);
    let cfg = SessionConfig { freq_hz: 0.5, duration_s: 5.0, finger: Finger::Index, ..SessionConfig::default() };
    let src = SynthSource::new(&gen, 3, ArtifactFlags::none());
    let err = run_sine_session(&cfg, &mut Starved(src, 0), &mut PassThrough::default()).unwrap_err();
    assert!(matches!(err, RuntimeError::SessionAborted(11)), "{err}");
}

#[test]
fn session_needs_two_periods() {
    let gen = cohort().subject_generator(0);
    let cfg = SessionConfig { freq_hz: 0.1, duration_s: 10.0, finger: Finger::Index, ..SessionConfig::default() };
    let mut src = SynthSource::new(&gen, 3, ArtifactFlags::none());
    assert!(matches!(
        run_sine_session(&cfg, &mut src, &mut PassThrough::default()),
        Err(RuntimeError::InvalidSession(_))
    ));
}

#[test]
fn trained_ln_follows_full_flexion_and_a_scripted_sine() {
    let ckpt = trained(ModelKind::Ln);
    let gen = cohort().subject_generator(0);
    let mut src = SynthSource::new(&gen, 99, ArtifactFlags::none());
    src.set_labels([1.0; 5]);
    let mut dec = StreamDecoder::new(ckpt.clone());
    let mut ticks = Vec::new();
    for _ in 0..3000 {
        if let Some(t) = dec.push(&src.next_frame().unwrap()).unwrap() {
            ticks.push(t);
        }
    }
    // skip the first second of warm-up
    let late = &ticks[16..];
    for j in 0..5 {
        let mean = late.iter().map(|t| t.labels[j]).sum::<f64>() / late.len() as f64;
        assert!((mean - 1.0).abs() <= 0.15, "finger {j}: {mean}");
    }

    let cfg = SessionConfig { freq_hz: 0.1, duration_s: 20.0, finger: Finger::Index, ..SessionConfig::default() };
    let s = scripted_sine_session(&gen, 5, &ckpt, &cfg).unwrap();
    let m = s.metrics.unwrap();
    assert!(m.rmse <= 0.2 && m.r2.unwrap() >= 0.85, "{m:?}");
}

// ---- service ----

struct Client {
    reader: BufReader<TcpStream>,
    writer: TcpStream,
}

impl Client {
    fn connect(addr: std::net::SocketAddr) -> Self {
        let s = TcpStream::connect(addr).unwrap();
        s.set_read_timeout(Some(Duration::from_secs(5))).unwrap();
        Self { reader: BufReader::new(s.try_clone().unwrap()), writer: s }
    }

    fn send(&mut self, line: &str) {
        self.writer.write_all(line.as_bytes()).unwrap();
        self.writer.write_all(b"\n").unwrap();
    }

    fn next(&mut self) -> Value {
        let mut line = String::new();
        self.reader.read_line(&mut line).unwrap();
        serde_json::from_str(&line).unwrap_or_else(|e| panic!("{e}: {line:?}"))
    }

    fn until(&mut self, kind: &str, seen: &mut Vec<Value>) -> Value {
        loop {
            let v = self.next();
            let done = v["type"] == kind;
            seen.push(v.clone());
            if done {
                return v;
            }
        }
    }
}

fn service(ckpt: ModelCheckpoint) -> twopoint::runtime::ServeHandle {
    let mut cfg = ServeConfig::new("127.0.0.1:0", ckpt);
    cfg.generator = cohort().subject_generator(0);
    cfg.seed = 11;
    spawn_serve(cfg).unwrap()
}

fn check_gapless(seen: &[Value]) {
    let seqs: Vec<u64> = seen
        .iter()
        .filter(|v| v["type"] == "tick" || v["type"] == "skip")
        .map(|v| v["seq"].as_u64().unwrap())
        .collect();
    for w in seqs.windows(2) {
        assert_eq!(w[1], w[0] + 1, "sequence gap");
    }
}

#[test]
fn service_applies_controls_and_streams_telemetry() {
    let handle = service(trained(ModelKind::Ln));
    let mut c = Client::connect(handle.local_addr());
    let mut seen = Vec::new();
    let hello = c.until("hello", &mut seen);
    assert_eq!(hello["model"], "LN");
    assert_eq!(hello["gains"]["k_alpha"], 60.0);

    // malformed input gets an error and the connection stays up
    c.send("{not json");
    assert!(c.until("error", &mut seen)["of"].is_null());
    c.send(r#"{"type":"set_activation","values":[0,0,0,3,0]}"#);
    assert_eq!(c.until("error", &mut seen)["of"], "set_activation");

    let first = c.until("tick", &mut seen);
    assert!(first.get("target").is_none());
    assert_eq!(first["labels"].as_array().unwrap().len(), 5);

    c.send(r#"{"type":"set_activation","values":[0,0,0,1,0]}"#);
    let ack = c.until("ack", &mut seen);
    assert_eq!(ack["of"], "set_activation");
    let applied = ack["seq"].as_u64().unwrap();
    let mut reached = None;
    while reached.is_none() {
        let t = c.until("tick", &mut seen);
        let seq = t["seq"].as_u64().unwrap();
        if t["labels"][3].as_f64().unwrap() > 0.5 {
            reached = Some(seq);
        }
        assert!(seq < applied + 20, "index label never rose");
    }
    let lag = reached.unwrap() + 1 - applied;
    assert!(lag <= 6, "activation took {lag} ticks");

    c.send(r#"{"type":"session","action":"start","mode":"sine","freq":0.5,"finger":"index","duration":4}"#);
    assert_eq!(c.until("ack", &mut seen)["of"], "session");
    let t = c.until("tick", &mut seen);
    assert!(t["target"].is_number(), "{t}");
    c.send(r#"{"type":"session","action":"start","freq":0.5,"finger":"index","duration":4}"#);
    assert_eq!(c.until("error", &mut seen)["of"], "session");
    let end = c.until("session_end", &mut seen);
    assert_eq!(end["reason"], "completed");
    assert_eq!(end["finger"], "index");
    assert!(end["metrics"]["rmse"].is_number());
    assert_eq!(end["t"].as_array().unwrap().len(), end["decoded"].as_array().unwrap().len());
    let t = c.until("tick", &mut seen);
    assert!(t.get("target").is_none());

    // with zero angular gain every finger coasts at constant velocity
    // until a joint limit pins it
    c.send(r#"{"type":"set_gains","k_alpha":0}"#);
    c.until("ack", &mut seen);
    let angles = |v: Value| -> Vec<f64> { v["angles"].as_array().unwrap().iter().map(|a| a.as_f64().unwrap()).collect() };
    let a: Vec<Vec<f64>> = (0..6).map(|_| angles(c.until("tick", &mut seen))).collect();
    for j in 0..5 {
        for w in a.windows(3) {
            let (d0, d1) = (w[1][j] - w[0][j], w[2][j] - w[1][j]);
            let pinned = [0.0, 90.0].contains(&w[2][j]);
            assert!(pinned || (d1 - d0).abs() < 1e-9, "finger {j} accelerates: {a:?}");
            if [0.0, 90.0].contains(&w[1][j]) {
                assert_eq!(d1, 0.0, "finger {j} left a limit");
            }
        }
    }
    c.send(r#"{"type":"set_gains","k_F":-1}"#);
    assert_eq!(c.until("error", &mut seen)["of"], "set_gains");
    c.send(r#"{"type":"load_model","path":"/nonexistent/model.json"}"#);
    assert_eq!(c.until("error", &mut seen)["of"], "load_model");
    c.send(r#"{"type":"session","action":"stop"}"#);
    assert_eq!(c.until("error", &mut seen)["of"], "session");

    check_gapless(&seen);
    handle.stop();
    let stats = handle.join().unwrap();
    assert!(stats.ticks > 60, "{stats:?}");
    assert_eq!(stats.faults, 0);
    assert_eq!(stats.sessions.len(), 1);
}

#[test]
fn service_switches_models_and_pauses_on_disconnect() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dd.json");
    ModelCheckpoint::init(ModelKind::Dd, 3).save(&path).unwrap();
    let handle = service(ModelCheckpoint::init(ModelKind::Ln, 1));
    let mut seen = Vec::new();
    {
        let mut c = Client::connect(handle.local_addr());
        c.until("hello", &mut seen);
        c.send(&format!(r#"{{"type":"load_model","path":{:?}}}"#, path.display().to_string()));
        assert_eq!(c.until("ack", &mut seen)["of"], "load_model");
        c.send(r#"{"type":"session","action":"start","freq":1,"finger":2,"duration":3}"#);
        c.until("ack", &mut seen);
        c.until("tick", &mut seen);
    }
    std::thread::sleep(Duration::from_millis(300));
    let mut c = Client::connect(handle.local_addr());
    let hello = c.until("hello", &mut seen);
    assert_eq!(hello["model"], "DD");
    // the session resumes for the new client and runs to completion
    let end = c.until("session_end", &mut seen);
    assert_eq!(end["reason"], "completed");
    handle.stop();
    handle.join().unwrap();
}

#[test]
fn service_speaks_websocket_and_serves_the_ui() {
    let ui = tempfile::tempdir().unwrap();
    std::fs::write(ui.path().join("index.html"), "<title>console</title>").unwrap();
    let mut cfg = ServeConfig::new("127.0.0.1:0", ModelCheckpoint::init(ModelKind::Ln, 1));
    cfg.ui_dir = Some(ui.path().to_path_buf());
    cfg.gains = Gains::new(30.0, 5.0).unwrap();
    let handle = spawn_serve(cfg).unwrap();
    let addr = handle.local_addr();

    let mut http = TcpStream::connect(addr).unwrap();
    http.write_all(b"GET / HTTP/1.1\r\nHost: x\r\n\r\n").unwrap();
    let mut body = String::new();
    http.read_to_string(&mut body).unwrap();
    assert!(body.starts_with("HTTP/1.1 200") && body.ends_with("<title>console</title>"), "{body}");
    let mut http = TcpStream::connect(addr).unwrap();
    http.write_all(b"GET /../secret HTTP/1.1\r\n\r\n").unwrap();
    body.clear();
    http.read_to_string(&mut body).unwrap();
    assert!(body.starts_with("HTTP/1.1 404"));

    let (mut ws, _) = tungstenite::connect(format!("ws://{addr}/ws")).unwrap();
    let mut next = || -> Value {
        loop {
            if let tungstenite::Message::Text(t) = ws.read().unwrap() {
                return serde_json::from_str(t.as_str()).unwrap();
            }
        }
    };
    let hello = next();
    assert_eq!(hello["type"], "hello");
    assert_eq!(hello["gains"]["k_F"], 5.0);
    let deadline = Instant::now() + Duration::from_secs(5);
    while next()["type"] != "tick" {
        assert!(Instant::now() < deadline);
    }
    ws.send(tungstenite::Message::text(r#"{"type":"set_gains","k_F":2}"#)).unwrap();
    loop {
        let v = ws.read().unwrap();
        if let tungstenite::Message::Text(t) = v {
            let v: Value = serde_json::from_str(t.as_str()).unwrap();
            if v["type"] == "ack" {
                assert_eq!(v["of"], "set_gains");
                break;
            }
        }
    }
    handle.stop();
    handle.join().unwrap();
}

#[test]
fn scripted_service_run_reports_session_and_timing() {
    let mut cfg = ServeConfig::new("127.0.0.1:0", ModelCheckpoint::init(ModelKind::Ln, 1));
    cfg.realtime = false;
    cfg.duration_s = Some(12.0);
    cfg.script = Some(SessionConfig { freq_hz: 0.5, duration_s: 10.0, finger: Finger::Thumb, ..SessionConfig::default() });
    let stats = spawn_serve(cfg).unwrap().join().unwrap();
    assert_eq!(stats.ticks, (12_000 - 200) / 50 + 1);
    assert_eq!(stats.skipped, 0);
    assert_eq!(stats.sessions.len(), 1);
    assert_eq!(stats.sessions[0].target.len(), (10_000 - 200) / 50 + 1);
    assert!(stats.tick_ms_p99 >= stats.tick_ms_p50 && stats.tick_ms_max >= stats.tick_ms_p99);
}
