use std::path::{Path, PathBuf};

use log::info;
use serde::Serialize;
use twopoint::models::ModelCheckpoint;
use twopoint::runtime::{scripted_sine_session, serve as run_service, ServeConfig, SessionConfig};
use twopoint::synth::{CohortConfig, SignalGenerator};

use super::{parse_finger, required};
use crate::cli::{ServeArgs, TrackArgs};
use crate::config::{RunConfig, RUN_FILE};
use crate::error::{CliError, Result};
use crate::files::{create_dir, load_checkpoint, write_csv, write_json, SubjectData};

/// Mixing of the synthetic subject that drives a live source: the given
/// dataset's subject, else the checkpoint's own dataset and subject, else
/// the default cohort.
fn source_generator(data: Option<&Path>, subject: Option<usize>, ckpt: &ModelCheckpoint) -> Result<SignalGenerator> {
    let subject = subject.or(ckpt.meta.subject).unwrap_or(0);
    let dir = data
        .map(Path::to_path_buf)
        .or_else(|| ckpt.meta.data.as_ref().map(PathBuf::from).filter(|p| p.is_dir()));
    match dir {
        Some(dir) => {
            let data = SubjectData::open(&dir)?;
            if subject >= data.subjects() {
                return Err(CliError::Usage(format!(
                    "subject {subject} out of range (dataset has {})",
                    data.subjects()
                )));
            }
            Ok(data.generator(subject))
        }
        None => Ok(CohortConfig::default().subject_generator(subject)),
    }
}

#[derive(Serialize)]
struct TrackPoint {
    t: f64,
    target: f64,
    decoded: f64,
}

pub fn track(cfg: &mut RunConfig, a: TrackArgs) -> Result<()> {
    cfg.command = "track".into();
    if !a.scripted {
        return Err(CliError::Usage(
            "interactive tracking runs in the service: use `twopoint serve` and start a session from a client, or pass --scripted".into(),
        ));
    }
    if let Some(p) = a.ckpt {
        cfg.paths.ckpt = vec![p];
    }
    if a.data.is_some() {
        cfg.paths.data = a.data;
    }
    if a.report.is_some() {
        cfg.paths.out = a.report;
    }
    if let Some(v) = a.freq {
        cfg.track.freq_hz = v;
    }
    if let Some(v) = a.duration {
        cfg.track.duration_s = v;
    }
    if let Some(f) = &a.finger {
        cfg.track.finger = parse_finger(f)?;
    }
    if let Some(s) = &a.scope {
        cfg.track.scope = s.parse().map_err(CliError::Usage)?;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    let ckpt_path = required(cfg.paths.ckpt.first().cloned(), "--ckpt FILE")?;
    let ckpt = load_checkpoint(&ckpt_path)?;
    let session_cfg = cfg.track.session();
    session_cfg.validate()?;
    let generator = source_generator(cfg.paths.data.as_deref(), a.subject, &ckpt)?;
    let session = scripted_sine_session(&generator, cfg.seed, &ckpt, &session_cfg)?;
    let m = session.metrics.as_ref().expect("sine sessions carry metrics");
    println!(
        "{} {:.3} Hz {} s on {}: RMSE {:.4}, R2 {}, MAPE {} ({} points)",
        ckpt.kind,
        session_cfg.freq_hz,
        session_cfg.duration_s,
        session_cfg.finger,
        m.rmse,
        m.r2.map_or("n/a".into(), |v| format!("{v:.4}")),
        m.mape.map_or("n/a".into(), |v| format!("{:.1}%", 100.0 * v)),
        m.samples
    );
    if let Some(dir) = &cfg.paths.out {
        create_dir(dir)?;
        write_json(&dir.join("track.json"), &session)?;
        let points: Vec<TrackPoint> = session
            .times
            .iter()
            .zip(&session.target)
            .zip(&session.decoded)
            .map(|((&t, &target), &decoded)| TrackPoint { t, target, decoded })
            .collect();
        write_csv(&dir.join("track.csv"), &points)?;
        cfg.write(&dir.join(RUN_FILE))?;
    }
    Ok(())
}

pub fn serve(cfg: &mut RunConfig, a: ServeArgs) -> Result<()> {
    cfg.command = "serve".into();
    if let Some(p) = a.ckpt {
        cfg.paths.ckpt = vec![p];
    }
    if a.data.is_some() {
        cfg.paths.data = a.data;
    }
    if a.ui.is_some() {
        cfg.paths.ui = a.ui;
    }
    if let Some(b) = a.bind {
        cfg.serve.bind = b;
    }
    if let Some(v) = a.k_alpha {
        cfg.serve.k_alpha = v;
    }
    if let Some(v) = a.k_f {
        cfg.serve.k_f = v;
    }
    if a.duration.is_some() {
        cfg.serve.duration_s = a.duration;
    }
    if a.fast {
        cfg.serve.realtime = false;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    let script = match a.script_freq {
        Some(freq) => {
            let mut s = SessionConfig {
                freq_hz: freq,
                ..cfg.track.session()
            };
            if let Some(f) = &a.script_finger {
                s.finger = parse_finger(f)?;
            }
            if let Some(d) = a.script_duration {
                s.duration_s = d;
            }
            s.validate()?;
            Some(s)
        }
        None => None,
    };
    if let Some(ui) = &cfg.paths.ui {
        if !ui.is_dir() {
            return Err(CliError::Usage(format!("--ui {} is not a directory", ui.display())));
        }
    }
    let ckpt_path = required(cfg.paths.ckpt.first().cloned(), "--ckpt FILE")?;
    let ckpt = load_checkpoint(&ckpt_path)?;
    let generator = source_generator(cfg.paths.data.as_deref(), a.subject, &ckpt)?;
    let config = ServeConfig {
        generator,
        seed: cfg.seed,
        gains: cfg.serve.gains()?,
        ui_dir: cfg.paths.ui.clone(),
        realtime: cfg.serve.realtime,
        duration_s: cfg.serve.duration_s,
        script,
        ..ServeConfig::new(cfg.serve.bind.clone(), ckpt)
    };
    info!("serving {} on {}", ckpt_path.display(), cfg.serve.bind);
    let stats = run_service(config)?;
    println!(
        "{} ticks, {} skipped, {} faults, tick p50 {:.3} ms p99 {:.3} ms max {:.3} ms, {} missed deadlines",
        stats.ticks,
        stats.skipped,
        stats.faults,
        stats.tick_ms_p50,
        stats.tick_ms_p99,
        stats.tick_ms_max,
        stats.missed_deadlines
    );
    for s in &stats.sessions {
        if let Some(m) = &s.metrics {
            println!("session {:.3} Hz on {}: RMSE {:.4}, R2 {:?}", s.freq_hz, s.finger, m.rmse, m.r2);
        }
    }
    if let Some(path) = &a.stats {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            create_dir(parent)?;
        }
        write_json(path, &stats)?;
        cfg.write(&path.with_file_name(RUN_FILE))?;
    }
    Ok(())
}
