use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use log::info;
use serde::Serialize;
use twopoint::models::{Hyper, ModelCheckpoint, ModelKind, TrainReport};
use twopoint::pipeline::{fit_subject, prepare_all};
use twopoint::synth::io::Dataset;

use super::{parse_models, parse_subjects, required, run_file_beside};
use crate::cli::TrainArgs;
use crate::config::{RunConfig, RUN_FILE};
use crate::error::{CliError, Result};
use crate::files::{create_dir, open_dataset, stem, write_json, CKPT_EXT};

#[derive(Serialize)]
struct TrainOutput<'a> {
    model: ModelKind,
    subject: usize,
    data: String,
    hyper: &'a Hyper,
    test_records: &'a [usize],
    report: &'a TrainReport,
}

struct Fitted {
    subject: usize,
    model: ModelKind,
    checkpoint: ModelCheckpoint,
    report: TrainReport,
    test: Vec<usize>,
}

pub fn train(cfg: &mut RunConfig, a: TrainArgs) -> Result<()> {
    cfg.command = "train".into();
    let t = &mut cfg.train;
    if let Some(m) = &a.model {
        t.models = parse_models(m)?;
    }
    if let Some(s) = &a.subject {
        t.subjects = parse_subjects(s)?;
    }
    if let Some(v) = a.epochs {
        t.epochs = v;
    }
    if let Some(v) = a.lr {
        t.lr = v;
    }
    if let Some(v) = a.folds {
        t.folds = v;
    }
    if let Some(v) = a.batch_size {
        t.batch_size = v;
    }
    if let Some(v) = a.jobs {
        t.jobs = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if a.data.is_some() {
        cfg.paths.data = a.data;
    }
    if a.out.is_some() {
        cfg.paths.out = a.out;
    }
    let data = required(cfg.paths.data.clone(), "--data DIR")?;
    let out = required(cfg.paths.out.clone(), "--out FILE|DIR")?;
    if cfg.train.models.is_empty() {
        return Err(CliError::Usage("no model selected".into()));
    }
    let dataset = open_dataset(&data)?;
    let subjects: Vec<usize> = if cfg.train.subjects.is_empty() {
        (0..dataset.subjects()).collect()
    } else {
        cfg.train.subjects.clone()
    };
    if let Some(&bad) = subjects.iter().find(|&&s| s >= dataset.subjects()) {
        return Err(CliError::Usage(format!("subject {bad} out of range (dataset has {})", dataset.subjects())));
    }
    let hyper = cfg.train.hyper(cfg.seed);
    let models = cfg.train.models.clone();
    let single = subjects.len() == 1 && models.len() == 1 && !out.is_dir();

    let fitted = fit_all(&dataset, &subjects, &models, &hyper, cfg.train.jobs.max(1))?;
    let data_str = data.display().to_string();
    if !single {
        create_dir(&out)?;
    } else if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    for mut f in fitted {
        f.checkpoint.meta.data = Some(data_str.clone());
        let ckpt_path = if single {
            out.clone()
        } else {
            out.join(format!("{}.{CKPT_EXT}", stem(f.model, f.subject)))
        };
        f.checkpoint.save(&ckpt_path)?;
        write_json(
            &report_path(&ckpt_path),
            &TrainOutput {
                model: f.model,
                subject: f.subject,
                data: data_str.clone(),
                hyper: &hyper,
                test_records: &f.test,
                report: &f.report,
            },
        )?;
        println!(
            "{} subject {}: mean val mse {:.4}, final train mse {:.4} -> {}",
            f.model,
            f.subject,
            f.report.mean_val_mse,
            f.report.final_train_mse,
            ckpt_path.display()
        );
    }
    let run_path = if single { run_file_beside(&out) } else { out.join(RUN_FILE) };
    cfg.write(&run_path)
}

fn report_path(ckpt: &Path) -> PathBuf {
    ckpt.with_extension("report.json")
}

/// Trains every (subject, model) pair, fanning subjects out over `jobs`
/// threads. Results come back in subject-then-model order regardless of
/// scheduling.
fn fit_all(dataset: &Dataset, subjects: &[usize], models: &[ModelKind], hyper: &Hyper, jobs: usize) -> Result<Vec<Fitted>> {
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<(usize, Result<Vec<Fitted>>)>();
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(subjects.len()) {
            let tx = tx.clone();
            let next = &next;
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&subject) = subjects.get(i) else { break };
                let result = fit_one_subject(dataset, subject, models, hyper);
                let failed = result.is_err();
                if tx.send((i, result)).is_err() || failed {
                    break;
                }
            });
        }
    });
    drop(tx);
    let mut slots: Vec<Option<Vec<Fitted>>> = (0..subjects.len()).map(|_| None).collect();
    for (i, r) in rx {
        slots[i] = Some(r?);
    }
    Ok(slots.into_iter().flatten().flatten().collect())
}

fn fit_one_subject(dataset: &Dataset, subject: usize, models: &[ModelKind], hyper: &Hyper) -> Result<Vec<Fitted>> {
    let started = Instant::now();
    let records = prepare_all(&dataset.subject_records(subject)?)?;
    let mut out = Vec::with_capacity(models.len());
    for &model in models {
        let fit = fit_subject(&records, model, hyper)?;
        out.push(Fitted {
            subject,
            model,
            test: fit.split.test.clone(),
            checkpoint: fit.checkpoint,
            report: fit.report,
        });
    }
    info!("subject {subject} trained in {:.1} s", started.elapsed().as_secs_f64());
    Ok(out)
}
