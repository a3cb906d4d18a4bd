use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use twopoint::eval::{direction_outputs, direction_report_from_outputs, interpolation_sweep, FitVerdict};
use twopoint::models::ModelCheckpoint;

use crate::cli::{EvalArgs, ReportArgs, SweepArgs};
use crate::config::{RunConfig, RUN_FILE};
use crate::error::{CliError, Result};
use crate::files::{checkpoint_subject, collect_checkpoints, create_dir, data_dir, load_checkpoint, read_json, stem, write_csv, write_json, SubjectData};
use crate::tables::{direction_rows, direction_table, fit_rows, fit_table, EvalRecord, SweepRecord};

const DIRECTION_TABLE: &str = "direction_table";
const FIT_TABLE: &str = "fit_table";

/// Checkpoints with their datasets, opening each dataset once.
struct Workspace {
    data: BTreeMap<PathBuf, SubjectData>,
    flag: Option<PathBuf>,
}

impl Workspace {
    fn new(flag: Option<PathBuf>) -> Self {
        Self {
            data: BTreeMap::new(),
            flag,
        }
    }

    fn load(&mut self, path: &Path) -> Result<(ModelCheckpoint, usize, &mut SubjectData)> {
        let ckpt = load_checkpoint(path)?;
        let subject = checkpoint_subject(path, &ckpt)?;
        let dir = data_dir(self.flag.as_deref(), &ckpt)?;
        if !self.data.contains_key(&dir) {
            let opened = SubjectData::open(&dir)?;
            self.data.insert(dir.clone(), opened);
        }
        Ok((ckpt, subject, self.data.get_mut(&dir).expect("inserted above")))
    }
}

fn resolve_checkpoints(cfg: &mut RunConfig, flag: Vec<PathBuf>) -> Result<Vec<PathBuf>> {
    if !flag.is_empty() {
        cfg.paths.ckpt = flag;
    }
    collect_checkpoints(&cfg.paths.ckpt)
}

fn write_table<R: Serialize>(dir: &Path, name: &str, text: &str, rows: &[R]) -> Result<()> {
    let txt = dir.join(format!("{name}.txt"));
    fs::write(&txt, text).map_err(CliError::io(&txt))?;
    write_csv(&dir.join(format!("{name}.csv")), rows)
}

pub fn eval(cfg: &mut RunConfig, a: EvalArgs) -> Result<()> {
    cfg.command = "eval".into();
    if a.data.is_some() {
        cfg.paths.data = a.data;
    }
    if a.report.is_some() {
        cfg.paths.out = a.report;
    }
    let paths = resolve_checkpoints(cfg, a.ckpt)?;
    let mut ws = Workspace::new(cfg.paths.data.clone());
    let mut records = Vec::with_capacity(paths.len());
    for path in &paths {
        let (ckpt, subject, data) = ws.load(path)?;
        let test = data.test_records(&ckpt, subject)?;
        let (outputs, labels) = direction_outputs(&ckpt, &test);
        let report = direction_report_from_outputs(&outputs, &labels)?;
        records.push(EvalRecord {
            model: ckpt.kind,
            subject,
            checkpoint: path.display().to_string(),
            report,
            outputs,
            labels,
        });
    }
    let rows = direction_rows(&records)?;
    let table = direction_table(&rows);
    print!("{table}");
    if let Some(dir) = &cfg.paths.out {
        create_dir(dir)?;
        for r in &records {
            write_json(&dir.join(format!("eval_{}.json", stem(r.model, r.subject))), r)?;
        }
        write_table(dir, DIRECTION_TABLE, &table, &rows)?;
        cfg.write(&dir.join(RUN_FILE))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CurvePoint {
    finger: String,
    scale: f64,
    output: f64,
}

pub fn sweep(cfg: &mut RunConfig, a: SweepArgs) -> Result<()> {
    cfg.command = "sweep".into();
    if a.data.is_some() {
        cfg.paths.data = a.data;
    }
    if a.report.is_some() {
        cfg.paths.out = a.report;
    }
    if let Some(g) = a.grid {
        cfg.sweep.grid = g;
    }
    if let Some(v) = a.rho_min {
        cfg.sweep.rho_min = v;
    }
    if let Some(v) = a.r2_min {
        cfg.sweep.r2_min = v;
    }
    let grid = cfg.sweep.grid()?;
    cfg.sweep.grid = grid.to_string();
    let thresholds = cfg.sweep.thresholds();
    let paths = resolve_checkpoints(cfg, a.ckpt)?;
    let mut ws = Workspace::new(cfg.paths.data.clone());
    let mut records = Vec::with_capacity(paths.len());
    for path in &paths {
        let (ckpt, subject, data) = ws.load(path)?;
        let test = data.test_records(&ckpt, subject)?;
        let curves = interpolation_sweep(&ckpt, &test, &grid)?;
        let verdicts = curves
            .iter()
            .map(|c| c.verdict(thresholds))
            .collect::<std::result::Result<Vec<FitVerdict>, _>>()?;
        let passed = verdicts.iter().filter(|v| v.pass).count();
        records.push(SweepRecord {
            model: ckpt.kind,
            subject,
            checkpoint: path.display().to_string(),
            thresholds,
            curves,
            verdicts,
            passed,
        });
    }
    let rows = fit_rows(&records);
    let table = fit_table(&rows);
    print!("{table}");
    if let Some(dir) = &cfg.paths.out {
        create_dir(dir)?;
        for r in &records {
            let name = format!("sweep_{}", stem(r.model, r.subject));
            write_json(&dir.join(format!("{name}.json")), r)?;
            let points: Vec<CurvePoint> = r
                .curves
                .iter()
                .flat_map(|c| {
                    c.grid.iter().zip(&c.outputs).map(|(&scale, &output)| CurvePoint {
                        finger: c.finger.to_string(),
                        scale,
                        output,
                    })
                })
                .collect();
            write_csv(&dir.join(format!("{name}.csv")), &points)?;
        }
        write_table(dir, FIT_TABLE, &table, &rows)?;
        cfg.write(&dir.join(RUN_FILE))?;
    }
    Ok(())
}

fn scan(dir: &Path, prefix: &str, found: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir).map_err(CliError::io(dir))? {
        let path = entry.map_err(CliError::io(dir))?.path();
        if path.is_dir() {
            scan(&path, prefix, found)?;
        } else if path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.starts_with(prefix) && n.ends_with(".json"))
        {
            found.push(path);
        }
    }
    Ok(())
}

fn gather<T: serde::de::DeserializeOwned>(dir: &Path, prefix: &str) -> Result<Vec<T>> {
    let mut paths = Vec::new();
    scan(dir, prefix, &mut paths)?;
    paths.sort();
    paths.iter().map(|p| read_json(p)).collect()
}

/// Rebuilds both tables from saved eval and sweep outputs.
pub fn report(a: ReportArgs) -> Result<()> {
    let evals: Vec<EvalRecord> = gather(&a.input, "eval_")?;
    let sweeps: Vec<SweepRecord> = gather(&a.input, "sweep_")?;
    if evals.is_empty() && sweeps.is_empty() {
        return Err(CliError::Usage(format!(
            "no eval_*.json or sweep_*.json under {}",
            a.input.display()
        )));
    }
    if let Some(dir) = &a.out {
        create_dir(dir)?;
    }
    if !evals.is_empty() {
        let rows = direction_rows(&evals)?;
        let table = direction_table(&rows);
        print!("{table}");
        if let Some(dir) = &a.out {
            write_table(dir, DIRECTION_TABLE, &table, &rows)?;
        }
    }
    if !sweeps.is_empty() {
        if !evals.is_empty() {
            println!();
        }
        let rows = fit_rows(&sweeps);
        let table = fit_table(&rows);
        print!("{table}");
        if let Some(dir) = &a.out {
            write_table(dir, FIT_TABLE, &table, &rows)?;
        }
    }
    Ok(())
}
