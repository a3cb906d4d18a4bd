//! Aggregate tables: pooled direction metrics per finger and model, and
//! interpolation verdict counts per model.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};
use twopoint::eval::{direction_report_from_outputs, DirectionReport, FitThresholds, FitVerdict, SweepCurve};
use twopoint::models::ModelKind;
use twopoint::synth::Finger;
use twopoint::LabelVector;

use crate::error::Result;

/// Per-subject direction output, kept with its raw outputs so tables can
/// pool windows across subjects.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalRecord {
    pub model: ModelKind,
    pub subject: usize,
    pub checkpoint: String,
    pub report: DirectionReport,
    pub outputs: Vec<LabelVector>,
    pub labels: Vec<LabelVector>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRecord {
    pub model: ModelKind,
    pub subject: usize,
    pub checkpoint: String,
    pub thresholds: FitThresholds,
    pub curves: Vec<SweepCurve>,
    pub verdicts: Vec<FitVerdict>,
    pub passed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectionRow {
    pub output: String,
    pub finger: Finger,
    pub model: ModelKind,
    pub auc: f64,
    pub se: f64,
    pub accuracy: f64,
    pub subjects: usize,
    pub windows: usize,
}

/// Pools every subject's windows per model and scores each finger.
pub fn direction_rows(records: &[EvalRecord]) -> Result<Vec<DirectionRow>> {
    let mut by_model: BTreeMap<usize, (ModelKind, Vec<LabelVector>, Vec<LabelVector>, usize)> = BTreeMap::new();
    for r in records {
        let order = ModelKind::ALL.iter().position(|k| *k == r.model).unwrap_or(0);
        let e = by_model.entry(order).or_insert_with(|| (r.model, Vec::new(), Vec::new(), 0));
        e.1.extend_from_slice(&r.outputs);
        e.2.extend_from_slice(&r.labels);
        e.3 += 1;
    }
    let mut rows = Vec::new();
    let pooled: Vec<_> = by_model
        .into_values()
        .map(|(model, outputs, labels, subjects)| {
            direction_report_from_outputs(&outputs, &labels).map(|rep| (model, rep, subjects, outputs.len()))
        })
        .collect::<Result<_, _>>()?;
    for finger in Finger::ALL {
        for (model, rep, subjects, windows) in &pooled {
            let f = &rep.fingers[finger.index()];
            rows.push(DirectionRow {
                output: format!("L{}", finger.index() + 1),
                finger,
                model: *model,
                auc: f.auc,
                se: f.se,
                accuracy: f.accuracy,
                subjects: *subjects,
                windows: *windows,
            });
        }
    }
    Ok(rows)
}

pub fn direction_table(rows: &[DirectionRow]) -> String {
    let mut s = String::new();
    let subjects = rows.first().map_or(0, |r| r.subjects);
    let _ = writeln!(s, "Direction classification, windows pooled over {subjects} subject(s)");
    let _ = writeln!(s, "{:<8}{:<8}{:>10}{:>11}{:>11}", "Output", "Method", "AUC", "SE", "Accuracy");
    let mut last = "";
    for r in rows {
        let out = if r.output == last { "" } else { r.output.as_str() };
        last = &r.output;
        let _ = writeln!(
            s,
            "{:<8}{:<8}{:>10.6}{:>11.6}{:>10.2}%",
            out,
            r.model.name(),
            r.auc,
            r.se,
            100.0 * r.accuracy
        );
    }
    s
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRow {
    pub model: ModelKind,
    pub sweeps: usize,
    pub errors: usize,
    pub correct_rate: f64,
    pub subjects: usize,
}

pub fn fit_rows(records: &[SweepRecord]) -> Vec<FitRow> {
    ModelKind::ALL
        .iter()
        .filter_map(|&model| {
            let mine: Vec<&SweepRecord> = records.iter().filter(|r| r.model == model).collect();
            if mine.is_empty() {
                return None;
            }
            let sweeps: usize = mine.iter().map(|r| r.verdicts.len()).sum();
            let passed: usize = mine.iter().map(|r| r.passed).sum();
            Some(FitRow {
                model,
                sweeps,
                errors: sweeps - passed,
                correct_rate: passed as f64 / sweeps.max(1) as f64,
                subjects: mine.len(),
            })
        })
        .collect()
}

pub fn fit_table(rows: &[FitRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "Interpolation fit (monotone and linear), one sweep per subject and finger");
    let mut line = |name: &str, cell: &dyn Fn(&FitRow) -> String| {
        let _ = write!(s, "{name:<14}");
        for r in rows {
            let _ = write!(s, "{:>8}", cell(r));
        }
        s.push('\n');
    };
    line("Network", &|r| r.model.name().to_string());
    line("Error Times", &|r| r.errors.to_string());
    line("Correct rate", &|r| format!("{:.0}%", 100.0 * r.correct_rate));
    line("Sweeps", &|r| r.sweeps.to_string());
    s
}
