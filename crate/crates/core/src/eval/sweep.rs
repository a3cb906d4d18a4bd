use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use super::{fit_verdict, EvalError, FitThresholds, FitVerdict};
use crate::models::ModelCheckpoint;
use crate::pipeline::{window_features, PreparedRecord};
use crate::synth::Finger;
use crate::{Error, FINGERS};

/// Positive scale magnitudes, strictly increasing. The sweep runs each
/// magnitude toward +s on flexion windows and -s on extension windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ScaleGrid(Vec<f64>);

impl ScaleGrid {
    pub fn new(values: Vec<f64>) -> Result<Self, EvalError> {
        let ok = !values.is_empty()
            && values.iter().all(|v| v.is_finite() && *v > 0.0)
            && values.windows(2).all(|w| w[0] < w[1]);
        if !ok {
            return Err(EvalError::BadGrid(format!("{values:?}")));
        }
        Ok(Self(values))
    }

    /// `start + i*step` for every point up to `stop` (inclusive, with a
    /// small tolerance so decimal steps land on the end point).
    pub fn range(start: f64, stop: f64, step: f64) -> Result<Self, EvalError> {
        if !(step > 0.0 && start > 0.0 && stop >= start) {
            return Err(EvalError::BadGrid(format!("{start}:{stop}:{step}")));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
        // rounding to 12 decimals makes 0.1 + 2 * 0.1 print as 0.3
        Self::new(
            (0..n)
                .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
                .collect(),
        )
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.0
    }

    /// The combined grid: `-m_k, ..., -m_1, m_1, ..., m_k`.
    pub fn signed(&self) -> Vec<f64> {
        self.0.iter().rev().map(|m| -m).chain(self.0.iter().copied()).collect()
    }
}

impl Default for ScaleGrid {
    fn default() -> Self {
        Self::range(0.1, 1.0, 0.1).expect("default grid is valid")
    }
}

impl TryFrom<Vec<f64>> for ScaleGrid {
    type Error = EvalError;

    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<ScaleGrid> for Vec<f64> {
    fn from(g: ScaleGrid) -> Self {
        g.0
    }
}

impl fmt::Display for ScaleGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(f64::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Accepts `start:stop:step` or a comma-separated list.
impl FromStr for ScaleGrid {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || EvalError::BadGrid(s.to_string());
        let nums = |sep: char| -> Result<Vec<f64>, EvalError> {
            s.split(sep).map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect()
        };
        if s.contains(':') {
            match nums(':')?.as_slice() {
                [a, b, c] => Self::range(*a, *b, *c),
                _ => Err(bad()),
            }
        } else {
            Self::new(nums(',')?)
        }
    }
}

/// Mean decoded label of one finger against signed scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCurve {
    pub finger: Finger,
    /// Strictly increasing signed scales (extension side negative).
    pub grid: Vec<f64>,
    pub outputs: Vec<f64>,
    pub flexion_windows: usize,
    pub extension_windows: usize,
}

impl SweepCurve {
    pub fn verdict(&self, thresholds: FitThresholds) -> Result<FitVerdict, EvalError> {
        fit_verdict(&self.grid, &self.outputs, thresholds)
    }
}

/// Scales the rectified test windows by each grid magnitude, re-extracts
/// features and averages the model output per finger over the windows
/// whose label for that finger is +1 (flexion, plotted at +s) or -1
/// (extension, plotted at -s).
pub fn interpolation_sweep(
    ckpt: &ModelCheckpoint,
    test: &[&PreparedRecord],
    grid: &ScaleGrid,
) -> Result<Vec<SweepCurve>, Error> {
    // sums[m][record] = (sum of outputs, window count)
    let mut sums = Vec::with_capacity(grid.0.len());
    for &m in &grid.0 {
        let mut per_record = Vec::with_capacity(test.len());
        for rec in test {
            let feats = window_features(&rec.rectified, m)?;
            let mut acc = [0.0; FINGERS];
            for w in &feats {
                for (a, y) in acc.iter_mut().zip(ckpt.predict(w)) {
                    *a += y;
                }
            }
            per_record.push((acc, feats.len()));
        }
        sums.push(per_record);
    }
    Finger::ALL
        .iter()
        .map(|&finger| {
            let j = finger.index();
            let side = |positive: bool| -> (Vec<f64>, usize) {
                let mut count = 0;
                let means = sums
                    .iter()
                    .map(|per_record| {
                        let (mut s, mut n) = (0.0, 0);
                        for (rec, (acc, len)) in test.iter().zip(per_record) {
                            if (rec.labels[j] > 0.0) == positive {
                                s += acc[j];
                                n += len;
                            }
                        }
                        count = n;
                        s / n as f64
                    })
                    .collect();
                (means, count)
            };
            let (flex, flexion_windows) = side(true);
            let (ext, extension_windows) = side(false);
            if flexion_windows == 0 || extension_windows == 0 {
                return Err(EvalError::DegenerateFinger(j).into());
            }
            Ok(SweepCurve {
                finger,
                grid: grid.signed(),
                outputs: ext.into_iter().rev().chain(flex).collect(),
                flexion_windows,
                extension_windows,
            })
        })
        .collect()
}
