//! Naive single-sample forward passes written directly from the layer
//! equations (no GEMM, no im2col), plus a finite-difference gradient
//! checker built on them.

use rand::Rng;
use twopoint::models::{loss_and_grad, ModelCheckpoint, ModelKind, Tensor};

const IN: usize = 96;
const OUT: usize = 5;

fn t<'a>(p: &'a [Tensor], name: &str) -> &'a [f64] {
    &p.iter().find(|t| t.name == name).unwrap_or_else(|| panic!("no tensor {name}")).data
}

fn dense(w: &[f64], b: Option<&[f64]>, x: &[f64], out: usize) -> Vec<f64> {
    let inp = x.len();
    (0..out)
        .map(|o| {
            let mut s = b.map_or(0.0, |b| b[o]);
            for i in 0..inp {
                s += w[o * inp + i] * x[i];
            }
            s
        })
        .collect()
}

/// ReLU that records which units were active.
fn relu(v: &mut [f64], pattern: &mut Vec<u32>) {
    for x in v {
        pattern.push(u32::from(*x > 0.0));
        *x = x.max(0.0);
    }
}

/// 3x3 same-padded convolution over a `[cin][12][8]` image.
fn conv(k: &[f64], b: &[f64], img: &[f64], cin: usize, cout: usize) -> Vec<f64> {
    let (h, w) = (12usize, 8usize);
    let mut out = vec![0.0; cout * h * w];
    for co in 0..cout {
        for r in 0..h {
            for c in 0..w {
                let mut s = b[co];
                for ci in 0..cin {
                    for ki in 0..3 {
                        for kj in 0..3 {
                            let rr = r as i64 + ki as i64 - 1;
                            let cc = c as i64 + kj as i64 - 1;
                            if rr < 0 || rr >= h as i64 || cc < 0 || cc >= w as i64 {
                                continue;
                            }
                            s += k[((co * cin + ci) * 3 + ki) * 3 + kj]
                                * img[(ci * h + rr as usize) * w + cc as usize];
                        }
                    }
                }
                out[(co * h + r) * w + c] = s;
            }
        }
    }
    out
}

/// Output for one normalized input and the activation pattern (ReLU
/// states and pooling winners) that fixes the local linear region.
pub fn forward(kind: ModelKind, p: &[Tensor], x: &[f64]) -> (Vec<f64>, Vec<u32>) {
    assert_eq!(x.len(), IN);
    let mut pat = Vec::new();
    let y = match kind {
        ModelKind::Ln => {
            let h1 = dense(t(p, "w1"), None, x, 64);
            let h2 = dense(t(p, "w2"), None, &h1, 64);
            dense(t(p, "w3"), None, &h2, OUT)
        }
        ModelKind::Dd => {
            let c = dense(t(p, "w_in"), None, x, 64);
            let g = dense(t(p, "w_g"), None, &c, 64);
            let h: Vec<f64> = (0..64).map(|i| g[i] * c[i] + g[i]).collect();
            dense(t(p, "w_out"), None, &h, OUT)
        }
        ModelKind::Mlp => {
            let mut a1 = dense(t(p, "w1"), Some(t(p, "b1")), x, 64);
            relu(&mut a1, &mut pat);
            let mut a2 = dense(t(p, "w2"), Some(t(p, "b2")), &a1, 64);
            relu(&mut a2, &mut pat);
            dense(t(p, "w3"), Some(t(p, "b3")), &a2, OUT)
        }
        ModelKind::Cnn => {
            let mut a1 = conv(t(p, "conv1_w"), t(p, "conv1_b"), x, 1, 8);
            relu(&mut a1, &mut pat);
            let mut a2 = conv(t(p, "conv2_w"), t(p, "conv2_b"), &a1, 8, 16);
            relu(&mut a2, &mut pat);
            let mut flat = vec![0.0; 384];
            for co in 0..16 {
                for pi in 0..6 {
                    for pj in 0..4 {
                        let mut best = f64::NEG_INFINITY;
                        let mut at = 0;
                        for (q, (di, dj)) in [(0, 0), (0, 1), (1, 0), (1, 1)].into_iter().enumerate() {
                            let v = a2[(co * 12 + 2 * pi + di) * 8 + 2 * pj + dj];
                            if v > best {
                                best = v;
                                at = q as u32;
                            }
                        }
                        flat[co * 24 + pi * 4 + pj] = best;
                        pat.push(at);
                    }
                }
            }
            let mut a3 = dense(t(p, "fc1_w"), Some(t(p, "fc1_b")), &flat, 64);
            relu(&mut a3, &mut pat);
            dense(t(p, "fc2_w"), Some(t(p, "fc2_b")), &a3, OUT)
        }
    };
    (y, pat)
}

/// Mean squared error over `batch x 5` and the concatenated patterns.
pub fn loss(kind: ModelKind, p: &[Tensor], x: &[f64], y: &[f64]) -> (f64, Vec<u32>) {
    let batch = x.len() / IN;
    let mut sum = 0.0;
    let mut pat = Vec::new();
    for n in 0..batch {
        let (out, pt) = forward(kind, p, &x[n * IN..(n + 1) * IN]);
        pat.extend(pt);
        for j in 0..OUT {
            let e = out[j] - y[n * OUT + j];
            sum += e * e;
        }
    }
    (sum / (batch * OUT) as f64, pat)
}

/// Step for central differences on normalized inputs.
pub const FD_STEP: f64 = 1e-4;
/// Steps tried in order when a perturbation changes the activation pattern.
const KINK_RETRY_STEPS: [f64; 3] = [FD_STEP, 1e-5, 1e-6];
/// Allowed relative disagreement between analytic and numeric gradients.
pub const FD_REL_TOL: f64 = 1e-5;
/// Denominator floor so exactly-zero gradients compare absolutely.
pub const FD_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Default)]
pub struct GradCheck {
    pub checked: usize,
    /// Entries where every retry step still crossed a ReLU or pooling kink.
    pub skipped: usize,
    pub worst_rel: f64,
    pub failures: usize,
}

impl GradCheck {
    pub fn merge(&mut self, other: &GradCheck) {
        self.checked += other.checked;
        self.skipped += other.skipped;
        self.failures += other.failures;
        self.worst_rel = self.worst_rel.max(other.worst_rel);
    }
}

/// One random instance: seeded weights (biases randomized too), a batch of
/// 4 inputs in [0, 1] and targets in [-1, 1]. Checks up to `per_tensor`
/// sampled entries of every parameter tensor.
pub fn grad_check(kind: ModelKind, instance: u64, per_tensor: usize) -> GradCheck {
    let mut ckpt = ModelCheckpoint::init(kind, 1000 + instance);
    let mut rng = twopoint::seed::rng(instance, &[77]);
    for tensor in &mut ckpt.params {
        if tensor.shape.len() == 1 {
            for v in &mut tensor.data {
                *v = rng.random_range(-0.1..0.1);
            }
        }
    }
    let batch = 4;
    let x: Vec<f64> = (0..batch * IN).map(|_| rng.random_range(0.0..1.0)).collect();
    let y: Vec<f64> = (0..batch * OUT).map(|_| rng.random_range(-1.0..1.0)).collect();

    let (_, grads) = loss_and_grad(kind, &ckpt.params, &x, &y, batch).unwrap();
    let (_, base_pat) = loss(kind, &ckpt.params, &x, &y);
    let mut report = GradCheck::default();
    let mut params = ckpt.params.clone();
    for ti in 0..params.len() {
        let len = params[ti].data.len();
        let picks: Vec<usize> = if len <= per_tensor {
            (0..len).collect()
        } else {
            (0..per_tensor).map(|_| rng.random_range(0..len)).collect()
        };
        for i in picks {
            let analytic = grads[ti][i];
            let orig = params[ti].data[i];
            // A step that crosses a kink is retried smaller; the loss is
            // piecewise polynomial, so any kink-free step is a valid probe.
            let mut outcome = None;
            for h in KINK_RETRY_STEPS {
                params[ti].data[i] = orig + h;
                let (lp, pp) = loss(kind, &params, &x, &y);
                params[ti].data[i] = orig - h;
                let (lm, pm) = loss(kind, &params, &x, &y);
                params[ti].data[i] = orig;
                if pp == base_pat && pm == base_pat {
                    outcome = Some((lp - lm) / (2.0 * h));
                    break;
                }
            }
            let Some(numeric) = outcome else {
                report.skipped += 1;
                continue;
            };
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FD_FLOOR);
            report.checked += 1;
            report.worst_rel = report.worst_rel.max(rel);
            if rel > FD_REL_TOL {
                report.failures += 1;
            }
        }
    }
    report
}
