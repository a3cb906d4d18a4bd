//! One-layer dendritic net (DD):
//!
//! ```text
//! C = W_in · x        (64)
//! G = W_g · C         (64, the gate)
//! H = G ∘ C + G       (∘ elementwise)
//! y = W_out · H       (5)
//! ```
//!
//! No biases, no activations, so `y(a·x) = a²·q + a·l` exactly.

use super::gemm::{linear, linear_backward};
use super::{ParamSpec, Tensor, HIDDEN};
use crate::{FINGERS, INPUT_DIM};

pub(crate) fn specs() -> Vec<ParamSpec> {
    vec![
        ParamSpec::weight("w_in", &[HIDDEN, INPUT_DIM], INPUT_DIM),
        ParamSpec::weight("w_g", &[HIDDEN, HIDDEN], HIDDEN),
        ParamSpec::weight("w_out", &[FINGERS, HIDDEN], HIDDEN),
    ]
}

pub(crate) struct Cache {
    c: Vec<f64>,
    g: Vec<f64>,
    h: Vec<f64>,
}

pub(crate) fn forward(p: &[Tensor], x: &[f64], b: usize) -> (Vec<f64>, Cache) {
    let c = linear(x, &p[0].data, b, INPUT_DIM, HIDDEN);
    let g = linear(&c, &p[1].data, b, HIDDEN, HIDDEN);
    let h: Vec<f64> = g.iter().zip(&c).map(|(g, c)| g * c + g).collect();
    let y = linear(&h, &p[2].data, b, HIDDEN, FINGERS);
    (y, Cache { c, g, h })
}

pub(crate) fn backward(p: &[Tensor], x: &[f64], b: usize, k: &Cache, dy: &[f64]) -> Vec<Vec<f64>> {
    let (dw_out, dh) = linear_backward(&k.h, &p[2].data, dy, b, HIDDEN, FINGERS, true);
    let dh = dh.unwrap();
    // H = G ∘ (C + 1)
    let dg: Vec<f64> = dh.iter().zip(&k.c).map(|(d, c)| d * (c + 1.0)).collect();
    let (dw_g, dc_gate) = linear_backward(&k.c, &p[1].data, &dg, b, HIDDEN, HIDDEN, true);
    let dc: Vec<f64> = dc_gate
        .unwrap()
        .iter()
        .zip(dh.iter().zip(&k.g))
        .map(|(via_gate, (d, g))| via_gate + d * g)
        .collect();
    let (dw_in, _) = linear_backward(x, &p[0].data, &dc, b, INPUT_DIM, HIDDEN, false);
    vec![dw_in, dw_g, dw_out]
}
