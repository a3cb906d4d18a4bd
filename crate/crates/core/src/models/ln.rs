//! LN: three bias-free linear maps, `y = W3 · W2 · W1 · x`.

use super::gemm::{linear, linear_backward};
use super::{ParamSpec, Tensor, HIDDEN};
use crate::{FINGERS, INPUT_DIM};

pub(crate) fn specs() -> Vec<ParamSpec> {
    vec![
        ParamSpec::weight("w1", &[HIDDEN, INPUT_DIM], INPUT_DIM),
        ParamSpec::weight("w2", &[HIDDEN, HIDDEN], HIDDEN),
        ParamSpec::weight("w3", &[FINGERS, HIDDEN], HIDDEN),
    ]
}

pub(crate) struct Cache {
    h1: Vec<f64>,
    h2: Vec<f64>,
}

pub(crate) fn forward(p: &[Tensor], x: &[f64], b: usize) -> (Vec<f64>, Cache) {
    let h1 = linear(x, &p[0].data, b, INPUT_DIM, HIDDEN);
    let h2 = linear(&h1, &p[1].data, b, HIDDEN, HIDDEN);
    let y = linear(&h2, &p[2].data, b, HIDDEN, FINGERS);
    (y, Cache { h1, h2 })
}

pub(crate) fn backward(p: &[Tensor], x: &[f64], b: usize, c: &Cache, dy: &[f64]) -> Vec<Vec<f64>> {
    let (dw3, dh2) = linear_backward(&c.h2, &p[2].data, dy, b, HIDDEN, FINGERS, true);
    let (dw2, dh1) = linear_backward(&c.h1, &p[1].data, &dh2.unwrap(), b, HIDDEN, HIDDEN, true);
    let (dw1, _) = linear_backward(x, &p[0].data, &dh1.unwrap(), b, INPUT_DIM, HIDDEN, false);
    vec![dw1, dw2, dw3]
}
