//! MLP: `y = W3 · relu(W2 · relu(W1 · x + b1) + b2) + b3`.

use super::gemm::{add_bias, column_sums, linear, linear_backward, relu_in_place, relu_mask};
use super::{ParamSpec, Tensor, HIDDEN};
use crate::{FINGERS, INPUT_DIM};

pub(crate) fn specs() -> Vec<ParamSpec> {
    vec![
        ParamSpec::weight("w1", &[HIDDEN, INPUT_DIM], INPUT_DIM),
        ParamSpec::bias("b1", HIDDEN, INPUT_DIM),
        ParamSpec::weight("w2", &[HIDDEN, HIDDEN], HIDDEN),
        ParamSpec::bias("b2", HIDDEN, HIDDEN),
        ParamSpec::weight("w3", &[FINGERS, HIDDEN], HIDDEN),
        ParamSpec::bias("b3", FINGERS, HIDDEN),
    ]
}

pub(crate) struct Cache {
    a1: Vec<f64>,
    a2: Vec<f64>,
}

pub(crate) fn forward(p: &[Tensor], x: &[f64], b: usize) -> (Vec<f64>, Cache) {
    let mut a1 = linear(x, &p[0].data, b, INPUT_DIM, HIDDEN);
    add_bias(&mut a1, &p[1].data);
    relu_in_place(&mut a1);
    let mut a2 = linear(&a1, &p[2].data, b, HIDDEN, HIDDEN);
    add_bias(&mut a2, &p[3].data);
    relu_in_place(&mut a2);
    let mut y = linear(&a2, &p[4].data, b, HIDDEN, FINGERS);
    add_bias(&mut y, &p[5].data);
    (y, Cache { a1, a2 })
}

pub(crate) fn backward(p: &[Tensor], x: &[f64], b: usize, c: &Cache, dy: &[f64]) -> Vec<Vec<f64>> {
    let db3 = column_sums(dy, FINGERS);
    let (dw3, da2) = linear_backward(&c.a2, &p[4].data, dy, b, HIDDEN, FINGERS, true);
    let mut dz2 = da2.unwrap();
    relu_mask(&mut dz2, &c.a2);
    let db2 = column_sums(&dz2, HIDDEN);
    let (dw2, da1) = linear_backward(&c.a1, &p[2].data, &dz2, b, HIDDEN, HIDDEN, true);
    let mut dz1 = da1.unwrap();
    relu_mask(&mut dz1, &c.a1);
    let db1 = column_sums(&dz1, HIDDEN);
    let (dw1, _) = linear_backward(x, &p[0].data, &dz1, b, INPUT_DIM, HIDDEN, false);
    vec![dw1, db1, dw2, db2, dw3, db3]
}
