//! CNN over the 12 x 8 feature image (rows = channels, columns = features):
//!
//! ```text
//! conv 3x3 pad 1, 1 -> 8   -> relu
//! conv 3x3 pad 1, 8 -> 16  -> relu
//! maxpool 2x2              -> 6 x 4 x 16 = 384
//! dense 384 -> 64          -> relu
//! dense 64 -> 5
//! ```
//!
//! Activations are kept position-major (`batch x 96 x channels`) so both
//! convolutions become a single im2col GEMM.

use super::gemm::{add_bias, column_sums, linear, linear_backward, relu_in_place, relu_mask};
use super::{ParamSpec, Tensor};
use crate::{CHANNELS, FEATURES_PER_CHANNEL, FINGERS};

const H: usize = CHANNELS;
const W: usize = FEATURES_PER_CHANNEL;
const POS: usize = H * W;
const PH: usize = H / 2;
const PW: usize = W / 2;
pub(crate) const C1: usize = 8;
pub(crate) const C2: usize = 16;
pub(crate) const FLAT: usize = PH * PW * C2;
pub(crate) const FC: usize = 64;

pub(crate) fn specs() -> Vec<ParamSpec> {
    vec![
        ParamSpec::weight("conv1_w", &[C1, 1, 3, 3], 9),
        ParamSpec::bias("conv1_b", C1, 9),
        ParamSpec::weight("conv2_w", &[C2, C1, 3, 3], C1 * 9),
        ParamSpec::bias("conv2_b", C2, C1 * 9),
        ParamSpec::weight("fc1_w", &[FC, FLAT], FLAT),
        ParamSpec::bias("fc1_b", FC, FLAT),
        ParamSpec::weight("fc2_w", &[FINGERS, FC], FC),
        ParamSpec::bias("fc2_b", FINGERS, FC),
    ]
}

/// 3x3, zero-padded patches: `(batch * 96) x (9 * cin)`, column index
/// `(ki * 3 + kj) * cin + ci`.
fn im2col(input: &[f64], b: usize, cin: usize) -> Vec<f64> {
    let k = cin * 9;
    let mut cols = vec![0.0; b * POS * k];
    for n in 0..b {
        for i in 0..H {
            for j in 0..W {
                let row = &mut cols[((n * POS) + i * W + j) * k..][..k];
                for ki in 0..3 {
                    let Some(si) = (i + ki).checked_sub(1).filter(|&s| s < H) else {
                        continue;
                    };
                    for kj in 0..3 {
                        let Some(sj) = (j + kj).checked_sub(1).filter(|&s| s < W) else {
                            continue;
                        };
                        row[(ki * 3 + kj) * cin..][..cin].copy_from_slice(&input[(n * POS + si * W + sj) * cin..][..cin]);
                    }
                }
            }
        }
    }
    cols
}

/// Scatter-adds patch gradients back onto the `batch x 96 x cin` input.
fn col2im(dcols: &[f64], b: usize, cin: usize) -> Vec<f64> {
    let k = cin * 9;
    let mut dx = vec![0.0; b * POS * cin];
    for n in 0..b {
        for i in 0..H {
            for j in 0..W {
                let row = &dcols[((n * POS) + i * W + j) * k..][..k];
                for ki in 0..3 {
                    let Some(si) = (i + ki).checked_sub(1).filter(|&s| s < H) else {
                        continue;
                    };
                    for kj in 0..3 {
                        let Some(sj) = (j + kj).checked_sub(1).filter(|&s| s < W) else {
                            continue;
                        };
                        let dst = &mut dx[(n * POS + si * W + sj) * cin..][..cin];
                        for (d, g) in dst.iter_mut().zip(&row[(ki * 3 + kj) * cin..][..cin]) {
                            *d += g;
                        }
                    }
                }
            }
        }
    }
    dx
}

/// `[cout, cin, 3, 3]` kernel to the `[cout, 3, 3, cin]` patch layout.
fn kernel_to_patch(w: &[f64], cin: usize) -> Vec<f64> {
    let mut out = vec![0.0; w.len()];
    for (o, src) in w.chunks_exact(cin * 9).enumerate() {
        let dst = &mut out[o * cin * 9..][..cin * 9];
        for ci in 0..cin {
            for t in 0..9 {
                dst[t * cin + ci] = src[ci * 9 + t];
            }
        }
    }
    out
}

/// Inverse of `kernel_to_patch`.
fn patch_to_kernel(w: &[f64], cin: usize) -> Vec<f64> {
    let mut out = vec![0.0; w.len()];
    for (o, src) in w.chunks_exact(cin * 9).enumerate() {
        let dst = &mut out[o * cin * 9..][..cin * 9];
        for ci in 0..cin {
            for t in 0..9 {
                dst[ci * 9 + t] = src[t * cin + ci];
            }
        }
    }
    out
}

pub(crate) struct Cache {
    cols1: Vec<f64>,
    a1: Vec<f64>,
    cols2: Vec<f64>,
    a2: Vec<f64>,
    /// Grid position of each pooled maximum, per (sample, flat index).
    argmax: Vec<usize>,
    flat: Vec<f64>,
    a3: Vec<f64>,
}

pub(crate) fn forward(p: &[Tensor], x: &[f64], b: usize) -> (Vec<f64>, Cache) {
    let cols1 = im2col(x, b, 1);
    let mut a1 = linear(&cols1, &p[0].data, b * POS, 9, C1);
    add_bias(&mut a1, &p[1].data);
    relu_in_place(&mut a1);

    let cols2 = im2col(&a1, b, C1);
    let mut a2 = linear(&cols2, &kernel_to_patch(&p[2].data, C1), b * POS, C1 * 9, C2);
    add_bias(&mut a2, &p[3].data);
    relu_in_place(&mut a2);

    let mut flat = vec![0.0; b * FLAT];
    let mut argmax = vec![0; b * FLAT];
    for n in 0..b {
        for c in 0..C2 {
            for pi in 0..PH {
                for pj in 0..PW {
                    let mut best = f64::NEG_INFINITY;
                    let mut at = 0;
                    for (di, dj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                        let pos = (2 * pi + di) * W + 2 * pj + dj;
                        let v = a2[(n * POS + pos) * C2 + c];
                        if v > best {
                            best = v;
                            at = pos;
                        }
                    }
                    let f = n * FLAT + c * PH * PW + pi * PW + pj;
                    flat[f] = best;
                    argmax[f] = at;
                }
            }
        }
    }

    let mut a3 = linear(&flat, &p[4].data, b, FLAT, FC);
    add_bias(&mut a3, &p[5].data);
    relu_in_place(&mut a3);
    let mut y = linear(&a3, &p[6].data, b, FC, FINGERS);
    add_bias(&mut y, &p[7].data);
    (
        y,
        Cache {
            cols1,
            a1,
            cols2,
            a2,
            argmax,
            flat,
            a3,
        },
    )
}

pub(crate) fn backward(p: &[Tensor], _x: &[f64], b: usize, c: &Cache, dy: &[f64]) -> Vec<Vec<f64>> {
    let db4 = column_sums(dy, FINGERS);
    let (dw4, da3) = linear_backward(&c.a3, &p[6].data, dy, b, FC, FINGERS, true);
    let mut dz3 = da3.unwrap();
    relu_mask(&mut dz3, &c.a3);
    let db3 = column_sums(&dz3, FC);
    let (dw3, dflat) = linear_backward(&c.flat, &p[4].data, &dz3, b, FLAT, FC, true);
    let dflat = dflat.unwrap();

    let mut dz2 = vec![0.0; b * POS * C2];
    for n in 0..b {
        for ch in 0..C2 {
            for q in 0..PH * PW {
                let f = n * FLAT + ch * PH * PW + q;
                dz2[(n * POS + c.argmax[f]) * C2 + ch] += dflat[f];
            }
        }
    }
    relu_mask(&mut dz2, &c.a2);
    let db2 = column_sums(&dz2, C2);
    let (dk2, dcols2) = linear_backward(&c.cols2, &kernel_to_patch(&p[2].data, C1), &dz2, b * POS, C1 * 9, C2, true);
    let dk2 = patch_to_kernel(&dk2, C1);
    let mut dz1 = col2im(&dcols2.unwrap(), b, C1);
    relu_mask(&mut dz1, &c.a1);
    let db1 = column_sums(&dz1, C1);
    let (dk1, _) = linear_backward(&c.cols1, &p[0].data, &dz1, b * POS, 9, C1, false);
    vec![dk1, db1, dk2, db2, dw3, db3, dw4, db4]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn col2im_is_adjoint_of_im2col() {
        // <im2col(x), d> == <x, col2im(d)>
        let b = 2;
        let cin = 3;
        let x: Vec<f64> = (0..b * POS * cin).map(|i| (i as f64 * 0.13).sin()).collect();
        let d: Vec<f64> = (0..b * POS * cin * 9).map(|i| (i as f64 * 0.29).cos()).collect();
        let lhs: f64 = im2col(&x, b, cin).iter().zip(&d).map(|(a, b)| a * b).sum();
        let rhs: f64 = x.iter().zip(col2im(&d, b, cin)).map(|(a, b)| a * b).sum();
        assert!((lhs - rhs).abs() < 1e-9 * lhs.abs().max(1.0));
    }

    #[test]
    fn kernel_layouts_round_trip() {
        let w: Vec<f64> = (0..C2 * C1 * 9).map(|i| i as f64).collect();
        let p = kernel_to_patch(&w, C1);
        // output 1, input 2, tap (0, 1)
        assert_eq!(p[C1 * 9 + C1 + 2], w[C1 * 9 + 2 * 9 + 1]);
        assert_eq!(patch_to_kernel(&p, C1), w);
    }

    #[test]
    fn flat_size() {
        assert_eq!(FLAT, 384);
    }
}
