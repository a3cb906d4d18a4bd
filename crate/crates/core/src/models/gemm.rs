//! Safe row-major wrapper over `matrixmultiply::dgemm`.

/// `C = op(A) · op(B) + beta · C` with every matrix row-major.
///
/// `op(A)` is `m x k` and `op(B)` is `k x n`. With `ta` set, `a` holds
/// the `k x m` matrix and is read transposed (likewise `tb` for `b`).
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f64],
    ta: bool,
    b: &[f64],
    tb: bool,
    beta: f64,
    c: &mut [f64],
) {
    assert!(a.len() >= m * k, "gemm: A too small");
    assert!(b.len() >= k * n, "gemm: B too small");
    assert!(c.len() >= m * n, "gemm: C too small");
    if m == 0 || n == 0 {
        return;
    }
    let (rsa, csa) = if ta { (1, m) } else { (k, 1) };
    let (rsb, csb) = if tb { (1, k) } else { (n, 1) };
    // SAFETY: the asserts above bound every index dgemm touches:
    // op(A)[i][p] lives at i*rsa + p*csa < m*k, op(B)[p][j] at
    // p*rsb + j*csb < k*n, and C[i][j] at i*n + j < m*n.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa as isize,
            csa as isize,
            b.as_ptr(),
            rsb as isize,
            csb as isize,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

/// `Y = X · Wᵀ` for a batch: `x` is `batch x inp`, `w` is `out x inp`.
pub(crate) fn linear(x: &[f64], w: &[f64], batch: usize, inp: usize, out: usize) -> Vec<f64> {
    let mut y = vec![0.0; batch * out];
    gemm(batch, inp, out, x, false, w, true, 0.0, &mut y);
    y
}

/// Backward of `linear`: returns `dW = dYᵀ · X` and, when asked, `dX = dY · W`.
pub(crate) fn linear_backward(
    x: &[f64],
    w: &[f64],
    dy: &[f64],
    batch: usize,
    inp: usize,
    out: usize,
    want_dx: bool,
) -> (Vec<f64>, Option<Vec<f64>>) {
    let mut dw = vec![0.0; out * inp];
    gemm(out, batch, inp, dy, true, x, false, 0.0, &mut dw);
    let dx = want_dx.then(|| {
        let mut dx = vec![0.0; batch * inp];
        gemm(batch, out, inp, dy, false, w, false, 0.0, &mut dx);
        dx
    });
    (dw, dx)
}

pub(crate) fn add_bias(y: &mut [f64], bias: &[f64]) {
    for row in y.chunks_exact_mut(bias.len()) {
        for (v, b) in row.iter_mut().zip(bias) {
            *v += b;
        }
    }
}

/// Column sums of a `rows x width` matrix (the bias gradient).
pub(crate) fn column_sums(dy: &[f64], width: usize) -> Vec<f64> {
    let mut s = vec![0.0; width];
    for row in dy.chunks_exact(width) {
        for (acc, v) in s.iter_mut().zip(row) {
            *acc += v;
        }
    }
    s
}

pub(crate) fn relu_in_place(z: &mut [f64]) {
    for v in z {
        if *v <= 0.0 {
            *v = 0.0;
        }
    }
}

/// Zeroes `d` wherever the activation `a = relu(z)` is not positive.
pub(crate) fn relu_mask(d: &mut [f64], a: &[f64]) {
    for (g, &v) in d.iter_mut().zip(a) {
        if v <= 0.0 {
            *g = 0.0;
        }
    }
}
