//! Independent oracles shared by the integration tests. Everything here is
//! dense and slow on purpose: it must not reuse the library's shortcuts.

#![allow(dead_code)]

use milac::linalg::{CMatrix, C64};
use nalgebra::DMatrix;

/// Column-major `vec(m)`.
pub fn vectorize(m: &CMatrix) -> CMatrix {
    CMatrix::from_column_slice(m.len(), 1, m.as_slice())
}

pub fn unvectorize(v: &CMatrix, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            out.view_mut((i * br, j * bc), (br, bc))
                .copy_from(&(b * a[(i, j)]));
        }
    }
    out
}

/// Dense linear MMSE estimate of `H_v` from `Y_v = H_v X_v + N`:
/// `vec(H_v) = R_v W^H (W R_v W^H + sigma^2 I)^{-1} vec(Y_v)`, `W = X_v^T ⊗ I`.
pub fn dense_mmse_estimate(y_v: &CMatrix, x_v: &CMatrix, r_v: &[f64], sigma2: f64) -> CMatrix {
    let n_rx = y_v.nrows();
    let n_tx = x_v.nrows();
    let w = kron(&x_v.transpose(), &CMatrix::identity(n_rx, n_rx));
    let r = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        r_v.len(),
        r_v.iter().map(|&v| C64::new(v, 0.0)),
    ));
    let wh = w.adjoint();
    let k = w.nrows();
    let gram = &w * &r * &wh + CMatrix::identity(k, k) * C64::new(sigma2, 0.0);
    let inv = gram
        .try_inverse()
        .expect("regularized Gram matrix is invertible");
    let est = &r * &wh * inv * vectorize(y_v);
    unvectorize(&est, n_rx, n_tx)
}

/// `tr(R_v - R_v W^H (W R_v W^H + sigma^2 I)^{-1} W R_v)` for the same model.
pub fn dense_mmse_trace(x_v: &CMatrix, r_v: &[f64], sigma2: f64, n_rx: usize) -> f64 {
    let w = kron(&x_v.transpose(), &CMatrix::identity(n_rx, n_rx));
    let r = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        r_v.len(),
        r_v.iter().map(|&v| C64::new(v, 0.0)),
    ));
    let k = w.nrows();
    let gram = &w * &r * w.adjoint() + CMatrix::identity(k, k) * C64::new(sigma2, 0.0);
    let inv = gram
        .try_inverse()
        .expect("regularized Gram matrix is invertible");
    let cov = &r - &r * w.adjoint() * inv * &w * &r;
    cov.trace().re
}

/// Golden-section minimum of a unimodal function on `[lo, hi]`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, width: f64) -> (f64, f64) {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - phi * (hi - lo);
    let mut b = lo + phi * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > width {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - phi * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + phi * (hi - lo);
            fb = f(b);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// `sum_t sum_j sigma^2 r / (sigma^2 + p_t r)`, evaluated directly.
pub fn allocation_objective(r_v: &[f64], p: &[f64], sigma2: f64, n_rx: usize) -> f64 {
    let mut total = 0.0;
    for (k, &r) in r_v.iter().enumerate() {
        let pt = p[k / n_rx];
        total += sigma2 * r / (sigma2 + pt * r);
    }
    total
}

/// Brute-force two-direction allocation: minimizes over `p_1 in [0, P]`, `p_2 = P - p_1`.
pub fn brute_force_two_directions(r_v: &[f64], sigma2: f64, p_total: f64, n_rx: usize) -> f64 {
    let f = |p1: f64| allocation_objective(r_v, &[p1, p_total - p1], sigma2, n_rx);
    let (_, best) = golden_section(f, 0.0, p_total, 1e-13 * p_total);
    best.min(f(0.0)).min(f(p_total))
}

pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
