//! Finite-difference curvature oracle.
//!
//! Works from a closure returning the flattened Christoffel array
//! `g[(i*n + j)*n + k] = G^i_{jk}(x)` and never touches the polynomial
//! machinery, so agreement with the analytic pipeline is a real cross-check.

#![allow(dead_code)]

use projcone::ChartConnection;

pub type Field<'a> = dyn Fn(&[f64]) -> Vec<f64> + 'a;

pub const FD_STEP: f64 = 1e-3;

/// Five-point central derivative of every component of `f` along `axis`.
pub fn d(f: &Field, x: &[f64], axis: usize) -> Vec<f64> {
    let at = |s: f64| {
        let mut y = x.to_vec();
        y[axis] += s * FD_STEP;
        f(&y)
    };
    let (m2, m1, p1, p2) = (at(-2.0), at(-1.0), at(1.0), at(2.0));
    (0..m1.len())
        .map(|c| (m2[c] - 8.0 * m1[c] + 8.0 * p1[c] - p2[c]) / (12.0 * FD_STEP))
        .collect()
}

pub fn idx3(n: usize, i: usize, j: usize, k: usize) -> usize {
    (i * n + j) * n + k
}

/// `R^i_{ljk}` flattened as `[i, l, j, k]`.
pub fn riemann(gamma: &Field, n: usize, x: &[f64]) -> Vec<f64> {
    let g = gamma(x);
    let dg: Vec<Vec<f64>> = (0..n).map(|a| d(gamma, x, a)).collect();
    let mut r = vec![0.0; n * n * n * n];
    for i in 0..n {
        for l in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut v = dg[j][idx3(n, i, k, l)] - dg[k][idx3(n, i, j, l)];
                    for m in 0..n {
                        v += g[idx3(n, i, j, m)] * g[idx3(n, m, k, l)]
                            - g[idx3(n, i, k, m)] * g[idx3(n, m, j, l)];
                    }
                    r[((i * n + l) * n + j) * n + k] = v;
                }
            }
        }
    }
    r
}

/// `Ric_{jk} = sum_i R^i_{jik}`, flattened as `[j, k]`.
pub fn ricci(gamma: &Field, n: usize, x: &[f64]) -> Vec<f64> {
    let r = riemann(gamma, n, x);
    let mut out = vec![0.0; n * n];
    for j in 0..n {
        for k in 0..n {
            out[j * n + k] = (0..n).map(|i| r[((i * n + j) * n + i) * n + k]).sum();
        }
    }
    out
}

/// Trace-free symbols `G - (d tr + tr d) / (n+1)` as a new closure.
pub fn thomas<'a>(gamma: &'a Field<'a>, n: usize) -> impl Fn(&[f64]) -> Vec<f64> + 'a {
    move |x: &[f64]| {
        let g = gamma(x);
        let tr: Vec<f64> = (0..n)
            .map(|k| (0..n).map(|l| g[idx3(n, l, l, k)]).sum())
            .collect();
        let mut out = g.clone();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut s = 0.0;
                    if i == j {
                        s += tr[k];
                    }
                    if i == k {
                        s += tr[j];
                    }
                    out[idx3(n, i, j, k)] -= s / (n as f64 + 1.0);
                }
            }
        }
        out
    }
}

/// `C_{jk;l}` of the trace-free symbols `pi`, flattened as `[j, k, l]`.
pub fn cotton(pi: &Field, n: usize, x: &[f64]) -> Vec<f64> {
    let g = pi(x);
    let ric = ricci(pi, n, x);
    let ric_field = |y: &[f64]| ricci(pi, n, y);
    let dric: Vec<Vec<f64>> = (0..n).map(|a| d(&ric_field, x, a)).collect();
    // (nabla_i Ric)_{jk}
    let nabla = |i: usize, j: usize, k: usize| {
        let mut v = dric[i][j * n + k];
        for m in 0..n {
            v -= g[idx3(n, m, i, j)] * ric[m * n + k] + g[idx3(n, m, i, k)] * ric[j * n + m];
        }
        v
    };
    let mut out = vec![0.0; n * n * n];
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                out[(j * n + k) * n + l] = nabla(j, k, l) - nabla(k, j, l);
            }
        }
    }
    out
}

/// Closure view of a polynomial connection (evaluation only).
pub fn as_field(c: &ChartConnection) -> impl Fn(&[f64]) -> Vec<f64> + '_ {
    move |x: &[f64]| c.gamma_at(x)
}

/// The non-flat demo written out by hand: `G^1_{22} = x1^2`.
pub fn demo_field(x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; 8];
    g[idx3(2, 0, 1, 1)] = x[0] * x[0];
    g
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
