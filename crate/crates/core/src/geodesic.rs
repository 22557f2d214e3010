//! Geodesic integration: the classical second-order system of a chart
//! connection and the first-order system of the cone connection, both with
//! fixed-step classic RK4.

use std::fmt::Write as _;

use crate::chart::ChartConnection;
use crate::cone::ConeConnection;
use crate::error::{Error, Result};

pub const RK4_ORDER: u32 = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct GeodesicTrace {
    pub params: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    /// Cone fiber coordinates `s^0..s^n`; `None` for classical traces.
    pub fibers: Option<Vec<Vec<f64>>>,
    pub step: f64,
    pub order: u32,
    /// Integration stopped because the next sample left the domain.
    pub truncated: bool,
}

impl GeodesicTrace {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Length of the polyline through the samples.
    pub fn arc_length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| {
                w[0].iter()
                    .zip(&w[1])
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .sum()
    }

    /// Metadata comment line, column header, then one row per sample.
    pub fn to_csv(&self) -> String {
        let n = self.points.first().map_or(0, Vec::len);
        let mut out = String::new();
        let kind = if self.fibers.is_some() {
            "rho"
        } else {
            "classical"
        };
        let _ = writeln!(
            out,
            "# integrator=rk4 order={} kind={kind} step={} samples={} truncated={}",
            self.order,
            self.step,
            self.len(),
            self.truncated
        );
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("x{i}")));
        if self.fibers.is_some() {
            header.extend((0..=n).map(|a| format!("s{a}")));
        }
        let _ = writeln!(out, "{}", header.join(","));
        for (m, (t, x)) in self.params.iter().zip(&self.points).enumerate() {
            let mut row = vec![t.to_string()];
            row.extend(x.iter().map(f64::to_string));
            if let Some(f) = &self.fibers {
                row.extend(f[m].iter().map(f64::to_string));
            }
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

fn rk4_step<F>(y: &[f64], h: f64, f: &F) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let shifted =
        |k: &[f64], a: f64| -> Vec<f64> { y.iter().zip(k).map(|(yi, ki)| yi + a * ki).collect() };
    let k1 = f(y);
    let k2 = f(&shifted(&k1, 0.5 * h));
    let k3 = f(&shifted(&k2, 0.5 * h));
    let k4 = f(&shifted(&k3, h));
    (0..y.len())
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

fn check_launch(c_dim: usize, x0: &[f64], h: f64, in_domain: bool) -> Result<()> {
    if x0.len() != c_dim {
        return Err(Error::DimensionMismatch {
            expected: c_dim,
            found: x0.len(),
        });
    }
    if !in_domain {
        return Err(Error::invalid(format!(
            "start point {x0:?} is outside the domain"
        )));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid("step size must be positive"));
    }
    Ok(())
}

/// `x'' + G(x)(x', x') = 0` from `(x0, v0)`, at most `steps` RK4 steps.
pub fn geodesic_classical(
    c: &ChartConnection,
    x0: &[f64],
    v0: &[f64],
    h: f64,
    steps: usize,
) -> Result<GeodesicTrace> {
    let n = c.dim();
    check_launch(n, x0, h, c.domain().contains(x0))?;
    if v0.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: v0.len(),
        });
    }
    if v0.iter().all(|v| *v == 0.0) {
        return Err(Error::invalid("initial velocity must be nonzero"));
    }
    let rhs = |y: &[f64]| -> Vec<f64> {
        let (x, v) = y.split_at(n);
        let g = c.gamma_at(x);
        let mut dy = v.to_vec();
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                for k in 0..n {
                    acc += g[(i * n + j) * n + k] * v[j] * v[k];
                }
            }
            dy.push(-acc);
        }
        dy
    };
    let mut y: Vec<f64> = x0.iter().chain(v0).copied().collect();
    let mut trace = GeodesicTrace {
        params: vec![0.0],
        points: vec![x0.to_vec()],
        fibers: None,
        step: h,
        order: RK4_ORDER,
        truncated: false,
    };
    for m in 1..=steps {
        let next = rk4_step(&y, h, &rhs);
        if !c.domain().contains(&next[..n]) || next.iter().any(|v| !v.is_finite()) {
            trace.truncated = true;
            break;
        }
        trace.params.push(m as f64 * h);
        trace.points.push(next[..n].to_vec());
        y = next;
    }
    Ok(trace)
}

/// Cone geodesic: `x^i' = s^i`, `s^A' + G^A_{BC} s^B s^C = 0`, with fiber
/// coordinates `s = (s^0, s^1..s^n)`.
pub fn geodesic_rho(
    k: &ConeConnection,
    x0: &[f64],
    s0: &[f64],
    h: f64,
    steps: usize,
) -> Result<GeodesicTrace> {
    let n = k.dim();
    let m = n + 1;
    check_launch(n, x0, h, k.domain().contains(x0))?;
    if s0.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: s0.len(),
        });
    }
    if s0[1..].iter().all(|v| *v == 0.0) {
        return Err(Error::invalid(
            "fiber vector needs a nonzero horizontal part",
        ));
    }
    let rhs = |y: &[f64]| -> Vec<f64> {
        let (x, s) = y.split_at(n);
        let g = k.gammahat_at(x);
        let mut dy = s[1..].to_vec();
        for a in 0..m {
            let mut acc = 0.0;
            for b in 0..m {
                for c in 0..m {
                    acc += g[(a * m + b) * m + c] * s[b] * s[c];
                }
            }
            dy.push(-acc);
        }
        dy
    };
    let mut y: Vec<f64> = x0.iter().chain(s0).copied().collect();
    let mut trace = GeodesicTrace {
        params: vec![0.0],
        points: vec![x0.to_vec()],
        fibers: Some(vec![s0.to_vec()]),
        step: h,
        order: RK4_ORDER,
        truncated: false,
    };
    for step in 1..=steps {
        let next = rk4_step(&y, h, &rhs);
        if !k.domain().contains(&next[..n]) || next.iter().any(|v| !v.is_finite()) {
            trace.truncated = true;
            break;
        }
        trace.params.push(step as f64 * h);
        trace.points.push(next[..n].to_vec());
        if let Some(f) = trace.fibers.as_mut() {
            f.push(next[n..].to_vec());
        }
        y = next;
    }
    Ok(trace)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchReport {
    /// One-sided Hausdorff distance from the first trace to the second polyline.
    pub distance: f64,
    pub tol: f64,
    pub matched: bool,
}

fn point_segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let ab: Vec<f64> = b.iter().zip(a).map(|(x, y)| x - y).collect();
    let ap: Vec<f64> = p.iter().zip(a).map(|(x, y)| x - y).collect();
    let len2: f64 = ab.iter().map(|v| v * v).sum();
    let t = if len2 > 0.0 {
        (ap.iter().zip(&ab).map(|(x, y)| x * y).sum::<f64>() / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    ap.iter()
        .zip(&ab)
        .map(|(x, y)| (x - t * y).powi(2))
        .sum::<f64>()
        .sqrt()
}

pub fn compare_unparametrized(
    t1: &GeodesicTrace,
    t2: &GeodesicTrace,
    tol: f64,
) -> Result<MatchReport> {
    if t1.len() < 2 || t2.len() < 2 {
        return Err(Error::invalid("traces need at least 2 samples to compare"));
    }
    let mut distance: f64 = 0.0;
    for p in &t1.points {
        let nearest = t2
            .points
            .windows(2)
            .map(|w| point_segment_distance(p, &w[0], &w[1]))
            .fold(f64::INFINITY, f64::min);
        distance = distance.max(nearest);
    }
    Ok(MatchReport {
        distance,
        tol,
        matched: distance <= tol,
    })
}

/// For each interior sample of a cone geodesic, the normalized wedge
/// `|a ^ x'| / (|a| |x'| + eps)` with `a = x'' + P(x', x')`, `P` the Thomas
/// symbols. `x'` is read from the fiber, `x''` from a five-point stencil.
pub fn collinearity_residuals(
    k: &ConeConnection,
    trace: &GeodesicTrace,
    eps: f64,
) -> Result<Vec<f64>> {
    let fibers = trace
        .fibers
        .as_ref()
        .ok_or_else(|| Error::invalid("collinearity needs a cone geodesic trace"))?;
    if trace.len() < 5 {
        return Err(Error::invalid("collinearity needs at least 5 samples"));
    }
    let n = k.dim();
    let h = trace.step;
    let pi = k.source_pi();
    let mut out = Vec::with_capacity(trace.len() - 4);
    for m in 2..trace.len() - 2 {
        let x = &trace.points[m];
        let vel = &fibers[m][1..];
        let g = pi.gamma_at(x);
        let mut accel = vec![0.0; n];
        for i in 0..n {
            let s = |q: usize| fibers[q][i + 1];
            let dd = (-s(m + 2) + 8.0 * s(m + 1) - 8.0 * s(m - 1) + s(m - 2)) / (12.0 * h);
            let mut quad = 0.0;
            for j in 0..n {
                for kk in 0..n {
                    quad += g[(i * n + j) * n + kk] * vel[j] * vel[kk];
                }
            }
            accel[i] = dd + quad;
        }
        let mut wedge2 = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                wedge2 += (accel[i] * vel[j] - accel[j] * vel[i]).powi(2);
            }
        }
        let na = accel.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nv = vel.iter().map(|v| v * v).sum::<f64>().sqrt();
        out.push(wedge2.sqrt() / (na * nv + eps));
    }
    Ok(out)
}
