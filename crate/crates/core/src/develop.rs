//! Parallel transport in the cone bundle, small-loop holonomy, and the
//! developing map into real projective space for flat structures.
//!
//! Transport along a chart path `g(t)` uses the horizontal lift of `g'`:
//! `dT/dt = -M(g(t)) T` with `M^A_B = G^A_{jB} g'^j`. Columns of the
//! resulting matrix are the transported images of the frame at the start.

use nalgebra::{DMatrix, DVector};

use crate::cone::{cone_curvature, ConeConnection};
use crate::error::{Error, Result};

/// Point of `RP^n`: largest-magnitude coordinate equal to `+1` (first such
/// coordinate when several tie).
#[derive(Clone, Debug, PartialEq)]
pub struct ProjPoint {
    homog: Vec<f64>,
}

impl ProjPoint {
    pub fn from_homogeneous(v: &[f64]) -> Result<Self> {
        let (mut pivot, mut best) = (0, 0.0f64);
        for (i, x) in v.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::invalid("homogeneous coordinates must be finite"));
            }
            if x.abs() > best {
                best = x.abs();
                pivot = i;
            }
        }
        if best == 0.0 {
            return Err(Error::invalid("the zero vector is not a projective point"));
        }
        let scale = v[pivot];
        let mut homog: Vec<f64> = v.iter().map(|x| x / scale).collect();
        homog[pivot] = 1.0;
        Ok(Self { homog })
    }

    pub fn coords(&self) -> &[f64] {
        &self.homog
    }

    /// Distance between normalized representatives; zero iff equal points
    /// (up to the sign ambiguity of near-ties).
    pub fn distance(&self, other: &ProjPoint) -> f64 {
        self.homog
            .iter()
            .zip(&other.homog)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransportFrame {
    pub matrix: DMatrix<f64>,
    /// Ratio of extreme singular values.
    pub condition: f64,
}

impl TransportFrame {
    fn new(matrix: DMatrix<f64>) -> Self {
        let sv = matrix.clone().singular_values();
        let max = sv.iter().copied().fold(0.0, f64::max);
        let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
        Self {
            matrix,
            condition: if min > 0.0 { max / min } else { f64::INFINITY },
        }
    }

    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        self.matrix
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::invalid("transport matrix is singular"))
    }
}

/// Generator `M` with `dT/dt = -M T` at `x` for chart velocity `vel`, plus
/// `vertical` times the Euler component of the lift.
fn generator(k: &ConeConnection, x: &[f64], vel: &[f64], vertical: f64) -> DMatrix<f64> {
    let n = k.dim();
    let m = n + 1;
    let g = k.gammahat_at(x);
    DMatrix::from_fn(m, m, |a, b| {
        let mut s = vertical * g[a * m * m + b];
        for (j, v) in vel.iter().enumerate() {
            s += g[(a * m + j + 1) * m + b] * v;
        }
        s
    })
}

fn transport_segment<F>(
    k: &ConeConnection,
    from: &[f64],
    to: &[f64],
    steps: usize,
    vertical: &F,
) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> f64,
{
    let m = k.dim() + 1;
    let vel: Vec<f64> = to.iter().zip(from).map(|(b, a)| b - a).collect();
    let at = |t: f64| -> Vec<f64> { from.iter().zip(&vel).map(|(a, v)| a + t * v).collect() };
    let rhs = |t: f64, y: &DMatrix<f64>| -> DMatrix<f64> {
        let x = at(t);
        -(generator(k, &x, &vel, vertical(&x)) * y)
    };
    let dt = 1.0 / steps as f64;
    let mut y = DMatrix::<f64>::identity(m, m);
    for s in 0..steps {
        let t = s as f64 * dt;
        let k1 = rhs(t, &y);
        let k2 = rhs(t + 0.5 * dt, &(&y + &k1 * (0.5 * dt)));
        let k3 = rhs(t + 0.5 * dt, &(&y + &k2 * (0.5 * dt)));
        let k4 = rhs(t + dt, &(&y + &k3 * dt));
        y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    }
    y
}

fn validate_path(k: &ConeConnection, path: &[Vec<f64>], h: f64) -> Result<()> {
    if path.is_empty() {
        return Err(Error::invalid("transport path is empty"));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid("transport step must be positive"));
    }
    for p in path {
        if p.len() != k.dim() {
            return Err(Error::DimensionMismatch {
                expected: k.dim(),
                found: p.len(),
            });
        }
        if !k.domain().contains(p) {
            return Err(Error::invalid(format!(
                "path vertex {p:?} leaves the domain"
            )));
        }
    }
    Ok(())
}

/// Transport along the polyline `path` with RK4 steps of chart length `<= h`.
pub fn horizontal_transport(
    k: &ConeConnection,
    path: &[Vec<f64>],
    h: f64,
) -> Result<TransportFrame> {
    transport_with_vertical(k, path, h, |_| 0.0)
}

/// As [`horizontal_transport`], but along the lift `c(g') + f(x) 1`.
pub fn transport_with_vertical<F>(
    k: &ConeConnection,
    path: &[Vec<f64>],
    h: f64,
    vertical: F,
) -> Result<TransportFrame>
where
    F: Fn(&[f64]) -> f64,
{
    validate_path(k, path, h)?;
    let m = k.dim() + 1;
    let mut total = DMatrix::<f64>::identity(m, m);
    for w in path.windows(2) {
        let len = w[0]
            .iter()
            .zip(&w[1])
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        if len == 0.0 {
            continue;
        }
        let steps = (len / h).ceil().max(1.0) as usize;
        total = transport_segment(k, &w[0], &w[1], steps, &vertical) * total;
    }
    Ok(TransportFrame::new(total))
}

/// RK4 substeps per rectangle edge in [`loop_holonomy`].
pub const LOOP_SUBSTEPS: usize = 4;

/// `(Hol - I) / (h1 h2)` for the coordinate rectangle centered at `center`
/// with sides `h1` along `axes.0` and `h2` along `axes.1` (0-based).
///
/// The loop is based at the center (reached along a diagonal) and runs along
/// `axes.1` first, so the result tends to `[R^A_{B j k}]` with `j = axes.0`,
/// `k = axes.1` in cone numbering, and the error is `O(h^2)`.
pub fn loop_holonomy(
    k: &ConeConnection,
    center: &[f64],
    sides: (f64, f64),
    axes: (usize, usize),
) -> Result<DMatrix<f64>> {
    let n = k.dim();
    let (h1, h2) = sides;
    let (j, kk) = axes;
    if !(h1 > 0.0 && h2 > 0.0) || j == kk || j >= n || kk >= n {
        return Err(Error::invalid("degenerate holonomy rectangle"));
    }
    if center.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: center.len(),
        });
    }
    let offset = |dj: f64, dk: f64| -> Vec<f64> {
        let mut p = center.to_vec();
        p[j] += dj;
        p[kk] += dk;
        p
    };
    let (a, b) = (0.5 * h1, 0.5 * h2);
    let corners = [offset(-a, -b), offset(-a, b), offset(a, b), offset(a, -b)];
    for c in &corners {
        if !k.domain().contains(c) {
            return Err(Error::invalid("holonomy rectangle leaves the domain"));
        }
    }
    let path = vec![
        center.to_vec(),
        corners[0].clone(),
        corners[1].clone(),
        corners[2].clone(),
        corners[3].clone(),
        corners[0].clone(),
        center.to_vec(),
    ];
    let step = h1.min(h2) / LOOP_SUBSTEPS as f64;
    let hol = horizontal_transport(k, &path, step)?.matrix;
    let m = n + 1;
    Ok((hol - DMatrix::<f64>::identity(m, m)) / (h1 * h2))
}

/// Largest `|R^A_{DBC}|` on `grid`, and where it occurs.
pub fn max_curvature(k: &ConeConnection, grid: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    if grid.is_empty() {
        return Err(Error::invalid("flatness grid is empty"));
    }
    let r = cone_curvature(k);
    let mut worst = (0.0f64, grid[0].clone());
    for x in grid {
        for v in r.rhat.eval_at(x) {
            if v.abs() > worst.0 || v.is_nan() {
                worst = (if v.is_nan() { f64::INFINITY } else { v.abs() }, x.clone());
            }
        }
    }
    Ok(worst)
}

/// Refuses with [`Error::NonFlat`] when the sampled cone curvature exceeds `flat_tol`.
pub fn flatness_gate(k: &ConeConnection, grid: &[Vec<f64>], flat_tol: f64) -> Result<f64> {
    let (magnitude, witness) = max_curvature(k, grid)?;
    if magnitude > flat_tol {
        return Err(Error::NonFlat { witness, magnitude });
    }
    Ok(magnitude)
}

#[derive(Clone, Debug)]
pub struct DevelopOptions {
    pub flat_tol: f64,
    pub grid_resolution: usize,
    pub step: f64,
}

impl Default for DevelopOptions {
    fn default() -> Self {
        Self {
            flat_tol: crate::invariants::DEFAULT_FLAT_TOL,
            grid_resolution: 5,
            step: 1e-2,
        }
    }
}

/// `phi(x) = [T(base -> x)^{-1} e_0]` over straight segments from `base`.
pub fn develop(
    k: &ConeConnection,
    base: &[f64],
    targets: &[Vec<f64>],
    opts: &DevelopOptions,
) -> Result<Vec<ProjPoint>> {
    let grid = k.domain().grid(opts.grid_resolution)?;
    flatness_gate(k, &grid, opts.flat_tol)?;
    let m = k.dim() + 1;
    let mut euler = DVector::<f64>::zeros(m);
    euler[0] = 1.0;
    targets
        .iter()
        .map(|t| {
            let frame = horizontal_transport(k, &[base.to_vec(), t.clone()], opts.step)?;
            let v = frame
                .matrix
                .lu()
                .solve(&euler)
                .ok_or_else(|| Error::invalid("transport matrix is singular"))?;
            ProjPoint::from_homogeneous(v.as_slice())
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LineCertificate {
    pub passed: bool,
    /// Third singular value over the first.
    pub residual: f64,
    pub singular_values: Vec<f64>,
    pub tol: f64,
}

/// Rank-2 test on stacked homogeneous coordinates.
pub fn line_certificate(points: &[ProjPoint], tol: f64) -> Result<LineCertificate> {
    if points.len() < 3 {
        return Err(Error::invalid("line certificate needs at least 3 points"));
    }
    let cols = points[0].coords().len();
    if points.iter().any(|p| p.coords().len() != cols) {
        return Err(Error::invalid("projective points have mixed dimensions"));
    }
    let a = DMatrix::from_fn(points.len(), cols, |r, c| points[r].coords()[c]);
    let mut sv: Vec<f64> = a.singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    let residual = if sv[0] > 0.0 {
        sv.get(2).copied().unwrap_or(0.0) / sv[0]
    } else {
        0.0
    };
    Ok(LineCertificate {
        passed: residual <= tol,
        residual,
        singular_values: sv,
        tol,
    })
}
