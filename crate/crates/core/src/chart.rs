//! Chart-level connection calculus.
//!
//! Christoffel symbols are stored as a full `n x n x n` array `gamma[i][j][k]`
//! (0-based), with `nabla_{d_k} d_j = gamma[i][j][k] d_i`. Both `(j,k)` and
//! `(k,j)` entries are stored.
//!
//! Curvature convention, shared by every module of this crate:
//!
//! ```text
//! R(d_j, d_k) d_l = R^i_{ljk} d_i
//! R^i_{ljk} = d_j G^i_{kl} - d_k G^i_{jl} + G^i_{jm} G^m_{kl} - G^i_{km} G^m_{jl}
//! Ric_{jk}  = sum_i R^i_{jik}
//! (nabla Ric)_{i;jk} = d_i Ric_{jk} - G^m_{ij} Ric_{mk} - G^m_{ik} Ric_{jm}
//! ```

use crate::error::{Error, Result};
use crate::poly::PolyField;
use crate::tensor::PolyTensor;

/// Human-readable statement of the curvature convention, embedded in reports.
pub const CURVATURE_CONVENTION: &str = "R(d_j,d_k)d_l = R^i_{ljk} d_i; \
R^i_{ljk} = d_j G^i_{kl} - d_k G^i_{jl} + G^i_{jm} G^m_{kl} - G^i_{km} G^m_{jl}; \
Ric_{jk} = R^i_{jik}; index 0 of the cone is the Euler direction";

/// Absolute coefficient tolerance for polynomial identities whose inputs have
/// coefficients of magnitude up to `scale`.
pub fn identity_tolerance(scale: f64) -> f64 {
    1e-9 * (1.0 + scale)
}

/// Axis-aligned box `[lo_i, hi_i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

/// Largest dimension for which grid sampling is offered.
pub const MAX_GRID_DIM: usize = 4;

impl Domain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                found: hi.len(),
            });
        }
        if lo.is_empty() {
            return Err(Error::invalid("domain must have at least one axis"));
        }
        for (axis, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if !(l.is_finite() && h.is_finite() && l < h) {
                return Err(Error::invalid(format!(
                    "degenerate domain on axis {}: [{l}, {h}]",
                    axis + 1
                )));
            }
        }
        Ok(Self { lo, hi })
    }

    /// The box `[-1, 1]^n`.
    pub fn symmetric_unit(n: usize) -> Self {
        Self {
            lo: vec![-1.0; n],
            hi: vec![1.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(v, (l, h))| *l <= *v && *v <= *h)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| 0.5 * (l + h))
            .collect()
    }

    /// `resolution^n` uniformly spaced points including the box corners, in
    /// lexicographic order (last axis fastest).
    pub fn grid(&self, resolution: usize) -> Result<Vec<Vec<f64>>> {
        if resolution < 2 {
            return Err(Error::invalid("grid resolution must be at least 2"));
        }
        let n = self.dim();
        if n > MAX_GRID_DIM {
            return Err(Error::invalid(format!(
                "grid sampling supports n <= {MAX_GRID_DIM}, got {n}"
            )));
        }
        let total = resolution.pow(n as u32);
        let mut points = Vec::with_capacity(total);
        for flat in 0..total {
            let mut rest = flat;
            let mut x = vec![0.0; n];
            for axis in (0..n).rev() {
                let step = rest % resolution;
                rest /= resolution;
                let frac = step as f64 / (resolution - 1) as f64;
                x[axis] = self.lo[axis] + frac * (self.hi[axis] - self.lo[axis]);
            }
            points.push(x);
        }
        Ok(points)
    }
}

/// A one-form `alpha_k dx^k` with polynomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct OneFormField {
    alpha: Vec<PolyField>,
}

impl OneFormField {
    pub fn new(alpha: Vec<PolyField>) -> Result<Self> {
        let n = alpha.len();
        if n == 0 {
            return Err(Error::invalid("one-form needs at least one component"));
        }
        for a in &alpha {
            if a.num_vars() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: a.num_vars(),
                });
            }
        }
        Ok(Self { alpha })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            alpha: vec![PolyField::zero(n); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn component(&self, k: usize) -> &PolyField {
        &self.alpha[k]
    }

    pub fn components(&self) -> &[PolyField] {
        &self.alpha
    }

    pub fn negated(&self) -> Self {
        Self {
            alpha: self.alpha.iter().map(|a| -a).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &OneFormField) -> f64 {
        self.alpha
            .iter()
            .zip(&other.alpha)
            .fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(b)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChartConnection {
    domain: Domain,
    gamma: PolyTensor,
}

impl ChartConnection {
    /// `gamma` must be an `n x n x n` tensor over `n` variables, `n >= 2`.
    pub fn new(domain: Domain, gamma: PolyTensor) -> Result<Self> {
        let n = domain.dim();
        if n < 2 {
            return Err(Error::invalid(format!(
                "dimension must be at least 2, got {n}"
            )));
        }
        if gamma.dim() != n || gamma.rank() != 3 {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: gamma.dim(),
            });
        }
        if gamma.num_vars() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: gamma.num_vars(),
            });
        }
        Ok(Self { domain, gamma })
    }

    pub fn zero(domain: Domain) -> Result<Self> {
        let n = domain.dim();
        Self::new(domain, PolyTensor::zeros(n, 3, n))
    }

    pub fn from_fn<F>(domain: Domain, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize, usize) -> PolyField,
    {
        let n = domain.dim();
        let gamma = PolyTensor::from_fn(n, 3, n, |idx| f(idx[0], idx[1], idx[2]));
        Self::new(domain, gamma)
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn gamma(&self, i: usize, j: usize, k: usize) -> &PolyField {
        self.gamma.get(&[i, j, k])
    }

    pub fn christoffel(&self) -> &PolyTensor {
        &self.gamma
    }

    /// All Christoffel values at `x`, flattened as `(i, j, k)` row-major.
    pub fn gamma_at(&self, x: &[f64]) -> Vec<f64> {
        self.gamma.eval_at(x)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.gamma.max_abs_coeff()
    }

    pub fn max_abs_diff(&self, other: &ChartConnection) -> f64 {
        self.gamma.max_abs_diff(&other.gamma)
    }

    /// Largest coefficient of `G^i_{jk} - G^i_{kj}`.
    pub fn torsion_residual(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in (j + 1)..n {
                    worst = worst.max(self.gamma(i, j, k).max_abs_diff(self.gamma(i, k, j)));
                }
            }
        }
        worst
    }

    pub fn is_torsion_free(&self) -> bool {
        self.torsion_residual() <= identity_tolerance(self.max_abs_coeff())
    }

    pub(crate) fn require_torsion_free(&self, what: &str) -> Result<()> {
        if self.is_torsion_free() {
            Ok(())
        } else {
            Err(Error::ContractViolation(format!(
                "{what} requires a torsion-free connection (asymmetry {:e})",
                self.torsion_residual()
            )))
        }
    }

    /// Symmetric part `(G^i_{jk} + G^i_{kj}) / 2`; same geodesics, no torsion.
    pub fn symmetrize(&self) -> ChartConnection {
        let gamma = PolyTensor::from_fn(self.dim(), 3, self.dim(), |idx| {
            let (i, j, k) = (idx[0], idx[1], idx[2]);
            if j == k {
                return self.gamma(i, j, k).clone();
            }
            (self.gamma(i, j, k) + self.gamma(i, k, j)).scale(0.5)
        });
        ChartConnection {
            domain: self.domain.clone(),
            gamma,
        }
    }

    /// `G'^i_{jk} = G^i_{jk} + a_j d^i_k + a_k d^i_j`.
    pub fn projective_shift(&self, alpha: &OneFormField) -> Result<ChartConnection> {
        let n = self.dim();
        if alpha.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: alpha.dim(),
            });
        }
        let mut gamma = self.gamma.clone();
        for i in 0..n {
            for j in 0..n {
                // a_j on (i, j, i) and a_k on (i, i, k); diagonal gets both.
                gamma
                    .get_mut(&[i, j, i])
                    .add_scaled(alpha.component(j), 1.0);
                gamma
                    .get_mut(&[i, i, j])
                    .add_scaled(alpha.component(j), 1.0);
            }
        }
        Ok(ChartConnection {
            domain: self.domain.clone(),
            gamma,
        })
    }

    /// Traces `G^l_{lk}`: the connection form on `det(TU)` in the chart volume frame.
    pub fn volume_form(&self) -> Vec<PolyField> {
        let n = self.dim();
        (0..n)
            .map(|k| {
                let mut tr = PolyField::zero(n);
                for l in 0..n {
                    tr.add_scaled(self.gamma(l, l, k), 1.0);
                }
                tr
            })
            .collect()
    }

    /// Trace-free special representative
    /// `P^i_{jk} = G^i_{jk} - (d^i_j tr_k + d^i_k tr_j) / (n+1)`.
    pub fn thomas_symbols(&self) -> ChartConnection {
        let n = self.dim();
        let tr = self.volume_form();
        let w = -1.0 / (n as f64 + 1.0);
        let mut gamma = self.gamma.clone();
        for i in 0..n {
            for (j, t) in tr.iter().enumerate() {
                gamma.get_mut(&[i, i, j]).add_scaled(t, w);
                gamma.get_mut(&[i, j, i]).add_scaled(t, w);
            }
        }
        ChartConnection {
            domain: self.domain.clone(),
            gamma,
        }
    }

    /// Riemann, Ricci and covariant derivative of Ricci.
    pub fn riemann(&self) -> CurvatureField {
        let n = self.dim();
        let g = &self.gamma;
        let mut riemann = PolyTensor::zeros(n, 4, n);
        for i in 0..n {
            for l in 0..n {
                for j in 0..n {
                    for k in (j + 1)..n {
                        let mut r = g.get(&[i, k, l]).d(j);
                        r.add_scaled(&g.get(&[i, j, l]).d(k), -1.0);
                        for m in 0..n {
                            r.add_product(g.get(&[i, j, m]), g.get(&[m, k, l]), 1.0);
                            r.add_product(g.get(&[i, k, m]), g.get(&[m, j, l]), -1.0);
                        }
                        riemann.set(&[i, l, k, j], -&r);
                        riemann.set(&[i, l, j, k], r);
                    }
                }
            }
        }
        let ricci = PolyTensor::from_fn(n, 2, n, |idx| {
            let mut s = PolyField::zero(n);
            for i in 0..n {
                s.add_scaled(riemann.get(&[i, idx[0], i, idx[1]]), 1.0);
            }
            s
        });
        let nabla_ricci = PolyTensor::from_fn(n, 3, n, |idx| {
            let (i, j, k) = (idx[0], idx[1], idx[2]);
            let mut s = ricci.get(&[j, k]).d(i);
            for m in 0..n {
                s.add_product(g.get(&[m, i, j]), ricci.get(&[m, k]), -1.0);
                s.add_product(g.get(&[m, i, k]), ricci.get(&[j, m]), -1.0);
            }
            s
        });
        CurvatureField {
            riemann,
            ricci,
            nabla_ricci,
        }
    }
}

/// Curvature stack of a chart connection; tensors index as documented at the
/// module level (`riemann[i,l,j,k]`, `ricci[j,k]`, `nabla_ricci[i,j,k]`).
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureField {
    pub riemann: PolyTensor,
    pub ricci: PolyTensor,
    pub nabla_ricci: PolyTensor,
}

/// Outcome of [`extract_alpha`].
#[derive(Clone, Debug, PartialEq)]
pub enum Equivalence {
    Equivalent(OneFormField),
    /// Largest coefficient of the part of `G2 - G1` that has no shift form.
    NotEquivalent {
        residual: f64,
    },
}

/// Decides whether `c2 = projective_shift(c1, alpha)` for some one-form and
/// recovers it from the traces of the difference tensor.
pub fn extract_alpha(c1: &ChartConnection, c2: &ChartConnection) -> Result<Equivalence> {
    let n = c1.dim();
    if c2.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: c2.dim(),
        });
    }
    c1.require_torsion_free("extract_alpha")?;
    c2.require_torsion_free("extract_alpha")?;
    let diff = PolyTensor::from_fn(n, 3, n, |idx| {
        c2.gamma(idx[0], idx[1], idx[2]) - c1.gamma(idx[0], idx[1], idx[2])
    });
    let w = 1.0 / (n as f64 + 1.0);
    let alpha: Vec<PolyField> = (0..n)
        .map(|k| {
            let mut a = PolyField::zero(n);
            for i in 0..n {
                a.add_scaled(diff.get(&[i, i, k]), w);
            }
            a
        })
        .collect();
    let mut residual: f64 = 0.0;
    for (idx, d) in diff.iter() {
        let (i, j, k) = (idx[0], idx[1], idx[2]);
        let mut r = d.clone();
        if i == k {
            r.add_scaled(&alpha[j], -1.0);
        }
        if i == j {
            r.add_scaled(&alpha[k], -1.0);
        }
        residual = residual.max(r.max_abs_coeff());
    }
    let scale = c1.max_abs_coeff().max(c2.max_abs_coeff());
    if residual <= identity_tolerance(scale) {
        Ok(Equivalence::Equivalent(OneFormField::new(alpha)?))
    } else {
        Ok(Equivalence::NotEquivalent { residual })
    }
}
