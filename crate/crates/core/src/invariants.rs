//! Projective Weyl and Cotton-York tensors, computed on the trace-free
//! special representative, and the sampled flatness classification.

use crate::chart::{identity_tolerance, ChartConnection, CurvatureField};
use crate::error::{Error, Result};
use crate::poly::PolyField;
use crate::tensor::PolyTensor;

pub const DEFAULT_FLAT_TOL: f64 = 1e-8;

/// `W[i,l,j,k]` and `C[j,k,l]`, both built from `source` (the Thomas symbols).
#[derive(Clone, Debug, PartialEq)]
pub struct InvariantField {
    pub weyl: PolyTensor,
    pub cotton: PolyTensor,
    pub source: ChartConnection,
    pub curvature: CurvatureField,
}

impl InvariantField {
    /// Runs `thomas_symbols -> riemann -> weyl, cotton_york`.
    pub fn compute(c: &ChartConnection) -> Result<Self> {
        c.require_torsion_free("invariant computation")?;
        let pi = c.thomas_symbols();
        let curvature = pi.riemann();
        let weyl = weyl(&pi, &curvature)?;
        let cotton = cotton_york(&pi, &curvature)?;
        Ok(Self {
            weyl,
            cotton,
            source: pi,
            curvature,
        })
    }
}

fn require_trace_free(pi: &ChartConnection) -> Result<()> {
    let tol = identity_tolerance(pi.max_abs_coeff());
    let worst = pi
        .volume_form()
        .iter()
        .fold(0.0f64, |m, t| m.max(t.max_abs_coeff()));
    if worst > tol {
        return Err(Error::ContractViolation(format!(
            "projective invariants need trace-free symbols (trace coefficient {worst:e})"
        )));
    }
    Ok(())
}

/// `W^i_{ljk} = R^i_{ljk} + (Ric_{jl} d^i_k - Ric_{kl} d^i_j) / (n-1)`.
pub fn weyl(pi: &ChartConnection, cf: &CurvatureField) -> Result<PolyTensor> {
    require_trace_free(pi)?;
    let n = pi.dim();
    let w = 1.0 / (n as f64 - 1.0);
    let mut out = cf.riemann.clone();
    for i in 0..n {
        for l in 0..n {
            for j in 0..n {
                out.get_mut(&[i, l, j, i])
                    .add_scaled(cf.ricci.get(&[j, l]), w);
                out.get_mut(&[i, l, i, j])
                    .add_scaled(cf.ricci.get(&[j, l]), -w);
            }
        }
    }
    Ok(out)
}

/// `C_{jk;l} = (nabla_j Ric)_{kl} - (nabla_k Ric)_{jl}`, stored as `C[j,k,l]`.
pub fn cotton_york(pi: &ChartConnection, cf: &CurvatureField) -> Result<PolyTensor> {
    require_trace_free(pi)?;
    let n = pi.dim();
    Ok(PolyTensor::from_fn(n, 3, n, |idx| {
        let (j, k, l) = (idx[0], idx[1], idx[2]);
        cf.nabla_ricci.get(&[j, k, l]) - cf.nabla_ricci.get(&[k, j, l])
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Flat,
    NonFlat,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Flat => "FLAT",
            Verdict::NonFlat => "NON_FLAT",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvariantKind {
    Weyl,
    Cotton,
}

impl InvariantKind {
    pub fn as_str(self) -> &'static str {
        match self {
            InvariantKind::Weyl => "weyl",
            InvariantKind::Cotton => "cotton",
        }
    }
}

/// Location of the largest invariant component seen on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub point: Vec<f64>,
    pub tensor: InvariantKind,
    /// 0-based component index (`[i,l,j,k]` for Weyl, `[j,k,l]` for Cotton).
    pub component: Vec<usize>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointSample {
    pub point: Vec<f64>,
    pub max_weyl: f64,
    pub max_cotton: f64,
}

#[derive(Clone, Debug)]
pub struct InvariantReport {
    pub verdict: Verdict,
    pub flat_tol: f64,
    pub max_weyl: f64,
    pub max_cotton: f64,
    pub witness: Option<Witness>,
    pub samples: Vec<PointSample>,
    /// Largest polynomial coefficient of W and C: exact vanishing test.
    pub weyl_coeff_max: f64,
    pub cotton_coeff_max: f64,
    pub field: InvariantField,
}

fn max_component(t: &PolyTensor, x: &[f64]) -> (f64, usize, f64) {
    let mut best = (0.0, 0, 0.0);
    for (flat, p) in t.components().iter().enumerate() {
        let v = p.value_at(x);
        if v.abs() > best.0 {
            best = (v.abs(), flat, v);
        }
    }
    best
}

pub fn classify(c: &ChartConnection, grid: &[Vec<f64>], flat_tol: f64) -> Result<InvariantReport> {
    if grid.is_empty() {
        return Err(Error::invalid("classification grid is empty"));
    }
    if flat_tol.is_nan() || flat_tol <= 0.0 {
        return Err(Error::invalid("flat tolerance must be positive"));
    }
    for x in grid {
        if x.len() != c.dim() {
            return Err(Error::DimensionMismatch {
                expected: c.dim(),
                found: x.len(),
            });
        }
    }
    let field = InvariantField::compute(c)?;
    let mut samples = Vec::with_capacity(grid.len());
    let mut witness: Option<Witness> = None;
    let (mut max_weyl, mut max_cotton) = (0.0f64, 0.0f64);
    for x in grid {
        let (w_abs, w_flat, w_val) = max_component(&field.weyl, x);
        let (c_abs, c_flat, c_val) = max_component(&field.cotton, x);
        max_weyl = max_weyl.max(w_abs);
        max_cotton = max_cotton.max(c_abs);
        let best_so_far = witness.as_ref().map_or(0.0, |w| w.value.abs());
        if w_abs > best_so_far && w_abs >= c_abs {
            witness = Some(Witness {
                point: x.clone(),
                tensor: InvariantKind::Weyl,
                component: field.weyl.unflatten(w_flat),
                value: w_val,
            });
        } else if c_abs > best_so_far {
            witness = Some(Witness {
                point: x.clone(),
                tensor: InvariantKind::Cotton,
                component: field.cotton.unflatten(c_flat),
                value: c_val,
            });
        }
        samples.push(PointSample {
            point: x.clone(),
            max_weyl: w_abs,
            max_cotton: c_abs,
        });
    }
    let verdict = if max_weyl <= flat_tol && max_cotton <= flat_tol {
        Verdict::Flat
    } else {
        Verdict::NonFlat
    };
    Ok(InvariantReport {
        verdict,
        flat_tol,
        max_weyl,
        max_cotton,
        witness,
        samples,
        weyl_coeff_max: field.weyl.max_abs_coeff(),
        cotton_coeff_max: field.cotton.max_abs_coeff(),
        field,
    })
}

/// Sum `W^i_{jik}` as a rank-2 tensor; identically zero for symmetric Ricci.
pub fn weyl_trace(weyl: &PolyTensor) -> PolyTensor {
    let n = weyl.dim();
    PolyTensor::from_fn(n, 2, weyl.num_vars(), |idx| {
        let mut s = PolyField::zero(weyl.num_vars());
        for i in 0..n {
            s.add_scaled(weyl.get(&[i, idx[0], i, idx[1]]), 1.0);
        }
        s
    })
}
