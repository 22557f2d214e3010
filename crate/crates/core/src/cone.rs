//! The Thomas cone rho-connection on `E = chart x R^{n+1}`.
//!
//! Frame: index 0 is the Euler section `1` (spanning the kernel of the anchor),
//! indices `1..=n` are the horizontal lifts `e_i` of `d_i` given by the chart
//! volume gauge. All frame brackets vanish, so torsion-freeness is symmetry of
//! `G^A_{BC}` in `(B, C)`, and the anchor sends `1` to the zero vector field.
//!
//! In this gauge the connection built from a chart connection with Thomas
//! symbols `P` and `Ric = Ric(P)` is
//!
//! ```text
//! G^i_{jk} = P^i_{jk}          G^0_{jk} = (n+1)/(n-1) Ric_{jk}
//! G^i_{0k} = -d^i_k/(n+1)      G^0_{0k} = 0
//! G^0_{00} = -1/(n+1)          G^i_{00} = 0
//! ```

use crate::chart::{identity_tolerance, ChartConnection};
use crate::error::{Error, Result};
use crate::invariants::InvariantField;
use crate::poly::PolyField;
use crate::tensor::PolyTensor;

#[derive(Clone, Debug, PartialEq)]
pub struct ConeConnection {
    n: usize,
    gammahat: PolyTensor,
    source_pi: ChartConnection,
}

impl ConeConnection {
    /// Wraps raw components; no identity is checked (see [`verify_theorem`]).
    pub fn from_components(source_pi: ChartConnection, gammahat: PolyTensor) -> Result<Self> {
        let n = source_pi.dim();
        if gammahat.dim() != n + 1 || gammahat.rank() != 3 || gammahat.num_vars() != n {
            return Err(Error::DimensionMismatch {
                expected: n + 1,
                found: gammahat.dim(),
            });
        }
        Ok(Self {
            n,
            gammahat,
            source_pi,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn gammahat(&self) -> &PolyTensor {
        &self.gammahat
    }

    pub fn component(&self, a: usize, b: usize, c: usize) -> &PolyField {
        self.gammahat.get(&[a, b, c])
    }

    pub fn set_component(&mut self, a: usize, b: usize, c: usize, value: PolyField) {
        self.gammahat.set(&[a, b, c], value);
    }

    pub fn source_pi(&self) -> &ChartConnection {
        &self.source_pi
    }

    pub fn domain(&self) -> &crate::chart::Domain {
        self.source_pi.domain()
    }

    /// All `G^A_{BC}` at `x`, flattened `(A, B, C)` row-major.
    pub fn gammahat_at(&self, x: &[f64]) -> Vec<f64> {
        self.gammahat.eval_at(x)
    }

    pub fn max_abs_diff(&self, other: &ConeConnection) -> f64 {
        self.gammahat.max_abs_diff(&other.gammahat)
    }
}

pub fn build_cone(c: &ChartConnection) -> Result<ConeConnection> {
    let n = c.dim();
    if n < 2 {
        return Err(Error::invalid("the cone needs dimension at least 2"));
    }
    c.require_torsion_free("build_cone")?;
    let pi = c.thomas_symbols();
    let ricci = pi.riemann().ricci;
    let nf = n as f64;
    let euler = -1.0 / (nf + 1.0);
    let vertical = (nf + 1.0) / (nf - 1.0);
    let gammahat = PolyTensor::from_fn(n + 1, 3, n, |idx| {
        let (a, b, cc) = (idx[0], idx[1], idx[2]);
        match (a, b, cc) {
            (0, 0, 0) => PolyField::constant(n, euler),
            (0, 0, _) | (0, _, 0) => PolyField::zero(n),
            (0, j, k) => ricci.get(&[j - 1, k - 1]).scale(vertical),
            (i, 0, k) | (i, k, 0) => PolyField::constant(n, if i == k { euler } else { 0.0 }),
            (i, j, k) => pi.gamma(i - 1, j - 1, k - 1).clone(),
        }
    });
    Ok(ConeConnection {
        n,
        gammahat,
        source_pi: pi,
    })
}

/// `R[A,D,B,C]`: cone curvature in the chart convention, with `d_0 = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeCurvature {
    pub rhat: PolyTensor,
}

pub fn cone_curvature(k: &ConeConnection) -> ConeCurvature {
    let m = k.n + 1;
    let g = &k.gammahat;
    let d = |p: &PolyField, axis: usize| -> PolyField {
        if axis == 0 {
            PolyField::zero(k.n)
        } else {
            p.d(axis - 1)
        }
    };
    let mut rhat = PolyTensor::zeros(m, 4, k.n);
    for a in 0..m {
        for dd in 0..m {
            for b in 0..m {
                for c in (b + 1)..m {
                    let mut r = d(g.get(&[a, c, dd]), b);
                    r.add_scaled(&d(g.get(&[a, b, dd]), c), -1.0);
                    for e in 0..m {
                        r.add_product(g.get(&[a, b, e]), g.get(&[e, c, dd]), 1.0);
                        r.add_product(g.get(&[a, c, e]), g.get(&[e, b, dd]), -1.0);
                    }
                    rhat.set(&[a, dd, c, b], -&r);
                    rhat.set(&[a, dd, b, c], r);
                }
            }
        }
    }
    ConeCurvature { rhat }
}

/// `Ric[B,C] = sum_A R[A,B,A,C]`.
pub fn cone_ricci(r: &ConeCurvature) -> PolyTensor {
    let m = r.rhat.dim();
    PolyTensor::from_fn(m, 2, r.rhat.num_vars(), |idx| {
        let mut s = PolyField::zero(r.rhat.num_vars());
        for a in 0..m {
            s.add_scaled(r.rhat.get(&[a, idx[0], a, idx[1]]), 1.0);
        }
        s
    })
}

/// Maximum residual of one identity over the sampling grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub description: &'static str,
    pub max_residual: f64,
    pub worst_point: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub n: usize,
    pub conditions: Vec<ConditionCheck>,
    /// Largest `|R[A,D,B,C]|` seen on the grid.
    pub max_curvature: f64,
    pub max_curvature_point: Vec<f64>,
}

impl VerificationReport {
    pub fn condition(&self, name: &str) -> Option<&ConditionCheck> {
        self.conditions.iter().find(|c| c.name == name)
    }

    /// Largest residual over the conditions named in `names`.
    pub fn max_residual_of(&self, names: &[&str]) -> f64 {
        self.conditions
            .iter()
            .filter(|c| names.contains(&c.name))
            .fold(0.0, |m, c| m.max(c.max_residual))
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.conditions.iter().all(|c| c.max_residual <= tol)
    }
}

struct Tracker {
    max: f64,
    point: Vec<f64>,
}

impl Tracker {
    fn new(n: usize) -> Self {
        Self {
            max: 0.0,
            point: vec![0.0; n],
        }
    }

    fn observe(&mut self, value: f64, x: &[f64]) {
        // NaN must register as a failure.
        if value.abs() > self.max || value.is_nan() {
            self.max = if value.is_nan() {
                f64::INFINITY
            } else {
                value.abs()
            };
            self.point = x.to_vec();
        }
    }

    fn finish(self, name: &'static str, description: &'static str) -> ConditionCheck {
        ConditionCheck {
            name,
            description,
            max_residual: self.max,
            worst_point: self.point,
        }
    }
}

/// Samples every defining identity of the cone connection on `grid`.
///
/// Conditions: `torsion` (symmetry), `ii1` (Euler rules), `ii2` (trace
/// identities), `ii3` (cone Ricci), `decomposition` (horizontal part equals
/// Weyl, vertical part equals `(n+1)/(n-1)` Cotton-York, Euler slots vanish).
pub fn verify_theorem(
    k: &ConeConnection,
    inv: &InvariantField,
    grid: &[Vec<f64>],
) -> Result<VerificationReport> {
    if grid.is_empty() {
        return Err(Error::invalid("verification grid is empty"));
    }
    let n = k.n;
    let m = n + 1;
    if inv.source.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: inv.source.dim(),
        });
    }
    let tol = identity_tolerance(k.source_pi.max_abs_coeff().max(inv.source.max_abs_coeff()));
    if k.source_pi.max_abs_diff(&inv.source) > tol {
        return Err(Error::ContractViolation(
            "invariants were not computed from the cone's special representative".into(),
        ));
    }
    for x in grid {
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x.len(),
            });
        }
    }
    let curvature = cone_curvature(k);
    let ricci = cone_ricci(&curvature);
    let nf = n as f64;
    let euler = -1.0 / (nf + 1.0);
    let vertical = (nf + 1.0) / (nf - 1.0);

    let mut torsion = Tracker::new(n);
    let mut ii1 = Tracker::new(n);
    let mut ii2 = Tracker::new(n);
    let mut ii3 = Tracker::new(n);
    let mut decomposition = Tracker::new(n);
    let mut curv = Tracker::new(n);

    for x in grid {
        let g = k.gammahat_at(x);
        let gi = |a: usize, b: usize, c: usize| g[(a * m + b) * m + c];
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    torsion.observe(gi(a, b, c) - gi(a, c, b), x);
                }
            }
        }
        // Euler rules: nabla_1 s = -s/(n+1), in both slot orders.
        for a in 0..m {
            for b in 0..m {
                let target = if a == b { euler } else { 0.0 };
                ii1.observe(gi(a, 0, b) - target, x);
                ii1.observe(gi(a, b, 0) - target, x);
            }
        }
        for c in 0..m {
            let trace: f64 = (0..m).map(|a| gi(a, a, c)).sum();
            let target = if c == 0 { -1.0 } else { 0.0 };
            ii2.observe(trace - target, x);
        }
        for v in ricci.eval_at(x) {
            ii3.observe(v, x);
        }
        let r = curvature.rhat.eval_at(x);
        let ri = |a: usize, d: usize, b: usize, c: usize| r[((a * m + d) * m + b) * m + c];
        for v in &r {
            curv.observe(*v, x);
        }
        let w = inv.weyl.eval_at(x);
        let cy = inv.cotton.eval_at(x);
        for a in 0..m {
            for d in 0..m {
                for b in 0..m {
                    for c in 0..m {
                        let value = ri(a, d, b, c);
                        let residual = if d == 0 || b == 0 || c == 0 {
                            value
                        } else if a == 0 {
                            value - vertical * cy[((b - 1) * n + (c - 1)) * n + (d - 1)]
                        } else {
                            value - w[(((a - 1) * n + (d - 1)) * n + (b - 1)) * n + (c - 1)]
                        };
                        decomposition.observe(residual, x);
                    }
                }
            }
        }
    }

    Ok(VerificationReport {
        n,
        conditions: vec![
            torsion.finish("torsion", "G^A_{BC} = G^A_{CB}"),
            ii1.finish("ii1", "nabla_1 s = -s/(n+1) and nabla_s 1 = -s/(n+1)"),
            ii2.finish("ii2", "sum_A G^A_{Ak} = 0, sum_A G^A_{A0} = -1"),
            ii3.finish("ii3", "cone Ricci = 0"),
            decomposition.finish(
                "decomposition",
                "R^i_{ljk} = W^i_{ljk}, R^0_{ljk} = (n+1)/(n-1) C_{jk;l}, Euler slots vanish",
            ),
        ],
        max_curvature: curv.max,
        max_curvature_point: curv.point,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{Domain, OneFormField};

    fn x(n: usize, a: usize) -> PolyField {
        PolyField::variable(n, a).unwrap()
    }

    fn demo() -> ChartConnection {
        ChartConnection::from_fn(Domain::symmetric_unit(2), |i, j, k| {
            if (i, j, k) == (0, 1, 1) {
                &x(2, 0) * &x(2, 0)
            } else {
                PolyField::zero(2)
            }
        })
        .unwrap()
    }

    #[test]
    fn flat_cone_components() {
        let k = build_cone(&ChartConnection::zero(Domain::symmetric_unit(2)).unwrap()).unwrap();
        for (idx, p) in k.gammahat().iter() {
            let expected = match (idx[0], idx[1], idx[2]) {
                (0, 0, 0) => -1.0 / 3.0,
                (i, 0, c) | (i, c, 0) if i == c && i > 0 => -1.0 / 3.0,
                _ => 0.0,
            };
            assert_eq!(p, &PolyField::constant(2, expected), "component {idx:?}");
        }
    }

    #[test]
    fn demo_cone_components() {
        let k = build_cone(&demo()).unwrap();
        assert_eq!(k.component(1, 2, 2), &(&x(2, 0) * &x(2, 0)));
        assert_eq!(k.component(0, 2, 2), &x(2, 0).scale(6.0));
        assert!(k.component(0, 1, 1).is_zero());
    }

    #[test]
    fn cone_is_invariant_under_shift() {
        let alpha = OneFormField::new(vec![x(2, 1), &x(2, 0) * &x(2, 0)]).unwrap();
        let a = build_cone(&demo()).unwrap();
        let b = build_cone(&demo().projective_shift(&alpha).unwrap()).unwrap();
        assert!(a.max_abs_diff(&b) <= 1e-12);
    }

    #[test]
    fn flat_cone_curvature_vanishes() {
        let k = build_cone(&ChartConnection::zero(Domain::symmetric_unit(3)).unwrap()).unwrap();
        let r = cone_curvature(&k);
        assert!(r.rhat.max_abs_coeff() <= 1e-15);
        assert!(cone_ricci(&r).is_zero());
    }

    #[test]
    fn demo_cone_curvature() {
        let r = cone_curvature(&build_cone(&demo()).unwrap());
        assert!(
            r.rhat
                .get(&[0, 2, 1, 2])
                .max_abs_diff(&PolyField::constant(2, 6.0))
                <= 1e-12
        );
        for (idx, p) in r.rhat.iter() {
            if idx[2] == 0 || idx[3] == 0 {
                assert!(p.max_abs_coeff() <= 1e-12, "Euler slot {idx:?} = {p:?}");
            }
        }
        assert!(cone_ricci(&r).max_abs_coeff() <= 1e-12);
    }

    #[test]
    fn corrupted_cone_breaks_ricci_flatness() {
        let mut k = build_cone(&demo()).unwrap();
        let doubled = k.component(0, 2, 2).scale(2.0);
        k.set_component(0, 2, 2, doubled);
        let ricci = cone_ricci(&cone_curvature(&k));
        let worst = Domain::symmetric_unit(2)
            .grid(5)
            .unwrap()
            .iter()
            .flat_map(|p| ricci.eval_at(p))
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(worst > 1.0, "corruption went unnoticed: {worst}");
    }

    #[test]
    fn verify_demo() {
        let c = demo();
        let k = build_cone(&c).unwrap();
        let inv = InvariantField::compute(&c).unwrap();
        let grid = c.domain().grid(5).unwrap();
        let report = verify_theorem(&k, &inv, &grid).unwrap();
        assert!(report.passes(1e-9), "{report:?}");
        assert!((report.max_curvature - 6.0).abs() <= 1e-9);
        assert!(verify_theorem(&k, &inv, &[]).is_err());
    }

    #[test]
    fn verify_zero_is_exact() {
        let c = ChartConnection::zero(Domain::symmetric_unit(2)).unwrap();
        let k = build_cone(&c).unwrap();
        let inv = InvariantField::compute(&c).unwrap();
        let report = verify_theorem(&k, &inv, &c.domain().grid(3).unwrap()).unwrap();
        assert!(report.passes(1e-15), "{report:?}");
        assert_eq!(report.max_curvature, 0.0);
    }
}
