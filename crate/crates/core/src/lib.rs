//! Projective structures through the Thomas cone.
//!
//! Starting from a torsion-free connection on a coordinate box, this crate
//! builds the trace-free Thomas symbols, the cone rho-connection on
//! `chart x R^{n+1}` and its curvature, the projective Weyl and Cotton-York
//! tensors, geodesics on the chart and on the cone, and, for flat structures,
//! the developing map into real projective space.
//!
//! Scalars are sparse polynomials ([`poly::PolyField`]) so that every
//! curvature identity can be checked coefficient by coefficient.

pub mod chart;
pub mod cli;
pub mod cone;
pub mod develop;
pub mod error;
pub mod geodesic;
pub mod invariants;
pub mod io;
pub mod poly;
pub mod sample;
pub mod tensor;

pub use chart::{
    extract_alpha, ChartConnection, CurvatureField, Domain, Equivalence, OneFormField,
};
pub use cone::{build_cone, cone_curvature, cone_ricci, verify_theorem, ConeConnection};
pub use error::{Error, Result};
pub use invariants::{classify, InvariantField, Verdict};
pub use poly::PolyField;
pub use tensor::PolyTensor;
