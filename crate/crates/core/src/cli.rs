//! Command dispatch for the `projcone` binary.
//!
//! [`run_command`] never touches the filesystem for output: it returns the
//! exit status together with named artifacts, and the binary decides where
//! they go. That keeps every command testable in-process.

use std::path::PathBuf;

use serde_json::{json, Value};

use crate::chart::{extract_alpha, ChartConnection, Equivalence, CURVATURE_CONVENTION};
use crate::cone::{build_cone, cone_curvature, verify_theorem};
use crate::develop::{develop, line_certificate, max_curvature, DevelopOptions};
use crate::error::{Error, Result};
use crate::geodesic::{compare_unparametrized, geodesic_classical, geodesic_rho, GeodesicTrace};
use crate::invariants::{classify, InvariantReport, Verdict, DEFAULT_FLAT_TOL};
use crate::io::{
    connection_to_json, parse_builtin, parse_connection, parse_points, poly_to_json,
    tensor_to_json, to_report_string,
};

pub const COMMANDS: [&str; 8] = [
    "check",
    "invariants",
    "cone",
    "flatness",
    "geodesic",
    "rho-geodesic",
    "equiv",
    "develop",
];

pub const EXIT_OK: u8 = 0;
pub const EXIT_NEGATIVE: u8 = 1;
pub const EXIT_INPUT: u8 = 2;

/// Threshold on the theorem residuals reported by `check`, relative to the
/// coefficient scale of the input.
pub const CHECK_TOL: f64 = 1e-9;
/// Rank-2 threshold for the line certificate emitted by `develop`.
pub const LINE_TOL: f64 = 1e-6;
/// Number of developed samples along the certificate geodesic.
pub const LINE_SAMPLES: usize = 21;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub flat_tol: f64,
    pub step: f64,
    pub match_tol: f64,
    pub grid: usize,
    pub out_dir: Option<PathBuf>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            flat_tol: DEFAULT_FLAT_TOL,
            step: 1e-2,
            match_tol: 1e-5,
            grid: 5,
            out_dir: None,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("flat tolerance", self.flat_tol),
            ("step", self.step),
            ("match tolerance", self.match_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.grid < 2 {
            return Err(Error::invalid(format!(
                "grid resolution must be at least 2, got {}",
                self.grid
            )));
        }
        Ok(())
    }
}

/// Launch and comparison options that only some commands read.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CommandArgs {
    pub from: Option<Vec<f64>>,
    pub dir: Option<Vec<f64>>,
    pub fiber: Option<Vec<f64>>,
    pub base: Option<Vec<f64>>,
    /// JSON document holding an array of target points.
    pub targets: Option<String>,
    /// Second connection for `equiv`; the zero connection when absent.
    pub other: Option<ConnectionSource>,
    pub expect_flat: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConnectionSource {
    /// A schema document, already read into memory.
    Document(String),
    /// `NAME[:key=value,...]`.
    Builtin(String),
}

impl ConnectionSource {
    pub fn load(&self) -> Result<ChartConnection> {
        match self {
            ConnectionSource::Document(doc) => parse_connection(doc),
            ConnectionSource::Builtin(arg) => parse_builtin(arg),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub status: u8,
    /// The first artifact is the primary one (`report.json`).
    pub artifacts: Vec<Artifact>,
    /// Human-readable diagnostic for stderr.
    pub message: Option<String>,
}

impl Outcome {
    pub fn artifact(&self, name: &str) -> Option<&str> {
        self.artifacts
            .iter()
            .find(|a| a.name == name)
            .map(|a| a.contents.as_str())
    }

    fn input_error(command: &str, e: &Error) -> Self {
        let report = json!({
            "command": command,
            "convention": CURVATURE_CONVENTION,
            "error": e.to_string(),
            "status": "input_error",
        });
        Outcome {
            status: EXIT_INPUT,
            artifacts: vec![Artifact {
                name: "report.json".into(),
                contents: to_report_string(&report),
            }],
            message: Some(format!("error: {e}")),
        }
    }
}

pub fn run_command(
    name: &str,
    source: &ConnectionSource,
    config: &RunConfig,
    args: &CommandArgs,
) -> Outcome {
    if !COMMANDS.contains(&name) {
        let e = Error::invalid(format!(
            "unknown command '{name}' (expected one of: {})",
            COMMANDS.join(", ")
        ));
        return Outcome::input_error(name, &e);
    }
    let result = config
        .validate()
        .and_then(|_| source.load())
        .and_then(|c| dispatch(name, &c, config, args));
    match result {
        Ok(outcome) => outcome,
        Err(e) => Outcome::input_error(name, &e),
    }
}

fn base_report(command: &str, c: &ChartConnection) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(command));
    m.insert("convention".into(), json!(CURVATURE_CONVENTION));
    m.insert("dimension".into(), json!(c.dim()));
    m.insert(
        "domain".into(),
        json!({"lo": c.domain().lo(), "hi": c.domain().hi()}),
    );
    m
}

fn finish(
    status: u8,
    mut report: serde_json::Map<String, Value>,
    extra: Vec<Artifact>,
    message: Option<String>,
) -> Outcome {
    let label = match status {
        EXIT_OK => "ok",
        EXIT_NEGATIVE => "negative",
        _ => "input_error",
    };
    report.insert("status".into(), json!(label));
    let mut artifacts = vec![Artifact {
        name: "report.json".into(),
        contents: to_report_string(&Value::Object(report)),
    }];
    artifacts.extend(extra);
    Outcome {
        status,
        artifacts,
        message,
    }
}

fn dispatch(
    name: &str,
    c: &ChartConnection,
    config: &RunConfig,
    args: &CommandArgs,
) -> Result<Outcome> {
    let grid = c.domain().grid(config.grid)?;
    let mut report = base_report(name, c);
    match name {
        "check" => {
            let k = build_cone(c)?;
            let inv = crate::invariants::InvariantField::compute(c)?;
            let v = verify_theorem(&k, &inv, &grid)?;
            let tol = crate::chart::identity_tolerance(c.max_abs_coeff()).max(CHECK_TOL);
            let passed = v.passes(tol);
            let conditions: serde_json::Map<String, Value> = v
                .conditions
                .iter()
                .map(|cc| {
                    (
                        cc.name.to_string(),
                        json!({
                            "description": cc.description,
                            "max_residual": cc.max_residual,
                            "worst_point": cc.worst_point,
                        }),
                    )
                })
                .collect();
            report.insert("conditions".into(), Value::Object(conditions));
            report.insert("tolerance".into(), json!(tol));
            report.insert("passed".into(), json!(passed));
            report.insert("max_cone_curvature".into(), json!(v.max_curvature));
            report.insert(
                "max_cone_curvature_point".into(),
                json!(v.max_curvature_point),
            );
            let status = if passed { EXIT_OK } else { EXIT_NEGATIVE };
            let msg = (!passed).then(|| "theorem residuals exceed tolerance".to_string());
            Ok(finish(status, report, vec![], msg))
        }
        "invariants" => {
            let r = classify(c, &grid, config.flat_tol)?;
            insert_classification(&mut report, &r);
            report.insert(
                "weyl".into(),
                tensor_to_json(&r.field.weyl, &["i", "l", "j", "k"], 1),
            );
            report.insert(
                "cotton".into(),
                tensor_to_json(&r.field.cotton, &["j", "k", "l"], 1),
            );
            report.insert(
                "thomas_symbols".into(),
                tensor_to_json(r.field.source.christoffel(), &["i", "j", "k"], 1),
            );
            Ok(finish(EXIT_OK, report, vec![], None))
        }
        "cone" => {
            let k = build_cone(c)?;
            let rhat = cone_curvature(&k).rhat;
            let (mag, at) = max_curvature(&k, &grid)?;
            report.insert(
                "index_note".into(),
                json!("cone indices: 0 is the Euler direction, 1..n are chart directions"),
            );
            report.insert(
                "gammahat".into(),
                tensor_to_json(k.gammahat(), &["a", "b", "c"], 0),
            );
            report.insert(
                "curvature".into(),
                tensor_to_json(&rhat, &["a", "d", "b", "c"], 0),
            );
            report.insert("max_curvature".into(), json!(mag));
            report.insert("max_curvature_point".into(), json!(at));
            Ok(finish(EXIT_OK, report, vec![], None))
        }
        "flatness" => {
            let r = classify(c, &grid, config.flat_tol)?;
            let k = build_cone(c)?;
            let (mag, at) = max_curvature(&k, &grid)?;
            insert_classification(&mut report, &r);
            report.insert("max_cone_curvature".into(), json!(mag));
            report.insert("max_cone_curvature_point".into(), json!(at));
            report.insert("expect_flat".into(), json!(args.expect_flat));
            let failed = args.expect_flat && r.verdict == Verdict::NonFlat;
            let msg = failed.then(|| {
                let w = r
                    .witness
                    .as_ref()
                    .map(|w| format!("{:?}", w.point))
                    .unwrap_or_default();
                format!("expected FLAT, found NON_FLAT (witness point {w})")
            });
            let status = if failed { EXIT_NEGATIVE } else { EXIT_OK };
            Ok(finish(status, report, vec![], msg))
        }
        "geodesic" => {
            let (x0, dir) = launch(c, args)?;
            let trace = geodesic_classical(c, &x0, &dir, config.step, unit_steps(config.step))?;
            insert_trace_summary(&mut report, &trace, &x0);
            report.insert("direction".into(), json!(dir));
            Ok(finish(EXIT_OK, report, vec![trace_artifact(&trace)], None))
        }
        "rho-geodesic" => {
            let (x0, dir) = launch(c, args)?;
            let fiber = match &args.fiber {
                Some(f) => f.clone(),
                None => std::iter::once(0.0).chain(dir.iter().copied()).collect(),
            };
            let k = build_cone(c)?;
            let trace = geodesic_rho(&k, &x0, &fiber, config.step, unit_steps(config.step))?;
            insert_trace_summary(&mut report, &trace, &x0);
            report.insert("fiber".into(), json!(fiber));
            // The projection should trace the classical geodesic of the
            // trace-free representative launched with the same velocity.
            let velocity = &fiber[1..];
            let lift_match = if fiber.len() == c.dim() + 1 && velocity.iter().any(|v| *v != 0.0) {
                let classical = geodesic_classical(
                    &c.thomas_symbols(),
                    &x0,
                    velocity,
                    config.step,
                    unit_steps(config.step),
                )?;
                let (short, long) = if trace.arc_length() <= classical.arc_length() {
                    (&trace, &classical)
                } else {
                    (&classical, &trace)
                };
                let m = compare_unparametrized(short, long, config.match_tol)?;
                json!({"distance": m.distance, "matched": m.matched, "tol": m.tol})
            } else {
                Value::Null
            };
            report.insert("classical_match".into(), lift_match);
            Ok(finish(EXIT_OK, report, vec![trace_artifact(&trace)], None))
        }
        "equiv" => {
            let other = match &args.other {
                Some(src) => src.load()?,
                None => ChartConnection::zero(c.domain().clone())?,
            };
            report.insert("reference".into(), connection_to_json(&other));
            match extract_alpha(&other, c)? {
                Equivalence::Equivalent(alpha) => {
                    report.insert("equivalent".into(), json!(true));
                    report.insert(
                        "alpha".into(),
                        Value::Array(alpha.components().iter().map(poly_to_json).collect()),
                    );
                    Ok(finish(EXIT_OK, report, vec![], None))
                }
                Equivalence::NotEquivalent { residual } => {
                    report.insert("equivalent".into(), json!(false));
                    report.insert("residual".into(), json!(residual));
                    let msg = format!("not projectively equivalent (residual {residual:e})");
                    Ok(finish(EXIT_NEGATIVE, report, vec![], Some(msg)))
                }
            }
        }
        "develop" => run_develop(c, config, args, &grid, report),
        _ => unreachable!("command list checked by run_command"),
    }
}

fn run_develop(
    c: &ChartConnection,
    config: &RunConfig,
    args: &CommandArgs,
    grid: &[Vec<f64>],
    mut report: serde_json::Map<String, Value>,
) -> Result<Outcome> {
    let n = c.dim();
    let base = point_arg(&args.base, c, "base")?;
    let targets = match &args.targets {
        Some(doc) => parse_points(doc, n)?,
        None => grid.to_vec(),
    };
    let k = build_cone(c)?;
    let opts = DevelopOptions {
        flat_tol: config.flat_tol,
        grid_resolution: config.grid,
        step: config.step,
    };
    report.insert("base".into(), json!(base));
    let developed = match develop(&k, &base, &targets, &opts) {
        Ok(d) => d,
        Err(Error::NonFlat { witness, magnitude }) => {
            report.insert("refused".into(), json!(true));
            report.insert("witness_point".into(), json!(witness));
            report.insert("curvature_magnitude".into(), json!(magnitude));
            let msg = format!(
                "refusing to develop: cone curvature {magnitude:e} at witness point {witness:?}"
            );
            return Ok(finish(EXIT_NEGATIVE, report, vec![], Some(msg)));
        }
        Err(e) => return Err(e),
    };
    report.insert("refused".into(), json!(false));

    // Certificate: develop samples of the chart geodesic through the base.
    let dir = vector_arg(&args.dir, n)?;
    let trace = geodesic_classical(c, &base, &dir, config.step, unit_steps(config.step))?;
    let stride = (trace.len() / (LINE_SAMPLES - 1)).max(1);
    let samples: Vec<Vec<f64>> = trace.points.iter().step_by(stride).cloned().collect();
    let images = develop(&k, &base, &samples, &opts)?;
    let cert = line_certificate(&images, LINE_TOL)?;
    report.insert(
        "line_certificate".into(),
        json!({
            "direction": dir,
            "passed": cert.passed,
            "residual": cert.residual,
            "samples": images.len(),
            "singular_values": cert.singular_values,
            "tol": cert.tol,
        }),
    );
    report.insert("targets".into(), json!(targets.len()));

    let mut csv = String::new();
    let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    header.extend((0..=n).map(|a| format!("y{a}")));
    csv.push_str(&header.join(","));
    csv.push('\n');
    for (t, p) in targets.iter().zip(&developed) {
        let row: Vec<String> = t.iter().chain(p.coords()).map(f64::to_string).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    let status = if cert.passed { EXIT_OK } else { EXIT_NEGATIVE };
    let msg = (!cert.passed).then(|| "developed geodesic failed the line certificate".to_string());
    let artifact = Artifact {
        name: "developed.csv".into(),
        contents: csv,
    };
    Ok(finish(status, report, vec![artifact], msg))
}

fn insert_classification(report: &mut serde_json::Map<String, Value>, r: &InvariantReport) {
    report.insert("verdict".into(), json!(r.verdict.as_str()));
    report.insert("flat_tol".into(), json!(r.flat_tol));
    report.insert("max_weyl".into(), json!(r.max_weyl));
    report.insert("max_cotton".into(), json!(r.max_cotton));
    report.insert("weyl_coeff_max".into(), json!(r.weyl_coeff_max));
    report.insert("cotton_coeff_max".into(), json!(r.cotton_coeff_max));
    let witness = match &r.witness {
        Some(w) => json!({
            "point": w.point,
            "tensor": w.tensor.as_str(),
            "component": w.component.iter().map(|i| i + 1).collect::<Vec<_>>(),
            "value": w.value,
        }),
        None => Value::Null,
    };
    report.insert("witness".into(), witness);
    report.insert(
        "samples".into(),
        Value::Array(
            r.samples
                .iter()
                .map(|s| json!({"point": s.point, "max_weyl": s.max_weyl, "max_cotton": s.max_cotton}))
                .collect(),
        ),
    );
}

fn insert_trace_summary(
    report: &mut serde_json::Map<String, Value>,
    trace: &GeodesicTrace,
    x0: &[f64],
) {
    report.insert("from".into(), json!(x0));
    report.insert("step".into(), json!(trace.step));
    report.insert("samples".into(), json!(trace.len()));
    report.insert("truncated".into(), json!(trace.truncated));
    report.insert("endpoint".into(), json!(trace.points.last()));
}

fn trace_artifact(trace: &GeodesicTrace) -> Artifact {
    Artifact {
        name: "trace.csv".into(),
        contents: trace.to_csv(),
    }
}

/// Steps covering unit parameter length.
fn unit_steps(h: f64) -> usize {
    (1.0 / h).round().max(1.0) as usize
}

fn point_arg(p: &Option<Vec<f64>>, c: &ChartConnection, what: &str) -> Result<Vec<f64>> {
    match p {
        None => Ok(c.domain().center()),
        Some(x) if x.len() != c.dim() => Err(Error::invalid(format!(
            "--{what} needs {} coordinates, got {}",
            c.dim(),
            x.len()
        ))),
        Some(x) => Ok(x.clone()),
    }
}

fn vector_arg(v: &Option<Vec<f64>>, n: usize) -> Result<Vec<f64>> {
    match v {
        None => {
            let mut e1 = vec![0.0; n];
            e1[0] = 1.0;
            Ok(e1)
        }
        Some(d) if d.len() != n => Err(Error::invalid(format!(
            "--dir needs {n} components, got {}",
            d.len()
        ))),
        Some(d) => Ok(d.clone()),
    }
}

fn launch(c: &ChartConnection, args: &CommandArgs) -> Result<(Vec<f64>, Vec<f64>)> {
    Ok((
        point_arg(&args.from, c, "from")?,
        vector_arg(&args.dir, c.dim())?,
    ))
}
