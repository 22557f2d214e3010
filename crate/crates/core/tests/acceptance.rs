//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line, then exits nonzero if any
//! criterion failed.

mod common;

use std::time::Instant;

use nalgebra::DMatrix;
use projcone::chart::Equivalence;
use projcone::cli::{run_command, CommandArgs, ConnectionSource, Outcome, RunConfig, COMMANDS};
use projcone::develop::{develop, line_certificate, loop_holonomy, max_curvature, DevelopOptions};
use projcone::geodesic::{
    collinearity_residuals, compare_unparametrized, geodesic_classical, geodesic_rho,
};
use projcone::io::{
    alpha_shift, nonflat_demo, parse_builtin, parse_connection, serialize_connection,
};
use projcone::sample::{random_connection, random_one_form};
use projcone::{
    build_cone, classify, cone_curvature, extract_alpha, verify_theorem, ChartConnection,
    InvariantField, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_601;
const BUILTINS: [&str; 3] = ["flat", "alpha_shift", "nonflat_demo"];

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

struct Check {
    passed: bool,
    detail: String,
}

fn check(passed: bool, detail: String) -> Check {
    Check { passed, detail }
}

fn instances() -> Vec<ChartConnection> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    (0..50)
        .map(|t| random_connection(&mut rng, 2 + t % 2, 2))
        .collect()
}

fn grid(c: &ChartConnection) -> Vec<Vec<f64>> {
    c.domain().grid(5).unwrap()
}

fn theorem_conformance(cases: &[ChartConnection]) -> Check {
    let names = ["torsion", "ii1", "ii2", "ii3"];
    let mut worst = 0.0f64;
    for c in cases {
        let k = build_cone(c).unwrap();
        let inv = InvariantField::compute(c).unwrap();
        let report = verify_theorem(&k, &inv, &grid(c)).unwrap();
        worst = worst.max(report.max_residual_of(&names));
    }
    check(
        worst <= 1e-9,
        format!(
            "{} instances, worst residual over torsion/ii1/ii2/ii3 = {worst:.3e}",
            cases.len()
        ),
    )
}

fn decomposition(cases: &[ChartConnection]) -> Check {
    let (mut horiz, mut vert, mut euler) = (0.0f64, 0.0f64, 0.0f64);
    for c in cases {
        let n = c.dim();
        let kappa = (n as f64 + 1.0) / (n as f64 - 1.0);
        let rhat = cone_curvature(&build_cone(c).unwrap()).rhat;
        let inv = InvariantField::compute(c).unwrap();
        for x in grid(c) {
            let r = |a: usize, d: usize, b: usize, cc: usize| {
                rhat.get(&[a, d, b, cc]).eval(&x).unwrap()
            };
            for a in 0..=n {
                for d in 0..=n {
                    for b in 0..=n {
                        for cc in 0..=n {
                            let v = r(a, d, b, cc);
                            if d == 0 || b == 0 || cc == 0 {
                                euler = euler.max(v.abs());
                            } else if a == 0 {
                                let cy = inv.cotton.get(&[b - 1, cc - 1, d - 1]).eval(&x).unwrap();
                                vert = vert.max((v - kappa * cy).abs());
                            } else {
                                let w = inv
                                    .weyl
                                    .get(&[a - 1, d - 1, b - 1, cc - 1])
                                    .eval(&x)
                                    .unwrap();
                                horiz = horiz.max((v - w).abs());
                            }
                        }
                    }
                }
            }
        }
    }
    check(
        horiz <= 1e-9 && vert <= 1e-9 && euler <= 1e-12,
        format!(
            "|Rhat^i - W| = {horiz:.3e}, |Rhat^0 - kC| = {vert:.3e}, Euler slots = {euler:.3e}"
        ),
    )
}

fn projective_invariance(cases: &[ChartConnection]) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let (mut thomas, mut cone, mut weyl, mut cotton, mut alpha_err) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut recovered = true;
    let mut shifts = 0;
    for c in cases {
        let pi = c.thomas_symbols();
        let k = build_cone(c).unwrap();
        let inv = InvariantField::compute(c).unwrap();
        for _ in 0..20 {
            let alpha = random_one_form(&mut rng, c.dim(), 2);
            let s = c.projective_shift(&alpha).unwrap();
            thomas = thomas.max(pi.max_abs_diff(&s.thomas_symbols()));
            cone = cone.max(k.max_abs_diff(&build_cone(&s).unwrap()));
            let inv_s = InvariantField::compute(&s).unwrap();
            weyl = weyl.max(inv.weyl.max_abs_diff(&inv_s.weyl));
            cotton = cotton.max(inv.cotton.max_abs_diff(&inv_s.cotton));
            match extract_alpha(c, &s).unwrap() {
                Equivalence::Equivalent(a) => alpha_err = alpha_err.max(a.max_abs_diff(&alpha)),
                Equivalence::NotEquivalent { .. } => recovered = false,
            }
            shifts += 1;
        }
    }
    let worst = thomas.max(cone).max(weyl).max(cotton).max(alpha_err);
    check(
        recovered && worst <= 1e-9,
        format!(
            "{shifts} shifts: thomas {thomas:.1e}, cone {cone:.1e}, weyl {weyl:.1e}, cotton {cotton:.1e}, alpha {alpha_err:.1e}, all recovered = {recovered}"
        ),
    )
}

fn flat_family() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let mut failures = Vec::new();
    let (mut worst_curv, mut worst_line, mut min_samples) = (0.0f64, 0.0f64, usize::MAX);
    let opts = DevelopOptions::default();
    for t in 0..10 {
        let n = 2 + t % 2;
        let alpha = random_one_form(&mut rng, n, 2);
        let c = alpha_shift(&alpha).unwrap();
        let g = grid(&c);
        if classify(&c, &g, 1e-8).unwrap().verdict != Verdict::Flat {
            failures.push(format!("instance {t}: not FLAT"));
        }
        let k = build_cone(&c).unwrap();
        let (curv, _) = max_curvature(&k, &g).unwrap();
        worst_curv = worst_curv.max(curv);
        let base = c.domain().center();
        if let Err(e) = develop(&k, &base, &g, &opts) {
            failures.push(format!("instance {t}: develop failed: {e}"));
            continue;
        }
        for _ in 0..5 {
            let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.3..0.3)).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            let v0: Vec<f64> = v.iter().map(|a| 0.4 * a / norm).collect();
            let trace = geodesic_classical(&c, &x0, &v0, 2e-3, 500).unwrap();
            let stride = (trace.len() / 24).max(1);
            let samples: Vec<Vec<f64>> = trace.points.iter().step_by(stride).cloned().collect();
            min_samples = min_samples.min(samples.len());
            let images = develop(&k, &base, &samples, &opts).unwrap();
            let cert = line_certificate(&images, 1e-6).unwrap();
            worst_line = worst_line.max(cert.residual);
            if !cert.passed || samples.len() < 20 {
                failures.push(format!(
                    "instance {t}: certificate {:.2e} on {} samples",
                    cert.residual,
                    samples.len()
                ));
            }
        }
    }
    let ok = failures.is_empty() && worst_curv <= 1e-9;
    check(
        ok,
        format!(
            "10 shifts x 5 geodesics: max |Rhat| = {worst_curv:.1e}, worst line residual = {worst_line:.2e}, min samples = {min_samples}{}",
            if failures.is_empty() { String::new() } else { format!("; failures: {failures:?}") }
        ),
    )
}

fn nonflat_witness() -> Check {
    // Oracle first: finite differences on the hand-written symbols.
    let pi = common::thomas(&common::demo_field, 2);
    let mut oracle_err = 0.0f64;
    for x in [[0.0, 0.0], [0.6, -0.4], [-0.5, 0.8]] {
        oracle_err = oracle_err.max((common::cotton(&pi, 2, &x)[3] - 2.0).abs());
    }
    let c = nonflat_demo();
    let inv = InvariantField::compute(&c).unwrap();
    let pipeline_err = grid(&c)
        .iter()
        .map(|x| (inv.cotton.get(&[0, 1, 1]).eval(x).unwrap() - 2.0).abs())
        .fold(0.0, f64::max);
    let verdict = classify(&c, &grid(&c), 1e-8).unwrap().verdict;
    let status = run(&"develop", "nonflat_demo").status;
    check(
        oracle_err <= 1e-6 && pipeline_err <= 1e-9 && verdict == Verdict::NonFlat && status == 1,
        format!(
            "oracle |C_12;2 - 2| = {oracle_err:.1e}, pipeline = {pipeline_err:.1e}, verdict {}, develop status {status}",
            verdict.as_str()
        ),
    )
}

fn holonomy() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    let mut lines = Vec::new();
    let mut ok = true;
    for name in BUILTINS {
        let k = build_cone(&parse_builtin(name).unwrap()).unwrap();
        let rhat = cone_curvature(&k).rhat;
        let m = k.dim() + 1;
        let (mut worst_rel, mut ratio_lo, mut ratio_hi, mut worst_abs) =
            (0.0f64, f64::MAX, 0.0f64, 0.0f64);
        for _ in 0..10 {
            let center: Vec<f64> = (0..k.dim()).map(|_| rng.gen_range(-0.8..0.8)).collect();
            let exact =
                DMatrix::from_fn(m, m, |a, b| rhat.get(&[a, b, 1, 2]).eval(&center).unwrap());
            let scale = exact.abs().max();
            let err = |h: f64| {
                (&loop_holonomy(&k, &center, (h, h), (0, 1)).unwrap() - &exact)
                    .abs()
                    .max()
            };
            let (e_fine, e1, e2) = (err(1e-3), err(0.004), err(0.002));
            worst_abs = worst_abs.max(e_fine).max(e1).max(e2);
            if scale > 0.0 {
                worst_rel = worst_rel.max(e_fine / scale);
                let ratio = e1 / e2;
                ratio_lo = ratio_lo.min(ratio);
                ratio_hi = ratio_hi.max(ratio);
                ok &= e_fine <= 0.01 * scale && (3.5..=4.5).contains(&ratio);
            } else {
                // Flat structures have no truncation error to converge away.
                ok &= e_fine.max(e1).max(e2) <= 1e-8;
            }
        }
        if ratio_hi > 0.0 {
            lines.push(format!(
                "{name}: rel err at h=1e-3 {worst_rel:.1e}, ratio e(0.004)/e(0.002) in [{ratio_lo:.3}, {ratio_hi:.3}]"
            ));
        } else {
            lines.push(format!(
                "{name}: analytic Rhat = 0, max |Hol - I|/h^2 = {worst_abs:.1e}"
            ));
        }
    }
    check(ok, lines.join("; "))
}

fn geodesic_contracts() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 7);
    let unit = |h: f64| (1.0 / h).round() as usize;
    let random_launch = |rng: &mut ChaCha8Rng, n: usize, speed: f64| {
        let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.3..0.3)).collect();
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        (x0, v.iter().map(|a| speed * a / norm).collect::<Vec<f64>>())
    };
    let arclength = |t: &projcone::geodesic::GeodesicTrace| {
        t.points
            .windows(2)
            .map(|w| {
                w[0].iter()
                    .zip(&w[1])
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .sum::<f64>()
    };

    let mut hausdorff = 0.0f64;
    for t in 0..10 {
        let n = 2 + t % 2;
        let c = random_connection(&mut rng, n, 2);
        let s = c
            .projective_shift(&random_one_form(&mut rng, n, 2))
            .unwrap();
        let (x0, v0) = random_launch(&mut rng, n, 0.5);
        let h = 1e-3;
        let a = geodesic_classical(&c, &x0, &v0, h, unit(h)).unwrap();
        let b = geodesic_classical(&s, &x0, &v0, h, unit(h)).unwrap();
        // The shorter curve must lie on the longer one.
        let (short, long) = if arclength(&a) <= arclength(&b) {
            (&a, &b)
        } else {
            (&b, &a)
        };
        hausdorff = hausdorff.max(compare_unparametrized(short, long, 1e-5).unwrap().distance);
    }

    let mut collinear = 0.0f64;
    for t in 0..10 {
        let n = 2 + t % 2;
        let c = if t == 0 {
            nonflat_demo()
        } else {
            random_connection(&mut rng, n, 2)
        };
        let k = build_cone(&c).unwrap();
        let (x0, v0) = random_launch(&mut rng, c.dim(), 0.5);
        let fiber: Vec<f64> = std::iter::once(rng.gen_range(-0.5..0.5))
            .chain(v0)
            .collect();
        let trace = geodesic_rho(&k, &x0, &fiber, 1e-3, 1000).unwrap();
        let worst = collinearity_residuals(&k, &trace, 1e-6)
            .unwrap()
            .into_iter()
            .fold(0.0, f64::max);
        collinear = collinear.max(worst);
    }

    let demo = nonflat_demo();
    let (mut ratio_lo, mut ratio_hi) = (f64::MAX, 0.0f64);
    for (x0, v0) in [
        ([0.2, -0.3], [0.5, 0.8]),
        ([-0.4, 0.1], [0.7, 0.6]),
        ([0.5, 0.5], [-0.6, -0.9]),
        ([0.0, -0.6], [0.3, 1.2]),
        ([-0.2, 0.4], [0.9, -0.7]),
    ] {
        let end = |h: f64| {
            let t = geodesic_classical(&demo, &x0, &v0, h, unit(h)).unwrap();
            assert!(!t.truncated, "RK4 order launch left the box");
            t.points.last().unwrap().clone()
        };
        let reference = end(0.1 / 64.0);
        let dist = |p: Vec<f64>| {
            p.iter()
                .zip(&reference)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
        };
        let ratio = dist(end(0.1)) / dist(end(0.05));
        ratio_lo = ratio_lo.min(ratio);
        ratio_hi = ratio_hi.max(ratio);
    }
    check(
        hausdorff <= 1e-5 && collinear <= 1e-6 && ratio_lo >= 8.0 && ratio_hi <= 32.0,
        format!(
            "shift Hausdorff {hausdorff:.1e}, collinearity {collinear:.1e}, RK4 halving ratio in [{ratio_lo:.2}, {ratio_hi:.2}]"
        ),
    )
}

fn run(command: &&str, builtin: &str) -> Outcome {
    run_command(
        command,
        &ConnectionSource::Builtin(builtin.to_string()),
        &RunConfig::default(),
        &CommandArgs::default(),
    )
}

fn determinism_and_io(cases: &[ChartConnection]) -> Check {
    let mut problems = Vec::new();
    for builtin in BUILTINS {
        for command in COMMANDS.iter() {
            let first = run(command, builtin);
            let second = run(command, builtin);
            if first.artifacts != second.artifacts {
                problems.push(format!("{command} {builtin}: artifacts differ"));
            }
            let negative =
                builtin == "nonflat_demo" && (*command == "equiv" || *command == "develop");
            let expected = if negative { 1 } else { 0 };
            if first.status != expected {
                problems.push(format!(
                    "{command} {builtin}: status {} != {expected}",
                    first.status
                ));
            }
        }
        let c = parse_builtin(builtin).unwrap();
        if parse_connection(&serialize_connection(&c)).unwrap() != c {
            problems.push(format!("{builtin}: round-trip changed the term maps"));
        }
    }
    for (t, c) in cases.iter().enumerate() {
        let text = serialize_connection(c);
        let again = parse_connection(&text).unwrap();
        if &again != c || serialize_connection(&again) != text {
            problems.push(format!("instance {t}: round-trip mismatch"));
        }
    }
    let strict = CommandArgs {
        expect_flat: true,
        ..Default::default()
    };
    let flagged = run_command(
        "flatness",
        &ConnectionSource::Builtin("nonflat_demo".into()),
        &RunConfig::default(),
        &strict,
    );
    if flagged.status != 1 {
        problems.push("flatness --expect-flat nonflat_demo did not exit 1".into());
    }
    if run(&"nonsense", "flat").status != 2 {
        problems.push("unknown command did not exit 2".into());
    }
    check(
        problems.is_empty(),
        format!(
            "3 builtins x {} commands twice, {} round-trips{}",
            COMMANDS.len(),
            cases.len() + BUILTINS.len(),
            if problems.is_empty() {
                String::new()
            } else {
                format!("; problems: {problems:?}")
            }
        ),
    )
}

fn main() {
    let cases = instances();
    let criteria: Vec<Criterion> = vec![
        (
            "theorem conformance",
            Box::new(|| theorem_conformance(&cases)),
        ),
        (
            "curvature decomposition",
            Box::new(|| decomposition(&cases)),
        ),
        (
            "projective invariance",
            Box::new(|| projective_invariance(&cases)),
        ),
        ("flat family", Box::new(flat_family)),
        ("non-flat witness", Box::new(nonflat_witness)),
        ("holonomy cross-validation", Box::new(holonomy)),
        ("geodesic contracts", Box::new(geodesic_contracts)),
        (
            "determinism and I/O",
            Box::new(|| determinism_and_io(&cases)),
        ),
    ];
    let mut failed = 0;
    for (number, (name, body)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = body();
        let label = if result.passed { "PASS" } else { "FAIL" };
        if !result.passed {
            failed += 1;
        }
        println!(
            "criterion {} [{name}]: {label} ({:.1}s) {}",
            number + 1,
            start.elapsed().as_secs_f64(),
            result.detail
        );
    }
    if failed > 0 {
        println!("acceptance: {failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("acceptance: all {} criteria passed", criteria.len());
}
