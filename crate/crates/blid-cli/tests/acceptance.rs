//! Acceptance gate for the toolkit: nine end-to-end criteria, each printed
//! as a single PASS/FAIL line with its runtime. Tolerances and budgets are
//! pinned here, not read from config.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use blid_cli::config::SuiteConfig;
use blid_core::cohomology::{
    eigenvalue_law_check, residual_order_check, solve_order, solve_truncated, LinearAuto,
};
use blid_core::differentiability::{
    bounded_diff_test, compact_diff_test, DiffTestOptions, DirectionalProbe,
};
use blid_core::extension::{agreement_check, boundedness_check, extend, Germ};
use blid_core::jets::{borel_bound_check, borel_realize, jet_verify, HomPoly, JetSequence,
    JetVerifyOptions};
use blid_core::linearization::{cutoff, smallness_check, NonlinearPart, PolyMap};
use blid_core::{
    blid_bound_certificate, local_identity_certificate, sampling, scaled_containment_certificate,
    BlidMap, BumpFunction, CoreError, CqElement, GridInterval, PointwiseBlid, ProjectedBlid,
    ProjectionSide, Projector, ScaledBlid, SegmentBlid, TaylorIntegralBlid,
};
use nalgebra::{Complex, DMatrix};
use rand::Rng;

const GRID_POINTS: usize = 1025;
const IDENTITY_TOL: f64 = 1e-12;
const AGREEMENT_TOL: f64 = 1e-10;
const QUADRATURE_TOL: f64 = 1e-8;
const ENVELOPE_SLACK: f64 = 1e-9;
const EXACT_SOLVE_TOL: f64 = 1e-12;
const SPECTRUM_TOL: f64 = 1e-6;
const JET_TOL_STRICT: f64 = 1e-3;
const JET_TOL_LOOSE: f64 = 1e-2;
const BOREL_SLACK: f64 = 1.1;
const SLOPE_MIN: f64 = 0.9;

fn grid() -> GridInterval {
    GridInterval::unit(GRID_POINTS)
}

fn bump() -> BumpFunction {
    BumpFunction::default()
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(tag)
}

/// Prints the criterion's verdict line, then enforces it.
fn conclude(n: u32, name: &str, budget: Duration, start: Instant, pass: bool, detail: String) {
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let verdict = if pass && in_time { "PASS" } else { "FAIL" };
    println!(
        "acceptance {n} ({name}): {verdict} in {:.2}s{} -- {detail}",
        elapsed.as_secs_f64(),
        if in_time { String::new() } else { format!(" (over {budget:?} budget)") },
    );
    assert!(pass, "acceptance {n} ({name}) failed: {detail}");
    assert!(in_time, "acceptance {n} ({name}) exceeded {budget:?}: took {elapsed:?}");
}

#[test]
fn acceptance_1_pointwise_local_identity() {
    let start = Instant::now();
    let blid = BlidMap::Pointwise(PointwiseBlid::new(bump()));
    let cert =
        local_identity_certificate(&blid, grid(), 200, IDENTITY_TOL, &mut rng(101)).unwrap();
    conclude(
        1,
        "pointwise local identity",
        Duration::from_secs(5),
        start,
        cert.pass,
        format!("max defect {:.3e} over {} samples (tol {IDENTITY_TOL:.0e})", cert.observed_max, cert.samples),
    );
}

#[test]
fn acceptance_2_taylor_integral_norm_bound() {
    let start = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for k in 0..=3usize {
        let blid = TaylorIntegralBlid::new(bump(), k);
        let cert = blid_bound_certificate(&blid, grid(), 1000, 100.0, &mut rng(200 + k as u64))
            .unwrap();
        pass &= cert.pass;
        details.push(format!("k={k}: {:.4} < {:.4}", cert.observed_max, cert.bound));
    }
    conclude(
        2,
        "k-norm bound a e^k",
        Duration::from_secs(60),
        start,
        pass,
        details.join("; "),
    );
}

#[test]
fn acceptance_3_scaled_metric_containment() {
    let start = Instant::now();
    let mut pass = true;
    let mut details = Vec::new();
    for (c, want_level) in [(0.5, 3), (0.1, 5), (0.01, 8)] {
        let blid = ScaledBlid::new(bump(), c).unwrap();
        pass &= blid.level() == want_level;
        let cert =
            scaled_containment_certificate(&blid, grid(), 500, 50.0, &mut rng(300)).unwrap();
        pass &= cert.pass;
        details.push(format!(
            "c={c}: level {} (want {want_level}), distance {:.3e} < {c}",
            blid.level(),
            cert.observed_max
        ));
    }
    conclude(
        3,
        "scaled blid containment",
        Duration::from_secs(60),
        start,
        pass,
        details.join("; "),
    );
}

#[test]
fn acceptance_4_geometric_germ_extension() {
    let start = Instant::now();
    let map = extend(
        Germ::catalog("geometric").unwrap(),
        BlidMap::Pointwise(PointwiseBlid::new(bump())),
    )
    .unwrap();

    let agreement =
        agreement_check(&map, grid(), 0.3, 200, AGREEMENT_TOL, &mut rng(401)).unwrap();

    let two = CqElement::from_profile(0, grid(), |_| 0.0, |_| 2.0).unwrap();
    let at_two = map.eval(&two).unwrap()[0];

    let ramp = CqElement::from_profile(0, grid(), |_| 0.0, |t| t / 4.0).unwrap();
    let at_ramp = map.eval(&ramp).unwrap()[0];
    let ramp_want = 4.0 * (4f64 / 3.0).ln();

    let bounded =
        boundedness_check(&map, grid(), 1e3, 1000, ENVELOPE_SLACK, &mut rng(402)).unwrap();

    let pass = agreement.pass
        && at_two == 1.0
        && (at_ramp - ramp_want).abs() <= QUADRATURE_TOL
        && bounded.pass;
    conclude(
        4,
        "geometric germ extension",
        Duration::from_secs(30),
        start,
        pass,
        format!(
            "agreement {:.2e}; F(2)={at_two}; ramp off by {:.2e}; sup {:.6} <= {:.6}",
            agreement.observed_max,
            (at_ramp - ramp_want).abs(),
            bounded.observed_max,
            bounded.bound
        ),
    );
}

#[test]
fn acceptance_5_borel_jet_realization() {
    let start = Instant::now();
    // P_j = j! x^j for j = 0..=5, the divergent-series jet of 1/(1-x).
    let entries: Vec<HomPoly<f64>> = (0..=5u32)
        .map(|j| {
            let coeff: f64 = (1..=j).map(|i| i as f64).product();
            HomPoly::from_terms(1, j, &[(vec![j], coeff)]).unwrap()
        })
        .collect();
    let jets = JetSequence::new(1, entries).unwrap();
    let realization = borel_realize(&jets, bump()).unwrap();

    let opts = JetVerifyOptions {
        tol_strict: JET_TOL_STRICT,
        strict_through: 4,
        tol_loose: JET_TOL_LOOSE,
        ..JetVerifyOptions::default()
    };
    let report = jet_verify(&realization, &jets, &opts).unwrap();
    let bound = borel_bound_check(&realization, 1e3, 1000, BOREL_SLACK, &mut rng(501)).unwrap();

    let worst = report
        .degrees
        .iter()
        .map(|d| d.observed_rel_err)
        .fold(0.0f64, f64::max);
    conclude(
        5,
        "jet realization",
        Duration::from_secs(30),
        start,
        report.pass && bound.pass,
        format!(
            "{} degrees recovered, worst rel err {worst:.2e}; |f| {:.4} <= {:.4}",
            report.degrees.len(),
            bound.observed_max,
            bound.bound
        ),
    );
}

#[test]
fn acceptance_6_conjugacy_equations() {
    let start = Instant::now();
    let auto = LinearAuto::new(DMatrix::from_row_slice(1, 1, &[2.0])).unwrap();

    // (Q(2x) - Q(x)) = x and = x^2 have closed forms Q = x and Q = x^2/3.
    let p1 = HomPoly::from_terms(1, 1, &[(vec![1], 1.0)]).unwrap();
    let q1 = solve_order(&auto, 1, &p1).unwrap();
    let err1 = (q1.coeffs[0] - Complex::new(1.0, 0.0)).norm();

    let p2 = HomPoly::from_terms(1, 2, &[(vec![2], 1.0)]).unwrap();
    let q2 = solve_order(&auto, 2, &p2).unwrap();
    let err2 = (q2.coeffs[0] - Complex::new(1.0 / 3.0, 0.0)).norm();

    // The saddle (2, 1/2) is resonant exactly at the xy term.
    let saddle = LinearAuto::new(DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5])).unwrap();
    let pxy = HomPoly::from_terms(2, 2, &[(vec![1, 1], 1.0)]).unwrap();
    let resonant = matches!(
        solve_order(&saddle, 2, &pxy),
        Err(CoreError::Resonant { degree: 2, ref indices }) if indices == &["(1,1)".to_string()]
    );

    // Spectrum of the degree-n composition operator vs eigenvalue products.
    let mut r = rng(601);
    let mut spectrum_ok = true;
    let mut spectrum_worst = 0f64;
    for _ in 0..20 {
        let d = r.random_range(1..=3usize);
        let n = r.random_range(1..=4u32);
        let auto = loop {
            let entries: Vec<f64> = (0..d * d).map(|_| r.random_range(-1.5..=1.5)).collect();
            if let Ok(a) = LinearAuto::new(DMatrix::from_row_slice(d, d, &entries)) {
                break a;
            }
        };
        let cert = eigenvalue_law_check(&auto, n, SPECTRUM_TOL).unwrap();
        spectrum_ok &= cert.pass;
        spectrum_worst = spectrum_worst.max(cert.observed_max);
    }

    // Solving x + x^2 + x^3 through degree 2 leaves a residual of cubic order.
    let jets = JetSequence::new(
        1,
        vec![
            HomPoly::from_terms(1, 2, &[(vec![2], 1.0)]).unwrap(),
            HomPoly::from_terms(1, 3, &[(vec![3], 1.0)]).unwrap(),
        ],
    )
    .unwrap();
    let solution = solve_truncated(&auto, &jets, 2).unwrap();
    let residual = residual_order_check(&auto, &jets, &solution).unwrap();

    let pass = err1 <= EXACT_SOLVE_TOL
        && err2 <= EXACT_SOLVE_TOL
        && resonant
        && spectrum_ok
        && residual.pass;
    conclude(
        6,
        "conjugacy equations",
        Duration::from_secs(60),
        start,
        pass,
        format!(
            "exact errs {err1:.1e}/{err2:.1e}; resonance named: {resonant}; spectrum worst {spectrum_worst:.2e}; residual slope {:?}",
            residual.slope
        ),
    );
}

#[test]
fn acceptance_7_linearization_cutoff() {
    let start = Instant::now();
    let delta = 0.1;
    let part = NonlinearPart::from_poly_map(PolyMap::catalog("quadratic-scalar").unwrap()).unwrap();
    let map = cutoff(part, bump(), delta).unwrap();
    let params = map.params();

    // Unchanged inside the plateau, up to the (x/delta)*delta rounding.
    let mut r = rng(701);
    let plateau = delta / 3.0;
    let mut inside_ok = true;
    for _ in 0..200 {
        let x = [r.random_range(-plateau..=plateau)];
        let damped = map.eval(&x).unwrap();
        let original = map.part.map.eval(&x).unwrap();
        inside_ok &= (damped[0] - original[0]).abs() <= 1e-17 + 1e-13 * x[0].abs();
    }

    // Exactly linear outside the damping support.
    let mut exterior_ok = true;
    for _ in 0..200 {
        let sign = if r.random_range(0..2) == 0 { -1.0 } else { 1.0 };
        let x = [sign * r.random_range(delta / 2.0..=4.0 * delta)];
        exterior_ok &= map.eval_nonlinear(&x).unwrap()[0] == 0.0;
    }

    let report = smallness_check(&map, 4, &mut r).unwrap();
    // For F = 2x + x^2 the second-derivative bound is exactly 2, so the
    // second inequality reads S2 <= 2 c1 m.
    let bound2_formula = 2.0 * params.c1 * params.m;
    let bound2_ok = (report.bound2 - bound2_formula).abs() <= 1e-15 * bound2_formula;

    let pass = inside_ok && exterior_ok && report.pass && bound2_ok;
    conclude(
        7,
        "nonlinearity cutoff",
        Duration::from_secs(30),
        start,
        pass,
        format!(
            "inside exact: {inside_ok}; exterior linear: {exterior_ok}; S1 {:.3e} <= {:.3e}; S2 {:.3e} <= 2 c1 m = {bound2_formula:.3e}",
            report.s1, report.bound1, report.s2
        ),
    );
}

#[test]
fn acceptance_8_differentiability_probes() {
    let start = Instant::now();
    let opts = DiffTestOptions { slope_min: SLOPE_MIN, ..DiffTestOptions::default() };
    let mut pass = true;
    let mut details = Vec::new();

    // Smooth quadratic reference map on the plane, bounded and compact senses.
    let quad = |v: &Vec<f64>| -> blid_core::Result<Vec<f64>> {
        Ok(vec![v[0] * v[0] + v[1] * v[1], v[0] * v[1]])
    };
    let jac = |x: &[f64], h: &[f64]| -> Vec<f64> {
        vec![2.0 * x[0] * h[0] + 2.0 * x[1] * h[1], x[1] * h[0] + x[0] * h[1]]
    };
    let base = vec![0.3, -0.2];
    let probe = DirectionalProbe::new(
        base.clone(),
        "quadratic",
        vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.7, -0.7]],
    )
    .unwrap();
    let report = bounded_diff_test(quad, |h| jac(&base, h), &probe, &opts).unwrap();
    pass &= report.pass && report.slope.map_or(false, |s| s >= SLOPE_MIN);
    details.push(format!("quadratic bounded slope {:?}", report.slope));

    let steps: Vec<f64> = (1..=5).map(|n| 10f64.powi(-n)).collect();
    let limit = vec![0.6, 0.8];
    let dirs: Vec<Vec<f64>> =
        (1..=5).map(|n| vec![limit[0], limit[1] + 0.1f64.powi(n)]).collect();
    let compact = compact_diff_test(
        quad,
        &jac(&base, &limit),
        &base,
        "quadratic",
        &dirs,
        &steps,
        &opts,
    )
    .unwrap();
    pass &= compact.pass;
    details.push(format!("quadratic compact slope {:?}", compact.slope));

    // Every blid kind at 0, against the identity as candidate derivative.
    let g = grid();
    let sym = GridInterval::new(-1.0, 1.0, GRID_POINTS).unwrap();
    let blids: Vec<(BlidMap, GridInterval)> = vec![
        (BlidMap::Pointwise(PointwiseBlid::new(bump())), g),
        (BlidMap::TaylorIntegral(TaylorIntegralBlid::new(bump(), 2)), g),
        (BlidMap::Scaled(ScaledBlid::new(bump(), 0.1).unwrap()), g),
        (BlidMap::Segment(SegmentBlid::new(bump(), CqElement::zero(0, g)).unwrap()), g),
        (
            BlidMap::Projected(ProjectedBlid::new(
                Projector::EvenPart,
                BlidMap::Pointwise(PointwiseBlid::new(bump())),
                ProjectionSide::Image,
            )),
            sym,
        ),
    ];
    let mut r = rng(801);
    for (blid, domain) in blids {
        let q = blid.input_order();
        let mut directions: Vec<CqElement> =
            (0..3).map(|_| sampling::random_element(q, domain, &mut r)).collect();
        if matches!(blid, BlidMap::Projected(_)) {
            for d in directions.iter_mut() {
                *d = Projector::EvenPart.apply(d).unwrap();
            }
        }
        let probe = DirectionalProbe::new(CqElement::zero(q, domain), blid.kind_label(), directions)
            .unwrap();
        let report =
            bounded_diff_test(|x: &CqElement| blid.apply(x), |h| h.clone(), &probe, &opts).unwrap();
        pass &= report.pass;
        details.push(format!("{}: {}", blid.kind_label(), if report.pass { "ok" } else { "FAIL" }));
    }

    // Negative control: a jump map must be flagged as non-differentiable.
    let step_probe = DirectionalProbe::new(vec![0.0], "unit step", vec![vec![1.0]]).unwrap();
    let control = bounded_diff_test(
        |v: &Vec<f64>| Ok(vec![if v[0] > 0.0 { 1.0 } else { 0.0 }]),
        |h| h.clone(),
        &step_probe,
        &opts,
    )
    .unwrap();
    pass &= !control.pass;
    details.push(format!("negative control rejected: {}", !control.pass));

    conclude(
        8,
        "differentiability probes",
        Duration::from_secs(30),
        start,
        pass,
        details.join("; "),
    );
}

#[test]
fn acceptance_9_deterministic_reports() {
    let start = Instant::now();
    let binary = env!("CARGO_BIN_EXE_blid");
    let base = std::env::temp_dir().join(format!("blid-acceptance-{}", std::process::id()));
    let dirs = [base.join("run1"), base.join("run2")];

    let mut pass = true;
    for dir in &dirs {
        let status = std::process::Command::new(binary)
            .args(["--seed", "42", "--out"])
            .arg(dir)
            .arg("all")
            .stdout(std::process::Stdio::null())
            .status()
            .unwrap();
        pass &= status.success();
    }

    let mut compared = 0;
    let mut entries: Vec<_> = std::fs::read_dir(&dirs[0])
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    entries.sort();
    for name in entries {
        let a = std::fs::read(dirs[0].join(&name)).unwrap();
        let b = std::fs::read(dirs[1].join(&name)).unwrap();
        pass &= a == b;
        compared += 1;
    }
    pass &= compared >= 5;
    std::fs::remove_dir_all(&base).ok();

    conclude(
        9,
        "deterministic reports",
        Duration::from_secs(120),
        start,
        pass,
        format!("two seed-42 runs, {compared} identical output files"),
    );
}

// Keeps SuiteConfig in the acceptance surface: default settings must match
// the pinned acceptance grid so suite runs and this gate exercise the same
// discretization.
#[test]
fn acceptance_defaults_match_gate() {
    let cfg = SuiteConfig::default();
    assert_eq!(cfg.grid_points, GRID_POINTS);
    assert_eq!(cfg.seed, 42);
}
