use anyhow::{anyhow, Result};
use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use blid_core::cohomology::{
    eigenvalue_law_check, residual_order_check, solve_order, solve_truncated, LinearAuto,
};
use blid_core::differentiability::{
    bounded_diff_test, compact_diff_test, DiffReport, DiffTestOptions, DirectionalProbe,
};
use blid_core::extension::{agreement_check, boundedness_check, extend, Germ};
use blid_core::jets::{borel_bound_check, borel_realize, jet_verify, HomPoly, JetSequence,
    JetVerifyOptions};
use blid_core::linearization::{cutoff, smallness_check, split_bound_check, NonlinearPart, PolyMap};
use blid_core::{
    blid_bound_certificate, local_identity_certificate, sampling, scaled_containment_certificate,
    BlidMap, Certificate, CoreError, CqElement, GridInterval, PointwiseBlid, ProjectedBlid,
    ProjectionSide, Projector, RadialBlid, ScaledBlid, SegmentBlid, TaylorIntegralBlid,
};

use crate::config::SuiteConfig;
use crate::report::PlotSeries;

/// Everything one case produces; the runner turns it into a `CaseResult`
/// and files the series as plot data.
pub struct CaseOutcome {
    pub pass: bool,
    pub summary: String,
    pub observed: Option<f64>,
    pub bound: Option<f64>,
    pub details: Value,
    pub series: Vec<PlotSeries>,
}

type CaseFn = Box<dyn Fn(&SuiteConfig, &mut ChaCha8Rng) -> Result<CaseOutcome> + Send + Sync>;

pub struct CaseSpec {
    pub id: String,
    run: CaseFn,
}

impl CaseSpec {
    fn new(
        id: impl Into<String>,
        run: impl Fn(&SuiteConfig, &mut ChaCha8Rng) -> Result<CaseOutcome> + Send + Sync + 'static,
    ) -> Self {
        CaseSpec { id: id.into(), run: Box::new(run) }
    }

    pub fn run(&self, cfg: &SuiteConfig, rng: &mut ChaCha8Rng) -> Result<CaseOutcome> {
        (self.run)(cfg, rng)
    }
}

pub const SUITE_NAMES: [&str; 5] =
    ["verify-blid", "extend", "borel", "cohomology", "linearize-cutoff"];

pub fn suite_cases(name: &str) -> Result<Vec<CaseSpec>> {
    match name {
        "verify-blid" => Ok(verify_blid_cases()),
        "extend" => Ok(extend_cases()),
        "borel" => Ok(borel_cases()),
        "cohomology" => Ok(cohomology_cases()),
        "linearize-cutoff" => Ok(linearize_cases()),
        other => Err(anyhow!(
            "unknown suite `{other}`; expected one of {}",
            SUITE_NAMES.join(", ")
        )),
    }
}

fn unit_grid(cfg: &SuiteConfig) -> GridInterval {
    GridInterval::unit(cfg.grid_points)
}

fn symmetric_grid(cfg: &SuiteConfig) -> Result<GridInterval> {
    Ok(GridInterval::new(-1.0, 1.0, cfg.grid_points)?)
}

fn from_certificate(cert: Certificate, series: Vec<PlotSeries>) -> Result<CaseOutcome> {
    let summary = format!(
        "{}: observed {:.3e} vs bound {:.3e} over {} samples",
        cert.kind, cert.observed_max, cert.bound, cert.samples
    );
    Ok(CaseOutcome {
        pass: cert.pass,
        summary,
        observed: Some(cert.observed_max),
        bound: Some(cert.bound),
        details: serde_json::to_value(&cert)?,
        series,
    })
}

fn diff_outcome(report: DiffReport, expect_pass: bool) -> Result<CaseOutcome> {
    let last = report.ratios.last().map(|r| r.ratio).unwrap_or(f64::NAN);
    let slope = report.slope;
    let verdict = if expect_pass { report.pass } else { !report.pass };
    let summary = match slope {
        Some(s) => format!(
            "{} probe at {}: final ratio {:.3e}, slope {:.2}{}",
            report.notion,
            report.base,
            last,
            s,
            if expect_pass { "" } else { " (negative control)" }
        ),
        None => format!(
            "{} probe at {}: ratios on the floor (final {:.3e})",
            report.notion, report.base, last
        ),
    };
    let series = PlotSeries {
        name: "ratios".into(),
        columns: vec!["step".into(), "ratio".into()],
        rows: report.ratios.iter().map(|r| vec![r.step, r.ratio]).collect(),
    };
    Ok(CaseOutcome {
        pass: verdict,
        summary,
        observed: Some(last),
        bound: slope,
        details: serde_json::to_value(&report)?,
        series: vec![series],
    })
}

// ------------------------------------------------------------------
// verify-blid
// ------------------------------------------------------------------

/// Identity certificates, image-norm bounds, metric containment, and
/// differentiability probes for every blid construction.
fn verify_blid_cases() -> Vec<CaseSpec> {
    let mut cases = Vec::new();

    cases.push(CaseSpec::new("identity/pointwise", |cfg, rng| {
        let blid = BlidMap::Pointwise(PointwiseBlid::new(cfg.bump()));
        let tol = cfg.tol("identity", 1e-12);
        from_certificate(local_identity_certificate(&blid, unit_grid(cfg), 200, tol, rng)?, vec![])
    }));

    cases.push(CaseSpec::new("identity/taylor_k2", |cfg, rng| {
        let blid = BlidMap::TaylorIntegral(TaylorIntegralBlid::new(cfg.bump(), 2));
        let tol = cfg.tol("identity", 1e-12);
        from_certificate(local_identity_certificate(&blid, unit_grid(cfg), 100, tol, rng)?, vec![])
    }));

    cases.push(CaseSpec::new("identity/scaled_c0.1", |cfg, rng| {
        let blid = BlidMap::Scaled(ScaledBlid::new(cfg.bump(), 0.1)?);
        let tol = cfg.tol("identity", 1e-12);
        from_certificate(local_identity_certificate(&blid, unit_grid(cfg), 100, tol, rng)?, vec![])
    }));

    cases.push(CaseSpec::new("identity/segment", |cfg, rng| {
        let grid = unit_grid(cfg);
        let anchor = CqElement::from_profile(0, grid, |_| 0.0, |t| 0.25 * (2.0 * t).cos())?;
        let blid = BlidMap::Segment(SegmentBlid::new(cfg.bump(), anchor)?);
        let tol = cfg.tol("identity", 1e-12);
        from_certificate(local_identity_certificate(&blid, grid, 100, tol, rng)?, vec![])
    }));

    for side in [ProjectionSide::Image, ProjectionSide::Kernel] {
        let id = match side {
            ProjectionSide::Image => "identity/projected_even_image",
            ProjectionSide::Kernel => "identity/projected_even_kernel",
        };
        cases.push(CaseSpec::new(id, move |cfg, rng| {
            let grid = symmetric_grid(cfg)?;
            let inner = BlidMap::Pointwise(PointwiseBlid::new(cfg.bump()));
            let blid = BlidMap::Projected(ProjectedBlid::new(Projector::EvenPart, inner, side));
            let tol = cfg.tol("identity", 1e-12);
            from_certificate(local_identity_certificate(&blid, grid, 100, tol, rng)?, vec![])
        }));
    }

    cases.push(CaseSpec::new("projector/even_idempotent", |cfg, rng| {
        let grid = symmetric_grid(cfg)?;
        let projector = Projector::EvenPart;
        let mut observed = 0f64;
        let samples = 100;
        for _ in 0..samples {
            let x = sampling::random_element(0, grid, rng);
            observed = observed.max(projector.idempotent_on(&x)?);
        }
        Ok(CaseOutcome {
            pass: observed == 0.0,
            summary: format!(
                "even-part projector: max idempotence defect {observed:.3e} over {samples} samples"
            ),
            observed: Some(observed),
            bound: Some(0.0),
            details: json!({ "samples": samples, "max_defect": observed }),
            series: vec![],
        })
    }));

    for k in 0..=3usize {
        cases.push(CaseSpec::new(format!("bound/taylor_k{k}"), move |cfg, rng| {
            let blid = TaylorIntegralBlid::new(cfg.bump(), k);
            from_certificate(blid_bound_certificate(&blid, unit_grid(cfg), 1000, 100.0, rng)?, vec![])
        }));
    }

    for c in [0.5, 0.1, 0.01] {
        cases.push(CaseSpec::new(format!("containment/scaled_c{c}"), move |cfg, rng| {
            let blid = ScaledBlid::new(cfg.bump(), c)?;
            from_certificate(scaled_containment_certificate(&blid, unit_grid(cfg), 500, 50.0, rng)?, vec![])
        }));
    }

    cases.push(CaseSpec::new("diff/bounded_quadratic", |_cfg, rng| {
        let base = vec![0.3, -0.2];
        let directions: Vec<Vec<f64>> =
            (0..4).map(|_| (0..2).map(|_| rng.random_range(-1.0..=1.0)).collect()).collect();
        let probe = DirectionalProbe::new(base, "quadratic plane map", directions)?;
        let report = bounded_diff_test(
            |v: &Vec<f64>| Ok(quadratic_map(v)),
            |h| quadratic_jacobian(&probe.base, h),
            &probe,
            &DiffTestOptions::default(),
        )?;
        diff_outcome(report, true)
    }));

    cases.push(CaseSpec::new("diff/compact_quadratic", |_cfg, _rng| {
        let base = vec![0.3, -0.2];
        let limit = vec![0.6, 0.8];
        let steps: Vec<f64> = (1..=5).map(|n| 10f64.powi(-n)).collect();
        // Directions converge to `limit` at the pace of the step ladder, so
        // the direction error contributes at the same first order as the
        // Taylor remainder.
        let directions: Vec<Vec<f64>> = (1..=5)
            .map(|n| vec![limit[0], limit[1] + 0.1f64.powi(n)])
            .collect();
        let report = compact_diff_test(
            |v: &Vec<f64>| Ok(quadratic_map(v)),
            &quadratic_jacobian(&base, &limit),
            &base,
            "quadratic plane map",
            &directions,
            &steps,
            &DiffTestOptions::default(),
        )?;
        diff_outcome(report, true)
    }));

    let blid_diff: Vec<(&str, fn(&SuiteConfig) -> Result<(BlidMap, GridInterval)>)> = vec![
        ("diff/blid_pointwise", |cfg| {
            Ok((BlidMap::Pointwise(PointwiseBlid::new(cfg.bump())), unit_grid(cfg)))
        }),
        ("diff/blid_taylor_k2", |cfg| {
            Ok((BlidMap::TaylorIntegral(TaylorIntegralBlid::new(cfg.bump(), 2)), unit_grid(cfg)))
        }),
        ("diff/blid_scaled_c0.1", |cfg| {
            Ok((BlidMap::Scaled(ScaledBlid::new(cfg.bump(), 0.1)?), unit_grid(cfg)))
        }),
        ("diff/blid_segment_zero", |cfg| {
            let grid = unit_grid(cfg);
            let anchor = CqElement::zero(0, grid);
            Ok((BlidMap::Segment(SegmentBlid::new(cfg.bump(), anchor)?), grid))
        }),
        ("diff/blid_projected_even", |cfg| {
            let grid = symmetric_grid(cfg)?;
            let inner = BlidMap::Pointwise(PointwiseBlid::new(cfg.bump()));
            Ok((
                BlidMap::Projected(ProjectedBlid::new(
                    Projector::EvenPart,
                    inner,
                    ProjectionSide::Image,
                )),
                grid,
            ))
        }),
    ];
    for (id, make) in blid_diff {
        cases.push(CaseSpec::new(id, move |cfg, rng| {
            let (blid, grid) = make(cfg)?;
            let q = blid.input_order();
            let mut directions: Vec<CqElement> =
                (0..3).map(|_| sampling::random_element(q, grid, rng)).collect();
            if let BlidMap::Projected(_) = blid {
                // Probe within the projected subspace, where the map is the
                // local identity.
                let p = Projector::EvenPart;
                for d in directions.iter_mut() {
                    *d = p.apply(d)?;
                }
            }
            let probe =
                DirectionalProbe::new(CqElement::zero(q, grid), blid.kind_label(), directions)?;
            let report = bounded_diff_test(
                |x: &CqElement| blid.apply(x),
                |h| h.clone(),
                &probe,
                &DiffTestOptions::default(),
            )?;
            diff_outcome(report, true)
        }));
    }

    cases.push(CaseSpec::new("diff/step_negative_control", |_cfg, _rng| {
        // Jump map: not differentiable at 0, the probe must say so.
        let probe = DirectionalProbe::new(vec![0.0], "unit step map", vec![vec![1.0]])?;
        let report = bounded_diff_test(
            |v: &Vec<f64>| Ok(vec![if v[0] > 0.0 { 1.0 } else { 0.0 }]),
            |h| h.clone(),
            &probe,
            &DiffTestOptions::default(),
        )?;
        diff_outcome(report, false)
    }));

    cases
}

fn quadratic_map(v: &[f64]) -> Vec<f64> {
    vec![v[0] * v[0] + v[1] * v[1], v[0] * v[1]]
}

fn quadratic_jacobian(x: &[f64], h: &[f64]) -> Vec<f64> {
    vec![2.0 * x[0] * h[0] + 2.0 * x[1] * h[1], x[1] * h[0] + x[0] * h[1]]
}

// ------------------------------------------------------------------
// extend
// ------------------------------------------------------------------

/// Germ extensions: agreement near zero, reference values, global bounds,
/// and rejection of germ/blid pairs whose image leaves the validity ball.
fn extend_cases() -> Vec<CaseSpec> {
    let mut cases = Vec::new();

    cases.push(CaseSpec::new("agreement/geometric", |cfg, rng| {
        let map = extend(Germ::catalog("geometric")?, pointwise(cfg))?;
        let tol = cfg.tol("agreement", 1e-10);
        from_certificate(agreement_check(&map, unit_grid(cfg), 0.3, 300, tol, rng)?, vec![])
    }));

    cases.push(CaseSpec::new("agreement/exp_mean", |cfg, rng| {
        let map = extend(Germ::catalog("exp-mean")?, pointwise(cfg))?;
        let tol = cfg.tol("agreement", 1e-10);
        from_certificate(agreement_check(&map, unit_grid(cfg), 0.3, 300, tol, rng)?, vec![])
    }));

    cases.push(CaseSpec::new("value/constant_two", |cfg, _rng| {
        let map = extend(Germ::catalog("geometric")?, pointwise(cfg))?;
        // Far outside the damping support the integrand collapses to 1 and
        // the quadrature is exact: the value must be exactly 1.
        let x = CqElement::from_profile(0, unit_grid(cfg), |_| 0.0, |_| 2.0)?;
        let value = map.eval(&x)?[0];
        let observed = (value - 1.0).abs();
        Ok(CaseOutcome {
            pass: observed == 0.0,
            summary: format!("geometric germ at the constant 2: value {value} (want exactly 1)"),
            observed: Some(observed),
            bound: Some(0.0),
            details: json!({ "value": value }),
            series: vec![],
        })
    }));

    cases.push(CaseSpec::new("value/quarter_ramp", |cfg, _rng| {
        let map = extend(Germ::catalog("geometric")?, pointwise(cfg))?;
        // x(t) = t/4 stays inside the identity plateau, so the exact value
        // is the integral of 1/(1 - t/4): 4 ln(4/3).
        let x = CqElement::from_profile(0, unit_grid(cfg), |_| 0.0, |t| t / 4.0)?;
        let value = map.eval(&x)?[0];
        let want = 4.0 * (4f64 / 3.0).ln();
        let tol = cfg.tol("quadrature", 1e-8);
        let observed = (value - want).abs();
        Ok(CaseOutcome {
            pass: observed <= tol,
            summary: format!(
                "geometric germ on the ramp t/4: value {value:.12} vs 4 ln(4/3) = {want:.12}"
            ),
            observed: Some(observed),
            bound: Some(tol),
            details: json!({ "value": value, "reference": want }),
            series: vec![],
        })
    }));

    cases.push(CaseSpec::new("bound/geometric", |cfg, rng| {
        let map = extend(Germ::catalog("geometric")?, pointwise(cfg))?;
        let slack = cfg.tol("envelope_slack", 1e-9);
        from_certificate(boundedness_check(&map, unit_grid(cfg), 1e3, 1000, slack, rng)?, vec![])
    }));

    cases.push(CaseSpec::new("bound/exp_mean", |cfg, rng| {
        let map = extend(Germ::catalog("exp-mean")?, pointwise(cfg))?;
        let slack = cfg.tol("envelope_slack", 1e-9);
        from_certificate(boundedness_check(&map, unit_grid(cfg), 1e3, 1000, slack, rng)?, vec![])
    }));

    cases.push(CaseSpec::new("validity/rejects_far_anchor", |cfg, _rng| {
        // A segment blid anchored at the constant 0.8 has image ball
        // 0.8 + sup h(u)u, which crosses the geometric germ's pole at 1;
        // the extension must refuse the pairing.
        let anchor = CqElement::from_profile(0, unit_grid(cfg), |_| 0.0, |_| 0.8)?;
        let wide = BlidMap::Segment(SegmentBlid::new(cfg.bump(), anchor)?);
        let outcome = extend(Germ::catalog("geometric")?, wide);
        let pass = outcome.is_err();
        let message = outcome.err().map(|e| e.to_string()).unwrap_or_default();
        Ok(CaseOutcome {
            pass,
            summary: if pass {
                format!("extension rejected as required: {message}")
            } else {
                "extension accepted a blid image wider than the germ validity ball".into()
            },
            observed: None,
            bound: None,
            details: json!({ "error": message }),
            series: vec![],
        })
    }));

    cases
}

fn pointwise(cfg: &SuiteConfig) -> BlidMap {
    BlidMap::Pointwise(PointwiseBlid::new(cfg.bump()))
}

// ------------------------------------------------------------------
// borel
// ------------------------------------------------------------------

/// P_j = j! x^j for j <= 5: the jet of 1/(1-x) at 0, realized by a bounded
/// map despite the series' radius of convergence.
fn factorial_jets() -> Result<JetSequence> {
    let entries: Vec<HomPoly<f64>> = (1..=5u32)
        .map(|j| {
            let coeff = (1..=j).map(|i| i as f64).product::<f64>();
            HomPoly::from_terms(1, j, &[(vec![j], coeff)])
        })
        .collect::<blid_core::Result<_>>()?;
    Ok(JetSequence::new(1, entries)?)
}

fn borel_cases() -> Vec<CaseSpec> {
    let mut cases = Vec::new();

    cases.push(CaseSpec::new("ladder/factorial_budget", |cfg, _rng| {
        let realization = borel_realize(&factorial_jets()?, cfg.bump())?;
        // Each term must respect its summability budget |P_j| (eps a)^j / j!
        // <= 2^-j; that is what makes the realization globally bounded.
        let a = cfg.bump().sup_hu();
        let mut worst = 0f64;
        let mut rows = Vec::new();
        for term in &realization.terms {
            let j = term.poly.degree;
            let factorial: f64 = (1..=j).map(|i| i as f64).product();
            let used = term.poly.coeff_l1() * (term.eps * a).powi(j as i32) / factorial;
            let budget = 2f64.powi(-(j as i32));
            worst = worst.max(used / budget);
            rows.push(vec![j as f64, term.eps, used, budget]);
        }
        Ok(CaseOutcome {
            pass: worst <= 1.0,
            summary: format!(
                "epsilon ladder over {} terms: worst budget use {:.3}",
                realization.terms.len(),
                worst
            ),
            observed: Some(worst),
            bound: Some(1.0),
            details: json!({
                "eps": realization.terms.iter().map(|t| t.eps).collect::<Vec<_>>(),
                "worst_budget_use": worst,
            }),
            series: vec![PlotSeries {
                name: "budget".into(),
                columns: vec!["degree".into(), "eps".into(), "used".into(), "budget".into()],
                rows,
            }],
        })
    }));

    cases.push(CaseSpec::new("jets/factorial", |cfg, _rng| {
        let jets = factorial_jets()?;
        let realization = borel_realize(&jets, cfg.bump())?;
        let opts = JetVerifyOptions {
            tol_strict: cfg.tol("jet_strict", 1e-3),
            tol_loose: cfg.tol("jet_loose", 1e-2),
            ..JetVerifyOptions::default()
        };
        let report = jet_verify(&realization, &jets, &opts)?;
        let rows: Vec<Vec<f64>> = report
            .degrees
            .iter()
            .map(|d| vec![d.degree as f64, d.observed_rel_err, d.tol])
            .collect();
        let worst = report
            .degrees
            .iter()
            .map(|d| d.observed_rel_err / d.tol)
            .fold(0f64, f64::max);
        Ok(CaseOutcome {
            pass: report.pass,
            summary: format!(
                "finite differences recover {} jet orders; worst error at {:.1}% of tolerance",
                report.degrees.len(),
                100.0 * worst
            ),
            observed: Some(worst),
            bound: Some(1.0),
            details: serde_json::to_value(&report)?,
            series: vec![PlotSeries {
                name: "jet_errors".into(),
                columns: vec!["degree".into(), "rel_err".into(), "tol".into()],
                rows,
            }],
        })
    }));

    cases.push(CaseSpec::new("bound/factorial", |cfg, rng| {
        let realization = borel_realize(&factorial_jets()?, cfg.bump())?;
        let slack = cfg.tol("borel_slack", 1.1);
        from_certificate(borel_bound_check(&realization, 1e3, 1000, slack, rng)?, vec![])
    }));

    cases.push(CaseSpec::new("jets/plane", |cfg, _rng| {
        let entries = vec![
            HomPoly::from_terms(2, 1, &[(vec![1, 0], 1.0), (vec![0, 1], 2.0)])?,
            HomPoly::from_terms(2, 2, &[(vec![2, 0], 1.0), (vec![0, 2], -1.0)])?,
        ];
        let jets = JetSequence::new(2, entries)?;
        let realization = borel_realize(&jets, cfg.bump())?;
        let report = jet_verify(&realization, &jets, &JetVerifyOptions::default())?;
        Ok(CaseOutcome {
            pass: report.pass,
            summary: format!(
                "plane jet realization matches both prescribed orders ({} checks)",
                report.degrees.len()
            ),
            observed: report.degrees.iter().map(|d| d.observed_rel_err).fold(None, |acc, v| {
                Some(acc.map_or(v, |a: f64| a.max(v)))
            }),
            bound: Some(1e-3),
            details: serde_json::to_value(&report)?,
            series: vec![],
        })
    }));

    cases
}

// ------------------------------------------------------------------
// cohomology
// ------------------------------------------------------------------

fn scalar_auto(lambda: f64) -> Result<LinearAuto> {
    Ok(LinearAuto::new(DMatrix::from_row_slice(1, 1, &[lambda]))?)
}

fn cohomology_cases() -> Vec<CaseSpec> {
    let mut cases = Vec::new();

    cases.push(CaseSpec::new("exact/linear", |cfg, _rng| {
        // (Q o A - Q)(x) = x with A = 2 has the closed-form solution Q = x.
        let auto = scalar_auto(2.0)?;
        let p = HomPoly::from_terms(1, 1, &[(vec![1], 1.0)])?;
        let q = solve_order(&auto, 1, &p)?;
        let observed = (q.coeffs[0] - Complex::new(1.0, 0.0)).norm();
        let tol = cfg.tol("cohomology_exact", 1e-12);
        Ok(CaseOutcome {
            pass: observed <= tol,
            summary: format!("degree-1 solution coefficient off by {observed:.3e} from 1"),
            observed: Some(observed),
            bound: Some(tol),
            details: json!({ "coefficient": [q.coeffs[0].re, q.coeffs[0].im] }),
            series: vec![],
        })
    }));

    cases.push(CaseSpec::new("exact/quadratic", |cfg, _rng| {
        // (Q o A - Q)(x) = x^2 with A = 2: Q = x^2 / 3.
        let auto = scalar_auto(2.0)?;
        let p = HomPoly::from_terms(1, 2, &[(vec![2], 1.0)])?;
        let q = solve_order(&auto, 2, &p)?;
        let observed = (q.coeffs[0] - Complex::new(1.0 / 3.0, 0.0)).norm();
        let tol = cfg.tol("cohomology_exact", 1e-12);
        Ok(CaseOutcome {
            pass: observed <= tol,
            summary: format!("degree-2 solution coefficient off by {observed:.3e} from 1/3"),
            observed: Some(observed),
            bound: Some(tol),
            details: json!({ "coefficient": [q.coeffs[0].re, q.coeffs[0].im] }),
            series: vec![],
        })
    }));

    cases.push(CaseSpec::new("resonance/saddle_xy", |_cfg, _rng| {
        // lambda = (2, 1/2) makes lambda^(1,1) = 1: the xy term is resonant
        // and the solver must name exactly that index.
        let auto = LinearAuto::new(DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]))?;
        let p = HomPoly::from_terms(2, 2, &[(vec![1, 1], 1.0)])?;
        let outcome = solve_order(&auto, 2, &p);
        let (pass, message) = match outcome {
            Err(CoreError::Resonant { degree, ref indices }) => (
                degree == 2 && indices == &vec!["(1,1)".to_string()],
                format!("resonant at degree {degree}, indices {indices:?}"),
            ),
            Err(ref e) => (false, format!("unexpected error: {e}")),
            Ok(_) => (false, "solver accepted a resonant right-hand side".into()),
        };
        Ok(CaseOutcome {
            pass,
            summary: message.clone(),
            observed: None,
            bound: None,
            details: json!({ "outcome": message }),
            series: vec![],
        })
    }));

    cases.push(CaseSpec::new("spectrum/random_matrices", |cfg, rng| {
        let tol = cfg.tol("spectrum", 1e-6);
        let draws = 20;
        let mut worst = 0f64;
        let mut all_pass = true;
        let mut rows = Vec::new();
        for draw in 0..draws {
            let d = rng.random_range(1..=3usize);
            let n = rng.random_range(1..=4u32);
            let auto = loop {
                let entries: Vec<f64> =
                    (0..d * d).map(|_| rng.random_range(-1.5..=1.5)).collect();
                if let Ok(a) = LinearAuto::new(DMatrix::from_row_slice(d, d, &entries)) {
                    break a;
                }
            };
            let cert = eigenvalue_law_check(&auto, n, tol)?;
            worst = worst.max(cert.observed_max);
            all_pass &= cert.pass;
            rows.push(vec![draw as f64, d as f64, n as f64, cert.observed_max]);
        }
        Ok(CaseOutcome {
            pass: all_pass,
            summary: format!(
                "composition spectra match eigenvalue products over {draws} draws; worst gap {worst:.3e}"
            ),
            observed: Some(worst),
            bound: Some(tol),
            details: json!({ "draws": draws, "worst_gap": worst }),
            series: vec![PlotSeries {
                name: "spectrum_gaps".into(),
                columns: vec!["draw".into(), "dim".into(), "degree".into(), "gap".into()],
                rows,
            }],
        })
    }));

    cases.push(CaseSpec::new("residual/cubic_tail", |_cfg, _rng| {
        // Solving x + x^2 + x^3 through degree 2 leaves exactly the cubic
        // term: the conjugacy residual must shrink at third order.
        let auto = scalar_auto(2.0)?;
        let jets = JetSequence::new(
            1,
            vec![
                HomPoly::from_terms(1, 2, &[(vec![2], 1.0)])?,
                HomPoly::from_terms(1, 3, &[(vec![3], 1.0)])?,
            ],
        )?;
        let solution = solve_truncated(&auto, &jets, 2)?;
        let report = residual_order_check(&auto, &jets, &solution)?;
        let rows: Vec<Vec<f64>> =
            report.points.iter().map(|p| vec![p.scale, p.residual]).collect();
        Ok(CaseOutcome {
            pass: report.pass,
            summary: format!(
                "order-2 solution residual decays with slope {:?} (need >= 2.5)",
                report.slope.map(|s| (s * 100.0).round() / 100.0)
            ),
            observed: report.slope,
            bound: Some(report.order as f64 + 0.5),
            details: serde_json::to_value(&report)?,
            series: vec![PlotSeries {
                name: "residual".into(),
                columns: vec!["scale".into(), "residual".into()],
                rows,
            }],
        })
    }));

    cases.push(CaseSpec::new("residual/cubic_complete", |_cfg, _rng| {
        let auto = scalar_auto(2.0)?;
        let jets = JetSequence::new(
            1,
            vec![
                HomPoly::from_terms(1, 2, &[(vec![2], 1.0)])?,
                HomPoly::from_terms(1, 3, &[(vec![3], 1.0)])?,
            ],
        )?;
        let solution = solve_truncated(&auto, &jets, 3)?;
        let report = residual_order_check(&auto, &jets, &solution)?;
        Ok(CaseOutcome {
            pass: report.pass && report.exact,
            summary: format!(
                "order-3 solution leaves no residual (exact = {})",
                report.exact
            ),
            observed: report.points.iter().map(|p| p.residual).fold(None, |acc, v| {
                Some(acc.map_or(v, |a: f64| a.max(v)))
            }),
            bound: Some(1e-13),
            details: serde_json::to_value(&report)?,
            series: vec![],
        })
    }));

    cases
}

// ------------------------------------------------------------------
// linearize-cutoff
// ------------------------------------------------------------------

fn linearize_cases() -> Vec<CaseSpec> {
    let mut cases = Vec::new();

    for (id, name, delta) in [
        ("smallness/quadratic_scalar", "quadratic-scalar", 0.1),
        ("smallness/cubic_scalar", "cubic-scalar", 0.2),
        ("smallness/plane_saddle", "plane-saddle", 0.1),
    ] {
        cases.push(CaseSpec::new(id, move |cfg, rng| {
            let part = NonlinearPart::from_poly_map(PolyMap::catalog(name)?)?;
            let map = cutoff(part, cfg.bump(), delta)?;
            let report = smallness_check(&map, 4, rng)?;
            let dim = map.part.map.dim;
            // Radial profile of the damped nonlinearity along e1.
            let rows: Vec<Vec<f64>> = (0..=60)
                .map(|i| {
                    let r = 1.2 * delta * i as f64 / 60.0;
                    let mut x = vec![0.0; dim];
                    x[0] = r;
                    let nl = map.eval_nonlinear(&x)?;
                    Ok(vec![r, nl.iter().map(|v| v * v).sum::<f64>().sqrt()])
                })
                .collect::<Result<_>>()?;
            Ok(CaseOutcome {
                pass: report.pass,
                summary: format!(
                    "{name} at delta {delta}: S1 {:.3e} <= {:.3e}, S2 {:.3e} <= {:.3e}",
                    report.s1, report.bound1, report.s2, report.bound2
                ),
                observed: Some(report.s1),
                bound: Some(report.bound1),
                details: serde_json::to_value(&report)?,
                series: vec![PlotSeries {
                    name: "radial_profile".into(),
                    columns: vec!["radius".into(), "nonlinearity".into()],
                    rows,
                }],
            })
        }));
    }

    cases.push(CaseSpec::new("identity/inside_plateau", |cfg, rng| {
        let delta = 0.1;
        let part = NonlinearPart::from_poly_map(PolyMap::catalog("quadratic-scalar")?)?;
        let map = cutoff(part, cfg.bump(), delta)?;
        let plateau = delta * cfg.bump.r_inner;
        let samples = 200;
        let mut observed = 0f64;
        for _ in 0..samples {
            let x = vec![rng.random_range(-plateau..=plateau)];
            let damped = map.eval(&x)?;
            let original = map.part.map.eval(&x)?;
            // The only discrepancy allowed is the (x/delta)*delta rounding.
            let tol = 1e-17 + 1e-13 * x[0].abs();
            let diff = (damped[0] - original[0]).abs();
            observed = observed.max(if tol > 0.0 { diff / tol } else { diff });
        }
        Ok(CaseOutcome {
            pass: observed <= 1.0,
            summary: format!(
                "cutoff equals the map inside the plateau; worst rounding use {:.2}%",
                100.0 * observed
            ),
            observed: Some(observed),
            bound: Some(1.0),
            details: json!({ "samples": samples, "plateau_radius": plateau }),
            series: vec![],
        })
    }));

    cases.push(CaseSpec::new("exterior/exactly_linear", |cfg, rng| {
        let delta = 0.1;
        let part = NonlinearPart::from_poly_map(PolyMap::catalog("quadratic-scalar")?)?;
        let map = cutoff(part, cfg.bump(), delta)?;
        let support = delta * cfg.bump.r_outer;
        let samples = 200;
        let mut observed = 0f64;
        for _ in 0..samples {
            let r = rng.random_range(support..=4.0 * delta);
            let sign = if rng.random_range(0..2) == 0 { -1.0 } else { 1.0 };
            let nl = map.eval_nonlinear(&[sign * r])?;
            observed = observed.max(nl[0].abs());
        }
        Ok(CaseOutcome {
            pass: observed == 0.0,
            summary: format!(
                "nonlinearity outside the support: max |f~| {observed:.3e} (want exactly 0)"
            ),
            observed: Some(observed),
            bound: Some(0.0),
            details: json!({ "samples": samples, "support_radius": support }),
            series: vec![],
        })
    }));

    cases.push(CaseSpec::new("split/radial_plane", |cfg, rng| {
        let blid = RadialBlid::new(cfg.bump(), 2)?;
        let report = split_bound_check(&blid, 0.1, 0.05, 200, rng)?;
        Ok(CaseOutcome {
            pass: report.pass,
            summary: format!(
                "split bounds: small part {:.3e} <= {:.3e}, large part {:.3e} <= {:.3e}",
                report.small_max, report.small_bound, report.large_max, report.large_bound
            ),
            observed: Some(report.small_max.max(report.large_max)),
            bound: Some(report.small_bound.max(report.large_bound)),
            details: serde_json::to_value(&report)?,
            series: vec![],
        })
    }));

    cases
}
