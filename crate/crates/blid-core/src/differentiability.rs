use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::space::CqElement;

/// Minimal linear-space-with-norm surface the probes need. Implemented for
/// finite-dimensional vectors (Euclidean norm) and for discretized elements
/// (C^q norm).
pub trait ProbeSpace: Clone {
    fn add_scaled(&self, t: f64, dir: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn scale(&self, a: f64) -> Self;
    fn norm(&self) -> f64;
}

impl ProbeSpace for Vec<f64> {
    fn add_scaled(&self, t: f64, dir: &Self) -> Self {
        assert_eq!(self.len(), dir.len(), "dimension mismatch");
        self.iter().zip(dir).map(|(a, b)| a + t * b).collect()
    }

    fn sub(&self, other: &Self) -> Self {
        self.add_scaled(-1.0, other)
    }

    fn scale(&self, a: f64) -> Self {
        self.iter().map(|v| a * v).collect()
    }

    fn norm(&self) -> f64 {
        self.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl ProbeSpace for CqElement {
    fn add_scaled(&self, t: f64, dir: &Self) -> Self {
        CqElement::add_scaled(self, t, dir)
    }

    fn sub(&self, other: &Self) -> Self {
        CqElement::sub(self, other)
    }

    fn scale(&self, a: f64) -> Self {
        CqElement::scale(self, a)
    }

    fn norm(&self) -> f64 {
        self.cq_norm()
    }
}

/// Base point, unit directions, and the step ladder a differentiability probe
/// walks down.
#[derive(Debug, Clone)]
pub struct DirectionalProbe<X: ProbeSpace> {
    pub base: X,
    pub label: String,
    pub directions: Vec<X>,
    pub steps: Vec<f64>,
}

pub const DEFAULT_STEPS: [f64; 5] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5];

impl<X: ProbeSpace> DirectionalProbe<X> {
    /// Directions are normalized on construction; zero directions are
    /// rejected.
    pub fn new(base: X, label: impl Into<String>, directions: Vec<X>) -> Result<Self> {
        if directions.is_empty() {
            return Err(CoreError::invalid("probe.directions", "need at least one"));
        }
        let mut normed = Vec::with_capacity(directions.len());
        for d in directions {
            let n = d.norm();
            if !(n > 0.0) {
                return Err(CoreError::invalid("probe.directions", "zero direction"));
            }
            normed.push(d.scale(1.0 / n));
        }
        Ok(DirectionalProbe {
            base,
            label: label.into(),
            directions: normed,
            steps: DEFAULT_STEPS.to_vec(),
        })
    }

    pub fn with_steps(mut self, steps: Vec<f64>) -> Self {
        self.steps = steps;
        self
    }
}

/// Tolerances for deciding whether the remainder ratios vanish.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DiffTestOptions {
    /// Ratios at or below this are treated as converged to zero.
    pub floor: f64,
    /// Minimum least-squares slope of log(ratio) against log(step).
    pub slope_min: f64,
}

impl Default for DiffTestOptions {
    fn default() -> Self {
        DiffTestOptions {
            floor: 1e-9,
            slope_min: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StepRatio {
    pub step: f64,
    pub ratio: f64,
}

/// Outcome of a differentiability probe. `ratio` at step t is the worst
/// direction's remainder norm divided by t; differentiability in the probed
/// sense means the ratios vanish as t does.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiffReport {
    pub notion: String,
    pub base: String,
    pub n_directions: usize,
    pub ratios: Vec<StepRatio>,
    /// Fitted decay order of the ratios; None when they sit on the floor.
    pub slope: Option<f64>,
    pub pass: bool,
}

fn fit_and_judge(
    notion: &str,
    base: String,
    n_directions: usize,
    ratios: Vec<StepRatio>,
    opts: &DiffTestOptions,
) -> DiffReport {
    let last = ratios.last().map(|r| r.ratio).unwrap_or(f64::INFINITY);
    let loggable: Vec<(f64, f64)> = ratios
        .iter()
        .filter(|r| r.ratio > opts.floor)
        .map(|r| (r.step.ln(), r.ratio.ln()))
        .collect();
    let slope = if loggable.len() >= 2 {
        let n = loggable.len() as f64;
        let sx: f64 = loggable.iter().map(|p| p.0).sum();
        let sy: f64 = loggable.iter().map(|p| p.1).sum();
        let sxx: f64 = loggable.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = loggable.iter().map(|p| p.0 * p.1).sum();
        Some((n * sxy - sx * sy) / (n * sxx - sx * sx))
    } else {
        None
    };
    let floor_converged = last <= opts.floor;
    let pass = floor_converged || slope.map_or(false, |s| s >= opts.slope_min);
    DiffReport {
        notion: notion.into(),
        base,
        n_directions,
        ratios,
        slope,
        pass,
    }
}

/// Probes bounded (Frechet-with-bounded-sets) differentiability of `map` at
/// the probe's base against the linear candidate `lin`: for each step t the
/// worst remainder ||map(x + t h) - map(x) - t lin(h)|| / t over the probe
/// directions must vanish as t shrinks.
pub fn bounded_diff_test<X: ProbeSpace, Y: ProbeSpace>(
    map: impl Fn(&X) -> Result<Y>,
    lin: impl Fn(&X) -> Y,
    probe: &DirectionalProbe<X>,
    opts: &DiffTestOptions,
) -> Result<DiffReport> {
    let fx = map(&probe.base)?;
    let mut ratios = Vec::with_capacity(probe.steps.len());
    for &t in &probe.steps {
        if !(t > 0.0) {
            return Err(CoreError::invalid("probe.steps", "must be positive"));
        }
        let mut worst = 0f64;
        for h in &probe.directions {
            let fxth = map(&probe.base.add_scaled(t, h))?;
            let remainder = fxth.sub(&fx).add_scaled(-t, &lin(h));
            worst = worst.max(remainder.norm() / t);
        }
        ratios.push(StepRatio {
            step: t,
            ratio: worst,
        });
    }
    Ok(fit_and_judge(
        "bounded",
        probe.label.clone(),
        probe.directions.len(),
        ratios,
        opts,
    ))
}

/// Probes compact (Hadamard) differentiability: directions h_n converging to
/// a limit h ride along the step ladder t_n, and the remainder
/// ||map(x + t_n h_n) - map(x) - t_n lin(h)|| / t_n must vanish. `directions`
/// and `steps` are consumed pairwise.
pub fn compact_diff_test<X: ProbeSpace, Y: ProbeSpace>(
    map: impl Fn(&X) -> Result<Y>,
    lin_at_limit: &Y,
    base: &X,
    base_label: impl Into<String>,
    directions: &[X],
    steps: &[f64],
    opts: &DiffTestOptions,
) -> Result<DiffReport> {
    if directions.len() != steps.len() || directions.is_empty() {
        return Err(CoreError::invalid(
            "compact probe",
            "need equally many directions and steps, at least one",
        ));
    }
    let fx = map(base)?;
    let mut ratios = Vec::with_capacity(steps.len());
    for (h, &t) in directions.iter().zip(steps) {
        if !(t > 0.0) {
            return Err(CoreError::invalid("probe.steps", "must be positive"));
        }
        let fxth = map(&base.add_scaled(t, h))?;
        let remainder = fxth.sub(&fx).add_scaled(-t, lin_at_limit);
        ratios.push(StepRatio {
            step: t,
            ratio: remainder.norm() / t,
        });
    }
    Ok(fit_and_judge(
        "compact",
        base_label.into(),
        directions.len(),
        ratios,
        opts,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blid::{BlidMap, PointwiseBlid};
    use crate::bump::BumpFunction;
    use crate::grid::GridInterval;

    fn opts() -> DiffTestOptions {
        DiffTestOptions::default()
    }

    #[test]
    fn quadratic_map_has_unit_slope() {
        // F(v) = (v.v) with derivative A(h) = 2 x.h: remainder is t^2 |h|^2,
        // so ratio = t and the fitted slope is 1.
        let base = vec![0.5, -0.25];
        let probe = DirectionalProbe::new(
            base.clone(),
            "x0",
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
        )
        .unwrap();
        let report = bounded_diff_test(
            |v: &Vec<f64>| Ok(vec![v[0] * v[0] + v[1] * v[1]]),
            |h: &Vec<f64>| vec![2.0 * (base[0] * h[0] + base[1] * h[1])],
            &probe,
            &opts(),
        )
        .unwrap();
        assert!(report.pass, "{report:?}");
        let slope = report.slope.unwrap();
        assert!((slope - 1.0).abs() < 0.05, "slope = {slope}");
    }

    #[test]
    fn linear_map_converges_to_the_floor() {
        let probe =
            DirectionalProbe::new(vec![1.0, 2.0], "x0", vec![vec![3.0, 4.0]]).unwrap();
        let report = bounded_diff_test(
            |v: &Vec<f64>| Ok(vec![v[0] + 2.0 * v[1]]),
            |h: &Vec<f64>| vec![h[0] + 2.0 * h[1]],
            &probe,
            &opts(),
        )
        .unwrap();
        assert!(report.pass);
        assert!(report.slope.is_none());
        assert!(report.ratios.iter().all(|r| r.ratio <= 1e-9));
    }

    #[test]
    fn step_discontinuity_fails_the_probe() {
        let probe = DirectionalProbe::new(vec![0.0], "origin", vec![vec![1.0]]).unwrap();
        let report = bounded_diff_test(
            |v: &Vec<f64>| Ok(vec![if v[0] > 0.0 { 1.0 } else { 0.0 }]),
            |_h: &Vec<f64>| vec![0.0],
            &probe,
            &opts(),
        )
        .unwrap();
        assert!(!report.pass, "{report:?}");
        assert!(report.slope.unwrap() < 0.0);
    }

    #[test]
    fn blid_at_zero_is_flat_to_the_identity() {
        // Inside the identity ball the remainder is exactly zero: the probe
        // converges by floor, with no slope to fit.
        let g = GridInterval::unit(129);
        let blid = BlidMap::Pointwise(PointwiseBlid::new(BumpFunction::default()));
        let dir = CqElement::from_profile(0, g, |_| 0.0, |t| (3.0 * t).cos()).unwrap();
        let probe = DirectionalProbe::new(CqElement::zero(0, g), "0", vec![dir]).unwrap();
        let report = bounded_diff_test(
            |x: &CqElement| blid.apply(x),
            |h: &CqElement| h.clone(),
            &probe,
            &opts(),
        )
        .unwrap();
        assert!(report.pass);
        assert!(report.slope.is_none());
    }

    #[test]
    fn compact_probe_accepts_converging_directions() {
        // F(v) = v0^2 at x = (1), directions h_n = (1 + 4^-n) -> h = (1):
        // remainder/t = |t h_n^2 + 2(h_n - 1)| -> 0 at first order.
        let base = vec![1.0];
        let steps: Vec<f64> = (1..=5).map(|n| 2f64.powi(-2 * n)).collect();
        let dirs: Vec<Vec<f64>> = steps.iter().map(|&t| vec![1.0 + t]).collect();
        let lin = vec![2.0];
        let report = compact_diff_test(
            |v: &Vec<f64>| Ok(vec![v[0] * v[0]]),
            &lin,
            &base,
            "x0",
            &dirs,
            &steps,
            &opts(),
        )
        .unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.slope.unwrap() > 0.9);
    }

    #[test]
    fn report_serializes_with_expected_keys() {
        let probe = DirectionalProbe::new(vec![0.0], "origin", vec![vec![1.0]]).unwrap();
        let report = bounded_diff_test(
            |v: &Vec<f64>| Ok(v.clone()),
            |h: &Vec<f64>| h.clone(),
            &probe,
            &opts(),
        )
        .unwrap();
        let v: serde_json::Value = serde_json::to_value(&report).unwrap();
        for key in ["notion", "base", "n_directions", "ratios", "slope", "pass"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn malformed_probes_are_rejected() {
        assert!(DirectionalProbe::<Vec<f64>>::new(vec![0.0], "x", vec![]).is_err());
        assert!(DirectionalProbe::new(vec![0.0], "x", vec![vec![0.0]]).is_err());
        let probe = DirectionalProbe::new(vec![0.0], "x", vec![vec![1.0]])
            .unwrap()
            .with_steps(vec![-1.0]);
        assert!(bounded_diff_test(
            |v: &Vec<f64>| Ok(v.clone()),
            |h: &Vec<f64>| h.clone(),
            &probe,
            &opts()
        )
        .is_err());
    }
}
