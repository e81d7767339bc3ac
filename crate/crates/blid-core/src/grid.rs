use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Uniform grid on a closed interval.
///
/// `n` points including both endpoints, so the step is `(right - left) / (n - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridInterval {
    pub left: f64,
    pub right: f64,
    #[serde(rename = "n")]
    pub n_points: usize,
}

impl GridInterval {
    pub fn new(left: f64, right: f64, n_points: usize) -> Result<Self> {
        if !left.is_finite() || !right.is_finite() {
            return Err(CoreError::invalid("grid", "endpoints must be finite"));
        }
        if right <= left {
            return Err(CoreError::invalid("grid", "right endpoint must exceed left"));
        }
        if n_points < 2 {
            return Err(CoreError::invalid("grid", "need at least two points"));
        }
        Ok(GridInterval {
            left,
            right,
            n_points,
        })
    }

    /// Unit interval with a power-of-two step, so grid points are exact binary floats.
    pub fn unit(n_points: usize) -> Self {
        GridInterval::new(0.0, 1.0, n_points).expect("valid unit grid")
    }

    pub fn step(&self) -> f64 {
        (self.right - self.left) / (self.n_points - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.left + i as f64 * self.step()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|i| self.point(i)).collect()
    }

    /// True when the grid is symmetric about 0, which reflection projectors require.
    pub fn is_symmetric(&self) -> bool {
        (self.left + self.right).abs() < 1e-14 * (self.right - self.left).abs()
    }
}

/// Cumulative trapezoid antiderivative: output[0] = 0 and
/// output[i] = output[i-1] + h * (v[i-1] + v[i]) / 2.
///
/// The discrete result inherits the exact bound |output[i]| <= t_i * max|v|,
/// which the blid certificates rely on.
pub fn cumulative_trapezoid(values: &[f64], step: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += step * (w[0] + w[1]) / 2.0;
        out.push(acc);
    }
    out
}

/// Composite Simpson rule. Requires an odd number of points (even panel count).
pub fn simpson(values: &[f64], step: f64) -> Result<f64> {
    let n = values.len();
    if n < 3 || n % 2 == 0 {
        return Err(CoreError::invalid(
            "simpson",
            format!("needs an odd point count >= 3, got {n}"),
        ));
    }
    let mut sum = 0.0;
    for (i, v) in values.iter().enumerate() {
        let w = if i == 0 || i == n - 1 {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        sum += w * v;
    }
    Ok(sum * step / 3.0)
}
