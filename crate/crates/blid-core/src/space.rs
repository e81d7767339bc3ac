use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::grid::{cumulative_trapezoid, GridInterval};

/// Which function space a discretized element is read in. The kind decides how
/// the seminorm family indexes windows and derivative orders:
///
/// * `CqInterval`: Banach space C^q on a compact interval; every seminorm is
///   the full norm max_{j<=q} sup |x^(j)|.
/// * `CqLine`: C^q on the line with bounded derivatives; seminorm k takes the
///   sup over the window |t| <= k+1 (clipped to the stored domain).
/// * `CinfInterval`: Frechet space C^inf on a compact interval; seminorm k is
///   max_{j<=min(k,q)} sup |x^(j)|.
/// * `CinfLine`: Frechet space C^inf on the line; seminorm k combines the
///   order cap min(k, q) with the window |t| <= k+1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpaceKind {
    CqInterval,
    CqLine,
    CinfInterval,
    CinfLine,
}

impl SpaceKind {
    pub fn is_frechet(&self) -> bool {
        matches!(self, SpaceKind::CinfInterval | SpaceKind::CinfLine)
    }

    fn windowed(&self) -> bool {
        matches!(self, SpaceKind::CqLine | SpaceKind::CinfLine)
    }
}

/// Discretized C^q element: the first q derivatives at the left endpoint plus
/// uniform samples of the top derivative x^(q). Lower derivatives are
/// reconstructed by repeated cumulative trapezoid integration, feeding each
/// jet entry in as the integration constant of its level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CqElement {
    pub q: usize,
    pub domain: GridInterval,
    /// x(left), x'(left), ..., x^(q-1)(left); empty when q = 0.
    pub jet: Vec<f64>,
    /// Samples of x^(q) at the grid points.
    pub top: Vec<f64>,
}

impl CqElement {
    pub fn new(q: usize, domain: GridInterval, jet: Vec<f64>, top: Vec<f64>) -> Result<Self> {
        if jet.len() != q {
            return Err(CoreError::Malformed(format!(
                "jet length {} does not match q = {q}",
                jet.len()
            )));
        }
        if top.len() != domain.n_points {
            return Err(CoreError::Malformed(format!(
                "top has {} samples for a {}-point grid",
                top.len(),
                domain.n_points
            )));
        }
        if jet.iter().chain(top.iter()).any(|v| !v.is_finite()) {
            return Err(CoreError::NonFinite {
                context: "element data".into(),
            });
        }
        Ok(CqElement { q, domain, jet, top })
    }

    pub fn zero(q: usize, domain: GridInterval) -> Self {
        CqElement {
            q,
            domain,
            jet: vec![0.0; q],
            top: vec![0.0; domain.n_points],
        }
    }

    /// Build from closures for the jet entries and the top derivative.
    pub fn from_profile(
        q: usize,
        domain: GridInterval,
        jet: impl Fn(usize) -> f64,
        top: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let jet = (0..q).map(jet).collect();
        let top = domain.points().iter().map(|&t| top(t)).collect();
        CqElement::new(q, domain, jet, top)
    }

    /// Samples of every derivative order 0..=q, one pass of integration per
    /// level. table[j][i] = x^(j)(t_i).
    pub fn derivative_table(&self) -> Vec<Vec<f64>> {
        let mut table = vec![Vec::new(); self.q + 1];
        table[self.q] = self.top.clone();
        let h = self.domain.step();
        for j in (0..self.q).rev() {
            let mut level = cumulative_trapezoid(&table[j + 1], h);
            for v in level.iter_mut() {
                *v += self.jet[j];
            }
            table[j] = level;
        }
        table
    }

    /// Samples of x^(j) on the grid.
    pub fn derivative(&self, j: usize) -> Result<Vec<f64>> {
        if j > self.q {
            return Err(CoreError::OrderTooLow {
                have: self.q,
                need: j,
            });
        }
        Ok(self.derivative_table().swap_remove(j))
    }

    /// Samples of x itself.
    pub fn values(&self) -> Vec<f64> {
        self.derivative(0).expect("order 0 always available")
    }

    /// sup of |x^(j)| over grid points with |t| inside the window, all j <= order.
    fn sup_over(&self, table: &[Vec<f64>], order: usize, window: Option<f64>) -> f64 {
        let pts = self.domain.points();
        let mut best = 0f64;
        for level in table.iter().take(order + 1) {
            for (i, v) in level.iter().enumerate() {
                if window.map_or(true, |w| pts[i].abs() <= w + 1e-12) {
                    best = best.max(v.abs());
                }
            }
        }
        best
    }

    /// Banach norm max_{j<=q} sup |x^(j)| over the whole stored domain.
    pub fn cq_norm(&self) -> f64 {
        self.sup_over(&self.derivative_table(), self.q, None)
    }

    /// sup |x| over the stored domain.
    pub fn sup_norm(&self) -> f64 {
        self.values().iter().fold(0f64, |a, v| a.max(v.abs()))
    }

    /// Largest representation-level discrepancy between two elements of the
    /// same shape: max over jet entries and top samples.
    pub fn rep_distance(&self, other: &CqElement) -> Result<f64> {
        self.check_same_shape(other)?;
        let mut d = 0f64;
        for (a, b) in self.jet.iter().zip(&other.jet) {
            d = d.max((a - b).abs());
        }
        for (a, b) in self.top.iter().zip(&other.top) {
            d = d.max((a - b).abs());
        }
        Ok(d)
    }

    pub fn check_same_shape(&self, other: &CqElement) -> Result<()> {
        if self.q != other.q {
            return Err(CoreError::GridMismatch(format!(
                "orders differ: {} vs {}",
                self.q, other.q
            )));
        }
        if self.domain != other.domain {
            return Err(CoreError::GridMismatch("domains differ".into()));
        }
        Ok(())
    }

    /// self + t * dir, elementwise on the representation.
    pub fn add_scaled(&self, t: f64, dir: &CqElement) -> CqElement {
        self.check_same_shape(dir).expect("matching shapes");
        CqElement {
            q: self.q,
            domain: self.domain,
            jet: self
                .jet
                .iter()
                .zip(&dir.jet)
                .map(|(a, b)| a + t * b)
                .collect(),
            top: self
                .top
                .iter()
                .zip(&dir.top)
                .map(|(a, b)| a + t * b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &CqElement) -> CqElement {
        self.add_scaled(-1.0, other)
    }

    pub fn scale(&self, a: f64) -> CqElement {
        CqElement {
            q: self.q,
            domain: self.domain,
            jet: self.jet.iter().map(|v| a * v).collect(),
            top: self.top.iter().map(|v| a * v).collect(),
        }
    }

    /// CSV rendering of x^(j) samples, columns t,value.
    pub fn derivative_csv(&self, j: usize) -> Result<String> {
        let vals = self.derivative(j)?;
        let mut out = String::from("t,value\n");
        for (t, v) in self.domain.points().iter().zip(vals) {
            out.push_str(&format!("{t},{v}\n"));
        }
        Ok(out)
    }
}

/// Seminorm family of a space kind. Index k selects a derivative-order cap and
/// (on line domains) a sup window.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SeminormFamily {
    pub kind: SpaceKind,
}

impl SeminormFamily {
    pub fn new(kind: SpaceKind) -> Self {
        SeminormFamily { kind }
    }

    /// Highest derivative order entering seminorm k for an order-q element.
    pub fn order_rule(&self, q: usize, k: usize) -> usize {
        if self.kind.is_frechet() {
            k.min(q)
        } else {
            q
        }
    }

    /// Half-width of the sup window for seminorm k, None meaning the whole
    /// stored domain.
    pub fn window_rule(&self, k: usize) -> Option<f64> {
        if self.kind.windowed() {
            Some((k + 1) as f64)
        } else {
            None
        }
    }

    pub fn eval(&self, x: &CqElement, k: usize) -> f64 {
        let table = x.derivative_table();
        x.sup_over(&table, self.order_rule(x.q, k), self.window_rule(k))
    }

    /// All seminorms 0..=k_max from a single reconstruction pass.
    pub fn eval_through(&self, x: &CqElement, k_max: usize) -> Vec<f64> {
        let table = x.derivative_table();
        (0..=k_max)
            .map(|k| x.sup_over(&table, self.order_rule(x.q, k), self.window_rule(k)))
            .collect()
    }
}

/// Truncated Frechet metric d(x, y) = sum_{k<=k_max} 2^-k rho_k / (1 + rho_k)
/// with rho_k the k-th seminorm of x - y. The dropped tail is below
/// 2^-k_max, available as `tail_bound` for certified upper bounds.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FrechetMetric {
    pub family: SeminormFamily,
    pub k_max: usize,
}

pub const DEFAULT_METRIC_DEPTH: usize = 40;

impl FrechetMetric {
    pub fn new(kind: SpaceKind, k_max: usize) -> Result<Self> {
        if k_max == 0 {
            return Err(CoreError::invalid("metric.k_max", "must be at least 1"));
        }
        Ok(FrechetMetric {
            family: SeminormFamily::new(kind),
            k_max,
        })
    }

    pub fn distance(&self, x: &CqElement, y: &CqElement) -> Result<f64> {
        x.check_same_shape(y)?;
        Ok(self.distance_to_zero(&x.sub(y)))
    }

    pub fn distance_to_zero(&self, diff: &CqElement) -> f64 {
        let rhos = self.family.eval_through(diff, self.k_max);
        let mut d = 0.0;
        let mut w = 1.0;
        for rho in rhos {
            d += w * rho / (1.0 + rho);
            w *= 0.5;
        }
        d
    }

    /// Everything the truncation can hide: sum_{k>k_max} 2^-k * 1.
    pub fn tail_bound(&self) -> f64 {
        2f64.powi(-(self.k_max as i32))
    }

    /// Certified upper bound on the untruncated metric.
    pub fn distance_upper_bound(&self, x: &CqElement, y: &CqElement) -> Result<f64> {
        Ok(self.distance(x, y)? + self.tail_bound())
    }
}
