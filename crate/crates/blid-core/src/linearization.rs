use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::blid::RadialBlid;
use crate::bump::BumpFunction;
use crate::cohomology::LinearAuto;
use crate::error::{CoreError, Result};
use crate::jets::HomPoly;

/// Polynomial self-map of R^d fixing the origin: component i is a sum of
/// homogeneous terms of degree >= 1.
#[derive(Debug, Clone)]
pub struct PolyMap {
    pub dim: usize,
    pub components: Vec<Vec<HomPoly<f64>>>,
}

impl PolyMap {
    pub fn new(dim: usize, components: Vec<Vec<HomPoly<f64>>>) -> Result<Self> {
        if components.len() != dim {
            return Err(CoreError::DimensionMismatch {
                expected: dim,
                got: components.len(),
            });
        }
        for terms in &components {
            for p in terms {
                if p.dim != dim {
                    return Err(CoreError::DimensionMismatch {
                        expected: dim,
                        got: p.dim,
                    });
                }
                if p.degree == 0 {
                    return Err(CoreError::invalid(
                        "map",
                        "degree-0 terms would move the origin",
                    ));
                }
            }
        }
        Ok(PolyMap { dim, components })
    }

    /// Built-in maps, keyed by name:
    ///
    /// * `quadratic-scalar`: x -> 2x + x^2;
    /// * `cubic-scalar`: x -> 2x + x^3;
    /// * `plane-saddle`: (x, y) -> (2x + y^2, y/2 + x y).
    pub fn catalog(name: &str) -> Result<PolyMap> {
        match name {
            "quadratic-scalar" => PolyMap::new(
                1,
                vec![vec![
                    HomPoly::from_terms(1, 1, &[(vec![1], 2.0)])?,
                    HomPoly::from_terms(1, 2, &[(vec![2], 1.0)])?,
                ]],
            ),
            "cubic-scalar" => PolyMap::new(
                1,
                vec![vec![
                    HomPoly::from_terms(1, 1, &[(vec![1], 2.0)])?,
                    HomPoly::from_terms(1, 3, &[(vec![3], 1.0)])?,
                ]],
            ),
            "plane-saddle" => PolyMap::new(
                2,
                vec![
                    vec![
                        HomPoly::from_terms(2, 1, &[(vec![1, 0], 2.0)])?,
                        HomPoly::from_terms(2, 2, &[(vec![0, 2], 1.0)])?,
                    ],
                    vec![
                        HomPoly::from_terms(2, 1, &[(vec![0, 1], 0.5)])?,
                        HomPoly::from_terms(2, 2, &[(vec![1, 1], 1.0)])?,
                    ],
                ],
            ),
            other => Err(CoreError::UnknownCatalogEntry(other.into())),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.components
            .iter()
            .map(|terms| {
                let mut acc = 0.0;
                for p in terms {
                    acc += p.eval(x)?;
                }
                Ok(acc)
            })
            .collect()
    }
}

/// A polynomial map split as F = linear + f, where the linear part is read off
/// the degree-1 coefficients and f collects everything of degree >= 2. By
/// representation f(0) = 0 and Df(0) = 0 exactly.
#[derive(Debug, Clone)]
pub struct NonlinearPart {
    pub map: PolyMap,
    pub linear: LinearAuto,
}

impl NonlinearPart {
    pub fn from_poly_map(map: PolyMap) -> Result<Self> {
        let d = map.dim;
        let mut a = DMatrix::zeros(d, d);
        for (i, terms) in map.components.iter().enumerate() {
            for p in terms.iter().filter(|p| p.degree == 1) {
                for (idx, &c) in p.basis().iter().zip(&p.coeffs) {
                    let j = idx.0.iter().position(|&e| e == 1).expect("degree-1 index");
                    a[(i, j)] += c;
                }
            }
        }
        let linear = LinearAuto::new(a)?;
        Ok(NonlinearPart { map, linear })
    }

    /// f(x): the degree >= 2 terms only.
    pub fn eval_f(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.map
            .components
            .iter()
            .map(|terms| {
                let mut acc = 0.0;
                for p in terms.iter().filter(|p| p.degree >= 2) {
                    acc += p.eval(x)?;
                }
                Ok(acc)
            })
            .collect()
    }

    /// Coefficient envelope: componentwise bound on |f_i(y)| over the
    /// Euclidean ball of the given radius, combined into a Euclidean bound.
    pub fn envelope(&self, radius: f64) -> f64 {
        self.map
            .components
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .filter(|p| p.degree >= 2)
                    .map(|p| p.coeff_l1() * radius.powi(p.degree as i32))
                    .sum::<f64>()
            })
            .map(|b| b * b)
            .sum::<f64>()
            .sqrt()
    }

    /// Lipschitz bound for Df on the ball of the given radius, from second
    /// derivative coefficient sums: per component
    /// sum over degrees j >= 2 of j (j - 1) |P_j| radius^(j-2), maximized.
    pub fn df_lipschitz_bound(&self, radius: f64) -> f64 {
        self.map
            .components
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .filter(|p| p.degree >= 2)
                    .map(|p| {
                        let j = p.degree as f64;
                        j * (j - 1.0) * p.coeff_l1() * radius.powi(p.degree as i32 - 2)
                    })
                    .sum::<f64>()
            })
            .fold(0f64, f64::max)
    }
}

/// Constants governing the cutoff: the damping scale delta, the blid bounds
/// c0 = sup(h u) and c1 = sup |(h u)'|, the Df Lipschitz constant on the
/// damped image ball, and the derived smallness scale m = delta c0 / 2.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CutoffParams {
    pub delta: f64,
    pub c0: f64,
    pub c1: f64,
    pub df_lipschitz: f64,
    pub m: f64,
}

/// The damped map: F-tilde(x) = linear x + f(delta H(x / delta)), equal to F
/// inside |x| < delta r_inner and exactly linear outside |x| >= delta r_outer.
#[derive(Debug, Clone)]
pub struct CutoffMap {
    pub part: NonlinearPart,
    pub blid: RadialBlid,
    pub delta: f64,
}

pub fn cutoff(part: NonlinearPart, bump: BumpFunction, delta: f64) -> Result<CutoffMap> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(CoreError::invalid("delta", "must be positive and finite"));
    }
    let blid = RadialBlid::new(bump, part.map.dim)?;
    Ok(CutoffMap { part, blid, delta })
}

impl CutoffMap {
    /// delta H(x / delta).
    pub fn damped_arg(&self, x: &[f64]) -> Result<Vec<f64>> {
        let scaled: Vec<f64> = x.iter().map(|v| v / self.delta).collect();
        Ok(self
            .blid
            .eval(&scaled)?
            .into_iter()
            .map(|v| v * self.delta)
            .collect())
    }

    /// f-tilde(x) = f(delta H(x / delta)).
    pub fn eval_nonlinear(&self, x: &[f64]) -> Result<Vec<f64>> {
        let y = self.damped_arg(x)?;
        self.part.eval_f(&y)
    }

    /// The full damped map linear x + f-tilde(x).
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let v = DMatrix::from_vec(self.part.map.dim, 1, x.to_vec());
        let lin = &self.part.linear.matrix * v;
        let nl = self.eval_nonlinear(x)?;
        Ok(lin.iter().zip(nl).map(|(a, b)| a + b).collect())
    }

    pub fn params(&self) -> CutoffParams {
        let c0 = self.blid.c0();
        let c1 = self.blid.c1();
        let image_radius = self.delta * c0;
        CutoffParams {
            delta: self.delta,
            c0,
            c1,
            df_lipschitz: self.part.df_lipschitz_bound(image_radius),
            m: self.delta * c0 / 2.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SupWitness {
    pub quantity: String,
    pub x: Vec<f64>,
    pub value: f64,
}

/// The two smallness inequalities the damped nonlinearity satisfies:
///
///   S1 = sup |f-tilde|         <= bound1 = envelope of f on the ball
///                                          of radius delta c0;
///   S2 = sup |f-tilde(x)|/|x|  <= bound2 = M c1 m,
///
/// with M the Df Lipschitz constant and m = delta c0 / 2. Both sups are
/// observed over radius-stratified samples; the witnesses record where each
/// observed sup was attained.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SmallnessReport {
    #[serde(rename = "S1")]
    pub s1: f64,
    pub bound1: f64,
    #[serde(rename = "S2")]
    pub s2: f64,
    pub bound2: f64,
    pub m: f64,
    pub witnesses: Vec<SupWitness>,
    pub pass: bool,
}

fn random_direction(dim: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-3 {
            return v.into_iter().map(|c| c / n).collect();
        }
    }
}

/// Certifies the smallness inequalities by scanning radii across and beyond
/// the support of the damping (the nonlinearity vanishes outside
/// delta r_outer, so that is where the action is).
pub fn smallness_check(
    map: &CutoffMap,
    directions: usize,
    rng: &mut impl Rng,
) -> Result<SmallnessReport> {
    let params = map.params();
    let bound1 = map.part.envelope(params.delta * params.c0);
    let bound2 = params.df_lipschitz * params.c1 * params.m;

    let dirs: Vec<Vec<f64>> = (0..directions.max(1))
        .map(|_| random_direction(map.part.map.dim, rng))
        .collect();
    let mut s1 = 0f64;
    let mut s2 = 0f64;
    let mut w1 = vec![0.0; map.part.map.dim];
    let mut w2 = w1.clone();
    for dir in &dirs {
        for i in 1..=400 {
            let r = params.delta * 1.2 * i as f64 / 400.0;
            let x: Vec<f64> = dir.iter().map(|c| c * r).collect();
            let val = map
                .eval_nonlinear(&x)?
                .iter()
                .map(|v| v * v)
                .sum::<f64>()
                .sqrt();
            if val > s1 {
                s1 = val;
                w1 = x.clone();
            }
            if val / r > s2 {
                s2 = val / r;
                w2 = x;
            }
        }
    }
    let pass = s1 <= bound1 && s2 <= bound2;
    Ok(SmallnessReport {
        s1,
        bound1,
        s2,
        bound2,
        m: params.m,
        witnesses: vec![
            SupWitness {
                quantity: "S1".into(),
                x: w1,
                value: s1,
            },
            SupWitness {
                quantity: "S2".into(),
                x: w2,
                value: s2,
            },
        ],
        pass,
    })
}

/// Two-regime bound on the damped argument delta H(x / delta): Lipschitz
/// through the origin (ratio to |x| at most c1) and uniformly bounded by
/// delta c0. Both regimes sit under the single constant
/// m = max(c1, c0 / epsilon) relative to the scale epsilon delta:
/// |delta H(x/delta)| <= m min(|x|, epsilon delta).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitBoundReport {
    pub small_max: f64,
    pub small_bound: f64,
    pub large_max: f64,
    pub large_bound: f64,
    pub m: f64,
    pub pass: bool,
}

pub fn split_bound_check(
    blid: &RadialBlid,
    delta: f64,
    epsilon: f64,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<SplitBoundReport> {
    if !(delta > 0.0) || !(epsilon > 0.0) {
        return Err(CoreError::invalid(
            "split bound",
            "delta and epsilon must be positive",
        ));
    }
    let c0 = blid.c0();
    let c1 = blid.c1();
    let m = c1.max(c0 / epsilon);
    let mut small_max = 0f64;
    let mut large_max = 0f64;
    for i in 0..samples {
        let dir = random_direction(blid.dim, rng);
        let r = delta * 2.0 * (i as f64 + 0.5) / samples as f64;
        let x: Vec<f64> = dir.iter().map(|c| c * r).collect();
        let scaled: Vec<f64> = x.iter().map(|v| v / delta).collect();
        let image: Vec<f64> = blid.eval(&scaled)?.into_iter().map(|v| v * delta).collect();
        let norm = image.iter().map(|v| v * v).sum::<f64>().sqrt();
        small_max = small_max.max(norm / r);
        large_max = large_max.max(norm);
    }
    let pass = small_max <= c1 + 1e-12 && large_max <= delta * c0 + 1e-12;
    Ok(SplitBoundReport {
        small_max,
        small_bound: c1,
        large_max,
        large_bound: delta * c0,
        m,
        pass,
    })
}
