use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::ComplexField;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::blid::{Certificate, RadialBlid};
use crate::bump::BumpFunction;
use crate::error::{CoreError, Result};

/// Exponent vector of a monomial x_1^a_1 ... x_d^a_d, printed as "(a_1,...,a_d)".
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FromStr for MultiIndex {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| CoreError::Malformed(format!("multi-index `{s}`")))?;
        let parts: Vec<u32> = inner
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<u32>()
                    .map_err(|_| CoreError::Malformed(format!("multi-index `{s}`")))
            })
            .collect::<Result<_>>()?;
        if parts.is_empty() {
            return Err(CoreError::Malformed(format!("multi-index `{s}`")));
        }
        Ok(MultiIndex(parts))
    }
}

/// All exponent vectors of the given total degree in descending lexicographic
/// order; for dim 2, degree 2 that is (2,0), (1,1), (0,2). Every dense
/// coefficient layout in the crate uses this order.
pub fn multi_indices(dim: usize, degree: u32) -> Vec<MultiIndex> {
    fn rec(dim: usize, degree: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if dim == 1 {
            prefix.push(degree);
            out.push(MultiIndex(prefix.clone()));
            prefix.pop();
            return;
        }
        for first in (0..=degree).rev() {
            prefix.push(first);
            rec(dim - 1, degree - first, prefix, out);
            prefix.pop();
        }
    }
    assert!(dim >= 1, "need at least one variable");
    let mut out = Vec::new();
    rec(dim, degree, &mut Vec::new(), &mut out);
    out
}

/// Homogeneous polynomial of fixed total degree, dense over the
/// `multi_indices` basis. The scalar is generic so the same algebra serves
/// real jet data and complex spectral computations.
#[derive(Debug, Clone, PartialEq)]
pub struct HomPoly<T = f64> {
    pub dim: usize,
    pub degree: u32,
    pub coeffs: Vec<T>,
}

impl<T: ComplexField<RealField = f64> + Copy> HomPoly<T> {
    pub fn zeros(dim: usize, degree: u32) -> Self {
        let len = multi_indices(dim, degree).len();
        HomPoly {
            dim,
            degree,
            coeffs: vec![T::zero(); len],
        }
    }

    /// Builds from sparse (exponents, coefficient) pairs; every exponent
    /// vector must have the declared dimension and total degree.
    pub fn from_terms(dim: usize, degree: u32, terms: &[(Vec<u32>, T)]) -> Result<Self> {
        let basis = multi_indices(dim, degree);
        let mut poly = HomPoly {
            dim,
            degree,
            coeffs: vec![T::zero(); basis.len()],
        };
        for (exps, c) in terms {
            let idx = MultiIndex(exps.clone());
            if idx.dim() != dim {
                return Err(CoreError::DimensionMismatch {
                    expected: dim,
                    got: idx.dim(),
                });
            }
            if idx.degree() != degree {
                return Err(CoreError::Malformed(format!(
                    "term {idx} has degree {}, polynomial has degree {degree}",
                    idx.degree()
                )));
            }
            let pos = basis
                .iter()
                .position(|b| *b == idx)
                .expect("validated index is in the basis");
            poly.coeffs[pos] = poly.coeffs[pos] + *c;
        }
        Ok(poly)
    }

    pub fn basis(&self) -> Vec<MultiIndex> {
        multi_indices(self.dim, self.degree)
    }

    pub fn eval(&self, x: &[T]) -> Result<T> {
        if x.len() != self.dim {
            return Err(CoreError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let mut acc = T::zero();
        for (idx, &c) in self.basis().iter().zip(&self.coeffs) {
            let mut term = c;
            for (&xi, &a) in x.iter().zip(&idx.0) {
                if a > 0 {
                    term = term * xi.powi(a as i32);
                }
            }
            acc = acc + term;
        }
        Ok(acc)
    }

    /// Sum of coefficient magnitudes: an upper bound for |P(x)| on the
    /// Euclidean unit ball, which the realization ladder uses as a certified
    /// polynomial norm.
    pub fn coeff_l1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.modulus()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.modulus() == 0.0)
    }
}

impl HomPoly<f64> {
    pub fn to_complex(&self) -> HomPoly<nalgebra::Complex<f64>> {
        HomPoly {
            dim: self.dim,
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .map(|&c| nalgebra::Complex::new(c, 0.0))
                .collect(),
        }
    }
}

/// Free-function form of polynomial evaluation.
pub fn hompoly_eval<T: ComplexField<RealField = f64> + Copy>(p: &HomPoly<T>, x: &[T]) -> Result<T> {
    p.eval(x)
}

/// Prescribed derivative data at the origin: entry of degree j is the
/// homogeneous polynomial P_j with P_j(v) = (d/dt)^j f(t v) at t = 0. The
/// degree-0 entry, when present, is the constant term.
#[derive(Debug, Clone, PartialEq)]
pub struct JetSequence {
    pub dim: usize,
    pub entries: Vec<HomPoly<f64>>,
}

#[derive(Serialize, Deserialize)]
struct JetEntryRecord {
    degree: u32,
    coefficients: BTreeMap<String, f64>,
}

#[derive(Serialize, Deserialize)]
struct JetSequenceRecord {
    dimension: usize,
    entries: Vec<JetEntryRecord>,
}

impl JetSequence {
    /// Entries must share the dimension and come in strictly increasing
    /// degree.
    pub fn new(dim: usize, entries: Vec<HomPoly<f64>>) -> Result<Self> {
        let mut last: Option<u32> = None;
        for e in &entries {
            if e.dim != dim {
                return Err(CoreError::DimensionMismatch {
                    expected: dim,
                    got: e.dim,
                });
            }
            if let Some(prev) = last {
                if e.degree <= prev {
                    return Err(CoreError::Malformed(
                        "jet entries must have strictly increasing degrees".into(),
                    ));
                }
            }
            last = Some(e.degree);
        }
        Ok(JetSequence { dim, entries })
    }

    pub fn max_degree(&self) -> u32 {
        self.entries.last().map(|e| e.degree).unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        let record = JetSequenceRecord {
            dimension: self.dim,
            entries: self
                .entries
                .iter()
                .map(|p| JetEntryRecord {
                    degree: p.degree,
                    coefficients: p
                        .basis()
                        .iter()
                        .zip(&p.coeffs)
                        .filter(|(_, &c)| c != 0.0)
                        .map(|(idx, &c)| (idx.to_string(), c))
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&record).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: JetSequenceRecord = serde_json::from_str(text)?;
        let mut entries = Vec::with_capacity(record.entries.len());
        for e in &record.entries {
            let mut terms = Vec::with_capacity(e.coefficients.len());
            for (key, &c) in &e.coefficients {
                let idx: MultiIndex = key.parse()?;
                terms.push((idx.0, c));
            }
            entries.push(HomPoly::from_terms(record.dimension, e.degree, &terms)?);
        }
        entries.sort_by_key(|p| p.degree);
        JetSequence::new(record.dimension, entries)
    }
}

/// One damped term of a realization: P_j composed with the rescaled radial
/// blid eps * H(x / eps).
#[derive(Debug, Clone)]
pub struct BorelTerm {
    pub poly: HomPoly<f64>,
    pub eps: f64,
}

/// Globally defined, globally bounded map realizing a jet sequence at the
/// origin:
///
///   f(x) = P_0 + sum_{j>=1} P_j(eps_j H(x / eps_j)) / j!
///
/// Each eps_j is the largest power of two keeping that term's certified sup
/// bound |P_j| (eps_j a)^j / j! at or below 2^-j, so the whole sum converges
/// uniformly no matter how many entries the jet has. Near the origin every
/// damping is the identity and f reduces to the Taylor polynomial of the jet.
#[derive(Debug, Clone)]
pub struct BorelRealization {
    pub dim: usize,
    pub constant: f64,
    pub terms: Vec<BorelTerm>,
    pub blid: RadialBlid,
}

/// Builds the realization, choosing the damping scales by the power-of-two
/// ladder described on [`BorelRealization`].
pub fn borel_realize(jets: &JetSequence, bump: BumpFunction) -> Result<BorelRealization> {
    let blid = RadialBlid::new(bump, jets.dim)?;
    let a = bump.sup_hu();
    let mut constant = 0.0;
    let mut terms = Vec::new();
    for p in &jets.entries {
        if p.degree == 0 {
            constant = p.coeffs[0];
            continue;
        }
        if p.is_zero() {
            continue;
        }
        let j = p.degree;
        let norm = p.coeff_l1();
        let budget = 2f64.powi(-(j as i32));
        let mut eps = None;
        for i in (-60..=60).rev() {
            let candidate = 2f64.powi(i);
            let factorial: f64 = (1..=j).map(|m| m as f64).product();
            if norm * (candidate * a).powi(j as i32) / factorial <= budget {
                eps = Some(candidate);
                break;
            }
        }
        let eps = eps.ok_or_else(|| {
            CoreError::invalid(
                "jet entry",
                format!("degree-{j} coefficients too large to damp"),
            )
        })?;
        terms.push(BorelTerm { poly: p.clone(), eps });
    }
    Ok(BorelRealization {
        dim: jets.dim,
        constant,
        terms,
        blid,
    })
}

impl BorelRealization {
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let mut acc = self.constant;
        for term in &self.terms {
            let scaled: Vec<f64> = x.iter().map(|v| v / term.eps).collect();
            let damped: Vec<f64> = self
                .blid
                .eval(&scaled)?
                .into_iter()
                .map(|v| v * term.eps)
                .collect();
            let j = term.poly.degree;
            let factorial: f64 = (1..=j).map(|m| m as f64).product();
            acc += term.poly.eval(&damped)? / factorial;
        }
        if !acc.is_finite() {
            return Err(CoreError::NonFinite {
                context: "jet realization".into(),
            });
        }
        Ok(acc)
    }

    /// Ball on which every damping acts as the identity, so f equals the
    /// jet's Taylor polynomial exactly.
    pub fn identity_radius(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.eps * self.blid.bump.r_inner)
            .fold(f64::INFINITY, f64::min)
    }

    /// Certified global bound |f| <= |P_0| + sum over terms of 2^-degree.
    pub fn global_bound(&self) -> f64 {
        self.constant.abs()
            + self
                .terms
                .iter()
                .map(|t| 2f64.powi(-(t.poly.degree as i32)))
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DegreeCheck {
    pub degree: u32,
    pub observed_rel_err: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JetVerifyReport {
    pub degrees: Vec<DegreeCheck>,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct JetVerifyOptions {
    /// Base finite-difference step before Richardson halving.
    pub step: f64,
    /// Relative tolerance through degree `strict_through`.
    pub tol_strict: f64,
    pub strict_through: u32,
    /// Relative tolerance above `strict_through`.
    pub tol_loose: f64,
}

impl Default for JetVerifyOptions {
    fn default() -> Self {
        JetVerifyOptions {
            step: 0.02,
            tol_strict: 1e-3,
            strict_through: 4,
            tol_loose: 1e-2,
        }
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut c = 1f64;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

/// Central stencil for the order-th derivative of g at 0 with spacing s,
/// second-order accurate; offsets run (i - order/2) s for i = 0..=order.
fn central_derivative(
    g: &impl Fn(f64) -> Result<f64>,
    order: u32,
    s: f64,
) -> Result<f64> {
    let half = order as f64 / 2.0;
    let mut acc = 0.0;
    for i in 0..=order {
        let sign = if (order - i) % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial(order, i) * g((i as f64 - half) * s)?;
    }
    Ok(acc / s.powi(order as i32))
}

fn richardson_derivative(
    g: &impl Fn(f64) -> Result<f64>,
    order: u32,
    s: f64,
) -> Result<f64> {
    let coarse = central_derivative(g, order, s)?;
    let fine = central_derivative(g, order, s / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Extrapolated finite differences of the realization along fixed directions
/// recover each prescribed P_j(v): the probes stay inside the identity ball,
/// where f is exactly the Taylor polynomial of the jet.
pub fn jet_verify(
    realization: &BorelRealization,
    jets: &JetSequence,
    opts: &JetVerifyOptions,
) -> Result<JetVerifyReport> {
    let d = realization.dim;
    let mut directions: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        directions.push(v.clone());
        v[i] = -1.0;
        directions.push(v);
    }
    if d > 1 {
        directions.push(vec![1.0 / (d as f64).sqrt(); d]);
    }

    let radius = realization.identity_radius();
    let mut degrees = Vec::new();
    let mut all_pass = true;
    for p in &jets.entries {
        let j = p.degree;
        let tol = if j <= opts.strict_through {
            opts.tol_strict
        } else {
            opts.tol_loose
        };
        let mut observed = 0f64;
        if j == 0 {
            let expect = p.coeffs[0];
            let got = realization.eval(&vec![0.0; d])?;
            observed = (got - expect).abs() / expect.abs().max(1.0);
        } else {
            // Keep the widest stencil offset well inside the identity ball.
            let s = opts.step.min(radius / (j.max(1) as f64 * 2.0));
            for v in &directions {
                let g = |t: f64| {
                    let point: Vec<f64> = v.iter().map(|c| c * t).collect();
                    realization.eval(&point)
                };
                let fd = richardson_derivative(&g, j, s)?;
                let expect = p.eval(v)?;
                observed = observed.max((fd - expect).abs() / expect.abs().max(1.0));
            }
        }
        all_pass &= observed <= tol;
        degrees.push(DegreeCheck {
            degree: j,
            observed_rel_err: observed,
            tol,
            pass: observed <= tol,
        });
    }
    Ok(JetVerifyReport {
        degrees,
        pass: all_pass,
    })
}

/// Samples arguments up to `norm_cap` in Euclidean norm and checks |f|
/// against the certified global bound inflated by `slack_factor`.
pub fn borel_bound_check(
    realization: &BorelRealization,
    norm_cap: f64,
    samples: usize,
    slack_factor: f64,
    rng: &mut impl Rng,
) -> Result<Certificate> {
    let bound = realization.global_bound() * slack_factor;
    let mut observed = 0f64;
    for i in 0..samples {
        let mut x: Vec<f64> = (0..realization.dim)
            .map(|_| rng.random_range(-1.0..=1.0))
            .collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            let frac = (i % 16) as f64 / 15.0;
            let target = norm_cap * 10f64.powf(-6.0 * (1.0 - frac));
            for v in x.iter_mut() {
                *v *= target / norm;
            }
        }
        observed = observed.max(realization.eval(&x)?.abs());
    }
    Ok(Certificate {
        kind: "jet_realization_bound".into(),
        k: realization.terms.len(),
        bound,
        observed_max: observed,
        samples,
        pass: observed <= bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// P_j = j! x^j on the line for j = 0..=max: the jet of 1/(1-x).
    fn factorial_jets(max: u32) -> JetSequence {
        let entries = (0..=max)
            .map(|j| {
                let factorial: f64 = (1..=j).map(|m| m as f64).product();
                HomPoly::from_terms(1, j, &[(vec![j], factorial)]).unwrap()
            })
            .collect();
        JetSequence::new(1, entries).unwrap()
    }

    #[test]
    fn multi_index_order_and_round_trip() {
        let basis = multi_indices(2, 2);
        let printed: Vec<String> = basis.iter().map(|b| b.to_string()).collect();
        assert_eq!(printed, vec!["(2,0)", "(1,1)", "(0,2)"]);
        let back: MultiIndex = "(1,1)".parse().unwrap();
        assert_eq!(back, basis[1]);
        assert!("(1,x)".parse::<MultiIndex>().is_err());
        assert!("1,1".parse::<MultiIndex>().is_err());
        assert_eq!(multi_indices(3, 0), vec![MultiIndex(vec![0, 0, 0])]);
    }

    #[test]
    fn hompoly_eval_hand_value() {
        // P(x, y) = 3x^2 + 2xy - y^2 at (1, 2) is 3 + 4 - 4 = 3.
        let p = HomPoly::from_terms(
            2,
            2,
            &[
                (vec![2, 0], 3.0),
                (vec![1, 1], 2.0),
                (vec![0, 2], -1.0),
            ],
        )
        .unwrap();
        assert_eq!(p.eval(&[1.0, 2.0]).unwrap(), 3.0);
        assert_eq!(hompoly_eval(&p, &[1.0, 2.0]).unwrap(), 3.0);
        assert_eq!(p.coeff_l1(), 6.0);
        assert!(p.eval(&[1.0]).is_err());
    }

    #[test]
    fn from_terms_validates_degrees() {
        assert!(HomPoly::<f64>::from_terms(2, 2, &[(vec![1, 0], 1.0)]).is_err());
        assert!(HomPoly::<f64>::from_terms(2, 2, &[(vec![1, 1, 0], 1.0)]).is_err());
        // Duplicate terms accumulate.
        let p =
            HomPoly::from_terms(1, 3, &[(vec![3], 1.0), (vec![3], 2.0)]).unwrap();
        assert_eq!(p.coeffs, vec![3.0]);
    }

    #[test]
    fn jet_json_round_trip() {
        let jets = factorial_jets(3);
        let text = jets.to_json();
        assert!(text.contains("\"dimension\": 1"));
        assert!(text.contains("\"(2)\""));
        let back = JetSequence::from_json(&text).unwrap();
        assert_eq!(back, jets);
    }

    #[test]
    fn jet_sequence_rejects_disorder() {
        let p2 = HomPoly::from_terms(1, 2, &[(vec![2], 1.0)]).unwrap();
        let p2b = p2.clone();
        assert!(JetSequence::new(1, vec![p2, p2b]).is_err());
    }

    #[test]
    fn ladder_picks_unit_scale_for_factorial_jets() {
        // |P_j| (eps a)^j / j! = (eps a)^j with a ~ 0.359: eps = 1 is the
        // largest power of two keeping that at or below 2^-j.
        let real = borel_realize(&factorial_jets(5), BumpFunction::default()).unwrap();
        assert_eq!(real.terms.len(), 5);
        for t in &real.terms {
            assert_eq!(t.eps, 1.0, "degree {}", t.poly.degree);
        }
        assert_eq!(real.constant, 1.0);
        assert!((real.identity_radius() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn realization_matches_taylor_polynomial_near_zero() {
        let real = borel_realize(&factorial_jets(5), BumpFunction::default()).unwrap();
        for &x in &[-0.3, -0.1, 0.0, 0.05, 0.25, 1.0 / 3.0] {
            let expect: f64 = (0..=5).map(|j| x.powi(j)).sum();
            let got = real.eval(&[x]).unwrap();
            assert!((got - expect).abs() < 1e-14, "x = {x}");
        }
    }

    #[test]
    fn realization_is_globally_bounded() {
        let real = borel_realize(&factorial_jets(5), BumpFunction::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cert = borel_bound_check(&real, 1000.0, 64, 1.1, &mut rng).unwrap();
        assert!(cert.pass, "{cert:?}");
        let explicit = real.global_bound();
        assert!((explicit - (1.0 + 0.5 + 0.25 + 0.125 + 0.0625 + 0.03125)).abs() < 1e-15);
    }

    #[test]
    fn jet_verify_recovers_low_degrees() {
        let jets = factorial_jets(3);
        let real = borel_realize(&jets, BumpFunction::default()).unwrap();
        let report = jet_verify(&real, &jets, &JetVerifyOptions::default()).unwrap();
        assert!(report.pass, "{report:?}");
        for d in &report.degrees {
            assert!(d.observed_rel_err <= d.tol, "{d:?}");
        }
    }

    #[test]
    fn jet_verify_catches_a_wrong_realization() {
        let jets = factorial_jets(3);
        let mut tampered = jets.clone();
        tampered.entries[2] = HomPoly::from_terms(1, 2, &[(vec![2], 3.5)]).unwrap();
        let real = borel_realize(&tampered, BumpFunction::default()).unwrap();
        let report = jet_verify(&real, &jets, &JetVerifyOptions::default()).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn plane_jets_realize_too() {
        // P_2(x, y) = x y, P_3 = x^3 - y^3 on the plane.
        let entries = vec![
            HomPoly::from_terms(2, 2, &[(vec![1, 1], 1.0)]).unwrap(),
            HomPoly::from_terms(2, 3, &[(vec![3, 0], 1.0), (vec![0, 3], -1.0)]).unwrap(),
        ];
        let jets = JetSequence::new(2, entries).unwrap();
        let real = borel_realize(&jets, BumpFunction::default()).unwrap();
        let report = jet_verify(&real, &jets, &JetVerifyOptions::default()).unwrap();
        assert!(report.pass, "{report:?}");
        let x = [0.05, -0.08];
        let expect = 0.05 * (-0.08) / 2.0 + (0.05f64.powi(3) - (-0.08f64).powi(3)) / 6.0;
        assert!((real.eval(&x).unwrap() - expect).abs() < 1e-15);
    }
}
