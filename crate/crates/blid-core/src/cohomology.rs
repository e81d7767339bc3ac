use std::collections::BTreeMap;

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::blid::Certificate;
use crate::error::{CoreError, Result};
use crate::jets::{multi_indices, HomPoly, JetSequence, MultiIndex};

type C64 = Complex<f64>;

/// Invertible linear map with its spectrum, the coefficient data for the
/// degree-n composition operators.
#[derive(Debug, Clone)]
pub struct LinearAuto {
    pub matrix: DMatrix<f64>,
    pub eigenvalues: Vec<C64>,
    /// True when no eigenvalue sits on the unit circle (margin 1e-9).
    pub hyperbolic: bool,
}

impl LinearAuto {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(CoreError::invalid("matrix", "must be square and nonempty"));
        }
        let svd = matrix.clone().svd(false, false);
        let sigma_max = svd.singular_values.max();
        let sigma_min = svd.singular_values.min();
        if sigma_min <= 1e-12 * sigma_max {
            return Err(CoreError::NotInvertible { sigma_min });
        }
        let eigenvalues: Vec<C64> = matrix.complex_eigenvalues().iter().copied().collect();
        let hyperbolic = eigenvalues.iter().all(|l| (l.norm() - 1.0).abs() > 1e-9);
        Ok(LinearAuto {
            matrix,
            eigenvalues,
            hyperbolic,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Product of eigenvalue powers lambda^alpha, the predicted spectrum of
    /// the composition operator at alpha's degree.
    pub fn eigen_product(&self, alpha: &MultiIndex) -> C64 {
        let mut prod = C64::new(1.0, 0.0);
        for (l, &a) in self.eigenvalues.iter().zip(&alpha.0) {
            if a > 0 {
                prod *= l.powi(a as i32);
            }
        }
        prod
    }
}

/// Matrix of Q -> Q(Ax) on homogeneous degree-n polynomials over the dense
/// `multi_indices` basis: column alpha holds the expansion of (Ax)^alpha.
#[derive(Debug, Clone)]
pub struct CompositionOperator {
    pub degree: u32,
    pub basis: Vec<MultiIndex>,
    pub matrix: DMatrix<f64>,
}

fn expand_composed_monomial(a: &DMatrix<f64>, alpha: &MultiIndex) -> BTreeMap<Vec<u32>, f64> {
    let d = alpha.dim();
    let mut acc: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    acc.insert(vec![0; d], 1.0);
    for i in 0..d {
        for _ in 0..alpha.0[i] {
            let mut next: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
            for (exps, c) in &acc {
                for j in 0..d {
                    let aij = a[(i, j)];
                    if aij != 0.0 {
                        let mut e = exps.clone();
                        e[j] += 1;
                        *next.entry(e).or_insert(0.0) += c * aij;
                    }
                }
            }
            acc = next;
        }
    }
    acc
}

impl CompositionOperator {
    pub fn build(auto: &LinearAuto, degree: u32) -> Self {
        let basis = multi_indices(auto.dim(), degree);
        let m = basis.len();
        let mut matrix = DMatrix::zeros(m, m);
        for (col, alpha) in basis.iter().enumerate() {
            for (exps, c) in expand_composed_monomial(&auto.matrix, alpha) {
                let row = basis
                    .iter()
                    .position(|b| b.0 == exps)
                    .expect("expansion stays homogeneous of the same degree");
                matrix[(row, col)] = c;
            }
        }
        CompositionOperator {
            degree,
            basis,
            matrix,
        }
    }

    pub fn apply(&self, q: &HomPoly<C64>) -> Result<HomPoly<C64>> {
        if q.degree != self.degree || q.coeffs.len() != self.basis.len() {
            return Err(CoreError::Malformed(format!(
                "polynomial of degree {} fed to a degree-{} operator",
                q.degree, self.degree
            )));
        }
        let v = DVector::from_iterator(q.coeffs.len(), q.coeffs.iter().copied());
        let out = self.matrix.map(|x| C64::new(x, 0.0)) * v;
        Ok(HomPoly {
            dim: q.dim,
            degree: q.degree,
            coeffs: out.iter().copied().collect(),
        })
    }
}

/// Outcome of the degree-n division: either the unique coefficient solution
/// or the list of resonant exponents that obstruct it.
pub fn solve_order(auto: &LinearAuto, n: u32, p: &HomPoly<f64>) -> Result<HomPoly<C64>> {
    if n == 0 {
        return Err(CoreError::invalid(
            "order",
            "degree 0 is always resonant: the operator minus identity vanishes",
        ));
    }
    if p.dim != auto.dim() || p.degree != n {
        return Err(CoreError::Malformed(format!(
            "right-hand side has dim {} degree {}, expected dim {} degree {n}",
            p.dim,
            p.degree,
            auto.dim()
        )));
    }
    let op = CompositionOperator::build(auto, n);
    let m = op.basis.len();
    let system = &op.matrix - DMatrix::identity(m, m);

    let svd = system.clone().svd(false, false);
    let sigma_max = svd.singular_values.max();
    let sigma_min = svd.singular_values.min();
    if sigma_min <= 1e-9 * sigma_max.max(1.0) {
        let indices: Vec<String> = op
            .basis
            .iter()
            .filter(|alpha| (auto.eigen_product(alpha) - C64::new(1.0, 0.0)).norm() < 1e-7)
            .map(|alpha| alpha.to_string())
            .collect();
        return Err(CoreError::Resonant {
            degree: n as usize,
            indices,
        });
    }

    let rhs = DVector::from_iterator(m, p.coeffs.iter().map(|&c| C64::new(c, 0.0)));
    let solved = system
        .map(|x| C64::new(x, 0.0))
        .lu()
        .solve(&rhs)
        .ok_or(CoreError::NotInvertible { sigma_min })?;
    Ok(HomPoly {
        dim: p.dim,
        degree: n,
        coeffs: solved.iter().copied().collect(),
    })
}

/// Degree-wise solution through order m: Q_n solves the degree-n equation for
/// each jet entry with 2 <= degree <= m (degrees outside that window stay with
/// the linear part or the unresolved tail).
#[derive(Debug, Clone)]
pub struct TruncatedSolution {
    pub order: u32,
    pub terms: Vec<HomPoly<C64>>,
}

pub fn solve_truncated(auto: &LinearAuto, jets: &JetSequence, m: u32) -> Result<TruncatedSolution> {
    if m < 2 {
        return Err(CoreError::invalid("order", "truncation order must be >= 2"));
    }
    if jets.dim != auto.dim() {
        return Err(CoreError::DimensionMismatch {
            expected: auto.dim(),
            got: jets.dim,
        });
    }
    let mut terms = Vec::new();
    for p in &jets.entries {
        if p.degree < 2 || p.degree > m || p.is_zero() {
            continue;
        }
        terms.push(solve_order(auto, p.degree, p)?);
    }
    Ok(TruncatedSolution { order: m, terms })
}

impl TruncatedSolution {
    /// g(x) = sum of the solved terms, evaluated at a real point.
    pub fn eval(&self, x: &[f64]) -> Result<C64> {
        let xc: Vec<C64> = x.iter().map(|&v| C64::new(v, 0.0)).collect();
        let mut acc = C64::new(0.0, 0.0);
        for q in &self.terms {
            acc += q.eval(&xc)?;
        }
        Ok(acc)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualPoint {
    pub scale: f64,
    pub residual: f64,
}

/// Decay record of r(x) = g(Ax) - g(x) - p(x) along shrinking rays, where p
/// collects every jet entry of degree >= 2. A solution through order m leaves
/// only the unresolved tail, so |r| must fall at order at least m + 1/2; an
/// identically vanishing residual (complete jet) passes as exact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualReport {
    pub order: u32,
    pub points: Vec<ResidualPoint>,
    pub slope: Option<f64>,
    pub exact: bool,
    pub pass: bool,
}

pub fn residual_order_check(
    auto: &LinearAuto,
    jets: &JetSequence,
    solution: &TruncatedSolution,
) -> Result<ResidualReport> {
    let d = auto.dim();
    let mut directions: Vec<Vec<f64>> = Vec::new();
    for i in 0..d {
        let mut v = vec![0.0; d];
        v[i] = 1.0;
        directions.push(v);
    }
    if d > 1 {
        directions.push(vec![1.0 / (d as f64).sqrt(); d]);
    }

    let scales = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
    let floor = 1e-13;
    let mut points = Vec::with_capacity(scales.len());
    for &s in &scales {
        let mut worst = 0f64;
        for v in &directions {
            let x: Vec<f64> = v.iter().map(|c| c * s).collect();
            let ax_vec = DMatrix::from_vec(d, 1, x.clone());
            let ax = &auto.matrix * ax_vec;
            let gax = solution.eval(ax.as_slice())?;
            let gx = solution.eval(&x)?;
            let mut px = C64::new(0.0, 0.0);
            let xc: Vec<C64> = x.iter().map(|&v| C64::new(v, 0.0)).collect();
            for p in &jets.entries {
                if p.degree >= 2 {
                    px += p.to_complex().eval(&xc)?;
                }
            }
            worst = worst.max((gax - gx - px).norm());
        }
        points.push(ResidualPoint {
            scale: s,
            residual: worst,
        });
    }

    let loggable: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.residual > floor)
        .map(|p| (p.scale.ln(), p.residual.ln()))
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
    let exact = points.iter().all(|p| p.residual <= floor);
    let threshold = solution.order as f64 + 0.5;
    let pass = exact || slope.map_or(false, |s| s >= threshold);
    Ok(ResidualReport {
        order: solution.order,
        points,
        slope,
        exact,
        pass,
    })
}

/// Compares the numerically computed spectrum of the degree-n composition
/// operator against the predicted eigenvalue products lambda^alpha by greedy
/// closest-pair matching.
pub fn eigenvalue_law_check(auto: &LinearAuto, n: u32, tol: f64) -> Result<Certificate> {
    let op = CompositionOperator::build(auto, n);
    let computed: Vec<C64> = op.matrix.complex_eigenvalues().iter().copied().collect();
    let predicted: Vec<C64> = op.basis.iter().map(|a| auto.eigen_product(a)).collect();

    let mut remaining = computed;
    let mut worst = 0f64;
    for p in &predicted {
        let (best_idx, best_dist) = remaining
            .iter()
            .enumerate()
            .map(|(i, c)| (i, (c - p).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("spectra have equal cardinality");
        worst = worst.max(best_dist);
        remaining.swap_remove(best_idx);
    }
    Ok(Certificate {
        kind: "composition_spectrum".into(),
        k: n as usize,
        bound: tol,
        observed_max: worst,
        samples: predicted.len(),
        pass: worst <= tol,
    })
}
