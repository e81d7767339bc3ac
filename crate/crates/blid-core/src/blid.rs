use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bump::BumpFunction;
use crate::error::{CoreError, Result};
use crate::grid::GridInterval;
use crate::sampling;
use crate::space::{CqElement, FrechetMetric, SeminormFamily, SpaceKind};

/// Shared shape for every numerical certificate the blid constructions emit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub kind: String,
    pub k: usize,
    pub bound: f64,
    pub observed_max: f64,
    pub samples: usize,
    pub pass: bool,
}

/// Pointwise damped identity on order-0 elements:
/// H(x)(t) = h(x(t)) * x(t).
///
/// Equals the identity wherever sup |x| <= r_inner, and its image is uniformly
/// bounded by sup h(u)u no matter how large x is.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PointwiseBlid {
    pub bump: BumpFunction,
}

impl PointwiseBlid {
    pub fn new(bump: BumpFunction) -> Self {
        PointwiseBlid { bump }
    }

    pub fn apply(&self, x: &CqElement) -> Result<CqElement> {
        if x.q != 0 {
            return Err(CoreError::invalid(
                "pointwise blid",
                format!("acts on order-0 elements, got q = {}", x.q),
            ));
        }
        let top = x.top.iter().map(|&v| self.bump.eval(v) * v).collect();
        CqElement::new(0, x.domain, vec![], top)
    }
}

/// Taylor-plus-iterated-integral damped identity of level k on C^k data
/// anchored at the left endpoint:
///
///   H(x)(t) = sum_{j<k} (t - left)^j / j! * h(x^(j)(left)) x^(j)(left)
///           + (k-fold integral from left of) h(x^(k)(s)) x^(k)(s).
///
/// Works level by level on the representation: the output is the order-k
/// element whose jet is the damped input jet and whose top derivative is the
/// damped input top derivative. Discrete integration then reproduces the
/// display above exactly, so an input with every jet entry and top sample
/// inside the plateau is returned bit-for-bit.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TaylorIntegralBlid {
    pub bump: BumpFunction,
    pub k: usize,
}

impl TaylorIntegralBlid {
    pub fn new(bump: BumpFunction, k: usize) -> Self {
        TaylorIntegralBlid { bump, k }
    }

    pub fn apply(&self, x: &CqElement) -> Result<CqElement> {
        if x.q < self.k {
            return Err(CoreError::OrderTooLow {
                have: x.q,
                need: self.k,
            });
        }
        let jet = x
            .jet
            .iter()
            .take(self.k)
            .map(|&v| self.bump.eval(v) * v)
            .collect();
        let top_source = if x.q == self.k {
            x.top.clone()
        } else {
            x.derivative(self.k)?
        };
        let top = top_source
            .iter()
            .map(|&v| self.bump.eval(v) * v)
            .collect();
        CqElement::new(self.k, x.domain, jet, top)
    }

    /// Certified bound on the k-th seminorm of the image over a unit-length
    /// domain: strictly below sup(h u) * e^k. The discrete inequality behind
    /// it is |cumtrap^l of a sequence bounded by a| <= a * (t^l/l! + O(h^2)),
    /// summing to barely above a * e at t = 1; the e^k slack absorbs the
    /// trapezoid excess.
    pub fn image_bound(&self) -> f64 {
        self.bump.sup_hu() * (self.k as f64).exp()
    }
}

/// Damped identity with image metric-contained in a ball of prescribed radius
/// c: H_c(x) = (c / 4N) * H_k((4N / c) x), where k is the smallest integer
/// with k > 1 - ln(c)/ln(2) and N = sup(h u) e^k bounds the level-k map.
/// Every seminorm of the image then stays below c/4, which pushes the
/// truncated Frechet distance to 0 under c/2 and leaves another c/2 of room
/// for the tail.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScaledBlid {
    pub inner: TaylorIntegralBlid,
    pub c: f64,
    pub n_bound: f64,
}

impl ScaledBlid {
    pub fn new(bump: BumpFunction, c: f64) -> Result<Self> {
        if !(c > 0.0 && c < 1.0) {
            return Err(CoreError::invalid("scaled.c", "must lie in (0, 1)"));
        }
        let threshold = 1.0 - c.ln() / std::f64::consts::LN_2;
        let k = threshold.floor() as usize + 1;
        let inner = TaylorIntegralBlid::new(bump, k);
        let n_bound = inner.image_bound();
        Ok(ScaledBlid { inner, c, n_bound })
    }

    pub fn level(&self) -> usize {
        self.inner.k
    }

    /// Scale-in factor, rounded up to a power of two. Any gain >= 4N/c keeps
    /// every image seminorm under c/4, and a binary gain makes the
    /// scale-unscale round trip exact, so the identity ball is bitwise.
    fn gain(&self) -> f64 {
        2f64.powi((4.0 * self.n_bound / self.c).log2().ceil() as i32)
    }

    pub fn apply(&self, x: &CqElement) -> Result<CqElement> {
        let g = self.gain();
        Ok(self.inner.apply(&x.scale(g))?.scale(1.0 / g))
    }

    /// Radius of the ball on which the map is the exact identity.
    pub fn identity_radius(&self) -> f64 {
        self.inner.bump.r_inner / self.gain()
    }
}

/// Damped identity anchored at an arbitrary order-0 element y:
/// H_y(x)(t) = y(t) + h(x(t) - y(t)) * (x(t) - y(t)).
///
/// Identity near y, constant y far from it; the building block for gluing
/// maps along a segment of base points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentBlid {
    pub bump: BumpFunction,
    pub anchor: CqElement,
}

impl SegmentBlid {
    pub fn new(bump: BumpFunction, anchor: CqElement) -> Result<Self> {
        if anchor.q != 0 {
            return Err(CoreError::invalid(
                "segment.anchor",
                "must be an order-0 element",
            ));
        }
        Ok(SegmentBlid { bump, anchor })
    }

    pub fn apply(&self, x: &CqElement) -> Result<CqElement> {
        x.check_same_shape(&self.anchor)?;
        let top = x
            .top
            .iter()
            .zip(&self.anchor.top)
            .map(|(&v, &y)| y + self.bump.eval(v - y) * (v - y))
            .collect();
        CqElement::new(0, x.domain, vec![], top)
    }
}

/// Side of a complemented splitting X = Im(pi) + Ker(pi).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionSide {
    Image,
    Kernel,
}

/// Bounded idempotent on order-0 elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Projector {
    Identity,
    Zero,
    /// (x(t) + x(-t)) / 2 on a grid symmetric about 0.
    EvenPart,
}

impl Projector {
    pub fn apply(&self, x: &CqElement) -> Result<CqElement> {
        match self {
            Projector::Identity => Ok(x.clone()),
            Projector::Zero => Ok(CqElement::zero(x.q, x.domain)),
            Projector::EvenPart => {
                if x.q != 0 {
                    return Err(CoreError::invalid(
                        "projector",
                        "even-part acts on order-0 elements",
                    ));
                }
                if !x.domain.is_symmetric() {
                    return Err(CoreError::GridMismatch(
                        "even-part projector needs a grid symmetric about 0".into(),
                    ));
                }
                let n = x.top.len();
                let top = (0..n)
                    .map(|i| (x.top[i] + x.top[n - 1 - i]) / 2.0)
                    .collect();
                CqElement::new(0, x.domain, vec![], top)
            }
        }
    }

    /// Checks pi(pi(x)) = pi(x) on a concrete element.
    pub fn idempotent_on(&self, x: &CqElement) -> Result<f64> {
        let once = self.apply(x)?;
        let twice = self.apply(&once)?;
        once.rep_distance(&twice)
    }
}

/// Restriction of a blid to one side of a complemented splitting: on the image
/// side x -> pi(H(x)), on the kernel side x -> H(x) - pi(H(x)). Both inherit
/// the local identity from H because pi is linear and fixes (respectively
/// kills) the input.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProjectedBlid {
    pub projector: Projector,
    pub inner: Box<BlidMap>,
    pub side: ProjectionSide,
}

impl ProjectedBlid {
    pub fn new(projector: Projector, inner: BlidMap, side: ProjectionSide) -> Self {
        ProjectedBlid {
            projector,
            inner: Box::new(inner),
            side,
        }
    }

    pub fn apply(&self, x: &CqElement) -> Result<CqElement> {
        let hx = self.inner.apply(x)?;
        let phx = self.projector.apply(&hx)?;
        match self.side {
            ProjectionSide::Image => Ok(phx),
            ProjectionSide::Kernel => Ok(hx.sub(&phx)),
        }
    }
}

/// Every damped-identity construction in one place, so suites can sample and
/// certify them uniformly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum BlidMap {
    Pointwise(PointwiseBlid),
    TaylorIntegral(TaylorIntegralBlid),
    Scaled(ScaledBlid),
    Segment(SegmentBlid),
    Projected(ProjectedBlid),
}

impl BlidMap {
    pub fn apply(&self, x: &CqElement) -> Result<CqElement> {
        match self {
            BlidMap::Pointwise(b) => b.apply(x),
            BlidMap::TaylorIntegral(b) => b.apply(x),
            BlidMap::Scaled(b) => b.apply(x),
            BlidMap::Segment(b) => b.apply(x),
            BlidMap::Projected(b) => b.apply(x),
        }
    }

    pub fn kind_label(&self) -> &'static str {
        match self {
            BlidMap::Pointwise(_) => "pointwise",
            BlidMap::TaylorIntegral(_) => "taylor_integral",
            BlidMap::Scaled(_) => "scaled",
            BlidMap::Segment(_) => "segment",
            BlidMap::Projected(_) => "projected",
        }
    }

    /// Element order the map expects.
    pub fn input_order(&self) -> usize {
        match self {
            BlidMap::Pointwise(_) | BlidMap::Segment(_) => 0,
            BlidMap::TaylorIntegral(b) => b.k,
            BlidMap::Scaled(b) => b.level(),
            BlidMap::Projected(b) => b.inner.input_order(),
        }
    }

    /// Radius (in the construction's own norm, around its own base point) of
    /// the certified exact-identity ball.
    pub fn local_radius(&self) -> f64 {
        match self {
            BlidMap::Pointwise(b) => b.bump.r_inner,
            BlidMap::TaylorIntegral(b) => b.bump.r_inner,
            BlidMap::Scaled(b) => b.identity_radius(),
            BlidMap::Segment(b) => b.bump.r_inner,
            BlidMap::Projected(b) => b.inner.local_radius(),
        }
    }

    /// Draws an element inside the identity ball: magnitude is uniform in
    /// (0, radius], direction is a random smooth profile. Segment anchors and
    /// projector ranges are respected.
    pub fn sample_identity_point(
        &self,
        domain: GridInterval,
        rng: &mut impl Rng,
    ) -> Result<CqElement> {
        let radius = self.local_radius() * rng.random_range(0.05..=1.0);
        match self {
            BlidMap::Segment(b) => {
                let raw = sampling::random_element(0, domain, rng);
                let bump = sampling::scaled_to_cq_norm(&raw, radius)?;
                Ok(b.anchor.add_scaled(1.0, &bump))
            }
            BlidMap::Projected(p) => {
                let raw = sampling::random_element(self.input_order(), domain, rng);
                let proj = p.projector.apply(&raw)?;
                let sided = match p.side {
                    ProjectionSide::Image => proj,
                    ProjectionSide::Kernel => raw.sub(&proj),
                };
                sampling::scaled_to_cq_norm(&sided, radius)
            }
            _ => {
                let raw = sampling::random_element(self.input_order(), domain, rng);
                sampling::scaled_to_cq_norm(&raw, radius)
            }
        }
    }
}

/// Samples the identity ball and certifies apply(x) = x to within `tol` at
/// representation level (jet entries and grid samples alike).
pub fn local_identity_certificate(
    blid: &BlidMap,
    domain: GridInterval,
    samples: usize,
    tol: f64,
    rng: &mut impl Rng,
) -> Result<Certificate> {
    let mut observed = 0f64;
    for _ in 0..samples {
        let x = blid.sample_identity_point(domain, rng)?;
        let hx = blid.apply(&x)?;
        observed = observed.max(hx.rep_distance(&x)?);
    }
    Ok(Certificate {
        kind: format!("local_identity:{}", blid.kind_label()),
        k: blid.input_order(),
        bound: tol,
        observed_max: observed,
        samples,
        pass: observed <= tol,
    })
}

/// Certifies the level-k image bound sup_k |H_k(x)|_k < sup(h u) * e^k over
/// elements drawn from geometric size strata up to `norm_cap`. Domains longer
/// than one unit would weaken the discrete inequality, so they are rejected.
pub fn blid_bound_certificate(
    blid: &TaylorIntegralBlid,
    domain: GridInterval,
    samples: usize,
    norm_cap: f64,
    rng: &mut impl Rng,
) -> Result<Certificate> {
    if domain.right - domain.left > 1.0 + 1e-12 {
        return Err(CoreError::invalid(
            "bound certificate",
            "requires a domain of length at most 1",
        ));
    }
    let family = SeminormFamily::new(SpaceKind::CinfInterval);
    let mut observed = 0f64;
    for i in 0..samples {
        let raw = sampling::random_element(blid.k, domain, rng);
        // Stratify sizes geometrically in (0, norm_cap].
        let frac = (i % 16) as f64 / 15.0;
        let target = norm_cap * 10f64.powf(-3.0 * (1.0 - frac));
        let x = sampling::scaled_to_cq_norm(&raw, target)?;
        let hx = blid.apply(&x)?;
        observed = observed.max(family.eval(&hx, blid.k));
    }
    let bound = blid.image_bound();
    Ok(Certificate {
        kind: "taylor_integral_bound".into(),
        k: blid.k,
        bound,
        observed_max: observed,
        samples,
        pass: observed < bound,
    })
}

/// Certifies metric containment of a scaled blid: the certified upper bound
/// d(H_c(x), 0) + tail stays under c for stratified samples of arbitrary size.
/// The metric is truncated at the blid's own level; the dropped tail is below
/// 2^-k which the construction already budgets for.
pub fn scaled_containment_certificate(
    blid: &ScaledBlid,
    domain: GridInterval,
    samples: usize,
    norm_cap: f64,
    rng: &mut impl Rng,
) -> Result<Certificate> {
    let metric = FrechetMetric::new(SpaceKind::CinfInterval, blid.level())?;
    let mut observed = 0f64;
    for i in 0..samples {
        let raw = sampling::random_element(blid.level(), domain, rng);
        let frac = (i % 16) as f64 / 15.0;
        let target = norm_cap * 10f64.powf(-4.0 * (1.0 - frac));
        let x = sampling::scaled_to_cq_norm(&raw, target)?;
        let hx = blid.apply(&x)?;
        let d = metric.distance_to_zero(&hx) + metric.tail_bound();
        observed = observed.max(d);
    }
    Ok(Certificate {
        kind: "scaled_containment".into(),
        k: blid.level(),
        bound: blid.c,
        observed_max: observed,
        samples,
        pass: observed < blid.c,
    })
}

/// Damped identity on R^d: H(x) = h(|x|) x with the Euclidean norm. Finite
/// dimensions admit genuinely compact support, so this is the cutoff the
/// jet-realization and linearization routines lean on.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RadialBlid {
    pub bump: BumpFunction,
    pub dim: usize,
}

impl RadialBlid {
    pub fn new(bump: BumpFunction, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(CoreError::invalid("radial.dim", "must be positive"));
        }
        Ok(RadialBlid { bump, dim })
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(CoreError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let h = self.bump.eval(r);
        Ok(x.iter().map(|v| h * v).collect())
    }

    /// Image bound: |H(x)| = h(r) r <= sup(h u).
    pub fn c0(&self) -> f64 {
        self.bump.sup_hu()
    }

    /// Global Lipschitz bound. The differential at radius r has eigenvalues
    /// h(r) (tangential) and h(r) + h'(r) r (radial), so the operator norm is
    /// sup over r of the larger magnitude.
    pub fn c1(&self) -> f64 {
        self.bump.sup_deriv_hu()
    }
}
