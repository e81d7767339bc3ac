use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::blid::{BlidMap, Certificate};
use crate::error::{CoreError, Result};
use crate::grid::{simpson, GridInterval};
use crate::sampling;
use crate::space::CqElement;

/// Integrand expression in the grid variable `t` and the sampled value
/// `u = x(t)`, for germs of the form x -> integral of expr(t, x(t)) dt.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum Expr {
    T,
    U,
    Const(f64),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, t: f64, u: f64) -> Result<f64> {
        Ok(match self {
            Expr::T => t,
            Expr::U => u,
            Expr::Const(c) => *c,
            Expr::Add(a, b) => a.eval(t, u)? + b.eval(t, u)?,
            Expr::Sub(a, b) => a.eval(t, u)? - b.eval(t, u)?,
            Expr::Mul(a, b) => a.eval(t, u)? * b.eval(t, u)?,
            Expr::Div(a, b) => {
                let d = b.eval(t, u)?;
                if d.abs() < 1e-300 {
                    return Err(CoreError::NonFinite {
                        context: "integrand division".into(),
                    });
                }
                a.eval(t, u)? / d
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum GermKind {
    /// x -> integral over the domain of expr(t, x(t)) dt (composite Simpson).
    Integral(Expr),
    /// x -> exp(integral of x): a composed germ, entire in its argument.
    ExpOfMean,
    /// x -> 1 regardless of the argument.
    Constant,
}

/// Scalar-valued map defined only for sup |x| strictly inside the validity
/// radius. Evaluation refuses arguments outside the ball; producing a
/// globally defined representative is `extend`'s job.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Germ {
    pub name: String,
    pub kind: GermKind,
    pub validity_radius: f64,
}

impl Germ {
    /// Built-in germs, keyed by name:
    ///
    /// * `geometric`: integral of 1 / (1 - x(t)), valid on sup |x| < 1;
    /// * `mean`: integral of x;
    /// * `mean-square`: integral of x^2;
    /// * `exp-mean`: exp of the integral of x;
    /// * `constant`: the constant 1.
    pub fn catalog(name: &str) -> Result<Germ> {
        let (kind, radius) = match name {
            "geometric" => (
                GermKind::Integral(Expr::Div(
                    Box::new(Expr::Const(1.0)),
                    Box::new(Expr::Sub(Box::new(Expr::Const(1.0)), Box::new(Expr::U))),
                )),
                1.0,
            ),
            "mean" => (GermKind::Integral(Expr::U), f64::INFINITY),
            "mean-square" => (
                GermKind::Integral(Expr::Mul(Box::new(Expr::U), Box::new(Expr::U))),
                f64::INFINITY,
            ),
            "exp-mean" => (GermKind::ExpOfMean, f64::INFINITY),
            "constant" => (GermKind::Constant, f64::INFINITY),
            other => return Err(CoreError::UnknownCatalogEntry(other.into())),
        };
        Ok(Germ {
            name: name.into(),
            kind,
            validity_radius: radius,
        })
    }

    pub fn target_dim(&self) -> usize {
        1
    }

    /// Evaluates on an order-0 element, enforcing the validity ball.
    pub fn eval(&self, x: &CqElement) -> Result<Vec<f64>> {
        if x.q != 0 {
            return Err(CoreError::invalid("germ", "acts on order-0 elements"));
        }
        let sup = x.sup_norm();
        if sup >= self.validity_radius {
            return Err(CoreError::OutsideValidity {
                norm: sup,
                radius: self.validity_radius,
            });
        }
        let value = match &self.kind {
            GermKind::Integral(expr) => {
                let pts = x.domain.points();
                let mut integrand = Vec::with_capacity(pts.len());
                for (t, u) in pts.iter().zip(&x.top) {
                    integrand.push(expr.eval(*t, *u)?);
                }
                simpson(&integrand, x.domain.step())?
            }
            GermKind::ExpOfMean => simpson(&x.top, x.domain.step())?.exp(),
            GermKind::Constant => 1.0,
        };
        if !value.is_finite() {
            return Err(CoreError::NonFinite {
                context: format!("germ `{}`", self.name),
            });
        }
        Ok(vec![value])
    }

    /// Monotone envelope: a bound on |germ(y)| over sup |y| <= r, if the germ
    /// admits one on that ball.
    pub fn sup_bound(&self, r: f64) -> Option<f64> {
        match &self.kind {
            GermKind::Integral(_) if self.name == "geometric" => {
                (r < 1.0).then(|| 1.0 / (1.0 - r))
            }
            GermKind::Integral(_) if self.name == "mean" => Some(r),
            GermKind::Integral(_) if self.name == "mean-square" => Some(r * r),
            GermKind::Integral(_) => None,
            GermKind::ExpOfMean => Some(r.exp()),
            GermKind::Constant => Some(1.0),
        }
    }
}

impl BlidMap {
    /// Uniform sup-norm bound on the image, by construction of each kind.
    pub fn image_sup_bound(&self) -> f64 {
        match self {
            BlidMap::Pointwise(b) => b.bump.sup_hu(),
            // sup over a unit-length domain of the Taylor-integral image;
            // 1.01 absorbs the discrete trapezoid excess.
            BlidMap::TaylorIntegral(b) => {
                b.bump.sup_hu() * std::f64::consts::E * 1.01
            }
            BlidMap::Scaled(b) => b.c / 4.0,
            BlidMap::Segment(b) => b.anchor.sup_norm() + b.bump.sup_hu(),
            BlidMap::Projected(p) => match p.side {
                crate::blid::ProjectionSide::Image => p.inner.image_sup_bound(),
                crate::blid::ProjectionSide::Kernel => 2.0 * p.inner.image_sup_bound(),
            },
        }
    }
}

/// Globally defined representative F(x) = germ(blid(x)): everywhere defined
/// because the blid image sits inside the germ's validity ball, and equal to
/// the germ near 0 because the blid is the identity there.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GlobalMap {
    pub germ: Germ,
    pub blid: BlidMap,
}

/// Composes a germ with a blid after checking that the blid's image bound
/// lands strictly inside the germ's validity ball.
pub fn extend(germ: Germ, blid: BlidMap) -> Result<GlobalMap> {
    let image = blid.image_sup_bound();
    if image >= germ.validity_radius {
        return Err(CoreError::OutsideValidity {
            norm: image,
            radius: germ.validity_radius,
        });
    }
    Ok(GlobalMap { germ, blid })
}

impl GlobalMap {
    pub fn eval(&self, x: &CqElement) -> Result<Vec<f64>> {
        self.germ.eval(&self.blid.apply(x)?)
    }

    /// Radius on which F provably agrees with the germ: inside the blid's
    /// identity ball and the germ's own validity ball.
    pub fn agreement_radius(&self) -> f64 {
        self.blid.local_radius().min(self.germ.validity_radius)
    }
}

/// Samples the agreement ball and compares F against the raw germ.
pub fn agreement_check(
    map: &GlobalMap,
    domain: GridInterval,
    radius: f64,
    samples: usize,
    tol: f64,
    rng: &mut impl Rng,
) -> Result<Certificate> {
    if radius > map.agreement_radius() {
        return Err(CoreError::invalid(
            "agreement radius",
            format!(
                "{radius} exceeds the certified agreement radius {}",
                map.agreement_radius()
            ),
        ));
    }
    let mut observed = 0f64;
    for _ in 0..samples {
        let raw = sampling::random_element(map.blid.input_order(), domain, rng);
        let x = sampling::scaled_to_sup_norm(&raw, radius * rng.random_range(0.05..=1.0))?;
        let direct = map.germ.eval(&x)?;
        let through = map.eval(&x)?;
        for (a, b) in direct.iter().zip(&through) {
            observed = observed.max((a - b).abs());
        }
    }
    Ok(Certificate {
        kind: "extension_agreement".into(),
        k: 0,
        bound: tol,
        observed_max: observed,
        samples,
        pass: observed <= tol,
    })
}

/// Samples arbitrarily large arguments and checks |F| against the germ's
/// envelope on the blid image ball, with `slack` of numerical headroom.
pub fn boundedness_check(
    map: &GlobalMap,
    domain: GridInterval,
    norm_cap: f64,
    samples: usize,
    slack: f64,
    rng: &mut impl Rng,
) -> Result<Certificate> {
    let envelope = map
        .germ
        .sup_bound(map.blid.image_sup_bound())
        .ok_or_else(|| {
            CoreError::invalid("boundedness", "germ admits no envelope on the image ball")
        })?;
    let mut observed = 0f64;
    for i in 0..samples {
        let raw = sampling::random_element(map.blid.input_order(), domain, rng);
        let frac = (i % 16) as f64 / 15.0;
        let target = norm_cap * 10f64.powf(-4.0 * (1.0 - frac));
        let x = sampling::scaled_to_sup_norm(&raw, target)?;
        let v = map.eval(&x)?;
        observed = observed.max(v[0].abs());
    }
    Ok(Certificate {
        kind: "extension_boundedness".into(),
        k: 0,
        bound: envelope + slack,
        observed_max: observed,
        samples,
        pass: observed <= envelope + slack,
    })
}
