use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Even cutoff profile built from the classical exp(-1/u) mollifier:
///
///   h(s) = 1 for |s| <= r_inner, h(s) = 0 for |s| >= r_outer,
///
/// with a smooth monotone transition in between. The plateau and the
/// vanishing region are exact (bit-for-bit 1.0 and 0.0), not merely close.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BumpFunction {
    pub r_inner: f64,
    pub r_outer: f64,
}

impl Default for BumpFunction {
    fn default() -> Self {
        BumpFunction {
            r_inner: 1.0 / 3.0,
            r_outer: 0.5,
        }
    }
}

fn psi(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

fn psi_prime(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp() / (u * u)
    } else {
        0.0
    }
}

impl BumpFunction {
    pub fn new(r_inner: f64, r_outer: f64) -> Result<Self> {
        if !(r_inner > 0.0) {
            return Err(CoreError::invalid("bump.r_inner", "must be positive"));
        }
        if !(r_outer > r_inner) {
            return Err(CoreError::invalid("bump.r_outer", "must exceed r_inner"));
        }
        Ok(BumpFunction { r_inner, r_outer })
    }

    /// Smooth step g on [0, 1]: 0 at 0, 1 at 1, flat to all orders at both ends.
    fn step(u: f64) -> f64 {
        if u <= 0.0 {
            0.0
        } else if u >= 1.0 {
            1.0
        } else {
            let a = psi(u);
            a / (a + psi(1.0 - u))
        }
    }

    fn step_prime(u: f64) -> f64 {
        if u <= 0.0 || u >= 1.0 {
            0.0
        } else {
            let a = psi(u);
            let b = psi(1.0 - u);
            let d = a + b;
            // The denominator stays above exp(-2): one of psi(u), psi(1-u) has
            // argument >= 1/2.
            (psi_prime(u) * b + a * psi_prime(1.0 - u)) / (d * d)
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        let r = s.abs();
        if r <= self.r_inner {
            1.0
        } else if r >= self.r_outer {
            0.0
        } else {
            Self::step((self.r_outer - r) / (self.r_outer - self.r_inner))
        }
    }

    /// Analytic derivative h'(s); identically zero on the plateau and outside
    /// the support.
    pub fn deriv(&self, s: f64) -> f64 {
        let r = s.abs();
        if r <= self.r_inner || r >= self.r_outer {
            0.0
        } else {
            let width = self.r_outer - self.r_inner;
            -s.signum() * Self::step_prime((self.r_outer - r) / width) / width
        }
    }

    /// sup over u of h(u) * u. This is the one-step amplitude bound `a` that
    /// every blid built from this profile inherits; it lies strictly between
    /// r_inner and r_outer.
    pub fn sup_hu(&self) -> f64 {
        self.refined_max(|u| self.eval(u) * u)
    }

    /// sup over u >= 0 of |d/du (h(u) * u)|, the Lipschitz constant of the
    /// one-dimensional damped identity. At least 1 because of the plateau.
    pub fn sup_deriv_hu(&self) -> f64 {
        self.refined_max(|u| (self.eval(u) + self.deriv(u) * u).abs())
            .max(1.0)
    }

    fn refined_max(&self, f: impl Fn(f64) -> f64) -> f64 {
        let mut lo = self.r_inner;
        let mut hi = self.r_outer;
        let mut best_u = lo;
        let mut best = f64::NEG_INFINITY;
        for _ in 0..3 {
            let n = 4096;
            let h = (hi - lo) / n as f64;
            for i in 0..=n {
                let u = lo + i as f64 * h;
                let v = f(u);
                if v > best {
                    best = v;
                    best_u = u;
                }
            }
            lo = (best_u - 2.0 * h).max(self.r_inner);
            hi = (best_u + 2.0 * h).min(self.r_outer);
        }
        best
    }
}

/// Cutoff on the plane supported on a band around the y-axis: 1 on
/// |x| <= r_inner, 0 on |x| >= r_outer, constant in y. Bounded support is
/// impossible here without losing the plateau, so the band is the right shape.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PlaneBump {
    pub profile: BumpFunction,
}

impl PlaneBump {
    pub fn new(profile: BumpFunction) -> Self {
        PlaneBump { profile }
    }

    pub fn eval(&self, x: f64, _y: f64) -> f64 {
        self.profile.eval(x)
    }
}
