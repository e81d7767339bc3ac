//! Numerical toolkit for bounded local-identity (blid) maps: damped identities
//! on discretized function spaces that substitute for bump functions where
//! genuine smooth bumps do not exist. The crate builds the maps, certifies
//! their defining bounds, and exercises the standard applications: extending
//! germs to globally defined maps, realizing jets, solving cohomological
//! equations degree by degree, and cutting off nonlinearities for local
//! linearization.

pub mod blid;
pub mod bump;
pub mod cohomology;
pub mod differentiability;
pub mod error;
pub mod extension;
pub mod grid;
pub mod jets;
pub mod linearization;
pub mod sampling;
pub mod space;

pub use blid::{
    blid_bound_certificate, local_identity_certificate, scaled_containment_certificate, BlidMap,
    Certificate, PointwiseBlid, ProjectedBlid, ProjectionSide, Projector, RadialBlid, ScaledBlid,
    SegmentBlid, TaylorIntegralBlid,
};
pub use bump::{BumpFunction, PlaneBump};
pub use error::{CoreError, Result};
pub use grid::{cumulative_trapezoid, simpson, GridInterval};
pub use space::{CqElement, FrechetMetric, SeminormFamily, SpaceKind, DEFAULT_METRIC_DEPTH};
