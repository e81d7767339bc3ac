//! Shared inputs for the benchmarks: deterministic elements, maps, and
//! polynomial systems sized like the verification suites use them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use blid_core::cohomology::LinearAuto;
use blid_core::extension::{extend, Germ, GlobalMap};
use blid_core::jets::{borel_realize, BorelRealization, HomPoly, JetSequence};
use blid_core::{
    sampling, BlidMap, BumpFunction, CqElement, GridInterval, PointwiseBlid, ScaledBlid,
    TaylorIntegralBlid,
};

pub const GRID_POINTS: usize = 1025;

pub fn grid() -> GridInterval {
    GridInterval::unit(GRID_POINTS)
}

pub fn bump() -> BumpFunction {
    BumpFunction::default()
}

pub fn element(q: usize, seed: u64) -> CqElement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sampling::random_element(q, grid(), &mut rng)
}

pub fn pointwise() -> PointwiseBlid {
    PointwiseBlid::new(bump())
}

pub fn taylor(k: usize) -> TaylorIntegralBlid {
    TaylorIntegralBlid::new(bump(), k)
}

pub fn scaled(c: f64) -> ScaledBlid {
    ScaledBlid::new(bump(), c).expect("valid level")
}

pub fn geometric_extension() -> GlobalMap {
    extend(
        Germ::catalog("geometric").expect("catalog germ"),
        BlidMap::Pointwise(pointwise()),
    )
    .expect("image inside validity ball")
}

/// P_j = j! x^j through degree 5.
pub fn factorial_realization() -> BorelRealization {
    let entries: Vec<HomPoly<f64>> = (0..=5u32)
        .map(|j| {
            let coeff: f64 = (1..=j).map(|i| i as f64).product();
            HomPoly::from_terms(1, j, &[(vec![j], coeff)]).expect("valid term")
        })
        .collect();
    let jets = JetSequence::new(1, entries).expect("increasing degrees");
    borel_realize(&jets, bump()).expect("budget satisfiable")
}

/// A hyperbolic 3x3 automorphism with spread eigenvalues.
pub fn spread_auto() -> LinearAuto {
    let m = nalgebra::DMatrix::from_row_slice(
        3,
        3,
        &[2.0, 0.3, 0.0, 0.0, 0.5, 0.1, 0.2, 0.0, 3.0],
    );
    LinearAuto::new(m).expect("invertible")
}

/// Degree-3 right-hand side in three variables, dense coefficients.
pub fn dense_cubic() -> HomPoly<f64> {
    let mut p = HomPoly::zeros(3, 3);
    for (i, c) in p.coeffs.iter_mut().enumerate() {
        *c = 0.1 + 0.07 * i as f64;
    }
    p
}
