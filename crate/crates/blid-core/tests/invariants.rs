//! Property tests for the structural laws the toolkit is built on: metric
//! axioms, seminorm monotonicity, exactness of the local identity, metric
//! containment of scaled maps, and homogeneity of the polynomial layer.

use proptest::prelude::*;

use blid_core::jets::{hompoly_eval, multi_indices, HomPoly};
use blid_core::sampling;
use blid_core::{
    BlidMap, BumpFunction, CqElement, FrechetMetric, GridInterval, PointwiseBlid, ScaledBlid,
    SeminormFamily, SpaceKind, TaylorIntegralBlid,
};

const GRID_N: usize = 65;

fn grid() -> GridInterval {
    GridInterval::new(0.0, 1.0, GRID_N).unwrap()
}

fn element(q: usize) -> impl Strategy<Value = CqElement> {
    (
        prop::collection::vec(-1.0..1.0f64, q),
        prop::collection::vec(-1.0..1.0f64, GRID_N),
    )
        .prop_map(move |(jet, top)| CqElement::new(q, grid(), jet, top).unwrap())
}

fn default_bump() -> BumpFunction {
    BumpFunction::default()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn metric_is_symmetric_and_triangular(x in element(2), y in element(2), z in element(2)) {
        let metric = FrechetMetric::new(SpaceKind::CinfInterval, 12).unwrap();
        let dxy = metric.distance(&x, &y).unwrap();
        let dyx = metric.distance(&y, &x).unwrap();
        let dxz = metric.distance(&x, &z).unwrap();
        let dzy = metric.distance(&z, &y).unwrap();
        prop_assert!((dxy - dyx).abs() <= 1e-15);
        prop_assert!(dxy <= dxz + dzy + 1e-12);
        prop_assert_eq!(metric.distance(&x, &x).unwrap(), 0.0);
        // The geometric weights sum to 2, capping every distance.
        prop_assert!(dxy < 2.0);
    }

    #[test]
    fn seminorms_grow_with_the_order(x in element(3)) {
        let family = SeminormFamily::new(SpaceKind::CinfInterval);
        let values = family.eval_through(&x, 6);
        for w in values.windows(2) {
            prop_assert!(w[0] <= w[1] + 1e-15);
        }
    }

    #[test]
    fn seminorms_are_subadditive_and_homogeneous(
        x in element(2),
        y in element(2),
        a in -4.0..4.0f64,
    ) {
        let family = SeminormFamily::new(SpaceKind::CinfInterval);
        let k = 2;
        let px = family.eval(&x, k);
        let py = family.eval(&y, k);
        let sum = x.add_scaled(1.0, &y);
        let psum = family.eval(&sum, k);
        prop_assert!(psum <= px + py + 1e-12 * (1.0 + px + py));
        let pax = family.eval(&x.scale(a), k);
        prop_assert!((pax - a.abs() * px).abs() <= 1e-12 * (1.0 + pax));
    }

    #[test]
    fn pointwise_blid_is_bounded_and_locally_exact(x in element(0), scale in 0.01..50.0f64) {
        let bump = default_bump();
        let blid = PointwiseBlid::new(bump);
        let big = x.scale(scale);
        let image = blid.apply(&big).unwrap();
        prop_assert!(image.sup_norm() <= bump.sup_hu());

        // Inside the plateau the map is the identity bit for bit, and hence
        // trivially idempotent there.
        if big.sup_norm() > 0.0 {
            let small = sampling::scaled_to_sup_norm(&big, bump.r_inner * 0.999).unwrap();
            let once = blid.apply(&small).unwrap();
            prop_assert_eq!(once.rep_distance(&small).unwrap(), 0.0);
            let twice = blid.apply(&once).unwrap();
            prop_assert_eq!(twice.rep_distance(&small).unwrap(), 0.0);
        }
    }

    #[test]
    fn taylor_blid_identity_ball_is_exact(x in element(2), scale in 0.01..20.0f64) {
        let bump = default_bump();
        let blid = TaylorIntegralBlid::new(bump, 2);
        let big = x.scale(scale);
        if big.cq_norm() > 0.0 {
            let small = sampling::scaled_to_cq_norm(&big, bump.r_inner * 0.999).unwrap();
            let image = blid.apply(&small).unwrap();
            prop_assert_eq!(image.rep_distance(&small).unwrap(), 0.0);
        }
    }

    #[test]
    fn scaled_blid_image_stays_inside_its_ball(x in element(3), scale in 0.01..50.0f64) {
        let blid = ScaledBlid::new(default_bump(), 0.5).unwrap();
        let metric = FrechetMetric::new(SpaceKind::CinfInterval, blid.level()).unwrap();
        let image = blid.apply(&x.scale(scale)).unwrap();
        let d = metric.distance_to_zero(&image) + metric.tail_bound();
        prop_assert!(d < 0.5);
    }

    #[test]
    fn blid_map_identity_points_are_exact(x in element(0)) {
        let blid = BlidMap::Pointwise(PointwiseBlid::new(default_bump()));
        // Anything inside the certified local radius passes through
        // untouched; rescale the sample onto that ball.
        if x.sup_norm() > 0.0 {
            let inside = sampling::scaled_to_sup_norm(&x, blid.local_radius() * 0.9).unwrap();
            let image = blid.apply(&inside).unwrap();
            prop_assert_eq!(image.rep_distance(&inside).unwrap(), 0.0);
        }
    }

    #[test]
    fn multi_indices_enumerate_the_full_degree(dim in 1..4usize, degree in 0..5u32) {
        let indices = multi_indices(dim, degree);
        // Count must be the stars-and-bars binomial C(degree + dim - 1, dim - 1).
        let mut expect = 1f64;
        for i in 1..dim {
            expect *= (degree as f64 + i as f64) / i as f64;
        }
        prop_assert_eq!(indices.len(), expect.round() as usize);
        for idx in &indices {
            prop_assert_eq!(idx.degree(), degree);
            prop_assert_eq!(idx.dim(), dim);
        }
        for w in indices.windows(2) {
            prop_assert!(w[0].0 > w[1].0);
        }
    }

    #[test]
    fn homogeneous_polynomials_scale_by_degree(
        coeffs in prop::collection::vec(-2.0..2.0f64, 4),
        x0 in -1.5..1.5f64,
        x1 in -1.5..1.5f64,
        lambda in 0.1..3.0f64,
    ) {
        let poly = HomPoly { dim: 2, degree: 3, coeffs };
        let at = hompoly_eval(&poly, &[x0, x1]).unwrap();
        let scaled = hompoly_eval(&poly, &[lambda * x0, lambda * x1]).unwrap();
        let want = lambda.powi(3) * at;
        prop_assert!((scaled - want).abs() <= 1e-10 * (1.0 + want.abs()));
    }
}
