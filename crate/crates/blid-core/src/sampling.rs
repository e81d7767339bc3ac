use rand::Rng;

use crate::error::{CoreError, Result};
use crate::grid::GridInterval;
use crate::space::{CqElement, SeminormFamily};

/// Random smooth element: the top derivative is a short random cosine sum and
/// the jet entries are uniform in [-1, 1]. Smoothness keeps reconstruction
/// honest; size is left to the rescaling helpers.
pub fn random_element(q: usize, domain: GridInterval, rng: &mut impl Rng) -> CqElement {
    random_element_with(q, domain, rng, 6.0)
}

/// Same with a frequency cap for rougher or milder profiles.
pub fn random_element_with(
    q: usize,
    domain: GridInterval,
    rng: &mut impl Rng,
    max_freq: f64,
) -> CqElement {
    let terms: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.random_range(-1.0..=1.0),
                rng.random_range(0.3..=max_freq),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let jet: Vec<f64> = (0..q).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let top = domain
        .points()
        .iter()
        .map(|&t| terms.iter().map(|(a, w, p)| a * (w * t + p).cos()).sum())
        .collect();
    CqElement::new(q, domain, jet, top).expect("finite random data")
}

/// Rescales so the Banach norm max_{j<=q} sup |x^(j)| equals `target`.
pub fn scaled_to_cq_norm(x: &CqElement, target: f64) -> Result<CqElement> {
    rescale(x, x.cq_norm(), target)
}

/// Rescales so sup |x| equals `target`.
pub fn scaled_to_sup_norm(x: &CqElement, target: f64) -> Result<CqElement> {
    rescale(x, x.sup_norm(), target)
}

/// Rescales so seminorm k equals `target`.
pub fn scaled_to_seminorm(
    x: &CqElement,
    family: &SeminormFamily,
    k: usize,
    target: f64,
) -> Result<CqElement> {
    rescale(x, family.eval(x, k), target)
}

fn rescale(x: &CqElement, current: f64, target: f64) -> Result<CqElement> {
    if !(target >= 0.0) || !target.is_finite() {
        return Err(CoreError::invalid("target", "must be finite and >= 0"));
    }
    if current <= 0.0 {
        return Err(CoreError::invalid(
            "element",
            "cannot rescale an element of zero size",
        ));
    }
    Ok(x.scale(target / current))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rescaling_hits_the_target_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = GridInterval::unit(129);
        for _ in 0..10 {
            let x = random_element(2, g, &mut rng);
            let y = scaled_to_cq_norm(&x, 0.25).unwrap();
            assert!((y.cq_norm() - 0.25).abs() < 1e-12);
            let z = scaled_to_sup_norm(&x, 3.0).unwrap();
            assert!((z.sup_norm() - 3.0).abs() < 1e-10);
        }
    }

    #[test]
    fn sampling_is_deterministic_in_the_seed() {
        let g = GridInterval::unit(65);
        let a = random_element(1, g, &mut ChaCha8Rng::seed_from_u64(9));
        let b = random_element(1, g, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
        let c = random_element(1, g, &mut ChaCha8Rng::seed_from_u64(10));
        assert!(a.rep_distance(&c).unwrap() > 0.0);
    }

    #[test]
    fn zero_elements_cannot_be_rescaled() {
        let g = GridInterval::unit(65);
        let z = CqElement::zero(1, g);
        assert!(scaled_to_cq_norm(&z, 1.0).is_err());
    }
}
