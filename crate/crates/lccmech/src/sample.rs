//! Deterministic point sampling for structure and identity checks.
//!
//! Points are drawn uniformly from the box [-1, 1]^dim with a seeded
//! ChaCha stream, so every run with the same seed visits the same points.
//! A caller-supplied guard rejects points too close to the singular locus
//! of the conformal denominators.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::tol::SAMPLE_BOX;

/// Draws `count` accepted points of dimension `dim`. `accept` should return
/// false near singular denominators. Gives up (as a singular-sampling error)
/// if the acceptance rate would require more than 1000x oversampling.
pub fn sample_points<F>(
    dim: usize,
    count: usize,
    seed: u64,
    accept: F,
) -> Result<Vec<Vec<f64>>, Error>
where
    F: Fn(&[f64]) -> bool,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let max_draws = count.saturating_mul(1000).max(1000);
    let mut draws = 0usize;
    while out.len() < count {
        if draws >= max_draws {
            return Err(Error::SingularPoint(format!(
                "sampling rejected {} of {} draws; structure is singular on most of the box",
                draws - out.len(),
                draws
            )));
        }
        draws += 1;
        let point: Vec<f64> = (0..dim)
            .map(|_| rng.gen_range(-SAMPLE_BOX..=SAMPLE_BOX))
            .collect();
        if accept(&point) {
            out.push(point);
        }
    }
    Ok(out)
}
