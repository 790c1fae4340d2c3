//! Initial opinions from a scenario's initial-condition spec.
//!
//! Random draws come from ChaCha8 seeded with `seed_from_u64(seed)`. A
//! uniform real on `[0, 1)` is the top 53 bits of one `next_u64()` output
//! times `2^-53`. All centers are drawn first in agent order, then all
//! sigmas; a sigma draw that lands on either open bound is redrawn. This
//! derivation is frozen: regression baselines depend on it.

use crate::scenario::InitialSpec;
use hfon_core::{ramp, FuzzyOpinion};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Opinions of `n` agents. Only the uniform spec reads `seed`; the caller
/// validates that random specs come with one.
pub fn seeded_initials(spec: &InitialSpec, seed: u64, n: usize) -> Vec<FuzzyOpinion> {
    match spec {
        InitialSpec::Ramp { lo, hi, sigma } => {
            ramp(n, *lo, *hi).into_iter().map(|center| FuzzyOpinion { center, sigma: *sigma }).collect()
        }
        InitialSpec::Uniform { center: [clo, chi], sigma: [slo, shi] } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let centers: Vec<f64> = (0..n).map(|_| (clo + (chi - clo) * unit(&mut rng)).min(*chi)).collect();
            let sigmas = (0..n).map(|_| loop {
                let s = slo + (shi - slo) * unit(&mut rng);
                if s > *slo && s < *shi {
                    break s;
                }
            });
            centers.into_iter().zip(sigmas).map(|(center, sigma)| FuzzyOpinion { center, sigma }).collect()
        }
        InitialSpec::Explicit { centers, sigmas } => centers
            .iter()
            .zip(sigmas)
            .map(|(&center, &sigma)| FuzzyOpinion { center, sigma })
            .collect(),
    }
}
