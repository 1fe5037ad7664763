//! Brunet-Derrida branching-selection particle system.
//!
//! `N` particles evolve in discrete generations: each particle is replaced
//! by two children displaced by independent copies of the step `ζ`, then
//! selection keeps the `N` rightmost of the `2N` candidates. The front (the
//! maximum position) propagates at a finite-`N` velocity `v_N` sitting below
//! the critical speed `v*` by a gap of order `(log N)⁻²`.
//!
//! Randomness is keyed by `(seed, generation, slot, child)`, where `slot` is
//! the particle's index in the sorted cloud, so runs are reproducible,
//! generations can be sharded across workers, and shuffling the input order
//! of a cloud changes nothing (the cloud re-sorts before stepping).

use crate::mcsim::{fold, unit_f64};
use crate::step_dist::StepDistribution;

/// A sorted-descending population of particle positions.
#[derive(Debug, Clone)]
pub struct ParticleCloud {
    positions: Vec<f64>,
    generation: u64,
}

impl ParticleCloud {
    /// `n` particles at `x0`, generation 0.
    pub fn new(n: usize, x0: f64) -> Self {
        assert!(n > 0, "the cloud needs at least one particle");
        Self {
            positions: vec![x0; n],
            generation: 0,
        }
    }

    /// Arbitrary starting positions; sorted descending on entry.
    pub fn from_positions(mut positions: Vec<f64>) -> Self {
        assert!(!positions.is_empty());
        positions.sort_by(|a, b| b.total_cmp(a));
        Self {
            positions,
            generation: 0,
        }
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn max_position(&self) -> f64 {
        self.positions[0]
    }
}

/// One branching + selection step.
///
/// Produces the `2N` children (candidate `2·slot + c` is child `c` of the
/// particle at `slot`), keeps the `N` rightmost, breaking position ties in
/// favor of the earlier candidate index, and returns the next sorted cloud.
pub fn step(cloud: &ParticleCloud, d: &StepDistribution, seed: u64) -> ParticleCloud {
    let n = cloud.positions.len();
    let cumulative = d.cumulative();
    let values: Vec<f64> = d.atoms().iter().map(|a| a.value).collect();

    let gen_key = fold(seed, cloud.generation);
    let mut candidates: Vec<(f64, u32)> = Vec::with_capacity(2 * n);
    for (slot, &pos) in cloud.positions.iter().enumerate() {
        let slot_key = fold(gen_key, slot as u64);
        for child in 0..2u64 {
            let key = fold(slot_key, child);
            let u = unit_f64(key);
            let idx = cumulative
                .iter()
                .position(|&c| u < c)
                .unwrap_or(values.len() - 1);
            candidates.push((pos + values[idx], (2 * slot as u32) + child as u32));
        }
    }
    // total order: position descending, candidate index ascending
    candidates.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    candidates.truncate(n);
    ParticleCloud {
        positions: candidates.into_iter().map(|(p, _)| p).collect(),
        generation: cloud.generation + 1,
    }
}

/// Measured front speed with a batch-means confidence interval.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SpeedMeasurement {
    pub v_hat: f64,
    /// 95% half-width from batch means over the post-burn-in window.
    pub ci: f64,
    pub batches: usize,
    pub n_particles: usize,
    pub burn_in: u64,
    pub horizon: u64,
}

/// Runs the system for `horizon` generations from a cloud at the origin and
/// reads the front speed off the maximum position:
/// `v̂_N = (max(horizon) - max(burn_in)) / (horizon - burn_in)`.
///
/// The confidence interval comes from batch means: the post-burn-in window
/// splits into at least 10 equal batches whose per-generation increments are
/// treated as near-independent samples.
pub fn measure_speed(
    d: &StepDistribution,
    n_particles: usize,
    burn_in: u64,
    horizon: u64,
    seed: u64,
) -> SpeedMeasurement {
    assert!(horizon > burn_in, "horizon must exceed burn-in");
    let mut cloud = ParticleCloud::new(n_particles, 0.0);
    let mut max_track = Vec::with_capacity(horizon as usize + 1);
    max_track.push(cloud.max_position());
    for _ in 0..horizon {
        cloud = step(&cloud, d, seed);
        max_track.push(cloud.max_position());
    }
    let span = (horizon - burn_in) as usize;
    let v_hat = (max_track[horizon as usize] - max_track[burn_in as usize]) / span as f64;

    let batches = 10usize.max(span / 10_000).min(span);
    let batch_len = span / batches;
    let mut speeds = Vec::with_capacity(batches);
    for b in 0..batches {
        let start = burn_in as usize + b * batch_len;
        let end = start + batch_len;
        speeds.push((max_track[end] - max_track[start]) / batch_len as f64);
    }
    let mean = speeds.iter().sum::<f64>() / speeds.len() as f64;
    let var = speeds.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>()
        / (speeds.len() as f64 - 1.0);
    let ci = 1.96 * (var / speeds.len() as f64).sqrt();

    SpeedMeasurement {
        v_hat,
        ci,
        batches,
        n_particles,
        burn_in,
        horizon,
    }
}
