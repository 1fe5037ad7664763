//! Monte Carlo oracle: pruned depth-first search of the killed tree.
//!
//! Each replica grows the binary tree edge by edge; a node at depth `i`
//! whose position falls below `v·i` is pruned with its whole subtree, and
//! the replica scores 1 as soon as any node reaches depth `n` (one surviving
//! ray is all the event asks for, so the search exits early).
//!
//! Randomness is keyed, not streamed: every edge derives its step from a
//! 64-bit key obtained by folding `(seed, replica)` down the path bits, so
//! a replica's tree is a pure function of `(seed, replica)` — independent of
//! traversal order, safe to shard across workers, and identical across runs.
//! Because positions do not depend on `v`, two runs with the same seed see
//! the same trees and raising `v` can only kill more of them (common random
//! numbers).

use crate::fixedpoint::{EstimateSource, SurvivalEstimate};
use crate::step_dist::StepDistribution;
use thiserror::Error;

/// Survive-on-equality guard: a node at position `S` survives depth `i` when
/// `S ≥ v·i - KILL_TOL`. The slack forgives f64 rounding in `v·i` when the
/// walk sits exactly on the boundary (lattice laws do this constantly);
/// genuine strict crossings at desk scale are orders of magnitude larger.
const KILL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum McError {
    #[error("replicas must be positive")]
    NoReplicas,
    #[error(
        "budget-dominated run: {budget_hits} of {replicas} replicas hit the node budget; \
         estimate {estimate} is biased down and unreliable"
    )]
    BudgetDominated {
        estimate: f64,
        budget_hits: u64,
        replicas: u64,
    },
}

/// Configuration of one Monte Carlo estimate of `q_n(x0) = P_{x0}(A_n(v))`.
#[derive(Debug, Clone)]
pub struct SimConfig {
    /// Killing slope.
    pub v: f64,
    /// Number of generations the surviving ray must reach.
    pub n: u32,
    /// Starting position of the root.
    pub x0: f64,
    pub replicas: u64,
    pub seed: u64,
    /// Per-replica cap on explored nodes. Replicas that exhaust it score 0
    /// (bias down); hits are counted and the estimate is rejected when more
    /// than 1% of replicas are affected.
    pub node_budget: u64,
}

impl SimConfig {
    pub fn new(v: f64, n: u32, x0: f64, replicas: u64, seed: u64) -> Self {
        Self {
            v,
            n,
            x0,
            replicas,
            seed,
            node_budget: 1 << 22,
        }
    }
}

/// SplitMix64 finalizer: the bit mixer behind the key fold.
#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Splitting rule: a child key is the fold of its parent key with the child
/// label. The root key of replica `r` is `fold(fold(seed, r), SALT)`; the
/// key of the edge to child `c ∈ {0,1}` of a node with key `k` is
/// `fold(k, c)`. Keys therefore depend only on `(seed, replica, path bits)`.
#[inline]
pub(crate) fn fold(state: u64, data: u64) -> u64 {
    splitmix64(state ^ data.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x2545_F491_4F6C_DD1D))
}

/// Uniform in `[0, 1)` from the top 53 bits of a key.
#[inline]
pub(crate) fn unit_f64(key: u64) -> f64 {
    (key >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// Inverse-CDF draw of an atom index from a unit uniform.
#[inline]
fn sample_index(cumulative: &[f64], u: f64) -> usize {
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(cumulative.len() - 1)
}

enum Explore {
    Survived,
    Died,
    BudgetHit,
}

struct Dfs<'a> {
    values: &'a [f64],
    cumulative: &'a [f64],
    v: f64,
    n: u32,
    budget: u64,
    visited: u64,
}

impl Dfs<'_> {
    /// Explores the subtree under a living node. Depth is bounded by `n`, so
    /// recursion depth equals the requested generation count.
    fn run(&mut self, pos: f64, depth: u32, key: u64) -> Explore {
        if depth == self.n {
            return Explore::Survived;
        }
        for child in 0..2u64 {
            self.visited += 1;
            if self.visited > self.budget {
                return Explore::BudgetHit;
            }
            let child_key = fold(key, child);
            let step = self.values[sample_index(self.cumulative, unit_f64(child_key))];
            let child_pos = pos + step;
            if child_pos >= self.v * (depth + 1) as f64 - KILL_TOL {
                match self.run(child_pos, depth + 1, child_key) {
                    Explore::Died => {}
                    other => return other,
                }
            }
        }
        Explore::Died
    }
}

const ROOT_SALT: u64 = 0x6b62_7277_2d6d_6373;

/// Estimates `q_n(x0)` by pruned DFS over `cfg.replicas` independent trees.
///
/// `err` is the 95% normal CI half-width `1.96·sqrt(p̂(1-p̂)/R)`. Budget
/// hits score 0 and are reported in `meta`; more than 1% of them rejects
/// the run as [`McError::BudgetDominated`].
pub fn estimate_qn(d: &StepDistribution, cfg: &SimConfig) -> Result<SurvivalEstimate, McError> {
    if cfg.replicas == 0 {
        return Err(McError::NoReplicas);
    }
    let cumulative = d.cumulative();
    let values: Vec<f64> = d.atoms().iter().map(|a| a.value).collect();

    let mut survived = 0u64;
    let mut budget_hits = 0u64;
    for replica in 0..cfg.replicas {
        // the root itself must sit above the boundary at depth 0
        if cfg.x0 < -KILL_TOL {
            continue;
        }
        let root_key = fold(fold(cfg.seed, replica), ROOT_SALT);
        let mut dfs = Dfs {
            values: &values,
            cumulative: &cumulative,
            v: cfg.v,
            n: cfg.n,
            budget: cfg.node_budget,
            visited: 0,
        };
        match dfs.run(cfg.x0, 0, root_key) {
            Explore::Survived => survived += 1,
            Explore::Died => {}
            Explore::BudgetHit => budget_hits += 1,
        }
    }

    let p_hat = survived as f64 / cfg.replicas as f64;
    if budget_hits * 100 > cfg.replicas {
        return Err(McError::BudgetDominated {
            estimate: p_hat,
            budget_hits,
            replicas: cfg.replicas,
        });
    }
    let err = 1.96 * (p_hat * (1.0 - p_hat) / cfg.replicas as f64).sqrt();
    let meta = serde_json::json!({
        "n": cfg.n,
        "x0": cfg.x0,
        "v": cfg.v,
        "replicas": cfg.replicas,
        "seed": cfg.seed,
        "budget_hits": budget_hits,
    });
    Ok(SurvivalEstimate::new(
        p_hat,
        EstimateSource::MonteCarlo,
        err,
        meta,
    ))
}

/// Proxy for `q∞(x0)`: `q_n` at a large `n`, which upper-bounds the limit
/// (`A_∞ ⊆ A_n`). A companion run at `2n` with the same seed is attached in
/// `meta` so stabilization is visible; with common random numbers the
/// companion can only be smaller or equal.
pub fn estimate_qinf_proxy(
    d: &StepDistribution,
    cfg: &SimConfig,
) -> Result<SurvivalEstimate, McError> {
    let primary = estimate_qn(d, cfg)?;
    let mut twice = cfg.clone();
    twice.n = cfg.n.saturating_mul(2);
    let companion = estimate_qn(d, &twice)?;
    let mut meta = primary.meta.clone();
    meta["proxy"] = serde_json::json!({
        "upper_bounds_qinf": true,
        "companion_n": twice.n,
        "companion_estimate": companion.value,
        "companion_err": companion.err,
    });
    Ok(SurvivalEstimate::new(
        primary.value,
        EstimateSource::MonteCarlo,
        primary.err,
        meta,
    ))
}
