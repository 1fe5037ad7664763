//! Grid rendering of the class `H` and the survival operator `T`.
//!
//! `H` is the set of nondecreasing `[0,1]`-valued functions vanishing on the
//! negative half-line; survival probabilities `q_n` and their limit `q∞` live
//! there. One generation of the killed walk acts as
//! `T(h)(x) = ψ(E h(x + ζ - v))` with `ψ(s) = 2s - s²`, and `q∞` is the
//! nontrivial fixed point reached monotonically from `q₀ = 1_{[0,∞)}`.
//!
//! A [`GridFunction`] stores node values on a uniform grid over `[0, x_max]`.
//! When every atom offset `vᵢ - v` is an integer multiple of the step
//! ("lattice mode"), `T` reads nodes exactly and the iteration is free of
//! interpolation error; otherwise reads are linearly interpolated. Beyond
//! `x_max` the function is extended by 1 (`ClampOne`, biases the survival
//! estimate up) or by its last node value (`ClampLast`, biases it down);
//! running both brackets the truncation error.

use crate::step_dist::StepDistribution;
use serde::Serialize;
use thiserror::Error;

/// Tolerance for "an offset is an integer number of steps".
const LATTICE_TOL: f64 = 1e-9;

/// Slack allowed on `[0,1]` membership and monotonicity before a value is
/// considered a real violation rather than rounding noise.
const NOISE_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum FixedPointError {
    #[error("grid step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("grid needs at least two nodes, got {0}")]
    TooFewNodes(usize),
    #[error("node {index} value {value} outside [0,1] beyond tolerance")]
    OutOfRange { index: usize, value: f64 },
    #[error("node {index} breaks monotonicity: {prev} -> {value}")]
    NotMonotone {
        index: usize,
        prev: f64,
        value: f64,
    },
    #[error("psi argument {0} outside [0,1] beyond tolerance")]
    DomainError(f64),
    #[error("no convergence after {iters} iterations (last sup-change {last_delta:.3e})")]
    MaxIters { iters: usize, last_delta: f64 },
}

/// Extension rule to the right of `x_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RightMode {
    ClampOne,
    ClampLast,
}

/// A member of `H` rendered on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    step: f64,
    values: Vec<f64>,
    right_mode: RightMode,
}

impl GridFunction {
    /// Validates range and monotonicity (within 1e-12 rounding slack, which
    /// is then snapped away so the stored values are exactly monotone and in
    /// `[0,1]`).
    pub fn new(step: f64, values: Vec<f64>, right_mode: RightMode) -> Result<Self, FixedPointError> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(FixedPointError::BadStep(step));
        }
        if values.len() < 2 {
            return Err(FixedPointError::TooFewNodes(values.len()));
        }
        let mut values = values;
        let mut prev = 0.0f64;
        for (index, v) in values.iter_mut().enumerate() {
            if !(*v >= -NOISE_TOL && *v <= 1.0 + NOISE_TOL) {
                return Err(FixedPointError::OutOfRange { index, value: *v });
            }
            *v = v.clamp(0.0, 1.0);
            if index > 0 {
                if *v < prev - NOISE_TOL {
                    return Err(FixedPointError::NotMonotone {
                        index,
                        prev,
                        value: *v,
                    });
                }
                *v = v.max(prev);
            }
            prev = *v;
        }
        Ok(Self {
            step,
            values,
            right_mode,
        })
    }

    /// The indicator `1_{[0,∞)}` (all nodes 1): the canonical `q₀`.
    pub fn indicator(step: f64, x_max: f64, right_mode: RightMode) -> Result<Self, FixedPointError> {
        let n = node_count(step, x_max)?;
        Self::new(step, vec![1.0; n], right_mode)
    }

    /// Samples `f` at the nodes of a grid covering `[0, x_max]`.
    pub fn from_fn(
        step: f64,
        x_max: f64,
        right_mode: RightMode,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self, FixedPointError> {
        let n = node_count(step, x_max)?;
        Self::new(step, (0..n).map(|i| f(i as f64 * step)).collect(), right_mode)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn x_max(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn right_mode(&self) -> RightMode {
        self.right_mode
    }

    fn right_value(&self) -> f64 {
        match self.right_mode {
            RightMode::ClampOne => 1.0,
            RightMode::ClampLast => *self.values.last().expect("len >= 2"),
        }
    }

    /// Evaluation contract: 0 strictly left of 0 (no interpolation across the
    /// jump; node 0 stores the right-limit), linear interpolation on
    /// `[0, x_max]` with reads snapped to nodes when within `1e-9` steps
    /// (lattice exactness), and the right-mode extension beyond.
    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let t = x / self.step;
        let last = (self.values.len() - 1) as f64;
        let nearest = t.round();
        if (t - nearest).abs() <= LATTICE_TOL {
            if nearest > last {
                return self.right_value();
            }
            return self.values[nearest as usize];
        }
        if t > last {
            return self.right_value();
        }
        let i = t.floor() as usize;
        let frac = t - i as f64;
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    /// Largest nodewise absolute difference.
    pub fn sup_distance(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest single node-to-node increment: the local interpolation scale.
    pub fn max_jump(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }
}

fn node_count(step: f64, x_max: f64) -> Result<usize, FixedPointError> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(FixedPointError::BadStep(step));
    }
    let n = (x_max / step).round() as i64 + 1;
    if n < 2 {
        return Err(FixedPointError::TooFewNodes(n.max(0) as usize));
    }
    Ok(n as usize)
}

/// `ψ(s) = 2s - s²`: survival of a node with two independent children each
/// surviving with probability `s`.
pub fn psi(s: f64) -> Result<f64, FixedPointError> {
    let s = check_unit(s)?;
    Ok(psi_raw(s))
}

/// `ψ₊(s) = min(2s, 1)`, the super-solution envelope.
pub fn psi_plus(s: f64) -> Result<f64, FixedPointError> {
    let s = check_unit(s)?;
    Ok((2.0 * s).min(1.0))
}

/// `ψ₋(s) = min(γs, h)`, the sub-solution envelope.
pub fn psi_minus(s: f64, gamma: f64, h: f64) -> Result<f64, FixedPointError> {
    let s = check_unit(s)?;
    Ok((gamma * s).min(h))
}

fn check_unit(s: f64) -> Result<f64, FixedPointError> {
    if !(-NOISE_TOL..=1.0 + NOISE_TOL).contains(&s) {
        return Err(FixedPointError::DomainError(s));
    }
    Ok(s.clamp(0.0, 1.0))
}

pub(crate) fn psi_raw(s: f64) -> f64 {
    2.0 * s - s * s
}

/// Finds the smallest denominator `k ≤ max_denom` such that every atom
/// offset `vᵢ - v` is an integer multiple of `1/k`; the lattice step is then
/// `1/k`. Returns `None` when no such denominator exists (interpolation
/// mode).
pub fn lattice_step(d: &StepDistribution, v: f64, max_denom: u32) -> Option<f64> {
    (1..=max_denom)
        .find(|&k| {
            d.atoms().iter().all(|a| {
                let scaled = (a.value - v) * k as f64;
                // absolute tolerance, matching eval's node snap: a scaled
                // tolerance would accept almost any large denominator
                (scaled - scaled.round()).abs() <= LATTICE_TOL
            })
        })
        .map(|k| 1.0 / k as f64)
}

/// Grid and iteration parameters for the fixed-point solve.
#[derive(Debug, Clone)]
pub struct GridConfig {
    pub step: f64,
    pub x_max: f64,
    pub right_mode: RightMode,
    pub tol: f64,
    pub max_iters: usize,
}

impl GridConfig {
    pub fn new(step: f64, x_max: f64, right_mode: RightMode) -> Self {
        Self {
            step,
            x_max,
            right_mode,
            tol: 1e-12,
            max_iters: 400_000,
        }
    }

    /// Lattice-mode config when the offsets admit one, refining the natural
    /// step below `max_step` for resolution.
    pub fn lattice(
        d: &StepDistribution,
        v: f64,
        x_max: f64,
        right_mode: RightMode,
        max_step: f64,
    ) -> Option<Self> {
        let mut step = lattice_step(d, v, 100_000)?;
        while step > max_step {
            step *= 0.5;
        }
        Some(Self::new(step, x_max, right_mode))
    }
}

/// One application of `T`: `out(x) = ψ(Σᵢ pᵢ h(x + vᵢ - v))` at every node.
///
/// The expectation is an exact atom sum; off-node reads go through the
/// evaluation contract. In lattice mode every read is a direct node lookup.
/// The output inherits step, span and right mode, and is certified back into
/// `H` (rounding noise up to 1e-12 is snapped, anything larger panics in
/// debug builds).
pub fn apply_t(h: &GridFunction, d: &StepDistribution, v: f64) -> GridFunction {
    let n = h.values.len();
    let step = h.step;
    let right = h.right_value();
    let mut acc = vec![0.0f64; n];

    let offsets: Vec<f64> = d.atoms().iter().map(|a| a.value - v).collect();
    let lattice: Option<Vec<i64>> = offsets
        .iter()
        .map(|o| {
            let t = o / step;
            let k = t.round();
            ((t - k).abs() <= LATTICE_TOL).then_some(k as i64)
        })
        .collect();

    match lattice {
        Some(shifts) => {
            for (shift, atom) in shifts.iter().zip(d.atoms()) {
                let p = atom.prob;
                for (i, slot) in acc.iter_mut().enumerate() {
                    let j = i as i64 + shift;
                    *slot += p * if j < 0 {
                        0.0
                    } else if j >= n as i64 {
                        right
                    } else {
                        h.values[j as usize]
                    };
                }
            }
        }
        None => {
            for (offset, atom) in offsets.iter().zip(d.atoms()) {
                let p = atom.prob;
                for (i, slot) in acc.iter_mut().enumerate() {
                    *slot += p * h.eval(i as f64 * step + offset);
                }
            }
        }
    }

    let values: Vec<f64> = acc
        .into_iter()
        .map(|s| psi_raw(s.clamp(0.0, 1.0)))
        .collect();
    let out = GridFunction::new(step, values, h.right_mode)
        .expect("T maps H into H: monotone composition of monotone pieces");
    debug_assert!(out.values.windows(2).all(|w| w[1] >= w[0]));
    out
}

/// `q_n`: `n` exact applications of `T` to the indicator `q₀ = 1_{[0,∞)}`.
pub fn q_n(
    d: &StepDistribution,
    v: f64,
    n: usize,
    cfg: &GridConfig,
) -> Result<GridFunction, FixedPointError> {
    let mut q = GridFunction::indicator(cfg.step, cfg.x_max, cfg.right_mode)?;
    for _ in 0..n {
        q = apply_t(&q, d, v);
    }
    Ok(q)
}

/// Where a survival estimate came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EstimateSource {
    FixedPoint,
    MonteCarlo,
    LowerBound,
    UpperBound,
}

/// A probability estimate with provenance and an error bar.
///
/// The constructor clips `err` so the interval `value ± err` stays inside
/// `[0,1]` (up to 1e-12): a probability interval has nothing outside.
#[derive(Debug, Clone, Serialize)]
pub struct SurvivalEstimate {
    pub value: f64,
    pub source: EstimateSource,
    pub err: f64,
    pub meta: serde_json::Value,
}

impl SurvivalEstimate {
    pub fn new(value: f64, source: EstimateSource, err: f64, meta: serde_json::Value) -> Self {
        let value = value.clamp(0.0, 1.0);
        let err = err.max(0.0).min(value).min(1.0 - value);
        Self {
            value,
            source,
            err,
            meta,
        }
    }
}

/// Result of iterating `T` to its fixed point.
#[derive(Debug, Clone)]
pub struct FixedPointRun {
    pub q: GridFunction,
    pub at_zero: SurvivalEstimate,
    pub at_one: SurvivalEstimate,
    pub iters: usize,
    pub final_delta: f64,
    /// Set when `v ≥ v*` was requested (the true limit is then 0; the run is
    /// allowed but the caller should not read the result as a survival
    /// probability).
    pub flagged_supercritical_v: bool,
}

/// Iterates `q ← T(q)` from `q₀ = 1_{[0,∞)}` until the nodewise sup-change
/// is at most `cfg.tol`.
///
/// Successive iterates are pointwise nonincreasing (monotonicity of `T`
/// applied to `T(q₀) ≤ q₀`); this is asserted each sweep and rounding noise
/// is snapped so the sequence is exactly monotone.
pub fn iterate_to_fixed_point(
    d: &StepDistribution,
    v: f64,
    cfg: &GridConfig,
) -> Result<FixedPointRun, FixedPointError> {
    let flagged = v >= crate::critical::critical_params(d).v_star;
    let mut q = GridFunction::indicator(cfg.step, cfg.x_max, cfg.right_mode)?;
    let mut iters = 0;
    let mut delta = f64::INFINITY;
    while iters < cfg.max_iters {
        let mut next = apply_t(&q, d, v);
        delta = 0.0;
        for (new, old) in next.values.iter_mut().zip(&q.values) {
            debug_assert!(
                *new <= *old + NOISE_TOL,
                "iterates must be nonincreasing in n"
            );
            *new = new.min(*old);
            delta = delta.max(*old - *new);
        }
        q = next;
        iters += 1;
        if delta <= cfg.tol {
            let interp = if lattice_step_matches(d, v, cfg.step) {
                0.0
            } else {
                q.max_jump()
            };
            let err = cfg.tol + interp;
            let meta = serde_json::json!({
                "step": cfg.step,
                "x_max": cfg.x_max,
                "right_mode": format!("{:?}", cfg.right_mode),
                "iters": iters,
                "lattice": interp == 0.0,
                "flagged_supercritical_v": flagged,
            });
            let at_zero =
                SurvivalEstimate::new(q.eval(0.0), EstimateSource::FixedPoint, err, meta.clone());
            let at_one =
                SurvivalEstimate::new(q.eval(1.0), EstimateSource::FixedPoint, err, meta);
            return Ok(FixedPointRun {
                q,
                at_zero,
                at_one,
                iters,
                final_delta: delta,
                flagged_supercritical_v: flagged,
            });
        }
    }
    Err(FixedPointError::MaxIters {
        iters,
        last_delta: delta,
    })
}

fn lattice_step_matches(d: &StepDistribution, v: f64, step: f64) -> bool {
    d.atoms().iter().all(|a| {
        let t = (a.value - v) / step;
        (t - t.round()).abs() <= LATTICE_TOL
    })
}

/// Default truncation span: the front structure lives on `[0, L + Δ]`, and
/// the closed-form wavelength proxy `π√(Λ''/(2 t* ε)) + 1/t*` plus eight
/// support radii buries the boundary influence. Non-subcritical laws (or
/// `v ≥ v*`) just get a few support radii.
pub fn default_x_max(d: &StepDistribution, v: f64) -> f64 {
    let crit = crate::critical::critical_params(d);
    let delta = crate::fronts::support_radius(d, v);
    if let Some((ts, vs, l2)) = crit.tangency() {
        if v < vs {
            let eps = vs - v;
            let l_proxy = std::f64::consts::PI * (l2 / (2.0 * ts * eps)).sqrt() + 1.0 / ts;
            return l_proxy + 8.0 * delta;
        }
    }
    8.0 * delta + 5.0
}
