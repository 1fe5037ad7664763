//! Critical pair `(t*, v*)` and regime classification.
//!
//! The tangency equation `Λ(t*) - t*Λ'(t*) = -log 2` has a solution iff the
//! top-atom mass `P(ζ = ζ₊)` is below 1/2 (the max-step branching process is
//! subcritical); then `v* = Λ'(t*)` is the maximal survivable slope. Above
//! that mass no finite `t*` exists and `v* = ζ₊`. The same `v*` is recovered
//! independently as `inf_{t>0} θ(t)/t` with `θ(t) = log(2 E e^{tζ})`.

use crate::step_dist::StepDistribution;
use serde::Serialize;
use thiserror::Error;

/// Tolerance on `|P(ζ=ζ₊) - 1/2|` for calling a law exactly critical.
/// Atom probabilities are user inputs; 1/2 is representable exactly.
const CRITICAL_TOL: f64 = 1e-12;

/// Target residual for the tangency equation.
const RESIDUAL_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CriticalError {
    #[error("no finite t* exists: regime is {0:?}")]
    NotSubcritical(Regime),
    #[error("degenerate point mass: Λ'' ≡ 0, tangency equation has no root")]
    DegenerateStep,
}

/// Regime of the max-step branching process (offspring Bin(2, P(ζ=ζ₊))).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

/// Critical parameters of a step law.
///
/// In the subcritical regime `t_star`, `lambda2_star` and `residual` are
/// present and `v_star = Λ'(t*)`; otherwise they are absent and `v_star = ζ₊`.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalParams {
    pub regime: Regime,
    pub v_star: f64,
    pub t_star: Option<f64>,
    pub lambda2_star: Option<f64>,
    /// `Λ(t*) - t*Λ'(t*) + log 2` at the returned `t*`.
    pub residual: Option<f64>,
}

impl CriticalParams {
    /// The triple `(t*, v*, Λ''(t*))` when subcritical.
    pub fn tangency(&self) -> Option<(f64, f64, f64)> {
        match (self.t_star, self.lambda2_star) {
            (Some(t), Some(l2)) => Some((t, self.v_star, l2)),
            _ => None,
        }
    }
}

/// Classifies by the top-atom mass: `< 1/2` subcritical, `= 1/2` critical
/// (within 1e-12), `> 1/2` supercritical.
pub fn classify(d: &StepDistribution) -> Regime {
    let p = d.top_prob();
    if (p - 0.5).abs() <= CRITICAL_TOL {
        Regime::Critical
    } else if p < 0.5 {
        Regime::Subcritical
    } else {
        Regime::Supercritical
    }
}

/// `θ(t) = log(2 E e^{tζ}) = log 2 + Λ(t)`.
pub fn theta(d: &StepDistribution, t: f64) -> f64 {
    std::f64::consts::LN_2 + d.log_laplace(t)
}

/// Solves the tangency equation for `t*` and fills `v* = Λ'(t*)`,
/// `Λ''(t*)`.
///
/// `f(t) = Λ(t) - tΛ'(t) + log 2` starts at `f(0) = log 2 > 0`, is
/// nonincreasing (`f'(t) = -tΛ''(t)`), and tends to `log(2 P(ζ=ζ₊)) < 0`
/// exactly when the law is subcritical, so a doubling bracket plus
/// bisection always lands; a Newton polish then drives the residual to
/// 1e-12.
pub fn solve_t_star(d: &StepDistribution) -> Result<CriticalParams, CriticalError> {
    if d.atoms().len() == 1 {
        return Err(CriticalError::DegenerateStep);
    }
    let regime = classify(d);
    if regime != Regime::Subcritical {
        return Err(CriticalError::NotSubcritical(regime));
    }

    let f = |t: f64| d.log_laplace(t) - t * d.log_laplace_d1(t) + std::f64::consts::LN_2;

    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        assert!(hi < 1e12, "bracket search ran away on a subcritical law");
    }
    // bisect to ~1e-6 in t, then Newton with f'(t) = -tΛ''(t)
    for _ in 0..60 {
        if hi - lo <= 1e-6 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..100 {
        let ft = f(t);
        if ft.abs() <= RESIDUAL_TOL {
            break;
        }
        let dft = -t * d.log_laplace_d2(t);
        let next = t - ft / dft;
        if dft == 0.0 || !next.is_finite() || next <= lo || next >= hi {
            // fall back to a bisection step inside the bracket
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            t = 0.5 * (lo + hi);
        } else {
            t = next;
        }
    }

    let residual = f(t);
    Ok(CriticalParams {
        regime,
        v_star: d.log_laplace_d1(t),
        t_star: Some(t),
        lambda2_star: Some(d.log_laplace_d2(t)),
        residual: Some(residual),
    })
}

/// Critical parameters in any regime: subcritical laws get the tangency
/// solution, the others get `v* = ζ₊` with no `t*`.
pub fn critical_params(d: &StepDistribution) -> CriticalParams {
    match solve_t_star(d) {
        Ok(p) => p,
        Err(_) => CriticalParams {
            regime: classify(d),
            v_star: d.max_value(),
            t_star: None,
            lambda2_star: None,
            residual: None,
        },
    }
}

/// `v* = inf{θ(t)/t : t > 0}` by log-grid scan plus golden-section
/// refinement.
///
/// Agrees with `solve_t_star`'s `v*` in the subcritical regime (the infimum
/// is attained at `t*`) and approaches `ζ₊` otherwise (the infimum sits at
/// `t → ∞`; the grid extends to 1e7 so the `log/t` tail is below 1e-6).
pub fn v_star_infimum(d: &StepDistribution) -> f64 {
    let g = |t: f64| theta(d, t) / t;
    let (t_lo, t_hi, points) = (1e-6f64, 1e7f64, 600usize);
    let ratio = (t_hi / t_lo).powf(1.0 / (points as f64 - 1.0));

    let mut best_i = 0;
    let mut best = f64::INFINITY;
    let mut t = t_lo;
    let mut grid = Vec::with_capacity(points);
    for i in 0..points {
        let gi = g(t);
        grid.push(t);
        if gi < best {
            best = gi;
            best_i = i;
        }
        t *= ratio;
    }

    // golden-section on the bracketing neighbors (collapses to the edge when
    // the minimum is at the boundary of the grid)
    let mut a = grid[best_i.saturating_sub(1)];
    let mut b = grid[(best_i + 1).min(points - 1)];
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut g1 = g(x1);
    let mut g2 = g(x2);
    for _ in 0..200 {
        if (b - a).abs() <= 1e-12 * b.abs().max(1.0) {
            break;
        }
        if g1 <= g2 {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - INV_PHI * (b - a);
            g1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + INV_PHI * (b - a);
            g2 = g(x2);
        }
    }
    best.min(g1).min(g2)
}
