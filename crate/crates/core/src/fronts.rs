//! Super- and sub-solution front profiles.
//!
//! The damped sinusoid `d(x) = e^{αx} sin(βx)` from the linearized equation
//! is scaled and truncated into two members of `H`:
//!
//! * the super-solution `c₊` (built with `a = -log 2`): zero left of 0,
//!   `A·d(x+Δ)` on `[0, C]` with `C = L - 2Δ`, and 1 beyond, where `A` makes
//!   `c₊(C) = 1`; it satisfies `T(c₊) ≤ c₊` and so dominates `q∞`;
//! * the sub-solution `c₋` (built with `a = -log 2 + ε²`): zero left of 0,
//!   `A·d(x)` on `[0, L]`, and the plateau `h(ε) = γ(2-γ)` beyond, with
//!   `γ = e^{-a}` and `A` making `c₋(L) = h`; it satisfies `T(c₋) ≥ c₋` and
//!   is dominated by `q∞`.
//!
//! Both inequalities are checked numerically on the rendered grids; the
//! verdict threshold is the interpolation scale of the rendering, so a FAIL
//! is a real violation and not grid noise.

use crate::critical::CriticalParams;
use crate::fixedpoint::{apply_t, GridFunction, RightMode};
use crate::linwave::{d_profile, LinearWave, LinwaveError};
use crate::step_dist::StepDistribution;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FrontsError {
    #[error("front construction needs a subcritical law")]
    NotSubcritical,
    #[error("eps too large: oscillation span L = {wavelength:.4} leaves no room (needs > {needed:.4})")]
    EpsTooLarge { wavelength: f64, needed: f64 },
    #[error("property ({property}) of the {kind:?} profile fails at eps = {eps}: ε is not small enough")]
    PropertyViolation {
        kind: FrontKind,
        property: &'static str,
        eps: f64,
    },
    #[error(transparent)]
    Linwave(#[from] LinwaveError),
    #[error(transparent)]
    Grid(#[from] crate::fixedpoint::FixedPointError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FrontKind {
    Super,
    Sub,
}

/// Step and span of the grid a profile is rendered on.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub step: f64,
    pub x_max: f64,
}

impl GridSpec {
    /// Default rendering grid at `v = v* - ε`: lattice step when the offsets
    /// admit one (refined below `max_step`), else `L/2000`; span `L + 8Δ`
    /// with `L` the larger of the super- and sub-solution wavelengths.
    pub fn default_for(
        crit: &CriticalParams,
        d: &StepDistribution,
        eps: f64,
        max_step: f64,
    ) -> Result<Self, FrontsError> {
        let v = crit.v_star - eps;
        let a_super = -std::f64::consts::LN_2;
        let l_super = LinearWave::solve(crit, d, eps, a_super)?.wavelength;
        let l_sub = LinearWave::solve(crit, d, eps, a_super + eps * eps)?.wavelength;
        let l = l_super.max(l_sub);
        let delta = support_radius(d, v);
        let step = match crate::fixedpoint::lattice_step(d, v, 100_000) {
            Some(mut s) => {
                while s > max_step {
                    s *= 0.5;
                }
                s
            }
            None => l / 2000.0,
        };
        Ok(Self {
            step,
            x_max: l + 8.0 * delta,
        })
    }
}

/// A rendered front profile together with its construction parameters.
#[derive(Debug, Clone)]
pub struct FrontProfile {
    pub kind: FrontKind,
    pub wave: LinearWave,
    /// Killing slope `v = v* - ε` the profile was built for.
    pub v: f64,
    /// Amplitude `A(ε)` from the defining condition.
    pub amplitude: f64,
    /// Support radius `Δ` with `P(|ζ - v| ≤ Δ) = 1`, taken tight.
    pub delta: f64,
    /// End of the oscillatory branch: `C(ε) = L - 2Δ` (super) or `L` (sub).
    pub cutoff: f64,
    /// Constant value beyond the cutoff: 1 (super) or `h(ε)` (sub).
    pub plateau: f64,
    /// `γ(ε) = e^{-a(ε)}` (sub-solutions only).
    pub gamma_eps: Option<f64>,
    pub grid: GridFunction,
    /// Verdict threshold `τ_grid` of the authentic rendering, frozen at
    /// build time so later mutations of `grid` cannot loosen the check.
    pub tau: f64,
}

/// Tight support radius: `Δ = max(|ζ₋ - v|, |ζ₊ - v|)`. Any larger constant
/// is admissible but shrinks the workable ε-range through `L > 2Δ`.
pub fn support_radius(d: &StepDistribution, v: f64) -> f64 {
    (d.min_value() - v).abs().max((d.max_value() - v).abs())
}

/// Verdict threshold for grid-level inequality checks: ten interpolation
/// scales of the rendered profile (step × max slope).
pub fn tau_grid(g: &GridFunction) -> f64 {
    10.0 * g.max_jump()
}

/// Builds the super-solution `c₊` at `v = v* - ε` and verifies its defining
/// properties on the way.
pub fn build_super(
    crit: &CriticalParams,
    d: &StepDistribution,
    eps: f64,
    spec: &GridSpec,
) -> Result<FrontProfile, FrontsError> {
    let wave = LinearWave::solve(crit, d, eps, -std::f64::consts::LN_2)?;
    let v = crit.v_star - eps;
    let delta = support_radius(d, v);
    let cutoff = wave.wavelength - 2.0 * delta;
    if cutoff <= spec.step {
        return Err(FrontsError::EpsTooLarge {
            wavelength: wave.wavelength,
            needed: 2.0 * delta + spec.step,
        });
    }
    // A(ε) e^{α(L-Δ)} sin(β(L-Δ)) = 1
    let l_minus_delta = wave.wavelength - delta;
    let denom = (wave.alpha * l_minus_delta).exp() * (wave.beta * l_minus_delta).sin();
    if denom <= 0.0 {
        return Err(FrontsError::EpsTooLarge {
            wavelength: wave.wavelength,
            needed: 2.0 * delta + spec.step,
        });
    }
    let amplitude = 1.0 / denom;

    let osc = |x: f64| amplitude * d_profile(wave.alpha, wave.beta, x + delta);
    verify_properties(FrontKind::Super, eps, delta, cutoff, 1.0, &osc)?;

    let profile = |x: f64| {
        if x <= cutoff {
            osc(x).clamp(0.0, 1.0)
        } else {
            1.0
        }
    };
    // beyond x_max the true profile is constant 1, so ClampOne extends exactly
    let grid = GridFunction::from_fn(spec.step, spec.x_max, RightMode::ClampOne, profile)?;
    let tau = tau_grid(&grid);
    debug_assert!((grid.eval(cutoff) - 1.0).abs() <= tau + 1e-9);
    Ok(FrontProfile {
        kind: FrontKind::Super,
        wave,
        v,
        amplitude,
        delta,
        cutoff,
        plateau: 1.0,
        gamma_eps: None,
        grid,
        tau,
    })
}

/// Builds the sub-solution `c₋` at `v = v* - ε` with `a(ε) = -log 2 + ε²`.
pub fn build_sub(
    crit: &CriticalParams,
    d: &StepDistribution,
    eps: f64,
    spec: &GridSpec,
) -> Result<FrontProfile, FrontsError> {
    let a_eps = -std::f64::consts::LN_2 + eps * eps;
    let wave = LinearWave::solve(crit, d, eps, a_eps)?;
    let v = crit.v_star - eps;
    let delta = support_radius(d, v);
    let cutoff = wave.wavelength;
    if cutoff - 2.0 * delta <= spec.step {
        return Err(FrontsError::EpsTooLarge {
            wavelength: wave.wavelength,
            needed: 2.0 * delta + spec.step,
        });
    }
    let gamma = (-a_eps).exp();
    let h = gamma * (2.0 - gamma);
    // c(L) = h(ε)
    let denom = (wave.alpha * cutoff).exp() * (wave.beta * cutoff).sin();
    if denom <= 0.0 {
        return Err(FrontsError::EpsTooLarge {
            wavelength: wave.wavelength,
            needed: 2.0 * delta + spec.step,
        });
    }
    let amplitude = h / denom;

    let osc = |x: f64| amplitude * d_profile(wave.alpha, wave.beta, x);
    verify_properties(FrontKind::Sub, eps, delta, cutoff, h, &osc)?;

    let profile = |x: f64| if x <= cutoff { osc(x).clamp(0.0, h) } else { h };
    // beyond x_max the true profile is the constant h = last node, so
    // ClampLast extends exactly
    let grid = GridFunction::from_fn(spec.step, spec.x_max, RightMode::ClampLast, profile)?;
    let tau = tau_grid(&grid);
    debug_assert!((grid.eval(cutoff) - h).abs() <= tau + 1e-9);
    Ok(FrontProfile {
        kind: FrontKind::Sub,
        wave,
        v,
        amplitude,
        delta,
        cutoff,
        plateau: h,
        gamma_eps: Some(gamma),
        grid,
        tau,
    })
}

/// Sampled verification of the four defining properties:
/// (i) sign of the oscillatory branch on `[-Δ, 0]`,
/// (ii) range on `[0, cutoff]`,
/// (iii) plateau-side bound on `[cutoff, cutoff + Δ]`,
/// (iv) monotone rise on `[0, cutoff]`.
fn verify_properties(
    kind: FrontKind,
    eps: f64,
    delta: f64,
    cutoff: f64,
    cap: f64,
    osc: &dyn Fn(f64) -> f64,
) -> Result<(), FrontsError> {
    let fail = |property: &'static str| FrontsError::PropertyViolation {
        kind,
        property,
        eps,
    };
    let samples = |a: f64, b: f64, n: usize| (0..=n).map(move |i| a + (b - a) * i as f64 / n as f64);

    for x in samples(-delta, 0.0, 200) {
        let u = osc(x);
        match kind {
            FrontKind::Super if u < -1e-12 => return Err(fail("i")),
            FrontKind::Sub if u > 1e-12 => return Err(fail("i")),
            _ => {}
        }
    }
    let mut prev = f64::NEG_INFINITY;
    for x in samples(0.0, cutoff, 500) {
        let u = osc(x);
        if u < -1e-12 || u > cap * (1.0 + 1e-9) + 1e-12 {
            return Err(fail("ii"));
        }
        if u < prev - 1e-12 {
            return Err(fail("iv"));
        }
        prev = u;
    }
    for x in samples(cutoff, cutoff + delta, 200) {
        let u = osc(x);
        match kind {
            FrontKind::Super if u < cap * (1.0 - 1e-9) => return Err(fail("iii")),
            FrontKind::Sub if u > cap * (1.0 + 1e-9) + 1e-12 => return Err(fail("iii")),
            _ => {}
        }
    }
    Ok(())
}

/// Outcome of a grid-level inequality check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub pass: bool,
    /// Worst signed violation over the grid (negative = satisfied with
    /// margin).
    pub max_violation: f64,
    pub tolerance: f64,
}

/// Checks `T(c₊) ≤ c₊` nodewise (the super-solution inequality). The
/// operator is the exact atom-sum engine from the fixed-point module.
pub fn check_super_inequality(p: &FrontProfile, d: &StepDistribution) -> CheckReport {
    assert_eq!(p.kind, FrontKind::Super, "super check needs a super profile");
    let t_of_p = apply_t(&p.grid, d, p.v);
    let max_violation = t_of_p
        .values()
        .iter()
        .zip(p.grid.values())
        .map(|(t, c)| t - c)
        .fold(f64::NEG_INFINITY, f64::max);
    let tolerance = p.tau;
    CheckReport {
        pass: max_violation <= tolerance,
        max_violation,
        tolerance,
    }
}

/// Checks `c₋ ≤ T(c₋)` nodewise (the sub-solution inequality).
pub fn check_sub_inequality(p: &FrontProfile, d: &StepDistribution) -> CheckReport {
    assert_eq!(p.kind, FrontKind::Sub, "sub check needs a sub profile");
    let t_of_p = apply_t(&p.grid, d, p.v);
    let max_violation = p
        .grid
        .values()
        .iter()
        .zip(t_of_p.values())
        .map(|(c, t)| c - t)
        .fold(f64::NEG_INFINITY, f64::max);
    let tolerance = p.tau;
    CheckReport {
        pass: max_violation <= tolerance,
        max_violation,
        tolerance,
    }
}
