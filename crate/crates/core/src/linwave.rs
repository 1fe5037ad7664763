//! Exponential solutions of the linearized convolution equation.
//!
//! For `v = v* - ε` and a constant `a` near `-log 2`, the map `x ↦ e^{φx}`
//! solves `c(x) = e^{-a} E(c(x + ζ - v))` exactly when
//! `E(e^{φ(ζ-v)}) = e^{a}`. The root `φ(ε)` of interest is the conjugate
//! pair member with positive imaginary part, which detaches from `t*` like
//! `t* + i√(2t*ε/Λ''(t*))`. Its real and imaginary parts give the damped
//! sinusoid `d(x) = e^{αx} sin(βx)` whose first positive arch carries the
//! front profiles.

use crate::critical::CriticalParams;
use crate::step_dist::{StepDistError, StepDistribution};
use num_complex::Complex64;
use thiserror::Error;

/// Convergence target on `|Λ(t) - t v - a|` for the Newton iteration.
const NEWTON_TOL: f64 = 1e-13;

/// Required accuracy of the defining identity `E e^{φ(ζ-v)} = e^{a}`.
const IDENTITY_TOL: f64 = 1e-10;

const MAX_NEWTON_ITERS: usize = 100;

#[derive(Debug, Error)]
pub enum LinwaveError {
    #[error("linear-wave analysis needs a subcritical law with a finite t*")]
    NotSubcritical,
    #[error("eps must be positive and finite, got {0}")]
    BadEps(f64),
    #[error("a_eps = {0} is too far from -log 2 for the perturbative root")]
    BadAEps(f64),
    #[error("Newton did not converge after {iters} iterations (|F| = {residual:.3e} at eps = {eps})")]
    NoConvergence {
        iters: usize,
        residual: f64,
        eps: f64,
    },
    #[error("root φ = {phi} is not oscillatory (needs α > 0 and β > 0)")]
    RootNotOscillatory { phi: Complex64 },
    #[error(transparent)]
    ZeroLaplace(#[from] StepDistError),
}

/// The exponent `φ(ε)` and derived oscillation parameters.
#[derive(Debug, Clone)]
pub struct LinearWave {
    pub eps: f64,
    pub a_eps: f64,
    pub phi: Complex64,
    /// `Re φ`
    pub alpha: f64,
    /// `Im φ`
    pub beta: f64,
    /// Location of the maximum of `d` on its first positive arch.
    pub wavelength: f64,
    /// `|E e^{φ(ζ-v)} - e^{a}|` at the accepted root.
    pub identity_residual: f64,
}

impl LinearWave {
    /// Solves for `φ(ε)` and packages `α`, `β`, `L(ε)`, validating that the
    /// root is oscillatory and the defining identity holds to 1e-10.
    pub fn solve(
        crit: &CriticalParams,
        d: &StepDistribution,
        eps: f64,
        a_eps: f64,
    ) -> Result<Self, LinwaveError> {
        let phi = solve_phi(crit, d, eps, a_eps)?;
        let (alpha, beta) = (phi.re, phi.im);
        if alpha <= 0.0 || beta <= 0.0 {
            return Err(LinwaveError::RootNotOscillatory { phi });
        }
        let v = crit.v_star - eps;
        let identity_residual = identity_residual(d, v, a_eps, phi);
        if identity_residual > IDENTITY_TOL {
            return Err(LinwaveError::NoConvergence {
                iters: MAX_NEWTON_ITERS,
                residual: identity_residual,
                eps,
            });
        }
        Ok(Self {
            eps,
            a_eps,
            phi,
            alpha,
            beta,
            wavelength: wavelength(alpha, beta),
            identity_residual,
        })
    }
}

/// `|E e^{φ(ζ-v)} - e^{a}|`, the residual of the non-log identity.
pub fn identity_residual(d: &StepDistribution, v: f64, a: f64, phi: Complex64) -> f64 {
    let mean: Complex64 = d
        .atoms()
        .iter()
        .map(|at| at.prob * (phi * (at.value - v)).exp())
        .sum();
    (mean - a.exp()).norm()
}

/// Seed from the square-root expansion of the root around `t*`.
fn asymptotic_seed(t_star: f64, lambda2: f64, eps: f64) -> Complex64 {
    Complex64::new(t_star, (2.0 * t_star * eps / lambda2).sqrt())
}

/// Root of `F(t) = Λ(t) - t(v*-ε) - a_eps`, returned with `Im φ > 0` (the
/// conjugate root is implied since `Λ` has real coefficients).
///
/// Damped Newton from the asymptotic seed; when `ε` is large enough that the
/// seed leaves the root's basin (the expansion degrades like `√ε`), the
/// solve is restarted by continuation: the root is tracked from `ε/16`
/// upward, each stage seeding the next.
pub fn solve_phi(
    crit: &CriticalParams,
    d: &StepDistribution,
    eps: f64,
    a_eps: f64,
) -> Result<Complex64, LinwaveError> {
    let (t_star, v_star, lambda2) = crit.tangency().ok_or(LinwaveError::NotSubcritical)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(LinwaveError::BadEps(eps));
    }
    if (a_eps - (-std::f64::consts::LN_2)).abs() > 0.5 {
        return Err(LinwaveError::BadAEps(a_eps));
    }

    let attempt = |e: f64, seed: Complex64| -> Result<Complex64, LinwaveError> {
        newton(d, v_star - e, a_eps, seed, e)
    };
    let normalize = |t: Complex64| if t.im < 0.0 { t.conj() } else { t };

    let direct = attempt(eps, asymptotic_seed(t_star, lambda2, eps)).map(normalize);
    if let Ok(root) = direct {
        if root.re > 0.0 && root.im > 0.0 {
            return Ok(root);
        }
    }

    let mut seed = asymptotic_seed(t_star, lambda2, eps / 16.0);
    for k in [16.0, 8.0, 4.0, 2.0, 1.0] {
        let e = eps / k;
        seed = attempt(e, seed)?;
    }
    let root = normalize(seed);
    if root.re > 0.0 && root.im > 0.0 {
        Ok(root)
    } else {
        Err(LinwaveError::RootNotOscillatory { phi: root })
    }
}

fn newton(
    d: &StepDistribution,
    v: f64,
    a: f64,
    seed: Complex64,
    eps: f64,
) -> Result<Complex64, LinwaveError> {
    let f = |t: Complex64| -> Result<Complex64, LinwaveError> {
        Ok(d.log_laplace_complex(t)? - t * v - a)
    };
    let mut t = seed;
    let mut ft = f(t)?;
    for _ in 0..MAX_NEWTON_ITERS {
        if ft.norm() <= NEWTON_TOL {
            return Ok(t);
        }
        let dft = d.log_laplace_d1_complex(t)? - v;
        if dft.norm() < 1e-14 {
            break;
        }
        let full = ft / dft;
        // halve the step while the residual refuses to decrease
        let mut damping = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand = t - damping * full;
            if let Ok(fc) = f(cand) {
                if fc.norm() < ft.norm() {
                    accepted = Some((cand, fc));
                    break;
                }
            }
            damping *= 0.5;
        }
        match accepted {
            Some((cand, fc)) => {
                t = cand;
                ft = fc;
            }
            None => break,
        }
    }
    if ft.norm() <= NEWTON_TOL {
        Ok(t)
    } else {
        Err(LinwaveError::NoConvergence {
            iters: MAX_NEWTON_ITERS,
            residual: ft.norm(),
            eps,
        })
    }
}

/// `L = (π - atan(β/α)) / β`: the unique maximum of `d` on `[0, π/β]`,
/// satisfying `tan(βL) = -β/α` with `βL ∈ (π/2, π)`.
pub fn wavelength(alpha: f64, beta: f64) -> f64 {
    (std::f64::consts::PI - (beta / alpha).atan()) / beta
}

/// `d(x) = e^{αx} sin(βx)`.
pub fn d_profile(alpha: f64, beta: f64, x: f64) -> f64 {
    (alpha * x).exp() * (beta * x).sin()
}

/// Largest `ε` (per distribution) accepted by the downstream front
/// construction: Newton converges, the root is oscillatory, and
/// `L(ε) > 2Δ + 1`. Found by geometric scan from `hi` downward, then
/// bisection refinement between the last rejected and first accepted `ε`.
pub fn eps_max(crit: &CriticalParams, d: &StepDistribution, delta_hint: f64) -> f64 {
    let admissible = |e: f64| -> bool {
        match LinearWave::solve(crit, d, e, -std::f64::consts::LN_2) {
            Ok(w) => w.wavelength > 2.0 * delta_hint + 1.0,
            Err(_) => false,
        }
    };
    let mut hi = 0.5;
    let mut lo = hi;
    for _ in 0..60 {
        if admissible(lo) {
            break;
        }
        hi = lo;
        lo *= 0.5;
    }
    if !admissible(lo) {
        return 0.0;
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if admissible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}
