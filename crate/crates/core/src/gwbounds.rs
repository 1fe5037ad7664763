//! Galton-Watson survival formulas for the non-subcritical regimes.
//!
//! Children displaced by exactly `ζ₊` form a Galton-Watson process with
//! offspring law `Bin(2, P(ζ=ζ₊))`; its extinction equation
//! `(1 - p + p(1-q))² = 1 - q` solves in closed form to
//! `q = (2p - 1)/p²`. The same formula applied to `p_v = P(ζ ≥ v)` (keep
//! every step at or above `v`) gives a rigorous lower bound on the survival
//! probability whenever `p_v > 1/2`.

use crate::critical::{classify, Regime};
use crate::step_dist::StepDistribution;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GwError {
    #[error("law is {0:?}, not supercritical: the max-step process dies out")]
    NotSupercritical(Regime),
    #[error("kept-steps process is subcritical: p_v = {0} ≤ 1/2, the bound degenerates to 0")]
    SubcriticalKept(f64),
}

/// Survival probability interval attached to a regime report.
#[derive(Debug, Clone, Serialize)]
pub struct SurvivalBounds {
    pub lower: f64,
    pub upper: Option<f64>,
}

/// Regime classification plus whatever closed-form survival information the
/// regime admits.
#[derive(Debug, Clone, Serialize)]
pub struct RegimeReport {
    pub regime: Regime,
    /// `P(ζ = ζ₊)`.
    pub p_top: f64,
    /// Kept-steps lower bound at the queried `v`, when one applies.
    pub bounds: Option<SurvivalBounds>,
    /// Survival probability of the max-step Galton-Watson process
    /// (supercritical regime only).
    pub gw_survival: Option<f64>,
}

fn gw_survival_closed_form(p: f64) -> f64 {
    (2.0 * p - 1.0) / (p * p)
}

/// `q = (2p - 1)/p²` with `p = P(ζ = ζ₊)`: the limit of the survival
/// probability as `v ↑ v* = ζ₊` in the supercritical regime.
pub fn supercritical_survival(d: &StepDistribution) -> Result<f64, GwError> {
    let regime = classify(d);
    if regime != Regime::Supercritical {
        return Err(GwError::NotSupercritical(regime));
    }
    Ok(gw_survival_closed_form(d.top_prob()))
}

/// Kept-steps lower bound `q_v = (2p_v - 1)/p_v²` with `p_v = P(ζ ≥ v)`,
/// valid whenever the kept process is supercritical (`p_v > 1/2`).
pub fn kept_steps_lower_bound(d: &StepDistribution, v: f64) -> Result<f64, GwError> {
    let p_v = d.tilted_exceedance(v);
    if p_v <= 0.5 {
        return Err(GwError::SubcriticalKept(p_v));
    }
    Ok(gw_survival_closed_form(p_v))
}

/// Assembles the full report for a law, optionally at a query slope `v`.
pub fn regime_report(d: &StepDistribution, v: Option<f64>) -> RegimeReport {
    let regime = classify(d);
    let gw_survival = supercritical_survival(d).ok();
    let bounds = v.and_then(|v| {
        kept_steps_lower_bound(d, v).ok().map(|lower| SurvivalBounds {
            lower,
            upper: None,
        })
    });
    RegimeReport {
        regime,
        p_top: d.top_prob(),
        bounds,
        gw_survival,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_doubling_always_survives() {
        let d = StepDistribution::from_pairs(&[(1.0, 1.0)]).unwrap();
        assert_eq!(supercritical_survival(&d).unwrap(), 1.0);
    }

    #[test]
    fn three_quarters_gives_eight_ninths() {
        let d = StepDistribution::from_pairs(&[(0.0, 0.25), (1.0, 0.75)]).unwrap();
        let q = supercritical_survival(&d).unwrap();
        assert!((q - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn near_critical_linearization() {
        // q = (2p-1)/p² = 8δ + O(δ²) at p = 1/2 + δ
        let delta = 1e-6;
        let d = StepDistribution::from_pairs(&[(0.0, 0.5 - delta), (1.0, 0.5 + delta)]).unwrap();
        let q = supercritical_survival(&d).unwrap();
        assert!((q - 4.0 * (2.0 * (0.5 + delta) - 1.0)).abs() <= 1e-9);
    }

    #[test]
    fn non_supercritical_is_rejected() {
        let d = StepDistribution::from_pairs(&[(0.0, 0.5), (1.0, 0.5)]).unwrap();
        assert!(matches!(
            supercritical_survival(&d),
            Err(GwError::NotSupercritical(Regime::Critical))
        ));
    }

    #[test]
    fn kept_steps_examples() {
        let d = StepDistribution::from_pairs(&[(0.0, 0.25), (1.0, 0.75)]).unwrap();
        assert_eq!(kept_steps_lower_bound(&d, -5.0).unwrap(), 1.0);
        assert!((kept_steps_lower_bound(&d, 1.0).unwrap() - 8.0 / 9.0).abs() < 1e-15);
        assert!(matches!(
            kept_steps_lower_bound(&d, 1.5),
            Err(GwError::SubcriticalKept(_))
        ));
    }

    #[test]
    fn survival_increases_with_top_mass() {
        let mut prev = 0.0;
        for i in 1..=40 {
            let p = 0.5 + 0.5 * i as f64 / 40.0;
            let q = gw_survival_closed_form(p);
            assert!(q > prev, "q must increase in p");
            assert!((0.0..=1.0).contains(&q));
            prev = q;
        }
        assert_eq!(gw_survival_closed_form(1.0), 1.0);
    }

    #[test]
    fn report_shapes() {
        let sup = StepDistribution::from_pairs(&[(0.0, 0.25), (1.0, 0.75)]).unwrap();
        let r = regime_report(&sup, Some(1.0));
        assert_eq!(r.regime, Regime::Supercritical);
        assert!(r.gw_survival.is_some());
        assert!(r.bounds.is_some());
        let subc = StepDistribution::from_pairs(&[(0.0, 0.6), (1.0, 0.4)]).unwrap();
        let r = regime_report(&subc, Some(0.9));
        assert_eq!(r.regime, Regime::Subcritical);
        assert!(r.gw_survival.is_none());
        assert!(r.bounds.is_none(), "p_v = 0.4 admits no bound");
        let r = regime_report(&subc, Some(0.0));
        assert_eq!(r.bounds.unwrap().lower, 1.0);
    }
}
