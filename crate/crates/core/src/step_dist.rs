//! Bounded discrete step distributions and their log-Laplace transform.
//!
//! A [`StepDistribution`] is a finite list of atoms `(value, prob)`. Finite
//! support means the log-Laplace transform `Λ(t) = log E(exp(t ζ))` is an
//! exact finite sum, entire in `t`, with closed-form derivatives: `Λ'(t)` is
//! the mean and `Λ''(t)` the variance of the exponentially tilted law. All
//! real-argument sums are shifted by the largest exponent so that arbitrarily
//! large `|t|` stays overflow-safe.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute magnitudes below this count as a vanishing Laplace transform.
const ZERO_LAPLACE_FLOOR: f64 = 1e-300;

/// Relative cancellation guard on the max-shifted sum. Exact zeros of
/// `E e^{tζ}` never land at 0.0 in floating point (e.g. `e^{iπ}` carries a
/// ~1e-16 imaginary residue), so a sum this far below its term scale is a
/// cancelled transform, not a value.
const CANCELLATION_FLOOR: f64 = 1e-14;

#[derive(Debug, Error)]
pub enum StepDistError {
    #[error("distribution must have at least one atom")]
    Empty,
    #[error("atom {index} has invalid probability {prob} (must be finite and > 0)")]
    BadProb { index: usize, prob: f64 },
    #[error("atom {index} has non-finite value {value}")]
    BadValue { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, expected 1 within 1e-12")]
    NotNormalized { sum: f64 },
    #[error("Laplace transform vanishes at t = {t}")]
    ZeroLaplace { t: Complex64 },
    #[error("malformed distribution spec: {0}")]
    BadSpec(#[from] serde_json::Error),
}

/// One atom of a discrete step law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub value: f64,
    pub prob: f64,
}

/// Finite-support probability law of the step `ζ`.
///
/// Atoms are sorted ascending by value and deduplicated (probabilities of
/// equal values are merged) at construction, so `min_value()`/`max_value()`
/// are the essential bounds of the support and `top_prob()` is `P(ζ = ζ₊)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDistribution {
    atoms: Vec<Atom>,
}

#[derive(Serialize, Deserialize)]
struct DistSpec {
    atoms: Vec<Atom>,
}

impl StepDistribution {
    /// Builds a distribution from atoms whose probabilities already sum to 1
    /// within `1e-12`.
    pub fn new(atoms: Vec<Atom>) -> Result<Self, StepDistError> {
        let d = Self::canonicalize(atoms)?;
        let sum: f64 = d.atoms.iter().map(|a| a.prob).sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(StepDistError::NotNormalized { sum });
        }
        Ok(d)
    }

    /// Convenience constructor from `(value, prob)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self, StepDistError> {
        Self::new(
            pairs
                .iter()
                .map(|&(value, prob)| Atom { value, prob })
                .collect(),
        )
    }

    /// Builds a distribution from possibly unnormalized atoms, rescaling the
    /// probabilities to sum to 1. Returns the distribution together with the
    /// absolute deviation `|sum - 1|` found before rescaling, so callers can
    /// warn when the input was off by more than they tolerate.
    pub fn renormalized(atoms: Vec<Atom>) -> Result<(Self, f64), StepDistError> {
        let mut d = Self::canonicalize(atoms)?;
        let sum: f64 = d.atoms.iter().map(|a| a.prob).sum();
        if !sum.is_finite() || sum <= 0.0 {
            return Err(StepDistError::NotNormalized { sum });
        }
        for a in &mut d.atoms {
            a.prob /= sum;
        }
        Ok((d, (sum - 1.0).abs()))
    }

    /// Parses the JSON spec format `{"atoms": [{"value": v, "prob": p}, ...]}`.
    ///
    /// Probabilities may be unnormalized; they are rescaled on load. The
    /// returned deviation is `|sum - 1|` before rescaling (callers warn above
    /// 1e-9).
    pub fn from_spec_json(text: &str) -> Result<(Self, f64), StepDistError> {
        let spec: DistSpec = serde_json::from_str(text)?;
        Self::renormalized(spec.atoms)
    }

    /// Serializes to the JSON spec format.
    pub fn to_spec_json(&self) -> String {
        serde_json::to_string_pretty(&DistSpec {
            atoms: self.atoms.clone(),
        })
        .expect("atom list serializes")
    }

    fn canonicalize(atoms: Vec<Atom>) -> Result<Self, StepDistError> {
        if atoms.is_empty() {
            return Err(StepDistError::Empty);
        }
        for (index, a) in atoms.iter().enumerate() {
            if !a.value.is_finite() {
                return Err(StepDistError::BadValue {
                    index,
                    value: a.value,
                });
            }
            if !a.prob.is_finite() || a.prob <= 0.0 {
                return Err(StepDistError::BadProb {
                    index,
                    prob: a.prob,
                });
            }
        }
        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.value.total_cmp(&b.value));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.value == a.value => last.prob += a.prob,
                _ => merged.push(a),
            }
        }
        Ok(Self { atoms: merged })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// Essential infimum `ζ₋` of the support.
    pub fn min_value(&self) -> f64 {
        self.atoms[0].value
    }

    /// Essential supremum `ζ₊` of the support.
    pub fn max_value(&self) -> f64 {
        self.atoms[self.atoms.len() - 1].value
    }

    /// `P(ζ = ζ₊)`, the mass of the top atom.
    pub fn top_prob(&self) -> f64 {
        self.atoms[self.atoms.len() - 1].prob
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.prob * a.value).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.atoms
            .iter()
            .map(|a| a.prob * (a.value - m) * (a.value - m))
            .sum()
    }

    /// `Λ(t) = log Σᵢ pᵢ e^{t vᵢ}`, computed with a max-shift so the sum
    /// cannot overflow for any real `t`.
    pub fn log_laplace(&self, t: f64) -> f64 {
        let shift = self
            .atoms
            .iter()
            .map(|a| t * a.value)
            .fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = self
            .atoms
            .iter()
            .map(|a| a.prob * (t * a.value - shift).exp())
            .sum();
        shift + sum.ln()
    }

    /// `Λ'(t) = E(ζ e^{tζ}) / E(e^{tζ})`, the mean of the `t`-tilted law.
    pub fn log_laplace_d1(&self, t: f64) -> f64 {
        let (w, total) = self.tilted_weights(t);
        w.iter()
            .zip(&self.atoms)
            .map(|(wi, a)| wi * a.value)
            .sum::<f64>()
            / total
    }

    /// `Λ''(t)`, the variance of the `t`-tilted law.
    pub fn log_laplace_d2(&self, t: f64) -> f64 {
        let (w, total) = self.tilted_weights(t);
        let mean = w
            .iter()
            .zip(&self.atoms)
            .map(|(wi, a)| wi * a.value)
            .sum::<f64>()
            / total;
        w.iter()
            .zip(&self.atoms)
            .map(|(wi, a)| wi * (a.value - mean) * (a.value - mean))
            .sum::<f64>()
            / total
    }

    fn tilted_weights(&self, t: f64) -> (Vec<f64>, f64) {
        let shift = self
            .atoms
            .iter()
            .map(|a| t * a.value)
            .fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = self
            .atoms
            .iter()
            .map(|a| a.prob * (t * a.value - shift).exp())
            .collect();
        let total = w.iter().sum();
        (w, total)
    }

    /// `Λ(t)` for complex `t`, using the principal branch of the logarithm.
    ///
    /// Root searches start near `t*` where `E e^{tζ}` is near `1/2` (positive
    /// real axis), so no branch tracking is done; a vanishing transform is
    /// reported as [`StepDistError::ZeroLaplace`].
    pub fn log_laplace_complex(&self, t: Complex64) -> Result<Complex64, StepDistError> {
        let (sum, shift) = self.laplace_complex_shifted(t);
        if sum.norm() < CANCELLATION_FLOOR || shift + sum.norm().ln() < ZERO_LAPLACE_FLOOR.ln() {
            return Err(StepDistError::ZeroLaplace { t });
        }
        Ok(sum.ln() + shift)
    }

    /// `Λ'(t)` for complex `t` (ratio of exact atom sums; branch-free).
    pub fn log_laplace_d1_complex(&self, t: Complex64) -> Result<Complex64, StepDistError> {
        let (sum, shift) = self.laplace_complex_shifted(t);
        if sum.norm() < CANCELLATION_FLOOR || shift + sum.norm().ln() < ZERO_LAPLACE_FLOOR.ln() {
            return Err(StepDistError::ZeroLaplace { t });
        }
        let d1: Complex64 = self
            .atoms
            .iter()
            .map(|a| a.prob * a.value * (t * a.value - shift).exp())
            .sum();
        Ok(d1 / sum)
    }

    /// Shifted transform: returns `(Σ pᵢ e^{t vᵢ - shift}, shift)` with
    /// `shift = maxᵢ Re(t vᵢ)`.
    fn laplace_complex_shifted(&self, t: Complex64) -> (Complex64, f64) {
        let shift = self
            .atoms
            .iter()
            .map(|a| t.re * a.value)
            .fold(f64::NEG_INFINITY, f64::max);
        let sum = self
            .atoms
            .iter()
            .map(|a| a.prob * (t * a.value - shift).exp())
            .sum();
        (sum, shift)
    }

    /// `p_v = P(ζ ≥ v)`, the mass of atoms at or above `v`.
    pub fn tilted_exceedance(&self, v: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.value >= v)
            .map(|a| a.prob)
            .sum()
    }

    /// Cumulative probabilities in atom order, for inverse-CDF sampling.
    /// The last entry is forced to 1 so a uniform draw always lands.
    pub(crate) fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut cum: Vec<f64> = self
            .atoms
            .iter()
            .map(|a| {
                acc += a.prob;
                acc
            })
            .collect();
        if let Some(last) = cum.last_mut() {
            *last = 1.0;
        }
        cum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half01() -> StepDistribution {
        StepDistribution::from_pairs(&[(0.0, 0.5), (1.0, 0.5)]).unwrap()
    }

    fn uniform3() -> StepDistribution {
        StepDistribution::from_pairs(&[(-1.0, 1.0 / 3.0), (0.0, 1.0 / 3.0), (1.0, 1.0 / 3.0)])
            .unwrap()
    }

    #[test]
    fn log_laplace_at_zero_is_zero() {
        for d in [half01(), uniform3()] {
            assert_eq!(d.log_laplace(0.0), 0.0);
        }
    }

    #[test]
    fn log_laplace_two_atoms() {
        // direct two-term sum: log((1 + e)/2)
        let expected = ((1.0 + 1f64.exp()) / 2.0).ln();
        assert!((half01().log_laplace(1.0) - expected).abs() < 1e-15);
        assert!((expected - 0.6201145069582775).abs() < 1e-15);
    }

    #[test]
    fn log_laplace_degenerate_is_linear() {
        let d = StepDistribution::from_pairs(&[(2.5, 1.0)]).unwrap();
        for t in [-30.0, -1.0, 0.0, 0.3, 7.0, 500.0] {
            assert!((d.log_laplace(t) - 2.5 * t).abs() < 1e-9 * (1.0 + (2.5 * t).abs()));
        }
    }

    #[test]
    fn derivatives_at_zero_are_mean_and_variance() {
        for d in [half01(), uniform3()] {
            assert!((d.log_laplace_d1(0.0) - d.mean()).abs() < 1e-14);
            assert!((d.log_laplace_d2(0.0) - d.variance()).abs() < 1e-14);
        }
    }

    #[test]
    fn tilted_mean_three_atoms() {
        // direct sum: (e - 1/e) / (1/e + 1 + e)
        let e = 1f64.exp();
        let expected = (e - 1.0 / e) / (1.0 / e + 1.0 + e);
        assert!((uniform3().log_laplace_d1(1.0) - expected).abs() < 1e-15);
        assert!((expected - 0.5752103826044415).abs() < 1e-15);
    }

    #[test]
    fn complex_matches_real_on_real_axis() {
        for d in [half01(), uniform3()] {
            for t in [-3.0, -0.5, 0.0, 0.1, 2.0, 8.0] {
                let z = d.log_laplace_complex(Complex64::new(t, 0.0)).unwrap();
                assert!((z.re - d.log_laplace(t)).abs() <= 1e-12);
                assert!(z.im.abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn complex_at_zero_is_zero() {
        let z = uniform3()
            .log_laplace_complex(Complex64::new(0.0, 0.0))
            .unwrap();
        assert_eq!(z, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn zero_laplace_detected_at_i_pi() {
        // e^{iπ} = -1 cancels the two equal atoms exactly
        let err = half01()
            .log_laplace_complex(Complex64::new(0.0, std::f64::consts::PI))
            .unwrap_err();
        assert!(matches!(err, StepDistError::ZeroLaplace { .. }));
    }

    #[test]
    fn exceedance_reads_atoms() {
        let d = half01();
        assert_eq!(d.tilted_exceedance(0.5), 0.5);
        assert_eq!(d.tilted_exceedance(-3.0), 1.0);
        let d = StepDistribution::from_pairs(&[(0.0, 0.25), (1.0, 0.75)]).unwrap();
        assert_eq!(d.tilted_exceedance(1.0), 0.75);
    }

    #[test]
    fn construction_rejects_junk() {
        assert!(matches!(
            StepDistribution::from_pairs(&[]),
            Err(StepDistError::Empty)
        ));
        assert!(matches!(
            StepDistribution::from_pairs(&[(0.0, 0.0), (1.0, 1.0)]),
            Err(StepDistError::BadProb { .. })
        ));
        assert!(matches!(
            StepDistribution::from_pairs(&[(0.0, 0.3), (1.0, 0.3)]),
            Err(StepDistError::NotNormalized { .. })
        ));
        assert!(matches!(
            StepDistribution::from_pairs(&[(f64::NAN, 1.0)]),
            Err(StepDistError::BadValue { .. })
        ));
    }

    #[test]
    fn dedup_merges_equal_values() {
        let d = StepDistribution::from_pairs(&[(1.0, 0.25), (0.0, 0.5), (1.0, 0.25)]).unwrap();
        assert_eq!(d.atoms().len(), 2);
        assert_eq!(d.top_prob(), 0.5);
        assert_eq!(d.max_value(), 1.0);
    }

    #[test]
    fn spec_json_roundtrip_and_renormalization() {
        let (d, dev) =
            StepDistribution::from_spec_json(r#"{"atoms":[{"value":0,"prob":3},{"value":1,"prob":1}]}"#)
                .unwrap();
        assert!((d.top_prob() - 0.25).abs() < 1e-15);
        assert!((dev - 3.0).abs() < 1e-12);
        let (d2, dev2) = StepDistribution::from_spec_json(&d.to_spec_json()).unwrap();
        assert_eq!(d, d2);
        assert!(dev2 < 1e-12);
    }

    #[test]
    fn overflow_safe_for_large_t() {
        let d = uniform3();
        for t in [1e3, 1e5, 1e7] {
            let lam = d.log_laplace(t);
            assert!(lam.is_finite());
            // Λ(t) ≈ t·ζ₊ + log p_top for large t
            assert!((lam - (t + (1.0f64 / 3.0).ln())).abs() < 1e-6 * t.max(1.0));
        }
    }
}
