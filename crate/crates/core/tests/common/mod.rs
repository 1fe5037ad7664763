//! Shared test fixtures: the subcritical battery and an exact
//! tree-enumeration oracle for `q_n`, independent of the grid machinery.

#![allow(dead_code)]

use kbrw::{CriticalParams, StepDistribution};
use std::collections::HashMap;

/// The three subcritical laws exercised throughout the acceptance suite.
pub fn battery() -> Vec<(&'static str, StepDistribution)> {
    vec![
        ("uniform{-1,0,1}", uniform3()),
        ("tri{-1:.5,0:.2,1:.3}", tri532()),
        ("bern{0:.6,1:.4}", bern64()),
    ]
}

pub fn uniform3() -> StepDistribution {
    StepDistribution::from_pairs(&[(-1.0, 1.0 / 3.0), (0.0, 1.0 / 3.0), (1.0, 1.0 / 3.0)]).unwrap()
}

pub fn tri532() -> StepDistribution {
    StepDistribution::from_pairs(&[(-1.0, 0.5), (0.0, 0.2), (1.0, 0.3)]).unwrap()
}

pub fn bern64() -> StepDistribution {
    StepDistribution::from_pairs(&[(0.0, 0.6), (1.0, 0.4)]).unwrap()
}

pub fn half01() -> StepDistribution {
    StepDistribution::from_pairs(&[(0.0, 0.5), (1.0, 0.5)]).unwrap()
}

/// Rounds `v = v* - eps` onto the `1/denom` lattice, kept strictly below
/// `v*`. Returns `(v, eps_eff)` with `eps_eff = v* - v`.
pub fn rationalized_v(crit: &CriticalParams, eps_target: f64, denom: f64) -> (f64, f64) {
    let mut v = ((crit.v_star - eps_target) * denom).round() / denom;
    if v >= crit.v_star {
        v -= 1.0 / denom;
    }
    (v, crit.v_star - v)
}

/// Exact enumeration of `q_n(x) = P_x(A_n(v))` on an integer lattice.
///
/// Atom values and `v` must be integer multiples of `1/denom`; positions are
/// then tracked as exact `i64` lattice indices in the shifted frame (where
/// the killing line is 0), so no floating-point drift can reach the kill
/// comparison. The recursion is the survival recursion itself,
/// `q_{n+1}(x) = ψ(Σ pᵢ q_n(x + vᵢ - v))`, memoized on `(n, index)` —
/// which is exactly a pruned enumeration of the full binary outcome tree.
pub struct TreeOracle {
    offsets: Vec<i64>,
    probs: Vec<f64>,
    memo: HashMap<(u32, i64), f64>,
}

impl TreeOracle {
    pub fn new(d: &StepDistribution, v: f64, denom: i64) -> Self {
        let to_index = |x: f64| -> i64 {
            let scaled = x * denom as f64;
            let idx = scaled.round();
            assert!(
                (scaled - idx).abs() < 1e-9,
                "{x} is not on the 1/{denom} lattice"
            );
            idx as i64
        };
        let v_idx = to_index(v);
        Self {
            offsets: d.atoms().iter().map(|a| to_index(a.value) - v_idx).collect(),
            probs: d.atoms().iter().map(|a| a.prob).collect(),
            memo: HashMap::new(),
        }
    }

    /// `q_n` at lattice index `x_index` (position `x_index/denom` in the
    /// shifted frame).
    pub fn q_n(&mut self, n: u32, x_index: i64) -> f64 {
        if x_index < 0 {
            return 0.0;
        }
        if n == 0 {
            return 1.0;
        }
        if let Some(&hit) = self.memo.get(&(n, x_index)) {
            return hit;
        }
        let offsets = self.offsets.clone();
        let probs = self.probs.clone();
        let mut child_mean = 0.0;
        for (off, p) in offsets.into_iter().zip(probs) {
            child_mean += p * self.q_n(n - 1, x_index + off);
        }
        let value = 2.0 * child_mean - child_mean * child_mean;
        self.memo.insert((n, x_index), value);
        value
    }
}

#[test]
fn oracle_reproduces_hand_computed_values() {
    // d = {0,1} each w.p. 1/2, v = 0.2: the two-level tree gives 3/4,
    // and the value is stationary in n
    let mut oracle = TreeOracle::new(&half01(), 0.2, 5);
    assert_eq!(oracle.q_n(0, 0), 1.0);
    assert!((oracle.q_n(1, 0) - 0.75).abs() < 1e-15);
    assert!((oracle.q_n(2, 0) - 0.75).abs() < 1e-15);
    assert!((oracle.q_n(10, 0) - 0.75).abs() < 1e-15);
    // uniform3 at v = 0.1 decreases strictly for the first generations
    let mut oracle = TreeOracle::new(&uniform3(), 0.1, 10);
    let q1 = oracle.q_n(1, 0);
    let q2 = oracle.q_n(2, 0);
    let q3 = oracle.q_n(3, 0);
    assert!((q1 - 5.0 / 9.0).abs() < 1e-15, "ψ(1/3·(1+1)) = 5/9");
    assert!(q1 > q2 && q2 > q3);
}
