//! Survival of the binary branching random walk killed below a linear
//! boundary.
//!
//! Particles carrying i.i.d. bounded steps `ζ` double every generation, and
//! anything below the line `v·n` is removed with its descendants. For
//! subcritical laws (top-atom mass below 1/2) there is a critical slope
//! `v* = Λ'(t*)` with `Λ(t*) - t*Λ'(t*) = -log 2`; below it the process
//! survives with positive probability `q∞(x)` that collapses like
//! `log q∞(0) ≈ -π √(Λ''(t*) t* / (2(v*-v)))` as `v ↑ v*`.
//!
//! The crate computes every piece of that statement at desk scale and
//! cross-validates the routes against each other:
//!
//! * [`step_dist`] — the step law and its log-Laplace transform `Λ` over
//!   real and complex arguments;
//! * [`critical`] — `(t*, v*, Λ''(t*))`, the regime classification, and the
//!   independent infimum characterization of `v*`;
//! * [`linwave`] — the complex root `φ(ε)` of the linearized equation and
//!   the damped sinusoid it generates;
//! * [`fronts`] — super-/sub-solution profiles `c₊`, `c₋` and numerical
//!   verification of `T(c₊) ≤ c₊`, `T(c₋) ≥ c₋`;
//! * [`fixedpoint`] — the operator `T` on grid functions and the monotone
//!   iteration to the survival profile `q∞`;
//! * [`mcsim`] — a keyed-RNG Monte Carlo estimator of `q_n` by pruned DFS;
//! * [`bdsystem`] — the N-particle branching-selection system and its
//!   finite-size velocity;
//! * [`gwbounds`] — closed-form Galton-Watson survival formulas and bounds
//!   for the critical and supercritical regimes.

pub mod bdsystem;
pub mod critical;
pub mod fixedpoint;
pub mod fronts;
pub mod gwbounds;
pub mod linwave;
pub mod mcsim;
pub mod step_dist;

pub use bdsystem::{measure_speed, ParticleCloud, SpeedMeasurement};
pub use critical::{classify, critical_params, solve_t_star, v_star_infimum, CriticalParams, Regime};
pub use fixedpoint::{
    apply_t, iterate_to_fixed_point, lattice_step, q_n, EstimateSource, FixedPointRun,
    GridConfig, GridFunction, RightMode, SurvivalEstimate,
};
pub use fronts::{
    build_sub, build_super, check_sub_inequality, check_super_inequality, support_radius,
    CheckReport, FrontKind, FrontProfile, GridSpec,
};
pub use gwbounds::{kept_steps_lower_bound, regime_report, supercritical_survival, RegimeReport};
pub use linwave::{d_profile, solve_phi, wavelength, LinearWave};
pub use mcsim::{estimate_qinf_proxy, estimate_qn, SimConfig};
pub use step_dist::{Atom, StepDistribution};
