//! Numerical constants and pass/fail thresholds used across the crate.
//!
//! Thresholds that gate a verification live here so that every report and
//! every test reads the same number.

/// Lower clamp applied to every density returned by this crate.
pub const DENSITY_FLOOR: f64 = 1e-300;

/// Scores are only reported where the density exceeds this fraction of its peak.
pub const SCORE_FLOOR_REL: f64 = 1e-12;

/// Accepted deviation of a trapezoid mass from 1 for a function tagged as a density.
pub const MASS_EPS: f64 = 1e-3;

/// Tail budget used when choosing a grid and none is supplied.
pub const DEFAULT_TAIL_BUDGET: f64 = 1e-4;

/// Tail mass a grid must not exceed for `StableLaw::density` to accept it.
pub const DENSITY_TAIL_LIMIT: f64 = 1e-3;

/// Default number of grid samples (overridable through `STABLE_LAB_GRID_N`).
pub const DEFAULT_GRID_N: usize = 1 << 14;

/// Largest grid the automatic planner will allocate.
pub const MAX_GRID_N: usize = 1 << 21;

/// Fraction of the support of the rescaled input, `(1-t)^{1/alpha} L`, inside
/// which scores of heavy-tailed inputs are reported. Outside it the truncation of
/// the input at `±L` biases the conditional expectation.
pub const SCORE_CORE_FRACTION: f64 = 0.125;

/// Relative edge height above which an input counts as heavy-tailed on its grid.
pub const HEAVY_EDGE_REL: f64 = 1e-10;

/// Default time step of central differences in `t`.
pub const DEFAULT_DT: f64 = 1e-3;

/// Absolute floor of the derivative tolerance `max(abs, rel * |lhs|)`.
pub const DERIVATIVE_ABS_TOL: f64 = 1e-4;

/// Relative part of the derivative tolerance.
pub const DERIVATIVE_REL_TOL: f64 = 1e-2;

/// Tolerance on the algebraic identity dD/dt = dLambda/dt - dH/dt.
pub const CONSISTENCY_TOL: f64 = 1e-6;

/// Normalised sup residual allowed for the stable PDE with a stable input.
pub const PDE_STABLE_TOL: f64 = 1e-3;

/// Normalised sup residual allowed for the stable PDE with non-stable inputs.
pub const PDE_GENERAL_TOL: f64 = 5e-3;

/// Normalised sup residual allowed for the heat equation with a Laplace input.
pub const HEAT_KINK_TOL: f64 = 1e-2;

/// Sup-norm allowed for the standardized MMSE score of a stable input.
pub const SCORE_LINEARITY_TOL: f64 = 2e-3;

/// Allowed magnitude of the integral of `h_t (rho^M + x/s)`.
pub const MEAN_ZERO_TOL: f64 = 1e-4;

/// Oddness tolerance for scores of symmetric inputs.
pub const ODDNESS_TOL: f64 = 1e-8;

/// Relative sup error allowed in the conditional-expectation identity.
pub const CONDEXP_TOL: f64 = 1e-4;

/// Tolerance of the Gaussian-channel regressions.
pub const GAUSSIAN_CHANNEL_TOL: f64 = 1e-3;

/// Slack allowed below zero for the entropy power inequality.
pub const EPI_SLACK_TOL: f64 = 1e-3;

/// Sign-condition tolerance relative to the peak |rho^M| on the mask.
pub const SIGN_TOL_REL: f64 = 1e-6;

/// Numerical slack for inequalities that should hold exactly (Gibbs, D >= 0).
pub const INEQUALITY_SLACK: f64 = 1e-6;

/// Accepted range of the Richardson ratio for second-order differences.
pub const RICHARDSON_RANGE: (f64, f64) = (3.5, 4.5);

/// Below this relative size the dt-differences are round-off and carry no ratio.
pub const RICHARDSON_ROUNDOFF: f64 = 1e-9;
