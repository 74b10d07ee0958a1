//! Numerical thresholds and sign conventions shared by every module.
//!
//! Each value here is the single definition site; modules and tests import
//! from this file instead of repeating literals.

/// Absolute per-coordinate tolerance for identifying two points of a Weyl orbit.
pub const TAU_ORBIT: f64 = 1e-9;

/// Residual bound `|I(alpha) - beta(z)|` for every solved fiber point.
pub const TAU_NEWTON: f64 = 1e-12;

/// Homotopy and loop tracking refuse to get closer than this to the
/// discriminant, measured by `|det DI(alpha)|`.
pub const DELTA_DISC: f64 = 1e-6;

/// Initial continuation step in the path parameter.
pub const STEP_INITIAL: f64 = 1e-2;

/// Continuation step floor; below it a path is declared failed.
pub const STEP_FLOOR: f64 = 1e-8;

/// Newton corrector iteration budget per continuation step.
pub const NEWTON_MAX_ITERS: usize = 8;

/// Minimum `|d/dz P(beta(z))|` (relative to the coefficient scale) at a
/// branch point for it to count as a simple zero.
pub const TAU_SIMPLE: f64 = 1e-8;

/// `r_min = R_MIN_FACTOR * min_separation` between branch points.
pub const R_MIN_FACTOR: f64 = 1e-3;

/// Holomorphy probe: allowed growth of the max modulus when the radius halves.
pub const PROBE_GROWTH: f64 = 1.05;

/// Threshold on `|det M_k|` below which the probe refuses a ramification point.
pub const TAU_MINOR: f64 = 1e-10;

/// Relative agreement demanded between the `r` and `r/2` contour residues.
pub const TAU_RES: f64 = 1e-6;

/// Trapezoid nodes on each residue contour.
pub const RESIDUE_NODES: usize = 128;

/// Largest contour radius in the local curve coordinate.
pub const RESIDUE_MAX_RADIUS: f64 = 1e-2;

/// Relative tolerance for the adaptive special Kähler quadrature.
pub const TAU_QUAD: f64 = 1e-7;

/// Sign relating the engine's value to the implicit-differentiation oracle:
/// `engine = SW_SIGN * oracle`. The engine carries the minus sign of the
/// closed formula, while the oracle differentiates the deformed fiber point.
/// Fixed once by the oracle comparison in the test suite.
pub const SW_SIGN: f64 = -1.0;

/// Finite-difference step bounds accepted by the Gauss-Manin oracle.
pub const FD_EPS_MIN: f64 = 1e-8;
pub const FD_EPS_MAX: f64 = 1e-4;
