//! Numeric tolerances used across the crate.
//!
//! All values are absolute unless stated otherwise and are calibrated for
//! `f64`.

/// Relative asymmetry accepted by [`SymMatrix`](crate::symmat::SymMatrix)
/// constructors before symmetrizing.
pub const SYMMETRY_REL_TOL: f64 = 1e-8;

/// Default margin for definiteness checks on verification paths.
pub const DEFINITE_MARGIN: f64 = 1e-9;

/// Solver defaults.
pub const SDP_FEAS_TOL: f64 = 1e-8;
pub const SDP_GAP_TOL: f64 = 1e-8;
pub const SDP_MAX_ITER: usize = 200;

/// A strict matrix inequality `F ≺ 0` counts as certified when `λ_max(F)` is
/// below `-STRICT_TOL`.
pub const STRICT_TOL: f64 = 1e-7;

/// Margin imposed on strict inequalities inside optimization problems:
/// `-F ⪰ STRICT_MARGIN · I`.
pub const STRICT_MARGIN: f64 = 1e-6;

/// Default tolerance for [`verify_certificate`](crate::certify::verify_certificate).
pub const VERIFY_TOL: f64 = 1e-7;

/// A timer is considered expired when it is at or below this value.
pub const TIMER_TOL: f64 = 1e-12;

/// Default maximum integration step of the hybrid simulator.
pub const DEFAULT_H_MAX: f64 = 1e-3;

/// Norm above which a simulated trajectory is declared diverged.
pub const DIVERGENCE_GUARD: f64 = 1e12;

/// Largest number of sampling channels accepted by vertex enumeration.
pub const MAX_CHANNELS: usize = 20;

/// Default box on the decision variables of the certificate programs.
pub const DEFAULT_VAR_BOX: f64 = 1e3;
