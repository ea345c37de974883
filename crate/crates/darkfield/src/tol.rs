//! Numerical tolerances used across the crate.
//!
//! Every threshold that guards a state invariant or an acceptance check is
//! named here rather than inlined, so tests and library code agree on the
//! exact values.

/// Max allowed `|rho - rho^dagger|` entry for a density matrix.
pub const HERMITICITY: f64 = 1e-10;

/// Max allowed `|tr(rho) - 1|` for a density matrix.
pub const TRACE: f64 = 1e-8;

/// Eigenvalue floor for positivity checks: `lambda_min >= -EIGENVALUE_FLOOR`.
pub const EIGENVALUE_FLOOR: f64 = 1e-8;

/// Max allowed trace drift accumulated over a full integration run.
pub const TRACE_DRIFT: f64 = 1e-7;

/// Max allowed `| |psi| - 1 |` for a state vector flagged normalized.
pub const STATE_NORM: f64 = 1e-10;

/// Max allowed imaginary part of an expectation value of a Hermitian
/// operator before it is discarded.
pub const EXPECTATION_IMAG: f64 = 1e-10;

/// Max allowed imaginary part of a sampled observable along a trajectory.
pub const SAMPLE_IMAG: f64 = 1e-8;

/// Unitarity defect allowed in a collective basis: `|U U^dagger - I|`.
pub const UNITARITY: f64 = 1e-12;

/// Allowed deviation of the uniform first basis row from `1/sqrt(M)`.
pub const BRIGHT_ROW: f64 = 1e-15;

/// Allowed magnitude of a dark row sum, `|sum_j U_{mu j}|`.
pub const DARK_ROW_SUM: f64 = 1e-12;

/// Thermal-spec tail mass above which a cutoff is flagged as lossy.
pub const THERMAL_TAIL_WARN: f64 = 1e-6;

/// Tail mass targeted by the suggested-cutoff rule.
pub const THERMAL_TAIL_TARGET: f64 = 1e-8;

/// Stability guard factor: `dt <= DT_GUARD / max(gamma, M max|g|, max|delta|)`.
pub const DT_GUARD: f64 = 0.01;

/// Relative agreement required between quadrature and closed-form
/// Planck integrals.
pub const PLANCK_QUADRATURE_REL: f64 = 1e-6;
