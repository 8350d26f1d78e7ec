//! Centralized numerical tolerances.
//!
//! Two families are distinguished: algebraic identities that only accumulate a
//! handful of f64 roundings, and spectral/assembled quantities that pass
//! through an eigensolver or a long floating-point composition.

/// Algebraic identities (normalization, Hermiticity, closed-form equalities).
pub const ALGEBRAIC: f64 = 1e-12;

/// Spectral checks; also the eigenvalue floor for positive semidefiniteness.
pub const SPECTRAL: f64 = 1e-10;

/// Probability bookkeeping on assembled outcome distributions.
pub const PROBABILITY: f64 = 1e-10;

/// Agreement between the constrained optimizer and its brute-force oracle,
/// and between the optimizer and the analytic half-weight solution.
pub const OPTIMIZER: f64 = 1e-4;

/// Coordinate-descent step size below which polishing stops.
pub const POLISH_STEP: f64 = 1e-10;

/// Absolute tolerance for threshold bisection in the QBER variable.
pub const BISECTION_DELTA: f64 = 1e-6;

/// Absolute tolerance for threshold bisection in the efficiency variable.
pub const BISECTION_ETA: f64 = 1e-6;

/// Absolute tolerance for distance bisection, in km.
pub const BISECTION_KM: f64 = 1e-4;

/// Default number of grid points for entropy-bound curves.
pub const DEFAULT_RESOLUTION: usize = 512;
