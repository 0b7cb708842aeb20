//! Numerical tolerances shared across modules.

/// Row sums of stochastic matrices and distribution totals.
pub const STOCHASTIC: f64 = 1e-12;
/// Max-abs residual of `πᵀP − πᵀ`.
pub const STATIONARY: f64 = 1e-10;
/// Matrix constraint residuals are checked against `MATRIX_PER_N · n`.
pub const MATRIX_PER_N: f64 = 1e-9;
/// Time-valued comparisons use `TIME · max(1, scale)`.
pub const TIME: f64 = 1e-8;
/// Entries above `-CLAMP` are treated as zero exit frequencies.
pub const CLAMP: f64 = 1e-10;
/// Eigenvalues below this are zero modes.
pub const ZERO_EIGENVALUE: f64 = 1e-10;

/// `tol · n`, the threshold for an n×n matrix identity.
pub fn matrix(n: usize) -> f64 {
    MATRIX_PER_N * n as f64
}

/// `TIME · max(1, scale)`.
pub fn time(scale: f64) -> f64 {
    TIME * scale.abs().max(1.0)
}

/// `|a − b| ≤ tol · max(1, |a|, |b|)`.
pub fn close_rel(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}
