//! Tolerances and comparison helpers.

/// Relative tolerance for identities that hold exactly up to rounding.
pub const EXACT_TOL: f64 = 1e-12;

/// Relative tolerance when comparing optimal constants computed along
/// different routes.
pub const CONST_TOL: f64 = 1e-9;

/// `|a - b| <= tol * max(|a|, |b|, |scale|)`.
///
/// `scale` carries the magnitude of the quantities a difference was formed
/// from, so that cancellation does not turn rounding into a false failure.
pub fn close(a: f64, b: f64, tol: f64, scale: f64) -> bool {
    let size = a.abs().max(b.abs()).max(scale.abs());
    (a - b).abs() <= tol * size
}
