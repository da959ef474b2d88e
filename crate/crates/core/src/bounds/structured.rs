use super::report::{BoundReport, Certificate, Method, Quantity};
use crate::error::{Error, Result};
use crate::linalg::GramMatrix;
use crate::randcert::t_shift;

/// Maximum of `a2 x^2 + a1 x + a0` for a concave quadratic: `(argmax, max)`.
pub fn quadratic_vertex_bound(a2: f64, a1: f64, a0: f64) -> Result<(f64, f64)> {
    if !(a2 < 0.0) {
        return Err(Error::invalid(format!("leading coefficient {a2} must be negative")));
    }
    Ok((-a1 / (2.0 * a2), a0 - a1 * a1 / (4.0 * a2)))
}

/// Spectral-norm inputs for [`rho1_structured_upper`]. `restricted` bounds the
/// norm of every principal submatrix of `W` with at most `kappa * n` rows and
/// `full` bounds `||W||`.
#[derive(Debug, Clone, Copy)]
pub struct NormBounds {
    pub restricted: f64,
    pub full: f64,
    /// Both values are exact (or rigorous upper bounds) rather than sampled.
    pub exact: bool,
}

/// Upper bound on `rho1(T)` for `T = -(sqrt(n)/4) I + W`.
///
/// Split `x` into entries above `1/(kappa n)` (at most `kappa n` of them, set
/// `S`) and the rest. With `u = ||x_S||_2` and `||x_{S^c}||_2 <= 1/(kappa sqrt n)`:
///
/// ```text
/// <Tx,x> <= (-sqrt(n)/4 + restricted) u^2 + 2 full u/(kappa sqrt n) + full/(kappa^2 n)
/// ```
///
/// and the bound is the maximum of that quadratic over `u`.
pub fn rho1_structured_upper(t: &GramMatrix, kappa: f64, norms: NormBounds) -> Result<BoundReport> {
    let n = t.n();
    let shift = t_shift(n);
    if (0..n).any(|i| (t.get(i, i) - shift).abs() > 1e-12 * shift.abs().max(1.0)) {
        return Err(Error::invalid("T must have constant diagonal -sqrt(n)/4"));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
    }
    if norms.restricted < 0.0 || norms.full < 0.0 {
        return Err(Error::invalid("norm bounds must be nonnegative"));
    }
    let cert = if norms.exact { Certificate::CertifiedBound } else { Certificate::Heuristic };
    let sqrt_n = (n as f64).sqrt();
    let a2 = shift + norms.restricted;
    if a2 >= 0.0 {
        return Ok(BoundReport::new(Quantity::Rho1, Method::Structured, Certificate::Heuristic).flag("vacuous"));
    }
    let a1 = 2.0 * norms.full / (kappa * sqrt_n);
    let a0 = norms.full / (kappa * kappa * n as f64);
    let (_, max) = quadratic_vertex_bound(a2, a1, a0)?;
    let mut report = BoundReport::new(Quantity::Rho1, Method::Structured, cert)
        .with_lower(0.0)
        .with_upper(max);
    if norms.restricted > sqrt_n / 8.0 {
        report = report.flag("restricted_norm_above_eighth");
    }
    Ok(report)
}
