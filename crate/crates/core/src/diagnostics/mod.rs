//! Observables of the incompressible-limit analysis: the splitting
//! `u = v - V`, the effective velocity, the source terms `H₁`, `H₂`, the
//! norm ledger and the limit-error metrics with their rate fit.

mod ledger;
mod sources;

pub use ledger::{integrability_in_range, limit_error, norm_ledger, LedgerRow, LimitError, NormLedger};
pub use sources::{assemble_h1, assemble_h2, decomposition_residual, H1Terms, H2Terms, ResidualRow, SourceInputs};

use crate::calculus::compressible_project;
use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// `w = Qu + ν⁻¹ (-Δ)⁻¹ ∇a`; the mean of `a` is ignored.
pub fn effective_velocity(a: &SpectralField, u: &SpectralField, nu: f64) -> Result<SpectralField> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("ν must be positive, got {nu}")));
    }
    a.require_scalar("density must be a scalar field")?;
    a.check_same_grid(u)?;
    let grad = a.without_mean().gradient()?.inv_laplacian_unchecked();
    Ok(&compressible_project(u)? + &grad.scale(1.0 / nu))
}

/// Second-order derivative weights at `t` for nodes `(t0, t1, t2)`.
fn lagrange_weights(t: f64, n: [f64; 3]) -> [f64; 3] {
    let [t0, t1, t2] = n;
    [
        (2.0 * t - t1 - t2) / ((t0 - t1) * (t0 - t2)),
        (2.0 * t - t0 - t2) / ((t1 - t0) * (t1 - t2)),
        (2.0 * t - t0 - t1) / ((t2 - t0) * (t2 - t1)),
    ]
}

/// Time derivative of a snapshot series: three-point centered differences
/// inside, three-point one-sided at the ends (two-point if only two
/// snapshots exist).
pub fn time_derivative(times: &[f64], fields: &[SpectralField]) -> Result<Vec<SpectralField>> {
    let n = times.len();
    if n != fields.len() {
        return Err(Error::TrajectoryMismatch(format!("{n} times for {} snapshots", fields.len())));
    }
    if n < 2 {
        return Err(Error::InvalidParameter("time derivative needs at least 2 snapshots".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("snapshot times must be increasing".into()));
    }
    if n == 2 {
        let d = (&fields[1] - &fields[0]).scale(1.0 / (times[1] - times[0]));
        return Ok(vec![d.clone(), d]);
    }
    Ok((0..n)
        .map(|i| {
            let c = i.clamp(1, n - 2);
            let w = lagrange_weights(times[i], [times[c - 1], times[c], times[c + 1]]);
            let mut acc = fields[c - 1].scale(w[0]);
            acc = acc.axpy(w[1], &fields[c]).expect("same grid");
            acc.axpy(w[2], &fields[c + 1]).expect("same grid")
        })
        .collect())
}

/// ν-sweep outcome.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub nu_values: Vec<f64>,
    pub errors: Vec<LimitError>,
    pub slope: f64,
    pub fit_residual: f64,
}

/// Least-squares slope of `ln(error)` against `ln(ν)` and the RMS residual
/// of the fit (natural-log units).
pub fn fit_rate(nu: &[f64], errors: &[f64]) -> Result<(f64, f64)> {
    if nu.len() != errors.len() {
        return Err(Error::DegenerateFit(format!("{} ν values for {} errors", nu.len(), errors.len())));
    }
    if nu.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 ν values, got {}", nu.len())));
    }
    if nu.windows(2).any(|w| !(w[1] > w[0])) || !(nu[0] > 0.0) {
        return Err(Error::DegenerateFit("ν values must be positive and strictly increasing".into()));
    }
    let span = (nu[nu.len() - 1] / nu[0]).log10();
    if span < 1.5 {
        return Err(Error::DegenerateFit(format!("ν values span {span:.2} decades, need 1.5")));
    }
    if let Some(e) = errors.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
        return Err(Error::DegenerateFit(format!("error {e} cannot be fitted on a log scale")));
    }
    let x: Vec<f64> = nu.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = x.iter().zip(&y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
    Ok((slope, (rss / n).sqrt()))
}
