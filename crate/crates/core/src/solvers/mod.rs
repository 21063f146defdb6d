//! Time integration: barotropic compressible Navier-Stokes, incompressible
//! Navier-Stokes and the forced heat equation.
//!
//! Every stiff linear part is propagated exactly per Fourier mode; nonlinear
//! terms are advanced by the two-stage exponential Runge-Kutta scheme
//!
//! ```text
//! u*      = e^{L dt} uₙ + dt φ₁(L dt) N(uₙ)
//! uₙ₊₁    = u* + dt φ₂(L dt) (N(u*) - N(uₙ))
//! ```
//!
//! which is second order and reduces to the exact flow when `N = 0`.

mod compressible;
pub mod expint;
mod heat;
mod incompressible;
mod run;

pub use compressible::{pressure_terms, step_cns, step_cns_linear, CnsStepper};
pub use heat::{heat_run, step_heat};
pub use incompressible::{ins_pressure, step_ins, InsStepper};
pub use run::{
    integrate_fixed, run, run_ins, snapshot_times, Event, EventKind, FlowTrajectory,
    InsTrajectory, Termination,
};

use crate::error::{Error, Result};
use crate::spectral::{Rank, SpectralField};

/// Viscosities and pressure law `P(ρ) = (ρ^γ - 1)/γ`, so `P(1) = 0` and
/// `P'(1) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    pub mu: f64,
    pub lambda: f64,
    pub gamma: f64,
}

impl PhysicalParams {
    pub fn new(mu: f64, lambda: f64, gamma: f64) -> Result<Self> {
        let p = Self { mu, lambda, gamma };
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
        }
        if !(p.nu() > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "nu = lambda + 2 mu must be positive, got {}",
                p.nu()
            )));
        }
        if !(gamma >= 1.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma must be >= 1, got {gamma}")));
        }
        Ok(p)
    }

    /// Parameters with a prescribed `ν = λ + 2μ`.
    pub fn with_nu(mu: f64, nu: f64, gamma: f64) -> Result<Self> {
        Self::new(mu, nu - 2.0 * mu, gamma)
    }

    pub fn nu(&self) -> f64 {
        self.lambda + 2.0 * self.mu
    }

    pub fn pressure(&self, rho: f64) -> f64 {
        (rho.powf(self.gamma) - 1.0) / self.gamma
    }

    /// `k(a) = P'(1 + a) - 1`.
    pub fn k_of(&self, a: f64) -> f64 {
        (1.0 + a).powf(self.gamma - 1.0) - 1.0
    }
}

/// Density perturbation `a = ρ - 1`, velocity `v`, time `t`.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub a: SpectralField,
    pub v: SpectralField,
    pub t: f64,
}

impl FlowState {
    /// Validates ranks and grids; Nyquist modes are dropped.
    pub fn new(a: SpectralField, v: SpectralField, t: f64) -> Result<Self> {
        a.require_scalar("density must be a scalar field")?;
        v.require_vector("velocity must be a vector field")?;
        a.check_same_grid(&v)?;
        Ok(Self {
            a: a.without_nyquist(),
            v: v.without_nyquist(),
            t,
        })
    }

    pub fn zero(grid: &crate::spectral::Grid) -> Self {
        Self {
            a: SpectralField::zeros(grid, Rank::Scalar),
            v: SpectralField::zeros(grid, Rank::Vector),
            t: 0.0,
        }
    }
}

/// Step-size control and run-termination thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct StepperConfig {
    /// Courant factor on the advective limit `Δx / max|v|`.
    pub cfl: f64,
    pub dt_max: f64,
    /// Time between stored snapshots.
    pub snapshot_interval: f64,
    /// While `t` is small, `dt ≤ layer_ratio · (t + 1/ν)` so the initial
    /// acoustic-viscous layer is resolved.
    pub layer_ratio: f64,
    /// Runs stop when `1 + min a` falls to this value.
    pub vacuum_floor: f64,
    /// Runs stop when `max|a|` exceeds this value.
    pub max_density_deviation: f64,
    /// Runs stop when `max|v|` exceeds this value.
    pub max_velocity: f64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            cfl: 0.4,
            dt_max: 1e-2,
            snapshot_interval: 0.1,
            layer_ratio: 0.1,
            vacuum_floor: 0.1,
            max_density_deviation: 0.9,
            max_velocity: 1e6,
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: f64| Err(Error::InvalidParameter(format!("{what} = {v}")));
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return bad("cfl must lie in (0, 1); cfl", self.cfl);
        }
        if !(self.dt_max > 0.0) || !self.dt_max.is_finite() {
            return bad("dt_max must be positive; dt_max", self.dt_max);
        }
        if !(self.snapshot_interval > 0.0) || !self.snapshot_interval.is_finite() {
            return bad("snapshot interval must be positive; snapshot_interval", self.snapshot_interval);
        }
        if !(self.layer_ratio > 0.0) {
            return bad("layer_ratio must be positive; layer_ratio", self.layer_ratio);
        }
        Ok(())
    }
}
