use std::sync::Arc;

use num_complex::Complex64;

use super::expint::phi_real;
use crate::calculus::leray_project;
use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{advect, Grid, SpectralField};

/// Incompressible stepper for `V_t + P(V·∇V) = μΔV`.
pub struct InsStepper {
    grid: Grid,
    mu: f64,
    tables: Option<(f64, Arc<Vec<[f64; 3]>>)>,
}

impl InsStepper {
    pub fn new(grid: &Grid, mu: f64) -> Result<Self> {
        if !(mu > 0.0) {
            return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
        }
        Ok(Self {
            grid: grid.clone(),
            mu,
            tables: None,
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    fn tables(&mut self, dt: f64) -> Arc<Vec<[f64; 3]>> {
        if let Some((t, tab)) = &self.tables {
            if *t == dt {
                return tab.clone();
            }
        }
        let g = &self.grid;
        let mu = self.mu;
        let tab = Arc::new(par::map_range(g.len(), |i| {
            if g.is_nyquist(i) {
                return [0.0; 3];
            }
            let z = -mu * g.k2(i) * dt;
            [phi_real(0, z), phi_real(1, z), phi_real(2, z)]
        }));
        self.tables = Some((dt, tab.clone()));
        tab
    }

    /// `-P(V·∇V)`.
    pub fn nonlinear_term(&self, v: &SpectralField) -> Result<SpectralField> {
        Ok(leray_project(&advect(v, v)?)?.scale(-1.0))
    }

    /// `V_t = μΔV - P(V·∇V)`.
    pub fn tendency(&self, v: &SpectralField) -> Result<SpectralField> {
        Ok(&v.laplacian().scale(self.mu) + &self.nonlinear_term(v)?)
    }

    pub fn step(&mut self, v: &SpectralField, dt: f64) -> Result<SpectralField> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
        }
        let tab = self.tables(dt);
        let n0 = self.nonlinear_term(v)?;
        let stage = combine(&tab, v, Some(0), &n0, None, 1, dt);
        let n1 = self.nonlinear_term(&stage)?;
        Ok(combine(&tab, &stage, None, &n1, Some(&n0), 2, dt))
    }
}

/// `φ_i x + dt φ_j (y - y₀)` per mode; `i = None` is the identity.
pub(crate) fn combine(
    tab: &[[f64; 3]],
    x: &SpectralField,
    i_fn: Option<usize>,
    y: &SpectralField,
    y0: Option<&SpectralField>,
    j_fn: usize,
    dt: f64,
) -> SpectralField {
    let mut out = x.clone();
    for c in 0..x.ncomp() {
        let (xs, ys) = (x.coeffs(c), y.coeffs(c));
        let y0s = y0.map(|f| f.coeffs(c));
        par::for_each_indexed(out.coeffs_mut(c), |i, z| {
            let t = &tab[i];
            let mut yy = ys[i];
            if let Some(y0s) = y0s {
                yy -= y0s[i];
            }
            let xx = match i_fn {
                Some(k) => t[k] * xs[i],
                None if t[0] == 0.0 && t[1] == 0.0 => Complex64::default(),
                None => xs[i],
            };
            *z = xx + dt * t[j_fn] * yy;
        });
    }
    out
}

/// One step of incompressible Navier-Stokes.
pub fn step_ins(v: &SpectralField, mu: f64, dt: f64) -> Result<SpectralField> {
    InsStepper::new(v.grid(), mu)?.step(v, dt)
}

/// Pressure `Π = Δ⁻¹ div(-V·∇V)` (zero mean).
pub fn ins_pressure(v: &SpectralField) -> Result<SpectralField> {
    let div = advect(v, v)?.divergence()?.scale(-1.0);
    Ok(div.inv_laplacian_unchecked().scale(-1.0))
}
