use super::expint::phi_real;
use super::incompressible::combine;
use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// One step of `u_t - μΔu = f`, exact for forcing linear in time between
/// `f_start` (at `t`) and `f_end` (at `t + dt`).
pub fn step_heat(
    u: &SpectralField,
    mu: f64,
    f_start: &SpectralField,
    f_end: &SpectralField,
    dt: f64,
) -> Result<SpectralField> {
    if !(mu > 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "heat step needs mu > 0 and dt > 0, got mu={mu} dt={dt}"
        )));
    }
    u.check_same_grid(f_start)?;
    u.check_same_grid(f_end)?;
    let g = u.grid();
    let tab: Vec<[f64; 3]> = (0..g.len())
        .map(|i| {
            let z = -mu * g.k2(i) * dt;
            [phi_real(0, z), phi_real(1, z), phi_real(2, z)]
        })
        .collect();
    let part = combine(&tab, u, Some(0), f_start, None, 1, dt);
    let zero = u.scale(0.0);
    let ramp = combine(&tab, &zero, None, f_end, Some(f_start), 2, dt);
    Ok(&part + &ramp)
}

/// Solve the forced heat equation through `times`, returning the solution at
/// each time. `forcing(t)` is sampled at the step endpoints.
pub fn heat_run<F>(u0: &SpectralField, mu: f64, times: &[f64], forcing: F) -> Result<Vec<SpectralField>>
where
    F: Fn(f64) -> SpectralField,
{
    let mut out = Vec::with_capacity(times.len());
    let mut u = u0.clone();
    out.push(u.clone());
    for w in times.windows(2) {
        u = step_heat(&u, mu, &forcing(w[0]), &forcing(w[1]), w[1] - w[0])?;
        out.push(u.clone());
    }
    Ok(out)
}
