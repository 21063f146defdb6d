use std::sync::Arc;

use num_complex::Complex64;

use super::expint::{acoustic_block, phi_real, Block};
use super::{FlowState, PhysicalParams};
use crate::error::{Error, Result};
use crate::par;
use crate::spectral::{forward_transform, forward_transform_vector, inverse_transform, Grid, SpectralField};

/// `(P(1 + a), k(a))`, evaluated pointwise on the dealiased samples of `a`
/// and dealiased again.
pub fn pressure_terms(a: &SpectralField, gamma: f64) -> Result<(SpectralField, SpectralField)> {
    a.require_scalar("pressure of a vector field")?;
    let samples = inverse_transform(&a.truncated()).pop().expect("scalar");
    let (p, k) = pressure_samples(&samples, gamma)?;
    let g = a.grid();
    Ok((
        forward_transform(g, &p)?.truncated(),
        forward_transform(g, &k)?.truncated(),
    ))
}

fn check_vacuum(a: &[f64]) -> Result<()> {
    let min = a.iter().copied().fold(f64::INFINITY, f64::min);
    if !(1.0 + min > 0.0) {
        return Err(Error::Vacuum { min_density: 1.0 + min });
    }
    Ok(())
}

fn pressure_samples(a: &[f64], gamma: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_vacuum(a)?;
    let p = a.iter().map(|&x| ((1.0 + x).powf(gamma) - 1.0) / gamma).collect();
    let k = a.iter().map(|&x| (1.0 + x).powf(gamma - 1.0) - 1.0).collect();
    Ok((p, k))
}

#[derive(Debug, Clone, Copy, Default)]
struct ModeCoef {
    khat: [f64; 3],
    /// `φ₀, φ₁, φ₂` of `-μ|k|²dt` for transverse velocity.
    trans: [f64; 3],
    /// `φ₀, φ₁, φ₂` of the acoustic block acting on `(â, k̂·v̂)`.
    block: [Block; 3],
    nyquist: bool,
}

struct Tables {
    dt: f64,
    modes: Vec<ModeCoef>,
}

type Modal = (Complex64, [Complex64; 3]);

/// Compressible stepper; caches propagator tables for the last `dt`.
pub struct CnsStepper {
    grid: Grid,
    params: PhysicalParams,
    nonlinear: bool,
    tables: Option<Arc<Tables>>,
}

impl CnsStepper {
    pub fn new(grid: &Grid, params: PhysicalParams) -> Self {
        Self {
            grid: grid.clone(),
            params,
            nonlinear: true,
            tables: None,
        }
    }

    /// Drop all nonlinear terms, leaving the exact linear flow.
    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    fn tables(&mut self, dt: f64) -> Arc<Tables> {
        if let Some(t) = &self.tables {
            if t.dt == dt {
                return t.clone();
            }
        }
        let g = &self.grid;
        let d = g.dim();
        let (mu, nu) = (self.params.mu, self.params.nu());
        let modes = par::map_range(g.len(), |i| {
            if g.is_nyquist(i) {
                return ModeCoef {
                    nyquist: true,
                    ..ModeCoef::default()
                };
            }
            let mut k = [0.0; 3];
            for (a, c) in k.iter_mut().enumerate().take(d) {
                *c = g.dk(i, a);
            }
            let kappa = k.iter().map(|c| c * c).sum::<f64>().sqrt();
            let khat = if kappa > 0.0 { k.map(|c| c / kappa) } else { k };
            let z = -mu * kappa * kappa * dt;
            ModeCoef {
                khat,
                trans: [phi_real(0, z), phi_real(1, z), phi_real(2, z)],
                block: [0, 1, 2].map(|n| acoustic_block(n, kappa, nu, dt)),
                nyquist: false,
            }
        });
        let t = Arc::new(Tables { dt, modes });
        self.tables = Some(t.clone());
        t
    }

    /// Exact linear propagator `e^{L dt}` of mode `idx` acting on `(â, k̂·v̂)`.
    pub fn acoustic_propagator(&mut self, idx: usize, dt: f64) -> Block {
        self.tables(dt).modes[idx].block[0]
    }

    /// Nonlinear remainder `(N_a, N_v)`.
    pub fn nonlinear_terms(&self, a: &SpectralField, v: &SpectralField) -> Result<(SpectralField, SpectralField)> {
        let g = &self.grid;
        if !self.nonlinear {
            return Ok((a.scale(0.0), v.scale(0.0)));
        }
        let d = g.dim();
        let PhysicalParams { mu, lambda, gamma } = self.params;
        let at = a.truncated();
        let vt = v.truncated();
        let a_s = inverse_transform(&at).pop().expect("scalar");
        let v_s = inverse_transform(&vt);
        let (_, k_s) = pressure_samples(&a_s, gamma)?;
        let inv: Vec<f64> = a_s.iter().map(|&x| 1.0 / (1.0 + x)).collect();
        let gfac: Vec<f64> = a_s.iter().zip(&inv).map(|(x, i)| -x * i).collect();
        let hfac: Vec<f64> = a_s
            .iter()
            .zip(&k_s)
            .zip(&inv)
            .map(|((x, k), i)| (k - x) * i)
            .collect();

        let flux: Vec<Vec<f64>> = v_s
            .iter()
            .map(|vc| vc.iter().zip(&a_s).map(|(p, q)| p * q).collect())
            .collect();
        let na = forward_transform_vector(g, &flux)?
            .truncated()
            .divergence()?
            .scale(-1.0);

        let div = vt.divergence()?;
        let visc = &vt.laplacian().scale(mu) + &div.gradient()?.scale(lambda + mu);
        let visc_s = inverse_transform(&visc);
        let ga_s = inverse_transform(&at.gradient()?);
        let mut out = vec![vec![0.0; g.len()]; d];
        for (c, o) in out.iter_mut().enumerate() {
            let dv = inverse_transform(&vt.component(c).gradient()?);
            for i in 0..g.len() {
                let mut adv = 0.0;
                for (axis, vax) in v_s.iter().enumerate() {
                    adv += vax[i] * dv[axis][i];
                }
                o[i] = -adv + gfac[i] * visc_s[c][i] - hfac[i] * ga_s[c][i];
            }
        }
        let nv = forward_transform_vector(g, &out)?.truncated();
        Ok((na, nv))
    }

    /// Full right-hand side `(a_t, v_t)`.
    pub fn tendencies(&self, state: &FlowState) -> Result<(SpectralField, SpectralField)> {
        let PhysicalParams { mu, lambda, .. } = self.params;
        let (na, nv) = self.nonlinear_terms(&state.a, &state.v)?;
        let div = state.v.divergence()?;
        let at = &na - &div;
        let lin_v = &(&state.v.laplacian().scale(mu) + &div.gradient()?.scale(lambda + mu))
            - &state.a.gradient()?;
        Ok((at, &lin_v + &nv))
    }

    pub fn step(&mut self, state: &FlowState, dt: f64) -> Result<FlowState> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
        }
        let tables = self.tables(dt);
        let (n0a, n0v) = self.nonlinear_terms(&state.a, &state.v)?;
        let stage = self.combine(&tables, (&state.a, &state.v), 0, (&n0a, &n0v), None, 1, dt);
        let (n1a, n1v) = self.nonlinear_terms(&stage.0, &stage.1)?;
        let out = self.combine(
            &tables,
            (&stage.0, &stage.1),
            usize::MAX,
            (&n1a, &n1v),
            Some((&n0a, &n0v)),
            2,
            dt,
        );
        Ok(FlowState {
            a: out.0,
            v: out.1,
            t: state.t + dt,
        })
    }

    /// `φ_i(L dt) x + dt φ_j(L dt) (y - y₀)`, with `i = usize::MAX` meaning
    /// the identity.
    #[allow(clippy::too_many_arguments)]
    fn combine(
        &self,
        tables: &Tables,
        x: (&SpectralField, &SpectralField),
        i_fn: usize,
        y: (&SpectralField, &SpectralField),
        y0: Option<(&SpectralField, &SpectralField)>,
        j_fn: usize,
        dt: f64,
    ) -> (SpectralField, SpectralField) {
        let d = self.grid.dim();
        let modal = |f: (&SpectralField, &SpectralField), i: usize| -> Modal {
            let mut v = [Complex64::default(); 3];
            for (c, slot) in v.iter_mut().enumerate().take(d) {
                *slot = f.1.coeffs(c)[i];
            }
            (f.0.coeffs(0)[i], v)
        };
        let res: Vec<Modal> = par::map_range(self.grid.len(), |i| {
            let m = &tables.modes[i];
            if m.nyquist {
                return (Complex64::default(), [Complex64::default(); 3]);
            }
            let xm = modal(x, i);
            let mut ym = modal(y, i);
            if let Some(y0) = y0 {
                let z = modal(y0, i);
                ym.0 -= z.0;
                for c in 0..d {
                    ym.1[c] -= z.1[c];
                }
            }
            let px = if i_fn == usize::MAX { xm } else { apply_mode(m, i_fn, xm, d) };
            let py = apply_mode(m, j_fn, ym, d);
            let mut v = [Complex64::default(); 3];
            for c in 0..d {
                v[c] = px.1[c] + dt * py.1[c];
            }
            (px.0 + dt * py.0, v)
        });
        let mut a = x.0.scale(0.0);
        let mut v = x.1.scale(0.0);
        for (i, (am, vm)) in res.iter().enumerate() {
            a.coeffs_mut(0)[i] = *am;
            for c in 0..d {
                v.coeffs_mut(c)[i] = vm[c];
            }
        }
        (a, v)
    }
}

fn apply_mode(m: &ModeCoef, which: usize, x: Modal, d: usize) -> Modal {
    let (a, v) = x;
    let mut q = Complex64::default();
    for c in 0..d {
        q += m.khat[c] * v[c];
    }
    let (a2, q2) = m.block[which].apply(a, q);
    let t = m.trans[which];
    let mut out = [Complex64::default(); 3];
    for c in 0..d {
        out[c] = t * (v[c] - m.khat[c] * q) + m.khat[c] * q2;
    }
    (a2, out)
}

/// One step of the full compressible system.
pub fn step_cns(state: &FlowState, params: &PhysicalParams, dt: f64) -> Result<FlowState> {
    CnsStepper::new(state.a.grid(), *params).step(state, dt)
}

/// One step of the system with every nonlinear term removed.
pub fn step_cns_linear(state: &FlowState, params: &PhysicalParams, dt: f64) -> Result<FlowState> {
    CnsStepper::new(state.a.grid(), *params).linear_only().step(state, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::leray_project;
    use crate::solvers::expint::acoustic_eigenvalues;
    use crate::spectral::random::{random_field, RandomSpec};
    use crate::spectral::Rank;

    fn grid(n: usize) -> Grid {
        Grid::new(2, n).unwrap()
    }

    #[test]
    fn pressure_examples() {
        let g = grid(16);
        let a = SpectralField::from_fn(&g, |x| 0.3 * x[0].cos());
        let (p, k) = pressure_terms(&a, 1.0).unwrap();
        assert!(p.max_diff(&a) < 1e-15);
        assert!(k.max_abs_coeff() < 1e-15);
        let (_, k) = pressure_terms(&a, 2.0).unwrap();
        assert!(k.max_diff(&a) < 1e-15);
        let vac = SpectralField::from_fn(&g, |x| -x[0].cos());
        assert!(matches!(pressure_terms(&vac, 1.4), Err(Error::Vacuum { .. })));
    }

    #[test]
    fn zero_state_is_fixed() {
        let g = grid(16);
        let p = PhysicalParams::new(1.0, 3.0, 1.4).unwrap();
        let s = step_cns(&FlowState::zero(&g), &p, 0.1).unwrap();
        assert_eq!(s.a.max_abs_coeff(), 0.0);
        assert_eq!(s.v.max_abs_coeff(), 0.0);
    }

    /// Eigen-decomposition oracle for the damped acoustic mode at k = (1, 0).
    #[test]
    fn linear_acoustic_mode() {
        let g = grid(16);
        let nu = 3.0;
        let p = PhysicalParams::with_nu(1.0, nu, 1.0).unwrap();
        let eps = 0.01;
        let a = SpectralField::from_fn(&g, |x| eps * x[0].cos());
        let s0 = FlowState::new(a, SpectralField::zeros(&g, Rank::Vector), 0.0).unwrap();
        let dt = 0.37;
        let s1 = step_cns_linear(&s0, &p, dt).unwrap();
        let (lp, lm) = acoustic_eigenvalues(1.0, nu);
        // A = [[0,-i],[-i,-ν]]; eigenvectors (1, iλ) since -i q = λ a
        let ev = |l: Complex64| (Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0) * l);
        let (e1, e2) = (ev(lp), ev(lm));
        let a0 = Complex64::new(eps / 2.0, 0.0);
        // a0 = c1 + c2, 0 = c1 e1.q + c2 e2.q
        let c1 = a0 * e2.1 / (e2.1 - e1.1);
        let c2 = a0 - c1;
        let at = c1 * (lp * dt).exp() + c2 * (lm * dt).exp();
        let qt = c1 * e1.1 * (lp * dt).exp() + c2 * e2.1 * (lm * dt).exp();
        let idx = g.index_of([1, 0, 0]);
        assert!((s1.a.coeffs(0)[idx] - at).norm() < 1e-10 * eps);
        assert!((s1.v.coeffs(0)[idx] - qt).norm() < 1e-10 * eps);
        assert!(s1.v.coeffs(1)[idx].norm() < 1e-16);
    }

    #[test]
    fn propagator_eigenvalues_every_mode() {
        let g = grid(32);
        for nu in [0.5, 2.0, 10.0, 640.0] {
            let p = PhysicalParams::with_nu(0.2, nu, 1.4).unwrap();
            let mut st = CnsStepper::new(&g, p);
            let dt = 1e-3;
            for idx in 0..g.len() {
                if g.is_nyquist(idx) || idx == 0 {
                    continue;
                }
                let kappa = g.kmag(idx);
                let m = st.acoustic_propagator(idx, dt).entries();
                let tr = m[0][0] + m[1][1];
                let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
                let (lp, lm) = acoustic_eigenvalues(kappa, nu);
                let (ep, em) = ((lp * dt).exp(), (lm * dt).exp());
                // trace and determinant fix the spectrum and stay well
                // conditioned at critical damping
                assert!((tr - (ep + em)).norm() < 1e-12, "ν={nu} κ={kappa}");
                assert!((det - ep * em).norm() < 1e-12, "ν={nu} κ={kappa}");
                let disc = (tr * tr - 4.0 * det).sqrt();
                if disc.norm() < 1e-4 {
                    continue;
                }
                let (mu1, mu2) = ((tr + disc) / 2.0, (tr - disc) / 2.0);
                let err = ((mu1 - ep).norm() + (mu2 - em).norm())
                    .min((mu1 - em).norm() + (mu2 - ep).norm());
                assert!(err < 1e-12, "ν={nu} κ={kappa} err={err:e}");
            }
        }
    }

    #[test]
    fn mass_conserved() {
        let g = grid(32);
        let p = PhysicalParams::with_nu(1.0, 5.0, 1.4).unwrap();
        let a = &random_field(&g, Rank::Scalar, 1, &RandomSpec::band_limited(6.0)).scale(0.05)
            + &SpectralField::constant(&g, 0.02);
        let v = random_field(&g, Rank::Vector, 2, &RandomSpec::band_limited(6.0)).scale(0.3);
        let mut s = FlowState::new(a, v, 0.0).unwrap();
        let m0 = s.a.mean_scalar();
        let mut st = CnsStepper::new(&g, p);
        for _ in 0..1000 {
            s = st.step(&s, 2e-3).unwrap();
        }
        assert!((s.a.mean_scalar() - m0).abs() <= 1e-12);
    }

    /// Small divergence-free data: the compressible step agrees with the
    /// incompressible one up to quadratic terms in the amplitude.
    #[test]
    fn matches_incompressible_at_small_amplitude() {
        let g = grid(32);
        let p = PhysicalParams::with_nu(1.0, 20.0, 1.4).unwrap();
        let base = leray_project(&random_field(&g, Rank::Vector, 3, &RandomSpec::band_limited(5.0))).unwrap();
        let mut prev = None;
        for amp in [1e-3, 1e-4] {
            let v = base.scale(amp);
            let s = step_cns(&FlowState::new(SpectralField::zeros(&g, Rank::Scalar), v.clone(), 0.0).unwrap(), &p, 0.01)
                .unwrap();
            let w = crate::solvers::step_ins(&v, 1.0, 0.01).unwrap();
            let diff = s.v.l2_diff(&w) + s.a.l2();
            if let Some(d0) = prev {
                // quadratic: 10× smaller amplitude, 100× smaller difference
                let ratio: f64 = d0 / diff;
                assert!(ratio > 80.0 && ratio < 120.0, "ratio {ratio}");
            }
            prev = Some(diff);
        }
    }
}
