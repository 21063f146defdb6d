use crate::calculus::{compressible_project, leray_project};
use crate::error::{Error, Result};
use crate::littlewood_paley::{BesovIndex, DyadicBands};
use crate::solvers::{pressure_terms, FlowTrajectory, InsTrajectory, PhysicalParams};
use crate::spectral::{advect, product_dealiased, SpectralField};

use super::time_derivative;

/// Fields entering `H₁` and `H₂` at one instant.
#[derive(Debug, Clone, Copy)]
pub struct SourceInputs<'a> {
    pub a: &'a SpectralField,
    /// `u = v - V`.
    pub u: &'a SpectralField,
    pub big_v: &'a SpectralField,
    pub big_v_t: &'a SpectralField,
    pub pu_t: &'a SpectralField,
    pub qu_t: &'a SpectralField,
}

impl SourceInputs<'_> {
    fn check(&self) -> Result<()> {
        self.a.require_scalar("density must be a scalar field")?;
        for f in [self.u, self.big_v, self.big_v_t, self.pu_t, self.qu_t] {
            f.require_vector("velocity inputs must be vector fields")?;
            self.a.check_same_grid(f)?;
        }
        Ok(())
    }
}

/// `(1 + a) X`, dealiased.
fn one_plus(a: &SpectralField, x: &SpectralField) -> Result<SpectralField> {
    Ok(x + &product_dealiased(a, x)?)
}

/// `a (V_t + Pu_t + (Qu_t + ∇a))`, shared by both source terms.
fn time_term(s: &SourceInputs) -> Result<SpectralField> {
    let inner = &(&(s.big_v_t + s.pu_t) + s.qu_t) + &s.a.gradient()?;
    product_dealiased(s.a, &inner)
}

/// The three terms of `H₁`.
#[derive(Debug, Clone)]
pub struct H1Terms {
    pub terms: [SpectralField; 3],
}

/// The six terms of `H₂`.
#[derive(Debug, Clone)]
pub struct H2Terms {
    pub terms: [SpectralField; 6],
}

fn sum_all(terms: &[SpectralField]) -> SpectralField {
    let mut acc = terms[0].clone();
    for t in &terms[1..] {
        acc = &acc + t;
    }
    acc
}

impl H1Terms {
    pub fn sum(&self) -> SpectralField {
        sum_all(&self.terms)
    }

    /// Term `n`, counted from 1.
    pub fn term(&self, n: usize) -> &SpectralField {
        &self.terms[n - 1]
    }
}

impl H2Terms {
    pub fn sum(&self) -> SpectralField {
        sum_all(&self.terms)
    }

    /// Term `n`, counted from 1.
    pub fn term(&self, n: usize) -> &SpectralField {
        &self.terms[n - 1]
    }
}

/// `H₁ = a(V_t + Pu_t + (Qu_t + ∇a)) + (1+a)(u+V)·∇(u+V) + (k(a) - a)∇a`.
pub fn assemble_h1(s: &SourceInputs, params: &PhysicalParams) -> Result<H1Terms> {
    s.check()?;
    let w = s.u + s.big_v;
    let t1 = time_term(s)?;
    let t2 = one_plus(s.a, &advect(&w, &w)?)?;
    let (_, k) = pressure_terms(s.a, params.gamma)?;
    let t3 = product_dealiased(&(&k - s.a), &s.a.gradient()?)?;
    Ok(H1Terms { terms: [t1, t2, t3] })
}

/// `H₂` term by term:
/// `a(V_t + Pu_t + (Qu_t + ∇a))`, `(1+a) Pu·∇(V + Qu)`, `a (u+V)·∇Pu`,
/// `(u+V)·∇Pu`, `(1+a)(V·∇Qu + Qu·∇V)`, `a (Qu·∇Qu + V·∇V)`.
pub fn assemble_h2(s: &SourceInputs) -> Result<H2Terms> {
    s.check()?;
    let pu = leray_project(s.u)?;
    let qu = compressible_project(s.u)?;
    let w = s.u + s.big_v;
    let t1 = time_term(s)?;
    let t2 = one_plus(s.a, &advect(&pu, &(s.big_v + &qu))?)?;
    let w_pu = advect(&w, &pu)?;
    let t3 = product_dealiased(s.a, &w_pu)?;
    let t4 = w_pu;
    let t5 = one_plus(s.a, &(&advect(s.big_v, &qu)? + &advect(&qu, s.big_v)?))?;
    let t6 = product_dealiased(s.a, &(&advect(&qu, &qu)? + &advect(s.big_v, s.big_v)?))?;
    Ok(H2Terms {
        terms: [t1, t2, t3, t4, t5, t6],
    })
}

/// Residual norms of the split system at one snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRow {
    pub t: f64,
    /// `a_t + div Qu + div(a(u+V))`.
    pub mass: f64,
    /// `(Qu)_t - νΔQu + ∇a + Q H₁`.
    pub compressible: f64,
    /// `(Pu)_t - μΔPu + P H₂`.
    pub incompressible: f64,
}

pub(crate) fn check_times(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() || a.iter().zip(b).any(|(x, y)| (x - y).abs() > 1e-12 * x.abs().max(1.0)) {
        return Err(Error::TrajectoryMismatch(format!(
            "snapshot times differ ({} vs {} snapshots)",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// Evaluate the compressible and incompressible parts of the split system on
/// stored trajectories, with time derivatives from snapshot differences.
/// Residuals are measured in `Ḃ^{-1+d/p}_{p,1}`.
pub fn decomposition_residual(
    cns: &FlowTrajectory,
    ins: &InsTrajectory,
    params: &PhysicalParams,
    p: f64,
    bands: &DyadicBands,
) -> Result<Vec<ResidualRow>> {
    check_times(&cns.times, &ins.times)?;
    let d = bands.grid().dim() as f64;
    let idx = BesovIndex::new(-1.0 + d / p, p, 1.0)?;
    let a: Vec<SpectralField> = cns.states.iter().map(|s| s.a.clone()).collect();
    let u: Vec<SpectralField> = cns.states.iter().zip(&ins.fields).map(|(s, v)| &s.v - v).collect();
    let pu = u.iter().map(leray_project).collect::<Result<Vec<_>>>()?;
    let qu = u.iter().map(compressible_project).collect::<Result<Vec<_>>>()?;
    let a_t = time_derivative(&cns.times, &a)?;
    let pu_t = time_derivative(&cns.times, &pu)?;
    let qu_t = time_derivative(&cns.times, &qu)?;
    let vv_t = time_derivative(&cns.times, &ins.fields)?;
    let mut rows = Vec::with_capacity(a.len());
    for i in 0..a.len() {
        let s = SourceInputs {
            a: &a[i],
            u: &u[i],
            big_v: &ins.fields[i],
            big_v_t: &vv_t[i],
            pu_t: &pu_t[i],
            qu_t: &qu_t[i],
        };
        let w = &u[i] + &ins.fields[i];
        let mass = &(&a_t[i] + &qu[i].divergence()?) + &product_dealiased(&a[i], &w)?.divergence()?;
        let h1 = assemble_h1(&s, params)?.sum();
        let comp = &(&(&qu_t[i] - &qu[i].laplacian().scale(params.nu())) + &a[i].gradient()?)
            + &compressible_project(&h1)?;
        let h2 = assemble_h2(&s)?.sum();
        let incomp = &(&pu_t[i] - &pu[i].laplacian().scale(params.mu)) + &leray_project(&h2)?;
        rows.push(ResidualRow {
            t: cns.times[i],
            mass: bands.besov_norm(&mass, idx)?,
            compressible: bands.besov_norm(&comp, idx)?,
            incompressible: bands.besov_norm(&incomp, idx)?,
        });
    }
    Ok(rows)
}
