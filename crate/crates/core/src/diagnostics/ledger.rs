use crate::calculus::{compressible_project, leray_project};
use crate::error::{Error, Result};
use crate::littlewood_paley::{BesovIndex, DyadicBands};
use crate::par;
use crate::solvers::{FlowTrajectory, InsTrajectory, PhysicalParams};
use crate::spectral::SpectralField;

use super::sources::check_times;
use super::time_derivative;

/// Ledger values over `[0, t]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub w: f64,
    pub vcal: f64,
}

#[derive(Debug, Clone)]
pub struct NormLedger {
    pub rows: Vec<LedgerRow>,
    /// `M` over the stored horizon.
    pub m: f64,
    /// Left side of the smallness condition on the data (with `C = 1`).
    pub smallness_lhs: f64,
    /// `√(μν) exp(-(M + M²))`.
    pub smallness_threshold: f64,
    pub warnings: Vec<String>,
}

impl NormLedger {
    /// `smallness_lhs / smallness_threshold`; below 1 means the data sit
    /// inside the (unit-constant) smallness region.
    pub fn smallness_ratio(&self) -> f64 {
        self.smallness_lhs / self.smallness_threshold
    }

    /// Rows as `t,X,Y,Z,W` CSV.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,X,Y,Z,W\n");
        for r in &self.rows {
            s.push_str(&format!("{:.6},{:.12e},{:.12e},{:.12e},{:.12e}\n", r.t, r.x, r.y, r.z, r.w));
        }
        s
    }
}

/// Whether `p` lies in `2 ≤ p < 4` (d = 2) or `2 ≤ p ≤ min(4, 2d/(d-2))`.
pub fn integrability_in_range(d: usize, p: f64) -> bool {
    if d == 2 {
        (2.0..4.0).contains(&p)
    } else {
        let hi = 4.0f64.min(2.0 * d as f64 / (d as f64 - 2.0));
        p >= 2.0 && p <= hi
    }
}

fn running_sup(v: &[f64]) -> Vec<f64> {
    let mut m = 0.0f64;
    v.iter()
        .map(|x| {
            m = m.max(*x);
            m
        })
        .collect()
}

fn running_integral(t: &[f64], v: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(v.len());
    out.push(0.0);
    for i in 1..v.len() {
        acc += 0.5 * (t[i] - t[i - 1]) * (v[i] + v[i - 1]);
        out.push(acc);
    }
    out
}

/// Instantaneous integrands at one snapshot.
#[derive(Default, Clone, Copy)]
struct Instant {
    x_low: f64,
    x_a_high: f64,
    x_q_high: f64,
    y: f64,
    z: f64,
    w: f64,
    v_sup: f64,
    v_grad: f64,
    v_t: f64,
}

struct Indices {
    low_m1: BesovIndex,
    low_p1: BesovIndex,
    crit: BesovIndex,
    m1: BesovIndex,
    p1: BesovIndex,
}

impl Indices {
    fn new(d: f64, p: f64) -> Result<Self> {
        Ok(Self {
            low_m1: BesovIndex::new(-1.0 + d / 2.0, 2.0, 1.0)?,
            low_p1: BesovIndex::new(1.0 + d / 2.0, 2.0, 1.0)?,
            crit: BesovIndex::new(d / p, p, 1.0)?,
            m1: BesovIndex::new(-1.0 + d / p, p, 1.0)?,
            p1: BesovIndex::new(1.0 + d / p, p, 1.0)?,
        })
    }
}

/// Time-resolved `X, Y, Z, W, 𝒱` for a compressible run and its
/// incompressible reference, plus `M` and the smallness scalar.
///
/// Each tuple is normed as the sum of its components at a fixed time; time
/// norms are plain Lebesgue norms (trapezoid for `L¹`, max over snapshots
/// for `L^∞`), and the low/high split is at `2^j ν ≤ 1`.
pub fn norm_ledger(
    cns: &FlowTrajectory,
    ins: &InsTrajectory,
    params: &PhysicalParams,
    p: f64,
    bands: &DyadicBands,
) -> Result<NormLedger> {
    check_times(&cns.times, &ins.times)?;
    if cns.times.len() < 2 {
        return Err(Error::InvalidParameter("norm ledger needs at least 2 snapshots".into()));
    }
    let d = bands.grid().dim();
    let mut warnings = Vec::new();
    if !integrability_in_range(d, p) {
        warnings.push(format!("p = {p} is outside the admissible range for d = {d}"));
    }
    let ix = Indices::new(d as f64, p)?;
    let (nu, mu) = (params.nu(), params.mu);
    let times = &cns.times;
    let a: Vec<SpectralField> = cns.states.iter().map(|s| s.a.clone()).collect();
    let u: Vec<SpectralField> = cns.states.iter().zip(&ins.fields).map(|(s, v)| &s.v - v).collect();
    let pu = u.iter().map(leray_project).collect::<Result<Vec<_>>>()?;
    let qu = u.iter().map(compressible_project).collect::<Result<Vec<_>>>()?;
    let qu_t = time_derivative(times, &qu)?;
    let pu_t = time_derivative(times, &pu)?;
    let vv_t = time_derivative(times, &ins.fields)?;

    let inst = par::map_range(times.len(), |i| -> Result<Instant> {
        let b = |f: &SpectralField, idx: BesovIndex| bands.besov_norm(f, idx);
        let (a_l, a_h) = bands.split_low_high(&a[i], nu)?;
        let (q_l, q_h) = bands.split_low_high(&qu[i], nu)?;
        let ga_l = a_l.gradient()?;
        let damp = &qu_t[i] + &a[i].gradient()?;
        let (d_l, d_h) = bands.split_low_high(&damp, nu)?;
        let v = &ins.fields[i];
        Ok(Instant {
            x_low: b(&a_l, ix.low_m1)? + nu * b(&ga_l, ix.low_m1)? + b(&q_l, ix.low_m1)?,
            x_a_high: nu * b(&a_h, ix.crit)?,
            x_q_high: b(&q_h, ix.m1)?,
            y: nu * b(&a_l, ix.low_p1)?
                + nu * nu * b(&ga_l, ix.low_p1)?
                + nu * b(&q_l, ix.low_p1)?
                + b(&a_h, ix.crit)?
                + nu * b(&q_h, ix.p1)?
                + b(&d_l, ix.low_m1)?
                + b(&d_h, ix.m1)?,
            z: b(&pu[i], ix.m1)?,
            w: b(&pu_t[i], ix.m1)? + b(&pu[i], ix.p1)?,
            v_sup: b(v, ix.m1)?,
            v_grad: b(v, ix.p1)?,
            v_t: b(&vv_t[i], ix.m1)?,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let col = |f: fn(&Instant) -> f64| inst.iter().map(f).collect::<Vec<f64>>();
    let x_low = running_sup(&col(|s| s.x_low));
    let x_ah = running_sup(&col(|s| s.x_a_high));
    let x_qh = running_sup(&col(|s| s.x_q_high));
    let y = running_integral(times, &col(|s| s.y));
    let z = running_sup(&col(|s| s.z));
    let w = running_integral(times, &col(|s| s.w));
    let v_sup = running_sup(&col(|s| s.v_sup));
    let v_grad = running_integral(times, &col(|s| s.v_grad));
    let v_t = running_integral(times, &col(|s| s.v_t));
    let rows = (0..times.len())
        .map(|i| LedgerRow {
            t: times[i],
            x: x_low[i] + x_ah[i] + x_qh[i],
            y: y[i],
            z: z[i],
            w: w[i],
            vcal: v_sup[i] + v_t[i] + v_grad[i],
        })
        .collect();
    let last = times.len() - 1;
    let m = v_sup[last] + mu * v_grad[last] + v_t[last];

    let (a0_l, a0_h) = bands.split_low_high(&a[0], nu)?;
    let v0 = &cns.states[0].v;
    let (q0_l, q0_h) = bands.split_low_high(&compressible_project(v0)?, nu)?;
    let half = BesovIndex::new(d as f64 / 2.0, 2.0, 1.0)?;
    let smallness_lhs = bands.besov_norm(&a0_l, ix.low_m1)?
        + nu * bands.besov_norm(&a0_l, half)?
        + nu * bands.besov_norm(&a0_h, ix.crit)?
        + bands.besov_norm(&q0_l, ix.low_m1)?
        + bands.besov_norm(&q0_h, ix.m1)?
        + m * m
        + mu * mu;
    let smallness_threshold = (mu * nu).sqrt() * (-(m + m * m)).exp();
    Ok(NormLedger {
        rows,
        m,
        smallness_lhs,
        smallness_threshold,
        warnings,
    })
}

/// The four blocks of the incompressible-limit error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitError {
    /// `√(ν/μ) sup_t ‖a‖_{Ḃ^{d/p}_{p,1}}`.
    pub density: f64,
    /// `sup_t ‖Pv - V‖_{Ḃ^{-1+d/p}_{p,1}}`.
    pub sup: f64,
    /// `μ ∫ ‖Pv - V‖_{Ḃ^{1+d/p}_{p,1}}`.
    pub grad_l1: f64,
    /// `∫ ‖(Pv - V)_t‖_{Ḃ^{-1+d/p}_{p,1}}`.
    pub dt_l1: f64,
}

impl LimitError {
    pub fn blocks(&self) -> [f64; 4] {
        [self.density, self.sup, self.grad_l1, self.dt_l1]
    }

    pub fn total(&self) -> f64 {
        self.blocks().iter().sum()
    }
}

/// Distance between a compressible run started from `a₀ = 0` and the
/// incompressible run from the projected data.
pub fn limit_error(
    cns: &FlowTrajectory,
    ins: &InsTrajectory,
    p: f64,
    bands: &DyadicBands,
    mu: f64,
    nu: f64,
) -> Result<LimitError> {
    check_times(&cns.times, &ins.times)?;
    if cns.times.len() < 2 {
        return Err(Error::InvalidParameter("limit error needs at least 2 snapshots".into()));
    }
    if !(mu > 0.0) || !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!("μ and ν must be positive, got {mu}, {nu}")));
    }
    let a0 = cns.states[0].a.max_abs_coeff();
    if a0 > 0.0 {
        return Err(Error::InvalidParameter(format!("initial density deviation must vanish, got max |â₀| = {a0:e}")));
    }
    let d = bands.grid().dim() as f64;
    let ix = Indices::new(d, p)?;
    let times = &cns.times;
    let e = cns
        .states
        .iter()
        .zip(&ins.fields)
        .map(|(s, v)| Ok(&leray_project(&s.v)? - v))
        .collect::<Result<Vec<_>>>()?;
    let e_t = time_derivative(times, &e)?;
    let per = par::map_range(times.len(), |i| -> Result<[f64; 4]> {
        Ok([
            bands.besov_norm(&cns.states[i].a, ix.crit)?,
            bands.besov_norm(&e[i], ix.m1)?,
            bands.besov_norm(&e[i], ix.p1)?,
            bands.besov_norm(&e_t[i], ix.m1)?,
        ])
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let col = |k: usize| per.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let sup = |v: Vec<f64>| v.into_iter().fold(0.0, f64::max);
    let int = |v: Vec<f64>| *running_integral(times, &v).last().unwrap();
    Ok(LimitError {
        density: (nu / mu).sqrt() * sup(col(0)),
        sup: sup(col(1)),
        grad_l1: mu * int(col(2)),
        dt_l1: int(col(3)),
    })
}
