use std::fmt;

use super::compressible::CnsStepper;
use super::incompressible::InsStepper;
use super::{FlowState, PhysicalParams, StepperConfig};
use crate::calculus::leray_project;
use crate::error::{Error, Result};
use crate::spectral::norms::pointwise_magnitude;
use crate::spectral::{inverse_transform, SpectralField};

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    Start,
    Snapshot,
    Vacuum { min_density: f64 },
    BlowUp { reason: String },
    Horizon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t={} event=", self.t)?;
        match &self.kind {
            EventKind::Start => write!(f, "start"),
            EventKind::Snapshot => write!(f, "snapshot"),
            EventKind::Vacuum { min_density } => write!(f, "vacuum min_density={min_density}"),
            EventKind::BlowUp { reason } => write!(f, "blowup reason={reason}"),
            EventKind::Horizon => write!(f, "horizon"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Horizon,
    BlowUp { t: f64, reason: String },
}

impl Termination {
    pub fn is_blowup(&self) -> bool {
        matches!(self, Termination::BlowUp { .. })
    }
}

/// Stored compressible run.
#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<FlowState>,
    pub events: Vec<Event>,
    pub termination: Termination,
    pub steps: usize,
}

/// Stored incompressible run.
#[derive(Debug, Clone)]
pub struct InsTrajectory {
    pub times: Vec<f64>,
    pub fields: Vec<SpectralField>,
    pub events: Vec<Event>,
    pub termination: Termination,
    pub steps: usize,
}

/// `0, Δ, 2Δ, …` up to and including `horizon`.
pub fn snapshot_times(interval: f64, horizon: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    let mut k = 1u64;
    loop {
        let t = k as f64 * interval;
        if t >= horizon * (1.0 - 1e-12) {
            break;
        }
        out.push(t);
        k += 1;
    }
    if horizon > 0.0 {
        out.push(horizon);
    }
    out
}

fn max_speed(v: &SpectralField) -> f64 {
    pointwise_magnitude(v).into_iter().fold(0.0, f64::max)
}

/// Reason to stop, judged on physical samples.
fn health(state: &FlowState, cfg: &StepperConfig) -> Option<EventKind> {
    let a = inverse_transform(&state.a).pop().expect("scalar");
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for &x in &a {
        if !x.is_finite() {
            return Some(EventKind::BlowUp {
                reason: "non-finite density".into(),
            });
        }
        lo = lo.min(x);
        hi = hi.max(x.abs());
    }
    if 1.0 + lo <= cfg.vacuum_floor {
        return Some(EventKind::Vacuum { min_density: 1.0 + lo });
    }
    if hi > cfg.max_density_deviation {
        return Some(EventKind::BlowUp {
            reason: format!("max|a|={hi}"),
        });
    }
    let s = max_speed(&state.v);
    if !s.is_finite() || s > cfg.max_velocity {
        return Some(EventKind::BlowUp {
            reason: format!("max|v|={s}"),
        });
    }
    None
}

fn termination_of(kind: &EventKind, t: f64) -> Termination {
    let reason = match kind {
        EventKind::Vacuum { min_density } => format!("vacuum min_density={min_density}"),
        EventKind::BlowUp { reason } => reason.clone(),
        _ => unreachable!("only failures terminate early"),
    };
    Termination::BlowUp { t, reason }
}

fn advective_dt(speed: f64, dx: f64, cfg: &StepperConfig) -> f64 {
    let adv = if speed > 0.0 { cfg.cfl * dx / speed } else { f64::INFINITY };
    adv.min(cfg.dt_max)
}

/// Next step length, clipped to land on `next_snapshot`.
fn clip(dt: f64, t: f64, next: f64) -> f64 {
    let rest = next - t;
    if dt >= rest * (1.0 - 1e-9) {
        rest
    } else {
        dt
    }
}

/// Integrate the compressible system to `horizon`, storing snapshots every
/// `cfg.snapshot_interval`. Failures of the guards end the run and are
/// reported in [`FlowTrajectory::termination`].
pub fn run(
    initial: &FlowState,
    params: &PhysicalParams,
    cfg: &StepperConfig,
    horizon: f64,
) -> Result<FlowTrajectory> {
    cfg.validate()?;
    if !(horizon >= 0.0) {
        return Err(Error::InvalidParameter(format!("horizon must be nonnegative, got {horizon}")));
    }
    let grid = initial.a.grid().clone();
    let dx = grid.spacing();
    let nu = params.nu();
    let mut stepper = CnsStepper::new(&grid, *params);
    let mut state = FlowState::new(initial.a.clone(), initial.v.clone(), 0.0)?;
    let targets = snapshot_times(cfg.snapshot_interval, horizon);
    let mut traj = FlowTrajectory {
        times: vec![0.0],
        states: vec![state.clone()],
        events: vec![Event { t: 0.0, kind: EventKind::Start }],
        termination: Termination::Horizon,
        steps: 0,
    };
    if let Some(kind) = health(&state, cfg) {
        traj.termination = termination_of(&kind, 0.0);
        traj.events.push(Event { t: 0.0, kind });
        return Ok(traj);
    }
    for (n, &target) in targets.iter().enumerate().skip(1) {
        while state.t < target {
            let a_s = inverse_transform(&state.a.truncated()).pop().expect("scalar");
            let gmax = a_s.iter().map(|x| (x / (1.0 + x)).abs()).fold(0.0, f64::max);
            let kmax2 = grid.dim() as f64 * (grid.n() as f64 / 3.0).powi(2);
            // explicit density-weighted viscous term
            let visc_dt = if gmax > 0.0 {
                cfg.cfl / (gmax * (nu + params.mu) * kmax2)
            } else {
                f64::INFINITY
            };
            let dt = advective_dt(max_speed(&state.v), dx, cfg)
                .min(cfg.layer_ratio * (state.t + 1.0 / nu))
                .min(visc_dt);
            let dt = clip(dt, state.t, target);
            let next = match stepper.step(&state, dt) {
                Ok(s) => s,
                Err(Error::Vacuum { min_density }) => {
                    let kind = EventKind::Vacuum { min_density };
                    traj.termination = termination_of(&kind, state.t);
                    traj.events.push(Event { t: state.t, kind });
                    return Ok(traj);
                }
                Err(e) => return Err(e),
            };
            state = next;
            traj.steps += 1;
            if (state.t - target).abs() <= 1e-12 * target.max(1.0) {
                state.t = target;
            }
            if let Some(kind) = health(&state, cfg) {
                traj.termination = termination_of(&kind, state.t);
                traj.events.push(Event { t: state.t, kind });
                return Ok(traj);
            }
        }
        traj.times.push(target);
        traj.states.push(state.clone());
        let kind = if n + 1 == targets.len() {
            EventKind::Horizon
        } else {
            EventKind::Snapshot
        };
        traj.events.push(Event { t: target, kind });
    }
    Ok(traj)
}

/// Integrate incompressible Navier-Stokes from `P v0` to `horizon`.
pub fn run_ins(v0: &SpectralField, mu: f64, cfg: &StepperConfig, horizon: f64) -> Result<InsTrajectory> {
    cfg.validate()?;
    let grid = v0.grid().clone();
    let dx = grid.spacing();
    let mut stepper = InsStepper::new(&grid, mu)?;
    let mut v = leray_project(&v0.without_nyquist())?;
    let mut t = 0.0;
    let targets = snapshot_times(cfg.snapshot_interval, horizon);
    let mut traj = InsTrajectory {
        times: vec![0.0],
        fields: vec![v.clone()],
        events: vec![Event { t: 0.0, kind: EventKind::Start }],
        termination: Termination::Horizon,
        steps: 0,
    };
    for (n, &target) in targets.iter().enumerate().skip(1) {
        while t < target {
            let dt = clip(advective_dt(max_speed(&v), dx, cfg), t, target);
            v = stepper.step(&v, dt)?;
            t += dt;
            traj.steps += 1;
            if (t - target).abs() <= 1e-12 * target.max(1.0) {
                t = target;
            }
            let s = max_speed(&v);
            if !s.is_finite() || s > cfg.max_velocity {
                let kind = EventKind::BlowUp {
                    reason: format!("max|v|={s}"),
                };
                traj.termination = termination_of(&kind, t);
                traj.events.push(Event { t, kind });
                return Ok(traj);
            }
        }
        traj.times.push(target);
        traj.fields.push(v.clone());
        let kind = if n + 1 == targets.len() {
            EventKind::Horizon
        } else {
            EventKind::Snapshot
        };
        traj.events.push(Event { t: target, kind });
    }
    Ok(traj)
}

/// `steps` compressible steps of fixed length `dt`.
pub fn integrate_fixed(stepper: &mut CnsStepper, state: &FlowState, dt: f64, steps: usize) -> Result<FlowState> {
    let mut s = state.clone();
    for _ in 0..steps {
        s = stepper.step(&s, dt)?;
    }
    Ok(s)
}
