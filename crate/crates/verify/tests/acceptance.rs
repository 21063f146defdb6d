//! One line per acceptance criterion, then a nonzero exit if any failed.

use std::fs;
use std::path::Path;

use nslimit::{cmd_sweep, RunConfig};
use nslimit_core::calculus::{compressible_project, leray_project, paraproduct, remainder};
use nslimit_core::lemmas::{check_oscillatory_scaling, run_all, LemmaConfig, LemmaReport};
use nslimit_core::littlewood_paley::build_partition;
use nslimit_core::solvers::expint::{acoustic_block, acoustic_eigenvalues};
use nslimit_core::solvers::{integrate_fixed, run_ins, CnsStepper, FlowState, PhysicalParams, StepperConfig};
use nslimit_core::spectral::random::{random_field, RandomSpec};
use nslimit_core::spectral::{
    forward_transform, inverse_transform, product_dealiased, Grid, Rank, SpectralField,
};

const SWEEP_CONFIG: &str = "\
d = 2
n = 64
mu = 1
gamma = 2
initial = taylor_green
perturbation = 0.3
density_amplitude = 0
horizon = 2
snapshot_stride = 0.02
dt_max = 0.005
nu_list = 10, 40, 160, 640
p = 2
seed = 1
";

struct Outcome {
    failed: Vec<String>,
}

impl Outcome {
    fn record(&mut self, id: &str, pass: bool, detail: String) {
        println!("criterion {id}: {} {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed.push(id.to_string());
        }
    }
}

struct SweepRow {
    nu: f64,
    blocks: [f64; 4],
}

fn run_sweep(dir: &Path) -> Result<(), String> {
    let mut cfg = RunConfig::parse(SWEEP_CONFIG).map_err(|e| e.to_string())?;
    cfg.output_dir = dir.join("out");
    cmd_sweep(&cfg).map(|_| ()).map_err(|e| format!("sweep failed: {e}"))
}

fn parse_sweep(dir: &Path) -> Result<(Vec<SweepRow>, f64), String> {
    let csv = fs::read_to_string(dir.join("out/sweep.csv")).map_err(|e| e.to_string())?;
    let mut rows = Vec::new();
    for line in csv.lines().skip(1) {
        let v: Vec<f64> = line
            .split(',')
            .map(|s| s.parse::<f64>().map_err(|e| format!("{line}: {e}")))
            .collect::<Result<_, _>>()?;
        if v.len() != 5 {
            return Err(format!("malformed row {line}"));
        }
        rows.push(SweepRow {
            nu: v[0],
            blocks: [v[1], v[2], v[3], v[4]],
        });
    }
    let fit = fs::read_to_string(dir.join("out/fit.txt")).map_err(|e| e.to_string())?;
    let slope = fit
        .lines()
        .find_map(|l| l.strip_prefix("slope = "))
        .ok_or("fit.txt has no slope")?
        .trim()
        .parse::<f64>()
        .map_err(|e| e.to_string())?;
    Ok((rows, slope))
}

fn rel(a: &SpectralField, b: &SpectralField) -> f64 {
    a.max_diff(b) / b.max_abs_coeff().max(f64::MIN_POSITIVE)
}

fn partition_of_unity() -> f64 {
    let mut worst = 0.0f64;
    for (d, n) in [(2, 64), (3, 16)] {
        let g = Grid::new(d, n).unwrap();
        let b = build_partition(&g);
        let tables: Vec<&[f64]> = b.bands().map(|j| b.phi_table(j).unwrap()).collect();
        for idx in 1..g.len() {
            let s: f64 = tables.iter().map(|t| t[idx]).sum();
            worst = worst.max((s - 1.0).abs());
        }
    }
    worst
}

fn projector_algebra() -> f64 {
    let mut worst = 0.0f64;
    for (d, n) in [(2, 32), (3, 16)] {
        let g = Grid::new(d, n).unwrap();
        let mean = SpectralField::vector_from_fn(&g, |_, c| 0.2 * (c as f64 + 1.0));
        for seed in 0..100 {
            let v = &random_field(&g, Rank::Vector, seed, &RandomSpec::default()) + &mean;
            let p = leray_project(&v).unwrap();
            let q = compressible_project(&v).unwrap();
            let m = v.max_abs_coeff();
            worst = worst
                .max(leray_project(&p).unwrap().max_diff(&p) / m)
                .max(compressible_project(&q).unwrap().max_diff(&q) / m)
                .max(compressible_project(&p).unwrap().max_abs_coeff() / m)
                .max(leray_project(&q).unwrap().max_abs_coeff() / m)
                .max((&p + &q).max_diff(&v) / m)
                .max(p.divergence().unwrap().max_abs_coeff() / m)
                .max(q.curl().unwrap().max_abs_coeff() / m);
        }
    }
    worst
}

fn bony_reconstruction() -> f64 {
    let mut worst = 0.0f64;
    for (d, n) in [(2, 64), (3, 16)] {
        let g = Grid::new(d, n).unwrap();
        let b = build_partition(&g);
        let spec = RandomSpec::band_limited(n as f64 / 6.0);
        for seed in 0..10 {
            let u = &random_field(&g, Rank::Scalar, 2 * seed, &spec) + &SpectralField::constant(&g, 0.4);
            let v = &random_field(&g, Rank::Scalar, 2 * seed + 1, &spec) + &SpectralField::constant(&g, -0.7);
            let direct = product_dealiased(&u, &v).unwrap();
            let sum = &(&paraproduct(&u, &v, &b).unwrap() + &paraproduct(&v, &u, &b).unwrap())
                + &remainder(&u, &v, &b).unwrap();
            let sum = &sum + &SpectralField::constant(&g, 0.4 * -0.7);
            worst = worst.max(sum.max_diff(&direct) / direct.l2());
        }
    }
    worst
}

fn transform_round_trip() -> f64 {
    let mut worst = 0.0f64;
    for (d, n) in [(2, 64), (3, 16)] {
        let g = Grid::new(d, n).unwrap();
        let f = random_field(&g, Rank::Scalar, 3, &RandomSpec::default());
        let back = forward_transform(&g, &inverse_transform(&f)[0]).unwrap();
        worst = worst.max(rel(&back, &f));
        let samples = g.sample(|x| (x[0].sin() * 3.0 + x[1].cos()).exp().sin());
        let again = inverse_transform(&forward_transform(&g, &samples).unwrap()).remove(0);
        let smax = samples.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        let err = samples.iter().zip(&again).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst = worst.max(err / smax);
    }
    worst
}

/// Eigenvalues of the computed `exp(dt A)` against `exp(dt λ±)`; where the
/// closed-form pair is nearly repeated the individual eigenvalues are
/// ill-conditioned, so trace and determinant are compared instead.
fn propagator_eigenvalues() -> f64 {
    let mut worst = 0.0f64;
    for &nu in &[0.1, 1.0, 10.0, 640.0] {
        for &kappa in &[1.0, 2.0f64.sqrt(), 5.0, 21.0, 2.0 / nu] {
            for &dt in &[1e-4, 1e-3, 5e-3] {
                let e = acoustic_block(0, kappa, nu, dt).entries();
                let (lp, lm) = acoustic_eigenvalues(kappa, nu);
                let (ep, em) = ((lp * dt).exp(), (lm * dt).exp());
                let tr = e[0][0] + e[1][1];
                let det = e[0][0] * e[1][1] - e[0][1] * e[1][0];
                let scale = ep.norm().max(em.norm());
                let err_tr = (tr - (ep + em)).norm() / scale;
                let err_det = (det - ep * em).norm() / (ep * em).norm();
                let gap = (ep - em).norm() / scale;
                let err = if gap > 1e-3 {
                    let disc = (tr * tr - 4.0 * det).sqrt();
                    let (a, b) = ((tr + disc) / 2.0, (tr - disc) / 2.0);
                    let d1 = (a - ep).norm().max((b - em).norm());
                    let d2 = (a - em).norm().max((b - ep).norm());
                    d1.min(d2) / scale
                } else {
                    err_tr.max(err_det)
                };
                worst = worst.max(err);
            }
        }
    }
    worst
}

fn self_convergence() -> f64 {
    let g = Grid::new(2, 32).unwrap();
    let a = SpectralField::from_fn(&g, |x| 0.1 * x[0].cos());
    let v = SpectralField::vector_from_fn(&g, |x, c| {
        if c == 0 {
            x[0].cos() * x[1].sin() + 0.3 * x[0].sin()
        } else {
            -x[0].sin() * x[1].cos()
        }
    });
    let s0 = FlowState::new(a, v, 0.0).unwrap();
    let params = PhysicalParams::with_nu(1.0, 10.0, 2.0).unwrap();
    let horizon = 0.5;
    let terminal = |steps: usize| {
        let mut st = CnsStepper::new(&g, params);
        integrate_fixed(&mut st, &s0, horizon / steps as f64, steps).unwrap()
    };
    let (c, m, f) = (terminal(50), terminal(100), terminal(200));
    let diff = |x: &FlowState, y: &FlowState| x.a.l2_diff(&y.a) + x.v.l2_diff(&y.v);
    diff(&c, &m) / diff(&m, &f)
}

fn taylor_green_energy() -> f64 {
    let g = Grid::new(2, 32).unwrap();
    let v0 = SpectralField::vector_from_fn(&g, |x, c| {
        if c == 0 {
            x[0].cos() * x[1].sin()
        } else {
            -x[0].sin() * x[1].cos()
        }
    });
    let mu = 1.0;
    let traj = run_ins(&v0, mu, &StepperConfig::default(), 1.0).unwrap();
    let last = traj.fields.last().unwrap();
    let ratio = (last.l2() / v0.l2()).powi(2);
    (ratio - (-4.0 * mu * 1.0f64).exp()).abs()
}

fn main() {
    let mut out = Outcome { failed: Vec::new() };

    let pu = partition_of_unity();
    let pq = projector_algebra();
    let bony = bony_reconstruction();
    let rt = transform_round_trip();
    let eig = propagator_eigenvalues();
    out.record(
        "4 exactness",
        pu <= 1e-12 && pq <= 1e-12 && bony <= 1e-10 && rt <= 1e-12 && eig <= 1e-12,
        format!(
            "partition={pu:.2e} (<=1e-12) projectors={pq:.2e} (<=1e-12) bony={bony:.2e} (<=1e-10) \
             round_trip={rt:.2e} (<=1e-12) propagator={eig:.2e} (<=1e-12)"
        ),
    );

    let factor = self_convergence();
    let tg = taylor_green_energy();
    out.record(
        "5 solver order",
        (factor - 4.0).abs() <= 0.6 && tg <= 1e-4,
        format!("self-convergence factor={factor:.4} (4 +- 15%) taylor_green energy error={tg:.2e} (<=1e-4)"),
    );

    let osc: Vec<_> = [2.0, 4.0]
        .iter()
        .map(|&p| check_oscillatory_scaling(2, p).unwrap())
        .collect();
    out.record(
        "3 oscillatory scaling",
        osc.iter().all(|r| r.stable),
        osc.iter().map(|r| r.params.clone()).collect::<Vec<_>>().join(" | "),
    );

    let cfg = LemmaConfig::default();
    let reports = run_all(&cfg).unwrap();
    let bad: Vec<String> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| format!("{}[{}]", r.lemma, r.params))
        .collect();
    let grid_ratio = |r: &LemmaReport| {
        format!("{} N-ratio {:.3}", r.lemma, r.per_grid.last().unwrap().1 / r.per_grid[0].1)
    };
    let divergent: Vec<String> = reports.iter().filter(|r| r.expect_stable == Some(false)).map(grid_ratio).collect();
    let recorded: Vec<String> = reports.iter().filter(|r| r.expect_stable.is_none()).map(grid_ratio).collect();
    out.record(
        "6 lemma suite",
        bad.is_empty(),
        format!(
            "{} reports, {} trials on grids {:?}; failing: [{}]; expected divergent: [{}]; recorded only: [{}]",
            reports.len(),
            cfg.trials,
            cfg.grids,
            bad.join(", "),
            divergent.join(", "),
            recorded.join(", ")
        ),
    );

    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let sweeps = run_sweep(first.path()).and_then(|_| run_sweep(second.path()));
    match sweeps.and_then(|_| parse_sweep(first.path())) {
        Err(e) => {
            out.record("1 limit rate", false, e.clone());
            out.record("2 density scaling", false, e.clone());
            out.record("7 determinism", false, e);
        }
        Ok((rows, slope)) => {
            let monotone = (0..4).all(|b| rows.windows(2).all(|w| w[1].blocks[b] < w[0].blocks[b]));
            let sups: Vec<String> = rows.iter().map(|r| format!("{}:{:.3e}", r.nu, r.blocks[1])).collect();
            out.record(
                "1 limit rate",
                (-0.65..=-0.35).contains(&slope) && monotone && rows.len() == 4,
                format!(
                    "sup-block slope={slope:.4} (in [-0.65, -0.35]) blocks strictly decreasing={monotone} sup by nu [{}]",
                    sups.join(" ")
                ),
            );
            let dens: Vec<f64> = rows.iter().map(|r| r.blocks[0]).collect();
            let hi = dens.iter().cloned().fold(f64::MIN, f64::max);
            let lo = dens.iter().cloned().fold(f64::MAX, f64::min);
            out.record(
                "2 density scaling",
                lo > 0.0 && hi / lo < 3.0,
                format!("max/min of sqrt(nu) sup|a| = {:.3} (< 3) values {dens:.4?}", hi / lo),
            );
            let same = ["sweep.csv", "fit.txt"].iter().all(|f| {
                let a = fs::read(first.path().join("out").join(f));
                let b = fs::read(second.path().join("out").join(f));
                matches!((a, b), (Ok(x), Ok(y)) if x == y)
            });
            out.record("7 determinism", same, "sweep.csv and fit.txt byte-identical across two runs".into());
        }
    }

    if !out.failed.is_empty() {
        println!("failed criteria: {}", out.failed.join(", "));
        std::process::exit(1);
    }
}
