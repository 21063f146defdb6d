use std::f64::consts::PI;

use nslimit_core::calculus::{compressible_project, leray_project};
use nslimit_core::littlewood_paley::{build_partition, BesovIndex};
use nslimit_core::solvers::heat_run;
use nslimit_core::spectral::random::{random_field, RandomSpec};
use nslimit_core::spectral::snapshot::{read_snapshot, write_snapshot};
use nslimit_core::spectral::{product_dealiased, Grid, Rank, SpectralField};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

type Mode = (i32, i32, f64, f64);

fn trig(g: &Grid, modes: &[Mode], dilate: i32) -> SpectralField {
    SpectralField::from_fn(g, |x| {
        modes
            .iter()
            .map(|&(k1, k2, c, th)| c * ((dilate * k1) as f64 * x[0] + (dilate * k2) as f64 * x[1] + th).cos())
            .sum()
    })
}

fn modes(max: i32) -> impl Strategy<Value = Vec<Mode>> {
    prop::collection::vec((-max..=max, -max..=max, 0.1..1.0f64, 0.0..2.0 * PI), 1..5)
        .prop_filter("nonconstant", |m| m.iter().any(|&(a, b, _, _)| a != 0 || b != 0))
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 24,
        rng_seed: RngSeed::Fixed(20),
        ..ProptestConfig::default()
    })]

    // the dyadic blocks commute with x -> 2x up to a shift of one band, and
    // mean-value L^p norms are invariant under it (|f|^p is a trigonometric
    // polynomial for even p, so the quadrature is exact)
    #[test]
    fn besov_norm_dilation(m in modes(4), s in -1.0..2.0f64, p in prop::sample::select(vec![2.0, 4.0])) {
        let g = Grid::new(2, 64).unwrap();
        let b = build_partition(&g);
        let idx = BesovIndex::new(s, p, 1.0).unwrap();
        let f = trig(&g, &m, 1).without_mean();
        let f2 = trig(&g, &m, 2).without_mean();
        let (n1, n2) = (b.besov_norm(&f, idx).unwrap(), b.besov_norm(&f2, idx).unwrap());
        prop_assert!((n2 - 2f64.powf(s) * n1).abs() <= 1e-9 * n2, "{n1} {n2}");
    }

    #[test]
    fn projectors_split_gradients_and_rotations(m in modes(8), q in modes(8)) {
        let g = Grid::new(2, 32).unwrap();
        let phi = trig(&g, &m, 1);
        let psi = trig(&g, &q, 1);
        let grad = phi.gradient().unwrap();
        let dpsi = psi.gradient().unwrap().components();
        let rot = SpectralField::from_components(vec![-&dpsi[1], dpsi[0].clone()]).unwrap();
        let v = &grad + &rot;
        let scale = v.max_abs_coeff();
        prop_assert!(leray_project(&v).unwrap().max_diff(&rot) <= 1e-12 * scale);
        prop_assert!(compressible_project(&v).unwrap().max_diff(&grad) <= 1e-12 * scale);
    }

    #[test]
    fn dealiased_product_is_exact_below_a_third(m in modes(5), q in modes(5)) {
        let g = Grid::new(2, 32).unwrap();
        let (f, h) = (trig(&g, &m, 1), trig(&g, &q, 1));
        let exact = SpectralField::from_fn(&g, |x| {
            let e = |ms: &[Mode]| -> f64 {
                ms.iter().map(|&(a, b, c, th)| c * (a as f64 * x[0] + b as f64 * x[1] + th).cos()).sum()
            };
            e(&m) * e(&q)
        });
        let prod = product_dealiased(&f, &h).unwrap();
        prop_assert!(prod.max_diff(&exact) <= 1e-12 * exact.max_abs_coeff().max(1e-300));
    }

    #[test]
    fn snapshot_round_trip_is_bitwise(seed in 0u64..1000, t in 0.0..10.0f64, vector in any::<bool>()) {
        let g = Grid::new(2, 16).unwrap();
        let rank = if vector { Rank::Vector } else { Rank::Scalar };
        let f = random_field(&g, rank, seed, &RandomSpec::default());
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &f, t).unwrap();
        let (back, t2) = read_snapshot(&buf[..]).unwrap();
        prop_assert_eq!(t2.to_bits(), t.to_bits());
        prop_assert_eq!(back.rank(), f.rank());
        prop_assert!(back.max_diff(&f) == 0.0);
    }
}

#[test]
fn random_fields_are_real_and_reproducible() {
    let g = Grid::new(3, 16).unwrap();
    let spec = RandomSpec::band_limited(5.0);
    let a = random_field(&g, Rank::Vector, 9, &spec);
    let b = random_field(&g, Rank::Vector, 9, &spec);
    let c = random_field(&g, Rank::Vector, 10, &spec);
    assert!(a.max_diff(&b) == 0.0);
    assert!(a.max_diff(&c) > 0.0);
    assert!(a.hermitian_defect() == 0.0);
    assert!(a.mean().iter().all(|m| *m == 0.0));
}

#[test]
fn forced_heat_matches_closed_form() {
    // u = e^{-t} sin(x₁ + 2x₂) solves u_t - μΔu = (5μ - 1) e^{-t} sin(x₁ + 2x₂)
    let g = Grid::new(2, 16).unwrap();
    let mu = 0.3;
    let mode = SpectralField::from_fn(&g, |x| (x[0] + 2.0 * x[1]).sin());
    let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
    let sol = heat_run(&mode, mu, &times, |t| mode.scale((5.0 * mu - 1.0) * (-t).exp())).unwrap();
    let exact = mode.scale((-2.0f64).exp());
    // the forcing is interpolated linearly per step
    assert!(sol.last().unwrap().max_diff(&exact) < 1e-4);
}
