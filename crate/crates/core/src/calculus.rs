//! Leray projections, Bony's paraproduct and remainder, transport commutator.
//!
//! Low-frequency cutoffs `S_j` keep the mean, so `T_c v = c (v - mean v)`
//! for a constant `c`, and the discrete identity
//!
//! ```text
//! product_dealiased(u, v) = T_u v + T_v u + R(u, v) + mean(u) mean(v)
//! ```
//!
//! holds exactly up to rounding.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::littlewood_paley::DyadicBands;
use crate::par;
use crate::spectral::{advect, inverse_transform, SpectralField};

fn projector(v: &SpectralField, keep_gradient: bool) -> Result<SpectralField> {
    v.require_vector("projection of a scalar field")?;
    let g = v.grid().clone();
    let d = g.dim();
    let n = g.len();
    // k·v̂ / |k|² per mode, with Nyquist-zeroed wavevectors
    let kdotv: Vec<Complex64> = par::map_range(n, |i| {
        let kk: f64 = (0..d).map(|a| g.dk(i, a).powi(2)).sum();
        if kk == 0.0 {
            return Complex64::default();
        }
        let s: Complex64 = (0..d).map(|a| g.dk(i, a) * v.coeffs(a)[i]).sum();
        s / kk
    });
    let mut out = v.clone();
    for a in 0..d {
        let src = v.coeffs(a);
        let dst = out.coeffs_mut(a);
        par::for_each_indexed(dst, |i, z| {
            let q = g.dk(i, a) * kdotv[i];
            *z = if keep_gradient {
                if i == 0 {
                    Complex64::default()
                } else {
                    q
                }
            } else {
                src[i] - q
            };
        });
    }
    Ok(out)
}

/// Leray projection `P = I - ∇Δ⁻¹div`; the mean passes through.
pub fn leray_project(v: &SpectralField) -> Result<SpectralField> {
    projector(v, false)
}

/// Gradient part `Q = ∇Δ⁻¹div`; the mean is dropped.
pub fn compressible_project(v: &SpectralField) -> Result<SpectralField> {
    projector(v, true)
}

fn check_pair(u: &SpectralField, v: &SpectralField, bands: &DyadicBands) -> Result<()> {
    u.check_same_grid(v)?;
    if u.grid() != bands.grid() {
        return Err(Error::GridMismatch);
    }
    if !u.is_scalar() && !v.is_scalar() {
        return Err(Error::RankMismatch("paraproduct of two vector fields"));
    }
    Ok(())
}

fn rank_of_product(u: &SpectralField, v: &SpectralField) -> usize {
    u.ncomp().max(v.ncomp())
}

/// Pointwise product of per-component sample arrays with scalar broadcast.
fn accumulate(acc: &mut [Vec<f64>], a: &[Vec<f64>], b: &[Vec<f64>]) {
    for (c, out) in acc.iter_mut().enumerate() {
        let x = &a[c.min(a.len() - 1)];
        let y = &b[c.min(b.len() - 1)];
        for ((o, p), q) in out.iter_mut().zip(x).zip(y) {
            *o += p * q;
        }
    }
}

fn to_field(u: &SpectralField, samples: &[Vec<f64>]) -> SpectralField {
    let comps: Vec<SpectralField> = samples
        .iter()
        .map(|s| {
            crate::spectral::forward_transform(u.grid(), s)
                .expect("sample shape matches grid")
                .truncated()
        })
        .collect();
    if comps.len() == 1 {
        comps.into_iter().next().expect("one component")
    } else {
        SpectralField::from_components(comps).expect("components share the grid")
    }
}

fn zero_samples(u: &SpectralField, ncomp: usize) -> Vec<Vec<f64>> {
    vec![vec![0.0; u.grid().len()]; ncomp]
}

/// Paraproduct `T_u v = Σ_j S_{j-1}u · Δ_j v`, dealiased like
/// [`crate::spectral::product_dealiased`]. One operand may be a vector field.
pub fn paraproduct(u: &SpectralField, v: &SpectralField, bands: &DyadicBands) -> Result<SpectralField> {
    check_pair(u, v, bands)?;
    let js: Vec<i32> = bands.bands().collect();
    let terms: Vec<Option<Vec<Vec<f64>>>> = par::map(&js, |&j| {
        let dv = bands.block_or_zero(v, j).truncated();
        if dv.max_abs_coeff() == 0.0 {
            return None;
        }
        let su = bands.low_cutoff(u, j - 1).truncated();
        if su.max_abs_coeff() == 0.0 {
            return None;
        }
        let mut acc = zero_samples(u, rank_of_product(u, v));
        accumulate(&mut acc, &inverse_transform(&su), &inverse_transform(&dv));
        Some(acc)
    });
    let mut total = zero_samples(u, rank_of_product(u, v));
    for t in terms.into_iter().flatten() {
        for (o, x) in total.iter_mut().zip(&t) {
            for (p, q) in o.iter_mut().zip(x) {
                *p += q;
            }
        }
    }
    Ok(to_field(u, &total))
}

/// Remainder `R(u, v) = Σ_j Δ_j u · (Δ_{j-1} + Δ_j + Δ_{j+1}) v`.
///
/// Evaluated as `Σ_j [a_j b_j + (a_j b_{j+1} + a_{j+1} b_j)]` so that
/// `R(u, v)` and `R(v, u)` are bitwise equal.
pub fn remainder(u: &SpectralField, v: &SpectralField, bands: &DyadicBands) -> Result<SpectralField> {
    check_pair(u, v, bands)?;
    let js: Vec<i32> = bands.bands().collect();
    let phys = |f: &SpectralField| -> Bands {
        par::map(&js, |&j| {
            let b = bands.block_or_zero(f, j).truncated();
            (b.max_abs_coeff() != 0.0).then(|| inverse_transform(&b))
        })
    };
    let (a, b) = (phys(u), phys(v));
    let ncomp = rank_of_product(u, v);
    let len = u.grid().len();
    let mut total = zero_samples(u, ncomp);
    for k in 0..js.len() {
        let next = k + 1 < js.len();
        for (c, out) in total.iter_mut().enumerate() {
            let diag = pair(&a[k], &b[k], c);
            let cross1 = if next { pair(&a[k], &b[k + 1], c) } else { None };
            let cross2 = if next { pair(&a[k + 1], &b[k], c) } else { None };
            for (i, o) in out.iter_mut().enumerate().take(len) {
                let d = diag.map_or(0.0, |(x, y)| x[i] * y[i]);
                let c1 = cross1.map_or(0.0, |(x, y)| x[i] * y[i]);
                let c2 = cross2.map_or(0.0, |(x, y)| x[i] * y[i]);
                *o += d + (c1 + c2);
            }
        }
    }
    Ok(to_field(u, &total))
}

type Bands = Vec<Option<Vec<Vec<f64>>>>;

fn pair<'a>(
    s: &'a Option<Vec<Vec<f64>>>,
    t: &'a Option<Vec<Vec<f64>>>,
    c: usize,
) -> Option<(&'a [f64], &'a [f64])> {
    match (s, t) {
        (Some(x), Some(y)) => Some((&x[c.min(x.len() - 1)], &y[c.min(y.len() - 1)])),
        _ => None,
    }
}

/// `[u·∇, Δ_j] v = u·∇(Δ_j v) - Δ_j(u·∇v)` for a vector field `u`.
pub fn commutator_transport(
    u: &SpectralField,
    v: &SpectralField,
    j: i32,
    bands: &DyadicBands,
) -> Result<SpectralField> {
    u.require_vector("transport field must be a vector")?;
    u.check_same_grid(v)?;
    let dv = bands.block(v, j)?;
    let first = advect(u, &dv)?;
    let second = bands.block(&advect(u, v)?, j)?;
    Ok(&first - &second)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::littlewood_paley::build_partition;
    use crate::spectral::random::{random_field, RandomSpec};
    use crate::spectral::{product_dealiased, Grid, Rank};

    fn rv(g: &Grid, seed: u64) -> SpectralField {
        random_field(g, Rank::Vector, seed, &RandomSpec::default())
    }

    fn rs(g: &Grid, seed: u64, spec: &RandomSpec) -> SpectralField {
        random_field(g, Rank::Scalar, seed, spec)
    }

    #[test]
    fn projector_algebra_on_many_fields() {
        for (d, n) in [(2, 16), (3, 8)] {
            let g = Grid::new(d, n).unwrap();
            for seed in 0..100 {
                let v = rv(&g, seed);
                let v = &v + &SpectralField::vector_from_fn(&g, |_, c| 0.3 + c as f64);
                let p = leray_project(&v).unwrap();
                let q = compressible_project(&v).unwrap();
                let scale = v.l2();
                assert!((&p + &q).max_diff(&v) <= 1e-12 * scale);
                assert!(leray_project(&p).unwrap().max_diff(&p) <= 1e-12 * scale);
                assert!(compressible_project(&q).unwrap().max_diff(&q) <= 1e-12 * scale);
                assert!(compressible_project(&p).unwrap().l2() <= 1e-12 * scale);
                assert!(leray_project(&q).unwrap().l2() <= 1e-12 * scale);
                assert!(p.divergence().unwrap().l2() <= 1e-12 * scale);
                assert!(q.curl().unwrap().l2() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn projector_examples() {
        let g = Grid::new(2, 16).unwrap();
        let psi = rs(&g, 3, &RandomSpec::default());
        let grad = psi.gradient().unwrap();
        assert!(leray_project(&grad).unwrap().l2() <= 1e-12 * grad.l2());
        assert!(compressible_project(&grad).unwrap().max_diff(&grad) <= 1e-12);
        let perp = SpectralField::from_components(vec![
            psi.derivative(1, 1).unwrap().scale(-1.0),
            psi.derivative(0, 1).unwrap(),
        ])
        .unwrap();
        assert!(leray_project(&perp).unwrap().max_diff(&perp) <= 1e-12);
        assert!(compressible_project(&perp).unwrap().l2() <= 1e-12);
        assert!(matches!(leray_project(&psi), Err(Error::RankMismatch(_))));
    }

    #[test]
    fn paraproduct_constant_cases() {
        let g = Grid::new(2, 32).unwrap();
        let b = build_partition(&g);
        let v = &rs(&g, 1, &RandomSpec::band_limited(10.0)) + &SpectralField::constant(&g, 0.4);
        let c = SpectralField::constant(&g, 2.5);
        let t = paraproduct(&c, &v, &b).unwrap();
        let expect = v.without_mean().truncated().scale(2.5);
        assert!(t.max_diff(&expect) <= 1e-13);
        assert!(paraproduct(&v, &c, &b).unwrap().max_abs_coeff() <= 1e-15);
    }

    #[test]
    fn bony_reconstruction() {
        for (d, n) in [(2, 32), (2, 64), (3, 16)] {
            let g = Grid::new(d, n).unwrap();
            let b = build_partition(&g);
            let spec = RandomSpec::band_limited(n as f64 / 6.0);
            for seed in 0..10 {
                let u = &rs(&g, seed, &spec) + &SpectralField::constant(&g, 0.3);
                let v = &rs(&g, seed + 100, &spec) + &SpectralField::constant(&g, -1.1);
                let direct = product_dealiased(&u, &v).unwrap();
                let sum = &(&paraproduct(&u, &v, &b).unwrap() + &paraproduct(&v, &u, &b).unwrap())
                    + &remainder(&u, &v, &b).unwrap();
                let sum = &sum + &SpectralField::constant(&g, 0.3 * -1.1);
                assert!(sum.max_diff(&direct) <= 1e-10 * direct.l2(), "d={d} n={n}");
            }
        }
    }

    /// Direct-product oracle: uv computed by sampling and multiplying, no
    /// dealiasing needed since the spectra are below N/6.
    #[test]
    fn bony_against_sampled_product() {
        let g = Grid::new(2, 48).unwrap();
        let b = build_partition(&g);
        let spec = RandomSpec::band_limited(8.0);
        let u = rs(&g, 21, &spec);
        let v = rs(&g, 22, &spec);
        let (us, vs) = (u.to_samples(), v.to_samples());
        let prod: Vec<f64> = us.iter().zip(&vs).map(|(a, c)| a * c).collect();
        let oracle = crate::spectral::forward_transform(&g, &prod).unwrap();
        let sum = &(&paraproduct(&u, &v, &b).unwrap() + &paraproduct(&v, &u, &b).unwrap())
            + &remainder(&u, &v, &b).unwrap();
        assert!(sum.max_diff(&oracle) <= 1e-10 * oracle.l2());
    }

    #[test]
    fn remainder_exactly_symmetric() {
        let g = Grid::new(2, 32).unwrap();
        let b = build_partition(&g);
        let u = rs(&g, 5, &RandomSpec::default());
        let v = rs(&g, 6, &RandomSpec::default());
        let r1 = remainder(&u, &v, &b).unwrap();
        let r2 = remainder(&v, &u, &b).unwrap();
        assert_eq!(r1.coeffs(0), r2.coeffs(0));
    }

    #[test]
    fn vector_paraproduct_is_componentwise() {
        let g = Grid::new(2, 32).unwrap();
        let b = build_partition(&g);
        let u = rs(&g, 7, &RandomSpec::default());
        let w = rv(&g, 8);
        let t = paraproduct(&u, &w, &b).unwrap();
        for c in 0..2 {
            let tc = paraproduct(&u, &w.component(c), &b).unwrap();
            assert!(t.component(c).max_diff(&tc) <= 1e-15);
        }
        assert!(paraproduct(&w, &w, &b).is_err());
        let other = Grid::new(2, 16).unwrap();
        assert!(paraproduct(&rs(&other, 1, &RandomSpec::default()), &u, &b).is_err());
    }

    #[test]
    fn commutator_vanishes_for_constants() {
        let g = Grid::new(2, 32).unwrap();
        let b = build_partition(&g);
        let v = rs(&g, 9, &RandomSpec::default());
        let cu = SpectralField::vector_from_fn(&g, |_, c| [0.7, -1.3][c]);
        for j in b.bands() {
            assert!(commutator_transport(&cu, &v, j, &b).unwrap().l2() <= 1e-12 * v.l2());
        }
        let u = rv(&g, 10);
        let one = SpectralField::constant(&g, 3.0);
        assert!(commutator_transport(&u, &one, 2, &b).unwrap().l2() <= 1e-12);
        assert!(commutator_transport(&u, &v, 42, &b).is_err());
    }
}
