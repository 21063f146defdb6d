//! Mean-value Lebesgue norms `((2π)^{-d} ∫ |f|^p)^{1/p}`, so `‖1‖_{L^p} = 1`.
//!
//! `p = 2` is evaluated exactly by Parseval. Other exponents use quadrature
//! on a grid refined by an integer factor (trigonometric interpolation via
//! zero padding), which is exact for even integer `p` when the padded grid
//! resolves `|f|^p`.

use num_complex::Complex64;

use super::field::SpectralField;
use super::grid::{shared_grid, Grid};
use crate::error::{Error, Result};
use crate::par;

/// Default refinement factor for `p ≠ 2` quadrature.
pub const DEFAULT_OVERSAMPLE: usize = 2;

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 && !p.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "Lebesgue exponent must be in [1, ∞], got {p}"
        )))
    }
}

/// Coefficients of `f` placed on a grid with `factor` times as many modes
/// per axis. Nyquist coefficients are split evenly between `±N/2` so the
/// interpolant stays real.
pub fn zero_pad(f: &SpectralField, factor: usize) -> Result<SpectralField> {
    let g = f.grid();
    if factor == 1 {
        return Ok(f.clone());
    }
    let fine = shared_grid(g.dim(), g.n() * factor)?;
    let nyq = -(g.n() as i32) / 2;
    let mut comps = Vec::with_capacity(f.ncomp());
    for c in 0..f.ncomp() {
        let src = f.coeffs(c);
        let mut dst = vec![Complex64::default(); fine.len()];
        for (idx, &z) in src.iter().enumerate() {
            if z == Complex64::default() {
                continue;
            }
            let k = g.freq(idx);
            let split: Vec<usize> = (0..g.dim()).filter(|&a| k[a] == nyq).collect();
            let weight = 0.5f64.powi(split.len() as i32);
            for mask in 0..(1usize << split.len()) {
                let mut kk = k;
                for (bit, &a) in split.iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        kk[a] = -nyq;
                    }
                }
                dst[fine.index_of(kk)] += z * weight;
            }
        }
        comps.push(SpectralField::scalar_from_coeffs(&fine, dst)?);
    }
    if comps.len() == 1 {
        Ok(comps.pop().expect("one component"))
    } else {
        SpectralField::from_components(comps)
    }
}

/// Pointwise Euclidean magnitude of all components on the grid points.
pub fn pointwise_magnitude(f: &SpectralField) -> Vec<f64> {
    let samples = super::field::inverse_transform(f);
    if samples.len() == 1 {
        return samples.into_iter().next().expect("one component").iter().map(|x| x.abs()).collect();
    }
    let n = f.grid().len();
    par::map_range(n, |i| samples.iter().map(|c| c[i] * c[i]).sum::<f64>().sqrt())
}

/// Mean-value `L^p` norm of the samples `|f|`.
pub fn lp_of_samples(mag: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        mag.iter().copied().fold(0.0, f64::max)
    } else if p == 1.0 {
        mag.iter().sum::<f64>() / mag.len() as f64
    } else {
        let scale = mag.iter().copied().fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let s = mag.iter().map(|&m| (m / scale).powf(p)).sum::<f64>() / mag.len() as f64;
        scale * s.powf(1.0 / p)
    }
}

/// `‖f‖_{L^p}` with quadrature refinement `oversample` for `p ≠ 2`.
pub fn lp_norm(f: &SpectralField, p: f64, oversample: usize) -> Result<f64> {
    check_exponent(p)?;
    if p == 2.0 {
        return Ok(f.l2());
    }
    let padded = zero_pad(f, oversample.max(1))?;
    Ok(lp_of_samples(&pointwise_magnitude(&padded), p))
}

/// The padded grid used for quadrature of fields on `grid`.
pub fn quadrature_grid(grid: &Grid, oversample: usize) -> Result<Grid> {
    shared_grid(grid.dim(), grid.n() * oversample.max(1))
}
