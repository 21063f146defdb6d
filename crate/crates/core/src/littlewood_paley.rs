//! Homogeneous Littlewood-Paley decomposition on the lattice.
//!
//! `χ` is a smooth radial step equal to 1 on `|ξ| ≤ 3/4` and 0 on
//! `|ξ| ≥ 4/3`; `φ(ξ) = χ(ξ/2) - χ(ξ)` is supported in `3/4 ≤ |ξ| ≤ 8/3`.
//! The zero mode never belongs to a band: every norm here is blind to
//! constants.

use crate::error::{Error, Result};
use crate::par;
use crate::spectral::norms::{check_exponent, lp_norm, DEFAULT_OVERSAMPLE};
use crate::spectral::{Grid, SpectralField};

const INNER: f64 = 3.0 / 4.0;
const OUTER: f64 = 4.0 / 3.0;

fn h(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// C^∞ transition from 1 at `t ≤ 0` to 0 at `t ≥ 1`.
fn transition(t: f64) -> f64 {
    let (a, b) = (h(1.0 - t), h(t));
    a / (a + b)
}

/// Radial low-pass profile.
pub fn chi(r: f64) -> f64 {
    if r <= INNER {
        1.0
    } else if r >= OUTER {
        0.0
    } else {
        transition((r - INNER) / (OUTER - INNER))
    }
}

/// Radial annulus profile `χ(r/2) - χ(r)`.
pub fn phi(r: f64) -> f64 {
    chi(0.5 * r) - chi(r)
}

fn pow2(j: i32) -> f64 {
    2f64.powi(j)
}

/// Besov index `(s, p, r)`; `p` and `r` may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovIndex {
    pub s: f64,
    pub p: f64,
    pub r: f64,
}

impl BesovIndex {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self> {
        check_exponent(p)?;
        check_exponent(r)?;
        if !s.is_finite() {
            return Err(Error::InvalidParameter(format!("regularity must be finite, got {s}")));
        }
        Ok(Self { s, p, r })
    }

    /// `(s, p, 1)`, the only summation exponent the solver diagnostics use.
    pub fn l1(s: f64, p: f64) -> Self {
        Self { s, p, r: 1.0 }
    }
}

/// `ℓ^r` norm of a finite sequence.
pub fn lr_sum(values: impl IntoIterator<Item = f64>, r: f64) -> f64 {
    if r.is_infinite() {
        values.into_iter().fold(0.0, f64::max)
    } else if r == 1.0 {
        values.into_iter().sum()
    } else {
        values.into_iter().map(|v| v.powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

/// `L^q(0,T)` norm of sampled values by the trapezoidal rule
/// (running maximum for `q = ∞`).
pub fn time_norm(times: &[f64], values: &[f64], q: f64) -> Result<f64> {
    check_exponent(q)?;
    if times.len() != values.len() {
        return Err(Error::TrajectoryMismatch(format!(
            "{} times for {} values",
            times.len(),
            values.len()
        )));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter("snapshot times must be nondecreasing".into()));
    }
    if q.is_infinite() {
        return Ok(values.iter().copied().fold(0.0, f64::max));
    }
    if times.len() < 2 {
        return Err(Error::InvalidParameter(
            "time norms with q < ∞ need at least 2 snapshots".into(),
        ));
    }
    let integral: f64 = times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0].powf(q) + v[1].powf(q)))
        .sum();
    Ok(integral.powf(1.0 / q))
}

/// Dyadic partition attached to a grid.
#[derive(Debug, Clone)]
pub struct DyadicBands {
    grid: Grid,
    j_min: i32,
    j_max: i32,
    tables: Vec<Vec<f64>>,
    oversample: usize,
}

/// Build the partition for `grid`; bands `j_min = -1 ..= j_max` with
/// `j_max = ceil(log₂(√d N/2)) + 1` cover every nonzero lattice mode.
pub fn build_partition(grid: &Grid) -> DyadicBands {
    DyadicBands::new(grid)
}

impl DyadicBands {
    pub fn new(grid: &Grid) -> Self {
        let kmax = (grid.dim() as f64).sqrt() * grid.n() as f64 / 2.0;
        let j_min = -1;
        let j_max = kmax.log2().ceil() as i32 + 1;
        let tables = (j_min..=j_max)
            .map(|j| {
                let scale = pow2(-j);
                (0..grid.len())
                    .map(|i| {
                        let r = grid.kmag(i);
                        if r == 0.0 {
                            0.0
                        } else {
                            phi(scale * r)
                        }
                    })
                    .collect()
            })
            .collect();
        Self {
            grid: grid.clone(),
            j_min,
            j_max,
            tables,
            oversample: DEFAULT_OVERSAMPLE,
        }
    }

    /// Quadrature refinement used for `p ≠ 2` band norms.
    pub fn with_oversample(mut self, factor: usize) -> Self {
        self.oversample = factor.max(1);
        self
    }

    pub fn oversample(&self) -> usize {
        self.oversample
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn bands(&self) -> std::ops::RangeInclusive<i32> {
        self.j_min..=self.j_max
    }

    pub fn num_bands(&self) -> usize {
        (self.j_max - self.j_min + 1) as usize
    }

    fn check_band(&self, j: i32) -> Result<()> {
        if j < self.j_min || j > self.j_max {
            Err(Error::BandOutOfRange {
                j,
                min: self.j_min,
                max: self.j_max,
            })
        } else {
            Ok(())
        }
    }

    /// Multiplier table `φ(2^{-j}|k|)`.
    pub fn phi_table(&self, j: i32) -> Result<&[f64]> {
        self.check_band(j)?;
        Ok(&self.tables[(j - self.j_min) as usize])
    }

    /// `Δ_j f`.
    pub fn block(&self, f: &SpectralField, j: i32) -> Result<SpectralField> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(f.apply_real_multiplier(self.phi_table(j)?))
    }

    /// `Δ_j f`, or zero outside the band range.
    pub fn block_or_zero(&self, f: &SpectralField, j: i32) -> SpectralField {
        match self.phi_table(j) {
            Ok(t) => f.apply_real_multiplier(t),
            Err(_) => f.scale(0.0),
        }
    }

    /// `S_j f`, multiplier `χ(2^{-j}|k|)`; defined for every integer `j`
    /// and retains the mean.
    pub fn low_cutoff(&self, f: &SpectralField, j: i32) -> SpectralField {
        let scale = pow2(-j);
        let g = self.grid.clone();
        let table: Vec<f64> = (0..g.len()).map(|i| chi(scale * g.kmag(i))).collect();
        f.apply_real_multiplier(&table)
    }

    /// `‖Δ_j f‖_{L^p}` for every band, in order `j_min..=j_max`.
    pub fn band_norms(&self, f: &SpectralField, p: f64) -> Result<Vec<f64>> {
        check_exponent(p)?;
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        let js: Vec<i32> = self.bands().collect();
        let norms = par::map(&js, |&j| -> Result<f64> {
            let b = self.block(f, j)?;
            if b.max_abs_coeff() == 0.0 {
                return Ok(0.0);
            }
            lp_norm(&b, p, self.oversample)
        });
        norms.into_iter().collect()
    }

    /// Homogeneous Besov norm `‖(2^{js}‖Δ_j f‖_{L^p})_j‖_{ℓ^r}`.
    pub fn besov_norm(&self, f: &SpectralField, idx: BesovIndex) -> Result<f64> {
        let norms = self.band_norms(f, idx.p)?;
        Ok(self.weighted_sum(&norms, idx.s, idx.r))
    }

    /// `‖(2^{js} b_j)_j‖_{ℓ^r}` for per-band values `b`.
    pub fn weighted_sum(&self, band_values: &[f64], s: f64, r: f64) -> f64 {
        lr_sum(
            self.bands()
                .zip(band_values)
                .map(|(j, &b)| if b == 0.0 { 0.0 } else { pow2(j).powf(s) * b }),
            r,
        )
    }

    /// Multiplier of the low-frequency part `Σ_{2^j ν ≤ 1} φ_j`.
    fn low_table(&self, nu: f64) -> Vec<f64> {
        let mut table = vec![0.0; self.grid.len()];
        for j in self.bands() {
            if pow2(j) * nu <= 1.0 {
                for (t, p) in table.iter_mut().zip(&self.tables[(j - self.j_min) as usize]) {
                    *t += p;
                }
            }
        }
        table
    }

    /// `(Σ_{2^jν≤1} Δ_j f, Σ_{2^jν>1} Δ_j f)`.
    pub fn split_low_high(&self, f: &SpectralField, nu: f64) -> Result<(SpectralField, SpectralField)> {
        if !(nu > 0.0) {
            return Err(Error::InvalidParameter(format!("ν must be positive, got {nu}")));
        }
        let low_t = self.low_table(nu);
        let high_t: Vec<f64> = low_t
            .iter()
            .enumerate()
            .map(|(i, l)| if i == 0 { 0.0 } else { 1.0 - l })
            .collect();
        let mut high = f.apply_real_multiplier(&high_t);
        // exact complement on nonzero modes, independent of table rounding
        let low = f.apply_real_multiplier(&low_t);
        for c in 0..f.ncomp() {
            let (src, lo) = (f.coeffs(c), low.coeffs(c));
            let hi = high.coeffs_mut(c);
            for i in 1..hi.len() {
                hi[i] = src[i] - lo[i];
            }
        }
        Ok((low, high))
    }

    /// Chemin-Lerner norm `‖(2^{js}‖Δ_j u‖_{L^q(0,T;L^p)})_j‖_{ℓ^r}`.
    pub fn chemin_lerner_norm(
        &self,
        times: &[f64],
        series: &[SpectralField],
        q: f64,
        idx: BesovIndex,
    ) -> Result<f64> {
        if times.len() != series.len() {
            return Err(Error::TrajectoryMismatch("times and snapshots differ in length".into()));
        }
        if series.is_empty() {
            return Err(Error::InvalidParameter("empty time series".into()));
        }
        let per_time = series
            .iter()
            .map(|f| self.band_norms(f, idx.p))
            .collect::<Result<Vec<_>>>()?;
        self.chemin_lerner_from_band_norms(times, &per_time, q, idx.s, idx.r)
    }

    /// Chemin-Lerner norm from precomputed band norms `per_time[i][band]`.
    pub fn chemin_lerner_from_band_norms(
        &self,
        times: &[f64],
        per_time: &[Vec<f64>],
        q: f64,
        s: f64,
        r: f64,
    ) -> Result<f64> {
        let band_time = (0..self.num_bands())
            .map(|b| {
                let vals: Vec<f64> = per_time.iter().map(|v| v[b]).collect();
                time_norm(times, &vals, q)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.weighted_sum(&band_time, s, r))
    }
}
