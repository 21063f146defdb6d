use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rank {
    Scalar,
    Vector,
}

/// Fourier coefficients of a real scalar or vector field on a [`Grid`].
///
/// Normalisation: `f(x) = Σ_k c_k e^{ik·x}`, so `cos(x₁)` has coefficient
/// ½ at `k = ±e₁` and a constant field carries its value at `k = 0`.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Grid,
    rank: Rank,
    comps: Vec<Vec<Complex64>>,
}

impl SpectralField {
    pub fn zeros(grid: &Grid, rank: Rank) -> Self {
        let ncomp = match rank {
            Rank::Scalar => 1,
            Rank::Vector => grid.dim(),
        };
        Self {
            grid: grid.clone(),
            rank,
            comps: vec![vec![Complex64::default(); grid.len()]; ncomp],
        }
    }

    pub fn scalar_from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                got: coeffs.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            rank: Rank::Scalar,
            comps: vec![coeffs],
        })
    }

    /// Assemble a vector field from `d` scalar components.
    pub fn from_components(components: Vec<SpectralField>) -> Result<Self> {
        let grid = components
            .first()
            .ok_or(Error::RankMismatch("no components"))?
            .grid
            .clone();
        if components.len() != grid.dim() {
            return Err(Error::RankMismatch("vector needs d components"));
        }
        let mut comps = Vec::with_capacity(components.len());
        for c in components {
            if c.grid != grid {
                return Err(Error::GridMismatch);
            }
            if c.rank != Rank::Scalar {
                return Err(Error::RankMismatch("components must be scalar"));
            }
            comps.extend(c.comps);
        }
        Ok(Self {
            grid,
            rank: Rank::Vector,
            comps,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn rank(&self) -> Rank {
        self.rank
    }

    pub fn is_scalar(&self) -> bool {
        self.rank == Rank::Scalar
    }

    pub fn ncomp(&self) -> usize {
        self.comps.len()
    }

    pub fn coeffs(&self, comp: usize) -> &[Complex64] {
        &self.comps[comp]
    }

    pub fn coeffs_mut(&mut self, comp: usize) -> &mut [Complex64] {
        &mut self.comps[comp]
    }

    pub fn component(&self, comp: usize) -> SpectralField {
        SpectralField {
            grid: self.grid.clone(),
            rank: Rank::Scalar,
            comps: vec![self.comps[comp].clone()],
        }
    }

    pub fn components(&self) -> Vec<SpectralField> {
        (0..self.ncomp()).map(|c| self.component(c)).collect()
    }

    pub(crate) fn check_same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid != other.grid {
            Err(Error::GridMismatch)
        } else {
            Ok(())
        }
    }

    pub(crate) fn require_scalar(&self, what: &'static str) -> Result<()> {
        if self.is_scalar() {
            Ok(())
        } else {
            Err(Error::RankMismatch(what))
        }
    }

    pub(crate) fn require_vector(&self, what: &'static str) -> Result<()> {
        if self.is_scalar() {
            Err(Error::RankMismatch(what))
        } else {
            Ok(())
        }
    }

    /// Zero-mode value (the spatial mean) of each component.
    pub fn mean(&self) -> Vec<f64> {
        self.comps.iter().map(|c| c[0].re).collect()
    }

    /// Mean of a scalar field.
    pub fn mean_scalar(&self) -> f64 {
        self.comps[0][0].re
    }

    pub fn without_mean(&self) -> SpectralField {
        let mut out = self.clone();
        for c in &mut out.comps {
            c[0] = Complex64::default();
        }
        out
    }

    /// Coefficient ℓ² norm, equal to the mean-value L² norm of the field.
    pub fn l2(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.comps
            .iter()
            .flat_map(|c| c.iter())
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Largest violation of `c(-k) = conj(c(k))`.
    pub fn hermitian_defect(&self) -> f64 {
        let g = &self.grid;
        self.comps
            .iter()
            .map(|c| {
                (0..g.len())
                    .map(|i| (c[g.conj_index(i)] - c[i].conj()).norm())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// Per-mode map `c_k -> m(idx) · c_k` applied to every component.
    pub fn multiply_by<F>(&self, m: F) -> SpectralField
    where
        F: Fn(usize) -> Complex64 + Sync + Send,
    {
        let mut out = self.clone();
        for c in &mut out.comps {
            par::for_each_indexed(c, |i, z| *z *= m(i));
        }
        out
    }

    /// Real-valued Fourier multiplier.
    pub fn apply_real_multiplier(&self, table: &[f64]) -> SpectralField {
        debug_assert_eq!(table.len(), self.grid.len());
        let mut out = self.clone();
        for c in &mut out.comps {
            par::for_each_indexed(c, |i, z| *z *= table[i]);
        }
        out
    }

    /// Zero every mode with some `|k_i| ≥ N/3`.
    pub fn truncated(&self) -> SpectralField {
        let g = self.grid.clone();
        let mut out = self.clone();
        for c in &mut out.comps {
            par::for_each_indexed(c, |i, z| {
                if !g.is_resolved(i) {
                    *z = Complex64::default();
                }
            });
        }
        out
    }

    /// Zero every Nyquist-carrying mode.
    pub fn without_nyquist(&self) -> SpectralField {
        let g = self.grid.clone();
        let mut out = self.clone();
        for c in &mut out.comps {
            par::for_each_indexed(c, |i, z| {
                if g.is_nyquist(i) {
                    *z = Complex64::default();
                }
            });
        }
        out
    }

    /// Replace every coefficient pair by its Hermitian average, making the
    /// field exactly real.
    pub fn symmetrized(&self) -> SpectralField {
        let g = self.grid.clone();
        let mut out = self.clone();
        for (c, src) in out.comps.iter_mut().zip(&self.comps) {
            par::for_each_indexed(c, |i, z| {
                let partner = src[g.conj_index(i)].conj();
                *z = 0.5 * (src[i] + partner);
            });
        }
        out
    }

    pub fn scale(&self, s: f64) -> SpectralField {
        let mut out = self.clone();
        for c in &mut out.comps {
            par::for_each_indexed(c, |_, z| *z *= s);
        }
        out
    }

    /// `self + s · other`.
    pub fn axpy(&self, s: f64, other: &SpectralField) -> Result<SpectralField> {
        self.check_same_grid(other)?;
        if self.rank != other.rank {
            return Err(Error::RankMismatch("axpy operands differ in rank"));
        }
        let mut out = self.clone();
        for (c, o) in out.comps.iter_mut().zip(&other.comps) {
            par::for_each_indexed(c, |i, z| *z += s * o[i]);
        }
        Ok(out)
    }

    /// Largest coefficient difference, for tests and diagnostics.
    pub fn max_diff(&self, other: &SpectralField) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max)
    }

    /// Coefficient ℓ² distance.
    pub fn l2_diff(&self, other: &SpectralField) -> f64 {
        self.comps
            .iter()
            .zip(&other.comps)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()))
            .sum::<f64>()
            .sqrt()
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(1.0, rhs).expect("operands must share grid and rank")
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(-1.0, rhs).expect("operands must share grid and rank")
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, s: f64) -> SpectralField {
        self.scale(s)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

// ---------------------------------------------------------------------------
// Transforms

fn forward_component(grid: &Grid, samples: &[f64]) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    grid.fft_forward(&mut data);
    let norm = 1.0 / grid.len() as f64;
    par::for_each_indexed(&mut data, |_, z| *z *= norm);
    data
}

fn inverse_component(grid: &Grid, coeffs: &[Complex64]) -> Vec<f64> {
    let mut data = coeffs.to_vec();
    grid.fft_inverse(&mut data);
    data.into_iter().map(|z| z.re).collect()
}

/// Transform real samples of a scalar field to Fourier coefficients.
pub fn forward_transform(grid: &Grid, samples: &[f64]) -> Result<SpectralField> {
    if samples.len() != grid.len() {
        return Err(Error::ShapeMismatch {
            expected: grid.len(),
            got: samples.len(),
        });
    }
    Ok(SpectralField {
        grid: grid.clone(),
        rank: Rank::Scalar,
        comps: vec![forward_component(grid, samples)],
    })
}

/// Transform `d` component sample arrays to a vector field.
pub fn forward_transform_vector(grid: &Grid, samples: &[Vec<f64>]) -> Result<SpectralField> {
    if samples.len() != grid.dim() {
        return Err(Error::RankMismatch("vector samples need d components"));
    }
    let comps = samples
        .iter()
        .map(|s| forward_transform(grid, s))
        .collect::<Result<Vec<_>>>()?;
    SpectralField::from_components(comps)
}

/// Real samples of every component on the grid points.
pub fn inverse_transform(f: &SpectralField) -> Vec<Vec<f64>> {
    f.comps
        .iter()
        .map(|c| inverse_component(&f.grid, c))
        .collect()
}

impl SpectralField {
    /// Samples of a scalar field.
    pub fn to_samples(&self) -> Vec<f64> {
        inverse_component(&self.grid, &self.comps[0])
    }

    pub fn from_fn<F>(grid: &Grid, f: F) -> SpectralField
    where
        F: Fn([f64; 3]) -> f64 + Sync + Send,
    {
        forward_transform(grid, &grid.sample(f)).expect("sample shape matches grid")
    }

    pub fn vector_from_fn<F>(grid: &Grid, f: F) -> SpectralField
    where
        F: Fn([f64; 3], usize) -> f64 + Sync + Send,
    {
        let comps = (0..grid.dim())
            .map(|c| SpectralField::from_fn(grid, |x| f(x, c)))
            .collect();
        SpectralField::from_components(comps).expect("components share the grid")
    }

    pub fn constant(grid: &Grid, value: f64) -> SpectralField {
        let mut f = SpectralField::zeros(grid, Rank::Scalar);
        f.comps[0][0] = Complex64::new(value, 0.0);
        f
    }

    /// Physical samples after 2/3 truncation, one array per component.
    pub(crate) fn physical_truncated(&self) -> Vec<Vec<f64>> {
        inverse_transform(&self.truncated())
    }

    /// Back to spectral space with 2/3 truncation of the result.
    pub(crate) fn from_physical_truncated(grid: &Grid, samples: &[Vec<f64>]) -> SpectralField {
        let comps: Vec<SpectralField> = samples
            .iter()
            .map(|s| forward_transform(grid, s).expect("sample shape matches grid"))
            .collect();
        let f = if comps.len() == 1 {
            comps.into_iter().next().expect("one component")
        } else {
            SpectralField::from_components(comps).expect("components share the grid")
        };
        f.truncated()
    }
}

// ---------------------------------------------------------------------------
// Differential operators

impl SpectralField {
    /// `(i k_axis)^order` applied per mode. First-order derivatives drop the
    /// Nyquist component so real fields stay real.
    pub fn derivative(&self, axis: usize, order: u32) -> Result<SpectralField> {
        if axis >= self.grid.dim() {
            return Err(Error::InvalidParameter(format!("axis {axis} out of range")));
        }
        let g = self.grid.clone();
        match order {
            1 => Ok(self.multiply_by(|i| Complex64::new(0.0, g.dk(i, axis)))),
            2 => Ok(self.multiply_by(|i| {
                let k = g.freq(i)[axis] as f64;
                Complex64::new(-k * k, 0.0)
            })),
            _ => Err(Error::InvalidParameter(format!(
                "derivative order must be 1 or 2, got {order}"
            ))),
        }
    }

    /// Gradient of a scalar field.
    pub fn gradient(&self) -> Result<SpectralField> {
        self.require_scalar("gradient of a vector field")?;
        let comps = (0..self.grid.dim())
            .map(|a| self.derivative(a, 1))
            .collect::<Result<Vec<_>>>()?;
        SpectralField::from_components(comps)
    }

    /// Divergence of a vector field.
    pub fn divergence(&self) -> Result<SpectralField> {
        self.require_vector("divergence of a scalar field")?;
        let g = self.grid.clone();
        let mut out = vec![Complex64::default(); g.len()];
        let comps = &self.comps;
        par::for_each_indexed(&mut out, |i, z| {
            for (axis, c) in comps.iter().enumerate() {
                *z += Complex64::new(0.0, g.dk(i, axis)) * c[i];
            }
        });
        SpectralField::scalar_from_coeffs(&g, out)
    }

    /// Componentwise Laplacian.
    pub fn laplacian(&self) -> SpectralField {
        let g = self.grid.clone();
        self.multiply_by(|i| Complex64::new(-g.k2(i), 0.0))
    }

    /// Solve `-Δu = f` for mean-zero `f`; the zero mode of the result is 0.
    pub fn inv_laplacian(&self) -> Result<SpectralField> {
        let scale = self.l2().max(f64::MIN_POSITIVE);
        for m in self.mean() {
            if m.abs() > 1e-12 * scale {
                return Err(Error::NonzeroMean { mean: m });
            }
        }
        Ok(self.inv_laplacian_unchecked())
    }

    /// `(-Δ)^{-1}` with the zero mode discarded instead of checked.
    pub fn inv_laplacian_unchecked(&self) -> SpectralField {
        let g = self.grid.clone();
        self.multiply_by(|i| {
            let k2 = g.k2(i);
            if k2 == 0.0 {
                Complex64::default()
            } else {
                Complex64::new(1.0 / k2, 0.0)
            }
        })
    }

    /// Scalar curl `∂₁v₂ - ∂₂v₁` in 2D, the curl vector in 3D.
    pub fn curl(&self) -> Result<SpectralField> {
        self.require_vector("curl of a scalar field")?;
        let d = |c: usize, a: usize| self.component(c).derivative(a, 1);
        if self.grid.dim() == 2 {
            Ok(&d(1, 0)? - &d(0, 1)?)
        } else {
            SpectralField::from_components(vec![
                &d(2, 1)? - &d(1, 2)?,
                &d(0, 2)? - &d(2, 0)?,
                &d(1, 0)? - &d(0, 1)?,
            ])
        }
    }
}

// ---------------------------------------------------------------------------
// Products

/// Pointwise product with 2/3-rule dealiasing of both inputs and the output.
/// Either operand may be a vector field when the other is scalar.
pub fn product_dealiased(f: &SpectralField, g: &SpectralField) -> Result<SpectralField> {
    f.check_same_grid(g)?;
    let (s, other) = match (f.is_scalar(), g.is_scalar()) {
        (true, _) => (f, g),
        (false, true) => (g, f),
        (false, false) => return Err(Error::RankMismatch("product of two vector fields")),
    };
    let sp = s.physical_truncated().pop().expect("scalar has one component");
    let op = other.physical_truncated();
    let prod: Vec<Vec<f64>> = op
        .iter()
        .map(|c| c.iter().zip(&sp).map(|(x, y)| y * x).collect())
        .collect();
    Ok(SpectralField::from_physical_truncated(f.grid(), &prod))
}

/// Dealiased `u·∇w` for a vector field `u` and scalar or vector `w`.
pub fn advect(u: &SpectralField, w: &SpectralField) -> Result<SpectralField> {
    u.require_vector("advecting field must be a vector")?;
    u.check_same_grid(w)?;
    let grid = u.grid();
    let up = u.physical_truncated();
    let mut out: Vec<Vec<f64>> = vec![vec![0.0; grid.len()]; w.ncomp()];
    for (c, acc) in out.iter_mut().enumerate() {
        let wc = w.component(c);
        for (axis, ua) in up.iter().enumerate() {
            let dw = wc.derivative(axis, 1)?.physical_truncated().pop().expect("scalar");
            for ((o, x), y) in acc.iter_mut().zip(ua).zip(&dw) {
                *o += x * y;
            }
        }
    }
    Ok(SpectralField::from_physical_truncated(grid, &out))
}

/// Euclidean dot product of two vector fields, dealiased.
pub fn dot_dealiased(u: &SpectralField, v: &SpectralField) -> Result<SpectralField> {
    u.require_vector("dot of scalar")?;
    v.require_vector("dot of scalar")?;
    u.check_same_grid(v)?;
    let up = u.physical_truncated();
    let vp = v.physical_truncated();
    let mut acc = vec![0.0; u.grid().len()];
    for (a, b) in up.iter().zip(&vp) {
        for ((o, x), y) in acc.iter_mut().zip(a).zip(b) {
            *o += x * y;
        }
    }
    Ok(SpectralField::from_physical_truncated(u.grid(), &[acc]))
}
