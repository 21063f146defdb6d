use std::f64::consts::PI;
use std::fmt;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::par;

/// Periodic grid on the torus `[0, 2π)^d`.
///
/// Storage is row-major with axis 0 slowest. Along each axis the storage
/// index `i` carries the integer frequency `i` for `i < N/2` and `i - N`
/// otherwise, so every component of a lattice frequency lies in
/// `[-N/2, N/2)`.
#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    dim: usize,
    n: usize,
    len: usize,
    freqs: Vec<[i32; 3]>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.dim())
            .field("n", &self.n())
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.dim() == other.dim() && self.n() == other.n())
    }
}

impl Eq for Grid {}

/// Build a grid of `n` modes per dimension in `dim` dimensions.
pub fn make_grid(dim: usize, n: usize) -> Result<Grid> {
    Grid::new(dim, n)
}

/// Process-wide cache of grids, so FFT plans for auxiliary (e.g. padded)
/// grids are built once.
pub fn shared_grid(dim: usize, n: usize) -> Result<Grid> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Grid>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(g) = map.get(&(dim, n)) {
        return Ok(g.clone());
    }
    let g = Grid::new(dim, n)?;
    map.insert((dim, n), g.clone());
    Ok(g)
}

impl Grid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 2 or 3, got {dim}"
            )));
        }
        if !n.is_multiple_of(2) || n < 8 {
            return Err(Error::InvalidGrid(format!(
                "mode count must be even and at least 8, got {n}"
            )));
        }
        let len = n.pow(dim as u32);
        let freqs = (0..len)
            .map(|idx| {
                let mut k = [0i32; 3];
                let mut rest = idx;
                for axis in (0..dim).rev() {
                    let i = rest % n;
                    rest /= n;
                    k[axis] = index_to_freq(i, n);
                }
                k
            })
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Self {
            inner: Arc::new(GridInner {
                dim,
                n,
                len,
                freqs,
                forward,
                inverse,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    /// Number of lattice points (= number of modes).
    pub fn len(&self) -> usize {
        self.inner.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n() as f64
    }

    /// Integer frequency of storage index `idx`; unused axes are 0.
    pub fn freq(&self, idx: usize) -> [i32; 3] {
        self.inner.freqs[idx]
    }

    pub fn freqs(&self) -> &[[i32; 3]] {
        &self.inner.freqs
    }

    /// `|k|²` of storage index `idx`.
    pub fn k2(&self, idx: usize) -> f64 {
        let k = self.freq(idx);
        k.iter().map(|&c| (c * c) as f64).sum()
    }

    pub fn kmag(&self, idx: usize) -> f64 {
        self.k2(idx).sqrt()
    }

    /// Component `axis` of the wavevector used by first-order derivatives:
    /// the Nyquist component `-N/2` maps to 0 so odd derivatives of real
    /// fields stay real.
    pub fn dk(&self, idx: usize, axis: usize) -> f64 {
        let c = self.freq(idx)[axis];
        if c == -(self.n() as i32) / 2 {
            0.0
        } else {
            c as f64
        }
    }

    /// Whether any component of the mode sits on the Nyquist frequency.
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let nyq = -(self.n() as i32) / 2;
        self.freq(idx)[..self.dim()].contains(&nyq)
    }

    /// Whether the mode survives the 2/3 truncation (`3|k_i| < N` for all i).
    pub fn is_resolved(&self, idx: usize) -> bool {
        let n = self.n() as i32;
        self.freq(idx)[..self.dim()]
            .iter()
            .all(|&c| 3 * c.abs() < n)
    }

    /// Storage index of lattice frequency `k` (components taken mod N).
    pub fn index_of(&self, k: [i32; 3]) -> usize {
        let n = self.n() as i32;
        let mut idx = 0usize;
        for &c in &k[..self.dim()] {
            idx = idx * self.n() + c.rem_euclid(n) as usize;
        }
        idx
    }

    /// Storage index of `-k`.
    pub fn conj_index(&self, idx: usize) -> usize {
        let k = self.freq(idx);
        self.index_of([-k[0], -k[1], -k[2]])
    }

    /// Physical coordinates of grid point `idx`.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let h = self.spacing();
        let mut x = [0.0; 3];
        let mut rest = idx;
        for axis in (0..self.dim()).rev() {
            x[axis] = (rest % self.n()) as f64 * h;
            rest /= self.n();
        }
        x
    }

    /// Sample a function at every grid point.
    pub fn sample<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn([f64; 3]) -> f64 + Sync + Send,
    {
        par::map_range(self.len(), |idx| f(self.point(idx)))
    }

    /// Unnormalised forward DFT over all axes, in place.
    pub(crate) fn fft_forward(&self, data: &mut [Complex64]) {
        self.fft_all_axes(data, &self.inner.forward);
    }

    /// Unnormalised inverse DFT over all axes, in place.
    pub(crate) fn fft_inverse(&self, data: &mut [Complex64]) {
        self.fft_all_axes(data, &self.inner.inverse);
    }

    fn fft_all_axes(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(data.len(), self.len());
        let n = self.n();
        for axis in 0..self.dim() {
            let stride = n.pow((self.dim() - 1 - axis) as u32);
            if stride == 1 {
                // Rows are contiguous; batch several per task.
                let rows_per_task = (4096 / n).max(1);
                par::for_each_chunk(data, rows_per_task * n, |_, chunk| {
                    plan.process(chunk);
                });
            } else {
                let slab = n * stride;
                let mut lines = vec![Complex64::default(); slab];
                for block in data.chunks_mut(slab) {
                    transform_strided(block, &mut lines, n, stride, plan);
                }
            }
        }
    }
}

fn index_to_freq(i: usize, n: usize) -> i32 {
    if i < n / 2 {
        i as i32
    } else {
        i as i32 - n as i32
    }
}

/// Transform along the slow axis of a `n x stride` block by gathering each
/// column into contiguous memory.
fn transform_strided(
    block: &mut [Complex64],
    lines: &mut [Complex64],
    n: usize,
    stride: usize,
    plan: &Arc<dyn Fft<f64>>,
) {
    {
        let src: &[Complex64] = block;
        par::for_each_chunk(lines, n, |col, line| {
            for (m, x) in line.iter_mut().enumerate() {
                *x = src[m * stride + col];
            }
        });
    }
    let cols_per_task = (4096 / n).max(1);
    par::for_each_chunk(lines, cols_per_task * n, |_, chunk| plan.process(chunk));
    let src: &[Complex64] = lines;
    par::for_each_chunk(block, stride, |m, row| {
        for (col, x) in row.iter_mut().enumerate() {
            *x = src[col * n + m];
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_grid_examples() {
        let g = make_grid(2, 32).unwrap();
        assert_eq!(g.len(), 32 * 32);
        for idx in 0..g.len() {
            let k = g.freq(idx);
            assert!((-16..16).contains(&k[0]) && (-16..16).contains(&k[1]));
            assert_eq!(k[2], 0);
        }
        assert_eq!(make_grid(3, 8).unwrap().len(), 512);
        assert!(matches!(make_grid(2, 7), Err(Error::InvalidGrid(_))));
        assert!(make_grid(4, 8).is_err());
        assert!(make_grid(2, 6).is_err());
    }

    #[test]
    fn index_roundtrip() {
        let g = Grid::new(3, 8).unwrap();
        for idx in 0..g.len() {
            assert_eq!(g.index_of(g.freq(idx)), idx);
            assert_eq!(g.conj_index(g.conj_index(idx)), idx);
        }
        assert_eq!(g.index_of([0, 0, 0]), 0);
    }

    #[test]
    fn dealias_mask_n64() {
        let g = Grid::new(2, 64).unwrap();
        assert!(g.is_resolved(g.index_of([21, -21, 0])));
        assert!(!g.is_resolved(g.index_of([22, 0, 0])));
        assert!(g.is_nyquist(g.index_of([-32, 3, 0])));
    }
}
