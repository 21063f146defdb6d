//! Seeded random fields with a power-law spectral envelope.
//!
//! Each lattice frequency draws from its own ChaCha stream keyed on the
//! frequency itself, so the same seed produces the same coefficient at a
//! given `k` on every grid that resolves it. Fields on a coarse grid are
//! exact spectral truncations of fields on a finer one.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::field::{Rank, SpectralField};
use super::grid::Grid;

#[derive(Debug, Clone, PartialEq)]
pub struct RandomSpec {
    /// Envelope exponent `e` in `|k|^{-e}`; `None` means `d/2 + 1`.
    pub exponent: Option<f64>,
    /// Keep only `|k| < cutoff`.
    pub cutoff: Option<f64>,
    /// Keep only `|k| > floor`.
    pub floor: Option<f64>,
    pub amplitude: f64,
}

impl Default for RandomSpec {
    fn default() -> Self {
        Self {
            exponent: None,
            cutoff: None,
            floor: None,
            amplitude: 1.0,
        }
    }
}

impl RandomSpec {
    pub fn band_limited(cutoff: f64) -> Self {
        Self {
            cutoff: Some(cutoff),
            ..Self::default()
        }
    }
}

fn stream_key(k: [i32; 3], comp: usize) -> u64 {
    let off = |c: i32| (c + (1 << 15)) as u64 & 0xffff;
    ((comp as u64) << 48) | (off(k[0]) << 32) | (off(k[1]) << 16) | off(k[2])
}

fn is_canonical(k: [i32; 3]) -> bool {
    k.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
}

/// Mean-zero, Nyquist-free real random field.
pub fn random_field(grid: &Grid, rank: Rank, seed: u64, spec: &RandomSpec) -> SpectralField {
    let exponent = spec.exponent.unwrap_or(grid.dim() as f64 / 2.0 + 1.0);
    let mut field = SpectralField::zeros(grid, rank);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for comp in 0..field.ncomp() {
        let coeffs = field.coeffs_mut(comp);
        for idx in 0..grid.len() {
            let k = grid.freq(idx);
            if !is_canonical(k) || grid.is_nyquist(idx) {
                continue;
            }
            let kmag = grid.kmag(idx);
            if spec.cutoff.is_some_and(|c| kmag >= c) || spec.floor.is_some_and(|f| kmag <= f) {
                continue;
            }
            rng.set_stream(stream_key(k, comp));
            rng.set_word_pos(0);
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let c = Complex64::new(re, im)
                * (spec.amplitude * kmag.powf(-exponent) / std::f64::consts::SQRT_2);
            coeffs[idx] = c;
            coeffs[grid.conj_index(idx)] = c.conj();
        }
    }
    field
}
