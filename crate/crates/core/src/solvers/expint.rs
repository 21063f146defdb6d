//! `φ`-functions of scalar and acoustic 2×2 generators.
//!
//! `φ₀(z) = e^z`, `φ₁(z) = (e^z - 1)/z`, `φ₂(z) = (e^z - 1 - z)/z²`.

use num_complex::Complex64;

const SERIES_RADIUS: f64 = 0.5;
const CONTOUR_POINTS: usize = 64;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `φ_k(z)` for real `z`, `k ∈ {0, 1, 2}`.
pub fn phi_real(k: usize, z: f64) -> f64 {
    match k {
        0 => z.exp(),
        _ if z.abs() < SERIES_RADIUS => {
            let mut term = 1.0 / factorial(k);
            let mut sum = term;
            for n in 1..30 {
                term *= z / (n + k) as f64;
                sum += term;
            }
            sum
        }
        1 => z.exp_m1() / z,
        2 => (z.exp_m1() - z) / (z * z),
        _ => panic!("φ_{k} not implemented"),
    }
}

/// `φ_k(z)` for complex `z`.
pub fn phi_complex(k: usize, z: Complex64) -> Complex64 {
    match k {
        0 => z.exp(),
        _ if z.norm() < SERIES_RADIUS => {
            let mut term = Complex64::new(1.0 / factorial(k), 0.0);
            let mut sum = term;
            for n in 1..30 {
                term *= z / (n + k) as f64;
                sum += term;
            }
            sum
        }
        1 => (z.exp() - 1.0) / z,
        2 => (z.exp() - 1.0 - z) / (z * z),
        _ => panic!("φ_{k} not implemented"),
    }
}

/// Real representation of the symmetric matrix `[[p11, -i c12], [-i c12, p22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Block {
    pub p11: f64,
    pub c12: f64,
    pub p22: f64,
}

impl Block {
    pub fn diagonal(v: f64) -> Self {
        Self {
            p11: v,
            c12: 0.0,
            p22: v,
        }
    }

    pub fn apply(&self, x: Complex64, y: Complex64) -> (Complex64, Complex64) {
        let off = Complex64::new(0.0, -self.c12);
        (self.p11 * x + off * y, off * x + self.p22 * y)
    }

    pub fn entries(&self) -> [[Complex64; 2]; 2] {
        let off = Complex64::new(0.0, -self.c12);
        [
            [Complex64::new(self.p11, 0.0), off],
            [off, Complex64::new(self.p22, 0.0)],
        ]
    }
}

/// `φ_k(dt·A)` for `A = [[0, -iκ], [-iκ, -νκ²]]`.
///
/// With `Z = dt·A = m I + D`, `m = -νκ²dt/2`, the half-gap `δ` satisfies
/// `δ² = (νκ²dt/2)² - (κ dt)²` and `f(Z) = F₀ I + F₁ D` where
/// `F₀ = (f(m+δ) + f(m-δ))/2`, `F₁ = (f(m+δ) - f(m-δ))/(2δ)`.
pub fn acoustic_block(k: usize, kappa: f64, nu: f64, dt: f64) -> Block {
    if kappa == 0.0 {
        return Block::diagonal(phi_real(k, 0.0));
    }
    let dp = 0.5 * nu * kappa * kappa * dt;
    let kd = kappa * dt;
    let gap2 = (dp - kd) * (dp + kd);
    let delta = if gap2 >= 0.0 {
        Complex64::new(gap2.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-gap2).sqrt())
    };
    let m = -dp;
    if delta.norm() <= SERIES_RADIUS {
        let (f0, f1) = contour_coefficients(k, m, delta);
        return Block {
            p11: f0 + f1 * dp,
            c12: f1 * kd,
            p22: f0 - f1 * dp,
        };
    }
    // z₊ = m + δ evaluated without cancellation
    let zp = -(kd * kd) / (delta + dp);
    let zm = m - delta;
    let (fp, fm) = (phi_complex(k, zp), phi_complex(k, zm));
    let one_plus = 1.0 + dp / delta;
    let one_minus = -(kd * kd) / (delta * (delta + dp));
    Block {
        p11: (0.5 * (fp * one_plus + fm * one_minus)).re,
        c12: (kd * (fp - fm) / (2.0 * delta)).re,
        p22: (0.5 * (fp * one_minus + fm * one_plus)).re,
    }
}

/// `F₀, F₁` by the trapezoidal rule on the unit circle around `m`,
/// valid when both eigenvalues lie well inside it.
fn contour_coefficients(k: usize, m: f64, delta: Complex64) -> (f64, f64) {
    let d2 = delta * delta;
    let (mut f0, mut f1) = (Complex64::default(), Complex64::default());
    for j in 0..CONTOUR_POINTS {
        let theta = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / CONTOUR_POINTS as f64;
        let w = Complex64::from_polar(1.0, theta);
        let f = phi_complex(k, m + w);
        let denom = w * w - d2;
        f0 += f * w * w / denom;
        f1 += f * w / denom;
    }
    let scale = 1.0 / CONTOUR_POINTS as f64;
    ((f0 * scale).re, (f1 * scale).re)
}

/// Eigenvalues `(-νκ² ± √(ν²κ⁴ - 4κ²))/2` of the acoustic generator.
pub fn acoustic_eigenvalues(kappa: f64, nu: f64) -> (Complex64, Complex64) {
    let tr = -nu * kappa * kappa;
    let disc = Complex64::new(tr * tr - 4.0 * kappa * kappa, 0.0).sqrt();
    ((tr + disc) / 2.0, (tr - disc) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expm_oracle(kappa: f64, nu: f64, dt: f64) -> [[Complex64; 2]; 2] {
        // scaling and squaring with a long Taylor series, independent of the
        // closed form
        let a = [
            [Complex64::default(), Complex64::new(0.0, -kappa)],
            [Complex64::new(0.0, -kappa), Complex64::new(-nu * kappa * kappa, 0.0)],
        ];
        let norm = nu * kappa * kappa * dt + kappa * dt;
        let s = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
        let h = dt / 2f64.powi(s);
        let mul = |x: [[Complex64; 2]; 2], y: [[Complex64; 2]; 2]| {
            let mut r = [[Complex64::default(); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    r[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
                }
            }
            r
        };
        let ah = [[a[0][0] * h, a[0][1] * h], [a[1][0] * h, a[1][1] * h]];
        let mut term = [[Complex64::new(1.0, 0.0), Complex64::default()], [Complex64::default(), Complex64::new(1.0, 0.0)]];
        let mut sum = term;
        for n in 1..40 {
            term = mul(term, ah);
            for row in term.iter_mut() {
                for x in row.iter_mut() {
                    *x /= n as f64;
                }
            }
            for i in 0..2 {
                for j in 0..2 {
                    sum[i][j] += term[i][j];
                }
            }
        }
        for _ in 0..s {
            sum = mul(sum, sum);
        }
        sum
    }

    #[test]
    fn phi_small_and_large() {
        for z in [-40.0f64, -3.0, -0.7, -0.49, -1e-9, 0.0, 1e-9, 0.3] {
            let p1 = if z == 0.0 { 1.0 } else { z.exp_m1() / z };
            assert!((phi_real(1, z) - p1).abs() <= 1e-14 * p1.abs().max(1.0), "z={z}");
            let c = phi_complex(2, Complex64::new(z, 0.0));
            assert!((c.re - phi_real(2, z)).abs() < 1e-15);
        }
        assert!((phi_real(2, 0.0) - 0.5).abs() < 1e-16);
    }

    #[test]
    fn exponential_matches_series_oracle() {
        for &(kappa, nu, dt) in &[
            (1.0, 10.0, 0.01),
            (1.0, 2.0, 0.1),   // critical damping
            (1.0, 2.0001, 0.3),
            (3.0, 0.3, 0.05),  // underdamped
            (5.0, 640.0, 0.002),
            (2.0, 1.0, 0.7),
        ] {
            let got = acoustic_block(0, kappa, nu, dt).entries();
            let want = expm_oracle(kappa, nu, dt);
            for i in 0..2 {
                for j in 0..2 {
                    let err = (got[i][j] - want[i][j]).norm();
                    assert!(err < 1e-12, "κ={kappa} ν={nu} dt={dt} ({i},{j}) err={err:e}");
                }
            }
        }
    }

    /// φ₁(Z)·Z = e^Z - I and φ₂(Z)·Z = φ₁(Z) - I.
    #[test]
    fn phi_recurrences() {
        for &(kappa, nu, dt) in &[(1.0, 10.0, 0.01), (1.0, 2.0, 0.1), (3.0, 0.3, 0.05), (4.0, 160.0, 0.01)] {
            let z = [
                [Complex64::default(), Complex64::new(0.0, -kappa * dt)],
                [Complex64::new(0.0, -kappa * dt), Complex64::new(-nu * kappa * kappa * dt, 0.0)],
            ];
            let blocks: Vec<_> = (0..3).map(|k| acoustic_block(k, kappa, nu, dt).entries()).collect();
            for k in 1..3 {
                let p = blocks[k];
                let prev = blocks[k - 1];
                for i in 0..2 {
                    for j in 0..2 {
                        let lhs = p[i][0] * z[0][j] + p[i][1] * z[1][j];
                        let id = if i == j { 1.0 } else { 0.0 };
                        let rhs = prev[i][j] - id;
                        let scale = prev[i][j].norm().max(1.0);
                        assert!((lhs - rhs).norm() < 1e-12 * scale, "k={k} κ={kappa} ν={nu}");
                    }
                }
            }
        }
    }
}
