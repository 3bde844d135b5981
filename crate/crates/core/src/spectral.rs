//! FFT machinery shared by density inversion and convolution.
//!
//! Conventions: `k̂(θ) = ∫ k(y) e^{-iθy} dy`. A grid of `n` samples is
//! zero-padded to `N = 2n`, so the discrete frequencies are
//! `θ_ω = 2πω / (N h)` with `ω` taken in `(-N/2, N/2]` and the inverse
//! transforms are `N h`-periodic. The periodic images of heavy tails are
//! removed with a power-law model of the tail.

use std::cell::RefCell;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::grid::Grid;

/// Power-law asymptote `coeff · |y|^{-power}` (times `sgn y` when `odd`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerTail {
    pub coeff: f64,
    pub power: f64,
    pub odd: bool,
}

impl PowerTail {
    pub fn even(coeff: f64, power: f64) -> Self {
        Self { coeff, power, odd: false }
    }

    pub fn odd(coeff: f64, power: f64) -> Self {
        Self { coeff, power, odd: true }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self { coeff: self.coeff * factor, ..self }
    }

    /// Sum of the tail over the periodic images `x + kP`, `k ≠ 0`.
    pub fn periodic_images(&self, x: f64, period: f64) -> f64 {
        const DIRECT: usize = 4;
        if self.coeff == 0.0 {
            return 0.0;
        }
        let p = self.power;
        let sign = if self.odd { -1.0 } else { 1.0 };
        let mut acc = 0.0;
        for k in 1..=DIRECT {
            let kp = k as f64 * period;
            acc += inv_pow(kp + x, p) + sign * inv_pow(kp - x, p);
        }
        // remaining images: midpoint Euler-Maclaurin from a = (K + 1/2)P
        let a = (DIRECT as f64 + 0.5) * period;
        let pair = |q: f64| inv_pow(a + x, q) + sign * inv_pow(a - x, q);
        let integral = if (p - 1.0).abs() < 1e-12 {
            if self.odd {
                -((a + x) / (a - x)).ln()
            } else {
                f64::INFINITY
            }
        } else {
            pair(p - 1.0) / (p - 1.0)
        };
        let d1 = -p * pair(p + 1.0);
        let d3 = -p * (p + 1.0) * (p + 2.0) * pair(p + 3.0);
        let rest = integral / period + period / 24.0 * d1 - period.powi(3) / 1920.0 * d3;
        self.coeff * (acc + rest)
    }
}

/// `b^{-q}`, exact-integer powers being the common case.
#[inline]
fn inv_pow(b: f64, q: f64) -> f64 {
    if q == q.trunc() && q.abs() <= 32.0 {
        b.powi(-(q as i32))
    } else {
        b.powf(-q)
    }
}

thread_local! {
    // plans are reused across calls of the same length
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn planner_fft(len: usize, inverse: bool, data: &mut [Complex64]) {
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    });
    fft.process(data);
}

/// Signed frequency index of bin `w` in a transform of length `len`.
#[inline]
fn signed(w: usize, len: usize) -> f64 {
    if w <= len / 2 {
        w as f64
    } else {
        w as f64 - len as f64
    }
}

fn padded_len(grid: &Grid) -> usize {
    2 * grid.n()
}

fn forward_padded(values: &[f64], len: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    for (b, v) in buf.iter_mut().zip(values) {
        b.re = *v;
    }
    planner_fft(len, false, &mut buf);
    buf
}

fn inverse_to_grid(mut spec: Vec<Complex64>, grid: &Grid, scale: f64) -> Vec<f64> {
    let len = spec.len();
    planner_fft(len, true, &mut spec);
    let norm = scale / len as f64;
    spec.iter().take(grid.n()).map(|c| c.re * norm).collect()
}

fn subtract_images(out: &mut [f64], grid: &Grid, tails: &[PowerTail], period: f64) {
    if tails.is_empty() {
        return;
    }
    for (k, v) in out.iter_mut().enumerate() {
        let x = grid.x(k);
        *v -= tails.iter().map(|t| t.periodic_images(x, period)).sum::<f64>();
    }
}

/// Samples of the real function whose transform is `transform`.
///
/// `transform` must be Hermitian (`F(-θ) = conj F(θ)`); `tails` models the
/// asymptotes used to strip the periodic images.
pub fn invert_transform<F: Fn(f64) -> Complex64>(grid: &Grid, transform: F, tails: &[PowerTail]) -> Vec<f64> {
    let len = padded_len(grid);
    let h = grid.spacing();
    let dtheta = 2.0 * std::f64::consts::PI / (len as f64 * h);
    let x0 = grid.x(0);
    let spec: Vec<Complex64> = (0..len)
        .map(|w| {
            let theta = signed(w, len) * dtheta;
            let c = transform(theta) * Complex64::from_polar(1.0, theta * x0);
            if w == len / 2 {
                // the Nyquist bin stands for both ±θ; only the real part survives
                Complex64::new(c.re, 0.0)
            } else {
                c
            }
        })
        .collect();
    let mut out = inverse_to_grid(spec, grid, 1.0 / h);
    subtract_images(&mut out, grid, tails, len as f64 * h);
    out
}

/// Samples of the density whose transform is `cf` (real and even).
pub fn invert_cf<F: Fn(f64) -> f64>(grid: &Grid, cf: F, tails: &[PowerTail]) -> Vec<f64> {
    invert_transform(grid, |theta| Complex64::new(cf(theta), 0.0), tails)
}

/// Convolution of grid samples with a kernel known through its transform.
///
/// The output is `Σ_j h f_j k(x_m - x_j)`, evaluated on the input grid.
/// `kernel_tails` describe the kernel asymptote; they are weighted by the
/// discrete mass of `values` to remove the periodic images.
pub fn convolve_with_transform<K: Fn(f64) -> Complex64>(
    grid: &Grid,
    values: &[f64],
    kernel: K,
    kernel_tails: &[PowerTail],
) -> Vec<f64> {
    let len = padded_len(grid);
    let h = grid.spacing();
    let dtheta = 2.0 * std::f64::consts::PI / (len as f64 * h);
    let mut spec = forward_padded(values, len);
    for (w, c) in spec.iter_mut().enumerate() {
        if w == len / 2 {
            let theta = signed(w, len) * dtheta;
            // keep only the part of the kernel that is even in θ
            let k = 0.5 * (kernel(theta) + kernel(-theta));
            *c *= Complex64::new(k.re, 0.0);
        } else {
            *c *= kernel(signed(w, len) * dtheta);
        }
    }
    let mut out = inverse_to_grid(spec, grid, 1.0);
    let mass = h * values.iter().sum::<f64>();
    let tails: Vec<PowerTail> = kernel_tails.iter().map(|t| t.scaled(mass)).collect();
    subtract_images(&mut out, grid, &tails, len as f64 * h);
    out
}

/// Linear convolution of two sampled functions on the same grid, scaled by the
/// spacing and read back on that grid.
///
/// For even `n` the grid does not contain 0, so the discrete convolution lands
/// half a sample off the grid; the half-sample shift is applied exactly in the
/// frequency domain.
pub fn convolve_grids(grid: &Grid, f: &[f64], g: &[f64]) -> Vec<f64> {
    let len = padded_len(grid);
    let h = grid.spacing();
    let nf = grid.n() as f64;
    let fs = forward_padded(f, len);
    let gs = forward_padded(g, len);
    let spec: Vec<Complex64> = fs
        .iter()
        .zip(&gs)
        .enumerate()
        .map(|(w, (a, b))| {
            if w == len / 2 && grid.n().is_multiple_of(2) {
                Complex64::new(0.0, 0.0)
            } else {
                let phase = std::f64::consts::PI * signed(w, len) * (nf - 1.0) / len as f64;
                a * b * Complex64::from_polar(1.0, phase)
            }
        })
        .collect();
    inverse_to_grid(spec, grid, h)
}
