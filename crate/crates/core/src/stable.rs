//! Symmetric α-stable laws with characteristic function `exp(-s|θ|^α)`.
//!
//! Under this convention `α = 1` is the Cauchy law of scale `s` and `α = 2` is
//! the Gaussian of variance `2s`. Both have closed forms; every other exponent
//! goes through spectral inversion of the characteristic function, with the
//! periodic images of the power-law tails removed using the asymptotic series
//!
//! ```text
//! g(x) ~ (1/π) Σ_k (-1)^{k+1} Γ(αk+1)/k! · sin(παk/2) · s^k |x|^{-αk-1}
//! ```

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::Serialize;
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::quad::{gauss_legendre, integrate_panels};
use crate::spectral::{self, PowerTail};
use crate::tolerances::DENSITY_TAIL_LIMIT;

/// Smallest exponent accepted; below it the tails are too heavy for fixed grids.
pub const MIN_ALPHA: f64 = 0.5;

/// Safety factor applied to the leading tail constant in [`StableLaw::recommended_half_width`].
pub const TAIL_SAFETY: f64 = 1.5;

const SERIES_TERMS: usize = 3;

/// Beyond this many widths the tail series replaces quadrature in [`StableLaw::tail_mass`].
const SERIES_RANGE: f64 = 200.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StableLaw {
    alpha: f64,
    s: f64,
}

impl StableLaw {
    pub fn new(alpha: f64, s: f64) -> Result<Self> {
        if !(alpha > MIN_ALPHA && alpha <= 2.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in ({MIN_ALPHA}, 2], got {alpha}"
            )));
        }
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidParameter(format!("s must be positive, got {s}")));
        }
        if alpha < 1.0 {
            log::warn!("alpha = {alpha} < 1: outside the fully supported range, tolerances are relaxed");
        }
        Ok(Self { alpha, s })
    }

    pub fn cauchy(s: f64) -> Result<Self> {
        Self::new(1.0, s)
    }

    /// The Gaussian with the given variance, i.e. `α = 2`, `s = variance/2`.
    pub fn gaussian_variance(variance: f64) -> Result<Self> {
        Self::new(2.0, variance / 2.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn with_scale(&self, s: f64) -> Result<Self> {
        Self::new(self.alpha, s)
    }

    fn is_cauchy(&self) -> bool {
        self.alpha == 1.0
    }

    fn is_gaussian(&self) -> bool {
        self.alpha == 2.0
    }

    /// Width scale `s^{1/α}`: the law is that of `s^{1/α} Z` with `Z` standard.
    pub fn width(&self) -> f64 {
        self.s.powf(1.0 / self.alpha)
    }

    pub fn cf(&self, theta: f64) -> f64 {
        (-self.s * theta.abs().powf(self.alpha)).exp()
    }

    /// Transform of `y · g(y)`: `-iαs sgn(θ)|θ|^{α-1} e^{-s|θ|^α}`.
    pub fn tilted_transform(&self, theta: f64) -> Complex64 {
        if theta == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let a = theta.abs();
        let mag = self.alpha * self.s * a.powf(self.alpha - 1.0) * self.cf(theta);
        Complex64::new(0.0, -theta.signum() * mag)
    }

    /// Terms of the asymptotic tail series of the density.
    pub fn density_tails(&self) -> Vec<PowerTail> {
        if self.is_gaussian() {
            return Vec::new();
        }
        (1..=SERIES_TERMS)
            .filter_map(|k| {
                let kf = k as f64;
                let sin = (PI * self.alpha * kf / 2.0).sin();
                if sin.abs() < 1e-12 {
                    return None;
                }
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                let coeff = sign * gamma(self.alpha * kf + 1.0) / gamma(kf + 1.0) * sin * self.s.powi(k as i32) / PI;
                Some(PowerTail::even(coeff, self.alpha * kf + 1.0))
            })
            .collect()
    }

    /// Leading coefficient `A s` of the density tail `A s |x|^{-α-1}`.
    pub fn tail_coefficient(&self) -> f64 {
        if self.is_gaussian() {
            0.0
        } else {
            gamma(self.alpha + 1.0) * (PI * self.alpha / 2.0).sin() / PI * self.s
        }
    }

    /// Tail series of `y · g(y)`.
    pub fn tilted_tails(&self) -> Vec<PowerTail> {
        self.density_tails()
            .into_iter()
            .map(|t| PowerTail::odd(t.coeff, t.power - 1.0))
            .collect()
    }

    /// Tail series of `g'(y)`.
    pub fn derivative_tails(&self) -> Vec<PowerTail> {
        self.density_tails()
            .into_iter()
            .map(|t| PowerTail::odd(-t.power * t.coeff, t.power + 1.0))
            .collect()
    }

    /// Pointwise density.
    pub fn pdf(&self, x: f64) -> f64 {
        if self.is_cauchy() {
            return self.s / (PI * (self.s * self.s + x * x));
        }
        if self.is_gaussian() {
            return (-x * x / (4.0 * self.s)).exp() / (4.0 * PI * self.s).sqrt();
        }
        let f = |theta: f64| (-self.s * theta.powf(self.alpha)).exp() * (theta * x).cos();
        self.fourier_integral(x, f) / PI
    }

    /// `log g(x)` without underflow, when the density has a closed form (`α` = 1 or 2).
    pub fn closed_log_pdf(&self, x: f64) -> Option<f64> {
        if self.is_cauchy() {
            Some((self.s / PI).ln() - (self.s * self.s + x * x).ln())
        } else if self.is_gaussian() {
            Some(-x * x / (4.0 * self.s) - 0.5 * (4.0 * PI * self.s).ln())
        } else {
            None
        }
    }

    /// Pointwise derivative of the density.
    pub fn pdf_derivative(&self, x: f64) -> f64 {
        if self.is_cauchy() {
            let d = self.s * self.s + x * x;
            return -2.0 * self.s * x / (PI * d * d);
        }
        if self.is_gaussian() {
            return -x / (2.0 * self.s) * self.pdf(x);
        }
        let f = |theta: f64| -theta * (-self.s * theta.powf(self.alpha)).exp() * (theta * x).sin();
        self.fourier_integral(x, f) / PI
    }

    /// Exact two-sided mass beyond `±half_width`.
    pub fn tail_mass(&self, half_width: f64) -> f64 {
        let l = half_width;
        if l <= 0.0 {
            return 1.0;
        }
        if self.is_cauchy() {
            return 1.0 - 2.0 / PI * (l / self.s).atan();
        }
        if self.is_gaussian() {
            return erfc(l / (2.0 * self.s.sqrt()));
        }
        if l > SERIES_RANGE * self.width() {
            // integrated tail series; the Fourier integral oscillates too fast here
            return self
                .density_tails()
                .iter()
                .map(|t| 2.0 * t.coeff * l.powf(1.0 - t.power) / (t.power - 1.0))
                .sum();
        }
        let f = |theta: f64| (-self.s * theta.powf(self.alpha)).exp() * (theta * l).sin() / theta;
        (1.0 - 2.0 / PI * self.fourier_integral(l, f)).max(0.0)
    }

    /// `∫_0^∞ f(θ) dθ` for integrands damped by `e^{-sθ^α}` and oscillating
    /// at frequency `x`.
    fn fourier_integral<F: Fn(f64) -> f64>(&self, x: f64, f: F) -> f64 {
        let theta_scale = self.s.powf(-1.0 / self.alpha);
        let theta_max = 40f64.powf(1.0 / self.alpha) * theta_scale;
        let mut width = 0.5 * theta_scale;
        if x != 0.0 {
            width = width.min(PI / x.abs());
        }
        // geometric grading resolves the |θ|^α cusp at the origin
        let mut breaks: Vec<f64> = (1..=40).rev().map(|k| width * 0.5f64.powi(k)).collect();
        breaks.insert(0, 0.0);
        let panels = (theta_max / width).ceil() as usize;
        breaks.extend((1..=panels).map(|k| k as f64 * width));
        let rule = gauss_legendre(16);
        integrate_panels(f, &breaks, &rule)
    }

    /// Half width `L` whose two-sided tail mass stays below `tail_budget`.
    ///
    /// Exact for `α ∈ {1, 2}`. Otherwise `L` solves
    /// `C s L^{-α} + erfc(L / 2s^{1/α}) = budget`, where `C` is the leading tail
    /// constant `2Γ(α) sin(πα/2)/π` inflated by [`TAIL_SAFETY`]; the Gaussian
    /// term covers the core for `α` near 2.
    pub fn recommended_half_width(&self, tail_budget: f64) -> Result<f64> {
        if !(tail_budget > 0.0 && tail_budget < 0.1) {
            return Err(Error::InvalidParameter(format!(
                "tail budget must lie in (0, 0.1), got {tail_budget}"
            )));
        }
        if self.is_cauchy() {
            return Ok(self.s * (PI * (1.0 - tail_budget) / 2.0).tan());
        }
        if self.is_gaussian() {
            return Ok(2.0 * self.s.sqrt() * erfc_inv(tail_budget));
        }
        let c = TAIL_SAFETY * 2.0 * gamma(self.alpha) * (PI * self.alpha / 2.0).sin() / PI;
        let w = self.width();
        let bound = |l: f64| c * self.s * l.powf(-self.alpha) + erfc(l / (2.0 * w));
        let (mut lo, mut hi) = (0.0, w);
        while bound(hi) > tail_budget {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if bound(mid) > tail_budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }

    fn check_tail(&self, grid: &Grid) -> Result<()> {
        let mass = self.tail_mass(grid.half_width());
        if mass > DENSITY_TAIL_LIMIT {
            return Err(Error::TailBudget {
                mass,
                half_width: grid.half_width(),
                budget: DENSITY_TAIL_LIMIT,
            });
        }
        Ok(())
    }

    /// The density on `grid`, clamped below at the density floor.
    pub fn density(&self, grid: &Grid) -> Result<GridFunction> {
        self.check_tail(grid)?;
        if self.is_cauchy() || self.is_gaussian() {
            return Ok(GridFunction::from_fn(*grid, |x| self.pdf(x))?.floored());
        }
        self.spectral_density(grid)
    }

    /// The density by spectral inversion, even where a closed form exists.
    pub fn spectral_density(&self, grid: &Grid) -> Result<GridFunction> {
        self.check_tail(grid)?;
        let values = spectral::invert_cf(grid, |theta| self.cf(theta), &self.density_tails());
        Ok(GridFunction::from_raw(*grid, values).symmetrized().floored())
    }

    /// `y ↦ y g(y)` on `grid`.
    pub fn tilted_density(&self, grid: &Grid) -> Result<GridFunction> {
        Ok(self.density(grid)?.map(|y, v| y * v))
    }

    /// `g'` on `grid`.
    pub fn density_derivative(&self, grid: &Grid) -> Result<GridFunction> {
        self.check_tail(grid)?;
        if self.is_cauchy() || self.is_gaussian() {
            return GridFunction::from_fn(*grid, |x| self.pdf_derivative(x));
        }
        let values = spectral::invert_transform(
            grid,
            |theta| Complex64::new(0.0, theta * self.cf(theta)),
            &self.derivative_tails(),
        );
        let n = values.len();
        // enforce exact oddness
        let odd = (0..n).map(|k| 0.5 * (values[k] - values[n - 1 - k])).collect();
        Ok(GridFunction::from_raw(*grid, odd))
    }

    /// Closed-form differential entropy for `α ∈ {1, 2}`.
    pub fn entropy_closed_form(&self) -> Option<f64> {
        if self.is_cauchy() {
            Some((4.0 * PI * self.s).ln())
        } else if self.is_gaussian() {
            Some(0.5 * (2.0 * PI * std::f64::consts::E * 2.0 * self.s).ln())
        } else {
            None
        }
    }
}

/// `g_1^{(α)}(0) = Γ(1 + 1/α)/π`.
pub fn scaling_constant(alpha: f64) -> f64 {
    gamma(1.0 + 1.0 / alpha) / PI
}
