//! Uniform grids and the functions sampled on them.
//!
//! A [`Grid`] spans `[-L, L]` with `n` samples, `n` a power of two, so the
//! sample `k` sits at `x_k = -L + k·h` with `h = 2L/(n-1)`. Because `n` is even
//! the origin falls halfway between the two central samples and the grid is
//! mirror symmetric: `x_{n-1-k} = -x_k`.
//!
//! | Operation | Method |
//! |-----------|--------|
//! | `∫ f dx` | [`GridFunction::integrate`] (trapezoid) |
//! | `f ⋆ g` | [`GridFunction::convolve`] (zero-padded FFT) |
//! | `∂f/∂x` | [`GridFunction::differentiate_x`] (central differences) |
//! | density of `cX` | [`GridFunction::rescale_density`] |

use std::io::{Read, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral;
use crate::tolerances::{DENSITY_FLOOR, MASS_EPS};

/// Uniform grid on `[-half_width, half_width]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    half_width: f64,
    n: usize,
}

impl Grid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!("half width must be positive, got {half_width}")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("sample count must be a power of two >= 2, got {n}")));
        }
        Ok(Self { half_width, n })
    }

    /// Smallest power-of-two grid on `[-half_width, half_width]` whose spacing
    /// does not exceed `max_spacing`, capped at `max_n` samples.
    pub fn covering(half_width: f64, max_spacing: f64, max_n: usize) -> Result<Self> {
        if !(max_spacing > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {max_spacing}")));
        }
        let needed = (2.0 * half_width / max_spacing).ceil() as usize + 1;
        let n = needed.next_power_of_two().clamp(2, max_n.next_power_of_two());
        Self::new(half_width, n)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n - 1) as f64
    }

    #[inline]
    pub fn x(&self, k: usize) -> f64 {
        // mirrored so that x(n-1-k) == -x(k) exactly
        if 2 * k >= self.n {
            -(-self.half_width + (self.n - 1 - k) as f64 * self.spacing())
        } else {
            -self.half_width + k as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|k| self.x(k)).collect()
    }
}

/// A real function sampled on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::InvalidFunction(format!(
                "expected {} samples, got {}",
                grid.n(),
                values.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidFunction(format!("non-finite value at x = {}", grid.x(k))));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: Fn(f64) -> f64>(grid: Grid, f: F) -> Result<Self> {
        Self::new(grid, grid.points().into_iter().map(f).collect())
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map<F: Fn(f64, f64) -> f64>(&self, f: F) -> GridFunction {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| f(self.grid.x(k), *v))
            .collect();
        Self::from_raw(self.grid, values)
    }

    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &GridFunction, f: F) -> Result<GridFunction> {
        self.same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Ok(Self::from_raw(self.grid, values))
    }

    pub fn same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, v| m.max(*v))
    }

    /// Trapezoid approximation of `∫ f dx` over `[-L, L]`.
    pub fn integrate(&self) -> f64 {
        trapezoid(&self.values, self.grid.spacing())
    }

    /// Linear convolution `(f ⋆ g)(x) = ∫ f(y) g(x - y) dy` on the shared grid.
    pub fn convolve(&self, other: &GridFunction) -> Result<GridFunction> {
        self.same_grid(other)?;
        let values = spectral::convolve_grids(&self.grid, &self.values, &other.values);
        Ok(Self::from_raw(self.grid, values))
    }

    /// Central differences inside, one-sided differences at the two end points.
    pub fn differentiate_x(&self) -> GridFunction {
        Self::from_raw(self.grid, derivative(&self.values, self.grid.spacing()))
    }

    /// Density of `cX` when `self` is the density of `X`: `x ↦ f(x/c)/c`,
    /// resampled with four-point Lagrange interpolation and zero outside the grid.
    pub fn rescale_density(&self, c: f64) -> Result<GridFunction> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!("rescale factor must be positive, got {c}")));
        }
        if c == 1.0 {
            return Ok(self.clone());
        }
        let values = (0..self.grid.n())
            .map(|k| self.interpolate(self.grid.x(k) / c).map_or(0.0, |v| (v / c).max(0.0)))
            .collect();
        Ok(Self::from_raw(self.grid, values))
    }

    /// Four-point Lagrange interpolation; `None` outside `[-L, L]`.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let l = self.grid.half_width;
        if !(x >= -l && x <= l) {
            return None;
        }
        let n = self.grid.n();
        let h = self.grid.spacing();
        let pos = (x + l) / h;
        let k = (pos.floor() as usize).min(n - 2);
        if n < 4 {
            let u = pos - k as f64;
            return Some(self.values[k] * (1.0 - u) + self.values[k + 1] * u);
        }
        // stencil k-1..=k+2, shifted inwards at the edges
        let start = k.saturating_sub(1).min(n - 4);
        let u = pos - start as f64;
        let v = &self.values[start..start + 4];
        let w0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
        let w1 = u * (u - 2.0) * (u - 3.0) / 2.0;
        let w2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
        let w3 = u * (u - 1.0) * (u - 2.0) / 6.0;
        Some(w0 * v[0] + w1 * v[1] + w2 * v[2] + w3 * v[3])
    }

    /// Largest `|f(x) - f(-x)|` over the grid.
    pub fn asymmetry(&self) -> f64 {
        let n = self.values.len();
        (0..n / 2).fold(0.0, |m, k| m.max((self.values[k] - self.values[n - 1 - k]).abs()))
    }

    /// `(f(x) + f(-x))/2`.
    pub fn symmetrized(&self) -> GridFunction {
        let n = self.values.len();
        let values = (0..n).map(|k| 0.5 * (self.values[k] + self.values[n - 1 - k])).collect();
        Self::from_raw(self.grid, values)
    }

    /// Clamp below at the density floor.
    pub fn floored(mut self) -> GridFunction {
        for v in &mut self.values {
            *v = v.max(DENSITY_FLOOR);
        }
        self
    }

    /// Check the density invariants: non-negative with mass within `MASS_EPS` of 1.
    pub fn check_density(&self) -> Result<()> {
        if let Some(k) = self.values.iter().position(|v| *v < 0.0) {
            return Err(Error::InvalidFunction(format!("negative density at x = {}", self.grid.x(k))));
        }
        let mass = self.integrate();
        if (mass - 1.0).abs() > MASS_EPS {
            return Err(Error::InvalidFunction(format!("density mass {mass} is not within {MASS_EPS} of 1")));
        }
        Ok(())
    }

    /// Write the two-column `x,value` CSV representation.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x", "value"])?;
        for (k, v) in self.values.iter().enumerate() {
            w.write_record([self.grid.x(k).to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Read the CSV written by [`GridFunction::write_csv`]; the grid is rebuilt
    /// from the first abscissa and the sample count.
    pub fn read_csv<R: Read>(reader: R) -> Result<GridFunction> {
        let mut r = csv::Reader::from_reader(reader);
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                let field = rec.get(i).ok_or_else(|| Error::InvalidFunction("missing column".into()))?;
                field
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidFunction(format!("bad number `{field}`: {e}")))
            };
            xs.push(parse(0)?);
            values.push(parse(1)?);
        }
        if xs.len() < 2 {
            return Err(Error::InvalidFunction("need at least two samples".into()));
        }
        let grid = Grid::new(-xs[0], xs.len())?;
        let h = grid.spacing();
        for (k, x) in xs.iter().enumerate() {
            if (x - grid.x(k)).abs() > 1e-9 * h.max(1.0) {
                return Err(Error::InvalidGrid(format!(
                    "abscissae are not a symmetric uniform grid (sample {k}: {x} vs {})",
                    grid.x(k)
                )));
            }
        }
        GridFunction::new(grid, values)
    }
}

pub(crate) fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => h * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1])),
    }
}

pub(crate) fn derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    out[0] = (values[1] - values[0]) / h;
    out[n - 1] = (values[n - 1] - values[n - 2]) / h;
    for k in 1..n - 1 {
        out[k] = (values[k + 1] - values[k - 1]) / (2.0 * h);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cauchy(g: f64) -> impl Fn(f64) -> f64 {
        move |x| g / (PI * (g * g + x * x))
    }

    fn gauss(var: f64) -> impl Fn(f64) -> f64 {
        move |x| (-x * x / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(Grid::new(1.0, 1000).is_err());
        assert!(Grid::new(1.0, 1).is_err());
        assert!(Grid::new(0.0, 16).is_err());
        let g = Grid::new(2.0, 16).unwrap();
        assert_eq!(g.x(0), -2.0);
        assert!((g.x(15) - 2.0).abs() < 1e-15);
        assert!((g.x(3) + g.x(12)).abs() < 1e-15);
    }

    #[test]
    fn covering_respects_spacing() {
        let g = Grid::covering(100.0, 0.05, 1 << 22).unwrap();
        assert!(g.spacing() <= 0.05);
        assert_eq!(g.n(), 4096);
    }

    #[test]
    fn integrates_constant_exactly() {
        let g = Grid::new(1.0, 1024).unwrap();
        let f = GridFunction::from_fn(g, |_| 1.0).unwrap();
        assert!((f.integrate() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn cauchy_mass_within_tail_bound() {
        let g = Grid::new(200.0, 1 << 14).unwrap();
        let f = GridFunction::from_fn(g, cauchy(1.0)).unwrap();
        let mass = f.integrate();
        assert!((mass - 1.0).abs() < 5e-3);
        // the deficit is the analytic tail 2/(πL) up to O(L^-3)
        assert!((1.0 - mass - 2.0 / (PI * 200.0)).abs() < 1e-5);
    }

    #[test]
    fn odd_integrand_vanishes() {
        let g = Grid::new(8.0, 2048).unwrap();
        let f = GridFunction::from_fn(g, |x| x * (-x * x).exp()).unwrap();
        assert!(f.integrate().abs() < 1e-12);
    }

    #[test]
    fn rejects_non_finite() {
        let g = Grid::new(1.0, 4).unwrap();
        let err = GridFunction::new(g, vec![0.0, f64::NAN, 0.0, 0.0]).unwrap_err();
        assert!(err.to_string().contains("invalid function"));
    }

    #[test]
    fn cauchy_convolution_adds_scales() {
        let g = Grid::new(400.0, 1 << 15).unwrap();
        let c1 = GridFunction::from_fn(g, cauchy(1.0)).unwrap();
        let c2 = c1.convolve(&c1).unwrap();
        let exact = cauchy(2.0);
        let err = (0..g.n())
            .filter(|&k| g.x(k).abs() <= 200.0)
            .map(|k| (c2.values()[k] - exact(g.x(k))).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "sup error {err}");
    }

    #[test]
    fn gaussian_convolution_adds_variances() {
        let g = Grid::new(20.0, 4096).unwrap();
        let a = GridFunction::from_fn(g, gauss(1.0)).unwrap();
        let b = GridFunction::from_fn(g, gauss(2.0)).unwrap();
        let c = a.convolve(&b).unwrap();
        let exact = gauss(3.0);
        let err = (0..g.n()).map(|k| (c.values()[k] - exact(g.x(k))).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "sup error {err}");
    }

    #[test]
    fn narrow_gaussian_is_approximate_identity() {
        let g = Grid::new(30.0, 1 << 14).unwrap();
        let f = GridFunction::from_fn(g, cauchy(1.0)).unwrap();
        let delta = GridFunction::from_fn(g, gauss(1e-4)).unwrap();
        let out = f.convolve(&delta).unwrap();
        // second-order smoothing error: var/2 · f''
        let err = (0..g.n())
            .filter(|&k| g.x(k).abs() < 15.0)
            .map(|k| (out.values()[k] - f.values()[k]).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "sup error {err}");
    }

    #[test]
    fn convolution_is_commutative_and_mass_preserving() {
        let g = Grid::new(40.0, 4096).unwrap();
        let a = GridFunction::from_fn(g, gauss(0.7)).unwrap();
        let b = GridFunction::from_fn(g, |x| 0.5 * (-x.abs()).exp()).unwrap();
        let ab = a.convolve(&b).unwrap();
        let ba = b.convolve(&a).unwrap();
        let diff = ab.zip_with(&ba, |p, q| (p - q).abs()).unwrap().max_abs();
        assert!(diff < 1e-12);
        assert!((ab.integrate() - a.integrate() * b.integrate()).abs() < 1e-6);
    }

    #[test]
    fn convolution_rejects_mismatched_grids() {
        let a = GridFunction::from_fn(Grid::new(1.0, 8).unwrap(), |_| 1.0).unwrap();
        let b = GridFunction::from_fn(Grid::new(2.0, 8).unwrap(), |_| 1.0).unwrap();
        assert!(matches!(a.convolve(&b), Err(Error::GridMismatch)));
    }

    #[test]
    fn derivative_of_quadratic_is_exact_inside() {
        let g = Grid::new(1.0, 256).unwrap();
        let f = GridFunction::from_fn(g, |x| x * x).unwrap();
        let d = f.differentiate_x();
        for k in 1..g.n() - 1 {
            assert!((d.values()[k] - 2.0 * g.x(k)).abs() < 1e-6);
        }
    }

    #[test]
    fn derivative_of_sine_within_taylor_bound() {
        let g = Grid::new(3.0, 512).unwrap();
        let h = g.spacing();
        let d = GridFunction::from_fn(g, f64::sin).unwrap().differentiate_x();
        let bound = h * h / 6.0;
        for k in 1..g.n() - 1 {
            assert!((d.values()[k] - g.x(k).cos()).abs() <= bound * 1.01);
        }
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let g = Grid::new(3.0, 64).unwrap();
        let d = GridFunction::from_fn(g, |_| 4.2).unwrap().differentiate_x();
        assert_eq!(d.max_abs(), 0.0);
    }

    #[test]
    fn derivative_of_even_function_is_odd() {
        let g = Grid::new(5.0, 1024).unwrap();
        let d = GridFunction::from_fn(g, cauchy(0.7)).unwrap().differentiate_x();
        let n = g.n();
        for k in 0..n {
            assert!((d.values()[k] + d.values()[n - 1 - k]).abs() < 1e-12);
        }
    }

    #[test]
    fn rescale_identity_and_cauchy_scaling() {
        let g = Grid::new(100.0, 1 << 14).unwrap();
        let f = GridFunction::from_fn(g, cauchy(1.0)).unwrap();
        assert_eq!(f.rescale_density(1.0).unwrap(), f);
        let r = f.rescale_density(2.0).unwrap();
        let exact = cauchy(2.0);
        let err = (0..g.n())
            .filter(|&k| g.x(k).abs() < 50.0)
            .map(|k| (r.values()[k] - exact(g.x(k))).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "sup error {err}");
        assert!(f.rescale_density(0.0).is_err());
        assert!(f.rescale_density(-1.0).is_err());
    }

    #[test]
    fn rescaled_gaussian_peak() {
        let g = Grid::new(40.0, 1 << 13).unwrap();
        let f = GridFunction::from_fn(g, gauss(1.0)).unwrap();
        let r = f.rescale_density(3.0).unwrap();
        let at0 = r.interpolate(0.0).unwrap();
        assert!((at0 - 0.132981).abs() < 1e-6);
        assert!((r.integrate() - 1.0).abs() < MASS_EPS);
    }

    #[test]
    fn csv_round_trip_is_bit_identical() {
        let g = Grid::new(3.7, 64).unwrap();
        let f = GridFunction::from_fn(g, |x| (x * 1.3).sin() / 7.0 + 1e-200).unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,value\n"));
        let back = GridFunction::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.grid(), f.grid());
        for (a, b) in back.values().iter().zip(f.values()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn csv_rejects_irregular_abscissae() {
        let text = "x,value\n-1,0\n0.1,1\n0.2,1\n1,0\n";
        assert!(GridFunction::read_csv(text.as_bytes()).is_err());
    }
}
