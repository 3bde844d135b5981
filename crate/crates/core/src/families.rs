//! Named input densities parsed from compact specs.
//!
//! | Spec | Density | Characteristic function |
//! |------|---------|-------------------------|
//! | `cauchy:γ` | `γ/(π(γ²+x²))` | `e^{-γ|θ|}` |
//! | `gaussian:σ²` | `N(0, σ²)` | `e^{-σ²θ²/2}` |
//! | `gaussian-mixture:v₁@w₁+v₂@w₂` | `Σ wᵢ N(0, vᵢ)` | `Σ wᵢ e^{-vᵢθ²/2}` |
//! | `laplace:b` | `e^{-|x|/b}/(2b)` | `1/(1+b²θ²)` |
//! | `stable:α,s` | `g_s^{(α)}` | `e^{-s|θ|^α}` |
//!
//! All families are symmetric about 0.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::spectral::PowerTail;
use crate::stable::StableLaw;

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Cauchy(f64),
    Gaussian(f64),
    GaussianMixture(Vec<(f64, f64)>),
    Laplace(f64),
    Stable(StableLaw),
}

fn positive(v: f64, what: &str, spec: &str) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::FamilySpec(format!("{spec}: {what} must be positive")))
    }
}

fn number(s: &str, spec: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::FamilySpec(format!("{spec}: `{s}` is not a number")))
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let (name, args) = spec
            .split_once(':')
            .ok_or_else(|| Error::FamilySpec(format!("{spec}: expected name:parameters")))?;
        match name.trim() {
            "cauchy" => Ok(Family::Cauchy(positive(number(args, spec)?, "scale", spec)?)),
            "gaussian" => Ok(Family::Gaussian(positive(number(args, spec)?, "variance", spec)?)),
            "laplace" => Ok(Family::Laplace(positive(number(args, spec)?, "scale", spec)?)),
            "gaussian-mixture" => {
                let mut parts = Vec::new();
                for comp in args.split('+') {
                    let (v, w) = comp
                        .split_once('@')
                        .ok_or_else(|| Error::FamilySpec(format!("{spec}: components are variance@weight")))?;
                    parts.push((
                        positive(number(v, spec)?, "variance", spec)?,
                        positive(number(w, spec)?, "weight", spec)?,
                    ));
                }
                let total: f64 = parts.iter().map(|p| p.1).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::FamilySpec(format!("{spec}: weights sum to {total}, not 1")));
                }
                Ok(Family::GaussianMixture(parts))
            }
            "stable" => {
                let (a, s) = args
                    .split_once(',')
                    .ok_or_else(|| Error::FamilySpec(format!("{spec}: expected stable:alpha,s")))?;
                let law = StableLaw::new(number(a, spec)?, number(s, spec)?)
                    .map_err(|e| Error::FamilySpec(format!("{spec}: {e}")))?;
                Ok(Family::Stable(law))
            }
            _ => Err(Error::FamilySpec(format!("{spec}: unknown family `{name}`"))),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Cauchy(g) => write!(f, "cauchy:{g}"),
            Family::Gaussian(v) => write!(f, "gaussian:{v}"),
            Family::GaussianMixture(parts) => {
                let comps: Vec<String> = parts.iter().map(|(v, w)| format!("{v}@{w}")).collect();
                write!(f, "gaussian-mixture:{}", comps.join("+"))
            }
            Family::Laplace(b) => write!(f, "laplace:{b}"),
            Family::Stable(l) => write!(f, "stable:{},{}", l.alpha(), l.s()),
        }
    }
}

fn normal(x: f64, var: f64) -> f64 {
    (-x * x / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

impl Family {
    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Family::Cauchy(g) => g / (PI * (g * g + x * x)),
            Family::Gaussian(v) => normal(x, *v),
            Family::GaussianMixture(parts) => parts.iter().map(|(v, w)| w * normal(x, *v)).sum(),
            Family::Laplace(b) => (-x.abs() / b).exp() / (2.0 * b),
            Family::Stable(l) => l.pdf(x),
        }
    }

    pub fn cf(&self, theta: f64) -> f64 {
        match self {
            Family::Cauchy(g) => (-g * theta.abs()).exp(),
            Family::Gaussian(v) => (-v * theta * theta / 2.0).exp(),
            Family::GaussianMixture(parts) => parts.iter().map(|(v, w)| w * (-v * theta * theta / 2.0).exp()).sum(),
            Family::Laplace(b) => 1.0 / (1.0 + b * b * theta * theta),
            Family::Stable(l) => l.cf(theta),
        }
    }

    /// `None` when the variance is infinite.
    pub fn variance(&self) -> Option<f64> {
        match self {
            Family::Cauchy(_) => None,
            Family::Gaussian(v) => Some(*v),
            Family::GaussianMixture(parts) => Some(parts.iter().map(|(v, w)| v * w).sum()),
            Family::Laplace(b) => Some(2.0 * b * b),
            Family::Stable(l) => (l.alpha() == 2.0).then(|| 2.0 * l.s()),
        }
    }

    /// Scale `u` when this is the stable law `(alpha, u)`.
    pub fn stable_scale(&self, alpha: f64) -> Option<f64> {
        match self {
            Family::Stable(l) if l.alpha() == alpha => Some(l.s()),
            Family::Cauchy(g) if alpha == 1.0 => Some(*g),
            Family::Gaussian(v) if alpha == 2.0 => Some(v / 2.0),
            _ => None,
        }
    }

    /// Density of `cX`.
    pub fn scaled(&self, c: f64) -> Result<Family> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParameter(format!("scale factor must be positive, got {c}")));
        }
        Ok(match self {
            Family::Cauchy(g) => Family::Cauchy(g * c),
            Family::Gaussian(v) => Family::Gaussian(v * c * c),
            Family::GaussianMixture(parts) => Family::GaussianMixture(parts.iter().map(|(v, w)| (v * c * c, *w)).collect()),
            Family::Laplace(b) => Family::Laplace(b * c),
            Family::Stable(l) => Family::Stable(l.with_scale(l.s() * c.powf(l.alpha()))?),
        })
    }

    /// Power-law asymptotes of the density (empty for light tails).
    pub fn tails(&self) -> Vec<PowerTail> {
        match self {
            Family::Cauchy(g) => vec![PowerTail::even(g / PI, 2.0), PowerTail::even(-g.powi(3) / PI, 4.0)],
            Family::Stable(l) => l.density_tails(),
            _ => Vec::new(),
        }
    }

    /// Exact two-sided mass beyond `±half_width`.
    pub fn tail_mass(&self, half_width: f64) -> f64 {
        use statrs::function::erf::erfc;
        let l = half_width;
        match self {
            Family::Cauchy(g) => 1.0 - 2.0 / PI * (l / g).atan(),
            Family::Gaussian(v) => erfc(l / (2.0 * v).sqrt()),
            Family::GaussianMixture(parts) => parts.iter().map(|(v, w)| w * erfc(l / (2.0 * v).sqrt())).sum(),
            Family::Laplace(b) => (-l / b).exp(),
            Family::Stable(law) => law.tail_mass(l),
        }
    }

    /// Half width whose two-sided tail mass is at most `budget`.
    pub fn recommended_half_width(&self, budget: f64) -> Result<f64> {
        match self {
            Family::Stable(l) => l.recommended_half_width(budget),
            Family::Cauchy(g) => StableLaw::cauchy(*g)?.recommended_half_width(budget),
            _ => {
                let (mut lo, mut hi) = (0.0, 1.0);
                while self.tail_mass(hi) > budget {
                    lo = hi;
                    hi *= 2.0;
                }
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if self.tail_mass(mid) > budget {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(hi)
            }
        }
    }

    /// Smallest length scale of the density, used to pick a grid spacing.
    pub fn feature_scale(&self) -> f64 {
        match self {
            Family::Cauchy(g) => *g,
            Family::Gaussian(v) => v.sqrt(),
            Family::GaussianMixture(parts) => parts.iter().map(|(v, _)| v.sqrt()).fold(f64::INFINITY, f64::min),
            Family::Laplace(b) => *b,
            Family::Stable(l) => l.width(),
        }
    }

    /// The density sampled on `grid`.
    pub fn sample(&self, grid: &Grid) -> Result<GridFunction> {
        match self {
            Family::Stable(l) => l.density(grid),
            _ => Ok(GridFunction::from_fn(*grid, |x| self.pdf(x))?.floored()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parses_and_prints_specs() {
        for spec in ["cauchy:0.5", "gaussian:2", "laplace:1.5", "gaussian-mixture:0.5@0.5+2@0.5", "stable:1.5,1"] {
            let f: Family = spec.parse().unwrap();
            assert_eq!(f.to_string(), spec);
        }
        assert_eq!(
            "gaussian-mixture:0.5@0.5+2@0.5".parse::<Family>().unwrap(),
            Family::GaussianMixture(vec![(0.5, 0.5), (2.0, 0.5)])
        );
    }

    #[test]
    fn rejects_malformed_specs() {
        for spec in ["cauchy", "cauchy:-1", "gauss:1", "gaussian-mixture:1@0.3", "stable:0.3,1", "laplace:x"] {
            assert!(spec.parse::<Family>().is_err(), "{spec}");
        }
    }

    #[test]
    fn variances() {
        assert_eq!(Family::Laplace(2.0).variance(), Some(8.0));
        assert_eq!(Family::GaussianMixture(vec![(0.5, 0.5), (2.0, 0.5)]).variance(), Some(1.25));
        assert_eq!(Family::Cauchy(1.0).variance(), None);
    }

    #[test]
    fn scaled_family_is_density_of_scaled_variable() {
        let fams = [
            Family::Cauchy(0.7),
            Family::Gaussian(1.3),
            Family::Laplace(0.4),
            Family::GaussianMixture(vec![(0.5, 0.25), (2.0, 0.75)]),
            Family::Stable(StableLaw::new(1.5, 0.8).unwrap()),
        ];
        for f in &fams {
            let c = 1.7;
            let g = f.scaled(c).unwrap();
            for &x in &[0.0, 0.3, 2.0] {
                assert_relative_eq!(g.pdf(x), f.pdf(x / c) / c, max_relative = 1e-9);
            }
            for &th in &[0.0, 0.5, 3.0] {
                assert_relative_eq!(g.cf(th), f.cf(c * th), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn sampled_families_are_densities() {
        let g = Grid::new(3000.0, 1 << 17).unwrap();
        for f in [Family::Cauchy(0.5), Family::Laplace(1.0), Family::GaussianMixture(vec![(0.5, 0.5), (2.0, 0.5)])] {
            let d = f.sample(&g).unwrap();
            d.check_density().unwrap();
            assert!(d.asymmetry() < 1e-15);
        }
    }

    #[test]
    fn recommended_width_bounds_tail_mass() {
        for f in [Family::Laplace(1.0), Family::Gaussian(2.0), Family::GaussianMixture(vec![(0.5, 0.5), (2.0, 0.5)])] {
            let l = f.recommended_half_width(1e-8).unwrap();
            assert!(f.tail_mass(l) <= 1e-8);
            assert!(f.tail_mass(0.99 * l) > 1e-8);
        }
    }
}
