//! Entropy-type functionals of grid densities, in nats.
//!
//! Integrands vanish wherever the density is at the floor. The contribution of
//! the tails beyond `±L` is not added to the value; it is estimated from the
//! local power-law decay at the grid edge and reported as `truncation_estimate`.

use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{trapezoid, GridFunction};
use crate::path::InterpolationPath;
use crate::stable::StableLaw;
use crate::tolerances::{DENSITY_FLOOR, SCORE_FLOOR_REL};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FunctionalValue {
    pub value: f64,
    pub truncation_estimate: f64,
    pub mask_mass: f64,
}

/// The two `Θ` instances supported by [`theta_functional`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Theta {
    /// `Θ(u) = u²`
    Quadratic,
    /// `Θ(u) = u log u`
    Plog,
}

impl Theta {
    pub fn apply(&self, u: f64) -> f64 {
        match self {
            Theta::Quadratic => u * u,
            Theta::Plog => xlogx(u),
        }
    }

    pub fn second_derivative(&self, u: f64) -> f64 {
        match self {
            Theta::Quadratic => 2.0,
            Theta::Plog => 1.0 / u,
        }
    }
}

impl FromStr for Theta {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadratic" => Ok(Theta::Quadratic),
            "plog" => Ok(Theta::Plog),
            other => Err(Error::UnknownTheta(other.to_string())),
        }
    }
}

/// Where `f` is below this fraction of its peak and the reference has underflowed,
/// the point is dropped instead of failing absolute continuity; such values are
/// round-off of a transform inversion, and their bound goes into the truncation estimate.
const NEGLIGIBLE_REL: f64 = 1e-15;

fn xlogx(u: f64) -> f64 {
    if u > DENSITY_FLOOR {
        u * u.ln()
    } else {
        0.0
    }
}

/// Local decay exponent `p` of `f ~ |x|^{-p}` at the right edge of the grid.
fn edge_exponent(f: &GridFunction) -> f64 {
    let g = f.grid();
    let n = g.n();
    let k = n - 1 - (n / 64).max(1);
    let (x1, x2) = (g.x(k), g.x(n - 1));
    let (v1, v2) = (f.values()[k], f.values()[n - 1]);
    if v1 <= DENSITY_FLOOR || v2 <= DENSITY_FLOOR || x1 <= 0.0 {
        return f64::INFINITY;
    }
    (v1 / v2).ln() / (x2 / x1).ln()
}

/// Two-sided tail of `∫ f · |log G|` beyond `±L`, assuming `f ~ F(x/L)^{-p}` and
/// `G ~ e^{ℓ}(x/L)^{-q}`.
fn tail_estimate(edge: f64, half_width: f64, p: f64, log_edge: f64, q: f64) -> f64 {
    if edge <= DENSITY_FLOOR || !p.is_finite() {
        return 0.0;
    }
    // a slower decay than 1/x has no finite tail; report a bound from p = 1.05
    let p = p.max(1.05);
    let base = edge * half_width / (p - 1.0);
    2.0 * base * (log_edge.abs() + q.abs() / (p - 1.0))
}

fn mask_mass(f: &GridFunction) -> f64 {
    let total = f.integrate();
    let on: Vec<f64> = f.values().iter().map(|v| if *v > DENSITY_FLOOR { *v } else { 0.0 }).collect();
    if total > 0.0 {
        (trapezoid(&on, f.grid().spacing()) / total).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

fn edge_value(f: &GridFunction) -> f64 {
    *f.values().last().expect("grid has samples")
}

/// `H(f) = -∫ f log f`.
pub fn entropy(f: &GridFunction) -> FunctionalValue {
    let integrand: Vec<f64> = f.values().iter().map(|v| -xlogx(*v)).collect();
    let edge = edge_value(f);
    let p = edge_exponent(f);
    FunctionalValue {
        value: trapezoid(&integrand, f.grid().spacing()),
        truncation_estimate: tail_estimate(edge, f.grid().half_width(), p, edge.max(DENSITY_FLOOR).ln(), p),
        mask_mass: mask_mass(f),
    }
}

/// `D(f‖g) = ∫ f log(f/g)`.
pub fn relative_entropy(f: &GridFunction, g: &GridFunction) -> Result<FunctionalValue> {
    f.same_grid(g)?;
    let grid = f.grid();
    let mut integrand = vec![0.0; grid.n()];
    let mut skipped = vec![0.0; grid.n()];
    let negligible = NEGLIGIBLE_REL * f.peak();
    for (k, (a, b)) in f.values().iter().zip(g.values()).enumerate() {
        if *a > DENSITY_FLOOR {
            if *b <= DENSITY_FLOOR {
                if *a > negligible {
                    return Err(Error::AbsoluteContinuity(grid.x(k)));
                }
                skipped[k] = a * (a.ln().abs() - DENSITY_FLOOR.ln());
                continue;
            }
            integrand[k] = a * (a.ln() - b.ln());
        }
    }
    let edge = edge_value(f);
    let (p, q) = (edge_exponent(f), edge_exponent(g));
    let log_ratio = if edge > DENSITY_FLOOR && edge_value(g) > DENSITY_FLOOR { (edge / edge_value(g)).ln() } else { 0.0 };
    Ok(FunctionalValue {
        value: trapezoid(&integrand, grid.spacing()),
        truncation_estimate: tail_estimate(edge, grid.half_width(), p, log_ratio, p - q)
            + trapezoid(&skipped, grid.spacing()),
        mask_mass: mask_mass(f),
    })
}

/// `Λ(f) = -∫ f log g` against a reference density sampled on the same grid.
pub fn cross_entropy(f: &GridFunction, g: &GridFunction) -> Result<FunctionalValue> {
    f.same_grid(g)?;
    let grid = f.grid();
    let mut integrand = vec![0.0; grid.n()];
    let mut skipped = vec![0.0; grid.n()];
    let negligible = NEGLIGIBLE_REL * f.peak();
    for (k, (a, b)) in f.values().iter().zip(g.values()).enumerate() {
        if *a > DENSITY_FLOOR {
            if *b <= DENSITY_FLOOR {
                if *a > negligible {
                    return Err(Error::AbsoluteContinuity(grid.x(k)));
                }
                skipped[k] = -a * DENSITY_FLOOR.ln();
                continue;
            }
            integrand[k] = -a * b.ln();
        }
    }
    let edge = edge_value(f);
    let q = edge_exponent(g);
    Ok(FunctionalValue {
        value: trapezoid(&integrand, grid.spacing()),
        truncation_estimate: tail_estimate(edge, grid.half_width(), edge_exponent(f), edge_value(g).max(DENSITY_FLOOR).ln(), q)
            + trapezoid(&skipped, grid.spacing()),
        mask_mass: mask_mass(f),
    })
}

/// Energy `Λ_s^{(α)}(f) = -∫ f log g_s^{(α)}`. For `α` = 1 and 2 the logarithm is
/// taken in closed form, so a reference that underflows on the grid does no harm.
pub fn energy(f: &GridFunction, law: &StableLaw) -> Result<FunctionalValue> {
    let grid = f.grid();
    if law.closed_log_pdf(0.0).is_none() {
        return cross_entropy(f, &law.density(grid)?);
    }
    let log_g = |x: f64| law.closed_log_pdf(x).expect("closed form");
    let integrand: Vec<f64> = f
        .values()
        .iter()
        .enumerate()
        .map(|(k, a)| if *a > DENSITY_FLOOR { -a * log_g(grid.x(k)) } else { 0.0 })
        .collect();
    let l = grid.half_width();
    // |log g| grows like 2 log x (Cauchy) or x² (Gaussian); the power model takes q = 2 for both
    Ok(FunctionalValue {
        value: trapezoid(&integrand, grid.spacing()),
        truncation_estimate: tail_estimate(edge_value(f), l, edge_exponent(f), log_g(l), 2.0),
        mask_mass: mask_mass(f),
    })
}

/// Measured variance `∫ x² f` on the grid.
pub fn grid_variance(f: &GridFunction) -> f64 {
    f.map(|x, v| x * x * v).integrate() / f.integrate()
}

/// Standardized Fisher information `σ² ∫ f (ρ^F + x/σ²)²`, with the score taken
/// as the central difference of `log f`.
pub fn standardized_fisher_information(f: &GridFunction, variance: f64) -> Result<FunctionalValue> {
    let grid = f.grid();
    let h = grid.spacing();
    let n = grid.n();
    let v = f.values();
    let mut slope = vec![0.0; n];
    for k in 1..n - 1 {
        if v[k - 1] > DENSITY_FLOOR && v[k + 1] > DENSITY_FLOOR {
            slope[k] = v[k] * (v[k + 1].ln() - v[k - 1].ln()) / (2.0 * h);
        }
    }
    standardized_fisher_with_slope(f, &GridFunction::from_raw(*grid, slope), variance)
}

/// Standardized Fisher information when `f'` is known separately.
pub fn standardized_fisher_with_slope(f: &GridFunction, slope: &GridFunction, variance: f64) -> Result<FunctionalValue> {
    f.same_grid(slope)?;
    if !(variance.is_finite() && variance > 0.0) {
        return Err(Error::InvalidParameter(format!("variance must be positive, got {variance}")));
    }
    let measured = grid_variance(f);
    if (measured - variance).abs() > 0.01 * variance {
        return Err(Error::VarianceMismatch { supplied: variance, measured });
    }
    let grid = f.grid();
    let floor = SCORE_FLOOR_REL * f.peak();
    let mut covered = vec![0.0; grid.n()];
    let integrand: Vec<f64> = (0..grid.n())
        .map(|k| {
            let fv = f.values()[k];
            if fv < floor {
                return 0.0;
            }
            covered[k] = fv;
            let r = slope.values()[k] / fv + grid.x(k) / variance;
            fv * r * r
        })
        .collect();
    let mass = f.integrate();
    Ok(FunctionalValue {
        value: variance * trapezoid(&integrand, grid.spacing()),
        truncation_estimate: 0.0,
        mask_mass: (trapezoid(&covered, grid.spacing()) / mass).clamp(0.0, 1.0),
    })
}

/// `I(X; X_t) = H(h_t) - (log t)/α - H(g_s)`.
pub fn mutual_information(path: &InterpolationPath) -> FunctionalValue {
    let h = entropy(&path.h_t);
    let g = entropy(&path.g_s);
    FunctionalValue {
        value: h.value - path.t.ln() / path.law.alpha() - g.value,
        truncation_estimate: h.truncation_estimate + g.truncation_estimate,
        mask_mass: h.mask_mass,
    }
}

/// `∫ Θ(f)`.
pub fn theta_functional(f: &GridFunction, theta: Theta) -> FunctionalValue {
    let integrand: Vec<f64> = f.values().iter().map(|v| theta.apply(*v)).collect();
    let edge = edge_value(f);
    let p = edge_exponent(f);
    let truncation = match theta {
        Theta::Plog => entropy(f).truncation_estimate,
        Theta::Quadratic if edge > DENSITY_FLOOR && p.is_finite() => {
            2.0 * edge * edge * f.grid().half_width() / (2.0 * p - 1.0).max(0.05)
        }
        Theta::Quadratic => 0.0,
    };
    FunctionalValue {
        value: trapezoid(&integrand, f.grid().spacing()),
        truncation_estimate: truncation,
        mask_mass: mask_mass(f),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::Family;
    use crate::grid::Grid;
    use crate::path::PathBuilder;
    use std::f64::consts::PI;

    #[test]
    fn uniform_entropy_is_zero() {
        let g = Grid::new(1.0, 1 << 14).unwrap();
        let f = GridFunction::from_fn(g, |x| if (0.0..=1.0).contains(&x) { 1.0 } else { 0.0 }).unwrap();
        assert!(entropy(&f).value.abs() < 1e-3);
    }

    #[test]
    fn cauchy_entropy() {
        let g = Grid::new(20000.0, 1 << 20).unwrap();
        let f = Family::Cauchy(1.0).sample(&g).unwrap();
        let h = entropy(&f);
        assert!((h.value - (4.0 * PI).ln()).abs() < 2e-3, "{}", h.value);
        // the estimate brackets the actual shortfall
        let missing = (4.0 * PI).ln() - h.value;
        assert!(h.truncation_estimate >= 0.5 * missing && h.truncation_estimate <= 2.0 * missing);
    }

    #[test]
    fn gaussian_entropy() {
        let g = Grid::new(12.0, 1 << 12).unwrap();
        let f = Family::Gaussian(1.0).sample(&g).unwrap();
        let h = entropy(&f);
        assert!((h.value - 1.418938533).abs() < 1e-4);
        assert!(h.truncation_estimate < 1e-20);
        assert!((h.mask_mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn relative_entropy_examples() {
        let g = Grid::new(14.0, 1 << 12).unwrap();
        let a = Family::Gaussian(1.0).sample(&g).unwrap();
        let b = Family::Gaussian(2.0).sample(&g).unwrap();
        assert!(relative_entropy(&a, &a).unwrap().value.abs() < 1e-10);
        let d = relative_entropy(&a, &b).unwrap().value;
        assert!((d - 0.5 * (0.5 - 1.0 + 2f64.ln())).abs() < 1e-4);

        let g = Grid::new(1e4, 1 << 16).unwrap();
        let a = Family::Cauchy(1.0).sample(&g).unwrap();
        let b = Family::Cauchy(2.0).sample(&g).unwrap();
        let d = relative_entropy(&a, &b).unwrap().value;
        assert!((d - (9.0f64 / 8.0).ln()).abs() < 1e-3, "{d}");
    }

    #[test]
    fn relative_entropy_detects_support_violation() {
        let g = Grid::new(2.0, 64).unwrap();
        let a = GridFunction::from_fn(g, |_| 0.25).unwrap();
        let b = GridFunction::from_fn(g, |x| if x > 0.0 { 0.5 } else { 0.0 }).unwrap();
        let err = relative_entropy(&a, &b).unwrap_err();
        assert!(err.to_string().contains("absolute continuity on grid violated"));
    }

    #[test]
    fn fisher_information_examples() {
        let g = Grid::new(20.0, 1 << 13).unwrap();
        let f = Family::Gaussian(1.7).sample(&g).unwrap();
        assert!(standardized_fisher_information(&f, 1.7).unwrap().value.abs() < 1e-4);
        assert!(matches!(
            standardized_fisher_information(&f, 2.0),
            Err(Error::VarianceMismatch { .. })
        ));

        let g = Grid::new(40.0, 1 << 14).unwrap();
        let lap = Family::Laplace(1.0).sample(&g).unwrap();
        let j = standardized_fisher_information(&lap, 2.0).unwrap().value;
        assert!((j - 1.0).abs() < 1e-2, "{j}");
    }

    #[test]
    fn fisher_information_is_scale_invariant() {
        let g = Grid::new(40.0, 1 << 14).unwrap();
        let mix = Family::GaussianMixture(vec![(0.5, 0.5), (2.0, 0.5)]);
        let j1 = standardized_fisher_information(&mix.sample(&g).unwrap(), 1.25).unwrap().value;
        let c = 1.8;
        let j2 = standardized_fisher_information(&mix.scaled(c).unwrap().sample(&g).unwrap(), 1.25 * c * c)
            .unwrap()
            .value;
        assert!((j1 - j2).abs() < 1e-3);
        assert!(j1 > 0.01);
    }

    #[test]
    fn energy_examples() {
        let g = Grid::new(20000.0, 1 << 20).unwrap();
        let law = StableLaw::cauchy(1.0).unwrap();
        let f = Family::Cauchy(0.5).sample(&g).unwrap();
        let lam = energy(&f, &law).unwrap();
        assert!((lam.value - (PI.ln() + 2.0 * 1.5f64.ln())).abs() < 2e-3, "{}", lam.value);
        let gs = law.density(&g).unwrap();
        let self_energy = energy(&gs, &law).unwrap().value;
        assert!((self_energy - entropy(&gs).value).abs() < 1e-12);
        let d = relative_entropy(&f, &gs).unwrap().value;
        assert!((lam.value - entropy(&f).value - d).abs() < 1e-6);
        assert!(entropy(&f).value <= lam.value + 1e-6);
    }

    #[test]
    fn theta_examples() {
        let g = Grid::new(1000.0, 1 << 16).unwrap();
        let c = Family::Cauchy(1.0).sample(&g).unwrap();
        assert!((theta_functional(&c, Theta::Quadratic).value - 1.0 / (2.0 * PI)).abs() < 1e-4);
        assert_eq!(theta_functional(&c, Theta::Plog).value, -entropy(&c).value);
        let g = Grid::new(12.0, 1 << 12).unwrap();
        let n = Family::Gaussian(1.0).sample(&g).unwrap();
        assert!((theta_functional(&n, Theta::Quadratic).value - 1.0 / (2.0 * PI.sqrt())).abs() < 1e-4);
        assert!(matches!("cubic".parse::<Theta>(), Err(Error::UnknownTheta(_))));
    }

    #[test]
    fn stable_entropy_scaling() {
        for (alpha, l, n) in [(1.0, 20000.0, 1 << 20), (1.5, 4000.0, 1 << 17), (2.0, 20.0, 1 << 12)] {
            let g = Grid::new(l, n).unwrap();
            let h1 = entropy(&StableLaw::new(alpha, 1.0).unwrap().density(&g).unwrap()).value;
            for &s in &[0.5, 2.0] {
                let hs = entropy(&StableLaw::new(alpha, s).unwrap().density(&g).unwrap()).value;
                let expect = h1 + f64::ln(s) / alpha;
                assert!((hs - expect).abs() < 2e-3, "alpha {alpha} s {s}: {hs} vs {expect}");
            }
        }
    }

    #[test]
    fn mutual_information_examples() {
        let law = StableLaw::gaussian_variance(1.0).unwrap();
        let g = Grid::new(14.0, 1 << 12).unwrap();
        let b = PathBuilder::analytic(&Family::Gaussian(1.0), law, g).unwrap();
        let i = mutual_information(&b.at(0.5).unwrap()).value;
        assert!((i - 0.5 * 2f64.ln()).abs() < 1e-3);
        assert!(mutual_information(&b.at(1.0).unwrap()).value.abs() < 1e-6);
        let mix = PathBuilder::analytic(&Family::GaussianMixture(vec![(0.5, 0.5), (2.0, 0.5)]), law, Grid::new(20.0, 1 << 12).unwrap())
            .unwrap();
        let mut last = f64::INFINITY;
        for k in 1..10 {
            let v = mutual_information(&mix.at(k as f64 / 10.0).unwrap()).value;
            assert!(v >= -1e-6);
            assert!(v <= last + 1e-9);
            last = v;
        }
    }
}
