//! Numerical checks of the path identities.
//!
//! Derivatives in `t` are central differences of quantities computed on paths at
//! `t ± dt`; right-hand sides are quadratures on the path at `t`. The product
//! `h_t (ρ^M + x/s) = x h_t/s − [f_t ⋆ (y g_st)]/(st)` never divides by `h_t`,
//! so it is evaluated on the whole grid.
//!
//! Integrals over a finite grid pick up boundary fluxes `κ [h_t ψ w]_{-L}^{L}`
//! that vanish only as `L → ∞`. Each report lists them under `boundary_*`
//! rather than folding them into either side.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::Family;
use crate::functionals::{cross_entropy, entropy, relative_entropy, standardized_fisher_with_slope};
use crate::grid::{trapezoid, Grid, GridFunction};
use crate::path::{Convention, InterpolationPath, PathBuilder};
use crate::stable::StableLaw;
use crate::tolerances::*;

use Convention::Characteristic;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridUsed {
    pub half_width: f64,
    pub n: usize,
}

impl From<&Grid> for GridUsed {
    fn from(g: &Grid) -> Self {
        Self { half_width: g.half_width(), n: g.n() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub identity_name: String,
    pub convention: Convention,
    pub residual_norm: f64,
    pub residual_l1: Option<f64>,
    pub lhs_value: Option<f64>,
    pub rhs_value: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub dt_used: Option<f64>,
    pub grid_used: Option<GridUsed>,
    pub notes: Vec<String>,
    pub details: BTreeMap<String, f64>,
}

impl VerificationReport {
    pub fn new(name: impl Into<String>, convention: Convention, tolerance: f64) -> Self {
        Self {
            identity_name: name.into(),
            convention,
            residual_norm: f64::NAN,
            residual_l1: None,
            lhs_value: None,
            rhs_value: None,
            tolerance,
            pass: false,
            dt_used: None,
            grid_used: None,
            notes: Vec::new(),
            details: BTreeMap::new(),
        }
    }

    pub fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }

    pub fn detail(mut self, key: &str, value: f64) -> Self {
        self.details.insert(key.to_string(), value);
        self
    }

    pub fn on_grid(mut self, grid: &Grid) -> Self {
        self.grid_used = Some(grid.into());
        self
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt_used = Some(dt);
        self
    }

    pub fn scalars(mut self, lhs: f64, rhs: f64) -> Self {
        self.lhs_value = Some(lhs);
        self.rhs_value = Some(rhs);
        self.finish((lhs - rhs).abs())
    }

    /// Sets the residual and the verdict. A NaN residual fails.
    pub fn finish(mut self, residual: f64) -> Self {
        self.residual_norm = residual;
        self.pass = residual <= self.tolerance;
        self
    }

    /// Re-judge against a caller-supplied tolerance.
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self.pass = self.residual_norm <= tolerance;
        self
    }
}

fn derivative_tolerance(lhs: f64) -> f64 {
    DERIVATIVE_ABS_TOL.max(DERIVATIVE_REL_TOL * lhs.abs())
}

fn check_t(t: f64, dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt < 0.25) {
        return Err(Error::InvalidParameter(format!("dt must lie in (0, 0.25), got {dt}")));
    }
    if !(t >= 2.0 * dt && t <= 1.0 - 2.0 * dt) {
        return Err(Error::InvalidParameter(format!(
            "t = {t} is too close to 0 or 1 for dt = {dt}; need 2dt <= t <= 1 - 2dt"
        )));
    }
    Ok(())
}

fn kappa(law: &StableLaw, t: f64) -> f64 {
    law.s() / (law.alpha() * (1.0 - t))
}

/// Scale `u` of the input when it is stable with the law's exponent.
fn input_stable_scale(b: &PathBuilder) -> Option<f64> {
    b.family().and_then(|f| f.stable_scale(b.law().alpha()))
}

fn input_is_reference(b: &PathBuilder) -> bool {
    input_stable_scale(b).is_some_and(|u| (u - b.law().s()).abs() <= 1e-12 * u)
}

/// `h_t (ρ^M + x/s)` on the whole grid.
fn flux(p: &InterpolationPath) -> Vec<f64> {
    let s = p.law.s();
    let st = s * p.t;
    let g = p.grid();
    (0..g.n())
        .map(|k| g.x(k) * p.h_t.values()[k] / s - p.numerator.values()[k] / st)
        .collect()
}

/// `h_t (ρ^M + x/(st))`.
fn channel_flux(p: &InterpolationPath) -> Vec<f64> {
    let st = p.law.s() * p.t;
    let g = p.grid();
    (0..g.n())
        .map(|k| (g.x(k) * p.h_t.values()[k] - p.numerator.values()[k]) / st)
        .collect()
}

/// Where ratios against `h_t` are trusted in integrals.
fn quadrature_mask(p: &InterpolationPath) -> Vec<bool> {
    let floor = SCORE_FLOOR_REL * p.h_t.peak();
    p.h_t.values().iter().map(|v| *v >= floor).collect()
}

fn masked_integral(grid: &Grid, mask: &[bool], f: impl Fn(usize) -> f64) -> f64 {
    let v: Vec<f64> = (0..grid.n()).map(|k| if mask[k] { f(k) } else { 0.0 }).collect();
    trapezoid(&v, grid.spacing())
}

/// `κ [F w]_{-L}^{L}` for odd `F` and even `w`.
fn boundary(kappa: f64, flux: &[f64], w_edge: f64) -> f64 {
    2.0 * kappa * flux[flux.len() - 1] * w_edge
}

fn last(v: &GridFunction) -> f64 {
    *v.values().last().expect("non-empty grid")
}

/// Every scalar tracked along the path, on the same masks.
#[derive(Clone, Copy, Debug)]
struct Scalars {
    d: f64,
    h: f64,
    lambda: f64,
    info: f64,
    theta: f64,
}

fn scalars(p: &InterpolationPath) -> Result<Scalars> {
    let h = entropy(&p.h_t).value;
    let hg = entropy(&p.g_s).value;
    let sq: Vec<f64> = p.h_t.values().iter().map(|v| v * v).collect();
    Ok(Scalars {
        d: relative_entropy(&p.h_t, &p.g_s)?.value,
        h,
        lambda: cross_entropy(&p.h_t, &p.g_s)?.value,
        info: h - p.t.ln() / p.law.alpha() - hg,
        theta: trapezoid(&sq, p.grid().spacing()),
    })
}

fn central(b: &PathBuilder, t: f64, dt: f64) -> Result<(Scalars, Scalars)> {
    let lo = scalars(&b.at(t - dt)?)?;
    let hi = scalars(&b.at(t + dt)?)?;
    Ok((lo, hi))
}

fn slope(lo: f64, hi: f64, dt: f64) -> f64 {
    (hi - lo) / (2.0 * dt)
}

fn oracle_note(b: &PathBuilder) -> &'static str {
    if input_is_reference(b) {
        "oracle: both sides vanish for a stable input equal to the reference law"
    } else if input_stable_scale(b).is_some() {
        "oracle: closed form for a stable input of the same exponent"
    } else {
        "oracle: central difference in t as its own reference"
    }
}

/// `∂h_t/∂t = κ ∂/∂x (h_t ψ)` pointwise, with `ψ = ρ^M + x/s`.
///
/// The residual is the sup over the score mask of `|LHS − RHS|`, divided by the
/// larger of `sup|LHS|` and `sup|κ ∂/∂x(x h_t/s)|`. The second scale keeps the
/// ratio meaningful when both sides vanish.
pub fn pde_residual(b: &PathBuilder, t: f64, dt: f64) -> Result<VerificationReport> {
    check_t(t, dt)?;
    let law = *b.law();
    let tol = if input_stable_scale(b).is_some() { PDE_STABLE_TOL } else { PDE_GENERAL_TOL };
    let p = b.at(t)?;
    let lo = b.at(t - dt)?;
    let hi = b.at(t + dt)?;
    let k = kappa(&law, t);
    let grid = *p.grid();
    let rhs = GridFunction::from_raw(grid, flux(&p)).differentiate_x();
    let scale_term = p.h_t.map(|x, v| x * v / law.s()).differentiate_x();
    let lhs: Vec<f64> = (0..grid.n())
        .map(|i| (hi.h_t.values()[i] - lo.h_t.values()[i]) / (2.0 * dt))
        .collect();
    let mask = p.mask();
    let mut sup = 0.0f64;
    let mut sup_lhs = 0.0f64;
    let mut sup_scale = 0.0f64;
    for i in 0..grid.n() {
        if mask[i] {
            sup = sup.max((lhs[i] - k * rhs.values()[i]).abs());
            sup_lhs = sup_lhs.max(lhs[i].abs());
            sup_scale = sup_scale.max((k * scale_term.values()[i]).abs());
        }
    }
    let norm = sup_lhs.max(sup_scale);
    let l1 = masked_integral(&grid, &mask, |i| (lhs[i] - k * rhs.values()[i]).abs());
    let mut r = VerificationReport::new("stable-pde", Characteristic, tol)
        .on_grid(&grid)
        .with_dt(dt)
        .note(oracle_note(b))
        .detail("t", t)
        .detail("sup_residual_abs", sup)
        .detail("sup_lhs", sup_lhs)
        .detail("normalization", norm)
        .finish(sup / norm);
    r.residual_l1 = Some(l1);
    Ok(r)
}


/// Heat equation for `√(1−t) X + √t Z_{σ²}` with the standardized Fisher score.
/// The builder's law must be `(2, σ²/2)`.
pub fn heat_equation_check(b: &PathBuilder, t: f64, dt: f64) -> Result<VerificationReport> {
    check_t(t, dt)?;
    let law = *b.law();
    if law.alpha() != 2.0 {
        return Err(Error::InvalidParameter("the heat equation needs alpha = 2".into()));
    }
    let var = 2.0 * law.s();
    let tol = match b.family() {
        Some(Family::Laplace(_)) => HEAT_KINK_TOL,
        Some(Family::Gaussian(_)) => PDE_STABLE_TOL,
        _ => PDE_GENERAL_TOL,
    };
    let p = b.at(t)?;
    let lo = b.at(t - dt)?;
    let hi = b.at(t + dt)?;
    let grid = *p.grid();
    let pref = var / (2.0 * (1.0 - t));
    // h (ρ^F + x/σ²) = h_x + x h/σ²
    let fisher_flux: Vec<f64> = (0..grid.n())
        .map(|i| p.h_x.values()[i] + grid.x(i) * p.h_t.values()[i] / var)
        .collect();
    let rhs = GridFunction::from_raw(grid, fisher_flux).differentiate_x();
    let scale_term = p.h_t.map(|x, v| x * v / var).differentiate_x();
    let mask = p.mask();
    let mut sup = 0.0f64;
    let mut sup_lhs = 0.0f64;
    let mut sup_scale = 0.0f64;
    let mut l1_terms = vec![0.0; grid.n()];
    for i in 0..grid.n() {
        if mask[i] {
            let lhs = (hi.h_t.values()[i] - lo.h_t.values()[i]) / (2.0 * dt);
            let d = (lhs - pref * rhs.values()[i]).abs();
            l1_terms[i] = d;
            sup = sup.max(d);
            sup_lhs = sup_lhs.max(lhs.abs());
            sup_scale = sup_scale.max((pref * scale_term.values()[i]).abs());
        }
    }
    let norm = sup_lhs.max(sup_scale);
    let mut r = VerificationReport::new("heat-equation", Convention::Variance, tol)
        .on_grid(&grid)
        .with_dt(dt)
        .note(oracle_note(b))
        .detail("t", t)
        .detail("variance", var)
        .detail("sup_residual_abs", sup)
        .detail("normalization", norm)
        .finish(sup / norm);
    r.residual_l1 = Some(trapezoid(&l1_terms, grid.spacing()));
    Ok(r)
}

/// Closed-form `D(h_t‖g_s)` and its `t`-derivative for a stable input of scale `u`,
/// where `h_t` is stable of scale `a = u(1−t) + st`.
fn stable_input_relative_entropy(b: &PathBuilder, t: f64) -> Option<(f64, f64)> {
    let u = input_stable_scale(b)?;
    let law = b.law();
    let s = law.s();
    let a = u * (1.0 - t) + s * t;
    let da = s - u;
    if law.alpha() == 1.0 {
        Some((((a + s).powi(2) / (4.0 * a * s)).ln(), da * (2.0 / (a + s) - 1.0 / a)))
    } else if law.alpha() == 2.0 {
        // Gaussian: variances 2a and 2s
        Some((0.5 * (a / s - 1.0 - (a / s).ln()), 0.5 * da * (1.0 / s - 1.0 / a)))
    } else {
        None
    }
}

/// `dD(h_t‖g_s)/dt = −κ ∫ h_t ψ (ρ^F_{h_t} − ρ^F_{g_s})`.
pub fn debruijn_check(b: &PathBuilder, t_list: &[f64], dt: f64) -> Result<Vec<VerificationReport>> {
    debruijn_signed(b, t_list, dt, 1.0)
}

/// The de Bruijn check with the sign of the right-hand side flipped, used to
/// confirm that the harness notices a wrong identity.
#[doc(hidden)]
pub fn debruijn_check_mutated(b: &PathBuilder, t_list: &[f64], dt: f64) -> Result<Vec<VerificationReport>> {
    debruijn_signed(b, t_list, dt, -1.0)
}

fn debruijn_signed(b: &PathBuilder, t_list: &[f64], dt: f64, sign: f64) -> Result<Vec<VerificationReport>> {
    let law = *b.law();
    let mut out = Vec::with_capacity(t_list.len());
    for &t in t_list {
        check_t(t, dt)?;
        let (lo, hi) = central(b, t, dt)?;
        let p = b.at(t)?;
        let grid = *p.grid();
        let k = kappa(&law, t);
        let fl = flux(&p);
        let mask = quadrature_mask(&p);
        let (h, hx, g, gx) = (p.h_t.values(), p.h_x.values(), p.g_s.values(), p.g_s_x.values());
        let rhs = -sign * k * masked_integral(&grid, &mask, |i| fl[i] * (hx[i] / h[i] - gx[i] / g[i]));
        let lhs = slope(lo.d, hi.d, dt);
        let d_now = relative_entropy(&p.h_t, &p.g_s)?.value;
        let bterm = boundary(k, &fl, (last(&p.h_t) / last(&p.g_s)).ln() + 1.0);
        let mut r = VerificationReport::new("debruijn", Characteristic, derivative_tolerance(lhs))
            .on_grid(&grid)
            .with_dt(dt)
            .note(oracle_note(b))
            .detail("t", t)
            .detail("relative_entropy", d_now)
            .detail("boundary_term", bterm)
            .scalars(lhs, rhs);
        if let Some((d, dd)) = stable_input_relative_entropy(b, t) {
            r = r.detail("closed_form_relative_entropy", d).detail("closed_form_derivative", dd);
        }
        out.push(r);
    }
    Ok(out)
}

/// Gaussian regression `dD(h_t‖φ_{σ²})/dt = −J(h_t)/(2(1−t))` in the variance
/// convention. The builder's law is `(2, σ²/2)` and the input must have variance `σ²`.
pub fn debruijn_gaussian_check(b: &PathBuilder, t: f64, dt: f64) -> Result<VerificationReport> {
    check_t(t, dt)?;
    let law = *b.law();
    if law.alpha() != 2.0 {
        return Err(Error::InvalidParameter("the Gaussian de Bruijn identity needs alpha = 2".into()));
    }
    let var = 2.0 * law.s();
    let (lo, hi) = central(b, t, dt)?;
    let p = b.at(t)?;
    let j = standardized_fisher_with_slope(&p.h_t, &p.h_x, var)?;
    let lhs = slope(lo.d, hi.d, dt);
    let rhs = -j.value / (2.0 * (1.0 - t));
    Ok(VerificationReport::new("debruijn-gaussian", Convention::Variance, GAUSSIAN_CHANNEL_TOL)
        .on_grid(p.grid())
        .with_dt(dt)
        .note("oracle: standardized Fisher information of h_t")
        .detail("t", t)
        .detail("variance", var)
        .detail("standardized_fisher_information", j.value)
        .scalars(lhs, rhs))
}

/// Entropy, energy, their difference and `∫ h_t²` along the path.
///
/// Returns four reports: `dH/dt`, `dΛ/dt` (prefactor `s/(α(1−t))`; the residual
/// of the printed prefactor `1/(α(1−t))` is in the details), the consistency
/// `dD/dt = dΛ/dt − dH/dt`, and the quadratic `Θ` identity.
pub fn entropy_energy_check(b: &PathBuilder, t: f64, dt: f64) -> Result<Vec<VerificationReport>> {
    check_t(t, dt)?;
    let law = *b.law();
    let s = law.s();
    let (lo, hi) = central(b, t, dt)?;
    let p = b.at(t)?;
    let grid = *p.grid();
    let k = kappa(&law, t);
    let fl = flux(&p);
    let mask = quadrature_mask(&p);
    let (h, hx, g, gx) = (p.h_t.values(), p.h_x.values(), p.g_s.values(), p.g_s_x.values());
    let note = oracle_note(b);

    let dh = slope(lo.h, hi.h, dt);
    let rhs_h = k * masked_integral(&grid, &mask, |i| fl[i] * hx[i] / h[i]);
    let h_edge = last(&p.h_t);
    let entropy_report = VerificationReport::new("entropy-derivative", Characteristic, derivative_tolerance(dh))
        .on_grid(&grid)
        .with_dt(dt)
        .note(note)
        .detail("t", t)
        .detail("boundary_term", -boundary(k, &fl, h_edge.ln() + 1.0))
        .scalars(dh, rhs_h);

    let dl = slope(lo.lambda, hi.lambda, dt);
    let energy_integral = masked_integral(&grid, &mask, |i| fl[i] * gx[i] / g[i]);
    let rhs_l = k * energy_integral;
    let rhs_printed = rhs_l / s;
    let res = (dl - rhs_l).abs();
    let res_printed = (dl - rhs_printed).abs();
    let mut energy_report = VerificationReport::new("energy-derivative", Characteristic, derivative_tolerance(dl))
        .on_grid(&grid)
        .with_dt(dt)
        .note(note)
        .note("prefactor s/(alpha(1-t)); the printed 1/(alpha(1-t)) variant is reported as rhs_printed_prefactor")
        .detail("t", t)
        .detail("rhs_printed_prefactor", rhs_printed)
        .detail("residual_printed_prefactor", res_printed)
        .detail("boundary_term", -boundary(k, &fl, last(&p.g_s).ln()))
        .scalars(dl, rhs_l);
    if res > 0.0 {
        energy_report = energy_report.detail("printed_to_included_residual_ratio", res_printed / res);
    }
    if law.alpha() == 1.0 {
        // ρ^F of the Cauchy law is −2x/(s²+x²)
        let cauchy_form = -(s / (1.0 - t))
            * masked_integral(&grid, &mask, |i| {
                let x = grid.x(i);
                fl[i] * 2.0 * x / (s * s + x * x)
            });
        energy_report = energy_report.detail("rhs_cauchy_form", cauchy_form);
    }

    let dd = slope(lo.d, hi.d, dt);
    let consistency = VerificationReport::new("entropy-energy-consistency", Characteristic, CONSISTENCY_TOL)
        .on_grid(&grid)
        .with_dt(dt)
        .note("oracle: algebraic identity D = Lambda - H on a common mask")
        .detail("t", t)
        .scalars(dd, dl - dh);

    let dtheta = slope(lo.theta, hi.theta, dt);
    let rhs_theta = -2.0 * k * masked_integral(&grid, &mask, |i| fl[i] * hx[i]);
    let theta = VerificationReport::new("theta-quadratic-derivative", Characteristic, derivative_tolerance(dtheta))
        .on_grid(&grid)
        .with_dt(dt)
        .note("oracle: central difference in t as its own reference")
        .detail("t", t)
        .detail("boundary_term", boundary(k, &fl, 2.0 * h_edge))
        .scalars(dtheta, rhs_theta);

    Ok(vec![entropy_report, energy_report, consistency, theta])
}

/// `dI/dt = κ ∫ h_t (ρ^M + x/(st)) ρ^F_{h_t}`.
pub fn mutual_info_check(b: &PathBuilder, t: f64, dt: f64) -> Result<VerificationReport> {
    check_t(t, dt)?;
    let law = *b.law();
    let (lo, hi) = central(b, t, dt)?;
    let p = b.at(t)?;
    let grid = *p.grid();
    let k = kappa(&law, t);
    let fl = channel_flux(&p);
    let mask = quadrature_mask(&p);
    let (h, hx) = (p.h_t.values(), p.h_x.values());
    let lhs = slope(lo.info, hi.info, dt);
    let rhs = k * masked_integral(&grid, &mask, |i| fl[i] * hx[i] / h[i]);
    Ok(VerificationReport::new("mutual-information-derivative", Characteristic, derivative_tolerance(lhs))
        .on_grid(&grid)
        .with_dt(dt)
        .note(oracle_note(b))
        .detail("t", t)
        .detail("mutual_information", scalars(&p)?.info)
        .detail("boundary_term", -boundary(k, &fl, last(&p.h_t).ln() + 1.0))
        .scalars(lhs, rhs))
}

/// Gaussian channel `Y = √(1−t) X + √t Z` with `Z ~ N(0,1)`: the score identity,
/// `dI/dt = −mmse/(2t²)` and `dI/dsnr = mmse/2` at `snr = (1−t)/t`.
pub fn gaussian_mmse_check(b: &PathBuilder, t_list: &[f64], dt: f64) -> Result<Vec<VerificationReport>> {
    let law = *b.law();
    if law.alpha() != 2.0 || (law.s() - 0.5).abs() > 1e-12 {
        return Err(Error::InvalidParameter(
            "the Gaussian channel needs alpha = 2 with unit noise variance (s = 1/2)".into(),
        ));
    }
    match b.family() {
        Some(f) if f.variance().is_none() => {
            return Err(Error::InvalidParameter(format!("input {f} has infinite variance")));
        }
        _ => {}
    }
    let mut out = Vec::new();
    for &t in t_list {
        check_t(t, dt)?;
        let p = b.at(t)?;
        let grid = *p.grid();
        let scores = p.scores();
        let (xh, _) = p.estimators(&scores)?;
        let c = (1.0 - t).sqrt();
        let mut sup = 0.0f64;
        let mut weighted = vec![0.0; grid.n()];
        for i in 0..grid.n() {
            if scores.valid_mask[i] {
                let via_estimator = (c * xh.values()[i] - grid.x(i)) / t;
                let d = (scores.fisher_score.values()[i] - via_estimator).abs();
                sup = sup.max(d);
                weighted[i] = d * p.h_t.values()[i];
            }
        }
        let mut score_report = VerificationReport::new("gaussian-channel-score", Convention::Variance, GAUSSIAN_CHANNEL_TOL)
            .on_grid(&grid)
            .note("oracle: two independent computations of the Fisher score")
            .detail("t", t)
            .finish(sup);
        score_report.residual_l1 = Some(trapezoid(&weighted, grid.spacing()));
        out.push(score_report);

        let mmse = p.mmse_value(&scores)?;
        let (lo, hi) = central(b, t, dt)?;
        let di = slope(lo.info, hi.info, dt);
        let snr = (1.0 - t) / t;
        out.push(
            VerificationReport::new("gaussian-channel-dIdt", Convention::Variance, GAUSSIAN_CHANNEL_TOL)
                .on_grid(&grid)
                .with_dt(dt)
                .note("oracle: mmse by double quadrature")
                .detail("t", t)
                .detail("mmse", mmse.value)
                .scalars(di, -mmse.value / (2.0 * t * t)),
        );
        out.push(
            VerificationReport::new("gaussian-channel-dIdsnr", Convention::Variance, GAUSSIAN_CHANNEL_TOL)
                .on_grid(&grid)
                .with_dt(dt)
                .note("change of variables snr = (1-t)/t")
                .detail("t", t)
                .detail("snr", snr)
                .detail("mmse", mmse.value)
                .scalars(-t * t * di, mmse.value / 2.0),
        );
    }
    Ok(out)
}

/// Points at which the conditional-expectation identity is checked by default.
pub const DEFAULT_CONDEXP_POINTS: [f64; 7] = [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0];

/// `[g_u ⋆ (y g_v)](x) = (v x/(u+v)) g_{u+v}(x)`.
pub fn condexp_check(alpha: f64, u: f64, v: f64, x_list: &[f64]) -> Result<VerificationReport> {
    let gu = StableLaw::new(alpha, u)?;
    let gv = StableLaw::new(alpha, v)?;
    let guv = StableLaw::new(alpha, u + v)?;
    // light tails are cheap to cover completely; heavy ones only to the density limit
    let budget = if alpha == 2.0 { 1e-14 } else { DENSITY_TAIL_LIMIT / 2.0 };
    let half_width = gu.recommended_half_width(budget)?.max(gv.recommended_half_width(budget)?)
        + x_list.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let spacing = gu.width().min(gv.width()) / 20.0;
    let grid = Grid::covering(half_width, spacing, MAX_GRID_N)?;
    let a = gu.density(&grid)?;
    let b = gv.density(&grid)?.map(|y, g| y * g);
    let conv = a.convolve(&b)?;
    let mut sup = 0.0f64;
    let mut scale = 0.0f64;
    let mut r = VerificationReport::new("conditional-expectation", Characteristic, CONDEXP_TOL).on_grid(&grid);
    for &x in x_list {
        let lhs = conv
            .interpolate(x)
            .ok_or_else(|| Error::InvalidParameter(format!("x = {x} lies outside the grid")))?;
        let rhs = v * x / (u + v) * guv.pdf(x);
        sup = sup.max((lhs - rhs).abs());
        scale = scale.max(rhs.abs());
        r = r.detail(&format!("lhs_at_{x}"), lhs).detail(&format!("rhs_at_{x}"), rhs);
    }
    if scale == 0.0 {
        scale = guv.pdf(0.0);
    }
    Ok(r.note("oracle: closed form (v x/(u+v)) g_{u+v}(x)")
        .detail("alpha", alpha)
        .detail("u", u)
        .detail("v", v)
        .detail("sup_abs_error", sup)
        .detail("normalization", scale)
        .finish(sup / scale))
}

/// Mean zero, oddness, and for stable inputs of the same exponent the closed form
/// `ρ^M + x/s = x (a − s)/(s a)` with `a = u(1−t) + st`, measured against
/// `max(1, sup |closed form|)` on the mask.
///
/// The residual is the largest of the three defects divided by its own tolerance,
/// so the report passes when the residual is at most 1.
pub fn score_properties_check(b: &PathBuilder, t_list: &[f64]) -> Result<VerificationReport> {
    let law = *b.law();
    let s = law.s();
    let grid = *b.grid();
    let mut mean = 0.0f64;
    let mut oddness = 0.0f64;
    let mut linear: Option<f64> = None;
    for &t in t_list {
        let p = b.at(t)?;
        let sc = p.scores();
        let psi = sc.standardized_mmse.values();
        let m: Vec<f64> = (0..grid.n()).map(|i| p.h_t.values()[i] * psi[i]).collect();
        mean = mean.max(trapezoid(&m, grid.spacing()).abs());
        let rho = sc.mmse_score.values();
        let peak = rho.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
        let n = grid.n();
        for i in 0..n / 2 {
            oddness = oddness.max((rho[i] + rho[n - 1 - i]).abs() / peak);
        }
        if let Some(u) = input_stable_scale(b) {
            let a = u * (1.0 - t) + s * t;
            let mut sup = 0.0f64;
            let mut size = 1.0f64;
            for i in 0..n {
                if sc.valid_mask[i] {
                    let x = grid.x(i);
                    let exact = x * (a - s) / (s * a);
                    sup = sup.max((psi[i] - exact).abs());
                    size = size.max(exact.abs());
                }
            }
            // relative once the closed form exceeds 1; absolute for f = g_s where it vanishes
            linear = Some(linear.unwrap_or(0.0).max(sup / size));
        }
    }
    let mut residual = (mean / MEAN_ZERO_TOL).max(oddness / ODDNESS_TOL);
    let mut r = VerificationReport::new("score-properties", Characteristic, 1.0)
        .on_grid(&grid)
        .note(oracle_note(b))
        .note("residual is the largest defect relative to its tolerance")
        .detail("mean_zero_defect", mean)
        .detail("oddness_defect", oddness);
    if let Some(l) = linear {
        residual = residual.max(l / SCORE_LINEARITY_TOL);
        r = r.detail("closed_form_score_defect", l);
    }
    Ok(r.finish(residual))
}

/// Quantities whose central differences are checked for second-order convergence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantity {
    RelativeEntropy,
    Entropy,
    Energy,
    MutualInformation,
    ThetaQuadratic,
    /// `h_t` itself, compared in sup norm on the score mask.
    Density,
}

fn difference(b: &PathBuilder, q: Quantity, t: f64, dt: f64) -> Result<Vec<f64>> {
    let lo = b.at(t - dt)?;
    let hi = b.at(t + dt)?;
    if q == Quantity::Density {
        return Ok((0..lo.grid().n())
            .map(|i| (hi.h_t.values()[i] - lo.h_t.values()[i]) / (2.0 * dt))
            .collect());
    }
    let (a, c) = (scalars(&lo)?, scalars(&hi)?);
    let pick = |x: &Scalars| match q {
        Quantity::RelativeEntropy => x.d,
        Quantity::Entropy => x.h,
        Quantity::Energy => x.lambda,
        Quantity::MutualInformation => x.info,
        Quantity::ThetaQuadratic => x.theta,
        Quantity::Density => unreachable!(),
    };
    Ok(vec![(pick(&c) - pick(&a)) / (2.0 * dt)])
}

/// Ratio `|L(dt) − L(dt/2)| / |L(dt/2) − L(dt/4)|` of central differences, which is 4
/// for a second-order scheme.
pub fn richardson_check(b: &PathBuilder, q: Quantity, t: f64, dt: f64) -> Result<VerificationReport> {
    check_t(t, dt)?;
    let l1 = difference(b, q, t, dt)?;
    let l2 = difference(b, q, t, dt / 2.0)?;
    let l3 = difference(b, q, t, dt / 4.0)?;
    let mask = b.at(t)?.mask();
    let sup = |a: &[f64], c: &[f64]| {
        a.iter()
            .zip(c)
            .enumerate()
            .filter(|(i, _)| a.len() == 1 || mask[*i])
            .fold(0.0f64, |m, (_, (x, y))| m.max((x - y).abs()))
    };
    let (d1, d2) = (sup(&l1, &l2), sup(&l2, &l3));
    let scale = l3.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    // A quantity linear in t has no dt² term; the differences are then pure round-off.
    let degenerate = d1 <= RICHARDSON_ROUNDOFF * scale;
    let ratio = d1 / d2;
    let (lo, hi) = RICHARDSON_RANGE;
    let centre = 0.5 * (lo + hi);
    let mut r = VerificationReport::new(
        format!("richardson-{}", serde_json::to_value(q).map(|v| v.as_str().unwrap_or("").to_string()).unwrap_or_default()),
        Characteristic,
        0.5 * (hi - lo),
    )
    .on_grid(b.grid())
    .with_dt(dt)
    .note("second-order central differences halve dt twice; expected ratio 4")
    .detail("t", t)
    .detail("ratio", ratio)
    .detail("difference_dt", d1)
    .detail("difference_half_dt", d2);
    if l1.len() == 1 {
        r.lhs_value = Some(l3[0]);
    }
    if degenerate {
        r = r
            .note("differences at round-off level: no second-order term to measure")
            .detail("degenerate", 1.0);
        return Ok(r.finish(0.0));
    }
    Ok(r.finish((ratio - centre).abs()))
}
