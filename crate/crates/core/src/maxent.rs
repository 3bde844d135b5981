//! Maximum-entropy constructions around stable laws: a law outside the domain of
//! normal attraction with more entropy than the stable law, the entropy power
//! inequality, the Cauchy sign condition and monotonicity of the energy.

use std::f64::consts::{E, PI};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::functionals::{cross_entropy, entropy};
use crate::grid::{Grid, GridFunction};
use crate::path::{Convention, PathBuilder};
use crate::spectral::{self, PowerTail};
use crate::stable::StableLaw;
use crate::tolerances::{EPI_SLACK_TOL, INEQUALITY_SLACK, SIGN_TOL_REL};
use crate::verify::VerificationReport;

/// Sample counts accepted for normalized sums.
pub const ALLOWED_SUM_SIZES: [usize; 6] = [1, 2, 4, 8, 16, 32];

/// Tolerance on the entropy margin between two grid resolutions.
const MARGIN_RESOLUTION_TOL: f64 = 1e-3;

/// Tolerance on `H(f) ≤ log 4πs` once the sign condition holds.
const CAUCHY_BOUND_TOL: f64 = 1e-3;

#[derive(Clone, Debug, Serialize)]
pub struct AttractionDiagnostic {
    pub n_list: Vec<usize>,
    pub sup_distances: Vec<f64>,
    pub entropies: Vec<f64>,
}

/// Entropy power `e^{2H}/(2πe)`.
pub fn entropy_power(h: f64) -> f64 {
    (2.0 * h).exp() / (2.0 * PI * E)
}

/// Density with characteristic function `exp(-a|θ|^β - s|θ|^α)`.
fn two_term_density(grid: &Grid, alpha: f64, beta: f64, a: f64, s: f64) -> Result<GridFunction> {
    let heavy = StableLaw::new(alpha, s)?;
    let mut tails: Vec<PowerTail> = heavy.density_tails().into_iter().take(1).collect();
    if beta < 2.0 {
        tails.extend(StableLaw::new(beta, a)?.density_tails().into_iter().take(1));
    }
    let v = spectral::invert_cf(grid, |th| (-a * th.abs().powf(beta) - s * th.abs().powf(alpha)).exp(), &tails);
    Ok(GridFunction::new(*grid, v)?.symmetrized().floored())
}

fn doubled(grid: &Grid) -> Result<Grid> {
    Grid::new(grid.half_width(), 2 * grid.n())
}

/// `X = Z^{(β)}_1 + Z^{(α)}_s` has more entropy than `Z^{(α)}_s`, yet
/// `(X_1 + … + X_n)/n^{1/α}` converges to `g_s^{(α)}`.
///
/// The report's residual is the largest defect relative to its tolerance: the
/// change of the entropy margin under a 2× finer grid (1e-3), a nonpositive margin,
/// and a distance that fails to decrease along `n_list`. The ratio of the
/// distances at `n = 32` and `n = 1` is reported but not judged.
pub fn notdoa_counterexample(
    alpha: f64,
    beta: f64,
    s: f64,
    n_list: &[usize],
    grid: &Grid,
) -> Result<(VerificationReport, AttractionDiagnostic)> {
    if !(beta > alpha && beta <= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "need alpha < beta <= 2, got alpha = {alpha}, beta = {beta}"
        )));
    }
    if let Some(n) = n_list.iter().find(|n| !ALLOWED_SUM_SIZES.contains(n)) {
        return Err(Error::InvalidParameter(format!("n = {n} is not one of {ALLOWED_SUM_SIZES:?}")));
    }
    let law = StableLaw::new(alpha, s)?;

    let margin_at = |g: &Grid| -> Result<(f64, f64, f64)> {
        let x = two_term_density(g, alpha, beta, 1.0, s)?;
        let hx = entropy(&x).value;
        let hz = entropy(&law.density(g)?).value;
        Ok((hx - hz, hx, hz))
    };
    let (margin, hx, hz) = margin_at(grid)?;
    let (margin_fine, _, _) = margin_at(&doubled(grid)?)?;

    let gs = law.density(grid)?;
    let mut distances = Vec::with_capacity(n_list.len());
    let mut entropies = Vec::with_capacity(n_list.len());
    for &n in n_list {
        // cf_X(θ/n^{1/α})^n = exp(-n^{1-β/α}|θ|^β - s|θ|^α)
        let a = (n as f64).powf(1.0 - beta / alpha);
        let d = two_term_density(grid, alpha, beta, a, s)?;
        distances.push(d.values().iter().zip(gs.values()).fold(0.0f64, |m, (p, q)| m.max((p - q).abs())));
        entropies.push(entropy(&d).value);
    }

    // Z^{(β)}_1 is Gaussian with variance 2 when β = 2
    let h_beta = if beta == 2.0 {
        0.5 * (2.0 * PI * E * 2.0).ln()
    } else {
        entropy(&StableLaw::new(beta, 1.0)?.density(grid)?).value
    };
    let epi_slack = entropy_power(hx) - entropy_power(h_beta) - entropy_power(hz);

    let drift = (margin - margin_fine).abs();
    let mut residual = drift / MARGIN_RESOLUTION_TOL;
    if margin <= 0.0 {
        residual = residual.max(1.0 + margin.abs() / MARGIN_RESOLUTION_TOL);
    }
    for w in distances.windows(2) {
        if w[1] >= w[0] {
            residual = residual.max(1.0 + w[1] / w[0]);
        }
    }
    let first = n_list.iter().position(|n| *n == 1);
    let last = n_list.iter().position(|n| *n == 32);
    let mut report = VerificationReport::new("notdoa-counterexample", Convention::Characteristic, 1.0)
        .on_grid(grid)
        .note("oracle: direct inversion of exp(-n^(1-beta/alpha)|theta|^beta - s|theta|^alpha)")
        .note("residual is the largest defect relative to its tolerance")
        .detail("alpha", alpha)
        .detail("beta", beta)
        .detail("s", s)
        .detail("entropy_x", hx)
        .detail("entropy_stable", hz)
        .detail("entropy_margin", margin)
        .detail("entropy_margin_fine_grid", margin_fine)
        .detail("margin_resolution_drift", drift)
        .detail("epi_slack", epi_slack);
    if let (Some(i), Some(j)) = (first, last) {
        report = report.detail("distance_ratio_32_to_1", distances[j] / distances[i]);
    }
    let report = report.finish(residual);
    Ok((report, AttractionDiagnostic { n_list: n_list.to_vec(), sup_distances: distances, entropies }))
}

/// `N(f ⋆ g) ≥ N(f) + N(g)` with `N = e^{2H}/(2πe)`; fails when the slack is
/// below `-1e-3`.
pub fn epi_check(f: &GridFunction, g: &GridFunction) -> Result<VerificationReport> {
    let conv = f.convolve(g)?;
    let (hf, hg, hc) = (entropy(f).value, entropy(g).value, entropy(&conv).value);
    let slack = entropy_power(hc) - entropy_power(hf) - entropy_power(hg);
    Ok(VerificationReport::new("entropy-power-inequality", Convention::Characteristic, EPI_SLACK_TOL)
        .on_grid(f.grid())
        .note("oracle: entropy powers of grid quadratures")
        .detail("entropy_power_sum", entropy_power(hc))
        .detail("entropy_power_f", entropy_power(hf))
        .detail("entropy_power_g", entropy_power(hg))
        .detail("slack", slack)
        .finish((-slack).max(0.0)))
}

fn require_cauchy(b: &PathBuilder) -> Result<()> {
    if b.law().alpha() != 1.0 {
        return Err(Error::InvalidParameter(format!("the Cauchy criteria need alpha = 1, got {}", b.law().alpha())));
    }
    Ok(())
}

fn check_t_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() || t_grid.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
        return Err(Error::InvalidParameter("t_grid must be a nonempty subset of (0, 1]".into()));
    }
    Ok(())
}

const FINITE_T_GRID_NOTE: &str = "the sign hypothesis is certified only on the tested t_grid and grid points";

/// Whether `ρ^M + x/s` has the sign opposite to `x` on every tested `t`.
///
/// A point counts as violating when `sgn(x)(ρ^M(x) + x/s)` exceeds `1e-6` times
/// the largest `|ρ^M|` on the mask. When the condition holds, the entropy of
/// the input must not exceed `log 4πs`; when it fails nothing is concluded and
/// the report passes.
pub fn cauchy_sign_condition(b: &PathBuilder, t_grid: &[f64]) -> Result<VerificationReport> {
    require_cauchy(b)?;
    check_t_grid(t_grid)?;
    let s = b.law().s();
    let grid = *b.grid();
    let mut worst = f64::NEG_INFINITY;
    let mut failing_t = Vec::new();
    for &t in t_grid {
        let p = b.at(t)?;
        let sc = p.scores();
        let peak = sc.mmse_score.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = SIGN_TOL_REL * peak;
        let mut w = f64::NEG_INFINITY;
        for (i, on) in sc.valid_mask.iter().enumerate() {
            if *on {
                let x = grid.x(i);
                w = w.max(x.signum() * sc.standardized_mmse.values()[i] - tol);
            }
        }
        if w > 0.0 {
            failing_t.push(t);
        }
        worst = worst.max(w);
    }
    let holds = failing_t.is_empty();
    let h = entropy(b.input()).value;
    let bound = (4.0 * PI * s).ln();
    let mut r = VerificationReport::new("cauchy-sign-condition", Convention::Characteristic, CAUCHY_BOUND_TOL)
        .on_grid(&grid)
        .note(FINITE_T_GRID_NOTE)
        .detail("s", s)
        .detail("condition_holds", if holds { 1.0 } else { 0.0 })
        .detail("worst_signed_excess", worst)
        .detail("entropy_input", h)
        .detail("cauchy_entropy", bound);
    if holds {
        r.lhs_value = Some(h);
        r.rhs_value = Some(bound);
        r = r.note("condition holds on the t_grid; checking H(f) <= log(4 pi s)");
        Ok(r.finish((h - bound).max(0.0)))
    } else {
        r = r.note(format!("condition fails, no conclusion (fails at t = {failing_t:?})"));
        Ok(r.finish(0.0))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LambdaTable {
    pub t: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Closed form when the input is stable with the law's exponent.
    pub closed_form: Vec<Option<f64>>,
}

/// Energy `Λ_s(X_t)` of a stable input of scale `u`: `X_t` is stable of scale
/// `a = u(1−t) + st`.
fn closed_form_energy(law: &StableLaw, u: f64, t: f64) -> Option<f64> {
    let s = law.s();
    let a = u * (1.0 - t) + s * t;
    if law.alpha() == 1.0 {
        Some((PI / s).ln() + 2.0 * (s + a).ln())
    } else if law.alpha() == 2.0 {
        Some(0.5 * (4.0 * PI * s).ln() + a / (2.0 * s))
    } else {
        None
    }
}

/// `Λ_s(X_t)` on `t_grid` (with `t = 0` added), and the chain
/// `H(f) ≤ Λ(X_0) ≤ Λ(X_1) = H(g_s)` when `Λ` is nondecreasing.
///
/// For `α = 1` the integrand `h_t ψ 2x/(s²+x²)` of the derivative is also checked for
/// sign on the score mask; the fraction of nonpositive points is reported.
pub fn lambda_monotonicity(b: &PathBuilder, t_grid: &[f64]) -> Result<(VerificationReport, LambdaTable)> {
    check_t_grid(t_grid)?;
    let law = *b.law();
    let s = law.s();
    let grid = *b.grid();
    let u = b.family().and_then(|f| f.stable_scale(law.alpha()));
    let mut ts = vec![0.0];
    ts.extend(t_grid.iter().copied());
    if *ts.last().expect("nonempty") != 1.0 {
        ts.push(1.0);
    }
    let mut lambda = Vec::with_capacity(ts.len());
    let mut nonpositive = 0usize;
    let mut counted = 0usize;
    for &t in &ts {
        if t == 0.0 {
            lambda.push(cross_entropy(b.input(), b.stable_density())?.value);
            continue;
        }
        let p = b.at(t)?;
        lambda.push(cross_entropy(&p.h_t, &p.g_s)?.value);
        if law.alpha() == 1.0 && t < 1.0 {
            let sc = p.scores();
            for (i, on) in sc.valid_mask.iter().enumerate() {
                if *on {
                    let x = grid.x(i);
                    let v = p.h_t.values()[i] * sc.standardized_mmse.values()[i] * 2.0 * x / (s * s + x * x);
                    counted += 1;
                    if v <= 0.0 {
                        nonpositive += 1;
                    }
                }
            }
        }
    }
    let closed: Vec<Option<f64>> = ts.iter().map(|t| u.and_then(|u| closed_form_energy(&law, u, *t))).collect();
    let monotone = lambda.windows(2).all(|w| w[1] >= w[0] - INEQUALITY_SLACK);
    let h_input = entropy(b.input()).value;
    let h_stable = entropy(b.stable_density()).value;
    let mut r = VerificationReport::new("lambda-monotonicity", Convention::Characteristic, INEQUALITY_SLACK)
        .on_grid(&grid)
        .note(FINITE_T_GRID_NOTE)
        .detail("entropy_input", h_input)
        .detail("entropy_stable", h_stable)
        .detail("lambda_start", lambda[0])
        .detail("lambda_end", *lambda.last().expect("nonempty"))
        .detail("monotone", if monotone { 1.0 } else { 0.0 });
    if counted > 0 {
        r = r.detail("integrand_nonpositive_fraction", nonpositive as f64 / counted as f64);
    }
    let errors: Vec<f64> = closed.iter().zip(&lambda).filter_map(|(c, l)| c.map(|c| (c - l).abs())).collect();
    if !errors.is_empty() {
        r = r.detail("closed_form_max_error", errors.iter().fold(0.0f64, |m, e| m.max(*e)));
    }
    let table = LambdaTable { t: ts, lambda: lambda.clone(), closed_form: closed };
    if monotone {
        // H(f) ≤ Λ(X_0) ≤ Λ(X_1) = H(g_s)
        let gibbs = (h_input - lambda[0]).max(0.0);
        let rise = (lambda[0] - lambda[lambda.len() - 1]).max(0.0);
        let end = (lambda[lambda.len() - 1] - h_stable).abs();
        r = r
            .note("Lambda nondecreasing on the t_grid; chain H(f) <= Lambda(X_0) <= Lambda(X_1) = H(g_s) checked")
            .detail("chain_defect", gibbs.max(rise).max(end));
        Ok((r.finish(gibbs.max(rise).max(end)), table))
    } else {
        r = r.note("Lambda not monotone on the t_grid; chain not applicable");
        Ok((r.finish(0.0), table))
    }
}
