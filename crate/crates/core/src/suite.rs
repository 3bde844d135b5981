//! The verification battery behind `stable-lab suite`.
//!
//! Each entry is tagged with the numbered acceptance criterion it serves. The
//! quick profile runs a single time point for the derivative identities and
//! skips the second-order convergence checks; the full profile runs everything.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::Result;
use crate::families::Family;
use crate::grid::Grid;
use crate::maxent::{cauchy_sign_condition, epi_check, lambda_monotonicity, notdoa_counterexample};
use crate::path::{Convention, PathBuilder};
use crate::stable::StableLaw;
use crate::tolerances::{DEFAULT_DT, MASS_EPS};
use crate::verify::{self, Quantity, VerificationReport, DEFAULT_CONDEXP_POINTS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Quick,
    Full,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteEntry {
    pub criterion: u32,
    pub label: String,
    pub report: VerificationReport,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SuiteOptions {
    /// Flip the sign of the de Bruijn right-hand side, to confirm the battery fails.
    pub inject_fault: bool,
}

fn entry(criterion: u32, label: impl Into<String>, report: VerificationReport) -> SuiteEntry {
    SuiteEntry { criterion, label: label.into(), report }
}

fn builder(family: &Family, law: StableLaw, half_width: f64, n: usize) -> Result<PathBuilder> {
    PathBuilder::analytic(family, law, Grid::new(half_width, n)?)
}

fn cauchy_law(s: f64) -> StableLaw {
    StableLaw::cauchy(s).expect("positive scale")
}

fn mixture() -> Family {
    Family::GaussianMixture(vec![(0.5, 0.5), (2.0, 0.5)])
}

/// Inputs shared by several criteria.
struct Fixtures {
    cauchy_half: PathBuilder,
    mixture: PathBuilder,
}

impl Fixtures {
    fn new() -> Result<Self> {
        Ok(Self {
            cauchy_half: builder(&Family::Cauchy(0.5), cauchy_law(1.0), 8000.0, 1 << 18)?,
            mixture: builder(&mixture(), StableLaw::new(2.0, 1.0)?, 20.0, 1 << 12)?,
        })
    }
}

fn criterion_1() -> Result<Vec<SuiteEntry>> {
    let mut out = Vec::new();
    for alpha in [1.0, 1.5, 2.0] {
        for u in [0.5, 1.0] {
            for v in [0.5, 2.0] {
                let r = verify::condexp_check(alpha, u, v, &DEFAULT_CONDEXP_POINTS)?;
                out.push(entry(1, format!("condexp alpha={alpha} u={u} v={v}"), r));
            }
        }
    }
    let r = verify::condexp_check(1.0, 1.0, 1.0, &[1.0])?;
    let lhs = r.details["lhs_at_1"];
    let point = VerificationReport::new("conditional-expectation-cauchy-point", Convention::Characteristic, 1e-5)
        .note("oracle: closed form 1/(5 pi)")
        .scalars(lhs, 1.0 / (5.0 * PI));
    out.push(entry(1, "condexp cauchy point x=1", point));
    Ok(out)
}

fn criterion_2() -> Result<Vec<SuiteEntry>> {
    let ts = [0.25, 0.5, 0.75];
    let mut out = Vec::new();
    for (alpha, l, n) in [(1.0, 2000.0, 1 << 16), (1.5, 1000.0, 1 << 15), (2.0, 16.0, 1 << 11)] {
        let law = StableLaw::new(alpha, 1.0)?;
        let b = builder(&Family::Stable(law), law, l, n)?;
        out.push(entry(2, format!("stable score linearity alpha={alpha}"), verify::score_properties_check(&b, &ts)?));
    }
    Ok(out)
}

fn criterion_3(fx: &Fixtures) -> Result<Vec<SuiteEntry>> {
    let mut out = Vec::new();
    let b = builder(&Family::Cauchy(2.0), cauchy_law(1.0), 2000.0, 1 << 17)?;
    out.push(entry(3, "pde cauchy:2 law (1,1) t=0.5", verify::pde_residual(&b, 0.5, DEFAULT_DT)?));
    out.push(entry(3, "pde gaussian-mixture law (2,1) t=0.5", verify::pde_residual(&fx.mixture, 0.5, DEFAULT_DT)?));
    let law = StableLaw::new(1.5, 1.0)?;
    let b = builder(&Family::Stable(law), law, 1000.0, 1 << 15)?;
    out.push(entry(3, "pde stable:1.5,1 law (1.5,1) t=0.5", verify::pde_residual(&b, 0.5, DEFAULT_DT)?));
    let b = builder(&Family::Stable(StableLaw::new(1.5, 0.5)?), law, 1000.0, 1 << 15)?;
    out.push(entry(3, "pde stable:1.5,0.5 law (1.5,1) t=0.5", verify::pde_residual(&b, 0.5, DEFAULT_DT)?));
    Ok(out)
}

fn criterion_4(fx: &Fixtures, profile: Profile, opts: SuiteOptions) -> Result<Vec<SuiteEntry>> {
    let ts: &[f64] = match profile {
        Profile::Quick => &[0.5],
        Profile::Full => &[0.25, 0.5, 0.75],
    };
    let reports = if opts.inject_fault {
        verify::debruijn_check_mutated(&fx.cauchy_half, ts, DEFAULT_DT)?
    } else {
        verify::debruijn_check(&fx.cauchy_half, ts, DEFAULT_DT)?
    };
    let mut out = Vec::new();
    for r in reports {
        let t = r.details["t"];
        // the finite-difference derivative must also agree with the closed form
        let oracle = VerificationReport::new("debruijn-closed-form", Convention::Characteristic, r.tolerance)
            .note("oracle: D = log((1+g)^2/(4g)), g = (1+t)/2")
            .detail("t", t)
            .scalars(r.lhs_value.unwrap_or(f64::NAN), r.details["closed_form_derivative"]);
        out.push(entry(4, format!("debruijn cauchy:0.5 t={t}"), r));
        out.push(entry(4, format!("debruijn closed form cauchy:0.5 t={t}"), oracle));
    }
    let law = StableLaw::gaussian_variance(1.0)?;
    let lap = builder(&Family::Laplace(0.5f64.sqrt()), law, 30.0, 1 << 13)?;
    out.push(entry(4, "debruijn gaussian regression laplace t=0.5", verify::debruijn_gaussian_check(&lap, 0.5, DEFAULT_DT)?));
    let law = StableLaw::gaussian_variance(1.25)?;
    let mix = builder(&mixture(), law, 20.0, 1 << 12)?;
    out.push(entry(4, "debruijn gaussian regression mixture t=0.5", verify::debruijn_gaussian_check(&mix, 0.5, DEFAULT_DT)?));
    Ok(out)
}

fn criterion_5(fx: &Fixtures, profile: Profile) -> Result<Vec<SuiteEntry>> {
    let mut out = Vec::new();
    let mut push = |label: &str, reports: Vec<VerificationReport>| {
        for r in reports {
            out.push(entry(5, format!("{label} {}", r.identity_name), r));
        }
    };
    push("cauchy:0.5 law (1,1) t=0.5", verify::entropy_energy_check(&fx.cauchy_half, 0.5, DEFAULT_DT)?);
    push("gaussian-mixture law (2,1) t=0.5", verify::entropy_energy_check(&fx.mixture, 0.5, DEFAULT_DT)?);
    let two = builder(&Family::Cauchy(0.5), cauchy_law(2.0), 16000.0, 1 << 19)?;
    let reports = verify::entropy_energy_check(&two, 0.5, DEFAULT_DT)?;
    let ratio = reports[1].details.get("printed_to_included_residual_ratio").copied().unwrap_or(f64::NAN);
    push("cauchy:0.5 law (1,2) t=0.5", reports);
    out.push(entry(
        5,
        "energy prefactor resolution at s=2",
        VerificationReport::new("energy-prefactor-resolution", Convention::Characteristic, 1.0)
            .note("printed-prefactor residual must be at least 10x the s-included residual")
            .detail("ratio", ratio)
            .finish(10.0 / ratio),
    ));
    if profile == Profile::Full {
        let law = StableLaw::new(1.5, 1.0)?;
        let b = builder(&Family::Stable(StableLaw::new(1.5, 0.5)?), law, 1000.0, 1 << 15)?;
        for r in verify::entropy_energy_check(&b, 0.5, DEFAULT_DT)? {
            if r.identity_name == "entropy-energy-consistency" {
                out.push(entry(5, "stable:1.5,0.5 law (1.5,1) consistency", r));
            }
        }
    }
    Ok(out)
}

fn criterion_6(fx: &Fixtures) -> Result<Vec<SuiteEntry>> {
    let mut out = vec![
        entry(6, "mutinfo cauchy:0.5 law (1,1) t=0.5", verify::mutual_info_check(&fx.cauchy_half, 0.5, DEFAULT_DT)?),
        entry(6, "mutinfo gaussian-mixture law (2,1) t=0.5", verify::mutual_info_check(&fx.mixture, 0.5, DEFAULT_DT)?),
    ];
    let law = StableLaw::gaussian_variance(1.0)?;
    let g = builder(&Family::Gaussian(1.0), law, 14.0, 1 << 12)?;
    for r in verify::gaussian_mmse_check(&g, &[0.5], DEFAULT_DT)? {
        out.push(entry(6, format!("gaussian channel N(0,1) snr=1 {}", r.identity_name), r));
    }
    Ok(out)
}

fn criterion_7() -> Result<Vec<SuiteEntry>> {
    let grid = Grid::new(4000.0, 1 << 16)?;
    let (r, _) = notdoa_counterexample(1.0, 2.0, 1.0, &[1, 2, 4, 8, 16, 32], &grid)?;
    Ok(vec![entry(7, "notdoa alpha=1 beta=2 s=1", r)])
}

fn criterion_8() -> Result<Vec<SuiteEntry>> {
    let mut out = Vec::new();
    let light = Grid::new(40.0, 1 << 13)?;
    let heavy = Grid::new(20000.0, 1 << 20)?;
    let pairs: Vec<(Family, Family, Grid)> = vec![
        (Family::Gaussian(1.0), Family::Gaussian(2.0), light),
        (Family::Gaussian(0.5), Family::Gaussian(0.5), light),
        (Family::Cauchy(1.0), Family::Cauchy(1.0), heavy),
        (Family::Cauchy(0.5), Family::Cauchy(2.0), heavy),
        (Family::Gaussian(2.0), Family::Cauchy(1.0), heavy),
        (Family::Laplace(1.0), Family::Gaussian(2.0), light),
        (mixture(), Family::Laplace(0.5), light),
    ];
    for (f, g, grid) in pairs {
        let r = epi_check(&f.sample(&grid)?, &g.sample(&grid)?)?;
        let gaussian_pair = matches!((&f, &g), (Family::Gaussian(_), Family::Gaussian(_)));
        let label = format!("epi {f} * {g}");
        if gaussian_pair {
            let slack = r.details["slack"];
            out.push(entry(
                8,
                format!("{label} equality"),
                VerificationReport::new("entropy-power-equality", Convention::Characteristic, 1e-3)
                    .note("oracle: equality for Gaussian pairs")
                    .detail("slack", slack)
                    .finish(slack.abs()),
            ));
        }
        out.push(entry(8, label, r));
    }
    Ok(out)
}

fn criterion_9() -> Result<Vec<SuiteEntry>> {
    let ts: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
    let law = cauchy_law(1.0);
    let mut out = Vec::new();
    let grid = Grid::new(2000.0, 1 << 16)?;
    let half = PathBuilder::analytic(&Family::Cauchy(0.5), law, grid)?;
    let r = cauchy_sign_condition(&half, &ts)?;
    let holds = r.details["condition_holds"];
    out.push(entry(9, "sign condition cauchy:0.5", r));
    out.push(entry(
        9,
        "sign condition holds for cauchy:0.5",
        VerificationReport::new("sign-condition-holds", Convention::Characteristic, 0.0).finish(1.0 - holds),
    ));
    let two = PathBuilder::analytic(&Family::Cauchy(2.0), law, grid)?;
    let r = cauchy_sign_condition(&two, &ts)?;
    let fails = r.details["condition_holds"] == 0.0 && r.notes.iter().any(|n| n.contains("no conclusion"));
    out.push(entry(9, "sign condition cauchy:2", r));
    out.push(entry(
        9,
        "sign condition fails without conclusion for cauchy:2",
        VerificationReport::new("sign-condition-no-conclusion", Convention::Characteristic, 0.0)
            .finish(if fails { 0.0 } else { 1.0 }),
    ));
    let wide = Grid::new(20000.0, 1 << 18)?;
    for gamma in [0.5, 2.0] {
        let b = PathBuilder::analytic(&Family::Cauchy(gamma), law, wide)?;
        let (r, _) = lambda_monotonicity(&b, &ts)?;
        let err = r.details["closed_form_max_error"];
        out.push(entry(9, format!("lambda table cauchy:{gamma}"), r));
        out.push(entry(
            9,
            format!("lambda table closed form cauchy:{gamma}"),
            VerificationReport::new("lambda-closed-form", Convention::Characteristic, 2e-3)
                .note("oracle: log pi + 2 log(1 + g_t)")
                .finish(err),
        ));
    }
    Ok(out)
}

fn criterion_10(fx: &Fixtures, profile: Profile) -> Result<Vec<SuiteEntry>> {
    let mut out = Vec::new();
    if profile == Profile::Full {
        for q in [
            Quantity::RelativeEntropy,
            Quantity::Entropy,
            Quantity::Energy,
            Quantity::MutualInformation,
            Quantity::ThetaQuadratic,
            Quantity::Density,
        ] {
            let r = verify::richardson_check(&fx.cauchy_half, q, 0.5, 0.02)?;
            out.push(entry(10, format!("richardson cauchy:0.5 {}", r.identity_name), r));
            let r = verify::richardson_check(&fx.mixture, q, 0.5, 0.02)?;
            out.push(entry(10, format!("richardson gaussian-mixture {}", r.identity_name), r));
        }
    } else {
        let r = verify::richardson_check(&fx.mixture, Quantity::RelativeEntropy, 0.5, 0.02)?;
        out.push(entry(10, "richardson gaussian-mixture relative-entropy", r));
    }
    // masses after tail budgeting
    let mut worst = 0.0f64;
    let mut r = VerificationReport::new("density-mass", Convention::Characteristic, MASS_EPS)
        .note("densities sampled on grids from recommended_half_width(1e-4)");
    for alpha in [0.8, 1.0, 1.3, 1.5, 1.8, 2.0] {
        for s in [0.5, 1.0, 2.0] {
            let law = StableLaw::new(alpha, s)?;
            let l = law.recommended_half_width(1e-4)?;
            let grid = Grid::covering(l, law.width() / 8.0, 1 << 21)?;
            let mass = law.density(&grid)?.integrate();
            worst = worst.max((mass - 1.0).abs());
        }
    }
    for t in [0.25, 0.5, 0.75] {
        for b in [&fx.cauchy_half, &fx.mixture] {
            let mass = b.at(t)?.h_t.integrate();
            worst = worst.max((mass - 1.0).abs());
        }
    }
    r = r.detail("worst_mass_defect", worst);
    out.push(entry(10, "density masses", r.finish(worst)));
    Ok(out)
}

/// Number of acceptance criteria in the battery.
pub const CRITERIA: u32 = 10;

/// Runs the checks of one acceptance criterion.
pub fn run_criterion(criterion: u32, profile: Profile, opts: SuiteOptions) -> Result<Vec<SuiteEntry>> {
    match criterion {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(&Fixtures::new()?),
        4 => criterion_4(&Fixtures::new()?, profile, opts),
        5 => criterion_5(&Fixtures::new()?, profile),
        6 => criterion_6(&Fixtures::new()?),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(&Fixtures::new()?, profile),
        other => Err(crate::error::Error::InvalidParameter(format!("no acceptance criterion {other}"))),
    }
}

/// Runs the battery and returns the entries ordered by criterion.
pub fn run(profile: Profile, opts: SuiteOptions) -> Result<Vec<SuiteEntry>> {
    let mut out = Vec::new();
    for k in 1..=CRITERIA {
        out.extend(run_criterion(k, profile, opts)?);
    }
    Ok(out)
}
