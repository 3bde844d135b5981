//! Command-line front end.
//!
//! Exit codes: 0 on success (every report passes), 1 when a verification
//! fails, 2 on usage errors and invalid parameters.

use std::ffi::OsString;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::families::Family;
use crate::functionals::{self, FunctionalValue, Theta};
use crate::grid::{Grid, GridFunction};
use crate::maxent::{self, ALLOWED_SUM_SIZES};
use crate::path::PathBuilder;
use crate::stable::StableLaw;
use crate::suite::{self, Profile, SuiteOptions};
use crate::tolerances::{DEFAULT_DT, DEFAULT_GRID_N, DEFAULT_TAIL_BUDGET};
use crate::verify::{self, VerificationReport, DEFAULT_CONDEXP_POINTS};

/// Environment variable that replaces the automatic choice of `n`.
pub const GRID_N_ENV: &str = "STABLE_LAB_GRID_N";

/// Largest `n` picked automatically; larger grids must be asked for.
const AUTO_MAX_N: usize = 1 << 20;

/// Samples per feature width on automatic grids; second-order differences need about this many.
const AUTO_POINTS_PER_WIDTH: f64 = 20.0;

/// Light tails cost nothing to cover, so they are covered to round-off.
const LIGHT_TAIL_BUDGET: f64 = 1e-14;

#[derive(Debug, Parser)]
#[command(name = "stable-lab", version, about = "Symmetric stable laws, MMSE scores and information identities")]
struct Cli {
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stable density at points (--at) or on a grid.
    Density(DensityArgs),
    /// MMSE and Fisher scores of the interpolation path at one t.
    Score(ScoreArgs),
    /// A single information functional.
    Functional(FunctionalArgs),
    /// Run one identity check.
    Verify {
        #[command(subcommand)]
        check: VerifyCommand,
    },
    /// Maximum-entropy demonstrations.
    Maxent {
        #[command(subcommand)]
        demo: MaxentCommand,
    },
    /// Run the acceptance battery.
    Suite(SuiteArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args)]
struct LawArgs {
    /// Stability index of the reference law.
    #[arg(long)]
    alpha: f64,
    /// Scale of the reference law (characteristic function exp(-s|θ|^α)).
    #[arg(long)]
    s: f64,
}

impl LawArgs {
    fn law(&self) -> Result<StableLaw> {
        StableLaw::new(self.alpha, self.s)
    }
}

#[derive(Clone, Debug, Args)]
struct GridArgs {
    /// Number of samples (a power of two).
    #[arg(long)]
    n: Option<usize>,
    /// Grid half width; chosen from the tail budget when omitted.
    #[arg(long)]
    half_width: Option<f64>,
    /// Tail mass allowed outside a heavy-tailed grid.
    #[arg(long, default_value_t = DEFAULT_TAIL_BUDGET)]
    tail_budget: f64,
}

impl GridArgs {
    fn given(&self) -> bool {
        self.n.is_some() || self.half_width.is_some()
    }
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Input density: a family spec (cauchy:γ, gaussian:σ², gaussian-mixture:v@w+…, laplace:b, stable:α,s) or a CSV path.
    #[arg(long)]
    input: String,
    /// Symmetrize an asymmetric CSV input instead of rejecting it.
    #[arg(long)]
    symmetrize: bool,
}

#[derive(Debug, Args)]
struct PathArgs {
    #[command(flatten)]
    law: LawArgs,
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Finite-difference step in t.
    #[arg(long, default_value_t = DEFAULT_DT)]
    dt: f64,
    /// Replace the tolerance of every report.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Debug, Args)]
struct DensityArgs {
    #[command(flatten)]
    law: LawArgs,
    /// Evaluation points; without them the density is written on a grid.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    at: Vec<f64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[command(flatten)]
    grid: GridArgs,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[command(flatten)]
    path: PathArgs,
    #[arg(long)]
    t: f64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Entropy,
    Relent,
    Fisher,
    Energy,
    Mutinfo,
    Theta,
}

#[derive(Debug, Args)]
struct FunctionalArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[command(flatten)]
    path: PathArgs,
    /// Evaluate on h_t instead of the input (required for mutinfo).
    #[arg(long)]
    t: Option<f64>,
    /// Θ for --kind theta: quadratic or plog.
    #[arg(long, default_value = "quadratic")]
    theta: Theta,
    /// Variance for the standardized Fisher information; measured on the grid when omitted.
    #[arg(long)]
    variance: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum VerifyCommand {
    /// Stable heat equation for h_t.
    Pde {
        #[command(flatten)]
        path: PathArgs,
        #[arg(long, default_value_t = 0.5)]
        t: f64,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// The α = 2 specialisation against the classical heat equation.
    Heat {
        #[command(flatten)]
        path: PathArgs,
        #[arg(long, default_value_t = 0.5)]
        t: f64,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// Stable de Bruijn identity.
    Debruijn {
        #[command(flatten)]
        path: PathArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        t: Vec<f64>,
        /// Use the variance-convention Gaussian form dD/dt = -J/(2(1-t)) instead (α = 2).
        #[arg(long)]
        gaussian_convention: bool,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// Entropy and energy derivatives and their consistency.
    EntropyEnergy {
        #[command(flatten)]
        path: PathArgs,
        #[arg(long, default_value_t = 0.5)]
        t: f64,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// Derivative of the mutual information along the path.
    Mutinfo {
        #[command(flatten)]
        path: PathArgs,
        #[arg(long, default_value_t = 0.5)]
        t: f64,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// Gaussian channel: dI/dsnr = mmse/2 (law α = 2, s = 0.5).
    GaussianMmse {
        #[command(flatten)]
        path: PathArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        t: Vec<f64>,
        #[command(flatten)]
        check: CheckArgs,
    },
    /// Conditional expectation of stable noise given the sum.
    Condexp {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        u: f64,
        #[arg(long)]
        v: f64,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Vec<f64>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Linearity, oddness and mean-zero properties of the scores.
    ScoreProps {
        #[command(flatten)]
        path: PathArgs,
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75")]
        t: Vec<f64>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

#[derive(Debug, Args)]
struct TGridArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9")]
    t_grid: Vec<f64>,
}

#[derive(Debug, Subcommand)]
enum MaxentCommand {
    /// Entropy margin of a two-term law over the stable law it is attracted to.
    Notdoa {
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long, default_value_t = 2.0)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32")]
        n_list: Vec<usize>,
        #[command(flatten)]
        grid: GridArgs,
        /// Emit the distance(n) table as CSV.
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Entropy power inequality for f ⋆ g.
    Epi {
        #[arg(long)]
        f: Family,
        #[arg(long)]
        g: Family,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Sign condition on the standardized MMSE score (α = 1).
    SignCondition {
        #[command(flatten)]
        path: PathArgs,
        #[command(flatten)]
        t_grid: TGridArgs,
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Energy Λ(t) along the path and the entropy chain.
    Lambda {
        #[command(flatten)]
        path: PathArgs,
        #[command(flatten)]
        t_grid: TGridArgs,
        /// Emit the Λ(t) table as CSV.
        #[arg(long)]
        csv: bool,
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

#[derive(Debug, Args)]
struct SuiteArgs {
    #[arg(value_enum)]
    profile: Profile,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

/// What a command produced: the text to emit and whether every check passed.
struct Output {
    text: String,
    pass: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Self { text, pass: true }
    }
}

/// Parse `argv` (program name first), run the command and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let msg = e.to_string();
            let line = msg.lines().find(|l| !l.trim().is_empty()).unwrap_or("error: invalid arguments");
            eprintln!("{line}");
            return 2;
        }
    };
    match dispatch(&cli.command).and_then(|o| emit(cli.out.as_deref(), &o.text).map(|_| o.pass)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {}", e.to_string().replace('\n', " "));
            2
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => {
            let mut f = File::create(p)?;
            f.write_all(text.as_bytes())?;
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn reports_output(reports: Vec<VerificationReport>, tolerance: Option<f64>) -> Result<Output> {
    let reports: Vec<VerificationReport> = match tolerance {
        Some(t) => {
            if !(t >= 0.0) {
                return Err(Error::InvalidParameter(format!("tolerance must be nonnegative, got {t}")));
            }
            reports.into_iter().map(|r| r.with_tolerance(t)).collect()
        }
        None => reports,
    };
    let pass = reports.iter().all(|r| r.pass);
    Ok(Output { text: to_json(&reports)?, pass })
}

fn dispatch(cmd: &Command) -> Result<Output> {
    match cmd {
        Command::Density(a) => density(a),
        Command::Score(a) => score(a),
        Command::Functional(a) => functional(a),
        Command::Verify { check } => verify_cmd(check),
        Command::Maxent { demo } => maxent_cmd(demo),
        Command::Suite(a) => suite_cmd(a),
    }
}

fn env_grid_n() -> Result<Option<usize>> {
    match std::env::var(GRID_N_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Error::InvalidParameter(format!("{GRID_N_ENV} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

fn light_tailed(f: &Family) -> bool {
    f.variance().is_some()
}

fn half_width_for(family: &Family, budget: f64) -> Result<f64> {
    family.recommended_half_width(if light_tailed(family) { LIGHT_TAIL_BUDGET } else { budget })
}

/// Grid covering every family in `parts` to the tail budget, with about twenty
/// samples across the narrowest feature.
fn resolve_grid(args: &GridArgs, parts: &[Family]) -> Result<Grid> {
    if !(args.tail_budget > 0.0 && args.tail_budget < 0.1) {
        return Err(Error::InvalidParameter(format!("tail budget must lie in (0, 0.1), got {}", args.tail_budget)));
    }
    let half_width = match args.half_width {
        Some(l) => l,
        None => {
            let mut l = 0.0f64;
            for f in parts {
                l = l.max(half_width_for(f, args.tail_budget)?);
            }
            l
        }
    };
    let n = match (args.n, env_grid_n()?) {
        (Some(n), _) | (None, Some(n)) => n,
        (None, None) => {
            let feature = parts.iter().map(Family::feature_scale).fold(f64::INFINITY, f64::min);
            Grid::covering(half_width, feature / AUTO_POINTS_PER_WIDTH, AUTO_MAX_N)?.n().max(DEFAULT_GRID_N)
        }
    };
    Grid::new(half_width, n)
}

enum Input {
    Family(Family),
    Sampled(GridFunction),
}

fn parse_input(spec: &str) -> Result<Input> {
    let p = Path::new(spec);
    if p.is_file() {
        return Ok(Input::Sampled(GridFunction::read_csv(File::open(p)?)?));
    }
    Ok(Input::Family(spec.parse()?))
}

fn path_builder(a: &PathArgs) -> Result<PathBuilder> {
    let law = a.law.law()?;
    match parse_input(&a.input.input)? {
        Input::Family(f) => {
            let grid = resolve_grid(&a.grid, &[f.clone(), Family::Stable(law)])?;
            PathBuilder::analytic(&f, law, grid)
        }
        Input::Sampled(f) => {
            if a.grid.given() {
                return Err(Error::InvalidParameter("--n and --half-width do not apply to CSV input".into()));
            }
            PathBuilder::sampled(f, law, a.input.symmetrize)
        }
    }
}

fn density(a: &DensityArgs) -> Result<Output> {
    let law = a.law.law()?;
    if !a.at.is_empty() {
        let values: Vec<f64> = a.at.iter().map(|x| law.pdf(*x)).collect();
        let text = match a.format.unwrap_or(Format::Json) {
            Format::Text => values.iter().map(|v| format!("{v:.6}\n")).collect(),
            Format::Csv => {
                let mut s = String::from("x,value\n");
                for (x, v) in a.at.iter().zip(&values) {
                    s.push_str(&format!("{x},{v}\n"));
                }
                s
            }
            Format::Json => to_json(&json!({
                "alpha": law.alpha(),
                "s": law.s(),
                "x": a.at,
                "density": values,
            }))?,
        };
        return Ok(Output::ok(text));
    }
    let grid = resolve_grid(&a.grid, &[Family::Stable(law)])?;
    let g = law.density(&grid)?;
    let text = match a.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut buf = Vec::new();
            g.write_csv(&mut buf)?;
            String::from_utf8(buf).expect("csv output is utf-8")
        }
        Format::Json => to_json(&json!({ "x": grid.points(), "value": g.values() }))?,
        Format::Text => return Err(Error::InvalidParameter("text output needs --at".into())),
    };
    Ok(Output::ok(text))
}

fn score(a: &ScoreArgs) -> Result<Output> {
    let path = path_builder(&a.path)?.at(a.t)?;
    let sc = path.scores();
    let g = *path.grid();
    let text = match a.format {
        Format::Json => to_json(&json!({
            "x": g.points(),
            "h_t": path.h_t.values(),
            "mmse_score": sc.mmse_score.values(),
            "fisher_score": sc.fisher_score.values(),
            "standardized_mmse": sc.standardized_mmse.values(),
            "standardized_fisher": sc.standardized_fisher.values(),
            "mask": sc.valid_mask,
        }))?,
        _ => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["x", "h_t", "mmse_score", "fisher_score", "standardized_mmse", "standardized_fisher", "mask"])?;
            for k in 0..g.n() {
                w.write_record([
                    g.x(k).to_string(),
                    path.h_t.values()[k].to_string(),
                    sc.mmse_score.values()[k].to_string(),
                    sc.fisher_score.values()[k].to_string(),
                    sc.standardized_mmse.values()[k].to_string(),
                    sc.standardized_fisher.values()[k].to_string(),
                    u8::from(sc.valid_mask[k]).to_string(),
                ])?;
            }
            let buf = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
            String::from_utf8(buf).expect("csv output is utf-8")
        }
    };
    Ok(Output::ok(text))
}

fn functional(a: &FunctionalArgs) -> Result<Output> {
    let b = path_builder(&a.path)?;
    let law = *b.law();
    let path = a.t.map(|t| b.at(t)).transpose()?;
    let target = path.as_ref().map(|p| &p.h_t).unwrap_or(b.input());
    let value: FunctionalValue = match a.kind {
        Kind::Entropy => functionals::entropy(target),
        Kind::Relent => functionals::relative_entropy(target, b.stable_density())?,
        Kind::Fisher => {
            let v = a.variance.unwrap_or_else(|| functionals::grid_variance(target));
            functionals::standardized_fisher_information(target, v)?
        }
        Kind::Energy => functionals::energy(target, &law)?,
        Kind::Mutinfo => match &path {
            Some(p) => functionals::mutual_information(p),
            None => return Err(Error::InvalidParameter("--kind mutinfo needs --t".into())),
        },
        Kind::Theta => functionals::theta_functional(target, a.theta),
    };
    Ok(Output::ok(to_json(&value)?))
}

fn verify_cmd(cmd: &VerifyCommand) -> Result<Output> {
    match cmd {
        VerifyCommand::Pde { path, t, check } => {
            reports_output(vec![verify::pde_residual(&path_builder(path)?, *t, check.dt)?], check.tolerance)
        }
        VerifyCommand::Heat { path, t, check } => {
            reports_output(vec![verify::heat_equation_check(&path_builder(path)?, *t, check.dt)?], check.tolerance)
        }
        VerifyCommand::Debruijn { path, t, gaussian_convention, check } => {
            let b = path_builder(path)?;
            let reports = if *gaussian_convention {
                t.iter().map(|t| verify::debruijn_gaussian_check(&b, *t, check.dt)).collect::<Result<_>>()?
            } else {
                verify::debruijn_check(&b, t, check.dt)?
            };
            reports_output(reports, check.tolerance)
        }
        VerifyCommand::EntropyEnergy { path, t, check } => {
            reports_output(verify::entropy_energy_check(&path_builder(path)?, *t, check.dt)?, check.tolerance)
        }
        VerifyCommand::Mutinfo { path, t, check } => {
            reports_output(vec![verify::mutual_info_check(&path_builder(path)?, *t, check.dt)?], check.tolerance)
        }
        VerifyCommand::GaussianMmse { path, t, check } => {
            reports_output(verify::gaussian_mmse_check(&path_builder(path)?, t, check.dt)?, check.tolerance)
        }
        VerifyCommand::Condexp { alpha, u, v, x, tolerance } => {
            let points: &[f64] = if x.is_empty() { &DEFAULT_CONDEXP_POINTS } else { x };
            reports_output(vec![verify::condexp_check(*alpha, *u, *v, points)?], *tolerance)
        }
        VerifyCommand::ScoreProps { path, t, tolerance } => {
            reports_output(vec![verify::score_properties_check(&path_builder(path)?, t)?], *tolerance)
        }
    }
}

fn maxent_cmd(cmd: &MaxentCommand) -> Result<Output> {
    match cmd {
        MaxentCommand::Notdoa { alpha, beta, s, n_list, grid, csv, tolerance } => {
            if n_list.is_empty() {
                return Err(Error::InvalidParameter(format!("--n-list must name sizes from {ALLOWED_SUM_SIZES:?}")));
            }
            let law = StableLaw::new(*alpha, *s)?;
            let g = resolve_grid(grid, &[Family::Stable(law)])?;
            let (report, diag) = maxent::notdoa_counterexample(*alpha, *beta, *s, n_list, &g)?;
            let mut out = reports_output(vec![report], *tolerance)?;
            if *csv {
                let mut text = String::from("n,sup_distance,entropy\n");
                for ((n, d), h) in diag.n_list.iter().zip(&diag.sup_distances).zip(&diag.entropies) {
                    text.push_str(&format!("{n},{d},{h}\n"));
                }
                out.text = text;
            }
            Ok(out)
        }
        MaxentCommand::Epi { f, g, grid, tolerance } => {
            let parts = [f.clone(), g.clone()];
            let auto = resolve_grid(grid, &parts)?;
            // the convolution has to fit on the grid as well
            let gr = match grid.half_width {
                Some(_) => auto,
                None => resolve_grid(&GridArgs { half_width: Some(2.0 * auto.half_width()), ..grid.clone() }, &parts)?,
            };
            reports_output(vec![maxent::epi_check(&f.sample(&gr)?, &g.sample(&gr)?)?], *tolerance)
        }
        MaxentCommand::SignCondition { path, t_grid, tolerance } => {
            reports_output(vec![maxent::cauchy_sign_condition(&path_builder(path)?, &t_grid.t_grid)?], *tolerance)
        }
        MaxentCommand::Lambda { path, t_grid, csv, tolerance } => {
            let (report, table) = maxent::lambda_monotonicity(&path_builder(path)?, &t_grid.t_grid)?;
            let mut out = reports_output(vec![report], *tolerance)?;
            if *csv {
                let mut text = String::from("t,lambda,closed_form\n");
                for ((t, l), c) in table.t.iter().zip(&table.lambda).zip(&table.closed_form) {
                    let c = c.map(|v| v.to_string()).unwrap_or_default();
                    text.push_str(&format!("{t},{l},{c}\n"));
                }
                out.text = text;
            }
            Ok(out)
        }
    }
}

fn suite_cmd(a: &SuiteArgs) -> Result<Output> {
    let entries = suite::run(a.profile, SuiteOptions { inject_fault: a.inject_fault })?;
    let failures: Vec<_> = entries.iter().filter(|e| !e.report.pass).collect();
    for e in &failures {
        eprintln!(
            "FAIL criterion {}: {} (residual {:.3e} > tolerance {:.3e})",
            e.criterion, e.label, e.report.residual_norm, e.report.tolerance
        );
    }
    Ok(Output { text: to_json(&entries)?, pass: failures.is_empty() })
}
