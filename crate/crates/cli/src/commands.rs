//! Subcommand definitions and their implementations. Every command renders
//! its result to a string so that output is independent of scheduling.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nlg_core::constants::{c_p, g_dp, gamma_limit_constant};
use nlg_core::extrapolate::{richardson_terms, ErrorTerm};
use nlg_core::functional1d::{lambda_quadrature, lambda_step_exact};
use nlg_core::multidim::{lambda_ddim_montecarlo, lambda_ddim_sectioning, MonteCarloConfig, ScalarField};
use nlg_core::rearrange::{
    brute_force_min_hostility, hostility_discrete, hostility_semidiscrete, monotone_rearrangement_discrete,
    monotone_rearrangement_step, reduction, s_delta_pa,
};
use nlg_core::types::validate_and_build;
use nlg_core::{DomainObject, EnemyList, EnergyParams, HostilityWeights, Interval, LocalEnergy, PiecewiseAffine1D};

use crate::format::{energy, g12, row};
use crate::suites::{fuzz_rearrangement, FuzzConfig, WeightKind};

#[derive(Debug, Parser)]
#[command(name = "nlg", version, about = "Non-local functionals: exact energies, rearrangements and convergence tables")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print C_p, G_{d,p} and the Gamma-limit constant.
    Constants {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1)]
        d: usize,
    },
    /// Exact energy of a step function, or of a piecewise affine function.
    Lambda(LambdaArgs),
    /// Vertical δ-segmentation of a piecewise affine function, as JSON.
    Segment {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        delta: f64,
    },
    /// Monotone rearrangement of an arrangement or step function, as JSON.
    Rearrange {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
        domain: Option<Vec<f64>>,
        /// Apply the reduction operator instead.
        #[arg(long)]
        reduce: bool,
    },
    /// Total hostility before and after rearrangement.
    Hostility(HostilityArgs),
    /// Exhaustive rearrangement property suite.
    Fuzz(FuzzArgs),
    /// Recovery-family energies Λ(S_δ u) along a geometric δ schedule.
    ConvergeRecovery(RecoveryArgs),
    /// Sectioning and Monte Carlo estimates of Λ in two dimensions.
    ConvergeSectioning(SectioningArgs),
}

#[derive(Debug, Args)]
pub struct LambdaArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub delta: f64,
    #[arg(long)]
    pub p: f64,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub domain: Option<Vec<f64>>,
    /// Segment a piecewise affine input first; otherwise it is integrated by quadrature.
    #[arg(long)]
    pub segment: bool,
    /// Absolute tolerance for the quadrature path.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct HostilityArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Weights JSON, for arrangements.
    #[arg(long, requires = "enemies")]
    pub weights: Option<PathBuf>,
    /// Enemy list JSON, for arrangements.
    #[arg(long, requires = "weights")]
    pub enemies: Option<PathBuf>,
    /// Also report the brute-force minimum over all permutations.
    #[arg(long)]
    pub brute_force: bool,
    /// Grid step, for step functions.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub domain: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum WeightArg {
    Random,
    Flat,
}

#[derive(Debug, Args)]
pub struct FuzzArgs {
    #[arg(long, default_value_t = 7)]
    pub n_max: usize,
    /// Number of species labels, `0..species-max`.
    #[arg(long, default_value_t = 4)]
    pub species_max: i64,
    #[arg(long, default_value_t = 1)]
    pub k: i64,
    /// Random weight vectors per arrangement length.
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = WeightArg::Random)]
    pub weights: WeightArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shape1D {
    Tent,
    Ramp,
}

#[derive(Debug, Args)]
pub struct RecoveryArgs {
    #[arg(long, value_enum)]
    pub shape: Shape1D,
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub delta_start: f64,
    #[arg(long, default_value_t = 0.5)]
    pub delta_factor: f64,
    #[arg(long)]
    pub steps: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Shape2D {
    RadialTent,
    TensorTent,
    Constant,
}

#[derive(Debug, Args)]
pub struct SectioningArgs {
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, value_enum, default_value_t = Shape2D::RadialTent)]
    pub shape: Shape2D,
    /// One or more thresholds, comma separated.
    #[arg(long, required = true, value_delimiter = ',')]
    pub delta: Vec<f64>,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 32)]
    pub dirs: usize,
    #[arg(long, default_value_t = 1000)]
    pub offsets: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub mc_samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Rendered output and whether a checked property failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub text: String,
    pub violated: bool,
}

impl From<String> for Outcome {
    fn from(text: String) -> Self {
        Self { text, violated: false }
    }
}

pub fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    match &cli.command {
        Command::Constants { p, d } => constants(*d, *p).map(Into::into),
        Command::Lambda(a) => lambda(a).map(Into::into),
        Command::Segment { input, delta } => segment(input, *delta).map(Into::into),
        Command::Rearrange { input, domain, reduce } => rearrange(input, domain.as_deref(), *reduce).map(Into::into),
        Command::Hostility(a) => hostility(a).map(Into::into),
        Command::Fuzz(a) => fuzz(a),
        Command::ConvergeRecovery(a) => converge_recovery(a).map(Into::into),
        Command::ConvergeSectioning(a) => converge_sectioning(a).map(Into::into),
    }
}

fn load(path: &Path) -> anyhow::Result<DomainObject> {
    let raw = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    validate_and_build(&raw).with_context(|| format!("parsing {}", path.display()))
}

fn domain_or(domain: Option<&[f64]>, natural: Interval) -> anyhow::Result<Interval> {
    match domain {
        Some([lo, hi]) => Ok(Interval::new(*lo, *hi)?),
        Some(_) => bail!("--domain takes two values"),
        None => Ok(natural),
    }
}

fn bounded(domain: Interval, what: &str) -> anyhow::Result<Interval> {
    if !domain.is_bounded() {
        bail!("{what} needs a bounded domain; pass --domain LO HI");
    }
    Ok(domain)
}

pub fn constants(d: usize, p: f64) -> anyhow::Result<String> {
    let mut out = row(&["d", "p", "C_p", "G_dp", "gamma_limit_constant"].map(String::from));
    out += &row(&[
        d.to_string(),
        g12(p),
        g12(c_p(p)?.value),
        g12(g_dp(d, p)?.value),
        g12(gamma_limit_constant(d, p)?.value),
    ]);
    Ok(out)
}

pub fn lambda(a: &LambdaArgs) -> anyhow::Result<String> {
    let params = EnergyParams::new(a.delta, a.p)?;
    match load(&a.input)? {
        DomainObject::Step(u) => {
            let dom = domain_or(a.domain.as_deref(), u.natural_domain())?;
            Ok(format!("lambda\n{}\n", energy(lambda_step_exact(&u, &dom, &params)?)))
        }
        DomainObject::PiecewiseAffine(u) if a.segment => {
            let s = s_delta_pa(&u, a.delta)?;
            let dom = domain_or(a.domain.as_deref(), s.natural_domain())?;
            Ok(format!("lambda\n{}\n", energy(lambda_step_exact(&s, &dom, &params)?)))
        }
        DomainObject::PiecewiseAffine(u) => {
            let dom = bounded(domain_or(a.domain.as_deref(), u.natural_domain())?, "quadrature")?;
            let f = |x: f64| u.eval(x).unwrap_or(f64::NAN);
            let r = lambda_quadrature(f, u.lipschitz(), &dom, &params, a.tol)?;
            Ok(format!("lambda,error_estimate\n{},{}\n", g12(r.value), g12(r.error)))
        }
        _ => bail!("lambda expects a step function or piecewise affine function"),
    }
}

pub fn segment(input: &Path, delta: f64) -> anyhow::Result<String> {
    match load(input)? {
        DomainObject::PiecewiseAffine(u) => Ok(s_delta_pa(&u, delta)?.to_json() + "\n"),
        _ => bail!("segment expects a piecewise affine function"),
    }
}

pub fn rearrange(input: &Path, domain: Option<&[f64]>, reduce: bool) -> anyhow::Result<String> {
    match load(input)? {
        DomainObject::Arrangement(u) if reduce => Ok(reduction(&u)?.0.to_json() + "\n"),
        DomainObject::Arrangement(u) => Ok(monotone_rearrangement_discrete(&u).to_json() + "\n"),
        DomainObject::Step(_) if reduce => bail!("--reduce applies to arrangements only"),
        DomainObject::Step(u) => {
            let dom = bounded(domain_or(domain, u.natural_domain())?, "rearrangement")?;
            Ok(monotone_rearrangement_step(&u, &dom)?.to_json() + "\n")
        }
        _ => bail!("rearrange expects an arrangement or a step function"),
    }
}

pub fn hostility(a: &HostilityArgs) -> anyhow::Result<String> {
    match load(&a.input)? {
        DomainObject::Arrangement(u) => {
            let (Some(wp), Some(ep)) = (&a.weights, &a.enemies) else {
                bail!("arrangements need --weights and --enemies");
            };
            let DomainObject::Weights(h) = load(wp)? else { bail!("{} is not a weights object", wp.display()) };
            let DomainObject::Enemies(e) = load(ep)? else { bail!("{} is not an enemy list", ep.display()) };
            discrete_hostility_table(&h, &e, &u, a.brute_force)
        }
        DomainObject::Step(u) => {
            let (Some(delta), Some(p)) = (a.delta, a.p) else { bail!("step functions need --delta and --p") };
            let params = EnergyParams::new(delta, p)?;
            let dom = bounded(domain_or(a.domain.as_deref(), u.natural_domain())?, "hostility")?;
            let m = monotone_rearrangement_step(&u, &dom)?;
            let before = hostility_semidiscrete(&u, &dom, a.k, &params)?;
            let after = hostility_semidiscrete(&m, &dom, a.k, &params)?;
            Ok(format!("hostility,monotone_hostility\n{},{}\n", energy(before), energy(after)))
        }
        _ => bail!("hostility expects an arrangement or a step function"),
    }
}

fn discrete_hostility_table(
    h: &HostilityWeights,
    e: &EnemyList,
    u: &nlg_core::DiscreteArrangement,
    brute: bool,
) -> anyhow::Result<String> {
    let mut head = vec!["hostility", "monotone_hostility"];
    let mut cells = vec![
        g12(hostility_discrete(h, e, u)?),
        g12(hostility_discrete(h, e, &monotone_rearrangement_discrete(u))?),
    ];
    if brute {
        head.push("brute_force_min");
        cells.push(g12(brute_force_min_hostility(h, e, u.species())?.0));
    }
    Ok(row(&head.iter().map(|s| s.to_string()).collect::<Vec<_>>()) + &row(&cells))
}

pub fn fuzz(a: &FuzzArgs) -> anyhow::Result<Outcome> {
    if a.species_max < 1 {
        bail!("--species-max must be at least 1");
    }
    let cfg = FuzzConfig {
        n_max: a.n_max,
        species: a.species_max,
        k: a.k,
        trials: a.trials,
        seed: a.seed,
        weights: match a.weights {
            WeightArg::Random => WeightKind::Random,
            WeightArg::Flat => WeightKind::Flat,
        },
    };
    let r = fuzz_rearrangement(&cfg)?;
    Ok(Outcome { text: format!("checked,violations\n{},{}\n", r.checked, r.violations), violated: r.violations > 0 })
}

/// The one-dimensional catalogue: a unit-slope tent of height one on (0, 2)
/// and the identity ramp on (0, 1).
pub fn shape_1d(shape: Shape1D) -> PiecewiseAffine1D {
    match shape {
        Shape1D::Tent => PiecewiseAffine1D::new(vec![(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)], true),
        Shape1D::Ramp => PiecewiseAffine1D::new(vec![(0.0, 0.0), (1.0, 1.0)], false),
    }
    .expect("catalogue shapes are valid")
}

/// Error model of `Λ(S_δ u)` in `h = δ`: `h ln h` and `h` near `p = 1`,
/// otherwise `h` and `h^min(p, 2)`.
pub fn recovery_error_model(p: f64) -> [ErrorTerm; 2] {
    if p < 1.5 {
        [ErrorTerm::PowerLog(1.0), ErrorTerm::Power(1.0)]
    } else {
        [ErrorTerm::Power(1.0), ErrorTerm::Power(p.min(2.0))]
    }
}

pub fn converge_recovery(a: &RecoveryArgs) -> anyhow::Result<String> {
    if !(a.delta_start > 0.0) || !(a.delta_factor > 0.0 && a.delta_factor < 1.0) {
        bail!("need --delta-start > 0 and 0 < --delta-factor < 1");
    }
    let u = shape_1d(a.shape);
    let limit = 2.0 / a.p * c_p(a.p)?.value * u.lambda_zero(a.p)?;
    let mut out = row(&["delta", "lambda", "limit", "ratio"].map(String::from));
    let mut samples = Vec::with_capacity(a.steps);
    for j in 0..a.steps {
        let delta = a.delta_start * a.delta_factor.powi(j as i32);
        let params = EnergyParams::new(delta, a.p)?;
        let s = s_delta_pa(&u, delta)?;
        let e = lambda_step_exact(&s, &s.natural_domain(), &params)?;
        out += &row(&[g12(delta), energy(e), g12(limit), g12(e.value() / limit)]);
        if let Some(v) = e.finite() {
            samples.push((delta, v));
        }
    }
    if samples.len() >= 2 {
        let tail = &samples[samples.len().saturating_sub(3)..];
        let x = richardson_terms(tail, &recovery_error_model(a.p))?;
        out += &row(&[g12(0.0), g12(x), g12(limit), g12(x / limit)]);
    }
    Ok(out)
}

pub fn shape_2d(shape: Shape2D) -> ScalarField {
    match shape {
        Shape2D::RadialTent => ScalarField::radial_tent(vec![0.0, 0.0], 1.0, 1.0),
        Shape2D::TensorTent => ScalarField::tensor_tent(vec![0.0, 0.0], vec![1.0, 0.5], 1.0),
        Shape2D::Constant => ScalarField::affine_ramp(vec![0.0, 0.0], 1.0, vec![-1.0, -1.0], vec![1.0, 1.0]),
    }
    .expect("catalogue shapes are valid")
}

pub fn converge_sectioning(a: &SectioningArgs) -> anyhow::Result<String> {
    if a.d != 2 {
        bail!("converge-sectioning supports d = 2 only");
    }
    let u = shape_2d(a.shape);
    let limit = gamma_limit_constant(2, a.p)?.value * u.lambda_zero(a.p)?;
    let mut out = row(&["delta", "sectioning_estimate", "mc_estimate", "mc_stderr", "limit"].map(String::from));
    for &delta in &a.delta {
        let params = EnergyParams::new(delta, a.p)?;
        let s = lambda_ddim_sectioning(&u, &params, a.dirs, a.offsets)?;
        let cfg = MonteCarloConfig { n_samples: a.mc_samples, seed: a.seed, segmented: true, sampling_box: None };
        let m = lambda_ddim_montecarlo(&u, &params, &cfg)?;
        out += &row(&[g12(delta), g12(s.value), g12(m.value), g12(m.error), g12(limit)]);
    }
    Ok(out)
}
