//! Suite assembly and report emission for the `holoverify` binary.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use holoverify::family::{BUILTIN_KINDS_1D, BUILTIN_KINDS_2D, PRESETS};
use holoverify::sampling;
use holoverify::theorems::{self, tol, CheckReport};
use holoverify::{
    order_bound, schwarz_check, telescoping_check, BpFunctional, Complex64, Error, Exponent, FiniteMeasureSpace,
    HoloFamily, LpVector, MultiIndex, TorusQuadrature,
};
use serde::Serialize;
use thiserror::Error;

/// Checker names in canonical report order.
pub const CHECKS: &[&str] = &[
    "linearization",
    "fubini",
    "norm_bound",
    "derivative_consistency",
    "diff_under_integral",
    "span",
    "schwarz",
    "order_bound",
    "mattner_profile",
    "profile_interchange",
];

const DUALS: usize = 10;
const MAX_DERIVATIVE_ORDER: usize = 2;
const RANDOM_NODES: usize = 8;
const SCHWARZ_SAMPLES: usize = 1000;
const TELESCOPING_SAMPLES: usize = 200;
const ORDER_BOUND_ORDER: usize = 40;
const ORDER_BOUND_SAMPLES: usize = 200;
const MATTNER_MAX_ORDER: usize = 4;
const SPAN_EXTRA_SAMPLES: usize = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot encode csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Parser)]
#[command(name = "holoverify", version, about = "Numerical checks for holomorphic families of L^p vectors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full checker battery.
    Verify(SuiteArgs),
    /// Run a single checker.
    Check {
        /// One of: linearization, fubini, norm_bound, derivative_consistency,
        /// diff_under_integral, span, schwarz, order_bound, mattner_profile,
        /// profile_interchange.
        name: String,
        #[command(flatten)]
        args: SuiteArgs,
    },
    /// List registered families, spaces, functionals and checks.
    Describe,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct SuiteArgs {
    /// Family preset name.
    #[arg(long, default_value = "geometric", conflicts_with = "family_file")]
    pub family: String,
    /// Family JSON file.
    #[arg(long)]
    pub family_file: Option<PathBuf>,
    /// Space preset (`uniform-k`, `geometric-k`) or JSON file.
    #[arg(long, default_value = "uniform-16")]
    pub space: String,
    /// `dirac[:z0]`, `derivative[:a,alpha]`, `random[:k]` or a JSON file;
    /// coordinates are separated by `;`. Repeatable.
    #[arg(long)]
    pub functional: Vec<String>,
    /// Exponents, e.g. `1,2,inf`.
    #[arg(long, value_delimiter = ',', default_value = "1,2,inf")]
    pub p: Vec<String>,
    /// Quadrature nodes per variable.
    #[arg(long, default_value_t = 64)]
    pub nodes: usize,
    /// Shrink factor of the working polydisc, in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    pub shrink: f64,
    /// Sup-norm grid density per variable.
    #[arg(long, default_value_t = 32)]
    pub grid: usize,
    /// Override every tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report file (stdout when absent).
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

/// A fully validated suite.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub family: HoloFamily,
    pub space: FiniteMeasureSpace,
    pub functionals: Vec<BpFunctional>,
    pub ps: Vec<Exponent>,
    pub nodes: usize,
    pub shrink: f64,
    pub grid: usize,
    pub tol: Option<f64>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl SuiteConfig {
    pub fn from_args(args: &SuiteArgs) -> Result<Self, CliError> {
        if args.nodes < TorusQuadrature::MIN_NODES {
            return Err(CliError::Usage(format!(
                "--nodes must be at least {}, got {}",
                TorusQuadrature::MIN_NODES,
                args.nodes
            )));
        }
        if !(args.shrink > 0.0 && args.shrink < 1.0) {
            return Err(CliError::Usage(format!("--shrink must lie in (0, 1), got {}", args.shrink)));
        }
        if args.grid < 2 {
            return Err(CliError::Usage(format!("--grid must be at least 2, got {}", args.grid)));
        }
        if let Some(t) = args.tol {
            if !(t.is_finite() && t >= 0.0) {
                return Err(CliError::Usage(format!("--tol must be a nonnegative number, got {t}")));
            }
        }
        let space = parse_space(&args.space)?;
        let family = match &args.family_file {
            Some(path) => HoloFamily::load(path)?,
            None => HoloFamily::preset(&args.family, &space)?,
        };
        family.validate_for(&space)?;
        let mut ps = Vec::new();
        for p in &args.p {
            let p = Exponent::from_str(p.trim())?;
            if !ps.contains(&p) {
                ps.push(p);
            }
        }
        if ps.is_empty() {
            return Err(CliError::Usage("--p needs at least one exponent".into()));
        }
        let specs: Vec<String> = if args.functional.is_empty() {
            vec!["dirac".into(), "derivative".into(), "random".into()]
        } else {
            args.functional.clone()
        };
        let mut functionals = Vec::new();
        for spec in &specs {
            functionals.extend(parse_functional(spec, &family, args.nodes, args.shrink, args.seed)?);
        }
        for phi in &functionals {
            phi.check_domain(&family.domain)?;
        }
        Ok(Self {
            family,
            space,
            functionals,
            ps,
            nodes: args.nodes,
            shrink: args.shrink,
            grid: args.grid,
            tol: args.tol,
            seed: args.seed,
            output: args.output.clone(),
            format: args.format,
        })
    }
}

fn parse_space(spec: &str) -> Result<FiniteMeasureSpace, CliError> {
    if spec.starts_with("uniform-") || spec.starts_with("geometric-") {
        return Ok(FiniteMeasureSpace::preset(spec)?);
    }
    let path = std::path::Path::new(spec);
    if path.is_file() {
        return Ok(FiniteMeasureSpace::load(path)?);
    }
    Err(CliError::Usage(format!("`{spec}` is neither a space preset nor a file")))
}

/// Parses `0.1+0.2i;0.3` into a point of dimension `dim`.
pub fn parse_point(text: &str, dim: usize) -> Result<Vec<Complex64>, CliError> {
    let z = text
        .split(';')
        .map(|s| {
            Complex64::from_str(s.trim()).map_err(|_| CliError::Usage(format!("`{s}` is not a complex number")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if z.len() != dim {
        return Err(CliError::Usage(format!("point `{text}` has {} coordinates, expected {dim}", z.len())));
    }
    Ok(z)
}

fn parse_alpha(text: &str, dim: usize) -> Result<MultiIndex, CliError> {
    let entries = text
        .split(';')
        .map(|s| s.trim().parse::<usize>().map_err(|_| CliError::Usage(format!("`{s}` is not a multi-index entry"))))
        .collect::<Result<Vec<_>, _>>()?;
    if entries.len() != dim {
        return Err(CliError::Usage(format!("multi-index `{text}` has {} entries, expected {dim}", entries.len())));
    }
    Ok(MultiIndex::new(entries))
}

/// Expands one `--functional` spec.
pub fn parse_functional(
    spec: &str,
    family: &HoloFamily,
    nodes: usize,
    shrink: f64,
    seed: u64,
) -> Result<Vec<BpFunctional>, CliError> {
    let domain = &family.domain;
    let d = domain.dim();
    let (head, rest) = match spec.split_once(':') {
        Some((h, r)) => (h, Some(r)),
        None => (spec, None),
    };
    match (head, rest) {
        ("dirac", None) => Ok(vec![BpFunctional::dirac(default_dirac_point(family, shrink))]),
        ("dirac", Some(z)) => {
            let z = parse_point(z, d)?;
            domain.require_contains(&z)?;
            Ok(vec![BpFunctional::dirac(z)])
        }
        ("derivative", None) => {
            let radius: Vec<f64> = domain.radius().iter().map(|r| shrink * r).collect();
            MultiIndex::up_to_order(d, MAX_DERIVATIVE_ORDER)
                .into_iter()
                .map(|alpha| Ok(BpFunctional::derivative(domain.center().to_vec(), alpha, radius.clone(), nodes)?))
                .collect()
        }
        ("derivative", Some(body)) => {
            let (a, alpha) = body
                .split_once(',')
                .ok_or_else(|| CliError::Usage(format!("expected `derivative:<point>,<alpha>`, got `{spec}`")))?;
            let a = parse_point(a, d)?;
            let alpha = parse_alpha(alpha, d)?;
            domain.require_contains(&a)?;
            let radius: Vec<f64> = (0..d)
                .map(|j| shrink * (domain.radius()[j] - (a[j] - domain.center()[j]).norm()))
                .collect();
            Ok(vec![BpFunctional::derivative(a, alpha, radius, nodes)?])
        }
        ("random", count) => {
            let count = match count {
                None => RANDOM_NODES,
                Some(k) => k
                    .trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&k| k > 0)
                    .ok_or_else(|| CliError::Usage(format!("`{k}` is not a positive node count")))?,
            };
            Ok(vec![BpFunctional::random(domain, shrink, count, seed)?])
        }
        _ => {
            let path = std::path::Path::new(spec);
            if !path.is_file() {
                return Err(CliError::Usage(format!("`{spec}` is neither a functional spec nor a file")));
            }
            let phi = BpFunctional::load(path)?;
            if phi.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: phi.dim(),
                }
                .into());
            }
            Ok(vec![phi])
        }
    }
}

fn default_dirac_point(family: &HoloFamily, shrink: f64) -> Vec<Complex64> {
    let offset = Complex64::new(0.6, 0.4);
    family
        .domain
        .center()
        .iter()
        .zip(family.domain.radius())
        .map(|(&c, &r)| c + offset * (shrink * r))
        .collect()
}

/// Runs the battery (or the single checker `only`) and returns the reports
/// in canonical order.
pub fn run_suite(config: &SuiteConfig, only: Option<&str>) -> Result<Vec<CheckReport>, CliError> {
    if let Some(name) = only {
        if !CHECKS.contains(&name) {
            return Err(CliError::Usage(format!("unknown check `{name}`; expected one of {}", CHECKS.join(", "))));
        }
    }
    let wanted = |name: &str| only.is_none_or(|o| o == name);
    let fam = &config.family;
    let space = &config.space;
    let d = fam.dim();
    let seed = config.seed;
    let n = config.nodes;
    let center = fam.domain.center().to_vec();
    let radius: Vec<f64> = fam.domain.radius().iter().map(|r| config.shrink * r).collect();
    let alphas = MultiIndex::up_to_order(d, MAX_DERIVATIVE_ORDER);
    let duals: Vec<Vec<LpVector>> = config
        .ps
        .iter()
        .map(|p| theorems::random_duals(space, p.dual(), DUALS, seed))
        .collect::<Result<_, _>>()?;

    let mut out = Vec::new();
    let label = &fam.label;

    if wanted("linearization") {
        for (p, hs) in config.ps.iter().zip(&duals) {
            for phi in &config.functionals {
                let r = theorems::linearization_residual(phi, fam, space, hs, *p)
                    .map(|r| dirac_tol(r, phi, tol::DIRAC))
                    .unwrap_or_else(|e| errored("linearization", label, &phi.label, e).with_p(*p));
                out.push(r.with_n(n));
            }
        }
    }
    if wanted("fubini") {
        for (p, hs) in config.ps.iter().zip(&duals) {
            for phi in &config.functionals {
                let r = worst(hs.iter().map(|h| theorems::fubini_residual(phi, fam, h, space, *p)))
                    .map(|r| dirac_tol(r, phi, tol::DIRAC))
                    .unwrap_or_else(|e| errored("fubini", label, &phi.label, e).with_p(*p));
                out.push(r.with_n(n));
            }
        }
    }
    if wanted("norm_bound") {
        for p in &config.ps {
            for phi in &config.functionals {
                let r = theorems::norm_bound_check(phi, fam, space, *p, config.shrink, config.grid)
                    .unwrap_or_else(|e| errored("norm_bound", label, &phi.label, e).with_p(*p));
                out.push(r.with_n(n));
            }
        }
    }
    if wanted("derivative_consistency") {
        for p in &config.ps {
            for alpha in &alphas {
                let r = theorems::derivative_consistency(fam, space, &center, alpha, &radius, n, *p).unwrap_or_else(
                    |e| errored("derivative_consistency", label, &format!("derivative{alpha}"), e).with_p(*p),
                );
                out.push(r.with_alpha(alpha).with_n(n));
            }
        }
    }
    if wanted("diff_under_integral") {
        for (p, hs) in config.ps.iter().zip(&duals) {
            for alpha in &alphas {
                let r = worst(
                    hs.iter()
                        .map(|h| theorems::diff_under_integral(fam, h, space, &center, alpha, &radius, n)),
                )
                .unwrap_or_else(|e| errored("diff_under_integral", label, &format!("derivative{alpha}"), e));
                out.push(r.with_p(*p).with_alpha(alpha).with_n(n));
            }
        }
    }
    if wanted("span") {
        let samples = sampling::points_in_polydisc(
            &mut sampling::rng(seed),
            &fam.domain,
            config.shrink,
            space.len() + SPAN_EXTRA_SAMPLES,
        );
        for phi in &config.functionals {
            let r = theorems::span_residual(phi, fam, space, &samples)
                .unwrap_or_else(|e| errored("span", label, &phi.label, e));
            out.push(r.with_p(Exponent::TWO));
        }
    }
    if wanted("schwarz") {
        out.push(schwarz_report(config));
    }
    if wanted("order_bound") {
        out.push(order_bound_report(config));
    }
    if d == 1 && wanted("mattner_profile") {
        let grid = sampling::torus_grid(&fam.domain, config.shrink, config.grid);
        match theorems::mattner_profile(fam, space, MATTNER_MAX_ORDER, &grid, n) {
            Ok(orders) => out.extend(theorems::mattner_reports(fam, &orders, n)),
            Err(e) => out.push(errored("mattner_profile", label, "derivative", e).with_n(n)),
        }
    }
    if d == 1 && wanted("profile_interchange") {
        let ones = LpVector::constant(space.len(), Complex64::new(1.0, 0.0));
        for k in 1..=MATTNER_MAX_ORDER {
            let alpha = MultiIndex::new(vec![k]);
            let mut r = theorems::diff_under_integral(fam, &ones, space, &center, &alpha, &radius, n)
                .unwrap_or_else(|e| errored("profile_interchange", label, &format!("derivative{alpha}"), e));
            r.check = "profile_interchange".into();
            out.push(r.with_alpha(&alpha).with_n(n));
        }
    }

    Ok(out
        .into_iter()
        .map(|r| {
            let r = r.with_seed(seed);
            match config.tol {
                Some(t) => r.with_tol(t),
                None => r,
            }
        })
        .collect())
}

fn dirac_tol(r: CheckReport, phi: &BpFunctional, t: f64) -> CheckReport {
    if phi.label.starts_with("dirac") {
        r.with_tol(t)
    } else {
        r
    }
}

/// The report with the largest residual (NaN counts as largest).
fn worst(reports: impl Iterator<Item = holoverify::Result<CheckReport>>) -> holoverify::Result<CheckReport> {
    let mut best: Option<CheckReport> = None;
    for r in reports {
        let r = r?;
        let replace = match &best {
            None => true,
            Some(b) => r.residual.is_nan() || r.residual > b.residual,
        };
        if replace && !best.as_ref().is_some_and(|b| b.residual.is_nan()) {
            best = Some(r);
        }
    }
    best.ok_or_else(|| Error::InvalidParameter("no dual vectors".into()))
}

fn errored(check: &str, family: &str, functional: &str, err: Error) -> CheckReport {
    eprintln!("holoverify: {check} could not run for {family}/{functional}: {err}");
    CheckReport::new(check, family, functional, f64::NAN, f64::NAN, f64::INFINITY, 0.0)
}

fn schwarz_report(config: &SuiteConfig) -> CheckReport {
    let fam = &config.family;
    let label = &fam.label;
    let result = if fam.dim() == 1 {
        let center = fam.domain.center()[0];
        let radius = 0.95 * fam.domain.radius()[0];
        config
            .space
            .atoms()
            .iter()
            .enumerate()
            .map(|(i, atom)| {
                let slice = fam.slice(atom);
                schwarz_check(|z| slice(&[z]), center, radius, SCHWARZ_SAMPLES, config.seed.wrapping_add(i as u64))
            })
            .try_fold(f64::NEG_INFINITY, |acc, v| v.map(|v| acc.max(v)))
            .map(|v| (v, SCHWARZ_SAMPLES))
    } else {
        telescoping_check(fam, &config.space, config.shrink, TELESCOPING_SAMPLES, config.grid, config.seed)
            .map(|v| (v, TELESCOPING_SAMPLES))
    };
    match result {
        Ok((violation, samples)) => {
            CheckReport::new("schwarz", label, "slices", violation, 0.0, violation.max(0.0), tol::SCHWARZ).with_n(samples)
        }
        Err(e) => errored("schwarz", label, "slices", e),
    }
}

fn order_bound_report(config: &SuiteConfig) -> CheckReport {
    let fam = &config.family;
    let label = &fam.label;
    let rho = config.shrink;
    // Taylor contour halfway between the working polydisc and the boundary.
    let expand = (1.0 + rho) / 2.0;
    let center = fam.domain.center().to_vec();
    let radius: Vec<f64> = fam.domain.radius().iter().map(|r| expand * r).collect();
    let shrink = rho / expand;
    let result = order_bound(fam, &config.space, &center, &radius, ORDER_BOUND_ORDER, shrink).and_then(|ob| {
        let v = ob.max_violation(fam, &config.space, &center, &radius, shrink, ORDER_BOUND_SAMPLES, config.seed)?;
        let majorant = ob.u.values().iter().map(|u| u.re).fold(0.0, f64::max) + ob.tail;
        Ok((v, majorant))
    });
    match result {
        Ok((violation, majorant)) => {
            let residual = violation.max(0.0) / majorant.max(f64::MIN_POSITIVE);
            CheckReport::new("order_bound", label, "taylor", violation, majorant, residual, tol::ORDER_BOUND)
                .with_n(2 * ORDER_BOUND_ORDER + 2)
        }
        Err(e) => errored("order_bound", label, "taylor", e),
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    check: &'a str,
    family: &'a str,
    functional: &'a str,
    p: String,
    alpha: String,
    lhs_re: f64,
    lhs_im: Option<f64>,
    rhs_re: f64,
    rhs_im: Option<f64>,
    residual: f64,
    tol: f64,
    pass: bool,
    n: usize,
    seed: u64,
}

fn split(q: theorems::Quantity) -> (f64, Option<f64>) {
    match q {
        theorems::Quantity::Complex(z) => (z.re, Some(z.im)),
        theorems::Quantity::Real(x) => (x, None),
    }
}

/// Renders reports as JSON lines or CSV.
pub fn render(reports: &[CheckReport], format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => {
            let mut s = String::new();
            for r in reports {
                s.push_str(&serde_json::to_string(r).map_err(Error::from)?);
                s.push('\n');
            }
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in reports {
                let (lhs_re, lhs_im) = split(r.lhs);
                let (rhs_re, rhs_im) = split(r.rhs);
                w.serialize(CsvRow {
                    check: &r.check,
                    family: &r.family,
                    functional: &r.functional,
                    p: r.p.map(|p| p.to_string()).unwrap_or_default(),
                    alpha: r.alpha.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(";"),
                    lhs_re,
                    lhs_im,
                    rhs_re,
                    rhs_im,
                    residual: r.residual,
                    tol: r.tol,
                    pass: r.pass,
                    n: r.n,
                    seed: r.seed,
                })?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
    }
}

/// Text for the `describe` subcommand.
pub fn describe() -> String {
    let mut s = String::from("families:\n");
    for (name, desc) in PRESETS {
        let _ = writeln!(s, "  {name:<18} {desc}");
    }
    let _ = writeln!(s, "builtin kinds: {} | {}", BUILTIN_KINDS_1D.join(", "), BUILTIN_KINDS_2D.join(", "));
    s.push_str("spaces:\n  uniform-<k>        k atoms in [-1, 1], weight 1/k\n");
    s.push_str("  geometric-<k>      k atoms in [-1, 1], weight 2^-(i+1)\n");
    s.push_str("functionals:\n");
    s.push_str("  dirac[:z0]                 point evaluation, e.g. dirac:0.1+0.2i;0.3\n");
    s.push_str("  derivative[:a,alpha]       Cauchy derivative, e.g. derivative:0;0,1;2 (all |alpha| <= 2 when bare)\n");
    s.push_str("  random[:k]                 seeded k-node measure (default 8)\n");
    s.push_str("  <file.json>                explicit nodes and weights\n");
    let _ = writeln!(s, "checks: {}", CHECKS.join(", "));
    s
}

/// Parses, runs and writes a suite; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let (args, only) = match cli.command {
        Command::Describe => {
            print!("{}", describe());
            return 0;
        }
        Command::Verify(args) => (args, None),
        Command::Check { name, args } => (args, Some(name)),
    };
    match execute(&args, only.as_deref()) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("holoverify: {e}");
            2
        }
    }
}

fn execute(args: &SuiteArgs, only: Option<&str>) -> Result<bool, CliError> {
    let config = SuiteConfig::from_args(args)?;
    let reports = run_suite(&config, only)?;
    let text = render(&reports, config.format)?;
    match &config.output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    let mut ok = true;
    for r in reports.iter().filter(|r| !r.pass) {
        ok = false;
        let p = r.p.map(|p| format!(" p={p}")).unwrap_or_default();
        eprintln!(
            "FAIL {} {}/{}{p} alpha={:?}: residual {:e} > tol {:e}",
            r.check, r.family, r.functional, r.alpha, r.residual, r.tol
        );
    }
    Ok(ok)
}
