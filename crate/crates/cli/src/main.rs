//! Command-line front end for the rectangular-box vacuum-energy laboratory.
//!
//! Subcommands cover single energy and force evaluations, aspect-ratio
//! sweeps, the critical-ratio solve, the cutoff-verification campaign, and
//! the runtime invariant suite. Records stream to standard output (or to
//! `--output FILE`) as CSV or JSON; numbers are printed in their shortest
//! round-trip decimal form with a `.` separator, so parsing the output
//! reproduces the in-memory values bit for bit.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use casimir_core::{
    critical_ratio, energy_ar, fit_counterterms, force_alt, force_asym_large_a,
    force_asym_small_a, force_finite_l, force_infinite, run_selftest, CasimirError, CutoffError,
    CutoffFamily, CutoffSpec, EnergyRoute, EpsteinError, Geometry, PistonGeometry, SeriesControl,
    SpecFunError, ASPECT_MAX, ASPECT_MIN, CRITICAL_BRACKET,
};

const EXIT_INPUT: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_SELFTEST: u8 = 3;

/// Aspect ratio quoted for comparison next to the solved root.
const REFERENCE_RATIO: f64 = 2.74;

/// Geometry panel used by `cutoff-verify`: five boxes with distinct
/// (ab, a+b) signatures, so the two-counterterm fit is well conditioned.
const FIT_PANEL: [(f64, f64); 5] = [(1.0, 1.0), (1.0, 2.0), (2.0, 1.0), (1.5, 1.5), (0.7, 1.3)];

#[derive(Parser)]
#[command(
    name = "casimir",
    version,
    about = "Vacuum energy and piston force in a 2-D Dirichlet box",
    after_help = "Units are natural (hbar = c = 1): lengths carry the input unit, \
                  energies are 1/length, forces 1/length^2."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Renormalized energy of one a x b compartment (plus force fields).
    Energy(EnergyArgs),
    /// Piston force at one geometry via every applicable route.
    Force(ForceArgs),
    /// Sweep the aspect ratio a/b and emit one record per grid point.
    Sweep(SweepArgs),
    /// Solve for the aspect ratio at which the energy changes sign.
    CriticalRatio(CriticalRatioArgs),
    /// Fit divergence counterterms at a list of cutoff scales.
    CutoffVerify(CutoffVerifyArgs),
    /// Run every documented invariant and report pass/fail per item.
    Selftest,
}

#[derive(Args)]
struct EnergyArgs {
    /// Compartment width a.
    #[arg(long)]
    a: f64,
    /// Compartment height b.
    #[arg(long)]
    b: f64,
    /// Energy evaluation route.
    #[arg(long, value_enum, default_value_t = RouteChoice::Zeta)]
    route: RouteChoice,
    #[command(flatten)]
    emit: EmitArgs,
    /// Override the relative series tolerance (default 1e-12).
    #[arg(long)]
    rel_tol: Option<f64>,
}

#[derive(Args)]
struct ForceArgs {
    /// Near-compartment width a (the piston position when --L is given).
    #[arg(long)]
    a: f64,
    /// Box height b.
    #[arg(long)]
    b: f64,
    /// Total box length; adds the finite-box force on the piston at a.
    #[arg(long = "L")]
    l: Option<f64>,
    #[command(flatten)]
    emit: EmitArgs,
    /// Override the relative series tolerance (default 1e-12).
    #[arg(long)]
    rel_tol: Option<f64>,
}

#[derive(Args, Clone)]
struct SweepArgs {
    /// Smallest aspect ratio a/b.
    #[arg(long)]
    ratio_min: f64,
    /// Largest aspect ratio a/b.
    #[arg(long)]
    ratio_max: f64,
    /// Number of grid points (at least 2).
    #[arg(long)]
    points: usize,
    /// Grid spacing.
    #[arg(long, value_enum)]
    spacing: Spacing,
    /// Fixed height b; each grid point evaluates the box (ratio*b) x b.
    #[arg(long, default_value_t = 1.0)]
    b_fixed: f64,
    /// Output format.
    #[arg(long, value_enum)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Override the relative series tolerance (default 1e-12).
    #[arg(long)]
    rel_tol: Option<f64>,
}

#[derive(Args)]
struct CriticalRatioArgs {
    /// Bracket-width tolerance on the root.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[command(flatten)]
    emit: EmitArgs,
}

#[derive(Args)]
struct CutoffVerifyArgs {
    /// Comma-separated cutoff scales, e.g. "20,40,60".
    #[arg(long)]
    lambdas: String,
    /// Cutoff profile family.
    #[arg(long, value_enum, default_value_t = FamilyChoice::Default)]
    family: FamilyChoice,
    #[command(flatten)]
    emit: EmitArgs,
}

#[derive(Args)]
struct EmitArgs {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Spacing {
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum RouteChoice {
    /// Lattice zeta closed form.
    Zeta,
    /// Exponentially convergent Bessel double series.
    Series,
}

impl RouteChoice {
    fn route(self) -> EnergyRoute {
        match self {
            Self::Zeta => EnergyRoute::ZetaReflection,
            Self::Series => EnergyRoute::BesselSeries,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyChoice {
    /// Slowly decaying rational profile.
    Default,
    /// Gaussian control profile.
    Gaussian,
}

impl FamilyChoice {
    fn family(self) -> CutoffFamily {
        match self {
            Self::Default => CutoffFamily::InverseQuartic,
            Self::Gaussian => CutoffFamily::Gaussian,
        }
    }
}

/// A diagnosed failure: the process exit code plus a one-line message.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }

    fn numerical(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_NUMERICAL,
            message: message.into(),
        }
    }
}

fn casimir_exit_code(err: &CasimirError) -> u8 {
    match err {
        CasimirError::NonPositiveLength { .. }
        | CasimirError::AspectOutOfRange { .. }
        | CasimirError::PistonPosition { .. }
        | CasimirError::RootTolerance { .. } => EXIT_INPUT,
        CasimirError::NoRoot { .. } => EXIT_NUMERICAL,
        CasimirError::Series(inner) => epstein_exit_code(inner),
        CasimirError::SpecFun(inner) => specfun_exit_code(inner),
    }
}

fn epstein_exit_code(err: &EpsteinError) -> u8 {
    match err {
        EpsteinError::NonPositiveScale { .. }
        | EpsteinError::InvalidControl { .. }
        | EpsteinError::ConvergenceDomain { .. }
        | EpsteinError::UnsupportedOrder { .. }
        | EpsteinError::UnsupportedArgument { .. } => EXIT_INPUT,
        EpsteinError::BudgetExceeded { .. } => EXIT_NUMERICAL,
        EpsteinError::SpecFun(inner) => specfun_exit_code(inner),
    }
}

fn specfun_exit_code(err: &SpecFunError) -> u8 {
    match err {
        SpecFunError::InvalidTolerance { .. } => EXIT_INPUT,
        _ => EXIT_NUMERICAL,
    }
}

fn cutoff_exit_code(err: &CutoffError) -> u8 {
    match err {
        CutoffError::InvalidLambda { .. }
        | CutoffError::LambdaOutOfRange { .. }
        | CutoffError::TooFewGeometries { .. }
        | CutoffError::ZeroModeIndex => EXIT_INPUT,
        CutoffError::TailBudget { .. }
        | CutoffError::IllConditioned { .. }
        | CutoffError::SeriesBudget { .. } => EXIT_NUMERICAL,
        CutoffError::Casimir(inner) => casimir_exit_code(inner),
        CutoffError::SpecFun(inner) => specfun_exit_code(inner),
    }
}

impl From<CasimirError> for Failure {
    fn from(err: CasimirError) -> Self {
        Self {
            code: casimir_exit_code(&err),
            message: err.to_string(),
        }
    }
}

impl From<EpsteinError> for Failure {
    fn from(err: EpsteinError) -> Self {
        Self {
            code: epstein_exit_code(&err),
            message: err.to_string(),
        }
    }
}

impl From<CutoffError> for Failure {
    fn from(err: CutoffError) -> Self {
        Self {
            code: cutoff_exit_code(&err),
            message: err.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(err: std::io::Error) -> Self {
        Self {
            code: EXIT_INPUT,
            message: format!("could not write output: {err}"),
        }
    }
}

/// One fully populated evaluation: the geometry, its renormalized energy,
/// and the force through every route, each with its certified tail bound.
/// The piston fields are present only when a box length was supplied.
#[derive(Debug, Serialize)]
struct OutputRecord {
    a: f64,
    b: f64,
    ratio: f64,
    energy_total: f64,
    energy_route: &'static str,
    energy_tail_bound: f64,
    force_eq11: f64,
    force_eq11_tail_bound: f64,
    force_eq14: f64,
    force_eq14_tail_bound: f64,
    force_asym_small: f64,
    force_asym_small_tail_bound: f64,
    force_asym_large: f64,
    force_asym_large_tail_bound: f64,
    piston_l: Option<f64>,
    force_finite_l: Option<f64>,
    force_finite_l_tail_bound: Option<f64>,
}

const RECORD_FIELDS: [&str; 17] = [
    "a",
    "b",
    "ratio",
    "energy_total",
    "energy_route",
    "energy_tail_bound",
    "force_eq11",
    "force_eq11_tail_bound",
    "force_eq14",
    "force_eq14_tail_bound",
    "force_asym_small",
    "force_asym_small_tail_bound",
    "force_asym_large",
    "force_asym_large_tail_bound",
    "piston_l",
    "force_finite_l",
    "force_finite_l_tail_bound",
];

impl OutputRecord {
    fn numeric_fields(&self) -> impl Iterator<Item = f64> + '_ {
        [
            self.a,
            self.b,
            self.ratio,
            self.energy_total,
            self.energy_tail_bound,
            self.force_eq11,
            self.force_eq11_tail_bound,
            self.force_eq14,
            self.force_eq14_tail_bound,
            self.force_asym_small,
            self.force_asym_small_tail_bound,
            self.force_asym_large,
            self.force_asym_large_tail_bound,
        ]
        .into_iter()
        .chain(self.piston_l)
        .chain(self.force_finite_l)
        .chain(self.force_finite_l_tail_bound)
    }

    fn csv_row(&self) -> String {
        let opt = |value: Option<f64>| value.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.a,
            self.b,
            self.ratio,
            self.energy_total,
            self.energy_route,
            self.energy_tail_bound,
            self.force_eq11,
            self.force_eq11_tail_bound,
            self.force_eq14,
            self.force_eq14_tail_bound,
            self.force_asym_small,
            self.force_asym_small_tail_bound,
            self.force_asym_large,
            self.force_asym_large_tail_bound,
            opt(self.piston_l),
            opt(self.force_finite_l),
            opt(self.force_finite_l_tail_bound),
        )
    }
}

fn series_control(rel_tol: Option<f64>) -> Result<SeriesControl, Failure> {
    match rel_tol {
        None => Ok(SeriesControl::default()),
        Some(tol) => Ok(SeriesControl::new(tol, 100_000, 100_000)?),
    }
}

/// Evaluates one geometry through every route and populates a record.
fn build_record(
    a: f64,
    b: f64,
    piston_l: Option<f64>,
    route: EnergyRoute,
    ctrl: SeriesControl,
) -> Result<OutputRecord, Failure> {
    let g = Geometry::new(a, b)?;
    let energy = energy_ar(g, route, ctrl)?;
    let eq11 = force_infinite(g, ctrl)?;
    let eq14 = force_alt(g, ctrl)?;
    let small = force_asym_small_a(g);
    let large = force_asym_large_a(g);
    let (finite, finite_tail) = match piston_l {
        Some(l) => {
            let f = force_finite_l(PistonGeometry::new(l, a, b)?, ctrl)?;
            (Some(f.value), Some(f.tail_bound))
        }
        None => (None, None),
    };
    let record = OutputRecord {
        a,
        b,
        ratio: a / b,
        energy_total: energy.total,
        energy_route: energy.route.label(),
        energy_tail_bound: energy.tail_bound,
        force_eq11: eq11.value,
        force_eq11_tail_bound: eq11.tail_bound,
        force_eq14: eq14.value,
        force_eq14_tail_bound: eq14.tail_bound,
        force_asym_small: small.value,
        force_asym_small_tail_bound: small.tail_bound,
        force_asym_large: large.value,
        force_asym_large_tail_bound: large.tail_bound,
        piston_l,
        force_finite_l: finite,
        force_finite_l_tail_bound: finite_tail,
    };
    if let Some(bad) = record.numeric_fields().find(|v| !v.is_finite()) {
        return Err(Failure::numerical(format!(
            "non-finite value {bad} in the output record at a = {a}, b = {b}"
        )));
    }
    Ok(record)
}

/// Validated sweep request.
#[derive(Debug)]
struct SweepSpec {
    ratio_min: f64,
    ratio_max: f64,
    points: usize,
    spacing: Spacing,
    b_fixed: f64,
}

impl SweepSpec {
    fn new(args: &SweepArgs) -> Result<Self, Failure> {
        for (name, value) in [
            ("--ratio-min", args.ratio_min),
            ("--ratio-max", args.ratio_max),
            ("--b-fixed", args.b_fixed),
        ] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Failure::input(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        if args.ratio_min >= args.ratio_max {
            return Err(Failure::input(format!(
                "--ratio-min {} must be smaller than --ratio-max {}",
                args.ratio_min, args.ratio_max
            )));
        }
        if args.points < 2 {
            return Err(Failure::input(format!(
                "--points must be at least 2, got {}",
                args.points
            )));
        }
        if args.ratio_min < ASPECT_MIN || args.ratio_max > ASPECT_MAX {
            return Err(Failure::input(format!(
                "sweep ratios [{}, {}] exceed the supported aspect range [{ASPECT_MIN:e}, {ASPECT_MAX:e}]",
                args.ratio_min, args.ratio_max
            )));
        }
        Ok(Self {
            ratio_min: args.ratio_min,
            ratio_max: args.ratio_max,
            points: args.points,
            spacing: args.spacing,
            b_fixed: args.b_fixed,
        })
    }

    fn grid(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                let fraction = i as f64 / (n as f64 - 1.0);
                match self.spacing {
                    Spacing::Linear => {
                        self.ratio_min + (self.ratio_max - self.ratio_min) * fraction
                    }
                    Spacing::Log => self.ratio_min * (self.ratio_max / self.ratio_min).powf(fraction),
                }
            })
            .collect()
    }
}

/// Root solve result with the solver's bracket and the comparison value.
#[derive(Debug, Serialize)]
struct CriticalRatioRecord {
    root: f64,
    bracket_lo: f64,
    bracket_hi: f64,
    tolerance: f64,
    reference_ratio: f64,
}

const CRITICAL_FIELDS: [&str; 5] = [
    "root",
    "bracket_lo",
    "bracket_hi",
    "tolerance",
    "reference_ratio",
];

impl CriticalRatioRecord {
    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.root, self.bracket_lo, self.bracket_hi, self.tolerance, self.reference_ratio
        )
    }
}

/// One counterterm fit: empirical coefficients against their quadrature
/// predictions, with the worst per-geometry residual of the panel.
#[derive(Debug, Serialize)]
struct FitRow {
    lambda: f64,
    family: &'static str,
    c1_fit: f64,
    c2_fit: f64,
    c1_quadrature: f64,
    c2_quadrature: f64,
    c1_ratio: f64,
    c2_ratio: f64,
    max_abs_residual: f64,
}

const FIT_FIELDS: [&str; 9] = [
    "lambda",
    "family",
    "c1_fit",
    "c2_fit",
    "c1_quadrature",
    "c2_quadrature",
    "c1_ratio",
    "c2_ratio",
    "max_abs_residual",
];

impl FitRow {
    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.lambda,
            self.family,
            self.c1_fit,
            self.c2_fit,
            self.c1_quadrature,
            self.c2_quadrature,
            self.c1_ratio,
            self.c2_ratio,
            self.max_abs_residual
        )
    }
}

fn csv_document(header: &[&str], rows: &[String]) -> String {
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    text
}

fn json_document<T: Serialize>(rows: &[T]) -> Result<String, Failure> {
    let mut text = serde_json::to_string_pretty(rows)
        .map_err(|err| Failure::numerical(format!("serialization failed: {err}")))?;
    text.push('\n');
    Ok(text)
}

fn write_out(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_records(records: &[OutputRecord], emit: &EmitArgs) -> Result<(), Failure> {
    let text = match emit.format {
        Format::Csv => {
            let rows: Vec<String> = records.iter().map(OutputRecord::csv_row).collect();
            csv_document(&RECORD_FIELDS, &rows)
        }
        Format::Json => json_document(records)?,
    };
    write_out(&text, emit.output.as_deref())
}

fn run_energy(args: &EnergyArgs) -> Result<(), Failure> {
    let ctrl = series_control(args.rel_tol)?;
    let record = build_record(args.a, args.b, None, args.route.route(), ctrl)?;
    emit_records(&[record], &args.emit)
}

fn run_force(args: &ForceArgs) -> Result<(), Failure> {
    let ctrl = series_control(args.rel_tol)?;
    let record = build_record(args.a, args.b, args.l, EnergyRoute::ZetaReflection, ctrl)?;
    emit_records(&[record], &args.emit)
}

fn run_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let spec = SweepSpec::new(args)?;
    let ctrl = series_control(args.rel_tol)?;
    let mut records = Vec::with_capacity(spec.points);
    for ratio in spec.grid() {
        records.push(build_record(
            ratio * spec.b_fixed,
            spec.b_fixed,
            None,
            EnergyRoute::ZetaReflection,
            ctrl,
        )?);
    }
    let emit = EmitArgs {
        format: args.format,
        output: args.output.clone(),
    };
    emit_records(&records, &emit)
}

fn run_critical_ratio(args: &CriticalRatioArgs) -> Result<(), Failure> {
    let root = critical_ratio(args.tol).map_err(Failure::from)?;
    let record = CriticalRatioRecord {
        root,
        bracket_lo: CRITICAL_BRACKET.0,
        bracket_hi: CRITICAL_BRACKET.1,
        tolerance: args.tol,
        reference_ratio: REFERENCE_RATIO,
    };
    let text = match args.emit.format {
        Format::Csv => csv_document(&CRITICAL_FIELDS, &[record.csv_row()]),
        Format::Json => json_document(&[record])?,
    };
    write_out(&text, args.emit.output.as_deref())
}

fn parse_lambdas(raw: &str) -> Result<Vec<f64>, Failure> {
    let mut lambdas = Vec::new();
    for piece in raw.split(',') {
        let trimmed = piece.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lambda: f64 = trimmed
            .parse()
            .map_err(|_| Failure::input(format!("could not parse cutoff scale '{trimmed}'")))?;
        lambdas.push(lambda);
    }
    if lambdas.is_empty() {
        return Err(Failure::input(
            "--lambdas must list at least one cutoff scale",
        ));
    }
    Ok(lambdas)
}

fn run_cutoff_verify(args: &CutoffVerifyArgs) -> Result<(), Failure> {
    let lambdas = parse_lambdas(&args.lambdas)?;
    let mut panel = Vec::with_capacity(FIT_PANEL.len());
    for (a, b) in FIT_PANEL {
        panel.push(Geometry::new(a, b).map_err(Failure::from)?);
    }
    let mut rows = Vec::with_capacity(lambdas.len());
    for lambda in lambdas {
        let cut = CutoffSpec::new(lambda, args.family.family())?;
        let report = fit_counterterms(&panel, cut)?;
        let max_abs_residual = report
            .residuals
            .iter()
            .map(|(_, r)| r.abs())
            .fold(0.0f64, f64::max);
        rows.push(FitRow {
            lambda: report.lambda,
            family: args.family.family().label(),
            c1_fit: report.c1_fit,
            c2_fit: report.c2_fit,
            c1_quadrature: report.c1_quad,
            c2_quadrature: report.c2_quad,
            c1_ratio: report.c1_fit / report.c1_quad,
            c2_ratio: report.c2_fit / report.c2_quad,
            max_abs_residual,
        });
    }
    let text = match args.emit.format {
        Format::Csv => {
            let rendered: Vec<String> = rows.iter().map(FitRow::csv_row).collect();
            csv_document(&FIT_FIELDS, &rendered)
        }
        Format::Json => json_document(&rows)?,
    };
    write_out(&text, args.emit.output.as_deref())
}

fn run_selftest_command() -> Result<(), Failure> {
    let report = run_selftest();
    for item in &report.items {
        let verdict = if item.passed { "PASS" } else { "FAIL" };
        println!("{verdict} {}: {}", item.name, item.detail);
    }
    let total = report.items.len();
    let failures = report.failures();
    println!("{} of {total} invariants passed", total - failures);
    if failures > 0 {
        return Err(Failure {
            code: EXIT_SELFTEST,
            message: format!("selftest: {failures} of {total} invariants failed"),
        });
    }
    Ok(())
}

fn run(command: &Command) -> Result<(), Failure> {
    match command {
        Command::Energy(args) => run_energy(args),
        Command::Force(args) => run_force(args),
        Command::Sweep(args) => run_sweep(args),
        Command::CriticalRatio(args) => run_critical_ratio(args),
        Command::CutoffVerify(args) => run_cutoff_verify(args),
        Command::Selftest => run_selftest_command(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            if matches!(err.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = err.print();
                return ExitCode::SUCCESS;
            }
            let rendered = err.to_string();
            let line = rendered
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments");
            eprintln!("{line}");
            return ExitCode::from(EXIT_INPUT);
        }
    };
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("{}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
