//! Command implementations behind the `fourphoton` binary.
//!
//! Every number printed comes from one library call; this layer only
//! converts physical units, picks grids and serialises.

use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use fourphoton::coincidence::{
    simulate_pulse_train, verify_time_structure, ExperimentConfig, TimeStructureConfig, TruncationMode,
    DEFAULT_PERIOD_NS,
};
use fourphoton::fock::{chi_from_fock, probabilities, FockSummary, MultiProcessState, DEFAULT_MAX_PAIRS};
use fourphoton::moments::{chi_closed_form, chi_filtered, GaussianSetup, MomentResult};
use fourphoton::quadrature::QuadratureRule;
use fourphoton::spectra::{coherence_ratio, coherence_time_from_filter, spectral_ratio, RatioConvention};

/// Signal wavelength of the reference source, nm.
pub const DEFAULT_SIGNAL_NM: f64 = 1310.0;
/// Points per axis for quadrature χ.
pub const DEFAULT_GRID: usize = 256;

/// The two operating points of the reference measurement: coherence ratio
/// and the χ measured there.
pub const MEASURED_OPERATING_POINTS: [(f64, f64); 2] = [(2.5, 0.95), (0.2, 0.3)];

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] fourphoton::Error),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for invalid input, 3 for non-convergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use fourphoton::Error as E;
        match self {
            CliError::Core(E::Convergence { .. }) => 3,
            CliError::Core(
                E::Domain(_)
                | E::OutOfRange { .. }
                | E::Degenerate(_)
                | E::Truncation { .. }
                | E::Precondition(_)
                | E::EmptyRun
                | E::Table(_),
            )
            | CliError::Argument(_) => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        use fourphoton::Error as E;
        match self {
            CliError::Core(e) => match e {
                E::Domain(_) => "domain",
                E::OutOfRange { .. } => "out-of-range",
                E::Convergence { .. } => "convergence",
                E::Degenerate(_) => "degenerate",
                E::Truncation { .. } => "truncation",
                E::Precondition(_) => "precondition",
                E::EmptyRun => "empty-run",
                E::Table(_) => "table",
                _ => "io",
            },
            CliError::Argument(_) => "argument",
            CliError::Io(_) | CliError::Csv(_) | CliError::Json(_) => "io",
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "error": { "kind": self.kind(), "message": self.to_string(), "exit_code": self.exit_code() }
        })
        .to_string()
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum RuleArg {
    #[default]
    GaussLegendre,
    Trapezoid,
}

impl From<RuleArg> for QuadratureRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::GaussLegendre => QuadratureRule::GaussLegendre,
            RuleArg::Trapezoid => QuadratureRule::Trapezoid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum ConventionArg {
    #[default]
    SigmaRatio,
    FwhmRatio,
}

impl From<ConventionArg> for RatioConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::SigmaRatio => RatioConvention::SigmaRatio,
            ConventionArg::FwhmRatio => RatioConvention::FwhmRatio,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum TruncationArg {
    #[default]
    Window,
    PerPulse,
}

impl From<TruncationArg> for TruncationMode {
    fn from(t: TruncationArg) -> Self {
        match t {
            TruncationArg::Window => TruncationMode::Window,
            TruncationArg::PerPulse => TruncationMode::PerPulse,
        }
    }
}

/// Four-photon statistics of pulsed parametric down-conversion.
#[derive(Debug, Parser)]
#[command(name = "fourphoton", version)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// χ for a pump pulse and interference filter given in physical units.
    Chi(ChiArgs),
    /// χ over a range of coherence ratios r.
    Sweep(SweepArgs),
    /// Exact χ and pair distribution of N independent squeezers.
    Fock(FockArgs),
    /// Monte Carlo coincidence histogram.
    Tac(TacArgs),
    /// Double-pulse time-structure check.
    Verify(VerifyArgs),
    /// Model χ at the two reference operating points next to the measured values.
    Demo(DemoArgs),
    /// Overlay a user-supplied measurement file (`r,chi`) on the model.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ModelArgs {
    /// How r = t_c/Δt maps to the spectral ratio Δp/ΔF.
    #[arg(long, value_enum, default_value_t = ConventionArg::SigmaRatio)]
    pub r_convention: ConventionArg,
    /// Quadrature rule for the numerical χ.
    #[arg(long, value_enum, default_value_t = RuleArg::GaussLegendre)]
    pub rule: RuleArg,
    /// Points per axis for the numerical χ.
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ChiArgs {
    /// Pump intensity FWHM duration, fs.
    #[arg(long)]
    pub pump_fwhm_fs: f64,
    /// Filter FWHM bandwidth, nm.
    #[arg(long)]
    pub filter_fwhm_nm: f64,
    /// Filter center wavelength, nm.
    #[arg(long, default_value_t = DEFAULT_SIGNAL_NM)]
    pub lambda_nm: f64,
    /// Also compute χ by quadrature.
    #[arg(long)]
    pub quadrature: bool,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub r_min: f64,
    #[arg(long)]
    pub r_max: f64,
    #[arg(long)]
    pub points: usize,
    /// Logarithmic spacing.
    #[arg(long)]
    pub log: bool,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Clone, Args)]
pub struct FockArgs {
    /// Number of independent processes.
    #[arg(long)]
    pub n: usize,
    /// Squeezing parameter ξ.
    #[arg(long)]
    pub xi: f64,
    /// Largest total pair number kept.
    #[arg(long, default_value_t = DEFAULT_MAX_PAIRS)]
    pub max_pairs: usize,
}

#[derive(Debug, Clone, Args)]
pub struct TacArgs {
    #[arg(long)]
    pub p2: f64,
    #[arg(long)]
    pub chi: f64,
    #[arg(long)]
    pub pulses: u64,
    #[arg(long)]
    pub seed: u64,
    /// Detection efficiency of both detectors.
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Dark-click probability per detector per gate.
    #[arg(long, default_value_t = 0.0)]
    pub dark: f64,
    #[arg(long, default_value_t = DEFAULT_PERIOD_NS)]
    pub period_ns: f64,
    #[arg(long, value_enum, default_value_t = TruncationArg::Window)]
    pub truncation: TruncationArg,
    /// Also write the histogram (`delay_ns,counts`) here.
    #[arg(long)]
    pub histogram: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Pulse separation in pump coherence times.
    #[arg(long)]
    pub tau_widths: f64,
    /// Spectral ratio Δp/ΔF of the Gaussian test case.
    #[arg(long, default_value_t = 1.0)]
    pub r_tilde: f64,
}

#[derive(Debug, Clone, Args)]
pub struct DemoArgs {
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    /// CSV with header `r,chi`.
    #[arg(long)]
    pub measured: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiReport {
    pub lambda_nm: f64,
    pub filter_fwhm_nm: f64,
    pub pump_fwhm_fs: f64,
    pub coherence_time_fs: f64,
    pub coherence_time_approximate: bool,
    pub r: f64,
    pub r_tilde: f64,
    pub chi_closed_form: f64,
    pub chi_quadrature: Option<f64>,
    pub quadrature_error: Option<f64>,
    pub j2f: Option<f64>,
    pub j4f: Option<f64>,
    pub grid_points: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r: f64,
    pub r_tilde: f64,
    pub chi_closed_form: f64,
    pub chi_quadrature: f64,
    pub quadrature_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoRow {
    pub r: f64,
    pub r_tilde: f64,
    pub chi_model: f64,
    pub chi_quadrature: f64,
    pub chi_measured: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub r: f64,
    pub chi_measured: f64,
    pub chi_model: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub tau_widths: f64,
    pub r_tilde: f64,
    pub r1_spread: f64,
    pub r2_cross_ratio: f64,
    pub half_rate_ratio: f64,
    pub chi: f64,
    pub chi_closed_form: f64,
    pub ratio: f64,
    pub signal_points: usize,
    pub idler_points: usize,
    pub time_points: usize,
}

fn quadrature_chi(r_tilde: f64, model: &ModelArgs) -> Result<MomentResult<f64>> {
    let setup = GaussianSetup::new(r_tilde)?;
    let config = setup.config(model.grid)?.with_rule(model.rule.into());
    Ok(chi_filtered(&setup.amplitude, &setup.filter, &config)?)
}

pub fn run_chi(args: &ChiArgs) -> Result<ChiReport> {
    let tc = coherence_time_from_filter(args.lambda_nm, args.filter_fwhm_nm)?;
    let r = coherence_ratio(tc.femtoseconds, args.pump_fwhm_fs)?;
    let r_tilde = spectral_ratio(r, args.model.r_convention.into())?;
    let mut report = ChiReport {
        lambda_nm: args.lambda_nm,
        filter_fwhm_nm: args.filter_fwhm_nm,
        pump_fwhm_fs: args.pump_fwhm_fs,
        coherence_time_fs: tc.femtoseconds,
        coherence_time_approximate: tc.approximate,
        r,
        r_tilde,
        chi_closed_form: chi_closed_form(r_tilde)?,
        chi_quadrature: None,
        quadrature_error: None,
        j2f: None,
        j4f: None,
        grid_points: None,
    };
    if args.quadrature {
        let m = quadrature_chi(r_tilde, &args.model)?;
        report.chi_quadrature = Some(m.chi);
        report.quadrature_error = Some(m.error_estimate);
        report.j2f = Some(m.j2f);
        report.j4f = Some(m.j4f);
        report.grid_points = Some(m.grid_points);
    }
    Ok(report)
}

pub fn sweep_points(r_min: f64, r_max: f64, points: usize, log: bool) -> Result<Vec<f64>> {
    if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
        return Err(CliError::Argument(format!("need 0 < r_min < r_max, got [{r_min}, {r_max}]")));
    }
    if points < 2 {
        return Err(CliError::Argument(format!("a sweep needs at least 2 points, got {points}")));
    }
    let last = (points - 1) as f64;
    Ok((0..points)
        .map(|i| {
            let t = i as f64 / last;
            if i == points - 1 {
                r_max
            } else if log {
                r_min * (r_max / r_min).powf(t)
            } else {
                r_min + (r_max - r_min) * t
            }
        })
        .collect())
}

pub fn run_sweep(args: &SweepArgs) -> Result<Vec<SweepRow>> {
    let rs = sweep_points(args.r_min, args.r_max, args.points, args.log)?;
    rs.par_iter()
        .map(|&r| {
            let r_tilde = spectral_ratio(r, args.model.r_convention.into())?;
            let m = quadrature_chi(r_tilde, &args.model)?;
            Ok(SweepRow {
                r,
                r_tilde,
                chi_closed_form: chi_closed_form(r_tilde)?,
                chi_quadrature: m.chi,
                quadrature_error: m.error_estimate,
            })
        })
        .collect()
}

pub fn run_fock(args: &FockArgs) -> Result<(FockSummary<f64>, fourphoton::fock::ProbabilityTable<f64>)> {
    let state = MultiProcessState::new(args.n, args.xi)?.with_max_pairs(args.max_pairs);
    let table = probabilities(&state)?;
    let chi = chi_from_fock(&state)?;
    Ok((FockSummary { chi, tail_bound: table.tail_bound, processes: args.n, xi: args.xi }, table))
}

pub fn experiment(args: &TacArgs) -> ExperimentConfig {
    ExperimentConfig::new(args.p2, args.chi, args.pulses, args.seed)
        .with_efficiency(args.eta)
        .with_dark(args.dark)
        .with_period(args.period_ns)
        .with_truncation(args.truncation.into())
}

pub fn run_verify(args: &VerifyArgs) -> Result<VerifyReport> {
    let setup = GaussianSetup::new(args.r_tilde)?;
    let rep = verify_time_structure(&setup.amplitude, &setup.filter, &TimeStructureConfig::new(args.tau_widths))?;
    Ok(VerifyReport {
        tau_widths: args.tau_widths,
        r_tilde: args.r_tilde,
        r1_spread: rep.r1_spread(),
        r2_cross_ratio: rep.r2_cross_ratio(),
        half_rate_ratio: rep.half_rate_ratio(),
        chi: rep.chi,
        chi_closed_form: chi_closed_form(args.r_tilde)?,
        ratio: rep.ratio,
        signal_points: rep.points[0],
        idler_points: rep.points[1],
        time_points: rep.points[2],
    })
}

pub fn run_demo(args: &DemoArgs) -> Result<Vec<DemoRow>> {
    MEASURED_OPERATING_POINTS
        .iter()
        .map(|&(r, measured)| {
            let r_tilde = spectral_ratio(r, args.model.r_convention.into())?;
            Ok(DemoRow {
                r,
                r_tilde,
                chi_model: chi_closed_form(r_tilde)?,
                chi_quadrature: quadrature_chi(r_tilde, &args.model)?.chi,
                chi_measured: measured,
            })
        })
        .collect()
}

#[derive(Debug, Deserialize)]
struct MeasuredRow {
    r: f64,
    chi: f64,
}

/// Read `r,chi` rows.
pub fn read_measured<R: Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let rows: Vec<MeasuredRow> = rdr.deserialize().collect::<std::result::Result<_, _>>()?;
    if rows.is_empty() {
        return Err(CliError::Argument("measurement file has no rows".into()));
    }
    Ok(rows.into_iter().map(|m| (m.r, m.chi)).collect())
}

pub fn run_compare(path: &Path, model: &ModelArgs) -> Result<Vec<CompareRow>> {
    let measured = read_measured(std::fs::File::open(path)?)?;
    measured
        .into_iter()
        .map(|(r, chi)| {
            let model_chi = chi_closed_form(spectral_ratio(r, model.r_convention.into())?)?;
            Ok(CompareRow { r, chi_measured: chi, chi_model: model_chi, residual: chi - model_chi })
        })
        .collect()
}

pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| CliError::Io(e.into_error()))
}

fn render<T: Serialize>(format: Format, rows: &[T], single: bool) -> Result<Vec<u8>> {
    match format {
        Format::Csv => to_csv(rows),
        Format::Json if single => to_json(&rows[0]),
        Format::Json => to_json(rows),
    }
}

/// Run one command and return the bytes destined for `--output`/stdout.
pub fn execute(config: &RunConfig) -> Result<Vec<u8>> {
    let format = config.format;
    match &config.command {
        Command::Chi(args) => render(format, &[run_chi(args)?], true),
        Command::Sweep(args) => render(format, &run_sweep(args)?, false),
        Command::Fock(args) => {
            let (summary, table) = run_fock(args)?;
            match format {
                Format::Json => to_json(&summary),
                Format::Csv => {
                    let mut buf = Vec::new();
                    table.write_csv(&mut buf)?;
                    Ok(buf)
                }
            }
        }
        Command::Tac(args) => {
            let hist = simulate_pulse_train(&experiment(args))?;
            let mut csv = Vec::new();
            hist.write_csv(&mut csv)?;
            if let Some(path) = &args.histogram {
                std::fs::write(path, &csv)?;
            }
            match format {
                Format::Json => to_json(&hist.summary()?),
                Format::Csv => Ok(csv),
            }
        }
        Command::Verify(args) => render(format, &[run_verify(args)?], true),
        Command::Demo(args) => render(format, &run_demo(args)?, false),
        Command::Compare(args) => render(format, &run_compare(&args.measured, &args.model)?, false),
    }
}

/// Cap the global worker pool from `FOURPHOTON_THREADS`.
pub fn configure_threads() -> Result<()> {
    if let Ok(value) = std::env::var("FOURPHOTON_THREADS") {
        let n: usize = value
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Argument(format!("FOURPHOTON_THREADS must be a positive integer, got {value:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Argument(format!("thread pool: {e}")))?;
    }
    Ok(())
}
