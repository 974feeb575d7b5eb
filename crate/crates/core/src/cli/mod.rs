//! Command-line front end. Verdicts are data: the exit status only reports
//! whether the job ran.

mod input;
mod report;

pub use input::{parse_detect, parse_state, parse_state_at, StateDesc};
pub use report::{format_sig9, VerdictRecord};

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::criteria::{
    cauchy_schwarz_bound, ghz_full_sep, multimode_symmetric_full_sep, simon_criterion, squeezed_thermal,
    symmetric_two_mode, three_mode_biseparable, werner_wolf_2x2, ww_pair_exists, CriterionId, SymmetricMultimodeParams,
    Verdict, ENTANGLED_TOL,
};
use crate::fock::{
    alternate_maximize, fock_elements_at, random_detect_operator, sweep_fig1, write_failures_csv, write_fig1_csv,
    DEFAULT_CUTOFF, DEFAULT_MAX_ROUNDS, MAX_CUTOFF,
};
use crate::kernel::{analytic_eigenvalue, nystrom_spectrum, KernelSpec, DEFAULT_NODES};
use crate::nongaussian::{fig2a_boundary, normalization, photon_added_criterion, squeezed_thermal_kernel, NGPASGSpec};
use crate::symplectic::{standard_form, CovarianceMatrix, StandardForm, PSD_TOL, SYM_TOL};
use crate::witness::{lambda_product_vacuum, minimize_L_with_schedule, DEFAULT_SCHEDULE};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("schema error at `{pointer}`: {message}")]
    Schema { pointer: String, message: String },
    #[error("invalid JSON in {path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{context}: {source}")]
    Compute { context: &'static str, source: crate::Error },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Usage(String),
}

trait Context<T> {
    fn context(self, context: &'static str) -> Result<T, CliError>;
}

impl<T> Context<T> for crate::Result<T> {
    fn context(self, context: &'static str) -> Result<T, CliError> {
        self.map_err(|source| CliError::Compute { context, source })
    }
}

#[derive(Debug, Parser)]
#[command(name = "cvsep", version, about = "Separability criteria and Gaussian entanglement witnesses")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the closed-form criteria that apply to a Gaussian state.
    CheckGaussian(IoArgs),
    /// Separability verdict for a photon-added/subtracted Gaussian state.
    CheckNongaussian(IoArgs),
    /// Minimize the witness ratio over detect operators for a two-mode state.
    WitnessOptimize(WitnessArgs),
    /// Compare the Nystrom spectrum of a Gaussian kernel with its closed form.
    KernelSpectrum(KernelArgs),
    /// Alternating maximization of a detect operator over product states.
    FockIterate(FockArgs),
    /// Random detect operators and product states at fixed cutoff.
    SweepFig1(Fig1Args),
    /// Separability boundaries of squeezed thermal families on a grid.
    SweepFig2(Fig2Args),
}

#[derive(Debug, Args)]
pub struct IoArgs {
    /// JSON state description.
    #[arg(long)]
    pub input: PathBuf,
    /// Where to write the JSON report; human-readable lines go to stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WitnessArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Detect-operator scales, each greater than 1.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SCHEDULE.to_vec())]
    pub schedule: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub r: f64,
    /// Number of leading eigenvalues to report.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = DEFAULT_NODES)]
    pub nodes: usize,
    /// CSV destination; stdout if absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FockArgs {
    /// JSON `{"detect": [...]}`; a random detect operator is drawn from
    /// `--seed` when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    pub cutoff: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_ROUNDS)]
    pub max_rounds: usize,
}

#[derive(Debug, Args)]
pub struct Fig1Args {
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_CUTOFF)]
    pub cutoff: usize,
    /// CSV destination; stdout if absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// CSV of samples with normalized mean above one; defaults to
    /// `<output>.failures.csv` when `--output` is given.
    #[arg(long)]
    pub failures: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Panel {
    /// Photon-added two-mode squeezed thermal states.
    A,
    /// Three-mode symmetric squeezed thermal states.
    B,
}

#[derive(Debug, Args)]
pub struct Fig2Args {
    #[arg(long, value_enum)]
    pub panel: Panel,
    #[arg(long, default_value_t = 3.0)]
    pub n_max: f64,
    #[arg(long, default_value_t = 31)]
    pub n_steps: usize,
    #[arg(long, default_value_t = 1.5)]
    pub r_max: f64,
    #[arg(long, default_value_t = 31)]
    pub r_steps: usize,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.display().to_string(), source })
}

fn write_bytes(path: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => std::io::stdout().write_all(bytes).map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| CliError::Usage(format!("csv: {e}")))?;
    }
    w.into_inner().map_err(|e| CliError::Usage(format!("csv: {e}")))
}

/// Result of one job: human-readable lines and an optional JSON report.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub report: Option<Value>,
}

fn defaults() -> Value {
    json!({
        "psd_tol": PSD_TOL,
        "sym_tol": SYM_TOL,
        "entangled_tol": ENTANGLED_TOL,
    })
}

fn cm_rows(g: &CovarianceMatrix) -> Vec<Vec<f64>> {
    g.to_rows()
}

fn two_mode_verdicts(sf: &StandardForm) -> Vec<Verdict> {
    let scale = sf.a.abs().max(sf.b.abs()).max(1.0);
    let mut out = vec![simon_criterion(sf)];
    if (sf.c1 - sf.c2).abs() <= 1e-12 * scale {
        out.push(squeezed_thermal(sf.a, sf.b, sf.c1));
    }
    if (sf.a - sf.b).abs() <= 1e-12 * scale {
        out.push(symmetric_two_mode(sf.a, sf.c1, sf.c2));
    }
    out.push(cauchy_schwarz_bound(sf));
    out
}

fn gaussian_verdicts(state: &StateDesc) -> Result<(Vec<Verdict>, Value), CliError> {
    match state {
        StateDesc::Cm(g) => {
            if g.modes() != 2 {
                return Err(CliError::Usage(format!(
                    "raw covariance matrices must be two-mode, got {} modes; use a named family",
                    g.modes()
                )));
            }
            let sf = standard_form(g).context("standard form")?;
            Ok((two_mode_verdicts(&sf), json!({ "standard_form": sf })))
        }
        StateDesc::StandardForm(sf) => Ok((two_mode_verdicts(sf), json!({ "standard_form": sf }))),
        StateDesc::WernerWolf2x2(p) => Ok((vec![werner_wolf_2x2(p)], json!({ "pair_exists": ww_pair_exists(p) }))),
        StateDesc::SymmetricMultimode(p) => Ok((vec![multimode_symmetric_full_sep(p)], Value::Null)),
        StateDesc::Ghz { n, a, c } => {
            let mut v = vec![ghz_full_sep(*a, *c, *n)];
            if *n == 3 && *c >= 0.0 {
                v.push(three_mode_biseparable(*a, *c).context("three-mode biseparability")?);
            }
            Ok((v, Value::Null))
        }
        StateDesc::Ngpasg(_) => Err(CliError::Schema {
            pointer: "/family".into(),
            message: "photon-added states go to check-nongaussian".into(),
        }),
    }
}

fn verdict_lines(verdicts: &[VerdictRecord]) -> Vec<String> {
    verdicts.iter().map(VerdictRecord::line).collect()
}

pub fn check_gaussian(state: &StateDesc) -> Result<Outcome, CliError> {
    let (verdicts, extra) = gaussian_verdicts(state)?;
    let records: Vec<VerdictRecord> = verdicts.iter().map(VerdictRecord::from).collect();
    let cm = state.covariance().context("covariance matrix")?;
    let report = json!({
        "command": "check-gaussian",
        "state": state.kind(),
        "cm": cm_rows(&cm),
        "verdicts": records,
        "details": extra,
        "parameters": defaults(),
    });
    Ok(Outcome { lines: verdict_lines(&records), report: Some(report) })
}

pub fn check_nongaussian(state: &StateDesc) -> Result<Outcome, CliError> {
    let StateDesc::Ngpasg(spec) = state else {
        return Err(CliError::Schema { pointer: "/family".into(), message: "expected family `ngpasg`".into() });
    };
    let verdict = photon_added_criterion(spec).context("photon-added criterion")?;
    let norm = normalization(spec).context("normalization")?;
    let record = VerdictRecord::from(&verdict);
    let report = json!({
        "command": "check-nongaussian",
        "state": state.kind(),
        "cm": cm_rows(&spec.kernel),
        "add": spec.adds,
        "sub": spec.subs,
        "normalization": norm,
        "verdicts": [record],
        "parameters": defaults(),
    });
    Ok(Outcome { lines: vec![record.line()], report: Some(report) })
}

pub fn witness_optimize(state: &StateDesc, schedule: &[f64]) -> Result<Outcome, CliError> {
    let gamma = state.covariance().context("covariance matrix")?;
    let res = minimize_L_with_schedule(&gamma, schedule).context("witness optimization")?;
    let verdict = Verdict::new(CriterionId::WitnessRatio, res.value - 1.0);
    let record = VerdictRecord::from(&verdict);
    let mut lines = vec![record.line()];
    lines.push(format!("ratio {} limit {}", format_sig9(res.value), format_sig9(res.limit_value)));
    let report = json!({
        "command": "witness-optimize",
        "state": state.kind(),
        "cm": cm_rows(&gamma),
        "ratio": res.value,
        "limit_ratio": res.limit_value,
        "schedule": schedule,
        "schedule_ratios": res.schedule_values,
        "detect": res.detect.m,
        "verdicts": [record],
        "parameters": defaults(),
    });
    Ok(Outcome { lines, report: Some(report) })
}

#[derive(Debug, Serialize)]
struct SpectrumRow {
    n: usize,
    analytic: f64,
    nystrom: f64,
    abs_error: f64,
}

pub fn kernel_spectrum(args: &KernelArgs) -> Result<Vec<u8>, CliError> {
    let k = KernelSpec::new(args.alpha, args.r).context("kernel")?;
    let ev = nystrom_spectrum(&k, args.nodes).context("Nystrom spectrum")?;
    let rows: Vec<SpectrumRow> = (0..args.count.min(ev.len()))
        .map(|n| {
            let analytic = analytic_eigenvalue(&k, n);
            SpectrumRow { n, analytic, nystrom: ev[n], abs_error: (ev[n] - analytic).abs() }
        })
        .collect();
    csv_bytes(&rows)
}

pub fn fock_iterate(detect: &crate::witness::SixParamDetect, args: &FockArgs) -> Result<Outcome, CliError> {
    if args.cutoff == 0 || args.cutoff > MAX_CUTOFF {
        return Err(CliError::Usage(format!("--cutoff must be in 1..={MAX_CUTOFF}")));
    }
    let lam = lambda_product_vacuum(detect).context("product-vacuum optimum")?;
    let op = fock_elements_at(detect, lam.x, lam.y, args.cutoff).context("Fock elements")?;
    let res = alternate_maximize(&op, args.seed, args.max_rounds);
    let lines = vec![format!(
        "m0 {} rounds {} converged {} final_photon {}",
        format_sig9(res.m0),
        res.rounds,
        res.converged,
        format_sig9(res.photon_trace.last().copied().unwrap_or(f64::NAN))
    )];
    let report = json!({
        "command": "fock-iterate",
        "detect": detect.m,
        "lambda": lam.lambda,
        "squeezing": [lam.x, lam.y],
        "cutoff": args.cutoff,
        "seed": args.seed,
        "max_rounds": args.max_rounds,
        "m0": res.m0,
        "rounds": res.rounds,
        "converged": res.converged,
        "monotone": res.monotone,
        "m0_trace": res.m0_trace,
        "photon_trace": res.photon_trace,
    });
    Ok(Outcome { lines, report: Some(report) })
}

#[derive(Debug, Serialize)]
struct Fig2aRow {
    n_th: f64,
    r: f64,
    boundary_r: f64,
    margin_one_photon: f64,
    margin_two_photon: f64,
    entangled_one_photon: bool,
    entangled_two_photon: bool,
}

#[derive(Debug, Serialize)]
struct Fig2bRow {
    n_th: f64,
    r: f64,
    a: f64,
    c: f64,
    full_sep_margin: f64,
    bisep_margin: f64,
    region: &'static str,
}

fn grid(max: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..steps).map(|i| max * i as f64 / (steps - 1) as f64).collect(),
    }
}

pub fn sweep_fig2(args: &Fig2Args) -> Result<Vec<u8>, CliError> {
    if !(args.n_max >= 0.0) || !(args.r_max >= 0.0) {
        return Err(CliError::Usage("--n-max and --r-max must be non-negative".into()));
    }
    let (ns, rs) = (grid(args.n_max, args.n_steps), grid(args.r_max, args.r_steps));
    match args.panel {
        Panel::A => {
            let mut rows = Vec::new();
            for &n_th in &ns {
                let boundary_r = fig2a_boundary(n_th).context("boundary")?;
                for &r in &rs {
                    let kernel = squeezed_thermal_kernel(n_th, r).context("kernel")?;
                    let verdict = |k: usize| {
                        photon_added_criterion(&NGPASGSpec {
                            kernel: kernel.clone(),
                            adds: vec![k, k],
                            subs: vec![0, 0],
                        })
                        .context("photon-added criterion")
                    };
                    let (one, two) = (verdict(1)?, verdict(2)?);
                    rows.push(Fig2aRow {
                        n_th,
                        r,
                        boundary_r,
                        margin_one_photon: one.margin,
                        margin_two_photon: two.margin,
                        entangled_one_photon: one.is_entangled(),
                        entangled_two_photon: two.is_entangled(),
                    });
                }
            }
            csv_bytes(&rows)
        }
        Panel::B => {
            let mut rows = Vec::new();
            for &n_th in &ns {
                for &r in &rs {
                    let s = 2.0 * n_th + 1.0;
                    let (ep, em) = ((2.0 * r).exp(), (-2.0 * r).exp());
                    let (a, c) = (s * (ep + 2.0 * em) / 3.0, s * (ep - em) / 3.0);
                    let full = multimode_symmetric_full_sep(&SymmetricMultimodeParams::ghz(a, c, 3));
                    let bisep = three_mode_biseparable(a, c).context("three-mode biseparability")?;
                    let region = if !full.is_entangled() {
                        "fully_separable"
                    } else if !bisep.is_entangled() {
                        "biseparable"
                    } else {
                        "beyond_biseparable_bound"
                    };
                    rows.push(Fig2bRow {
                        n_th,
                        r,
                        a,
                        c,
                        full_sep_margin: full.margin,
                        bisep_margin: bisep.margin,
                        region,
                    });
                }
            }
            csv_bytes(&rows)
        }
    }
}

/// Rows CSV and failures CSV of the random sweep, plus a one-line summary.
pub fn sweep_fig1_csv(args: &Fig1Args) -> Result<(Vec<u8>, Vec<u8>, String), CliError> {
    if args.cutoff == 0 || args.cutoff > MAX_CUTOFF {
        return Err(CliError::Usage(format!("--cutoff must be in 1..={MAX_CUTOFF}")));
    }
    let rows = sweep_fig1(args.samples, args.cutoff, args.seed).context("random sweep")?;
    let mut main = Vec::new();
    write_fig1_csv(&rows, &mut main).context("CSV output")?;
    let mut fails = Vec::new();
    let n_fail = write_failures_csv(&rows, &mut fails).context("CSV output")?;
    let converged = rows.iter().filter(|r| r.converged).count();
    let summary = format!("samples {} converged {} failures {}", rows.len(), converged, n_fail);
    Ok((main, fails, summary))
}

fn emit(outcome: Outcome, output: Option<&Path>) -> Result<(), CliError> {
    let mut stdout = std::io::stdout();
    for line in &outcome.lines {
        writeln!(stdout, "{line}").map_err(|source| CliError::Io { path: "<stdout>".into(), source })?;
    }
    if let (Some(report), Some(path)) = (outcome.report, output) {
        let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
        text.push('\n');
        write_bytes(Some(path), text.as_bytes())?;
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::CheckGaussian(io) => {
            let state = parse_state(&read_json(&io.input)?)?;
            emit(check_gaussian(&state)?, io.output.as_deref())
        }
        Command::CheckNongaussian(io) => {
            let state = parse_state(&read_json(&io.input)?)?;
            emit(check_nongaussian(&state)?, io.output.as_deref())
        }
        Command::WitnessOptimize(args) => {
            let state = parse_state(&read_json(&args.io.input)?)?;
            emit(witness_optimize(&state, &args.schedule)?, args.io.output.as_deref())
        }
        Command::KernelSpectrum(args) => write_bytes(args.output.as_deref(), &kernel_spectrum(&args)?),
        Command::FockIterate(args) => {
            let detect = match &args.input {
                Some(p) => parse_detect(&read_json(p)?)?,
                None => random_detect_operator(args.seed),
            };
            emit(fock_iterate(&detect, &args)?, args.output.as_deref())
        }
        Command::SweepFig1(args) => {
            let (main, fails, summary) = sweep_fig1_csv(&args)?;
            write_bytes(args.output.as_deref(), &main)?;
            let failures = args.failures.clone().or_else(|| {
                args.output.as_ref().map(|p| {
                    let mut s = p.clone().into_os_string();
                    s.push(".failures.csv");
                    PathBuf::from(s)
                })
            });
            if let Some(path) = failures {
                write_bytes(Some(&path), &fails)?;
            }
            if args.output.is_some() {
                println!("{summary}");
            } else {
                eprintln!("{summary}");
            }
            Ok(())
        }
        Command::SweepFig2(args) => write_bytes(args.output.as_deref(), &sweep_fig2(&args)?),
    }
}

/// Entry point used by the binary.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
