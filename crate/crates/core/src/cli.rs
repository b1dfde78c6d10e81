//! Command-line front end: CSV ingestion, decomposition pipeline, artifact
//! emission and artifact verification.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::emd::{EemdConfig, SiftConfig};
use crate::epemd::{epmemd, verify_linoep};
use crate::error::EmdError;
use crate::gsom::orthogonal_variants;
use crate::hsa::{hilbert_spectrum_with, IfMethod, SpectrumOptions, DEFAULT_FREQ_BINS};
use crate::memd::{memd, MultivariateSignal, DEFAULT_DIRECTIONS};
use crate::metrics::{ortho_report, pee_identity_check, OrthoReport};
use crate::siggen::{generate_multivariate, sweep_io_t, SignalKind, SignalSpec};
use crate::signal::{Decomposition, SampledSignal, Variant};
use crate::significance::{significance_test, white_noise_band_with, Placement, DEFAULT_TRIALS};
use crate::decompose;

pub const SCHEMA_VERSION: u32 = 1;

/// Relative jitter allowed between consecutive time stamps.
const TIME_JITTER: f64 = 1e-9;

/// Tolerances used by `verify`.
pub const VERIFY_COMPLETENESS: f64 = 1e-9;
pub const VERIFY_ORTHOGONALITY: f64 = 1e-9;
pub const VERIFY_IDENTITY: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<EmdError> for CliError {
    fn from(e: EmdError) -> Self {
        match e {
            EmdError::RankDeficient { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "emdkit", version, about = "Empirical mode decomposition toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decompose a signal and write the requested artifacts.
    Decompose(DecomposeArgs),
    /// Re-check an artifact directory from its files alone.
    Verify(VerifyArgs),
    /// IO_T of EMD and EPEMD across sampling rates.
    Sweep(SweepArgs),
    /// Write a benchmark signal as CSV.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algorithm {
    Emd,
    Eemd,
    Memd,
    Epemd,
    Epmemd,
}

impl Algorithm {
    fn variant(self) -> Variant {
        match self {
            Algorithm::Emd => Variant::Emd,
            Algorithm::Eemd => Variant::Eemd,
            Algorithm::Memd => Variant::Memd,
            Algorithm::Epemd => Variant::Epemd,
            Algorithm::Epmemd => Variant::Epmemd,
        }
    }

    fn multivariate(self) -> bool {
        matches!(self, Algorithm::Memd | Algorithm::Epmemd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PostProcess {
    Oimf,
    Foimf,
    Roimf,
    Fouimf,
    Rouimf,
}

impl PostProcess {
    fn variant(self) -> Variant {
        match self {
            PostProcess::Oimf => Variant::Oimf,
            PostProcess::Foimf => Variant::Foimf,
            PostProcess::Roimf => Variant::Roimf,
            PostProcess::Fouimf => Variant::Fouimf,
            PostProcess::Rouimf => Variant::Rouimf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Output {
    Imfs,
    Report,
    Spectrum,
    Marginal,
    Significance,
    Sweep,
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    /// CSV input: a time column followed by one column per channel.
    #[arg(long, conflicts_with = "gen", required_unless_present = "gen")]
    input: Option<PathBuf>,
    /// Built-in signal instead of a file.
    #[arg(long, value_parser = parse_kind)]
    gen: Option<SignalKind>,
    /// Override the generator's sample rate (Hz).
    #[arg(long, requires = "gen")]
    gen_rate: Option<f64>,
    /// Override the generator's duration (s).
    #[arg(long, requires = "gen")]
    gen_duration: Option<f64>,
    /// Generated channel count.
    #[arg(long, requires = "gen")]
    channels: Option<usize>,
    #[arg(long, value_enum, default_value = "emd")]
    algo: Algorithm,
    #[arg(long, value_enum)]
    post: Option<PostProcess>,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["imfs", "report"])]
    out: Vec<Output>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, env = "EMDKIT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    sd_threshold: Option<f64>,
    #[arg(long)]
    max_sift_iterations: Option<usize>,
    #[arg(long)]
    max_imfs: Option<usize>,
    #[arg(long)]
    noise_ratio: Option<f64>,
    #[arg(long)]
    ensemble_size: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_DIRECTIONS)]
    directions: usize,
    #[arg(long, default_value_t = DEFAULT_FREQ_BINS)]
    freq_bins: usize,
    /// Spectrum time columns; one per sample when omitted.
    #[arg(long)]
    time_bins: Option<usize>,
    /// Use the quotient formula for instantaneous frequency.
    #[arg(long)]
    quotient_if: bool,
    /// Monte-Carlo trials for the significance band.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    dir: PathBuf,
    /// Also require the spectrum ridge to be nondecreasing over the central
    /// 80% of populated time columns.
    #[arg(long)]
    expect_monotone_ridge: bool,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 105.0)]
    from: f64,
    #[arg(long, default_value_t = 400.0)]
    to: f64,
    #[arg(long, default_value_t = 5.0)]
    step: f64,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long, value_parser = parse_kind)]
    kind: SignalKind,
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    channels: Option<usize>,
    #[arg(long, env = "EMDKIT_SEED", default_value_t = 0)]
    seed: u64,
    /// Destination CSV; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_kind(s: &str) -> Result<SignalKind, String> {
    s.parse().map_err(|e: EmdError| e.to_string())
}

#[derive(Debug, Clone)]
pub enum InputSource {
    Csv(PathBuf),
    Generated { spec: SignalSpec, channels: usize },
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: InputSource,
    pub algorithm: Algorithm,
    pub post: Option<PostProcess>,
    pub sift: SiftConfig,
    pub ensemble: EemdConfig,
    pub directions: usize,
    pub spectrum: SpectrumOptions,
    pub trials: usize,
    pub outputs: BTreeSet<Output>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl RunConfig {
    fn from_args(a: DecomposeArgs) -> Result<Self, CliError> {
        let input = match (a.input, a.gen) {
            (Some(p), _) => InputSource::Csv(p),
            (None, Some(kind)) => {
                let mut spec = SignalSpec::preset(kind).with_seed(a.seed);
                if let Some(r) = a.gen_rate {
                    spec.sample_rate = r;
                }
                if let Some(d) = a.gen_duration {
                    spec.duration = d;
                }
                spec.validate()?;
                let default_channels = if kind == SignalKind::Multitone4 { 4 } else { 1 };
                InputSource::Generated {
                    spec,
                    channels: a.channels.unwrap_or(default_channels).max(1),
                }
            }
            (None, None) => return Err(CliError::Usage("one of --input or --gen is required".into())),
        };
        let d = SiftConfig::default();
        let sift = SiftConfig::new(
            a.sd_threshold.unwrap_or(d.sd_threshold),
            a.max_sift_iterations.unwrap_or(d.max_sift_iterations),
            a.max_imfs.unwrap_or(d.max_imfs),
        )?;
        let e = EemdConfig::default();
        let ensemble = EemdConfig::new(
            a.noise_ratio.unwrap_or(e.noise_stddev_ratio),
            a.ensemble_size.unwrap_or(e.ensemble_size),
            a.seed,
        )?;
        Ok(Self {
            input,
            algorithm: a.algo,
            post: a.post,
            sift,
            ensemble,
            directions: a.directions,
            spectrum: SpectrumOptions {
                n_freq_bins: a.freq_bins,
                n_time_bins: a.time_bins,
                if_method: if a.quotient_if {
                    IfMethod::Quotient
                } else {
                    IfMethod::PhaseDifference
                },
            },
            trials: a.trials,
            outputs: a.out.into_iter().collect(),
            output_dir: a.out_dir,
            seed: a.seed,
        })
    }
}

/// Parsed CSV: shared time axis and one signal per value column.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub headers: Option<Vec<String>>,
    pub comments: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

/// Reads a comma-separated table with optional `#` comment lines and an
/// optional header row. Every cell must parse as a finite number.
pub fn read_table(path: &Path) -> Result<CsvTable, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_table(&text).map_err(|e| match e {
        CliError::Validation(m) => CliError::Validation(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse_table(text: &str) -> Result<CsvTable, CliError> {
    let comments = text
        .lines()
        .filter_map(|l| l.trim_start().strip_prefix('#'))
        .map(|l| l.trim().to_string())
        .collect();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut headers = None;
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Validation(format!("line {line}: {e}"))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if k == 0 && record.get(0).is_some_and(|c| c.parse::<f64>().is_err()) {
            headers = Some(record.iter().map(str::to_string).collect());
            continue;
        }
        if columns.is_empty() {
            columns = vec![Vec::new(); record.len()];
        }
        if record.len() != columns.len() {
            return Err(CliError::Validation(format!(
                "line {line}: expected {} fields, found {}",
                columns.len(),
                record.len()
            )));
        }
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| CliError::Validation(format!("line {line}: '{cell}' is not a number")))?;
            if !v.is_finite() {
                return Err(CliError::Validation(format!("line {line}: non-finite value '{cell}'")));
            }
            columns[j].push(v);
        }
    }
    if columns.is_empty() {
        return Err(CliError::Validation("no data rows".into()));
    }
    Ok(CsvTable {
        headers,
        comments,
        columns,
    })
}

/// Sample rate and start time of a uniform time column.
pub fn infer_rate(time: &[f64]) -> Result<(f64, f64), CliError> {
    if time.len() < 2 {
        return Err(CliError::Validation("at least two samples are needed to infer the sample rate".into()));
    }
    let n = time.len();
    let dt = (time[n - 1] - time[0]) / (n - 1) as f64;
    if !(dt > 0.0) {
        return Err(CliError::Validation("time column must be increasing".into()));
    }
    for (i, w) in time.windows(2).enumerate() {
        if ((w[1] - w[0]) - dt).abs() > TIME_JITTER * dt.max(w[1].abs()) {
            return Err(CliError::Validation(format!(
                "time column is not uniform at row {} (step {} vs {dt})",
                i + 2,
                w[1] - w[0]
            )));
        }
    }
    Ok((1.0 / dt, time[0]))
}

fn load_input(source: &InputSource) -> Result<MultivariateSignal, CliError> {
    match source {
        InputSource::Generated { spec, channels } => Ok(generate_multivariate(spec, *channels)?),
        InputSource::Csv(path) => {
            let table = read_table(path)?;
            if table.columns.len() < 2 {
                return Err(CliError::Validation(format!(
                    "{}: need a time column and at least one value column",
                    path.display()
                )));
            }
            let (rate, t0) = infer_rate(&table.columns[0])?;
            let channels = table.columns[1..]
                .iter()
                .map(|c| SampledSignal::with_start(c.clone(), rate, t0))
                .collect::<crate::Result<Vec<_>>>()?;
            Ok(MultivariateSignal::new(channels)?)
        }
    }
}

/// Everything a run produces, held in memory until all of it succeeded.
struct Artifacts {
    files: Vec<(&'static str, String)>,
}

struct ChannelResult {
    input: SampledSignal,
    decomposition: Decomposition,
    report: Option<OrthoReport>,
}

fn decompose_all(cfg: &RunConfig, x: &MultivariateSignal) -> Result<Vec<ChannelResult>, CliError> {
    let channels = x.channel_count();
    if channels > 1 && !cfg.algorithm.multivariate() {
        return Err(CliError::Usage(format!(
            "input has {channels} channels; use --algo memd or epmemd, or a single-column file"
        )));
    }
    let base: Vec<Decomposition> = if cfg.algorithm.multivariate() {
        let v = cfg.algorithm.variant();
        let md = if v == Variant::Memd {
            memd(x, cfg.directions, &cfg.sift)?
        } else {
            epmemd(x, cfg.directions, &cfg.sift)?
        };
        (0..channels).map(|j| md.channel(j, v)).collect()
    } else {
        vec![decompose(x.channel(0), cfg.algorithm.variant(), &cfg.sift, &cfg.ensemble)?]
    };
    base.into_iter()
        .enumerate()
        .map(|(j, d)| {
            let d = match cfg.post {
                Some(p) => orthogonal_variants(&d, p.variant())?,
                None => d,
            };
            let input = x.channel(j).clone();
            let report = match ortho_report(&input, &d) {
                Ok(r) => Some(r),
                Err(EmdError::UndefinedRatio(_)) => None,
                Err(e) => return Err(e.into()),
            };
            Ok(ChannelResult {
                input,
                decomposition: d,
                report,
            })
        })
        .collect()
}

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        format!("{v}")
    }
}

fn json_f64(v: f64) -> Value {
    if v.is_finite() {
        Value::Number(fmt_f64(v).parse().expect("formatted float is valid JSON"))
    } else {
        Value::Null
    }
}

/// Rewrites every float in `v` with 17 significant digits.
fn precise(v: Value) -> Value {
    match v {
        Value::Number(n) if !(n.is_i64() || n.is_u64()) => n.as_f64().map_or(Value::Number(n), json_f64),
        Value::Array(a) => Value::Array(a.into_iter().map(precise).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, precise(v))).collect()),
        other => other,
    }
}

fn channel_prefix(channels: usize, j: usize) -> String {
    if channels > 1 {
        format!("ch{j}.")
    } else {
        String::new()
    }
}

fn component_names(d: &Decomposition) -> Vec<String> {
    let mut names: Vec<String> = (1..=d.imfs.len()).map(|k| format!("{}_{k}", d.variant)).collect();
    names.push("residue".into());
    names
}

fn input_csv(results: &[ChannelResult]) -> String {
    let x0 = &results[0].input;
    let mut s = String::from("time");
    for j in 0..results.len() {
        write!(s, ",x{j}").unwrap();
    }
    s.push('\n');
    for i in 0..x0.len() {
        s.push_str(&fmt_f64(x0.time(i)));
        for r in results {
            write!(s, ",{}", fmt_f64(r.input.samples()[i])).unwrap();
        }
        s.push('\n');
    }
    s
}

fn imfs_csv(results: &[ChannelResult]) -> String {
    let channels = results.len();
    let d0 = &results[0].decomposition;
    let mut s = String::new();
    writeln!(s, "# variant={}", d0.variant).unwrap();
    writeln!(s, "# sample_rate={}", fmt_f64(d0.sample_rate())).unwrap();
    writeln!(s, "# channels={channels}").unwrap();
    for (j, r) in results.iter().enumerate() {
        writeln!(s, "# dc_constant[{j}]={}", fmt_f64(r.decomposition.dc_constant)).unwrap();
    }
    s.push_str("time");
    for (j, r) in results.iter().enumerate() {
        let prefix = channel_prefix(channels, j);
        for name in component_names(&r.decomposition) {
            write!(s, ",{prefix}{name}").unwrap();
        }
    }
    s.push('\n');
    let comps: Vec<Vec<SampledSignal>> = results.iter().map(|r| r.decomposition.components()).collect();
    for i in 0..d0.len() {
        s.push_str(&fmt_f64(d0.residue.time(i)));
        for c in comps.iter().flatten() {
            write!(s, ",{}", fmt_f64(c.samples()[i])).unwrap();
        }
        s.push('\n');
    }
    s
}

fn report_json(cfg: &RunConfig, results: &[ChannelResult]) -> Result<String, CliError> {
    let channels: Vec<Value> = results
        .iter()
        .enumerate()
        .map(|(j, r)| {
            let d = &r.decomposition;
            let mut names = component_names(d);
            if d.dc_constant != 0.0 {
                names.push("dc_constant".into());
            }
            let table: Vec<Value> = match &r.report {
                Some(rep) => names
                    .iter()
                    .zip(&rep.component_energies)
                    .map(|(name, e)| {
                        json!({
                            "component": name,
                            "energy": e,
                            "percent_of_signal": 100.0 * e / rep.signal_energy,
                        })
                    })
                    .collect(),
                None => Vec::new(),
            };
            json!({
                "channel": j,
                "imf_count": d.imfs.len(),
                "dc_constant": d.dc_constant,
                "completeness_error": d.completeness_error(&r.input).unwrap_or(f64::NAN),
                "component_energies": table,
                "ortho": r.report,
                "pee_identity_residual": r.report.as_ref().map(pee_identity_check),
            })
        })
        .collect();
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "variant": results[0].decomposition.variant,
        "algorithm": cfg.algorithm.variant(),
        "post": cfg.post.map(|p| p.variant()),
        "exact": results[0].decomposition.variant.is_exact(),
        "seed": cfg.seed,
        "sample_rate": results[0].input.sample_rate(),
        "length": results[0].input.len(),
        "channels": channels,
    });
    serde_json::to_string_pretty(&precise(doc)).map_err(|e| CliError::Validation(e.to_string()))
}

fn spectrum_files(cfg: &RunConfig, results: &[ChannelResult]) -> Result<(String, String), CliError> {
    let mut spec = String::from("channel,freq_hz,time_s,energy\n");
    let mut marg = String::from("channel,freq_hz,energy\n");
    for (j, r) in results.iter().enumerate() {
        if r.decomposition.imfs.is_empty() {
            return Err(CliError::Validation("spectrum requires at least one IMF".into()));
        }
        let h = hilbert_spectrum_with(&r.decomposition, &cfg.spectrum)?;
        for (f, row) in h.energy.iter().enumerate() {
            for (t, e) in row.iter().enumerate() {
                if *e > 0.0 {
                    writeln!(spec, "{j},{},{},{}", fmt_f64(h.freq_bins[f]), fmt_f64(h.time_bins[t]), fmt_f64(*e)).unwrap();
                }
            }
            writeln!(marg, "{j},{},{}", fmt_f64(h.freq_bins[f]), fmt_f64(h.marginal[f])).unwrap();
        }
    }
    Ok((spec, marg))
}

fn significance_csv(cfg: &RunConfig, results: &[ChannelResult]) -> Result<String, CliError> {
    let mut s = String::from("channel,component,mean_period,energy_density,inside,placement\n");
    for (j, r) in results.iter().enumerate() {
        let d = &r.decomposition;
        let band = white_noise_band_with(
            d.len(),
            d.sample_rate(),
            d.variant,
            cfg.trials,
            cfg.seed,
            &cfg.sift,
            &cfg.ensemble,
        )?;
        for (k, p) in significance_test(d, &band)?.iter().enumerate() {
            let placement = match p.placement {
                Placement::Inside => "inside",
                Placement::Above => "above",
                Placement::Below => "below",
                Placement::NotApplicable => "n/a",
            };
            writeln!(
                s,
                "{j},{}_{},{},{},{},{placement}",
                d.variant,
                k + 1,
                fmt_f64(p.mean_period),
                fmt_f64(p.energy_density),
                p.inside_bounds()
            )
            .unwrap();
        }
    }
    Ok(s)
}

fn sweep_csv(rates: &[f64], sift: &SiftConfig) -> Result<String, CliError> {
    let mut s = String::from("fs,io_t_emd,io_t_epemd\n");
    for row in sweep_io_t(rates, sift)? {
        writeln!(s, "{},{},{}", fmt_f64(row.fs), fmt_f64(row.io_t_emd), fmt_f64(row.io_t_epemd)).unwrap();
    }
    Ok(s)
}

fn default_sweep_rates() -> Vec<f64> {
    (0..=59).map(|i| 105.0 + 5.0 * i as f64).collect()
}

fn build_artifacts(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let x = load_input(&cfg.input)?;
    let results = decompose_all(cfg, &x)?;
    let mut files = vec![("input.csv", input_csv(&results))];
    for out in &cfg.outputs {
        match out {
            Output::Imfs => files.push(("imfs.csv", imfs_csv(&results))),
            Output::Report => files.push(("report.json", report_json(cfg, &results)?)),
            Output::Spectrum | Output::Marginal => {
                if files.iter().any(|(n, _)| *n == "spectrum.csv" || *n == "marginal.csv") {
                    continue;
                }
                let (spec, marg) = spectrum_files(cfg, &results)?;
                if cfg.outputs.contains(&Output::Spectrum) {
                    files.push(("spectrum.csv", spec));
                }
                if cfg.outputs.contains(&Output::Marginal) {
                    files.push(("marginal.csv", marg));
                }
            }
            Output::Significance => files.push(("significance.csv", significance_csv(cfg, &results)?)),
            Output::Sweep => files.push(("sweep.csv", sweep_csv(&default_sweep_rates(), &cfg.sift)?)),
        }
    }
    Ok(Artifacts { files })
}

fn write_files(dir: &Path, files: &[(&str, String)]) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| io_err(&path, e))?;
    }
    Ok(())
}

/// Runs the pipeline. Nothing is written unless every requested artifact
/// was computed.
pub fn run(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let artifacts = build_artifacts(cfg)?;
    write_files(&cfg.output_dir, &artifacts.files)?;
    Ok(artifacts.files.iter().map(|(n, _)| cfg.output_dir.join(n)).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    /// Reported but never fails the verification.
    pub diagnostic: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub checks: Vec<CheckLine>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.diagnostic)
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: String) {
        self.checks.push(CheckLine {
            name: name.into(),
            passed,
            diagnostic: false,
            detail,
        });
    }

    fn diagnostic(&mut self, name: impl Into<String>, passed: bool, detail: String) {
        self.checks.push(CheckLine {
            name: name.into(),
            passed,
            diagnostic: true,
            detail,
        });
    }
}

fn metadata<'a>(comments: &'a [String], key: &str) -> Option<&'a str> {
    comments.iter().find_map(|c| c.strip_prefix(key)?.strip_prefix('=')).map(str::trim)
}

fn corrupt(path: &Path, what: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {what}", path.display()))
}

/// Decompositions recorded in `imfs.csv`, one per channel.
fn read_imfs(path: &Path) -> Result<Vec<Decomposition>, CliError> {
    let table = read_table(path)?;
    let variant: Variant = metadata(&table.comments, "variant")
        .ok_or_else(|| corrupt(path, "missing variant metadata"))?
        .parse()
        .map_err(|e| corrupt(path, e))?;
    let channels: usize = metadata(&table.comments, "channels")
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| corrupt(path, "missing channels metadata"))?;
    let headers = table.headers.ok_or_else(|| corrupt(path, "missing header row"))?;
    let (rate, t0) = infer_rate(&table.columns[0])?;
    let mut out = Vec::with_capacity(channels);
    for j in 0..channels {
        let prefix = channel_prefix(channels, j);
        let dc: f64 = metadata(&table.comments, &format!("dc_constant[{j}]"))
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| corrupt(path, format!("missing dc_constant for channel {j}")))?;
        let cols: Vec<usize> = (1..headers.len())
            .filter(|&c| {
                headers[c]
                    .strip_prefix(prefix.as_str())
                    .is_some_and(|h| !h.contains('.'))
            })
            .collect();
        let (&last, imf_cols) = cols.split_last().ok_or_else(|| corrupt(path, "no component columns"))?;
        if headers[last] != format!("{prefix}residue") {
            return Err(corrupt(path, format!("channel {j}: residue column must come last")));
        }
        let sig = |c: usize| SampledSignal::with_start(table.columns[c].clone(), rate, t0);
        let imfs = imf_cols.iter().map(|&c| sig(c)).collect::<crate::Result<Vec<_>>>()?;
        let mut d = Decomposition::new(imfs, sig(last)?, variant)?;
        d.dc_constant = dc;
        out.push(d);
    }
    Ok(out)
}

fn read_input(path: &Path) -> Result<Vec<SampledSignal>, CliError> {
    let table = read_table(path)?;
    let (rate, t0) = infer_rate(&table.columns[0])?;
    table.columns[1..]
        .iter()
        .map(|c| Ok(SampledSignal::with_start(c.clone(), rate, t0)?))
        .collect()
}

fn max_offdiag(m: &[Vec<f64>], upto: usize) -> f64 {
    let mut worst = 0.0_f64;
    for j in 0..upto {
        for k in 0..upto {
            if j != k {
                worst = worst.max(m[j][k].abs());
            }
        }
    }
    worst
}

/// Re-checks an artifact directory using only the files in it.
pub fn verify(dir: &Path, expect_monotone_ridge: bool) -> Result<VerifyReport, CliError> {
    let inputs = read_input(&dir.join("input.csv"))?;
    let decomps = read_imfs(&dir.join("imfs.csv"))?;
    if inputs.len() != decomps.len() {
        return Err(corrupt(dir, "input and imfs channel counts differ"));
    }
    let mut rep = VerifyReport::default();
    for (j, (x, d)) in inputs.iter().zip(&decomps).enumerate() {
        let tag = if inputs.len() > 1 { format!("[ch{j}] ") } else { String::new() };
        let exact = d.variant.is_exact();
        let err = d.completeness_error(x)?;
        let detail = format!("max relative error {err:.3e} (tolerance {VERIFY_COMPLETENESS:.0e})");
        if exact {
            rep.push(format!("{tag}completeness"), err <= VERIFY_COMPLETENESS, detail);
        } else {
            rep.diagnostic(format!("{tag}completeness"), err <= VERIFY_COMPLETENESS, detail);
        }
        let r = match ortho_report(x, d) {
            Ok(r) => r,
            Err(EmdError::UndefinedRatio(m)) => {
                rep.diagnostic(format!("{tag}energy"), true, m);
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let id = pee_identity_check(&r);
        rep.push(
            format!("{tag}pee identity"),
            id <= VERIFY_IDENTITY,
            format!("|Pee - 100 IO_T| = {id:.3e} on the reconstructed sum"),
        );
        let n = d.imfs.len();
        let comps = n + 1;
        match d.variant {
            Variant::Foimf | Variant::Roimf | Variant::Fouimf | Variant::Rouimf => {
                let w = max_offdiag(&r.io_pairs, comps);
                rep.push(
                    format!("{tag}orthogonality"),
                    w <= VERIFY_ORTHOGONALITY,
                    format!("max |IO_jk| over components {w:.3e}"),
                );
                rep.push(
                    format!("{tag}energy preservation"),
                    r.pee.abs() <= 100.0 * VERIFY_ORTHOGONALITY,
                    format!("Pee {:.3e} %", r.pee),
                );
            }
            Variant::Oimf => {
                let w = max_offdiag(&r.io_pairs, n);
                rep.push(
                    format!("{tag}orthogonality"),
                    w <= VERIFY_ORTHOGONALITY,
                    format!("max |IO_jk| over IMFs {w:.3e}"),
                );
            }
            Variant::Epemd | Variant::Epmemd => {
                let chain = verify_linoep(&d.components())?;
                rep.push(format!("{tag}linoep chain"), chain, "each component orthogonal to the sum of later ones".into());
                rep.push(
                    format!("{tag}energy preservation"),
                    r.pee.abs() <= 100.0 * VERIFY_ORTHOGONALITY,
                    format!("Pee {:.3e} %", r.pee),
                );
            }
            _ => rep.diagnostic(
                format!("{tag}leakage"),
                true,
                format!("IO_T {:.3e}, Pee {:.3e} %", r.io_total, r.pee),
            ),
        }
    }
    if expect_monotone_ridge {
        let (ok, detail) = check_ridge(&dir.join("spectrum.csv"))?;
        rep.push("monotone ridge", ok, detail);
    }
    Ok(rep)
}

/// Reads `spectrum.csv` (channel 0) and tests whether the strongest
/// frequency per time column is nondecreasing over the central 80% of the
/// populated columns.
pub fn check_ridge(path: &Path) -> Result<(bool, String), CliError> {
    let table = read_table(path)?;
    if table.columns.len() != 4 {
        return Err(corrupt(path, "expected channel,freq_hz,time_s,energy"));
    }
    let mut best: std::collections::BTreeMap<u64, (f64, f64)> = Default::default();
    for i in 0..table.columns[0].len() {
        if table.columns[0][i] != 0.0 {
            continue;
        }
        let (f, t, e) = (table.columns[1][i], table.columns[2][i], table.columns[3][i]);
        let slot = best.entry(t.to_bits()).or_insert((f, e));
        if e > slot.1 {
            *slot = (f, e);
        }
    }
    let mut ridge: Vec<(f64, f64)> = best.into_iter().map(|(t, (f, _))| (f64::from_bits(t), f)).collect();
    ridge.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = ridge.len();
    let (lo, hi) = (n / 10, n - n / 10);
    let central = &ridge[lo..hi];
    let drops = central.windows(2).filter(|w| w[1].1 < w[0].1).count();
    Ok((
        drops == 0 && central.len() >= 2,
        format!("{drops} decreasing steps over {} central columns", central.len()),
    ))
}

fn generate_csv(a: &GenerateArgs) -> Result<String, CliError> {
    let mut spec = SignalSpec::preset(a.kind).with_seed(a.seed);
    if let Some(r) = a.rate {
        spec.sample_rate = r;
    }
    if let Some(d) = a.duration {
        spec.duration = d;
    }
    let default_channels = if a.kind == SignalKind::Multitone4 { 4 } else { 1 };
    let x = generate_multivariate(&spec, a.channels.unwrap_or(default_channels).max(1))?;
    let results: Vec<ChannelResult> = x
        .channels()
        .iter()
        .map(|c| ChannelResult {
            input: c.clone(),
            decomposition: Decomposition {
                imfs: Vec::new(),
                residue: c.clone(),
                variant: Variant::Emd,
                dc_constant: 0.0,
            },
            report: None,
        })
        .collect();
    Ok(input_csv(&results))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Decompose(a) => {
            let cfg = RunConfig::from_args(a)?;
            for p in run(&cfg)? {
                println!("wrote {}", p.display());
            }
            Ok(())
        }
        Command::Verify(a) => {
            let rep = verify(&a.dir, a.expect_monotone_ridge)?;
            for c in &rep.checks {
                let status = match (c.passed, c.diagnostic) {
                    (true, _) => "PASS",
                    (false, true) => "NOTE",
                    (false, false) => "FAIL",
                };
                println!("{status} {}: {}", c.name, c.detail);
            }
            if rep.passed() {
                Ok(())
            } else {
                Err(CliError::Validation("verification failed".into()))
            }
        }
        Command::Sweep(a) => {
            if !(a.step > 0.0) || a.to < a.from {
                return Err(CliError::Usage("need --step > 0 and --to >= --from".into()));
            }
            let count = ((a.to - a.from) / a.step + 1e-9).floor() as usize + 1;
            let rates: Vec<f64> = (0..count).map(|i| a.from + a.step * i as f64).collect();
            let body = sweep_csv(&rates, &SiftConfig::default())?;
            print!("{body}");
            write_files(&a.out_dir, &[("sweep.csv", body)])
        }
        Command::Generate(a) => {
            let body = generate_csv(&a)?;
            match &a.output {
                Some(p) => fs::write(p, body).map_err(|e| io_err(p, e)),
                None => {
                    print!("{body}");
                    Ok(())
                }
            }
        }
    }
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    run_args(std::env::args_os())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_comments() {
        let t = parse_table("# variant=EMD\ntime,x\n0,1\n0.5,2\n").unwrap();
        assert_eq!(t.headers.unwrap(), vec!["time", "x"]);
        assert_eq!(t.comments, vec!["variant=EMD"]);
        assert_eq!(t.columns, vec![vec![0.0, 0.5], vec![1.0, 2.0]]);
        assert_eq!(infer_rate(&t.columns[0]).unwrap(), (2.0, 0.0));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = parse_table("0,1\n1,2\n2,oops\n").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
        let e = parse_table("0,1\n1,NaN\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        assert!(parse_table("").is_err());
        assert!(parse_table("# only a comment\n").is_err());
    }

    #[test]
    fn uneven_time_is_rejected() {
        assert!(infer_rate(&[0.0, 1.0, 2.0, 3.1]).is_err());
        assert!(infer_rate(&[0.0]).is_err());
        assert!(infer_rate(&[0.0, 1.0, 2.0 + 1e-12]).is_ok());
    }

    #[test]
    fn seventeen_digits() {
        let s = fmt_f64(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        let v = precise(json!({"a": 0.1, "b": [1.5, 2], "c": "x"}));
        assert_eq!(
            serde_json::to_string(&v).unwrap(),
            r#"{"a":1.0000000000000001e-1,"b":[1.5000000000000000e+0,2],"c":"x"}"#
        );
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(EmdError::RankDeficient { index: 1 }).exit_code(), 2);
        assert_eq!(CliError::from(EmdError::NoEnvelope).exit_code(), 1);
        assert_eq!(run_args(["emdkit", "--help"]), 0);
        assert_eq!(run_args(["emdkit", "decompose"]), 1);
        assert_eq!(run_args(["emdkit", "decompose", "--gen", "am", "--algo", "bogus"]), 1);
    }
}
