//! The `qloss` command line.
//!
//! Exit codes: `analyze` returns 0/1/2 for robust/fragile/undetermined;
//! 64 usage error, 65 unreadable or invalid input, 70 numerical failure,
//! 74 I/O failure.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bloch::NormalFormSettings;
use crate::criteria::{MeasureKind, RoofBudget};
use crate::error::Error;
use crate::numerics::RANK_TOL;
use crate::robustness::{
    classify_qubit_loss_timed, classify_residual_timed, fig1_scatter, sweep, AnalysisSettings, Classification,
    Family, Grid, NormalFormStatus, RobustnessReport, SweepPoint,
};
use crate::states::{density, parse_state_file, StateInput};
use crate::subasis::{cached_generators, gell_mann_index, GeneratorKind};

pub const SCHEMA_VERSION: &str = "1";

pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_SOFTWARE: i32 = 70;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Parser)]
#[command(name = "qloss", version, about = "Robustness of 2xNxM states against loss of the qubit")]
struct Cli {
    /// Suppress the human-readable summary on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify the state in a state file; JSON report on stdout.
    Analyze {
        path: PathBuf,
        /// Dimensions for a file without a `dims:` header, e.g. "2 3 3".
        #[arg(long)]
        dims: Option<String>,
        /// Also write the JSON document to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Evaluate a state family over a parameter grid; CSV output.
    Sweep {
        /// example1, example3 or observation1.
        family: String,
        /// Grid axis `name=start:stop:count` or `name=v1,v2,...`; repeatable,
        /// the first axis varies slowest.
        #[arg(long = "grid", value_name = "AXIS")]
        grid: Vec<String>,
        /// Fixed parameter `name=value`; repeatable.
        #[arg(long = "set", value_name = "NAME=VALUE")]
        set: Vec<String>,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Concurrence/negativity pairs of random two-qubit states; CSV output.
    Fig1 {
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump the SU(N) generator basis as JSON.
    Generators {
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct TolArgs {
    /// Seed for the convex-roof search.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative rank cut for marginals and spectra.
    #[arg(long, default_value_t = RANK_TOL)]
    rank_tol: f64,
    /// Normal-form convergence tolerance on the marginals.
    #[arg(long, default_value_t = 1e-9)]
    nf_tol: f64,
    /// Convex-roof budget `RESTARTSxITERATIONS`, optionally `xEXTRA`
    /// ensemble members, or `none` to report only exact concurrences.
    #[arg(long, default_value = "32x500")]
    budget: String,
}

impl TolArgs {
    fn settings(&self) -> Result<AnalysisSettings, String> {
        if !(self.rank_tol > 0.0 && self.rank_tol < 1.0) {
            return Err(format!("--rank-tol must be in (0, 1), got {}", self.rank_tol));
        }
        if self.nf_tol.is_nan() || self.nf_tol <= 0.0 {
            return Err(format!("--nf-tol must be positive, got {}", self.nf_tol));
        }
        let roof = parse_budget(&self.budget, self.seed)?;
        Ok(AnalysisSettings {
            rank_tol: self.rank_tol,
            normal_form: NormalFormSettings {
                tol: self.nf_tol,
                rank_tol: self.rank_tol,
                ..Default::default()
            },
            roof,
        })
    }
}

fn parse_budget(text: &str, seed: u64) -> Result<Option<RoofBudget>, String> {
    if text == "none" {
        return Ok(None);
    }
    let parts: Vec<usize> = text
        .split('x')
        .map(|p| p.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| format!("invalid --budget '{text}', expected RESTARTSxITERATIONS[xEXTRA] or none"))?;
    let d = RoofBudget::default();
    let (restarts, iterations, extra) = match parts[..] {
        [r, i] => (r, i, d.extra_states),
        [r, i, e] => (r, i, e),
        _ => return Err(format!("invalid --budget '{text}', expected RESTARTSxITERATIONS[xEXTRA] or none")),
    };
    if restarts == 0 {
        return Err("--budget needs at least one restart".into());
    }
    Ok(Some(RoofBudget {
        seed,
        restarts,
        iterations,
        extra_states: extra,
    }))
}

/// Echo of the parsed input, complex numbers as `[re, im]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputEcho {
    pub path: String,
    pub dims: Vec<usize>,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expression: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<Complex64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<Vec<Vec<Complex64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisDocument {
    pub schema_version: String,
    pub input: InputEcho,
    pub report: RobustnessReport,
    /// Milliseconds per stage.
    pub timings: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDocument {
    pub schema_version: String,
    pub error: ErrorInfo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<usize>,
}

pub fn exit_code(c: Classification) -> i32 {
    match c {
        Classification::Robust => 0,
        Classification::Fragile => 1,
        Classification::Undetermined => 2,
    }
}

fn error_exit(e: &Error) -> (i32, &'static str) {
    match e {
        Error::ConvergenceFailure { .. } | Error::NoConvergence { .. } => (EXIT_SOFTWARE, "numeric"),
        Error::Syntax { .. } | Error::LabelOutOfRange { .. } => (EXIT_DATA, "parse"),
        _ => (EXIT_DATA, "invalid_input"),
    }
}

fn error_offset(e: &Error) -> Option<usize> {
    match e {
        Error::Syntax { offset, .. } | Error::LabelOutOfRange { offset, .. } => Some(*offset),
        _ => None,
    }
}

/// Runs the CLI on `args` (including the program name).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    if let Some(threads) = std::env::var("QLOSS_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        // 0 lets rayon pick; a pool that already exists is kept.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    dispatch(cli, stdout, stderr)
}

fn dispatch(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let quiet = cli.quiet;
    match cli.command {
        Command::Analyze { path, dims, out, tol } => {
            let settings = match tol.settings() {
                Ok(s) => s,
                Err(msg) => return usage(stderr, &msg),
            };
            cmd_analyze(&path, dims.as_deref(), out.as_deref(), &settings, quiet, stdout, stderr)
        }
        Command::Sweep {
            family,
            grid,
            set,
            out,
            tol,
        } => {
            let Some(family) = Family::parse(&family) else {
                return usage(
                    stderr,
                    &format!("unknown family '{family}' (expected example1, example3 or observation1)"),
                );
            };
            let settings = match tol.settings() {
                Ok(s) => s,
                Err(msg) => return usage(stderr, &msg),
            };
            let grid = match grid.iter().map(|g| parse_axis(g)).collect::<Result<Vec<_>, _>>() {
                Ok(axes) => Grid { axes },
                Err(msg) => return usage(stderr, &msg),
            };
            let fixed = match set.iter().map(|s| parse_set(s)).collect::<Result<Vec<_>, _>>() {
                Ok(f) => f,
                Err(msg) => return usage(stderr, &msg),
            };
            cmd_sweep(family, &grid, &fixed, &settings, out.as_deref(), quiet, stdout, stderr)
        }
        Command::Fig1 { samples, seed, out } => {
            if samples == 0 {
                return usage(stderr, "--samples must be >= 1");
            }
            cmd_fig1(samples, seed, out.as_deref(), stdout, stderr)
        }
        Command::Generators { n, out } => {
            if n < 2 {
                return usage(stderr, &format!("generators need N >= 2, got {n}"));
            }
            cmd_generators(n, out.as_deref(), stdout, stderr)
        }
    }
}

fn usage(stderr: &mut dyn Write, msg: &str) -> i32 {
    let _ = writeln!(stderr, "error: {msg}");
    EXIT_USAGE
}

fn emit(path: Option<&Path>, text: &str, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), i32> {
    let res = match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    res.map_err(|msg| {
        let _ = writeln!(stderr, "error: {msg}");
        EXIT_IO
    })
}

fn file_text(path: &Path, dims: Option<&str>) -> Result<(String, usize), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let Some(dims) = dims else {
        return Ok((text, 0));
    };
    let has_header = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .is_some_and(|l| l.starts_with("dims:"));
    if has_header {
        return Err("--dims given but the file already has a 'dims:' header".into());
    }
    let has_section = text.lines().any(|l| {
        let t = l.trim_start();
        t.starts_with("ket:") || t.starts_with("rho:")
    });
    let prefix = if has_section {
        format!("dims: {dims}\n")
    } else {
        format!("dims: {dims}\nket: ")
    };
    let len = prefix.len();
    Ok((prefix + &text, len))
}

fn unshift(e: Error, by: usize) -> Error {
    match e {
        Error::Syntax { offset, message } => Error::Syntax {
            offset: offset.saturating_sub(by),
            message,
        },
        Error::LabelOutOfRange {
            label,
            subsystem,
            dim,
            offset,
        } => Error::LabelOutOfRange {
            label,
            subsystem,
            dim,
            offset: offset.saturating_sub(by),
        },
        other => other,
    }
}

fn fail(e: &Error, stdout: &mut dyn Write, stderr: &mut dyn Write, quiet: bool) -> i32 {
    let (code, kind) = error_exit(e);
    let doc = ErrorDocument {
        schema_version: SCHEMA_VERSION.into(),
        error: ErrorInfo {
            kind: kind.into(),
            message: e.to_string(),
            offset: error_offset(e),
        },
    };
    let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&doc).expect("serializable"));
    if !quiet {
        let _ = writeln!(stderr, "error: {e}");
    }
    code
}

fn cmd_analyze(
    path: &Path,
    dims: Option<&str>,
    out: Option<&Path>,
    settings: &AnalysisSettings,
    quiet: bool,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let (text, shift) = match file_text(path, dims) {
        Ok(t) => t,
        Err(msg) if msg.starts_with("--dims") => return usage(stderr, &msg),
        Err(msg) => {
            let _ = writeln!(stderr, "error: {msg}");
            return EXIT_IO;
        }
    };
    let input = match parse_state_file(&text) {
        Ok(i) => i,
        Err(e) => return fail(&unshift(e, shift), stdout, stderr, quiet),
    };
    let echo = echo(path, &input);
    let result = match &input {
        StateInput::Ket { state, dims, .. } if dims.len() == 2 => {
            density(state).and_then(|rho| classify_residual_timed(&rho, settings))
        }
        StateInput::Ket { state, .. } => classify_qubit_loss_timed(state, settings),
        StateInput::Rho { rho, .. } => classify_residual_timed(rho, settings),
    };
    let (report, timings) = match result {
        Ok(r) => r,
        Err(e) => return fail(&e, stdout, stderr, quiet),
    };
    let doc = AnalysisDocument {
        schema_version: SCHEMA_VERSION.into(),
        input: echo,
        timings: timings.into_iter().collect(),
        report,
    };
    let json = serde_json::to_string_pretty(&doc).expect("serializable") + "\n";
    if let Err(code) = emit(None, &json, stdout, stderr) {
        return code;
    }
    if out.is_some() {
        if let Err(code) = emit(out, &json, stdout, stderr) {
            return code;
        }
    }
    if !quiet {
        let _ = write!(stderr, "{}", summary(&doc.report));
    }
    exit_code(doc.report.classification)
}

fn echo(path: &Path, input: &StateInput) -> InputEcho {
    match input {
        StateInput::Ket {
            dims,
            expression,
            state,
        } => InputEcho {
            path: path.display().to_string(),
            dims: dims.clone(),
            kind: "ket".into(),
            expression: Some(expression.clone()),
            amplitudes: Some(state.amplitudes().to_vec()),
            rho: None,
        },
        StateInput::Rho { dims, rho } => {
            let m = rho.matrix();
            InputEcho {
                path: path.display().to_string(),
                dims: dims.clone(),
                kind: "rho".into(),
                expression: None,
                amplitudes: None,
                rho: Some((0..m.rows()).map(|i| m.row(i).to_vec()).collect()),
            }
        }
    }
}

pub fn summary(r: &RobustnessReport) -> String {
    let mut s = format!(
        "classification: {}\nresidual {}x{}, reduced {}x{}\n",
        r.classification.as_str(),
        r.residual_dims.0,
        r.residual_dims.1,
        r.reduced_dims.0,
        r.reduced_dims.1
    );
    s += &match &r.normal_form {
        NormalFormStatus::Converged { iterations, .. } => format!("normal form: converged in {iterations} iterations\n"),
        NormalFormStatus::RankDeficient { side, rank, dim } => {
            format!("normal form: marginal {side} has rank {rank} < {dim}\n")
        }
        NormalFormStatus::NoConvergence { iterations, residual } => {
            format!("normal form: none after {iterations} iterations (residual {residual:.3e})\n")
        }
        NormalFormStatus::Skipped { reason } => format!("normal form: skipped, {reason}\n"),
    };
    for c in &r.criteria {
        s += &format!(
            "  {:<18} {:?}: {} vs {}\n",
            c.name, c.verdict, c.statistic, c.threshold
        );
    }
    for c in &r.informational {
        s += &format!(
            "  {:<18} {:?} (not pooled): {} vs {}\n",
            c.name, c.verdict, c.statistic, c.threshold
        );
    }
    for m in &r.measures {
        let kind = match m.kind {
            MeasureKind::Exact => "exact",
            MeasureKind::UpperBound => "upper bound",
        };
        s += &format!("  {:<18} {} ({kind})\n", m.name, m.value);
    }
    s
}

fn parse_axis(text: &str) -> Result<(String, Vec<f64>), String> {
    let (name, spec) = text
        .split_once('=')
        .ok_or_else(|| format!("invalid --grid '{text}', expected name=start:stop:count or name=v1,v2,..."))?;
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("invalid number '{s}' in --grid '{text}'"))
    };
    let values = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, count] = parts[..] else {
            return Err(format!("invalid --grid '{text}', expected name=start:stop:count"));
        };
        let count: usize = count
            .trim()
            .parse()
            .map_err(|_| format!("invalid count '{count}' in --grid '{text}'"))?;
        Grid::linspace(num(start)?, num(stop)?, count)
    } else if spec.trim().is_empty() {
        Vec::new()
    } else {
        spec.split(',').map(num).collect::<Result<_, _>>()?
    };
    Ok((name.trim().to_string(), values))
}

fn parse_set(text: &str) -> Result<(String, f64), String> {
    let (name, v) = text
        .split_once('=')
        .ok_or_else(|| format!("invalid --set '{text}', expected name=value"))?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|_| format!("invalid value in --set '{text}'"))?;
    Ok((name.trim().to_string(), v))
}

pub const SWEEP_STATISTICS: [&str; 9] = [
    "negativity",
    "ppt_verdict",
    "ky_fan_sq",
    "ky_fan_threshold",
    "length_bound",
    "concurrence",
    "concurrence_kind",
    "normal_form",
    "in_region",
];

/// CSV text for a sweep: parameter columns, statistics, classification and
/// a per-point error message.
pub fn sweep_csv(param_names: &[String], points: &[SweepPoint]) -> String {
    let mut out = String::new();
    let mut header: Vec<&str> = param_names.iter().map(String::as_str).collect();
    header.extend(SWEEP_STATISTICS);
    header.extend(["classification", "error"]);
    out += &header.join(",");
    out.push('\n');
    for p in points {
        let mut row: Vec<String> = param_names
            .iter()
            .map(|n| {
                p.params
                    .iter()
                    .find(|(k, _)| k == n)
                    .map(|(_, v)| v.to_string())
                    .unwrap_or_default()
            })
            .collect();
        let region = p.in_region.map(|b| b.to_string()).unwrap_or_default();
        match &p.outcome {
            Ok(r) => {
                let stat = |name: &str| r.criterion(name).map(|c| c.statistic.to_string()).unwrap_or_default();
                let ppt = r
                    .criterion("ppt")
                    .map(|c| serde_json::to_value(c.verdict).expect("serializable"))
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default();
                let conc = r.measures.iter().find(|m| m.name == "concurrence");
                row.extend([
                    r.measure("negativity").map(|v| v.to_string()).unwrap_or_default(),
                    ppt,
                    stat("ky_fan"),
                    r.criterion("ky_fan").map(|c| c.threshold.to_string()).unwrap_or_default(),
                    stat("length_bound"),
                    conc.map(|m| m.value.to_string()).unwrap_or_default(),
                    conc
                        .map(|m| match m.kind {
                            MeasureKind::Exact => "exact".to_string(),
                            MeasureKind::UpperBound => "upper_bound".to_string(),
                        })
                        .unwrap_or_default(),
                    match r.normal_form {
                        NormalFormStatus::Converged { .. } => "converged",
                        NormalFormStatus::RankDeficient { .. } => "rank_deficient",
                        NormalFormStatus::NoConvergence { .. } => "no_convergence",
                        NormalFormStatus::Skipped { .. } => "skipped",
                    }
                    .to_string(),
                    region,
                    r.classification.as_str().to_string(),
                    String::new(),
                ]);
            }
            Err(msg) => {
                row.extend(std::iter::repeat_n(String::new(), SWEEP_STATISTICS.len() - 1));
                row.push(region);
                row.push(String::new());
                row.push(csv_field(msg));
            }
        }
        out += &row.join(",");
        out.push('\n');
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    family: Family,
    grid: &Grid,
    fixed: &[(String, f64)],
    settings: &AnalysisSettings,
    out: Option<&Path>,
    quiet: bool,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let mut names: Vec<String> = grid.axes.iter().map(|(n, _)| n.clone()).collect();
    for (n, _) in fixed {
        if !names.contains(n) {
            names.push(n.clone());
        }
    }
    let points = match sweep(family, grid, fixed, settings) {
        Ok(p) => p,
        Err(e) => return usage(stderr, &e.to_string()),
    };
    if let Err(code) = emit(out, &sweep_csv(&names, &points), stdout, stderr) {
        return code;
    }
    if !quiet {
        let mut counts = BTreeMap::new();
        for p in &points {
            let key = match &p.outcome {
                Ok(r) => r.classification.as_str(),
                Err(_) => "error",
            };
            *counts.entry(key).or_insert(0usize) += 1;
        }
        let _ = writeln!(stderr, "{}: {} points {:?}", family.name(), points.len(), counts);
    }
    0
}

/// Two-column CSV of `fig1_scatter`, shortest round-trip decimals.
pub fn fig1_csv(samples: usize, seed: u64) -> crate::error::Result<String> {
    let mut out = String::from("concurrence,negativity\n");
    for p in fig1_scatter(samples, seed)? {
        out += &format!("{},{}\n", p.concurrence, p.negativity);
    }
    Ok(out)
}

fn cmd_fig1(samples: usize, seed: u64, out: Option<&Path>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match fig1_csv(samples, seed) {
        Ok(csv) => match emit(out, &csv, stdout, stderr) {
            Ok(()) => 0,
            Err(code) => code,
        },
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            error_exit(&e).0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorDump {
    pub n: usize,
    pub normalization: String,
    pub generators: Vec<GeneratorEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorEntry {
    pub index: usize,
    pub kind: String,
    pub levels: Vec<usize>,
    /// Conventional 1-based Gell-Mann label of the same matrix.
    pub gell_mann_label: usize,
    pub matrix: Vec<Vec<Complex64>>,
}

pub fn generator_dump(n: usize) -> crate::error::Result<GeneratorDump> {
    let basis = cached_generators(n)?;
    let mut labels = vec![0; basis.len()];
    for label in 1..=basis.len() {
        labels[gell_mann_index(n, label)?] = label;
    }
    let generators = basis
        .matrices
        .iter()
        .zip(&basis.kinds)
        .enumerate()
        .map(|(index, (m, kind))| {
            let (kind, levels) = match *kind {
                GeneratorKind::Symmetric { j, k } => ("symmetric", vec![j, k]),
                GeneratorKind::Antisymmetric { j, k } => ("antisymmetric", vec![j, k]),
                GeneratorKind::Diagonal { l } => ("diagonal", vec![l]),
            };
            GeneratorEntry {
                index,
                kind: kind.into(),
                levels,
                gell_mann_label: labels[index],
                matrix: (0..n).map(|i| m.row(i).to_vec()).collect(),
            }
        })
        .collect();
    Ok(GeneratorDump {
        n,
        normalization: "Tr(l_a l_b) = 2 delta_ab".into(),
        generators,
    })
}

fn cmd_generators(n: usize, out: Option<&Path>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match generator_dump(n) {
        Ok(d) => {
            let json = serde_json::to_string_pretty(&d).expect("serializable") + "\n";
            match emit(out, &json, stdout, stderr) {
                Ok(()) => 0,
                Err(code) => code,
            }
        }
        Err(e) => usage(stderr, &e.to_string()),
    }
}
