//! Command-line front end: argument parsing, configuration layering, subcommands and exit codes.

pub mod config;
pub mod output;
pub mod verify;

use crate::eigenbasis::{dagger_norm_sq, eigen_at_origin, mellin_normalization, EigenFunction, Normalization, Route};
use crate::error::{Error, Result};
use crate::heat::{
    evolve_fourier_oracle, evolve_physical, greens_function, l2_relative_error, Direction, HeatSolution, Preset, SelfSimilarMap,
    DEFAULT_MODES, MAX_MODES,
};
use crate::mellin::theta_symbol;
use crate::params::Params;
use crate::radial::{RadialFunction, RadialGrid};
use crate::radial_transforms::spectral_profile;
use clap::{Args, Parser, Subcommand};
use config::{parse_list, CommonValues, ConfigFile, Format, RunConfig, COMMON_KEYS};
use num_complex::Complex64;
use output::{emit, sidecar, write_document, Table};
use rayon::prelude::*;
use serde_json::{json, Value};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "LEVY_SPECTRAL_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "levy-spectral", version, about = "Eigenfunctions, Mellin symbols and heat flow of the fractional Fokker-Planck operator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Fractional order s in (0, 1].
    #[arg(long)]
    pub s: Option<f64>,
    /// Space dimension n >= 1.
    #[arg(long)]
    pub n: Option<u32>,
    /// Smallest grid radius.
    #[arg(long)]
    pub rmin: Option<f64>,
    /// Largest grid radius.
    #[arg(long)]
    pub rmax: Option<f64>,
    /// Number of radial grid points.
    #[arg(long)]
    pub points: Option<usize>,
    /// Grid spacing.
    #[arg(long, value_parser = ["log", "linear"])]
    pub spacing: Option<String>,
    /// Tolerance of pass/fail checks.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_parser = ["csv", "json"])]
    pub format: Option<String>,
    /// Flat `key = value` file; flags take precedence over it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl CommonArgs {
    fn values(&self) -> CommonValues {
        CommonValues {
            s: self.s,
            n: self.n,
            rmin: self.rmin,
            rmax: self.rmax,
            points: self.points,
            spacing: self.spacing.clone(),
            tol: self.tol,
            out: self.out.clone(),
            format: self.format.clone(),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample an eigenfunction e_k (or e_nu) on the radial grid.
    EvalEigen {
        #[command(flatten)]
        common: CommonArgs,
        /// Integer index k.
        #[arg(long, conflicts_with = "nu")]
        k: Option<usize>,
        /// Real index nu.
        #[arg(long)]
        nu: Option<f64>,
        #[arg(long, value_parser = ["fourier", "series", "mellin", "auto"])]
        method: Option<String>,
        #[arg(long, value_parser = ["canonical", "mellin-u"])]
        normalization: Option<String>,
    },
    /// Run the verification suite and print a JSON report.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Largest mode index checked.
        #[arg(long)]
        kmax: Option<usize>,
        /// Negative control: replace e_k by e_k + eps e_{k+1} in the residual checks.
        #[arg(long)]
        perturb: Option<f64>,
    },
    /// Solve the fractional heat equation spectrally and with the Fourier multiplier.
    SolveHeat {
        #[command(flatten)]
        common: CommonArgs,
        /// `gaussian`, or a combination such as `e0+0.5*e3`.
        #[arg(long, conflicts_with = "input")]
        preset: Option<String>,
        /// CSV file with columns r,value.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Comma-separated physical times.
        #[arg(long, conflicts_with = "ttilde")]
        times: Option<String>,
        /// Comma-separated self-similar times.
        #[arg(long)]
        ttilde: Option<String>,
        /// Largest retained mode K.
        #[arg(long)]
        modes: Option<usize>,
    },
    /// Tabulate the Mellin symbol along a vertical line.
    Symbol {
        #[command(flatten)]
        common: CommonArgs,
        /// Real part of the line, default n/2.
        #[arg(long)]
        sigma: Option<f64>,
        /// Smallest imaginary part.
        #[arg(long, allow_hyphen_values = true)]
        lambda_min: Option<f64>,
        /// Largest imaginary part.
        #[arg(long, allow_hyphen_values = true)]
        lambda_max: Option<f64>,
        /// Number of equispaced points on the line.
        #[arg(long)]
        lambda_points: Option<usize>,
    },
    /// Tabulate the heat kernel G_s(t, r).
    Greens {
        #[command(flatten)]
        common: CommonArgs,
        /// Physical time t > 0.
        #[arg(long)]
        t: Option<f64>,
    },
}

/// Failure of a subcommand with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter(_) => EXIT_USAGE,
            _ => EXIT_NUMERIC,
        };
        Self { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> CliError {
    CliError { code: EXIT_USAGE, message: message.into() }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(stderr, "{e}") } else { write!(stdout, "{e}") };
            return code;
        }
    };
    configure_threads();
    match dispatch(&cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

/// Sizes the global worker pool from [`THREADS_ENV`] once per process.
pub fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn load_file(common: &CommonArgs, extra_keys: &[&str]) -> std::result::Result<ConfigFile, CliError> {
    let file = match &common.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let mut known: Vec<&str> = COMMON_KEYS.to_vec();
    known.extend_from_slice(extra_keys);
    let unknown = file.unknown_keys(&known);
    if !unknown.is_empty() {
        return Err(usage(format!("unknown config keys: {}", unknown.join(", "))));
    }
    Ok(file)
}

fn dispatch(cmd: &Command, stdout: &mut dyn Write) -> std::result::Result<i32, CliError> {
    match cmd {
        Command::EvalEigen { common, k, nu, method, normalization } => {
            let file = load_file(common, &["k", "nu", "method", "normalization"])?;
            let cfg = RunConfig::resolve(&common.values(), &file, Format::Csv)?;
            let k = file.layer(*k, "k")?;
            let nu = file.layer(*nu, "nu")?;
            let index = match (k, nu) {
                (Some(_), Some(_)) => return Err(usage("give either k or nu")),
                (Some(k), None) => k as f64,
                (None, Some(nu)) => nu,
                (None, None) => 0.0,
            };
            let method = parse_method(&file.layer(method.clone(), "method")?.unwrap_or_else(|| "auto".into()))?;
            let norm = parse_normalization(&file.layer(normalization.clone(), "normalization")?.unwrap_or_else(|| "canonical".into()))?;
            let (table, meta) = cmd_eval_eigen(&cfg, index, method, norm)?;
            emit(&table, meta, &cfg, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Verify { common, kmax, perturb } => {
            let file = load_file(common, &["kmax", "perturb"])?;
            let cfg = RunConfig::resolve(&common.values(), &file, Format::Json)?;
            let opts = verify::VerifyOptions {
                s_values: if cfg.explicit_s { vec![cfg.params.s()] } else { verify::DEFAULT_S_VALUES.to_vec() },
                n_values: if cfg.explicit_n { vec![cfg.params.n()] } else { verify::DEFAULT_N_VALUES.to_vec() },
                kmax: file.layer(*kmax, "kmax")?.unwrap_or(verify::DEFAULT_KMAX),
                perturb: file.layer(*perturb, "perturb")?,
                tol: cfg.tol,
            };
            let report = verify::run_verify(&opts)?;
            write_document(&report.to_json(&opts), cfg.out.as_deref(), stdout)?;
            if report.passed() {
                Ok(EXIT_OK)
            } else {
                let names: Vec<String> = report.failures().iter().map(|c| c.name.clone()).collect();
                Err(CliError { code: EXIT_VERIFY, message: format!("verification failed: {}", names.join("; ")) })
            }
        }
        Command::SolveHeat { common, preset, input, times, ttilde, modes } => {
            let file = load_file(common, &["preset", "input", "times", "ttilde", "modes"])?;
            let cfg = RunConfig::resolve(&common.values(), &file, Format::Csv)?;
            let input = file.layer(input.clone(), "input")?;
            let preset = file.layer(preset.clone(), "preset")?;
            let source = match (preset, input) {
                (Some(_), Some(_)) => return Err(usage("give either preset or input")),
                (_, Some(path)) => HeatSource::File(path),
                (p, None) => HeatSource::Preset(p.unwrap_or_else(|| "gaussian".into()).parse()?),
            };
            let map = SelfSimilarMap::new(cfg.params, Direction::ToSelfSimilar);
            let t_list: Vec<f64> = match (file.layer(times.clone(), "times")?, file.layer(ttilde.clone(), "ttilde")?) {
                (Some(_), Some(_)) => return Err(usage("give either times or ttilde")),
                (_, Some(tt)) => parse_list::<f64>(&tt)?.into_iter().map(|x| map.inverse().time(x)).collect(),
                (Some(t), None) => parse_list(&t)?,
                (None, None) => vec![0.5, 2.0, 10.0],
            };
            let modes = file.layer(*modes, "modes")?.unwrap_or(DEFAULT_MODES);
            let (table, meta) = cmd_solve_heat(&cfg, &source, &t_list, modes)?;
            emit(&table, meta, &cfg, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Symbol { common, sigma, lambda_min, lambda_max, lambda_points } => {
            let file = load_file(common, &["sigma", "lambda-min", "lambda-max", "lambda-points"])?;
            let cfg = RunConfig::resolve(&common.values(), &file, Format::Csv)?;
            let sigma = file.layer(*sigma, "sigma")?.unwrap_or(0.5 * cfg.params.nf());
            let lo = file.layer(*lambda_min, "lambda-min")?.unwrap_or(-10.0);
            let hi = file.layer(*lambda_max, "lambda-max")?.unwrap_or(10.0);
            let count = file.layer(*lambda_points, "lambda-points")?.unwrap_or(101);
            let (table, meta) = cmd_symbol(&cfg, sigma, lo, hi, count)?;
            emit(&table, meta, &cfg, stdout)?;
            Ok(EXIT_OK)
        }
        Command::Greens { common, t } => {
            let file = load_file(common, &["t"])?;
            let cfg = RunConfig::resolve(&common.values(), &file, Format::Csv)?;
            let t = file.layer(*t, "t")?.unwrap_or(1.0);
            let (table, meta) = cmd_greens(&cfg, t)?;
            emit(&table, meta, &cfg, stdout)?;
            Ok(EXIT_OK)
        }
    }
}

fn parse_method(s: &str) -> Result<Route> {
    match s {
        "fourier" => Ok(Route::Fourier),
        "series" => Ok(Route::Series),
        "mellin" => Ok(Route::MellinResidue),
        "auto" => Ok(Route::Auto),
        _ => Err(Error::InvalidParameter(format!("method '{s}' (expected fourier, series, mellin or auto)"))),
    }
}

fn parse_normalization(s: &str) -> Result<Normalization> {
    match s {
        "canonical" => Ok(Normalization::Canonical),
        "mellin-u" => Ok(Normalization::MellinU),
        _ => Err(Error::InvalidParameter(format!("normalization '{s}' (expected canonical or mellin-u)"))),
    }
}

fn method_name(r: Route) -> &'static str {
    match r {
        Route::Fourier => "fourier",
        Route::Series => "series",
        Route::MellinResidue => "mellin",
        Route::Auto => "auto",
    }
}

/// Table `r, value, method`; the first row is `r = 0` from the closed form.
pub fn cmd_eval_eigen(cfg: &RunConfig, nu: f64, method: Route, norm: Normalization) -> Result<(Table, Value)> {
    let p = cfg.params;
    let e = EigenFunction::new(p, nu)?.with_route(method).with_normalization(norm);
    let grid = cfg.grid.build()?;
    let sampled = e.sample(&grid)?;
    let mut table = Table::new(&["r", "value", "method"]);
    let origin = e.scale() * eigen_at_origin(&p, nu)?;
    table.push(vec![0.0.into(), origin.into(), "closed-form".into()]);
    for (&r, &v) in grid.points().iter().zip(&sampled.values) {
        table.push(vec![r.into(), v.into(), method_name(method).into()]);
    }
    let is_int = nu >= 0.0 && nu.fract() == 0.0;
    let extra = json!({
        "eigenvalue": nu,
        "normalization": norm,
        "scale": e.scale(),
        "mellin_normalization": mellin_normalization(&p),
        "value_at_origin": origin,
        "dagger_norm_sq": if is_int { json!(e.scale().powi(2) * dagger_norm_sq(&p, nu as usize)) } else { Value::Null },
        "series_threshold": e.series_threshold(),
        "warnings": sampled.warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
    });
    let options = json!({ "nu": nu, "method": method_name(method), "normalization": norm });
    Ok((table, sidecar("eval-eigen", cfg, options, extra)))
}

/// Table `lambda, re, im` of `Theta_s(sigma + i lambda)`.
pub fn cmd_symbol(cfg: &RunConfig, sigma: f64, lo: f64, hi: f64, count: usize) -> Result<(Table, Value)> {
    if !(hi > lo) || count < 2 {
        return Err(Error::InvalidParameter(format!("lambda range [{lo}, {hi}] x {count}")));
    }
    let mut table = Table::new(&["lambda", "re", "im"]);
    for i in 0..count {
        let l = lo + (hi - lo) * i as f64 / (count - 1) as f64;
        let v = theta_symbol(&cfg.params, Complex64::new(sigma, l))?;
        table.push(vec![l.into(), v.re.into(), v.im.into()]);
    }
    let options = json!({ "sigma": sigma, "lambda_min": lo, "lambda_max": hi, "lambda_points": count });
    Ok((table, sidecar("symbol", cfg, options, Value::Null)))
}

/// Table `r, value` of `G_s(t, r)`.
pub fn cmd_greens(cfg: &RunConfig, t: f64) -> Result<(Table, Value)> {
    let grid = cfg.grid.build()?;
    let g = greens_function(&cfg.params, t, &grid)?;
    let mut table = Table::new(&["r", "value"]);
    for (&r, &v) in grid.points().iter().zip(&g.values) {
        table.push(vec![r.into(), v.into()]);
    }
    let extra = json!({ "mass": g.mass(), "warnings": g.warnings.iter().map(|w| w.to_string()).collect::<Vec<_>>() });
    Ok((table, sidecar("greens", cfg, json!({ "t": t }), extra)))
}

/// Initial datum of `solve-heat`.
#[derive(Debug, Clone, PartialEq)]
pub enum HeatSource {
    Preset(Preset),
    File(PathBuf),
}

/// Reads `r,value` rows; a non-numeric first row is taken as a header.
pub fn read_profile_csv(path: &Path, n: u32) -> Result<RadialFunction> {
    let bad = |m: String| Error::InvalidParameter(format!("{}: {m}", path.display()));
    let mut rd = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path).map_err(|e| bad(e.to_string()))?;
    let (mut r, mut v) = (Vec::new(), Vec::new());
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() < 2 {
            return Err(bad(format!("row {} needs two columns", i + 1)));
        }
        match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
            (Ok(a), Ok(b)) => {
                r.push(a);
                v.push(b);
            }
            _ if i == 0 => continue,
            _ => return Err(bad(format!("row {} is not numeric", i + 1))),
        }
    }
    RadialFunction::new(RadialGrid::new(r)?, v, n)
}

/// Spectral and oracle snapshots with their pointwise and relative `L^2` differences.
pub fn cmd_solve_heat(cfg: &RunConfig, source: &HeatSource, times: &[f64], modes: usize) -> Result<(Table, Value)> {
    let p: Params = cfg.params;
    if modes == 0 || modes > MAX_MODES {
        return Err(Error::InvalidParameter(format!("modes must lie in 1..={MAX_MODES}, got {modes}")));
    }
    if let Some(t) = times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter(format!("time {t}")));
    }
    let (phi0, label) = match source {
        HeatSource::Preset(pr) => (pr.sample(&p, &cfg.grid.build()?)?, format!("{pr:?}")),
        HeatSource::File(path) => {
            let u = read_profile_csv(path, p.n())?;
            let prof = spectral_profile(&u)?;
            (u.with_transform(prof), path.display().to_string())
        }
    };
    let grid = phi0.grid.clone();
    let sol = HeatSolution::from_initial(&phi0, p, modes, &grid)?;
    let map = SelfSimilarMap::new(p, Direction::ToSelfSimilar);
    let snaps = times
        .par_iter()
        .map(|&t| {
            let a = evolve_physical(&sol, t, &grid)?;
            let b = evolve_fourier_oracle(&phi0, &p, t)?;
            let d = l2_relative_error(&a, &b)?;
            Ok((a, b, d))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = Table::new(&["t", "t_tilde", "r", "spectral", "oracle", "diff", "l2_rel_diff"]);
    let mut per_time = Vec::new();
    for (&t, (a, b, d)) in times.iter().zip(&snaps) {
        let tt = map.time(t);
        for ((&r, &x), &y) in grid.points().iter().zip(&a.values).zip(&b.values) {
            table.push(vec![t.into(), tt.into(), r.into(), x.into(), y.into(), (x - y).into(), (*d).into()]);
        }
        let amps: Vec<f64> = sol.coefficients.iter().enumerate().map(|(k, c)| c * (-(k as f64) * tt).exp()).collect();
        per_time.push(json!({
            "t": t,
            "t_tilde": tt,
            "l2_rel_diff": d,
            "mode_amplitudes": amps,
            "warnings": a.warnings.iter().chain(&b.warnings).map(|w| w.to_string()).collect::<Vec<_>>(),
        }));
    }
    let extra = json!({
        "initial": label,
        "coefficients": sol.coefficients,
        "coefficient_decay": sol.coefficient_decay,
        "snapshots": per_time,
    });
    let options = json!({ "times": times, "modes": modes });
    Ok((table, sidecar("solve-heat", cfg, options, extra)))
}
