//! Command-line front end. Every subcommand writes a plot-ready table (CSV) or
//! a JSON document, to `--out` or standard output.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::coupling::{fit_sqrt_law, load_series};
use crate::error::{Error, Result};
use crate::kernel_io::{load_kernel, KernelFormat};
use crate::loss::{apply_loss, invert_loss, load_measured};
use crate::output::{ensure_finite, sci, to_json};
use crate::schmidt::{convergence_study, decompose_svd, SchmidtSpectrum};
use crate::sdf::GaussianParams;
use crate::stats::{
    bank_from_spectrum, convolve_gf, distance_sweep, joint_pnd, sweep_to_csv, SpectrumMethod,
    SweepSpec, SweepVariable, Truncation,
};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "pdc",
    version,
    about = "Schmidt decomposition and photon statistics of multi-mode PDC"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Schmidt spectrum and Schmidt number of an SDF.
    Decompose(DecomposeArgs),
    /// Photon-number distribution of one beam.
    Pnd(PndArgs),
    /// Distances to thermal and Poisson statistics along a θ or σx² sweep.
    Sweep(SweepArgs),
    /// Coupling constants from mean photon numbers and the √P law.
    Fit(FitArgs),
    /// Undo binomial detection loss by non-negative least squares.
    LossInvert(LossInvertArgs),
    /// Schmidt number against grid size for a Gaussian SDF.
    Convergence(ConvergenceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Svd,
    Mehler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Gaussian SDF given by σx², σy² and θ (radians; `pi/4` style accepted).
    #[arg(long, num_args = 3, value_names = ["SX2", "SY2", "THETA"], allow_hyphen_values = true)]
    pub gaussian: Option<Vec<String>>,
    /// Tabulated kernel file (.csv or .json).
    #[arg(long, conflicts_with = "gaussian")]
    pub kernel: Option<PathBuf>,
    /// Use the kernel file as stored instead of normalizing it first.
    #[arg(long, requires = "kernel")]
    pub raw_kernel: bool,
    /// Override θ of `--gaussian`.
    #[arg(long, requires = "gaussian", allow_hyphen_values = true)]
    pub theta: Option<String>,
    /// Grid points per axis for sampling a Gaussian.
    #[arg(long, default_value_t = 1500)]
    pub grid: usize,
    /// Dense SVD of the sampled kernel, or the closed form for Gaussians.
    #[arg(long, value_enum, default_value_t = Method::Svd)]
    pub method: Method,
    /// Keep Schmidt modes until their weights sum to 1 - eps.
    #[arg(long, default_value_t = 1e-9)]
    pub eps_lambda: f64,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the result to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; tables default to csv, documents to json.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PndArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Coupling constant C.
    #[arg(long, conflicts_with = "mean")]
    pub coupling: Option<f64>,
    /// Target mean photon number; the coupling is solved for.
    #[arg(long)]
    pub mean: Option<f64>,
    /// Emit the joint signal+idler distribution.
    #[arg(long, conflicts_with = "loss")]
    pub joint: bool,
    /// Apply binomial loss with this detection efficiency.
    #[arg(long)]
    pub loss: Option<f64>,
    /// Fixed truncation point instead of the adaptive tail rule.
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Bound on the probability mass beyond the truncation point.
    #[arg(long, default_value_t = 1e-10)]
    pub tail: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// θ sweep: START STOP COUNT.
    #[arg(long, num_args = 3, value_names = ["START", "STOP", "COUNT"], conflicts_with = "sigma_x2_range")]
    pub theta_range: Option<Vec<String>>,
    /// σx² sweep: START STOP COUNT.
    #[arg(long, num_args = 3, value_names = ["START", "STOP", "COUNT"])]
    pub sigma_x2_range: Option<Vec<String>>,
    /// Logarithmic spacing of the sweep values.
    #[arg(long)]
    pub log: bool,
    /// Mean photon number every point is coupled to.
    #[arg(long, default_value_t = 1.0)]
    pub mean: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tail: f64,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// CSV of `pump_power,mean_n` rows.
    #[arg(long)]
    pub series: PathBuf,
}

#[derive(Debug, Args)]
pub struct LossInvertArgs {
    #[command(flatten)]
    pub output: OutputArgs,
    /// CSV of `n,p` rows.
    #[arg(long)]
    pub measured: PathBuf,
    /// Detection efficiency η.
    #[arg(long)]
    pub eta: f64,
    /// Largest photon number of the reconstruction (default: measured range).
    #[arg(long)]
    pub nmax: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
    /// Grid sizes, strictly increasing.
    #[arg(long, value_delimiter = ',', default_values_t = [400usize, 800, 1600])]
    pub grids: Vec<usize>,
}

/// Parses a radian value; accepts plain numbers and forms like `pi/4`, `3pi/8`, `π/2`.
pub fn parse_angle(text: &str) -> Result<f64> {
    let s = text.trim().to_ascii_lowercase().replace('π', "pi");
    let bad = || Error::invalid(format!("invalid angle `{text}`"));
    if !s.contains("pi") {
        return s.parse::<f64>().map_err(|_| bad());
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim().parse::<f64>().map_err(|_| bad())?),
        None => (s.as_str(), 1.0),
    };
    let coef = num
        .strip_suffix("pi")
        .ok_or_else(bad)?
        .trim()
        .trim_end_matches('*')
        .trim();
    let coef = match coef {
        "" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(coef * PI / den)
}

fn parse_number(text: &str, what: &str) -> Result<f64> {
    text.trim()
        .parse::<f64>()
        .map_err(|_| Error::invalid(format!("invalid {what} `{text}`")))
}

fn gaussian_params(src: &SourceArgs) -> Result<Option<GaussianParams>> {
    let Some(g) = &src.gaussian else {
        return Ok(None);
    };
    let sx2 = parse_number(&g[0], "sigma_x^2")?;
    let sy2 = parse_number(&g[1], "sigma_y^2")?;
    let theta = match &src.theta {
        Some(t) => parse_angle(t)?,
        None => parse_angle(&g[2])?,
    };
    GaussianParams::from_variances(sx2, sy2, theta).map(Some)
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "--eps-lambda must lie in (0, 1), got {eps}"
        )))
    }
}

fn check_tail(tail: f64) -> Result<()> {
    if (1e-15..1.0).contains(&tail) {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "--tail must lie in [1e-15, 1), got {tail}"
        )))
    }
}

fn method_of(src: &SourceArgs) -> SpectrumMethod {
    match src.method {
        Method::Svd => SpectrumMethod::Svd { grid: src.grid },
        Method::Mehler => SpectrumMethod::Mehler,
    }
}

/// Resolves the spectrum source and returns it with provenance metadata.
fn spectrum(src: &SourceArgs) -> Result<(SchmidtSpectrum, Value)> {
    check_eps(src.eps_lambda)?;
    if let Some(p) = gaussian_params(src)? {
        let method = method_of(src);
        let s = method.decompose(&p, src.eps_lambda)?;
        let meta = json!({
            "source": "gaussian",
            "sigma_x2": p.sigma_x().powi(2),
            "sigma_y2": p.sigma_y().powi(2),
            "theta": p.theta(),
            "method": match src.method { Method::Svd => "svd", Method::Mehler => "mehler" },
            "grid": matches!(src.method, Method::Svd).then_some(src.grid),
            "eps_lambda": src.eps_lambda,
        });
        return Ok((s, meta));
    }
    if let Some(path) = &src.kernel {
        if src.method == Method::Mehler {
            return Err(Error::invalid("--method mehler needs --gaussian"));
        }
        let kernel = load_kernel(path, KernelFormat::from_path(path), !src.raw_kernel)?;
        let s = decompose_svd(&kernel, src.eps_lambda)?;
        let meta = json!({
            "source": path.display().to_string(),
            "method": "svd",
            "grid": [kernel.n1(), kernel.n2()],
            "eps_lambda": src.eps_lambda,
        });
        return Ok((s, meta));
    }
    Err(Error::invalid("one of --gaussian or --kernel is required"))
}

fn meta_comments(meta: &Value) -> String {
    let mut out = String::new();
    if let Value::Object(map) = meta {
        for (k, v) in map {
            if !v.is_null() {
                let _ = writeln!(out, "# {k}: {v}");
            }
        }
    }
    out
}

/// Drops absent (null) settings from a metadata object.
fn compact(mut meta: Value) -> Value {
    if let Value::Object(map) = &mut meta {
        map.retain(|_, v| !v.is_null());
    }
    meta
}

fn with_meta(mut doc: Value, meta: Value) -> Value {
    if let Value::Object(map) = &mut doc {
        map.insert("meta".into(), compact(meta));
    }
    doc
}

fn emit(output: &OutputArgs, text: &str) -> Result<()> {
    match &output.out {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| Error::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn cmd_decompose(args: &DecomposeArgs) -> Result<()> {
    let (s, meta) = spectrum(&args.source)?;
    let k = s.schmidt_number();
    ensure_finite(
        s.eigenvalues()
            .iter()
            .copied()
            .chain([k, s.truncation_residual()]),
        "spectrum",
    )?;
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&with_meta(serde_json::to_value(s.to_json())?, meta))?,
        Format::Csv => {
            let mut out = meta_comments(&meta);
            let _ = writeln!(
                out,
                "# K: {}\n# residual: {}",
                sci(k),
                sci(s.truncation_residual())
            );
            out.push_str("n,lambda\n");
            for (n, l) in s.eigenvalues().iter().enumerate() {
                let _ = writeln!(out, "{n},{}", sci(*l));
            }
            out
        }
    };
    emit(&args.output, &text)?;
    if args.output.out.is_some() {
        println!("K = {}", sci(k));
    } else {
        eprintln!("K = {}", sci(k));
    }
    Ok(())
}

fn cmd_pnd(args: &PndArgs) -> Result<()> {
    check_tail(args.tail)?;
    let (s, mut meta) = spectrum(&args.source)?;
    let coupling = match (args.coupling, args.mean) {
        (Some(c), _) => c,
        (None, Some(mean)) => crate::coupling::solve_coupling(&s, mean)?,
        (None, None) => return Err(Error::invalid("one of --coupling or --mean is required")),
    };
    let bank = bank_from_spectrum(&s, coupling)?;
    let trunc = match args.nmax {
        Some(n) => Truncation::Fixed(n),
        None => Truncation::Tail(args.tail),
    };
    let mut pnd = convolve_gf(&bank, trunc)?;
    if let Some(eta) = args.loss {
        pnd = apply_loss(&pnd, eta)?;
    }
    if args.joint {
        pnd = joint_pnd(&pnd);
    }
    ensure_finite(
        pnd.probs().iter().copied().chain([pnd.tail()]),
        "distribution",
    )?;
    if let Value::Object(map) = &mut meta {
        map.insert("coupling".into(), json!(coupling));
        map.insert("K".into(), json!(s.schmidt_number()));
        map.insert("tail_target".into(), json!(args.tail));
        map.insert("nmax".into(), json!(args.nmax));
        map.insert("loss".into(), json!(args.loss));
        map.insert("joint".into(), json!(args.joint));
    }
    let text = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => meta_comments(&meta) + &pnd.to_csv(),
        Format::Json => {
            let doc: Value = serde_json::from_str(&pnd.to_json()?)?;
            to_json(&with_meta(doc, meta))?
        }
    };
    emit(&args.output, &text)
}

fn sweep_values(range: &[String], angle: bool, log: bool) -> Result<Vec<f64>> {
    let parse = |t: &str| {
        if angle {
            parse_angle(t)
        } else {
            parse_number(t, "range bound")
        }
    };
    let start = parse(&range[0])?;
    let stop = parse(&range[1])?;
    let count: usize = range[2]
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("invalid point count `{}`", range[2])))?;
    if count == 0 {
        return Err(Error::invalid("sweep range is empty"));
    }
    if log && !(start > 0.0 && stop > 0.0) {
        return Err(Error::invalid("logarithmic sweeps need positive bounds"));
    }
    let values = if log {
        crate::sdf::uniform_axis(start.ln(), stop.ln(), count)
            .into_iter()
            .map(f64::exp)
            .collect()
    } else {
        crate::sdf::uniform_axis(start, stop, count)
    };
    Ok(values)
}

fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    check_eps(args.source.eps_lambda)?;
    check_tail(args.tail)?;
    let template = gaussian_params(&args.source)?
        .ok_or_else(|| Error::invalid("sweep needs --gaussian as template"))?;
    let (variable, values) = match (&args.theta_range, &args.sigma_x2_range) {
        (Some(r), _) => (SweepVariable::Theta, sweep_values(r, true, args.log)?),
        (None, Some(r)) => (SweepVariable::SigmaX2, sweep_values(r, false, args.log)?),
        (None, None) => {
            return Err(Error::invalid(
                "one of --theta-range or --sigma-x2-range is required",
            ))
        }
    };
    let spec = SweepSpec {
        template,
        variable,
        values,
        method: method_of(&args.source),
        eps_lambda: args.source.eps_lambda,
        target_mean: args.mean,
        tail: args.tail,
    };
    let rows = distance_sweep(&spec)?;
    ensure_finite(
        rows.iter().flat_map(|r| {
            [
                r.parameter,
                r.k,
                r.coupling,
                r.delta_thermal,
                r.delta_poisson,
            ]
        }),
        "sweep table",
    )?;
    let meta = json!({
        "sigma_x2": template.sigma_x().powi(2),
        "sigma_y2": template.sigma_y().powi(2),
        "theta": template.theta(),
        "method": match args.source.method { Method::Svd => "svd", Method::Mehler => "mehler" },
        "grid": matches!(args.source.method, Method::Svd).then_some(args.source.grid),
        "eps_lambda": args.source.eps_lambda,
        "mean": args.mean,
        "tail": args.tail,
    });
    let text = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => meta_comments(&meta) + &sweep_to_csv(&rows, variable),
        Format::Json => to_json(
            &json!({ "variable": variable.column_name(), "rows": rows, "meta": compact(meta) }),
        )?,
    };
    emit(&args.output, &text)
}

fn cmd_fit(args: &FitArgs) -> Result<()> {
    let series = load_series(&args.series)?;
    let (s, meta) = spectrum(&args.source)?;
    let fit = fit_sqrt_law(&series, &s)?;
    ensure_finite(
        fit.couplings
            .iter()
            .copied()
            .chain([fit.scale, fit.residual]),
        "fit",
    )?;
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&with_meta(serde_json::to_value(&fit)?, meta))?,
        Format::Csv => {
            let mut out = meta_comments(&meta);
            let _ = writeln!(
                out,
                "# scale: {}\n# residual: {}",
                sci(fit.scale),
                sci(fit.residual)
            );
            out.push_str("pump_power,mean_n,coupling\n");
            for (m, c) in series.iter().zip(&fit.couplings) {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    sci(m.pump_power()),
                    sci(m.mean_n()),
                    sci(*c)
                );
            }
            out
        }
    };
    emit(&args.output, &text)
}

fn cmd_loss_invert(args: &LossInvertArgs) -> Result<()> {
    let measured = load_measured(&args.measured)?;
    let n_max = args.nmax.unwrap_or(measured.n_max());
    let inv = invert_loss(&measured, args.eta, n_max)?;
    if let Some(w) = inv.warning {
        eprintln!("warning: {w}");
    }
    ensure_finite(
        inv.pnd.probs().iter().copied().chain([inv.residual]),
        "reconstruction",
    )?;
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => inv.to_json(args.eta)?,
        Format::Csv => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "# efficiency: {}\n# residual: {}\n# condition_number: {}",
                args.eta,
                sci(inv.residual),
                sci(inv.condition_number)
            );
            out + &inv.pnd.to_csv()
        }
    };
    emit(&args.output, &text)
}

fn cmd_convergence(args: &ConvergenceArgs) -> Result<()> {
    check_eps(args.source.eps_lambda)?;
    let p = gaussian_params(&args.source)?
        .ok_or_else(|| Error::invalid("convergence needs --gaussian"))?;
    let report = convergence_study(&p, &args.grids, args.source.eps_lambda)?;
    ensure_finite(report.rows.iter().map(|r| r.k), "convergence report")?;
    let text = match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => format!("# converged: {}\n{}", report.converged, report.to_csv()),
        Format::Json => to_json(&report)?,
    };
    emit(&args.output, &text)
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Decompose(a) => cmd_decompose(a),
        Command::Pnd(a) => cmd_pnd(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Fit(a) => cmd_fit(a),
        Command::LossInvert(a) => cmd_loss_invert(a),
        Command::Convergence(a) => cmd_convergence(a),
    }
}

/// Maps an error onto the process exit code: 2 for bad input, 3 for numerical failures.
pub fn exit_code(err: &Error) -> u8 {
    if err.is_usage() {
        EXIT_USAGE
    } else {
        EXIT_NUMERIC
    }
}
