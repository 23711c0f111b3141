//! Command-line front end for the `pfp-core` pipeline.
//!
//! Subcommands read wide CSV samples (one curve per row), smooth them onto a
//! Fourier or B-spline basis and write fixed-point CSV tables plus a short
//! markdown summary. Exit codes: 0 success, 2 usage, 3 data, 4 numerical.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use pfp_core::bootstrap::{bootstrap_bands, BootstrapConfig};
use pfp_core::far::{fit_far, select_far};
use pfp_core::ffr::{ffpe_joint, fit_ffr, select_dims, JointGrid};
use pfp_core::fpca::fpca;
use pfp_core::funkdata::{smooth, split_basis, BasisSystem, DiscreteSample, FunctionalSeries, Grid};
use pfp_core::io::{default_header, format_fixed, load_sample, write_wide};
use pfp_core::pfp::{pfp_fit, pfp_fit_noisy, PfpConfig};
use pfp_core::simlab::{self, SimConfig};
use pfp_core::{FarSpec, PfpError};

pub mod svg;

#[derive(Debug, Parser)]
#[command(name = "pfp", version, about = "Partial functional prediction for functional time series")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Functional principal components of a sample.
    Fpca(FpcaArgs),
    /// FAR(p) forecasts of the next curves.
    FarPredict(FarArgs),
    /// Regression of the (τ, 1] block of each curve on its [0, τ] block.
    Ffr(FfrArgs),
    /// Partial functional prediction.
    #[command(subcommand)]
    Pfp(PfpCommand),
    /// Simulation protocols.
    #[command(subcommand)]
    Simlab(SimlabCommand),
}

#[derive(Debug, Subcommand)]
pub enum PfpCommand {
    /// Predict the unobserved (τ, 1] block of the next curve.
    Predict(PredictArgs),
}

#[derive(Debug, Subcommand)]
pub enum SimlabCommand {
    /// Run the protocol described by a key=value config file.
    Run(SimlabArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BasisArg {
    Fourier,
    Bspline,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Wide CSV sample: a header row, then one curve per row.
    #[arg(long = "in", value_name = "CSV")]
    pub input: PathBuf,
    /// Grid points (commas or whitespace); otherwise a numeric header or
    /// the uniform grid on [0, 1].
    #[arg(long, value_name = "FILE")]
    pub grid: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "fourier")]
    pub basis: BasisArg,
    /// Basis dimension.
    #[arg(long, default_value_t = 15)]
    pub dim: usize,
    /// Square-root transform the values before smoothing.
    #[arg(long)]
    pub sqrt: bool,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output directory; tables go to stdout when omitted.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FpcaArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Number of components to report (default: all).
    #[arg(long)]
    pub components: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FarArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    /// Choose (p, d) by fFPE over orders 0..=p and dimensions 1..=d.
    #[arg(long)]
    pub select: bool,
    /// Forecast horizon; one output row per step.
    #[arg(long, default_value_t = 1)]
    pub h: usize,
    /// Fit on the last `window` curves only.
    #[arg(long)]
    pub window: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct FfrArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub tau: f64,
    #[arg(long, default_value_t = 3)]
    pub dx: usize,
    #[arg(long, default_value_t = 3)]
    pub dy: usize,
    /// Choose (dx, dy) by fFPE within the given bounds.
    #[arg(long)]
    pub select: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub tau: f64,
    /// Values of the next curve at the [0, τ] grid points (one CSV row,
    /// header optional). Without it the last curve of the sample is held
    /// out and its [0, τ] block is used.
    #[arg(long, value_name = "CSV")]
    pub partial: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    #[arg(long, default_value_t = 3)]
    pub d: usize,
    #[arg(long, default_value_t = 3)]
    pub dx: usize,
    #[arg(long, default_value_t = 3)]
    pub dy: usize,
    /// Sliding window n₁ (default: half of the history).
    #[arg(long)]
    pub window: Option<usize>,
    /// Number of residual curves the regression is trained on (default: all).
    #[arg(long)]
    pub n_train: Option<usize>,
    /// Jointly choose (p, d, dx, dy) with the flag values as upper bounds.
    #[arg(long)]
    pub select: bool,
    /// Add AR forecasts of the pre-smoothing residuals.
    #[arg(long)]
    pub noisy: bool,
    /// Number of grid points after τ that receive the AR correction.
    #[arg(long, default_value_t = 5)]
    pub h: usize,
    #[arg(long, default_value_t = 10)]
    pub q_max: usize,
    /// Residual bootstrap prediction bands.
    #[arg(long)]
    pub bands: bool,
    #[arg(long = "replicates", short = 'B', default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.8)]
    pub var_threshold: f64,
    /// Leave the resampled regression residual out of the bootstrap draws.
    #[arg(long)]
    pub no_band_noise: bool,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Also write an SVG plot of the prediction.
    #[arg(long)]
    pub svg: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimlabArgs {
    /// Flat key=value file; `#` starts a comment.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Extra `key=value` settings applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Also write an SVG of sample trajectories from the first replication.
    #[arg(long)]
    pub svg: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => 2,
            Self::Data(_) => 3,
            Self::Numerical(_) => 4,
        }
    }
}

impl From<PfpError> for CliError {
    fn from(e: PfpError) -> Self {
        let msg = e.to_string();
        match e {
            PfpError::InvalidArgument(_) => Self::Usage(msg),
            PfpError::Numerical(_) | PfpError::State(_) => Self::Numerical(msg),
            PfpError::Shape(_) | PfpError::Domain(_) | PfpError::Parse(_) | PfpError::Io(_) | PfpError::Csv(_) => {
                Self::Data(msg)
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Data(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// A named output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    fn new(name: &str, contents: String) -> Self {
        Self { name: name.to_string(), contents }
    }
}

/// Writes the artifacts into `dir`, or the CSV and markdown ones to stdout.
pub fn emit(artifacts: &[Artifact], dir: Option<&Path>) -> CliResult<()> {
    match dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            for a in artifacts {
                std::fs::write(dir.join(&a.name), &a.contents)?;
            }
        }
        None => {
            for a in artifacts.iter().filter(|a| !a.name.ends_with(".svg")) {
                println!("== {} ==\n{}", a.name, a.contents);
            }
        }
    }
    Ok(())
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fpca(a) => emit(&cmd_fpca(&a)?, a.output.out.as_deref()),
        Command::FarPredict(a) => emit(&cmd_far(&a)?, a.output.out.as_deref()),
        Command::Ffr(a) => emit(&cmd_ffr(&a)?, a.output.out.as_deref()),
        Command::Pfp(PfpCommand::Predict(a)) => emit(&cmd_predict(&a)?, a.output.out.as_deref()),
        Command::Simlab(SimlabCommand::Run(a)) => {
            let cfg = simlab_config(&a, std::env::vars())?;
            emit(&cmd_simlab(&cfg, a.svg)?, a.output.out.as_deref())
        }
    }
}

fn load(input: &InputArgs) -> CliResult<(DiscreteSample<f64>, Arc<BasisSystem<f64>>)> {
    let mut raw = load_sample::<f64>(&input.input, input.grid.as_deref())?;
    if input.sqrt {
        raw = pfp_core::funkdata::sqrt_transform(&raw)?;
    }
    let grid = raw.grid().clone();
    if input.dim > grid.len() {
        return Err(CliError::Usage(format!("basis dimension {} exceeds the {} grid points", input.dim, grid.len())));
    }
    let basis = match input.basis {
        BasisArg::Fourier => BasisSystem::fourier(grid, input.dim)?,
        BasisArg::Bspline => BasisSystem::bspline(grid, input.dim)?,
    };
    Ok((raw, Arc::new(basis)))
}

fn load_series(input: &InputArgs) -> CliResult<(DiscreteSample<f64>, FunctionalSeries<f64>)> {
    let (raw, basis) = load(input)?;
    let (series, _) = smooth(&raw, &basis)?;
    Ok((raw, series))
}

fn csv_rows(header: &[String], rows: &DMatrix<f64>) -> CliResult<String> {
    let mut buf = Vec::new();
    write_wide(&mut buf, header, rows)?;
    Ok(String::from_utf8(buf).expect("formatted numbers are ASCII"))
}

fn cmd_fpca(a: &FpcaArgs) -> CliResult<Vec<Artifact>> {
    let (raw, series) = load_series(&a.input)?;
    let es = fpca(&series)?;
    let k = a.components.unwrap_or(es.n_components());
    if k == 0 || k > es.n_components() {
        return Err(CliError::Usage(format!("components must lie in 1..={}", es.n_components())));
    }
    let explained = es.explained_variance();
    let mut eig = String::from("component,eigenvalue,explained\n");
    for j in 0..k {
        let _ = writeln!(eig, "{},{},{}", j + 1, format_fixed(es.eigenvalues()[j]), format_fixed(explained[j]));
    }
    let eval = series.basis().eval();
    let funcs = (eval * es.eigenfunction_coeffs().columns(0, k)).transpose();
    let score_header: Vec<String> = (1..=k).map(|j| format!("score_{j}")).collect();
    let scores = es.scores().columns(0, k).into_owned();
    let mut md = String::from("# Functional principal components\n\n");
    let _ = writeln!(md, "{} curves, {} grid points, {} components.\n", raw.n_curves(), raw.grid().len(), k);
    let _ = writeln!(md, "| component | eigenvalue | explained |\n|---|---|---|");
    for j in 0..k {
        let _ = writeln!(md, "| {} | {} | {} |", j + 1, format_fixed(es.eigenvalues()[j]), format_fixed(explained[j]));
    }
    Ok(vec![
        Artifact::new("eigenvalues.csv", eig),
        Artifact::new("eigenfunctions.csv", csv_rows(&default_header(raw.grid().len()), &funcs)?),
        Artifact::new("scores.csv", csv_rows(&score_header, &scores)?),
        Artifact::new("summary.md", md),
    ])
}

fn cmd_far(a: &FarArgs) -> CliResult<Vec<Artifact>> {
    let (raw, series) = load_series(&a.input)?;
    let n = series.len();
    let series = match a.window {
        Some(w) if w > n => return Err(CliError::Usage(format!("window {w} exceeds the {n} curves"))),
        Some(w) => series.window(n - w..n)?,
        None => series,
    };
    let spec = if a.select {
        select_far(&series, 0..a.p + 1, 1..a.d + 1)?.0
    } else {
        FarSpec::new(a.p, a.d)
    };
    let model = fit_far(&series, spec.p, spec.d)?;
    let j = raw.grid().len();
    let mut preds = DMatrix::zeros(a.h, j);
    for h in 1..=a.h {
        let c = model.predict_curve(&series, h)?;
        preds.set_row(h - 1, &c.values().transpose());
    }
    let mut md = String::from("# FAR forecast\n\n");
    let _ = writeln!(md, "| p | d | fFPE | curves |\n|---|---|---|---|");
    let _ = writeln!(md, "| {} | {} | {} | {} |", spec.p, spec.d, format_fixed(model.ffpe()), series.len());
    Ok(vec![Artifact::new("forecast.csv", csv_rows(&default_header(j), &preds)?), Artifact::new("summary.md", md)])
}

fn cmd_ffr(a: &FfrArgs) -> CliResult<Vec<Artifact>> {
    let (_, series) = load_series(&a.input)?;
    let (left, right) = split_basis(series.basis(), a.tau)?;
    let x = series.with_basis(&left)?;
    let y = series.with_basis(&right)?;
    let (dx, dy) = if a.select {
        let (dx, dy, _) = select_dims(&x, &y, a.dx, a.dy)?;
        (dx, dy)
    } else {
        (a.dx, a.dy)
    };
    let model = fit_ffr(&x, &y, dx, dy)?;
    let kernel = model.kernel_surface();
    let t_header: Vec<String> = kernel.t.points().iter().map(|t| format_fixed(*t)).collect();
    let mut header = vec!["s".to_string()];
    header.extend(t_header.clone());
    let mut rows = DMatrix::zeros(kernel.s.len(), kernel.t.len() + 1);
    for (i, s) in kernel.s.points().iter().enumerate() {
        rows[(i, 0)] = *s;
        for j in 0..kernel.t.len() {
            rows[(i, j + 1)] = kernel.values[(i, j)];
        }
    }
    let mut fitted = DMatrix::zeros(series.len(), right.grid().len());
    for k in 0..series.len() {
        fitted.set_row(k, &model.predict(&x.curve(k))?.values().transpose());
    }
    let mut md = String::from("# Functional regression\n\n");
    let _ = writeln!(md, "| tau | dx | dy | fFPE | curves |\n|---|---|---|---|---|");
    let _ = writeln!(md, "| {} | {} | {} | {} | {} |", format_fixed(a.tau), dx, dy, format_fixed(model.ffpe()), series.len());
    Ok(vec![
        Artifact::new("kernel.csv", csv_rows(&header, &rows)?),
        Artifact::new("fitted.csv", csv_rows(&t_header, &fitted)?),
        Artifact::new("summary.md", md),
    ])
}

fn read_partial(path: &Path, n_left: usize, j: usize) -> CliResult<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .filter_map(|l| l.split(',').map(|c| c.trim().parse::<f64>().ok()).collect::<Option<Vec<f64>>>())
        .collect();
    let row = rows.last().ok_or_else(|| CliError::Data("the partial curve file holds no numeric row".into()))?;
    if row.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Data("the partial curve has non-finite values".into()));
    }
    match row.len() {
        m if m == n_left => Ok(row.clone()),
        m if m == j => Ok(row[..n_left].to_vec()),
        m => Err(CliError::Data(format!("partial curve has {m} values; expected {n_left} (or {j})"))),
    }
}

fn cmd_predict(a: &PredictArgs) -> CliResult<Vec<Artifact>> {
    if !(a.tau > 0.0 && a.tau < 1.0) {
        return Err(CliError::Usage("--tau must lie in (0, 1)".into()));
    }
    let (raw, basis) = load(&a.input)?;
    let j = raw.grid().len();
    let left_idx: Vec<usize> = (0..j).filter(|&i| raw.grid().points()[i] <= a.tau).collect();
    let right_idx: Vec<usize> = (0..j).filter(|&i| raw.grid().points()[i] > a.tau).collect();
    if left_idx.is_empty() || right_idx.is_empty() {
        return Err(CliError::Usage(format!("τ = {} leaves an empty block on the grid", a.tau)));
    }
    let (history, partial_raw, truth) = match &a.partial {
        Some(path) => (raw.clone(), read_partial(path, left_idx.len(), j)?, None),
        None => {
            let n = raw.n_curves();
            if n < 3 {
                return Err(CliError::Data("holding out the last curve needs at least 3 curves".into()));
            }
            let last = raw.row(n - 1);
            let partial: Vec<f64> = left_idx.iter().map(|&i| last[i]).collect();
            let truth: Vec<f64> = right_idx.iter().map(|&i| last[i]).collect();
            (raw.select_rows(0..n - 1)?, partial, Some(truth))
        }
    };
    let n = history.n_curves();
    let window = a.window.unwrap_or(n / 2);
    if window == 0 || window >= n {
        return Err(CliError::Usage(format!("window must lie in 1..{n}")));
    }
    let (series, presmooth) = smooth(&history, &basis)?;

    let (spec, dx, dy) = if a.select {
        let grid = JointGrid { orders: 1..a.p.max(1) + 1, dims: 1..a.d + 1, dx: 1..a.dx + 1, dy: 1..a.dy + 1 };
        let sel = ffpe_joint(&series, a.tau, &grid, window, window..n, a.n_train.unwrap_or(n - window))?;
        (sel.best.spec, sel.best.dx, sel.best.dy)
    } else {
        (FarSpec::new(a.p, a.d), a.dx, a.dy)
    };
    let cfg = PfpConfig { tau: a.tau, spec, dx, dy, window, n_train: a.n_train };
    let model = if a.noisy { pfp_fit_noisy(&history, &basis, cfg, a.q_max)? } else { pfp_fit(&series, cfg)? };
    let forecast = model.far().predict_curve(&series, 1)?;
    let prediction = if a.noisy {
        model.update_noisy(&forecast, &partial_raw, &presmooth.flatten(), a.h)?
    } else {
        model.update(&forecast, &model.partial_from_values(&partial_raw)?)?
    };
    let bands = if a.bands {
        let mut bc = BootstrapConfig::new(a.replicates, a.alpha, a.seed);
        bc.var_threshold = a.var_threshold;
        bc.include_noise = !a.no_band_noise;
        Some(bootstrap_bands(&model, &forecast, &model.partial_from_values(&partial_raw)?, &bc)?)
    } else {
        None
    };

    let points = prediction.points().to_vec();
    let far_v = prediction.far_part.values();
    let res_v = prediction.residual_part.values();
    let mut combined: Vec<f64> = prediction.combined_values().iter().copied().collect();
    if let Some(err) = &prediction.error_part {
        for (c, e) in combined.iter_mut().zip(err) {
            *c += e;
        }
    }
    let mut header = vec!["t", "far", "residual", "error", "prediction"];
    if bands.is_some() {
        header.extend(["lower", "upper"]);
    }
    if truth.is_some() {
        header.push("observed");
    }
    let mut csv = header.join(",") + "\n";
    for i in 0..points.len() {
        let err = prediction.error_part.as_ref().and_then(|e| e.get(i)).copied().unwrap_or(0.0);
        let mut cells = vec![points[i], far_v[i], res_v[i], err, combined[i]];
        if let Some(b) = &bands {
            let shift = combined[i] - b.center()[i];
            cells.extend([b.lower()[i] + shift, b.upper()[i] + shift]);
        }
        if let Some(t) = &truth {
            cells.push(t[i]);
        }
        let cells: Vec<String> = cells.into_iter().map(format_fixed).collect();
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }

    let mut md = String::from("# Partial functional prediction\n\n");
    let _ = writeln!(md, "| tau | p | d | dx | dy | window | fFPE |\n|---|---|---|---|---|---|---|");
    let _ = writeln!(
        md,
        "| {} | {} | {} | {} | {} | {} | {} |",
        format_fixed(a.tau),
        spec.p,
        spec.d,
        dx,
        dy,
        window,
        format_fixed(model.ffpe())
    );
    if let Some(t) = &truth {
        let grid = Grid::from_points(points.clone())?;
        let sq: Vec<f64> = t.iter().zip(&combined).map(|(y, p)| (y - p) * (y - p)).collect();
        let far_sq: Vec<f64> = t.iter().zip(far_v.iter()).map(|(y, p)| (y - p) * (y - p)).collect();
        let _ = writeln!(
            md,
            "\nHeld-out curve: PMSE {} (FAR only {}).",
            format_fixed(grid.integrate(&sq)?),
            format_fixed(grid.integrate(&far_sq)?)
        );
    }
    if let Some(b) = &bands {
        let _ = writeln!(
            md,
            "\nBootstrap bands: level {}, {} replicates, {} components, mean width {}.",
            format_fixed(1.0 - a.alpha),
            b.replicates(),
            b.d_e(),
            format_fixed(b.mean_width())
        );
    }
    let mut out = vec![Artifact::new("prediction.csv", csv), Artifact::new("summary.md", md)];
    if a.svg {
        let mut plot = svg::Plot::new("Partial functional prediction", "t", "value");
        let left_t: Vec<f64> = left_idx.iter().map(|&i| raw.grid().points()[i]).collect();
        plot.line("observed [0, τ]", &left_t, &partial_raw, "#444444", false);
        if let Some(t) = &truth {
            plot.line("observed", &points, t, "#444444", true);
        }
        plot.line("PFP", &points, &combined, "#c0392b", false);
        plot.line("FAR", &points, far_v.as_slice(), "#2980b9", true);
        if let Some(b) = &bands {
            let lo: Vec<f64> = (0..points.len()).map(|i| b.lower()[i] + combined[i] - b.center()[i]).collect();
            let hi: Vec<f64> = (0..points.len()).map(|i| b.upper()[i] + combined[i] - b.center()[i]).collect();
            plot.band(&points, &lo, &hi, "#c0392b");
        }
        out.push(Artifact::new("prediction.svg", plot.render()));
    }
    Ok(out)
}

/// Builds the simulation config: defaults, then the file, then `PFP_*`
/// variables from `env`, then `--set` pairs and `--seed`.
pub fn simlab_config<I: IntoIterator<Item = (String, String)>>(a: &SimlabArgs, env: I) -> CliResult<SimConfig> {
    let mut cfg = SimConfig::default();
    if let Some(path) = &a.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        cfg.apply_str(&text)?;
    }
    cfg.apply_env(env)?;
    for kv in &a.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| CliError::Usage(format!("--set expects key=value, got '{kv}'")))?;
        cfg.set(k, v).map_err(|e| CliError::Usage(e.to_string()))?;
    }
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

/// Runs the configured protocol and renders `report.csv` and `report.md`.
pub fn cmd_simlab(cfg: &SimConfig, with_svg: bool) -> CliResult<Vec<Artifact>> {
    let report = simlab::run_protocol::<f64>(cfg)?;
    let mut md = report.to_markdown();
    if !report.failures.is_empty() {
        let _ = writeln!(md, "\nFailed replications:\n");
        for f in &report.failures {
            let _ = writeln!(md, "- {f}");
        }
    }
    let mut out = vec![Artifact::new("report.csv", report.to_csv()), Artifact::new("report.md", md)];
    if with_svg {
        if let Some(setting) = cfg.settings.first() {
            let series = simlab::simulate_replication::<f64>(cfg, setting, 0)?;
            let values = series.evaluate();
            let t = series.basis().grid().points().to_vec();
            let mut plot = svg::Plot::new("Simulated curves, replication 0", "t", "value");
            let colors = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e"];
            for (k, color) in colors.iter().enumerate().take(values.nrows()) {
                let y: Vec<f64> = values.row(k).iter().copied().collect();
                plot.line(&format!("curve {}", k + 1), &t, &y, color, false);
            }
            out.push(Artifact::new("trajectories.svg", plot.render()));
        }
    }
    Ok(out)
}
