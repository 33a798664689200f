//! The `l2boost` command line.
//!
//! Subcommands: `fit`, `select`, `table1`, `figures`, `rates`.
//!
//! Settings are resolved in three layers, later ones winning: built-in
//! defaults, a `key = value` file given with `--config`, then command-line
//! flags. File keys are the long flag names without dashes (`h-min`, `reps`,
//! `input`, ...).
//!
//! Exit codes: 0 success, 1 invalid usage or configuration, 2 unparsable
//! input or config file, 3 degenerate fit (every point flagged), 4 I/O failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{isb_curves, rate_estimate};
use crate::error::{Error, Result};
use crate::format::sig6;
use crate::kernels::KernelSpec;
use crate::selection::{log_grid, loo_cv_select, testbed_select_r};
use crate::simulation::{
    gen_dataset, run_mise_study, table1_h_grid, write_curves_csv, write_figure_files, write_table1_csv,
    Design, ModelId, ModelSpec, SimConfig, Table1Options,
};
use crate::smoother::{fit_boosted, uniform_grid, FitConfig, Sample};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Default bandwidth window of the `rates` subcommand.
pub const RATES_WINDOW: (f64, f64) = (0.004, 0.01);

#[derive(Debug, Parser)]
#[command(name = "l2boost", version, about = "L2 boosting of Nadaraya-Watson kernel regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the boosted smoother to a two-column CSV and predict on a grid over [0, 1].
    Fit(Flags),
    /// Choose (r, h) on a seeded train/test-bed split of a CSV.
    Select(Flags),
    /// Minimal MISE and optimal bandwidth for every model, n, estimator and r.
    Table1(Flags),
    /// ISB/IV/MISE curves against log h, as CSV and SVG.
    Figures(Flags),
    /// Log-log slopes of the exact ISB on an equispaced noiseless design.
    Rates(Flags),
}

#[derive(Debug, Default, Args)]
struct Flags {
    /// key = value file supplying defaults for the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Two-column CSV `x,y`; header optional.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    r: Option<usize>,
    /// gaussian | epanechnikov
    #[arg(long)]
    kernel: Option<String>,
    /// Number of evaluation grid points.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "h-min")]
    h_min: Option<f64>,
    #[arg(long = "h-max")]
    h_max: Option<f64>,
    #[arg(long = "h-steps")]
    h_steps: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubcommandKind {
    Fit,
    Select,
    Table1,
    Figures,
    Rates,
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone)]
pub struct CliConfig {
    pub subcommand: SubcommandKind,
    pub input: Option<PathBuf>,
    pub kernel: KernelSpec,
    pub h: Option<f64>,
    pub r: usize,
    pub grid: usize,
    pub seed: u64,
    /// `None` means standard output for `fit`, `select` and `rates`.
    pub out: Option<PathBuf>,
    pub model: Option<ModelId>,
    pub n: Option<usize>,
    pub reps: usize,
    /// Explicit bandwidth grid bounds; each subcommand has its own default.
    pub h_min: Option<f64>,
    pub h_max: Option<f64>,
    pub h_steps: Option<usize>,
}

impl CliConfig {
    pub fn new(subcommand: SubcommandKind) -> Self {
        CliConfig {
            subcommand,
            input: None,
            kernel: KernelSpec::gaussian(),
            h: None,
            r: match subcommand {
                SubcommandKind::Fit => 1,
                SubcommandKind::Rates => 2,
                _ => 6,
            },
            grid: 101,
            seed: 42,
            out: None,
            model: None,
            n: None,
            reps: 200,
            h_min: None,
            h_max: None,
            h_steps: None,
        }
    }

    /// `log_grid` over the explicit bounds, falling back to `default`.
    fn h_grid_or(&self, default: (f64, f64, usize)) -> Vec<f64> {
        log_grid(
            self.h_min.unwrap_or(default.0),
            self.h_max.unwrap_or(default.1),
            self.h_steps.unwrap_or(default.2),
        )
    }

    fn has_h_grid(&self) -> bool {
        self.h_min.is_some() || self.h_max.is_some() || self.h_steps.is_some()
    }

    fn validate(&self) -> Result<()> {
        if self.grid < 2 {
            return Err(Error::InvalidConfig("--grid must be at least 2".into()));
        }
        if let Some(h) = self.h {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::InvalidConfig(format!("--h must be positive, got {h}")));
            }
        }
        for (name, v) in [("h-min", self.h_min), ("h-max", self.h_max)] {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::InvalidConfig(format!("--{name} must be positive, got {v}")));
                }
            }
        }
        if let (Some(a), Some(b)) = (self.h_min, self.h_max) {
            if a > b {
                return Err(Error::InvalidConfig("--h-min exceeds --h-max".into()));
            }
        }
        if self.h_steps == Some(0) {
            return Err(Error::InvalidConfig("--h-steps must be positive".into()));
        }
        if matches!(self.subcommand, SubcommandKind::Fit | SubcommandKind::Select) && self.input.is_none() {
            return Err(Error::InvalidConfig("--input is required".into()));
        }
        Ok(())
    }
}

/// Reads a `key = value` file. Blank lines and `#` comments are skipped.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)?;
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                message: format!("expected `key = value`, got `{line}`"),
            });
        };
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("invalid value `{value}` for `{key}`")))
}

fn resolve(kind: SubcommandKind, flags: Flags) -> Result<CliConfig> {
    let mut cfg = CliConfig::new(kind);
    if let Some(path) = &flags.config {
        for (key, value) in read_config_file(path)? {
            let v = value.as_str();
            match key.as_str() {
                "input" => cfg.input = Some(PathBuf::from(v)),
                "model" => cfg.model = Some(v.parse()?),
                "n" => cfg.n = Some(parse_value(&key, v)?),
                "reps" => cfg.reps = parse_value(&key, v)?,
                "seed" => cfg.seed = parse_value(&key, v)?,
                "h" => cfg.h = Some(parse_value(&key, v)?),
                "r" => cfg.r = parse_value(&key, v)?,
                "kernel" => cfg.kernel = v.parse()?,
                "grid" => cfg.grid = parse_value(&key, v)?,
                "out" => cfg.out = Some(PathBuf::from(v)),
                "h-min" => cfg.h_min = Some(parse_value(&key, v)?),
                "h-max" => cfg.h_max = Some(parse_value(&key, v)?),
                "h-steps" => cfg.h_steps = Some(parse_value(&key, v)?),
                other => return Err(Error::InvalidConfig(format!("unknown config key `{other}`"))),
            }
        }
    }
    if let Some(v) = flags.input {
        cfg.input = Some(v);
    }
    if let Some(v) = flags.model {
        cfg.model = Some(v.parse()?);
    }
    if let Some(v) = flags.n {
        cfg.n = Some(v);
    }
    if let Some(v) = flags.reps {
        cfg.reps = v;
    }
    if let Some(v) = flags.seed {
        cfg.seed = v;
    }
    if let Some(v) = flags.h {
        cfg.h = Some(v);
    }
    if let Some(v) = flags.r {
        cfg.r = v;
    }
    if let Some(v) = flags.kernel {
        cfg.kernel = v.parse()?;
    }
    if let Some(v) = flags.grid {
        cfg.grid = v;
    }
    if let Some(v) = flags.out {
        cfg.out = Some(v);
    }
    if let Some(v) = flags.h_min {
        cfg.h_min = Some(v);
    }
    if let Some(v) = flags.h_max {
        cfg.h_max = Some(v);
    }
    if let Some(v) = flags.h_steps {
        cfg.h_steps = Some(v);
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parses a two-column `x,y` CSV. A first line that holds no number at all
/// is taken as a header; blank lines and `#` comments are skipped.
pub fn read_sample_csv(path: &Path) -> Result<Sample> {
    let file = fs::File::open(path)?;
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let (mut x, mut y) = (Vec::new(), Vec::new());
    let mut seen_data_line = false;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        let first = !seen_data_line;
        seen_data_line = true;
        if first && fields.iter().all(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        if fields.len() != 2 {
            return Err(parse_err(lineno, format!("row {lineno}: expected 2 columns, found {}", fields.len())));
        }
        let mut vals = [0.0; 2];
        for (col, (field, slot)) in fields.iter().zip(vals.iter_mut()).enumerate() {
            *slot = field
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| parse_err(lineno, format!("row {lineno}: non-numeric value `{field}` in column {}", col + 1)))?;
        }
        x.push(vals[0]);
        y.push(vals[1]);
    }
    Sample::new(x, y).map_err(|e| parse_err(0, e.to_string()))
}

fn create_output(path: &Path) -> Result<BufWriter<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(fs::File::create(path)?))
}

/// Writes `body` to `cfg.out`, or to `stdout` when no path is configured.
fn emit(cfg: &CliConfig, stdout: &mut dyn Write, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    match &cfg.out {
        Some(path) => {
            let mut out = create_output(path)?;
            body(&mut out)?;
            out.flush()?;
        }
        None => body(stdout)?,
    }
    Ok(())
}

fn fit_command(cfg: &CliConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let sample = read_sample_csv(cfg.input.as_deref().expect("validated"))?;
    let h = match cfg.h {
        Some(h) => h,
        None => {
            let (h, score) = loo_cv_select(&sample, cfg.r, &cfg.h_grid_or((0.02, 0.30, 40)), &cfg.kernel)?;
            writeln!(stderr, "h chosen by leave-one-out: {} (score {})", sig6(h), sig6(score))?;
            h
        }
    };
    let mut fit_cfg = FitConfig::new(h, cfg.r, cfg.kernel.clone())?;
    fit_cfg.max_iterations = fit_cfg.max_iterations.max(cfg.r);
    let fit = fit_boosted(&sample, &fit_cfg)?;
    let grid = uniform_grid(0.0, 1.0, cfg.grid);
    let pred = fit.predict_at(&grid)?;
    if pred.flags().iter().all(|&f| f) {
        return Err(Error::DegenerateSmoother {
            index: 0,
            value: f64::NAN,
        });
    }
    let yhat = pred.iterate(cfg.r);
    emit(cfg, stdout, |out| {
        writeln!(out, "x,yhat,flag")?;
        for ((x, y), flag) in grid.iter().zip(yhat.iter()).zip(pred.flags()) {
            writeln!(out, "{},{},{}", sig6(*x), sig6(*y), u8::from(*flag))?;
        }
        Ok(())
    })
}

fn select_command(cfg: &CliConfig, stdout: &mut dyn Write) -> Result<()> {
    let sample = read_sample_csv(cfg.input.as_deref().expect("validated"))?;
    if sample.len() < 4 {
        return Err(Error::InvalidSample("select needs at least 4 observations".into()));
    }
    let mut idx: Vec<usize> = (0..sample.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    let half = sample.len() / 2;
    let train = sample.select(&idx[..half])?;
    let testbed = sample.select(&idx[half..])?;
    let grid = match cfg.h {
        Some(h) if !cfg.has_h_grid() => vec![h],
        _ => cfg.h_grid_or((0.02, 0.30, 40)),
    };
    let res = testbed_select_r(&train, &testbed, cfg.r.max(1), &grid, &cfg.kernel)?;
    emit(cfg, stdout, |out| {
        writeln!(out, "r,h_hat,sse")?;
        for s in &res.per_r {
            writeln!(out, "{},{},{}", s.r, sig6(s.h_hat), sig6(s.sse))?;
        }
        writeln!(out, "# selected r_hat={} h_hat={}", res.r_hat, sig6(res.h_hat_final))
    })
}

fn sim_h_grid(cfg: &CliConfig) -> Vec<f64> {
    if cfg.has_h_grid() {
        cfg.h_grid_or((0.02, 0.30, 57))
    } else {
        table1_h_grid()
    }
}

fn table1_command(cfg: &CliConfig, stderr: &mut dyn Write) -> Result<()> {
    let mut opts = Table1Options::new(cfg.seed);
    opts.replicates = cfg.reps;
    opts.h_grid = sim_h_grid(cfg);
    opts.r_max = cfg.r;
    if let Some(m) = cfg.model {
        opts.models = vec![m];
    }
    if let Some(n) = cfg.n {
        opts.sample_sizes = vec![n];
    }
    let mut reports = Vec::new();
    for sim in opts.configs() {
        let mut sim = sim;
        sim.kernel = cfg.kernel.clone();
        sim.grid_points = cfg.grid;
        writeln!(stderr, "model {} n {}: {} replicates", sim.model.id, sim.n, sim.replicates)?;
        reports.push(run_mise_study(&sim)?);
    }
    let path = cfg.out.clone().unwrap_or_else(|| PathBuf::from("table1.csv"));
    let mut out = create_output(&path)?;
    write_table1_csv(&reports, &mut out)?;
    out.flush()?;
    writeln!(stderr, "wrote {}", path.display())?;
    Ok(())
}

fn figures_command(cfg: &CliConfig, stderr: &mut dyn Write) -> Result<()> {
    let models = cfg.model.map_or(vec![ModelId::Model1, ModelId::Model2], |m| vec![m]);
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("figures"));
    let mut reports = Vec::new();
    for model in models {
        let mut sim = SimConfig::new(ModelSpec::new(model), cfg.n.unwrap_or(400), cfg.seed);
        sim.replicates = cfg.reps;
        sim.h_grid = sim_h_grid(cfg);
        sim.r_max = cfg.r;
        sim.grid_points = cfg.grid;
        sim.kernel = cfg.kernel.clone();
        writeln!(stderr, "model {} n {}: {} replicates", model, sim.n, sim.replicates)?;
        let report = run_mise_study(&sim)?;
        write_figure_files(&report, &dir.join(format!("model{model}")))?;
        reports.push(report);
    }
    let mut out = create_output(&dir.join("curves.csv"))?;
    write_curves_csv(&reports, &mut out)?;
    out.flush()?;
    writeln!(stderr, "wrote {}", dir.display())?;
    Ok(())
}

pub const RATES_HEADER: &str = "model,n,r,slope,expected_slope,r_squared,points,h_min,h_max";

fn rates_command(cfg: &CliConfig, stdout: &mut dyn Write) -> Result<()> {
    let models = cfg.model.map_or(vec![ModelId::Model1, ModelId::Model2], |m| vec![m]);
    let n = cfg.n.unwrap_or(400);
    let window = (cfg.h_min.unwrap_or(RATES_WINDOW.0), cfg.h_max.unwrap_or(RATES_WINDOW.1));
    let hs = log_grid(window.0, window.1, cfg.h_steps.unwrap_or(12));
    let eval = uniform_grid(0.0, 1.0, cfg.grid);
    let mut rows = Vec::new();
    for model in models {
        let spec = ModelSpec::new(model).with_noise_sd(0.0).with_design(Design::Equispaced);
        let design = gen_dataset(&spec, n, cfg.seed)?;
        let curves = isb_curves(design.x(), |x| model.mean(x), &hs, cfg.r, &cfg.kernel, &eval, (0.1, 0.9))?;
        for (r, curve) in curves.iter().enumerate() {
            rows.push((model, r, rate_estimate(curve, window)?));
        }
    }
    emit(cfg, stdout, |out| {
        writeln!(out, "{RATES_HEADER}")?;
        for (model, r, est) in &rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                model,
                n,
                r,
                sig6(est.slope),
                4 * (r + 1),
                sig6(est.r_squared),
                est.points.len(),
                sig6(window.0),
                sig6(window.1)
            )?;
        }
        Ok(())
    })
}

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse { .. } => EXIT_PARSE,
        Error::Io(_) => EXIT_IO,
        Error::DegenerateSmoother { .. } | Error::AllBandwidthsFlagged(_) => EXIT_DEGENERATE,
        _ => EXIT_USAGE,
    }
}

fn finish(result: Result<()>, stderr: &mut dyn Write) -> i32 {
    match result {
        Ok(()) => EXIT_OK,
        Err(err) => {
            let msg = match &err {
                Error::DegenerateSmoother { value, .. } if value.is_nan() => {
                    "degenerate fit: every evaluation point is flagged".to_string()
                }
                e => e.to_string(),
            };
            let _ = writeln!(stderr, "error: {msg}");
            exit_code(&err)
        }
    }
}

pub fn cmd_fit(cfg: &CliConfig) -> i32 {
    finish(fit_command(cfg, &mut io::stdout().lock(), &mut io::stderr()), &mut io::stderr())
}

pub fn cmd_select(cfg: &CliConfig) -> i32 {
    finish(select_command(cfg, &mut io::stdout().lock()), &mut io::stderr())
}

pub fn cmd_table1(cfg: &CliConfig) -> i32 {
    finish(table1_command(cfg, &mut io::stderr()), &mut io::stderr())
}

pub fn cmd_figures(cfg: &CliConfig) -> i32 {
    finish(figures_command(cfg, &mut io::stderr()), &mut io::stderr())
}

pub fn cmd_rates(cfg: &CliConfig) -> i32 {
    finish(rates_command(cfg, &mut io::stdout().lock()), &mut io::stderr())
}

/// Runs a resolved configuration, writing to the given streams.
pub fn execute(cfg: &CliConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = match cfg.subcommand {
        SubcommandKind::Fit => fit_command(cfg, stdout, stderr),
        SubcommandKind::Select => select_command(cfg, stdout),
        SubcommandKind::Table1 => table1_command(cfg, stderr),
        SubcommandKind::Figures => figures_command(cfg, stderr),
        SubcommandKind::Rates => rates_command(cfg, stdout),
    };
    finish(result, stderr)
}

/// Parses `args` (program name first) into a [`CliConfig`].
pub fn parse_args<I, T>(args: I) -> std::result::Result<CliConfig, (i32, String)>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| {
        let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        (code, e.render().to_string())
    })?;
    let (kind, flags) = match cli.command {
        Command::Fit(f) => (SubcommandKind::Fit, f),
        Command::Select(f) => (SubcommandKind::Select, f),
        Command::Table1(f) => (SubcommandKind::Table1, f),
        Command::Figures(f) => (SubcommandKind::Figures, f),
        Command::Rates(f) => (SubcommandKind::Rates, f),
    };
    resolve(kind, flags).map_err(|e| (exit_code(&e), format!("error: {e}\n")))
}

/// Entry point of the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut io::stdout().lock(), &mut io::stderr())
}

pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match parse_args(args) {
        Ok(cfg) => execute(&cfg, stdout, stderr),
        Err((code, msg)) => {
            if code == EXIT_OK {
                let _ = write!(stdout, "{msg}");
            } else {
                let _ = write!(stderr, "{msg}");
            }
            code
        }
    }
}
