//! Seeded Monte Carlo study of the boosted and higher-order-kernel estimators.
//!
//! Every replicate draws `X ~ U(0, 1)`, `Y = m(X) + sd * Z` from its own
//! child seed, evaluates both estimators on the evaluation grid for every
//! `(r, h)` and is folded into pointwise error statistics in replicate order.
//! From those statistics
//!
//! * ISB  = trapezoid of `(mean error)^2`,
//! * IV   = trapezoid of the population variance of the estimates,
//! * MISE = trapezoid of the mean squared error,
//!
//! so `ISB + IV = MISE` up to rounding.

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::diagnostics::{trapezoid_integral, GridFunction};
use crate::error::{Error, Result};
use crate::format::sig6;
use crate::kernels::{higher_order_kernel, KernelSpec};
use crate::plot::{line_chart, Series};
use crate::smoother::{
    fit_boosted, higher_order_fit_with_kernel, uniform_grid, FitConfig, Sample, DEFAULT_INSTABILITY_TOL,
};

/// Replicates evaluated concurrently before being folded in order.
const REPLICATE_CHUNK: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelId {
    Model1,
    Model2,
}

impl ModelId {
    pub fn number(self) -> u32 {
        match self {
            ModelId::Model1 => 1,
            ModelId::Model2 => 2,
        }
    }

    /// `sin(2 pi x)` or `(2/5)(3 sin(4 pi x) + 2 sin(3 pi x))`.
    pub fn mean(self, x: f64) -> f64 {
        match self {
            ModelId::Model1 => (2.0 * PI * x).sin(),
            ModelId::Model2 => 0.4 * (3.0 * (4.0 * PI * x).sin() + 2.0 * (3.0 * PI * x).sin()),
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(ModelId::Model1),
            "2" => Ok(ModelId::Model2),
            other => Err(Error::InvalidConfig(format!("unknown model `{other}` (expected 1 or 2)"))),
        }
    }
}

/// Law of the covariates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Design {
    /// i.i.d. `U(0, 1)` covariates.
    #[default]
    Uniform,
    /// Fixed midpoints `(i + 1/2) / n`.
    Equispaced,
}

impl Design {
    pub fn draw(self, n: usize, rng: &mut impl Rng) -> Vec<f64> {
        match self {
            Design::Uniform => (0..n).map(|_| rng.random()).collect(),
            Design::Equispaced => (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelSpec {
    pub id: ModelId,
    pub noise_sd: f64,
    pub design: Design,
}

impl ModelSpec {
    pub fn new(id: ModelId) -> Self {
        ModelSpec {
            id,
            noise_sd: 0.5,
            design: Design::Uniform,
        }
    }

    pub fn with_noise_sd(mut self, sd: f64) -> Self {
        self.noise_sd = sd;
        self
    }

    pub fn with_design(mut self, design: Design) -> Self {
        self.design = design;
        self
    }

    pub fn m(&self, x: f64) -> f64 {
        self.id.mean(x)
    }

    pub fn sigma2(&self, _x: f64) -> f64 {
        self.noise_sd * self.noise_sd
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimator {
    Boost,
    HigherOrder,
}

impl Estimator {
    pub const ALL: [Estimator; 2] = [Estimator::Boost, Estimator::HigherOrder];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Boost => "boost",
            Estimator::HigherOrder => "higher_order",
        }
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Isb,
    Iv,
    Mise,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Isb, Metric::Iv, Metric::Mise];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Isb => "isb",
            Metric::Iv => "iv",
            Metric::Mise => "mise",
        }
    }
}

/// Bandwidths `0.020, 0.025, ..., 0.300`.
pub fn table1_h_grid() -> Vec<f64> {
    (0..=56).map(|i| (20 + 5 * i) as f64 / 1000.0).collect()
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub model: ModelSpec,
    pub n: usize,
    pub replicates: usize,
    pub h_grid: Vec<f64>,
    pub r_max: usize,
    pub grid_points: usize,
    pub seed: u64,
    pub estimators: Vec<Estimator>,
    pub kernel: KernelSpec,
    pub instability_tol: f64,
}

impl SimConfig {
    /// 200 replicates, the `table1_h_grid` bandwidths, `r = 0..=6`, 101 grid
    /// points, both estimators, Gaussian kernel.
    pub fn new(model: ModelSpec, n: usize, seed: u64) -> Self {
        SimConfig {
            model,
            n,
            replicates: 200,
            h_grid: table1_h_grid(),
            r_max: 6,
            grid_points: 101,
            seed,
            estimators: Estimator::ALL.to_vec(),
            kernel: KernelSpec::gaussian(),
            instability_tol: DEFAULT_INSTABILITY_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::InvalidConfig("need at least 2 replicates".into()));
        }
        if self.grid_points < 3 {
            return Err(Error::InvalidConfig("need at least 3 grid points".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidConfig("need n >= 2".into()));
        }
        if self.h_grid.is_empty() || self.h_grid.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(Error::InvalidConfig("bandwidth grid must be nonempty and positive".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidConfig("no estimator selected".into()));
        }
        if !self.kernel.is_plain() {
            return Err(Error::NotPlainKernel);
        }
        Ok(())
    }

    pub fn eval_grid(&self) -> Vec<f64> {
        uniform_grid(0.0, 1.0, self.grid_points)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replicate `k`: `seed XOR hash(k)`.
pub fn replicate_seed(seed: u64, k: usize) -> u64 {
    seed ^ splitmix64(k as u64)
}

/// `n` covariates from the model's design, `Y = m(X) + noise_sd * Z`.
pub fn gen_dataset(model: &ModelSpec, n: usize, seed: u64) -> Result<Sample> {
    if n < 2 {
        return Err(Error::InvalidConfig("need n >= 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = model.design.draw(n, &mut rng);
    let y = x
        .iter()
        .map(|&xi| {
            let z: f64 = rng.sample(StandardNormal);
            model.m(xi) + model.noise_sd * z
        })
        .collect();
    Sample::new(x, y)
}

/// Welford statistics of `estimate - truth` at each grid point.
///
/// Non-finite estimates are excluded from the point they occur at.
#[derive(Debug, Clone)]
pub struct PointwiseErrorStats {
    count: Vec<u64>,
    mean: Vec<f64>,
    m2: Vec<f64>,
    sum_sq: Vec<f64>,
    excluded: u64,
}

impl PointwiseErrorStats {
    pub fn new(points: usize) -> Self {
        PointwiseErrorStats {
            count: vec![0; points],
            mean: vec![0.0; points],
            m2: vec![0.0; points],
            sum_sq: vec![0.0; points],
            excluded: 0,
        }
    }

    pub fn push(&mut self, estimate: &[f64], truth: &[f64]) {
        for k in 0..self.count.len() {
            let d = estimate[k] - truth[k];
            if !d.is_finite() {
                self.excluded += 1;
                continue;
            }
            self.count[k] += 1;
            let delta = d - self.mean[k];
            self.mean[k] += delta / self.count[k] as f64;
            self.m2[k] += delta * (d - self.mean[k]);
            self.sum_sq[k] += d * d;
        }
    }

    pub fn excluded(&self) -> u64 {
        self.excluded
    }

    /// `(ISB, IV, MISE)` by trapezoid over the grid points that received at
    /// least one finite estimate.
    pub fn integrate(&self, grid: &[f64]) -> Result<(f64, f64, f64)> {
        let valid: Vec<bool> = self.count.iter().map(|&c| c > 0).collect();
        let per = |f: &dyn Fn(usize) -> f64| -> Result<f64> {
            let values = (0..grid.len()).map(|k| if valid[k] { f(k) } else { f64::NAN }).collect();
            trapezoid_integral(&GridFunction::with_mask(grid.to_vec(), values, valid.clone())?)
        };
        let isb = per(&|k| self.mean[k] * self.mean[k])?;
        let iv = per(&|k| self.m2[k] / self.count[k] as f64)?;
        let mise = per(&|k| self.sum_sq[k] / self.count[k] as f64)?;
        Ok((isb, iv, mise))
    }

    pub fn masked_points(&self) -> usize {
        self.count.iter().filter(|&&c| c == 0).count()
    }
}

/// Aggregates of one `(estimator, r, h)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStats {
    pub estimator: Estimator,
    pub r: usize,
    pub h: f64,
    pub isb: f64,
    pub iv: f64,
    pub mise: f64,
    /// Flagged grid-point evaluations summed over replicates.
    pub instability_count: u64,
    /// Non-finite evaluations left out of the statistics.
    pub excluded_evaluations: u64,
    /// Grid points with no finite evaluation at all.
    pub masked_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimum {
    pub estimator: Estimator,
    pub r: usize,
    pub h_opt: f64,
    pub mise_min: f64,
}

#[derive(Debug, Clone)]
pub struct SimReport {
    pub model: ModelId,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub h_grid: Vec<f64>,
    pub r_max: usize,
    pub estimators: Vec<Estimator>,
    /// Ordered by estimator, then `r`, then bandwidth.
    pub cells: Vec<CellStats>,
    pub optima: Vec<Optimum>,
}

impl SimReport {
    pub fn cell(&self, estimator: Estimator, r: usize, h_index: usize) -> Option<&CellStats> {
        let e = self.estimators.iter().position(|&x| x == estimator)?;
        let per_est = (self.r_max + 1) * self.h_grid.len();
        self.cells.get(e * per_est + r * self.h_grid.len() + h_index)
    }

    pub fn optimum(&self, estimator: Estimator, r: usize) -> Option<&Optimum> {
        self.optima.iter().find(|o| o.estimator == estimator && o.r == r)
    }

    /// `(h, metric)` over the bandwidth grid.
    pub fn curve(&self, estimator: Estimator, metric: Metric, r: usize) -> Vec<(f64, f64)> {
        (0..self.h_grid.len())
            .filter_map(|i| self.cell(estimator, r, i))
            .map(|c| {
                let v = match metric {
                    Metric::Isb => c.isb,
                    Metric::Iv => c.iv,
                    Metric::Mise => c.mise,
                };
                (c.h, v)
            })
            .collect()
    }

    /// Every cell as CSV.
    pub fn write_cells_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "model,n,estimator,r,h,isb,iv,mise,instability_count,excluded,masked_points")?;
        for c in &self.cells {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                self.model,
                self.n,
                c.estimator,
                c.r,
                sig6(c.h),
                sig6(c.isb),
                sig6(c.iv),
                sig6(c.mise),
                c.instability_count,
                c.excluded_evaluations,
                c.masked_points
            )?;
        }
        Ok(())
    }
}

/// Estimates of one replicate, laid out `[estimator][r][h][grid point]`.
struct ReplicateResult {
    values: Vec<f64>,
    flagged: Vec<u64>,
}

fn run_replicate(cfg: &SimConfig, kernels: &[KernelSpec], grid: &[f64], k: usize) -> Result<ReplicateResult> {
    let sample = gen_dataset(&cfg.model, cfg.n, replicate_seed(cfg.seed, k))?;
    let (nr, nh, m) = (cfg.r_max + 1, cfg.h_grid.len(), grid.len());
    let mut values = vec![0.0; cfg.estimators.len() * nr * nh * m];
    let mut flagged = vec![0u64; cfg.estimators.len() * nr * nh];
    for (e, est) in cfg.estimators.iter().enumerate() {
        for (hi, &h) in cfg.h_grid.iter().enumerate() {
            let cell = |r: usize| (e * nr + r) * nh + hi;
            match est {
                Estimator::Boost => {
                    let mut fit_cfg = FitConfig::new(h, cfg.r_max, cfg.kernel.clone())?;
                    fit_cfg.max_iterations = fit_cfg.max_iterations.max(cfg.r_max);
                    let pred = fit_boosted(&sample, &fit_cfg)?.predict_at(grid)?;
                    let nflag = pred.flags().iter().filter(|&&f| f).count() as u64;
                    for r in 0..nr {
                        let c = cell(r);
                        values[c * m..(c + 1) * m]
                            .iter_mut()
                            .zip(pred.iterate(r))
                            .for_each(|(dst, src)| *dst = *src);
                        flagged[c] = nflag;
                    }
                }
                Estimator::HigherOrder => {
                    for (r, kernel) in kernels.iter().enumerate() {
                        let c = cell(r);
                        let fit = higher_order_fit_with_kernel(&sample, h, kernel, grid, 0.0, cfg.instability_tol)?;
                        values[c * m..(c + 1) * m].copy_from_slice(&fit.values);
                        flagged[c] = fit.flagged_count() as u64;
                    }
                }
            }
        }
    }
    Ok(ReplicateResult { values, flagged })
}

/// Runs the study described by `cfg`.
///
/// Replicates are evaluated in parallel in fixed-size chunks and folded in
/// replicate order, so the report does not depend on the thread count.
pub fn run_mise_study(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    let grid = cfg.eval_grid();
    let truth: Vec<f64> = grid.iter().map(|&x| cfg.model.m(x)).collect();
    let kernels = (0..=cfg.r_max)
        .map(|r| higher_order_kernel(&cfg.kernel, r))
        .collect::<Result<Vec<_>>>()?;
    let (ne, nr, nh, m) = (cfg.estimators.len(), cfg.r_max + 1, cfg.h_grid.len(), grid.len());
    let ncells = ne * nr * nh;
    let mut stats = vec![PointwiseErrorStats::new(m); ncells];
    let mut flagged = vec![0u64; ncells];

    let indices: Vec<usize> = (0..cfg.replicates).collect();
    for chunk in indices.chunks(REPLICATE_CHUNK) {
        let results = chunk
            .par_iter()
            .map(|&k| run_replicate(cfg, &kernels, &grid, k))
            .collect::<Result<Vec<_>>>()?;
        for res in results {
            for c in 0..ncells {
                stats[c].push(&res.values[c * m..(c + 1) * m], &truth);
                flagged[c] += res.flagged[c];
            }
        }
    }

    let mut cells = Vec::with_capacity(ncells);
    for (e, &estimator) in cfg.estimators.iter().enumerate() {
        for r in 0..nr {
            for (hi, &h) in cfg.h_grid.iter().enumerate() {
                let c = (e * nr + r) * nh + hi;
                let (isb, iv, mise) = stats[c].integrate(&grid).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
                cells.push(CellStats {
                    estimator,
                    r,
                    h,
                    isb,
                    iv,
                    mise,
                    instability_count: flagged[c],
                    excluded_evaluations: stats[c].excluded(),
                    masked_points: stats[c].masked_points(),
                });
            }
        }
    }

    let mut optima = Vec::with_capacity(ne * nr);
    for (e, &estimator) in cfg.estimators.iter().enumerate() {
        for r in 0..nr {
            let block = &cells[(e * nr + r) * nh..(e * nr + r + 1) * nh];
            let best = block
                .iter()
                .filter(|c| c.mise.is_finite())
                .fold(None::<&CellStats>, |best, c| match best {
                    Some(b) if b.mise <= c.mise => Some(b),
                    _ => Some(c),
                });
            if let Some(b) = best {
                optima.push(Optimum {
                    estimator,
                    r,
                    h_opt: b.h,
                    mise_min: b.mise,
                });
            }
        }
    }

    Ok(SimReport {
        model: cfg.model.id,
        n: cfg.n,
        replicates: cfg.replicates,
        seed: cfg.seed,
        h_grid: cfg.h_grid.clone(),
        r_max: cfg.r_max,
        estimators: cfg.estimators.clone(),
        cells,
        optima,
    })
}

/// Settings of the minimal-MISE table run.
#[derive(Debug, Clone)]
pub struct Table1Options {
    pub seed: u64,
    pub replicates: usize,
    pub models: Vec<ModelId>,
    pub sample_sizes: Vec<usize>,
    pub h_grid: Vec<f64>,
    pub r_max: usize,
}

impl Table1Options {
    pub fn new(seed: u64) -> Self {
        Table1Options {
            seed,
            replicates: 200,
            models: vec![ModelId::Model1, ModelId::Model2],
            sample_sizes: vec![100, 400],
            h_grid: table1_h_grid(),
            r_max: 6,
        }
    }

    pub fn configs(&self) -> Vec<SimConfig> {
        let mut out = Vec::new();
        for &model in &self.models {
            for &n in &self.sample_sizes {
                let mut cfg = SimConfig::new(ModelSpec::new(model), n, self.seed);
                cfg.replicates = self.replicates;
                cfg.h_grid = self.h_grid.clone();
                cfg.r_max = self.r_max;
                out.push(cfg);
            }
        }
        out
    }
}

pub const TABLE1_HEADER: &str = "model,n,estimator,r,h_opt,mise_min";

pub fn write_table1_csv<W: Write>(reports: &[SimReport], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{TABLE1_HEADER}")?;
    for rep in reports {
        for o in &rep.optima {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                rep.model,
                rep.n,
                o.estimator,
                o.r,
                sig6(o.h_opt),
                sig6(o.mise_min)
            )?;
        }
    }
    Ok(())
}

/// Model 1 and 2, `n = 100, 400`, both estimators, `r = 0..=6`, 200
/// replicates; writes the minimal-MISE table to `out_path`.
pub fn reproduce_table1(seed: u64, out_path: &Path) -> Result<Vec<SimReport>> {
    reproduce_table1_with(&Table1Options::new(seed), out_path)
}

pub fn reproduce_table1_with(opts: &Table1Options, out_path: &Path) -> Result<Vec<SimReport>> {
    let reports = opts
        .configs()
        .iter()
        .map(run_mise_study)
        .collect::<Result<Vec<_>>>()?;
    if let Some(dir) = out_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut out = BufWriter::new(fs::File::create(out_path)?);
    write_table1_csv(&reports, &mut out)?;
    out.flush()?;
    Ok(reports)
}

/// Reference minimal MISE and optimal bandwidth, `(model, n, estimator, r,
/// h_opt, mise_min)`, that a 200-replicate run should land near.
pub fn reference_table1() -> Vec<(ModelId, usize, Estimator, usize, f64, f64)> {
    #[rustfmt::skip]
    const ROWS: [(u32, usize, [(f64, f64, f64, f64); 7]); 4] = [
        (1, 100, [(0.050, 0.0215, 0.050, 0.0215), (0.080, 0.0188, 0.080, 0.0208), (0.100, 0.0176, 0.100, 0.0213),
                  (0.120, 0.0168, 0.120, 0.0223), (0.130, 0.0162, 0.140, 0.0231), (0.140, 0.0157, 0.160, 0.0238),
                  (0.150, 0.0153, 0.180, 0.0242)]),
        (1, 400, [(0.040, 0.0070, 0.040, 0.0070), (0.060, 0.0059, 0.060, 0.0066), (0.080, 0.0054, 0.070, 0.0068),
                  (0.090, 0.0051, 0.090, 0.0072), (0.100, 0.0049, 0.100, 0.0075), (0.110, 0.0047, 0.110, 0.0077),
                  (0.120, 0.0046, 0.120, 0.0079)]),
        (2, 100, [(0.030, 0.0431, 0.030, 0.0431), (0.045, 0.0355, 0.045, 0.0436), (0.060, 0.0324, 0.070, 0.0493),
                  (0.065, 0.0305, 0.085, 0.0544), (0.075, 0.0293, 0.100, 0.0588), (0.080, 0.0284, 0.110, 0.0624),
                  (0.085, 0.0277, 0.125, 0.0649)]),
        (2, 400, [(0.020, 0.0124, 0.020, 0.0124), (0.035, 0.0099, 0.035, 0.0118), (0.045, 0.0091, 0.045, 0.0125),
                  (0.055, 0.0086, 0.050, 0.0134), (0.060, 0.0082, 0.055, 0.0143), (0.065, 0.0080, 0.060, 0.0150),
                  (0.070, 0.0077, 0.065, 0.0157)]),
    ];
    let mut out = Vec::new();
    for (model, n, rows) in ROWS {
        let model = if model == 1 { ModelId::Model1 } else { ModelId::Model2 };
        for est in Estimator::ALL {
            for (r, &(bh, bm, hh, hm)) in rows.iter().enumerate() {
                let (h, mise) = match est {
                    Estimator::Boost => (bh, bm),
                    Estimator::HigherOrder => (hh, hm),
                };
                out.push((model, n, est, r, h, mise));
            }
        }
    }
    out
}

pub const CURVE_HEADER: &str = "log_h,value,r,estimator,metric";

/// Runs the study and writes one CSV per `(estimator, metric, r)` plus one
/// SVG panel per `(estimator, metric)` into `out_dir`.
pub fn emit_figure_data(cfg: &SimConfig, out_dir: &Path) -> Result<(SimReport, Vec<PathBuf>)> {
    let report = run_mise_study(cfg)?;
    let files = write_figure_files(&report, out_dir)?;
    Ok((report, files))
}

pub fn write_figure_files(report: &SimReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir)?;
    let mut files = Vec::new();
    for &est in &report.estimators {
        for metric in Metric::ALL {
            let mut series = Vec::with_capacity(report.r_max + 1);
            for r in 0..=report.r_max {
                let curve = report.curve(est, metric, r);
                let path = out_dir.join(format!("{}_{}_r{}.csv", est, metric.name(), r));
                let mut out = BufWriter::new(fs::File::create(&path)?);
                writeln!(out, "{CURVE_HEADER}")?;
                for &(h, v) in &curve {
                    writeln!(out, "{},{},{},{},{}", sig6(h.ln()), sig6(v), r, est, metric.name())?;
                }
                out.flush()?;
                files.push(path);
                series.push(Series {
                    label: format!("r={r}"),
                    points: curve.iter().map(|&(h, v)| (h.ln(), v)).collect(),
                });
            }
            let title = format!(
                "model ({}), n = {}: {} {}",
                report.model,
                report.n,
                match est {
                    Estimator::Boost => "L2 boosting",
                    Estimator::HigherOrder => "higher-order kernel",
                },
                metric.name().to_uppercase()
            );
            let svg = line_chart(&title, "log h", &metric.name().to_uppercase(), &series);
            let path = out_dir.join(format!("{}_{}.svg", est, metric.name()));
            fs::write(&path, svg)?;
            files.push(path);
        }
    }
    Ok(files)
}

pub const CURVES_HEADER: &str = "model,n,estimator,metric,r,log_h,value";

/// All curves of several reports in one long-format CSV.
pub fn write_curves_csv<W: Write>(reports: &[SimReport], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CURVES_HEADER}")?;
    for rep in reports {
        for &est in &rep.estimators {
            for metric in Metric::ALL {
                for r in 0..=rep.r_max {
                    for (h, v) in rep.curve(est, metric, r) {
                        writeln!(
                            out,
                            "{},{},{},{},{},{},{}",
                            rep.model,
                            rep.n,
                            est,
                            metric.name(),
                            r,
                            sig6(h.ln()),
                            sig6(v)
                        )?;
                    }
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_models() {
        let s = ModelSpec::new(ModelId::Model1);
        assert_eq!(s.m(0.25), 1.0);
        assert_eq!(ModelSpec::new(ModelId::Model2).m(0.0), 0.0);
    }

    #[test]
    fn dataset_is_deterministic() {
        let model = ModelSpec::new(ModelId::Model1);
        let a = gen_dataset(&model, 5, 42).unwrap();
        let b = gen_dataset(&model, 5, 42).unwrap();
        let bits = |s: &Sample| s.x().iter().chain(s.y()).map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(bits(&a), bits(&gen_dataset(&model, 5, 43).unwrap()));
        assert!(a.x().iter().all(|&x| (0.0..1.0).contains(&x)));
    }

    #[test]
    fn noiseless_dataset_lies_on_the_curve() {
        let model = ModelSpec::new(ModelId::Model2).with_noise_sd(0.0);
        let s = gen_dataset(&model, 50, 7).unwrap();
        for (&x, &y) in s.x().iter().zip(s.y()) {
            assert_eq!(y, model.m(x));
        }
    }

    #[test]
    fn replicate_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|k| replicate_seed(9, k)).collect();
        assert_eq!(seeds.len(), 1000);
    }

    #[test]
    fn exact_estimator_has_zero_error() {
        let grid = uniform_grid(0.0, 1.0, 101);
        let truth: Vec<f64> = grid.iter().map(|&x| ModelId::Model1.mean(x)).collect();
        let mut stats = PointwiseErrorStats::new(grid.len());
        for _ in 0..5 {
            stats.push(&truth, &truth);
        }
        assert_eq!(stats.integrate(&grid).unwrap(), (0.0, 0.0, 0.0));
    }

    #[test]
    fn non_finite_estimates_are_excluded() {
        let grid = [0.0, 0.5, 1.0];
        let mut stats = PointwiseErrorStats::new(3);
        stats.push(&[1.0, f64::NAN, 1.0], &[0.0; 3]);
        stats.push(&[1.0, f64::INFINITY, 1.0], &[0.0; 3]);
        assert_eq!(stats.excluded(), 2);
        assert_eq!(stats.masked_points(), 1);
        let (isb, iv, mise) = stats.integrate(&grid).unwrap();
        assert_eq!((isb, iv, mise), (1.0, 0.0, 1.0));
    }

    #[test]
    fn table1_grid() {
        let g = table1_h_grid();
        assert_eq!(g.len(), 57);
        assert_eq!(g[0], 0.02);
        assert_eq!(g[4], 0.04);
        assert_eq!(g[56], 0.3);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SimConfig::new(ModelSpec::new(ModelId::Model1), 20, 1);
        cfg.replicates = 1;
        assert!(run_mise_study(&cfg).is_err());
        cfg.replicates = 2;
        cfg.grid_points = 2;
        assert!(run_mise_study(&cfg).is_err());
    }

    #[test]
    fn reference_table_has_every_cell() {
        let t = reference_table1();
        assert_eq!(t.len(), 56);
        let cell = t
            .iter()
            .find(|c| c.0 == ModelId::Model1 && c.1 == 100 && c.2 == Estimator::Boost && c.3 == 6)
            .unwrap();
        assert_eq!((cell.4, cell.5), (0.150, 0.0153));
    }
}
