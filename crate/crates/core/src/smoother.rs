//! The Nadaraya–Watson weak learner, the L2 boosting iteration and exact
//! propagation of the boosted weights.
//!
//! With `S` the smoother matrix at the design points, the boosted fit after
//! `r` iterations is `(I - (I - S)^(r+1)) y`. It is computed by refitting
//! residuals, i.e. by repeated matrix-vector products with `S`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::kernels::{higher_order_kernel, KernelSpec, ScaledKernel};

/// Default cap on boosting iterations.
pub const DEFAULT_MAX_ITERATIONS: usize = 16;

/// Denominator guard for nonnegative kernels; only exact underflow trips it.
pub const DEFAULT_DENOM_FLOOR: f64 = 1e-300;

/// Default relative threshold below which a higher-order denominator counts
/// as near zero: `sum K_h <= tol * sum |K_h|`.
pub const DEFAULT_INSTABILITY_TOL: f64 = 0.1;

/// Paired covariates and responses.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    x: Vec<f64>,
    y: Vec<f64>,
    order: Vec<usize>,
}

impl Sample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidSample(format!(
                "{} covariates but {} responses",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 2 {
            return Err(Error::InvalidSample("need at least two observations".into()));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSample(format!("covariate {i} is not finite")));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSample(format!("response {i} is not finite")));
        }
        let mut order: Vec<usize> = (0..x.len()).collect();
        order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
        Ok(Sample { x, y, order })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Indices that sort the covariates ascending.
    pub fn sorted_order(&self) -> &[usize] {
        &self.order
    }

    /// Smallest and largest covariate.
    pub fn covariate_range(&self) -> (f64, f64) {
        (self.x[self.order[0]], self.x[*self.order.last().unwrap()])
    }

    /// Same design, responses mapped by `f`.
    pub fn map_responses(&self, f: impl Fn(f64) -> f64) -> Sample {
        Sample {
            x: self.x.clone(),
            y: self.y.iter().map(|&v| f(v)).collect(),
            order: self.order.clone(),
        }
    }

    /// Sub-sample at the given indices.
    pub fn select(&self, idx: &[usize]) -> Result<Sample> {
        Sample::new(
            idx.iter().map(|&i| self.x[i]).collect(),
            idx.iter().map(|&i| self.y[i]).collect(),
        )
    }
}

/// Bandwidth, iteration count and kernel of a boosted fit.
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub h: f64,
    pub r: usize,
    pub kernel: KernelSpec,
    pub denom_floor: f64,
    pub max_iterations: usize,
}

impl FitConfig {
    pub fn new(h: f64, r: usize, kernel: KernelSpec) -> Result<Self> {
        let cfg = FitConfig {
            h,
            r,
            kernel,
            denom_floor: DEFAULT_DENOM_FLOOR,
            max_iterations: DEFAULT_MAX_ITERATIONS,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::InvalidConfig(format!("bandwidth must be positive, got {}", self.h)));
        }
        if self.r > self.max_iterations {
            return Err(Error::InvalidConfig(format!(
                "r = {} exceeds the iteration cap {}",
                self.r, self.max_iterations
            )));
        }
        if !(self.denom_floor >= 0.0) {
            return Err(Error::InvalidConfig("denominator floor must be nonnegative".into()));
        }
        Ok(())
    }

    fn scaled_kernel(&self) -> Result<ScaledKernel> {
        ScaledKernel::new(self.kernel.clone(), self.h)
    }
}

/// Outcome of a Nadaraya–Watson weight evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum NeighborhoodWeights {
    Weights(Vec<f64>),
    /// `|sum_j K_h(X_j - x)|` was at or below the denominator floor.
    EmptyNeighborhood,
}

impl NeighborhoodWeights {
    pub fn weights(&self) -> Option<&[f64]> {
        match self {
            NeighborhoodWeights::Weights(w) => Some(w),
            NeighborhoodWeights::EmptyNeighborhood => None,
        }
    }
}

/// Writes `K_h(X_i - x) / sum_j K_h(X_j - x)` into `out`; returns `false`
/// (leaving `out` zeroed) for an empty neighborhood.
fn fill_weights(design: &[f64], x: f64, kernel: &ScaledKernel, floor: f64, out: &mut [f64]) -> bool {
    let radius = kernel.support_radius();
    let mut total = 0.0;
    for (w, &xi) in out.iter_mut().zip(design) {
        let d = xi - x;
        *w = if d.abs() > radius { 0.0 } else { kernel.eval(d) };
        total += *w;
    }
    if !(total.abs() > floor) {
        out.iter_mut().for_each(|w| *w = 0.0);
        return false;
    }
    let inv = 1.0 / total;
    out.iter_mut().for_each(|w| *w *= inv);
    true
}

/// Nadaraya–Watson weights `w_i(x)` of the design points at `x`.
pub fn nw_weights(
    design_x: &[f64],
    x: f64,
    h: f64,
    k: &KernelSpec,
    denom_floor: f64,
) -> Result<NeighborhoodWeights> {
    if design_x.is_empty() {
        return Err(Error::InvalidSample("empty design".into()));
    }
    let kernel = ScaledKernel::new(k.clone(), h)?;
    let mut w = vec![0.0; design_x.len()];
    Ok(if fill_weights(design_x, x, &kernel, denom_floor, &mut w) {
        NeighborhoodWeights::Weights(w)
    } else {
        NeighborhoodWeights::EmptyNeighborhood
    })
}

/// Stacked weight rows at `eval_x`; flagged rows are left at zero.
fn weight_matrix(design: &[f64], eval_x: &[f64], kernel: &ScaledKernel, floor: f64) -> (Array2<f64>, Vec<bool>) {
    let mut m = Array2::zeros((eval_x.len(), design.len()));
    let mut flags = vec![false; eval_x.len()];
    for ((mut row, &x), flag) in m.axis_iter_mut(Axis(0)).zip(eval_x).zip(flags.iter_mut()) {
        let slice = row.as_slice_mut().expect("standard layout");
        *flag = !fill_weights(design, x, kernel, floor, slice);
    }
    (m, flags)
}

/// `S_ij = w_j(X_i)`.
#[derive(Debug, Clone)]
pub struct SmootherMatrix {
    matrix: Array2<f64>,
    flags: Vec<bool>,
}

impl SmootherMatrix {
    pub fn matrix(&self) -> ArrayView2<'_, f64> {
        self.matrix.view()
    }

    /// Rows whose neighborhood was empty (left at zero).
    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, v: ArrayView1<'_, f64>) -> Array1<f64> {
        self.matrix.dot(&v)
    }
}

pub fn smoother_matrix(design_x: &[f64], h: f64, k: &KernelSpec) -> Result<SmootherMatrix> {
    smoother_matrix_with_floor(design_x, h, k, DEFAULT_DENOM_FLOOR)
}

pub fn smoother_matrix_with_floor(
    design_x: &[f64],
    h: f64,
    k: &KernelSpec,
    denom_floor: f64,
) -> Result<SmootherMatrix> {
    if design_x.is_empty() {
        return Err(Error::InvalidSample("empty design".into()));
    }
    let kernel = ScaledKernel::new(k.clone(), h)?;
    let (matrix, flags) = weight_matrix(design_x, design_x, &kernel, denom_floor);
    Ok(SmootherMatrix { matrix, flags })
}

/// Fitted values and residuals of every boosting iterate at the design points.
#[derive(Debug, Clone)]
pub struct BoostFit {
    config: FitConfig,
    design_x: Vec<f64>,
    y: Array1<f64>,
    fitted: Array2<f64>,
    residuals: Array2<f64>,
    flags: Vec<bool>,
}

impl BoostFit {
    pub fn config(&self) -> &FitConfig {
        &self.config
    }

    /// Number of boosting iterations `r` (the fit holds `r + 1` iterates).
    pub fn iterations(&self) -> usize {
        self.config.r
    }

    /// `(r+1) x n`; row `k` is the `k`-th iterate at the design points.
    pub fn fitted(&self) -> ArrayView2<'_, f64> {
        self.fitted.view()
    }

    pub fn residuals(&self) -> ArrayView2<'_, f64> {
        self.residuals.view()
    }

    /// The final iterate `m_r` at the design points.
    pub fn final_fit(&self) -> ArrayView1<'_, f64> {
        self.fitted.row(self.config.r)
    }

    /// Design points whose own neighborhood was empty.
    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    /// Every iterate at new points.
    ///
    /// `m_k(x) = w(x)^T (y + e_0 + ... + e_{k-1})` where `e_j` are the stored
    /// residual vectors.
    pub fn predict_at(&self, eval_x: &[f64]) -> Result<BoostedPrediction> {
        let kernel = self.config.scaled_kernel()?;
        let (w, flags) = weight_matrix(&self.design_x, eval_x, &kernel, self.config.denom_floor);
        Ok(self.predict_with_weights(&w, flags))
    }

    fn predict_with_weights(&self, w: &Array2<f64>, flags: Vec<bool>) -> BoostedPrediction {
        let r = self.config.r;
        let mut values = Array2::zeros((r + 1, w.nrows()));
        let mut target = self.y.clone();
        for k in 0..=r {
            if k > 0 {
                target += &self.residuals.row(k - 1);
            }
            let mut row = w.dot(&target);
            for (v, &f) in row.iter_mut().zip(&flags) {
                if f {
                    *v = f64::NAN;
                }
            }
            values.row_mut(k).assign(&row);
        }
        BoostedPrediction { values, flags }
    }
}

/// Boosted predictions at arbitrary points, one row per iterate.
#[derive(Debug, Clone)]
pub struct BoostedPrediction {
    values: Array2<f64>,
    flags: Vec<bool>,
}

impl BoostedPrediction {
    /// `(r+1) x m`; flagged columns hold NaN.
    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn iterate(&self, k: usize) -> ArrayView1<'_, f64> {
        self.values.row(k)
    }

    /// Points with an empty neighborhood.
    pub fn flags(&self) -> &[bool] {
        &self.flags
    }
}

/// Runs the boosting iteration: `m_0 = S y`, then `m_k = m_{k-1} + S (y - m_{k-1})`.
pub fn fit_boosted(sample: &Sample, cfg: &FitConfig) -> Result<BoostFit> {
    cfg.validate()?;
    let s = smoother_matrix_with_floor(sample.x(), cfg.h, &cfg.kernel, cfg.denom_floor)?;
    let n = sample.len();
    let y = Array1::from(sample.y().to_vec());
    let mut fitted = Array2::zeros((cfg.r + 1, n));
    let mut residuals = Array2::zeros((cfg.r + 1, n));

    let mut current = s.apply(y.view());
    for k in 0..=cfg.r {
        if k > 0 {
            let step = s.apply(residuals.row(k - 1));
            current = &fitted.row(k - 1) + &step;
        }
        let e = &y - &current;
        fitted.row_mut(k).assign(&current);
        residuals.row_mut(k).assign(&e);
    }
    Ok(BoostFit {
        config: cfg.clone(),
        design_x: sample.x().to_vec(),
        y,
        fitted,
        residuals,
        flags: s.flags,
    })
}

/// Boosted weights `W_kj = w_hat_j(x_k)` of an `r`-times boosted fit.
#[derive(Debug, Clone)]
pub struct WeightProfile {
    design_x: Vec<f64>,
    eval_x: Vec<f64>,
    weights: Array2<f64>,
    r: usize,
    flags: Vec<bool>,
}

impl WeightProfile {
    pub fn design_x(&self) -> &[f64] {
        &self.design_x
    }

    pub fn eval_x(&self) -> &[f64] {
        &self.eval_x
    }

    /// `m x n` weight matrix; flagged rows are zero.
    pub fn weights(&self) -> ArrayView2<'_, f64> {
        self.weights.view()
    }

    pub fn iterations(&self) -> usize {
        self.r
    }

    /// Evaluation points with an empty neighborhood.
    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    /// `sum_j W_kj^2` per evaluation point; the conditional variance for unit noise.
    pub fn squared_norms(&self) -> Vec<f64> {
        self.weights
            .axis_iter(Axis(0))
            .map(|row| row.iter().map(|w| w * w).sum())
            .collect()
    }
}

/// Weight profiles for every iterate `0..=r`.
///
/// Applies `w_hat_j(x) = w_j(x) + w~_j(x) - sum_i w_i(x) w~_j(X_i)` starting
/// from `w~ = w`. The previous iterate is needed at the design points as well,
/// so the recursion is carried on the design (`n x n`) and on `eval_x`.
pub fn boosted_weight_path(
    design_x: &[f64],
    eval_x: &[f64],
    h: f64,
    k: &KernelSpec,
    r: usize,
) -> Result<Vec<WeightProfile>> {
    if design_x.is_empty() {
        return Err(Error::InvalidSample("empty design".into()));
    }
    let kernel = ScaledKernel::new(k.clone(), h)?;
    let (s, _) = weight_matrix(design_x, design_x, &kernel, DEFAULT_DENOM_FLOOR);
    let (w0, flags) = weight_matrix(design_x, eval_x, &kernel, DEFAULT_DENOM_FLOOR);

    let mut path = Vec::with_capacity(r + 1);
    let mut at_design = s.clone();
    let mut at_eval = w0.clone();
    path.push(at_eval.clone());
    for _ in 0..r {
        let next_eval = &w0 + &at_eval - w0.dot(&at_design);
        let next_design = &s + &at_design - s.dot(&at_design);
        at_eval = next_eval;
        at_design = next_design;
        path.push(at_eval.clone());
    }
    Ok(path
        .into_iter()
        .enumerate()
        .map(|(iter, weights)| WeightProfile {
            design_x: design_x.to_vec(),
            eval_x: eval_x.to_vec(),
            weights,
            r: iter,
            flags: flags.clone(),
        })
        .collect())
}

pub fn boosted_weights(
    design_x: &[f64],
    eval_x: &[f64],
    h: f64,
    k: &KernelSpec,
    r: usize,
) -> Result<WeightProfile> {
    Ok(boosted_weight_path(design_x, eval_x, h, k, r)?
        .pop()
        .expect("path has r + 1 entries"))
}

/// `W y`; flagged evaluation points yield NaN (see [`WeightProfile::flags`]).
pub fn predict(profile: &WeightProfile, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != profile.weights.ncols() {
        return Err(Error::DimensionMismatch {
            expected: profile.weights.ncols(),
            found: y.len(),
        });
    }
    let y = ArrayView1::from(y);
    Ok(profile
        .weights
        .dot(&y)
        .iter()
        .zip(&profile.flags)
        .map(|(&v, &f)| if f { f64::NAN } else { v })
        .collect())
}

/// Per-point status of the higher-order-kernel estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    /// Denominator negative or small relative to `sum |K_h|`; the raw ratio is kept.
    NearZeroOrNegative,
    /// Denominator at or below the floor; the value is NaN.
    ZeroDenominator,
}

impl Stability {
    pub fn is_flagged(self) -> bool {
        self != Stability::Stable
    }
}

/// Output of [`higher_order_fit`].
#[derive(Debug, Clone)]
pub struct HigherOrderFit {
    pub values: Vec<f64>,
    pub flags: Vec<Stability>,
    pub denominators: Vec<f64>,
}

impl HigherOrderFit {
    pub fn flagged_count(&self) -> usize {
        self.flags.iter().filter(|f| f.is_flagged()).count()
    }
}

/// Nadaraya–Watson ratio with the twicing kernel `K(r)`, unregularised.
pub fn higher_order_fit(
    sample: &Sample,
    h: f64,
    base: &KernelSpec,
    r: usize,
    eval_x: &[f64],
) -> Result<HigherOrderFit> {
    let kernel = higher_order_kernel(base, r)?;
    higher_order_fit_with_kernel(sample, h, &kernel, eval_x, 0.0, DEFAULT_INSTABILITY_TOL)
}

/// [`higher_order_fit`] with a prebuilt kernel and explicit thresholds.
pub fn higher_order_fit_with_kernel(
    sample: &Sample,
    h: f64,
    kernel: &KernelSpec,
    eval_x: &[f64],
    denom_floor: f64,
    instability_tol: f64,
) -> Result<HigherOrderFit> {
    let kh = ScaledKernel::new(kernel.clone(), h)?;
    let radius = kh.support_radius();
    let mut out = HigherOrderFit {
        values: Vec::with_capacity(eval_x.len()),
        flags: Vec::with_capacity(eval_x.len()),
        denominators: Vec::with_capacity(eval_x.len()),
    };
    for &x in eval_x {
        let (mut num, mut den, mut abs) = (0.0, 0.0, 0.0);
        for (&xi, &yi) in sample.x().iter().zip(sample.y()) {
            let d = xi - x;
            if d.abs() > radius {
                continue;
            }
            let k = kh.eval(d);
            num += k * yi;
            den += k;
            abs += k.abs();
        }
        let (value, flag) = if den.abs() <= denom_floor {
            (f64::NAN, Stability::ZeroDenominator)
        } else if den <= instability_tol * abs {
            (num / den, Stability::NearZeroOrNegative)
        } else {
            (num / den, Stability::Stable)
        };
        out.values.push(value);
        out.flags.push(flag);
        out.denominators.push(den);
    }
    Ok(out)
}

/// `m` equispaced points on `[a, b]`.
pub fn uniform_grid(a: f64, b: f64, m: usize) -> Vec<f64> {
    match m {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..m)
            .map(|i| if i + 1 == m { b } else { a + (b - a) * i as f64 / (m - 1) as f64 })
            .collect(),
    }
}

/// The 101-point evaluation grid on `[0, 1]`.
pub fn default_eval_grid() -> Vec<f64> {
    uniform_grid(0.0, 1.0, 101)
}
