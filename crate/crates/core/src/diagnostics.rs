//! Exact conditional bias and variance from weight profiles, trapezoid
//! integration over evaluation grids, and log-log rate fits.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::format::sig6;
use crate::kernels::KernelSpec;
use crate::smoother::{boosted_weight_path, WeightProfile};

/// Values on an ascending grid with per-point validity.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
    valid: Vec<bool>,
}

impl GridFunction {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let valid = vec![true; grid.len()];
        Self::with_mask(grid, values, valid)
    }

    /// `valid[k] == false` marks point `k` as excluded.
    pub fn with_mask(grid: Vec<f64>, values: Vec<f64>, valid: Vec<bool>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if valid.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                found: valid.len(),
            });
        }
        if let Some(i) = grid.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::UnsortedGrid(i + 1));
        }
        Ok(GridFunction { grid, values, valid })
    }

    /// Tabulate `f` on `grid`.
    pub fn from_fn(grid: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            valid: self.valid.clone(),
        }
    }

    /// Points with `lo <= x <= hi` (tolerating rounding at the edges).
    pub fn restrict(&self, lo: f64, hi: f64) -> GridFunction {
        let eps = 1e-12 * (hi - lo).abs().max(1.0);
        let keep: Vec<usize> = (0..self.len())
            .filter(|&k| self.grid[k] >= lo - eps && self.grid[k] <= hi + eps)
            .collect();
        GridFunction {
            grid: keep.iter().map(|&k| self.grid[k]).collect(),
            values: keep.iter().map(|&k| self.values[k]).collect(),
            valid: keep.iter().map(|&k| self.valid[k]).collect(),
        }
    }

    /// Largest value over valid points.
    pub fn sup(&self) -> Option<f64> {
        self.iter_valid().map(|(_, v)| v).reduce(f64::max)
    }

    fn iter_valid(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.len())
            .filter(|&k| self.valid[k])
            .map(|k| (self.grid[k], self.values[k]))
    }

    /// Two-column `x,value` CSV, preceded by `# mask: i,j,...` when any
    /// point is invalid.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let masked: Vec<String> = (0..self.len())
            .filter(|&k| !self.valid[k])
            .map(|k| k.to_string())
            .collect();
        if !masked.is_empty() {
            writeln!(out, "# mask: {}", masked.join(","))?;
        }
        writeln!(out, "x,value")?;
        for (x, v) in self.grid.iter().zip(&self.values) {
            writeln!(out, "{},{}", sig6(*x), sig6(*v))?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let path = std::path::PathBuf::from("<grid function>");
        let mut grid = Vec::new();
        let mut values = Vec::new();
        let mut masked = Vec::new();
        for (lineno, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            let parse_err = |message: String| Error::Parse {
                path: path.clone(),
                line: lineno + 1,
                message,
            };
            if let Some(rest) = line.strip_prefix("# mask:") {
                for tok in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                    masked.push(tok.parse::<usize>().map_err(|e| parse_err(e.to_string()))?);
                }
                continue;
            }
            if line.is_empty() || line.starts_with('#') || line == "x,value" {
                continue;
            }
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| parse_err("expected two columns".into()))?;
            grid.push(a.trim().parse::<f64>().map_err(|e| parse_err(e.to_string()))?);
            values.push(b.trim().parse::<f64>().map_err(|e| parse_err(e.to_string()))?);
        }
        let mut valid = vec![true; grid.len()];
        for k in masked {
            if k >= valid.len() {
                return Err(Error::InvalidConfig(format!("mask index {k} out of range")));
            }
            valid[k] = false;
        }
        Self::with_mask(grid, values, valid)
    }
}

/// `sum_j W_kj m(X_j) - m(x_k)` for each evaluation point.
///
/// This is the exact bias of the estimator given the design.
pub fn conditional_bias(profile: &WeightProfile, m_true: impl Fn(f64) -> f64) -> Result<GridFunction> {
    let at_design: Vec<f64> = profile.design_x().iter().map(|&x| m_true(x)).collect();
    let w = profile.weights();
    let values = profile
        .eval_x()
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let smoothed: f64 = w.row(k).iter().zip(&at_design).map(|(a, b)| a * b).sum();
            smoothed - m_true(x)
        })
        .collect();
    let valid = profile.flags().iter().map(|f| !f).collect();
    GridFunction::with_mask(profile.eval_x().to_vec(), values, valid)
}

/// `sum_j W_kj^2 sigma^2(X_j)` for each evaluation point.
pub fn conditional_variance(profile: &WeightProfile, sigma2: impl Fn(f64) -> f64) -> Result<GridFunction> {
    let at_design: Vec<f64> = profile.design_x().iter().map(|&x| sigma2(x)).collect();
    let w = profile.weights();
    let values = (0..profile.eval_x().len())
        .map(|k| w.row(k).iter().zip(&at_design).map(|(a, s)| a * a * s).sum())
        .collect();
    let valid = profile.flags().iter().map(|f| !f).collect();
    GridFunction::with_mask(profile.eval_x().to_vec(), values, valid)
}

/// Composite trapezoid over the valid points.
///
/// Invalid points are dropped and their valid neighbours joined by a single
/// trapezoid panel, i.e. the rule runs on the valid sub-grid.
pub fn trapezoid_integral(f: &GridFunction) -> Result<f64> {
    let pts: Vec<(f64, f64)> = f.iter_valid().collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientPoints {
            needed: 2,
            found: pts.len(),
        });
    }
    Ok(pts
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum())
}

/// Least-squares fit of `log(value)` on `log(h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: Vec<(f64, f64)>,
}

/// Fits the log-log slope of `value` against `h` for pairs with
/// `window.0 <= h <= window.1`.
pub fn rate_estimate(metric_by_h: &[(f64, f64)], window: (f64, f64)) -> Result<RateEstimate> {
    let mut points = Vec::new();
    for &(h, v) in metric_by_h {
        if h < window.0 || h > window.1 {
            continue;
        }
        if !(v > 0.0) || !(h > 0.0) {
            return Err(Error::NonPositiveMetric { h, value: v });
        }
        points.push((h.ln(), v.ln()));
    }
    if points.len() < 4 {
        return Err(Error::InsufficientPoints {
            needed: 4,
            found: points.len(),
        });
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(RateEstimate {
        slope,
        intercept,
        r_squared,
        points,
    })
}

/// Trapezoid integral of the squared conditional bias over `[lo, hi]`.
pub fn integrated_squared_bias(
    profile: &WeightProfile,
    m_true: impl Fn(f64) -> f64,
    interval: (f64, f64),
) -> Result<f64> {
    let bias = conditional_bias(profile, m_true)?;
    trapezoid_integral(&bias.restrict(interval.0, interval.1).map(|b| b * b))
}

/// `sup_x sum_j w_hat_j(x)^2` over unflagged evaluation points.
pub fn sup_squared_weight_norm(profile: &WeightProfile) -> f64 {
    profile
        .squared_norms()
        .into_iter()
        .zip(profile.flags())
        .filter(|(_, &f)| !f)
        .map(|(v, _)| v)
        .fold(0.0, f64::max)
}

/// ISB over `interval` for every bandwidth and every iterate `0..=r_max`;
/// entry `[r][i]` pairs `hs[i]` with the ISB of the `r`-th iterate.
pub fn isb_curves(
    design_x: &[f64],
    m_true: impl Fn(f64) -> f64 + Copy,
    hs: &[f64],
    r_max: usize,
    kernel: &KernelSpec,
    eval_x: &[f64],
    interval: (f64, f64),
) -> Result<Vec<Vec<(f64, f64)>>> {
    let mut curves = vec![Vec::with_capacity(hs.len()); r_max + 1];
    for &h in hs {
        let path = boosted_weight_path(design_x, eval_x, h, kernel, r_max)?;
        for (r, profile) in path.iter().enumerate() {
            curves[r].push((h, integrated_squared_bias(profile, m_true, interval)?));
        }
    }
    Ok(curves)
}
