//! Data-driven bandwidth and stopping-iteration choice.
//!
//! The test-bed rule fits `m_r(.; h)` on a training sample and scores it by the
//! squared prediction error on an independent test-bed sample: `h_r` minimises
//! that error for each `r`, and `r_hat` minimises it over `r >= 1`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::smoother::{boosted_weights, fit_boosted, FitConfig, Sample};

/// Relative tolerance under which two test-bed errors count as tied.
const TIE_REL_TOL: f64 = 1e-12;

/// `n` log-spaced points on `[lo, hi]`, endpoints exact.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| match i {
                    0 => lo,
                    i if i + 1 == n => hi,
                    i => (a + (b - a) * i as f64 / (n - 1) as f64).exp(),
                })
                .collect()
        }
    }
}

/// 40 log-spaced bandwidths on `[0.02, 0.30]`.
pub fn default_h_grid() -> Vec<f64> {
    log_grid(0.02, 0.30, 40)
}

/// Test-bed error of one `(r, h)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RSelection {
    pub r: usize,
    pub h_hat: f64,
    pub sse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// One entry per `r = 0..=r_max`.
    pub per_r: Vec<RSelection>,
    /// Minimiser over `r >= 1`.
    pub r_hat: usize,
    pub h_hat_final: f64,
}

impl SelectionResult {
    pub fn selected(&self) -> &RSelection {
        &self.per_r[self.r_hat]
    }
}

/// `sse[h_index][r]`, or `None` when some test-bed prediction was flagged.
fn testbed_errors(
    train: &Sample,
    testbed: &Sample,
    r_max: usize,
    h_grid: &[f64],
    k: &KernelSpec,
) -> Result<Vec<Option<Vec<f64>>>> {
    if h_grid.is_empty() {
        return Err(Error::InvalidConfig("bandwidth grid is empty".into()));
    }
    if let Some(&h) = h_grid.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
        return Err(Error::InvalidConfig(format!("bandwidth must be positive, got {h}")));
    }
    h_grid
        .par_iter()
        .map(|&h| {
            let mut cfg = FitConfig::new(h, r_max, k.clone())?;
            cfg.max_iterations = cfg.max_iterations.max(r_max);
            let fit = fit_boosted(train, &cfg)?;
            let pred = fit.predict_at(testbed.x())?;
            if pred.flags().iter().any(|&f| f) {
                return Ok(None);
            }
            Ok(Some(
                (0..=r_max)
                    .map(|r| {
                        pred.iterate(r)
                            .iter()
                            .zip(testbed.y())
                            .map(|(p, y)| (y - p) * (y - p))
                            .sum()
                    })
                    .collect(),
            ))
        })
        .collect()
}

fn tie_tolerance(testbed: &Sample) -> f64 {
    TIE_REL_TOL * testbed.y().iter().map(|y| y * y).sum::<f64>()
}

fn best_h(errors: &[Option<Vec<f64>>], h_grid: &[f64], r: usize, tol: f64) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for (h, sse) in h_grid.iter().zip(errors) {
        let Some(sse) = sse else { continue };
        let sse = sse[r];
        best = match best {
            None => Some((*h, sse)),
            Some((bh, bs)) if sse < bs - tol || ((sse - bs).abs() <= tol && *h > bh) => Some((*h, sse)),
            keep => keep,
        };
    }
    best
}

fn flagged_bandwidths(errors: &[Option<Vec<f64>>], h_grid: &[f64]) -> Vec<f64> {
    h_grid
        .iter()
        .zip(errors)
        .filter(|(_, e)| e.is_none())
        .map(|(h, _)| *h)
        .collect()
}

/// `h_r`: the grid bandwidth minimising the test-bed squared error of the
/// `r`-times boosted fit. Ties go to the larger bandwidth.
pub fn testbed_select_h(
    train: &Sample,
    testbed: &Sample,
    r: usize,
    h_grid: &[f64],
    k: &KernelSpec,
) -> Result<(f64, f64)> {
    let errors = testbed_errors(train, testbed, r, h_grid, k)?;
    best_h(&errors, h_grid, r, tie_tolerance(testbed))
        .ok_or_else(|| Error::AllBandwidthsFlagged(flagged_bandwidths(&errors, h_grid)))
}

/// Runs [`testbed_select_h`] for `r = 0..=r_max` and picks `r_hat` over
/// `r >= 1`, ties going to the smaller `r`.
pub fn testbed_select_r(
    train: &Sample,
    testbed: &Sample,
    r_max: usize,
    h_grid: &[f64],
    k: &KernelSpec,
) -> Result<SelectionResult> {
    if r_max < 1 {
        return Err(Error::InvalidConfig("r_max must be at least 1".into()));
    }
    let errors = testbed_errors(train, testbed, r_max, h_grid, k)?;
    let tol = tie_tolerance(testbed);
    let per_r = (0..=r_max)
        .map(|r| {
            best_h(&errors, h_grid, r, tol)
                .map(|(h_hat, sse)| RSelection { r, h_hat, sse })
                .ok_or_else(|| Error::AllBandwidthsFlagged(flagged_bandwidths(&errors, h_grid)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut r_hat = 1;
    for cand in &per_r[2..] {
        if cand.sse < per_r[r_hat].sse - tol {
            r_hat = cand.r;
        }
    }
    Ok(SelectionResult {
        h_hat_final: per_r[r_hat].h_hat,
        r_hat,
        per_r,
    })
}

/// Leave-one-out shortcut `n^-1 sum [(Y_i - m_r(X_i)) / (1 - B_ii)]^2` with
/// `B = I - (I - S)^(r+1)` the boosted hat matrix.
pub fn loo_cv_score(sample: &Sample, cfg: &FitConfig) -> Result<f64> {
    let fit = fit_boosted(sample, cfg)?;
    let hat = boosted_weights(sample.x(), sample.x(), cfg.h, &cfg.kernel, cfg.r)?;
    let w = hat.weights();
    let mut total = 0.0;
    for (i, (&y, &fitted)) in sample.y().iter().zip(fit.final_fit()).enumerate() {
        let diag = w[[i, i]];
        if diag >= 1.0 - 1e-12 {
            return Err(Error::DegenerateSmoother { index: i, value: diag });
        }
        let e = (y - fitted) / (1.0 - diag);
        total += e * e;
    }
    Ok(total / sample.len() as f64)
}

/// Grid bandwidth with the smallest [`loo_cv_score`]; degenerate bandwidths
/// are skipped. Ties go to the larger bandwidth.
pub fn loo_cv_select(sample: &Sample, r: usize, h_grid: &[f64], k: &KernelSpec) -> Result<(f64, f64)> {
    let scores: Vec<Option<f64>> = h_grid
        .par_iter()
        .map(|&h| {
            let cfg = FitConfig::new(h, r, k.clone())?;
            match loo_cv_score(sample, &cfg) {
                Ok(s) => Ok(Some(s)),
                Err(Error::DegenerateSmoother { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<_>>()?;
    let mut best: Option<(f64, f64)> = None;
    for (&h, s) in h_grid.iter().zip(scores) {
        let Some(s) = s else { continue };
        best = match best {
            Some((bh, bs)) if !(s < bs || (s == bs && h > bh)) => Some((bh, bs)),
            _ => Some((h, s)),
        };
    }
    best.ok_or_else(|| Error::AllBandwidthsFlagged(h_grid.to_vec()))
}
