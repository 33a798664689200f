//! Boost a Nadaraya-Watson fit on simulated data and watch the residuals shrink.

use l2boost::simulation::{gen_dataset, ModelId, ModelSpec};
use l2boost::smoother::uniform_grid;
use l2boost::{boosted_weights, fit_boosted, predict, FitConfig, KernelSpec, Result};

pub fn run_example() -> Result<()> {
    let model = ModelSpec::new(ModelId::Model1);
    let sample = gen_dataset(&model, 200, 42)?;
    let cfg = FitConfig::new(0.08, 4, KernelSpec::gaussian())?;
    let fit = fit_boosted(&sample, &cfg)?;

    for k in 0..=fit.iterations() {
        let rss: f64 = fit.residuals().row(k).iter().map(|e| e * e).sum();
        println!("iterate {k}: residual sum of squares {rss:.4}");
    }

    // Predictions on a grid agree with the propagated weight profile.
    let grid = uniform_grid(0.0, 1.0, 11);
    let pred = fit.predict_at(&grid)?;
    let profile = boosted_weights(sample.x(), &grid, cfg.h, &cfg.kernel, cfg.r)?;
    let via_weights = predict(&profile, sample.y())?;
    for ((x, a), b) in grid.iter().zip(pred.iterate(cfg.r)).zip(&via_weights) {
        println!("x = {x:.1}: m_4 = {a:+.4}  (weights: {b:+.4}, truth {:+.4})", model.m(*x));
        assert!((a - b).abs() < 1e-9);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
