//! Nadaraya-Watson weights and the smoother matrix of a small design.

use l2boost::smoother::NeighborhoodWeights;
use l2boost::{nw_weights, smoother_matrix, KernelSpec, Result};

pub fn run_example() -> Result<()> {
    let design = [0.2, 0.5, 0.8];
    let k = KernelSpec::gaussian();

    let NeighborhoodWeights::Weights(w) = nw_weights(&design, 0.5, 0.3, &k, 0.0)? else {
        unreachable!("a Gaussian kernel always reaches the design");
    };
    println!("weights at x = 0.5, h = 0.3: {w:.6?}");
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);

    // A compact kernel leaves x = 0.35 without neighbours when h is small.
    let empty = nw_weights(&design, 0.35, 0.1, &KernelSpec::epanechnikov(), 0.0)?;
    println!("epanechnikov, h = 0.1, x = 0.35: {empty:?}");

    let s = smoother_matrix(&design, 0.3, &k)?;
    println!("smoother matrix:\n{:.4}", s.matrix());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
