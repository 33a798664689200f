//! Exact conditional bias and variance, and the rates they follow in h and n.

use l2boost::diagnostics::{
    conditional_bias, conditional_variance, isb_curves, rate_estimate, sup_squared_weight_norm,
    trapezoid_integral,
};
use l2boost::selection::log_grid;
use l2boost::simulation::{gen_dataset, replicate_seed, Design, ModelId, ModelSpec};
use l2boost::smoother::default_eval_grid;
use l2boost::{boosted_weights, KernelSpec, Result};

pub fn run_example() -> Result<()> {
    let model = ModelSpec::new(ModelId::Model1);
    let grid = default_eval_grid();
    let k = KernelSpec::gaussian();

    let sample = gen_dataset(&model, 200, 1)?;
    for r in [0, 2, 4] {
        let profile = boosted_weights(sample.x(), &grid, 0.1, &k, r)?;
        let bias = conditional_bias(&profile, |x| model.m(x))?;
        let var = conditional_variance(&profile, |x| model.sigma2(x))?;
        let isb = trapezoid_integral(&bias.map(|b| b * b))?;
        let iv = trapezoid_integral(&var)?;
        println!("r = {r}, h = 0.1: ISB {isb:.3e}, IV {iv:.3e}");
    }

    // ISB ~ h^(4(r+1)) on a noiseless equispaced design.
    let design = gen_dataset(&model.with_design(Design::Equispaced), 400, 0)?;
    let hs = log_grid(0.004, 0.01, 8);
    let curves = isb_curves(design.x(), |x| model.m(x), &hs, 2, &k, &grid, (0.1, 0.9))?;
    for (r, curve) in curves.iter().enumerate() {
        let est = rate_estimate(curve, (0.004, 0.01))?;
        println!("r = {r}: ISB slope {:.3} (r^2 {:.5})", est.slope, est.r_squared);
    }

    // sup_x sum_j w_j(x)^2 halves when n doubles.
    let avg = |n: usize, r: usize| -> Result<f64> {
        let mut total = 0.0;
        for d in 0..5 {
            let s = gen_dataset(&model, n, replicate_seed(3, d))?;
            total += sup_squared_weight_norm(&boosted_weights(s.x(), &grid, 0.1, &k, r)?);
        }
        Ok(total / 5.0)
    };
    for r in [0, 3] {
        println!("r = {r}: weight-norm ratio n=100 vs 200: {:.3}", avg(100, r)? / avg(200, r)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
