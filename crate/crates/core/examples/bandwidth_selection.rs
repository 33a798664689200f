//! Choose h and the number of boosting steps on an independent test bed, or
//! h alone by leave-one-out.

use l2boost::selection::{log_grid, loo_cv_select, testbed_select_r};
use l2boost::simulation::{gen_dataset, ModelId, ModelSpec};
use l2boost::{KernelSpec, Result};

pub fn run_example() -> Result<()> {
    let model = ModelSpec::new(ModelId::Model1);
    let train = gen_dataset(&model, 150, 11)?;
    let testbed = gen_dataset(&model, 150, 12)?;
    let grid = log_grid(0.02, 0.3, 20);
    let k = KernelSpec::gaussian();

    let res = testbed_select_r(&train, &testbed, 5, &grid, &k)?;
    for s in &res.per_r {
        println!("r = {}: h_r = {:.4}, test-bed SSE {:.4}", s.r, s.h_hat, s.sse);
    }
    println!("selected r = {}, h = {:.4}", res.r_hat, res.h_hat_final);

    let (h, score) = loo_cv_select(&train, res.r_hat, &grid, &k)?;
    println!("leave-one-out at r = {}: h = {h:.4}, score {score:.4}", res.r_hat);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
