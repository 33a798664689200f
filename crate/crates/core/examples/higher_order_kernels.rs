//! Twicing kernels, their moments, and the unstable higher-order estimator.

use l2boost::simulation::{gen_dataset, ModelId, ModelSpec};
use l2boost::smoother::{default_eval_grid, higher_order_fit};
use l2boost::{higher_order_kernel, kernel_moment, KernelSpec, Result};

pub fn run_example() -> Result<()> {
    for r in 0..=3 {
        let k = higher_order_kernel(&KernelSpec::gaussian(), r)?;
        let moments: Vec<String> = (0..=2 * r as u32 + 2)
            .step_by(2)
            .map(|p| format!("{:+.3e}", kernel_moment(&k, p)))
            .collect();
        println!("r = {r}: K(0) = {:.4}, even moments {}", k.eval(0.0), moments.join(" "));
    }

    let sample = gen_dataset(&ModelSpec::new(ModelId::Model2), 100, 7)?;
    let grid = default_eval_grid();
    for r in [0, 2, 6] {
        let fit = higher_order_fit(&sample, 0.03, &KernelSpec::gaussian(), r, &grid)?;
        let min_den = fit.denominators.iter().cloned().fold(f64::INFINITY, f64::min);
        println!(
            "r = {r}, h = 0.03: {} of {} grid points flagged, smallest denominator {min_den:.3e}",
            fit.flagged_count(),
            grid.len()
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
