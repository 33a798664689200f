//! A small seeded Monte Carlo study of ISB, IV and MISE over (r, h).

use l2boost::simulation::{run_mise_study, Estimator, ModelId, ModelSpec, SimConfig};
use l2boost::Result;

pub fn run_example() -> Result<()> {
    let mut cfg = SimConfig::new(ModelSpec::new(ModelId::Model1), 100, 42);
    cfg.replicates = 10;
    cfg.r_max = 3;
    cfg.h_grid = vec![0.03, 0.05, 0.08, 0.12, 0.18];
    let report = run_mise_study(&cfg)?;

    for est in [Estimator::Boost, Estimator::HigherOrder] {
        for r in 0..=cfg.r_max {
            let o = report.optimum(est, r).expect("every cell is finite");
            println!("{est:>12} r = {r}: h_opt {:.3}, min MISE {:.5}", o.h_opt, o.mise_min);
        }
    }
    let c = report.cell(Estimator::Boost, 2, 2).expect("cell exists");
    println!("boost r = 2, h = {}: ISB {:.5} + IV {:.5} = MISE {:.5}", c.h, c.isb, c.iv, c.mise);
    report.write_cells_csv(std::io::sink())?;
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
