//! The minimal-MISE table: every model, n, estimator and r.
//!
//! `cargo run --release --example table1 -- 200` runs the full 200 replicates
//! (a few minutes); the default is a quick 4-replicate pass.

use l2boost::simulation::{reference_table1, reproduce_table1_with, Table1Options};
use l2boost::Result;

pub fn run_example() -> Result<()> {
    run_with_replicates(4, &[100], 2)
}

fn run_with_replicates(replicates: usize, sizes: &[usize], r_max: usize) -> Result<()> {
    let mut opts = Table1Options::new(42);
    opts.replicates = replicates;
    opts.sample_sizes = sizes.to_vec();
    opts.r_max = r_max;
    let dir = std::env::temp_dir().join("l2boost-table1-example");
    let path = dir.join("table1.csv");
    let reports = reproduce_table1_with(&opts, &path)?;
    println!("wrote {}", path.display());

    let reference = reference_table1();
    for rep in &reports {
        for o in &rep.optima {
            let target = reference
                .iter()
                .find(|t| t.0 == rep.model && t.1 == rep.n && t.2 == o.estimator && t.3 == o.r)
                .expect("reference covers every cell");
            println!(
                "model {} n {} {:>12} r {}: h_opt {:.3} MISE {:.4}   (reference {:.3} {:.4})",
                rep.model, rep.n, o.estimator, o.r, o.h_opt, o.mise_min, target.4, target.5
            );
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    match std::env::args().nth(1).and_then(|a| a.parse().ok()) {
        Some(reps) => run_with_replicates(reps, &[100, 400], 6),
        None => run_example(),
    }
}
