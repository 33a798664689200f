//! ISB/IV/MISE curves against log h, written as CSV files and SVG panels.
//!
//! Pass an output directory to keep the files; the default is a quick run
//! into the system temp directory.

use std::path::PathBuf;

use l2boost::simulation::{emit_figure_data, ModelId, ModelSpec, SimConfig};
use l2boost::Result;

pub fn run_example() -> Result<()> {
    run_into(std::env::temp_dir().join("l2boost-figures-example"), 4)
}

fn run_into(dir: PathBuf, replicates: usize) -> Result<()> {
    let mut cfg = SimConfig::new(ModelSpec::new(ModelId::Model2), 100, 42);
    cfg.replicates = replicates;
    cfg.r_max = 2;
    cfg.h_grid = (0..12).map(|i| 0.02 * 1.25f64.powi(i)).collect();
    let (_, files) = emit_figure_data(&cfg, &dir)?;
    let svgs = files.iter().filter(|p| p.extension().is_some_and(|e| e == "svg")).count();
    println!("wrote {} files ({svgs} SVG panels) to {}", files.len(), dir.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    match std::env::args().nth(1) {
        Some(dir) => run_into(PathBuf::from(dir), 200),
        None => run_example(),
    }
}
