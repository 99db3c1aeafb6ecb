//! Coarse sweep of the three-parameter family (l w_I^2 + m w_J^2 + v w_K^2)/2
//! against the predicted calibration region.

use hkcalib::comass::{region_grid, sweep_region, ComassOptions};
use hkcalib::quaternionic::QuaternionicModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = QuaternionicModel::new(2)?;
    let step = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0.5);
    let nodes = region_grid(step, 1.5)?;
    let results = sweep_region(&m, &nodes, 8, 42, &ComassOptions::default(), 1e-3)?;
    let inside = results.iter().filter(|r| r.in_region_predicted).count();
    let consistent = results.iter().filter(|r| r.consistent).count();
    println!("{} nodes at step {step}: {inside} predicted inside, {consistent} consistent", results.len());
    for r in results.iter().filter(|r| r.lambda == 1.0 && r.mu >= 0.0 && r.nu == 0.0) {
        println!("({:+.2}, {:+.2}, {:+.2}) comass {:.6} inside {}", r.lambda, r.mu, r.nu, r.comass, r.in_region_predicted);
    }
    Ok(())
}
