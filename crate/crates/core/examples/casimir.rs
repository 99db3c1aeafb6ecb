//! Casimir spectrum of the su(2) action and the projection onto its top eigenspace.

use hkcalib::catalog;
use hkcalib::quaternionic::{QuaternionicModel, Structure};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m1 = QuaternionicModel::new(1)?;
    for k in 0..=4 {
        let c = m1.casimir_matrix(k)?;
        let mut eig: Vec<f64> = ((&c + c.transpose()) * 0.5).symmetric_eigenvalues().iter().map(|x| x.round()).collect();
        eig.sort_by(f64::total_cmp);
        println!("Lambda^{k}(R^4): {eig:?}");
    }
    let m = QuaternionicModel::new(2)?;
    let cube = m.omega(Structure::I).wedge_power(3)?;
    let top = m.casimir_projector_max(&cube)?;
    let target = m.omega(Structure::I).wedge(&catalog::psi_pp(&m, 2)?.form)?;
    let ratio = top.inner_product(&target)? / target.inner_product(&target)?;
    println!("top part of omega_I^3 = {ratio:.6} * omega_I ^ Psi^(2,2), residual {:.1e}", top.max_abs_diff(&target.scale(ratio)));
    Ok(())
}
