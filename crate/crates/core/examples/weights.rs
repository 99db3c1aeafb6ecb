//! Splits a 4-form into weight components for the circle generated by I and
//! checks that each component rotates by its weight.

use hkcalib::catalog;
use hkcalib::quaternionic::{ComplexForm, QuaternionicModel, Structure};
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = QuaternionicModel::new(2)?;
    let f = catalog::psi(&m, 2)?.form;
    let dec = m.weight_decomposition(&ComplexForm::real(f.clone()), Structure::I)?;
    let t = 0.7;
    let rho = m.rho(Structure::I, t);
    for (w, c) in &dec.components {
        let rotated = m.act_on_complex(&rho, c)?;
        let expected = c.scale(Complex64::from_polar(1.0, *w as f64 * t));
        println!("weight {w:+}: norm {:.6}, rotation defect {:.1e}", c.norm(), rotated.max_abs_diff(&expected));
    }
    let total = dec.sum().expect("nonempty");
    println!("reassembly defect {:.1e}", total.max_abs_diff(&ComplexForm::real(f)));
    let pp = m.real_pp_part(&catalog::psi_form(&m, 2)?, Structure::I)?;
    println!("(2,2)-part matches psi_pp: {}", pp.approx_eq(&catalog::psi_pp(&m, 2)?.form, 1e-12));
    Ok(())
}
