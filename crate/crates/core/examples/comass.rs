//! Multi-start comass estimates, checked against the exact value for 2-forms.

use hkcalib::catalog;
use hkcalib::comass::{comass_estimate_named, comass_exact_2form, ComassOptions};
use hkcalib::exterior::AlternatingForm;
use hkcalib::quaternionic::{QuaternionicModel, Structure};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = QuaternionicModel::new(2)?;
    let opts = ComassOptions::default();
    let forms = [
        ("theta_1", catalog::theta(&m, 1)?.form),
        ("theta_2", catalog::theta(&m, 2)?.form),
        ("psi_22", catalog::psi_pp(&m, 2)?.form),
        ("psi_2", catalog::psi(&m, 2)?.form),
        ("bh(1,1,1)", catalog::bryant_harvey(&m, 1.0, 1.0, 1.0)?.form),
    ];
    for (name, f) in &forms {
        let r = comass_estimate_named(f, name, 200, 42, &opts)?;
        println!(
            "{name:<10} comass {:.12} ({:?}, {}/{} runs converged, {} maximizers)",
            r.comass, r.status, r.converged_runs, 2 * r.starts, r.maximizers.len()
        );
    }
    let f = &(m.omega(Structure::I) + &m.omega(Structure::J).scale(0.5)) + &m.omega(Structure::K).scale(-0.25);
    let est = comass_estimate_named(&f, "2-form", 20, 1, &opts)?.comass;
    println!("2-form: estimate {est:.12}, exact {:.12}", comass_exact_2form(&f)?);
    let zero = comass_estimate_named(&AlternatingForm::zero(8, 4)?, "zero", 4, 0, &opts)?;
    println!("zero form: {:?}", zero.status);
    Ok(())
}
