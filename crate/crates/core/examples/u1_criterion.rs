//! Compares the circle-orbit face test with the direct (p,p)-part test.

use hkcalib::catalog;
use hkcalib::comass::u1_face_criterion;
use hkcalib::quaternionic::{QuaternionicModel, Structure};
use hkcalib::subspaces::{random_face, random_plane, FaceKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = QuaternionicModel::new(2)?;
    let psi = catalog::psi(&m, 2)?.form;
    let mut agree = 0;
    for s in 0..20 {
        let w = if s % 2 == 0 { random_face(&m, FaceKind::ComplexLagrangian, s)? } else { random_plane(8, 4, s)? };
        let v = u1_face_criterion(&psi, &w, &m, Structure::I)?;
        agree += v.agree as usize;
        if s < 4 {
            let min = v.values.iter().copied().fold(f64::INFINITY, f64::min);
            println!(
                "sample {s}: grid {} direct {} weight-zero value {:.6} min grid value {min:.6}",
                v.grid_verdict, v.direct_verdict, v.weight_zero_value
            );
        }
    }
    println!("{agree}/20 verdicts agree");
    Ok(())
}
