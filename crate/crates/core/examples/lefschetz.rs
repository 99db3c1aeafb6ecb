//! The mixed Lefschetz commutator acts on (p,q)-components by (p - q) i.

use hkcalib::exterior::{mask_indices, tables, AlternatingForm};
use hkcalib::quaternionic::{ComplexForm, QuaternionicModel, Structure};
use num_complex::Complex64;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = QuaternionicModel::new(2)?;
    let (wj, wk) = (m.omega(Structure::J), m.omega(Structure::K));
    for k in 0..=4 {
        let mut worst: f64 = 0.0;
        for &mask in tables(8).masks(k) {
            let idx: Vec<usize> = mask_indices(mask).collect();
            let e = ComplexForm::real(AlternatingForm::monomial(8, &idx)?);
            for (w, c) in m.weight_decomposition(&e, Structure::I)?.components {
                let image = ComplexForm::new(m.lefschetz_commutator(&c.re, wj, wk)?, m.lefschetz_commutator(&c.im, wj, wk)?)?;
                worst = worst.max(image.max_abs_diff(&c.scale(Complex64::new(0.0, w as f64))));
            }
        }
        println!("k={k}: max deviation {worst:.1e}");
    }
    let f = AlternatingForm::monomial(8, &[0, 1, 4])?;
    let a = m.lefschetz_adjoint(&f, wj)?;
    let b = m.lefschetz_adjoint_via_star(&f, wj)?;
    println!("adjoint via transpose and via Hodge star agree: {}", a.approx_eq(&b, 1e-12));
    Ok(())
}
