//! Dimensions of infinitesimal stabilizers in gl(8).

use hkcalib::catalog;
use hkcalib::comass::stabilizer_report;
use hkcalib::quaternionic::{QuaternionicModel, Structure};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = QuaternionicModel::new(2)?;
    let mut forms = vec![
        ("omega_I".to_string(), m.omega(Structure::I).clone()),
        ("vol".to_string(), m.vol().clone()),
        ("theta_1".to_string(), catalog::theta(&m, 1)?.form),
    ];
    for i in 0..=2 {
        forms.push((format!("V(i={i})"), catalog::sl_forms(&m, i)?.form));
    }
    for (name, f) in &forms {
        let r = stabilizer_report(f)?;
        println!(
            "{name:<9} degree {} kernel {:>2} rank {:>2} gap ratio {:.1e}",
            r.degree, r.kernel_dim, r.rank, r.gap_ratio
        );
    }
    Ok(())
}
