//! Face values of Theta_1 on random quaternionic lines and on random 4-planes.

use hkcalib::catalog::{self, FaceClass};
use hkcalib::comass::{comass_estimate, verify_faces, ComassOptions};
use hkcalib::quaternionic::{QuaternionicModel, Structure};
use hkcalib::subspaces::{classify_default, random_face, random_plane, FaceKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = QuaternionicModel::new(2)?;
    let nf = catalog::theta(&m, 1)?;
    let positives = (0..50).map(|s| random_face(&m, FaceKind::Quaternionic(1), s)).collect::<Result<Vec<_>, _>>()?;
    let negatives = (0..50).map(|s| random_plane(8, 4, 1000 + s)).collect::<Result<Vec<_>, _>>()?;
    let mut report = comass_estimate(&nf.form, 32, 42, &ComassOptions::default())?;
    report.classify_faces(&m, Structure::I);
    let v = verify_faces(&nf, &m, &positives, &negatives, 1e-6, Some(&report))?;
    println!("positives at 1: {}/{} (min {:.12})", v.positives_at_one, v.positives, v.min_positive);
    println!("negatives below 1: {}/{} (max {:.6})", v.negatives_below, v.negatives, v.max_negative);
    let quaternionic = v.maximizer_classes.iter().filter(|c| **c == FaceClass::Quaternionic).count();
    println!("maximizers quaternionic: {quaternionic}/{}, passed {}", v.maximizer_classes.len(), v.passed());
    let class = classify_default(&positives[0], &m);
    println!("first positive: quaternionic {}, complex {:?}, margin {:.1} decades", class.quaternionic, class.complex, class.margin);
    Ok(())
}
