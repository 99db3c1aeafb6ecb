//! Prints the named forms for n = 2 with their claimed face classes and the
//! value on the standard face of that class.

use hkcalib::catalog::{self, NamedForm};
use hkcalib::quaternionic::{QuaternionicModel, Structure};
use hkcalib::subspaces::standard_face;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m = QuaternionicModel::new(2)?;
    let mut forms: Vec<NamedForm> = Vec::new();
    for p in 1..=2 {
        forms.push(catalog::theta(&m, p)?);
        forms.push(catalog::xi(&m, p)?);
        forms.push(catalog::psi_pp(&m, p)?);
    }
    for p in 0..=2 {
        forms.push(catalog::phi_coisotropic(&m, p)?.0);
    }
    for i in 0..=2 {
        forms.push(catalog::sl_forms(&m, i)?);
    }
    forms.push(catalog::bryant_harvey(&m, 1.0, -0.5, -0.5)?);
    for nf in &forms {
        let face_model = if nf.face_structure == Structure::J { m.cycled() } else { QuaternionicModel::new(2)? };
        let value = match nf.standard_face_kind() {
            Some(kind) => format!("{:.12}", standard_face(&face_model, kind)?.evaluate(&nf.form)?),
            None => "-".into(),
        };
        println!(
            "{:<14} p={} i={} degree {} class {:<20} face value {value}",
            format!("{:?}", nf.name),
            nf.params.p.map_or("-".into(), |p| p.to_string()),
            nf.params.i.map_or("-".into(), |i| i.to_string()),
            nf.degree(),
            format!("{:?}", nf.effective_face_class()),
        );
    }
    let entry = catalog::theta(&m, 1)?.entry();
    println!("{}", serde_json::to_string(&entry)?.chars().take(120).collect::<String>());
    Ok(())
}
