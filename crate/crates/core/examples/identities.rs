//! Exact wedge identities behind the catalogue normalizations.

use hkcalib::catalog::{self, IDENTITY_TOL};
use hkcalib::quaternionic::QuaternionicModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for n in 1..=3 {
        let m = QuaternionicModel::new(n)?;
        let mut checks = vec![catalog::lemma_holomorphic_volume(&m)?, catalog::lemma_quartic_power(&m)?];
        for k in 0..=n {
            checks.push(catalog::lemma_coisotropic_volume(&m, k)?);
        }
        for c in checks {
            let k = c.k.map(|k| format!(" k={k}")).unwrap_or_default();
            let verdict = if c.passes(IDENTITY_TOL) { "ok" } else { "FAILED" };
            println!(
                "n={n}{k:<5} {:<20} measured {:>8} expected {:>8} residual {:.1e} {verdict}",
                c.name, c.measured, c.expected, c.residual
            );
        }
    }
    for p in 1..=4 {
        println!("c_{p} = {}", catalog::c_constant(p));
    }
    Ok(())
}
