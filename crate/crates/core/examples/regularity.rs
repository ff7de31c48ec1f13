//! Continuity of c -> T̄(cF) and a finite certificate that the Weyl
//! operators have a trivial commutant on the tracked subspace.

use dynalg::functionals::{Functional, Potential, PotentialTerm};
use dynalg::schrep::{build_rep, commutant_certificate, regularity_probe, RepConfig};
use dynalg::timeaxis::{make_bump, TimeGrid};

fn main() -> dynalg::Result<()> {
    let grid = TimeGrid::default();
    let rep = build_rep(&RepConfig::default())?;
    let weight = make_bump(&grid, 0.0, 0.5, 1.0)?;
    let f = Functional::linear(make_bump(&grid, 0.3, 0.6, 0.4)?)
        .with_potential(PotentialTerm::new(weight, Potential::gaussian(0.2, vec![0.0], 1.0)?)?)?;

    let r = regularity_probe(&rep, &f, &[1.0, 1.08, 1.04, 1.02, 1.01])?;
    for (s, d) in r.separations.iter().zip(&r.differences) {
        println!("|c - 1| = {s:.2}: {d:.3e}");
    }
    println!("log-log slope {:?}", r.slope);

    let set = [(vec![0.8], vec![0.0]), (vec![0.0], vec![0.8]), (vec![0.6], vec![0.6])];
    let cert = commutant_certificate(&rep, &set, 1e-6, 1e-4)?;
    println!(
        "commutant: smallest {:.1e}, gap {:.3}, distance to scalars <= {:.1e}, pass {}",
        cert.smallest, cert.gap, cert.bound, cert.pass
    );
    Ok(())
}
