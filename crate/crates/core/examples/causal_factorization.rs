//! S(F₁+F₂+F₃) = S(F₁+F₃) S(F₃)⁻¹ S(F₂+F₃) when F₁ lies after F₂.

use dynalg::functionals::{Functional, Lagrangean, Potential, PotentialTerm};
use dynalg::groupalg::causal_factorize;
use dynalg::schrep::{build_rep, represent, RepConfig};
use dynalg::timeaxis::{make_bump, TimeGrid};

fn main() -> dynalg::Result<()> {
    let grid = TimeGrid::default();
    let rep = build_rep(&RepConfig::default())?;
    let term = |c: f64, v: f64| -> dynalg::Result<Functional> {
        let weight = make_bump(&grid, c, 0.4, 1.0)?;
        Functional::zero(grid, 1).with_potential(PotentialTerm::new(weight, Potential::gaussian(v, vec![0.2], 1.0)?)?)
    };
    let f1 = term(0.9, 0.25)?;
    let f2 = term(-0.9, -0.2)?;
    let f3 = term(0.0, 0.15)?.try_add(&Functional::linear(make_bump(&grid, 0.1, 0.8, 0.3)?))?;

    let (lhs, rhs) = causal_factorize(&f1, &f2, &f3, &Lagrangean::free())?;
    let (a, b) = (represent(&rep, &lhs)?, represent(&rep, &rhs)?);
    println!("distance {:.2e}, leakage {:.1e}", a.distance(&b), a.leakage() + b.leakage());

    // Reversed order is refused.
    match causal_factorize(&f2, &f1, &f3, &Lagrangean::free()) {
        Err(e) => println!("reversed supports: {e}"),
        Ok(_) => println!("reversed supports accepted"),
    }
    Ok(())
}
