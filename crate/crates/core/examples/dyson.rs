//! Time-ordered exponentials: Dyson partial sums against the split-step
//! propagator, and the linear case against its closed form.

use dynalg::functionals::{Functional, Potential, PotentialTerm};
use dynalg::schrep::{
    build_rep, dyson_series, dyson_t, tordered_linear, tordered_linear_ode, RepConfig,
};
use dynalg::timeaxis::{make_bump, TimeGrid};

fn main() -> dynalg::Result<()> {
    let grid = TimeGrid::default();
    let rep = build_rep(&RepConfig::default())?;

    let weight = make_bump(&grid, 0.0, 0.8, 1.0)?;
    let f = Functional::zero(grid, 1)
        .with_potential(PotentialTerm::new(weight, Potential::sech_squared(0.3, vec![0.0], 1.2)?)?)?;
    let exact = dyson_t(&rep, &f)?;
    let terms = dyson_series(&rep, &f, 4)?;
    let mut partial = terms[0].clone();
    for (n, t) in terms.iter().enumerate().skip(1) {
        partial = partial.add(t);
        println!("order {n}: |sum - T(F)| = {:.2e}", partial.distance(&exact));
    }

    let f0 = make_bump(&grid, 0.2, 0.7, 0.5)?;
    let closed = tordered_linear(&rep, &f0)?;
    let ode = tordered_linear_ode(&rep, &f0)?;
    println!("linear: closed form vs ODE {:.2e}", closed.distance(&ode));
    Ok(())
}
