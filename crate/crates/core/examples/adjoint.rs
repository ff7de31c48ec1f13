//! Conjugating T(F) by a Weyl operator shifts F along Δf₀, and T̄ is
//! invariant under the dynamical relation.

use dynalg::functionals::{Functional, Lagrangean, Potential, PotentialTerm};
use dynalg::groupalg::cutoff_for_loop;
use dynalg::propagators::{apply_propagator, KernelKind};
use dynalg::schrep::{build_rep, dyson_chain, dyson_t, tbar, weyl_factor, OperatorChain, RepConfig};
use dynalg::timeaxis::{make_bump, TimeGrid};

fn main() -> dynalg::Result<()> {
    let grid = TimeGrid::default();
    let rep = build_rep(&RepConfig::default())?;
    let weight = make_bump(&grid, 0.2, 0.5, 1.0)?;
    let f = Functional::zero(grid, 1)
        .with_potential(PotentialTerm::new(weight, Potential::gaussian(0.25, vec![-0.3], 1.0)?)?)?;
    let f0 = make_bump(&grid, -0.2, 0.6, 0.4)?;

    let w = OperatorChain::single(weyl_factor(&f0));
    let lhs = rep.realize(&w.clone().then(&dyson_chain(&f)?).then(&w.inverse()?))?;
    let shifted = f.shift_orbit(&apply_propagator(KernelKind::Commutator, &f0)?)?;
    let rhs = dyson_t(&rep, &shifted.without_constant())?;
    println!("W T(F) W^-1 vs T(F shifted): {:.2e}", lhs.distance(&rhs));

    let x0 = make_bump(&grid, 0.0, 0.6, 0.3)?;
    let moved = f
        .shift(&x0)?
        .try_add(&Lagrangean::free().relative_action(&x0, &cutoff_for_loop(&x0)?)?)?;
    let (a, b) = (tbar(&rep, &moved)?, tbar(&rep, &f)?);
    println!("Tbar dynamical relation: {:.2e} (leakage {:.1e})", a.distance(&b), a.leakage() + b.leakage());
    Ok(())
}
