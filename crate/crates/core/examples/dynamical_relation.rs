//! Shifting a letter along a loop x₀ and adding the relative action leaves
//! the element unchanged.

use dynalg::functionals::{Functional, Lagrangean, Potential};
use dynalg::groupalg::{cutoff_for_loop, letter_normal_form, reduce_dynamical, weyl_normal_form, GroupWord};
use dynalg::timeaxis::{make_bump, Orbit, TimeGrid};

fn main() -> dynalg::Result<()> {
    let grid = TimeGrid::default();
    let x0 = make_bump(&grid, 0.3, 2.5, 0.7)?;
    let g = make_bump(&grid, -0.5, 2.2, 0.4)?;

    let w = GroupWord::generator(Lagrangean::free(), Functional::linear(g));
    let moved = reduce_dynamical(&w, &x0, 0)?;
    println!("before: {}", weyl_normal_form(&w)?);
    println!("after:  {}", weyl_normal_form(&moved)?);

    // The free relative action alone is the identity.
    let rel = Lagrangean::free().relative_action(&x0, &cutoff_for_loop(&x0)?)?;
    println!("free relative action: {}", letter_normal_form(&rel)?);

    // With an interaction the relative action carries a potential term.
    let lag = Lagrangean::interacting(Potential::gaussian(0.2, vec![0.0], 1.0)?);
    let rel = lag.relative_action(&x0, &cutoff_for_loop(&x0)?)?;
    println!(
        "interacting relative action: {} potential terms, value on x = 0: {:.6}",
        rel.potentials().len(),
        rel.evaluate(&Orbit::zero(grid, 1))?
    );
    Ok(())
}
