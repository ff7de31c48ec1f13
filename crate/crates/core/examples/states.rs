//! Vector states of the representation: transition probabilities of Weyl
//! elements and steering the ground state toward a band of levels.

use dynalg::functionals::{Functional, Lagrangean};
use dynalg::groupalg::{moments, GroupWord};
use dynalg::schrep::{build_rep, RepConfig};
use dynalg::states::{expectation, projection_search, transition_probability, VectorState};
use dynalg::timeaxis::{make_bump, TimeGrid};

fn main() -> dynalg::Result<()> {
    let grid = TimeGrid::default();
    let rep = build_rep(&RepConfig::default())?;
    let ground = VectorState::ground(&rep)?;

    for amp in [0.2, 0.5, 1.0] {
        let f = make_bump(&grid, 0.4, 0.5, amp)?;
        let (a, b) = moments(&f);
        let w = GroupWord::generator(Lagrangean::free(), Functional::linear(f));
        let p = transition_probability(&ground, &w, &rep)?;
        let expected = (-(a[0] * a[0] + b[0] * b[0]) / 2.0).exp();
        println!("a = {:+.3}, b = {:+.3}: p = {p:.8}, gaussian {expected:.8}", a[0], b[0]);
    }

    let coherent = VectorState::coherent(&rep, &[0.8], &[-0.3])?;
    let (x, p) = coherent.center(&rep);
    println!("coherent state centered at x = {:.4}, p = {:.4}", x[0], p[0]);
    let f = make_bump(&grid, 0.0, 0.6, 0.3)?;
    let w = GroupWord::generator(Lagrangean::free(), Functional::linear(f));
    println!("<S> in the coherent state: {:.6}", expectation(&coherent, &w, &rep)?);

    let lattice: Vec<f64> = (-8..=8).map(|k| k as f64 * 0.5).collect();
    let search = projection_search(&rep, &ground, (4, 12), &lattice)?;
    println!(
        "best Weyl steer into levels 4..12: a = {:?}, b = {:?}, weight outside {:.3}",
        search.best_a, search.best_b, search.epsilon
    );
    Ok(())
}
