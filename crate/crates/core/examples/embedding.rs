//! Embedding an interacting Lagrangean through a chain of cutoffs.

use dynalg::embedding::{cocycle_u, gamma, s_chi, CutoffChain};
use dynalg::functionals::{Functional, Lagrangean, Potential, PotentialTerm};
use dynalg::groupalg::GroupWord;
use dynalg::schrep::{build_rep, represent, RepConfig};
use dynalg::timeaxis::{make_bump, TimeGrid};

fn main() -> dynalg::Result<()> {
    let grid = TimeGrid::default();
    let rep = build_rep(&RepConfig::default())?;
    let lag = Lagrangean::interacting(Potential::gaussian(0.12, vec![0.3], 1.0)?);
    let chain = CutoffChain::standard(grid, 1, lag.clone())?;
    println!("depth {}, coupling budget {:.3}", chain.depth(), chain.coupling_budget());
    for n in 1..=chain.depth() {
        let l = chain.level(n)?;
        println!("  level {n}: inner {:?}, outer {:?}", l.inner, l.outer);
    }

    let weight = make_bump(&grid, 0.1, 0.35, 1.0)?;
    let f = Functional::zero(grid, 1)
        .with_potential(PotentialTerm::new(weight, Potential::sech_squared(-0.2, vec![0.0], 1.1)?)?)?;

    let (c1, c2) = (chain.cutoff(1)?, chain.cutoff(2)?);
    let u = cocycle_u(c1, c2, &lag, 1)?;
    let lhs = u.multiply(&s_chi(&f, c1, &lag)?)?.multiply(&u.inverse())?;
    let rhs = s_chi(&f, c2, &lag)?;
    println!("U S_1(F) U^-1 vs S_2(F): {:.2e}", represent(&rep, &lhs)?.distance(&represent(&rep, &rhs)?));

    let w = GroupWord::generator(lag.clone(), f);
    let images = (1..=3).map(|n| represent(&rep, &gamma(&w, &chain, n)?)).collect::<dynalg::Result<Vec<_>>>()?;
    for n in 1..3 {
        println!("gamma at depth {} vs {}: {:.2e}", n, n + 1, images[n - 1].distance(&images[n]));
    }
    Ok(())
}
