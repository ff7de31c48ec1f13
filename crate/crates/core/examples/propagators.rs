//! Green functions of K = -d²/dt² on a bump, and the commutator function
//! applied to a loop.

use dynalg::propagators::{apply_k_orbit, apply_propagator, pairing, KernelKind};
use dynalg::timeaxis::{make_bump, TimeGrid};

fn main() -> dynalg::Result<()> {
    let grid = TimeGrid::default();
    let f = make_bump(&grid, 0.5, 2.5, 0.8)?;
    let g = make_bump(&grid, -1.0, 2.0, -0.4)?;

    for kind in KernelKind::ALL {
        let x = apply_propagator(kind, &f)?;
        let back = apply_k_orbit(&x);
        let target = if kind == KernelKind::Commutator { f.scale(0.0) } else { f.clone() };
        println!(
            "{kind:?}: x(-8) = {:+.4}, x(8) = {:+.4}, |K x - target| = {:.2e}",
            x.at(0, -8.0),
            x.at(0, 8.0),
            back.try_sub(&target)?.sup_norm()
        );
    }

    // The retarded solution vanishes before the source; the advanced one after it.
    let r = apply_propagator(KernelKind::Retarded, &f)?;
    let a = apply_propagator(KernelKind::Advanced, &f)?;
    println!("retarded before support: {:.1e}", r.at(0, -5.0).abs());
    println!("advanced after support:  {:.1e}", a.at(0, 5.0).abs());

    let sigma = pairing(&f, KernelKind::Commutator, &g)?;
    println!("<f, Delta g> = {sigma:.6}");
    Ok(())
}
