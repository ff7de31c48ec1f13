//! Reduce words of linear letters to `e^{iθ} exp(i(aQ + bP))` and compare
//! with the represented operator.

use dynalg::functionals::{Functional, Lagrangean};
use dynalg::groupalg::{moments, weyl_normal_form, GroupWord};
use dynalg::schrep::{build_rep, represent, weyl_operator_dense, RepConfig};
use dynalg::timeaxis::{make_bump, TimeGrid};
use num_complex::Complex64;

fn main() -> dynalg::Result<()> {
    let grid = TimeGrid::default();
    let rep = build_rep(&RepConfig::default())?;
    let s = |c: f64, a: f64| -> dynalg::Result<GroupWord> {
        let f = make_bump(&grid, c, 0.7, a)?;
        Ok(GroupWord::generator(Lagrangean::free(), Functional::linear(f)))
    };
    let (u, v) = (s(-0.4, 0.5)?, s(0.6, -0.3)?);

    let words = [
        ("S(f)", u.clone()),
        ("S(f) S(g)", u.multiply(&v)?),
        ("S(f) S(g) S(f)^-1 S(g)^-1", u.multiply(&v)?.multiply(&u.inverse())?.multiply(&v.inverse())?),
    ];
    for (name, w) in &words {
        let nf = weyl_normal_form(w)?;
        let closed = weyl_operator_dense(&rep, nf.a[0], nf.b[0])?
            .scaled(Complex64::from_polar(1.0, nf.phase));
        println!(
            "{name:<28} {nf}\n{:<28} represented vs closed form {:.2e}",
            "",
            represent(&rep, w)?.distance(&closed)
        );
    }
    let (a, b) = moments(&make_bump(&grid, -0.4, 0.7, 0.5)?);
    println!("moments of f: a = {:.6}, b = {:.6}", a[0], b[0]);
    Ok(())
}
