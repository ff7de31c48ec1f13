use super::*;
use crate::functionals::{Lagrangean, Potential};
use crate::groupalg::symplectic_form;
use crate::propagators::apply_k;
use crate::timeaxis::make_bump;
use std::sync::OnceLock;

fn rep() -> &'static RepSpace {
    static REP: OnceLock<RepSpace> = OnceLock::new();
    REP.get_or_init(|| build_rep(&RepConfig::default()).unwrap())
}

fn grid() -> TimeGrid {
    TimeGrid::default()
}

fn bounded(center: f64, width: f64, v: f64) -> Functional {
    let g = make_bump(&grid(), center, width, 1.0).unwrap();
    let pot = Potential::gaussian(v, vec![0.4], 1.2).unwrap();
    Functional::zero(grid(), 1)
        .with_potential(PotentialTerm::new(g, pot).unwrap())
        .unwrap()
}

#[test]
fn default_diagnostics() {
    let d = rep().diagnostics();
    assert!(d.ccr_defect < 1e-8, "{d:?}");
    assert!(d.oscillator_defect < 1e-6, "{d:?}");
    assert!(d.unitarity_defect < 1e-10, "{d:?}");
    assert!(d.edge_amplitude < 1e-10, "{d:?}");
    assert!(d.boundary_leakage < 1e-9, "{d:?}");
    assert!(d.horizon > 0.0);
}

#[test]
fn box_too_small_is_reported() {
    let cfg = RepConfig {
        x_min: -4.0,
        x_max: 4.0,
        n_x: 64,
        ..RepConfig::default()
    };
    assert!(matches!(build_rep(&cfg), Err(Error::RepConfig { .. })));
    let cfg = RepConfig {
        n_x: 100,
        ..RepConfig::default()
    };
    assert!(matches!(build_rep(&cfg), Err(Error::Argument(_))));
}

#[test]
fn heisenberg_position() {
    let r = rep();
    let q = r.realize(&OperatorChain::single(Factor::Position(0))).unwrap();
    assert!(heisenberg_q(r, 0, 0.0).unwrap().distance(&q) < 1e-12);
    let t = r.horizon();
    let qt = heisenberg_q(r, 0, t).unwrap();
    let p = r.realize(&OperatorChain::single(Factor::Momentum(0))).unwrap();
    let expected = q.add(&p.scaled(C::new(t, 0.0)));
    assert!(qt.distance(&expected) < 1e-6);
    assert!(matches!(heisenberg_q(r, 0, t + 0.5), Err(Error::Range(_))));
}

#[test]
fn weyl_of_k_image_is_identity() {
    let r = rep();
    let x0 = make_bump(&grid(), 0.2, 2.5, 0.8).unwrap();
    let w = weyl_operator(r, &apply_k(&x0).unwrap()).unwrap();
    assert!(w.error(&r.identity()) < 1e-7);
}

#[test]
fn weyl_relation_phase() {
    let r = rep();
    let f = make_bump(&grid(), 0.5, 1.0, 0.6).unwrap();
    let g = make_bump(&grid(), -0.7, 0.8, -0.5).unwrap();
    let (af, bf) = moments(&f);
    let (ag, bg) = moments(&g);
    let sigma = symplectic_form(&af, &bf, &ag, &bg);
    let lhs = OperatorChain::single(weyl_factor(&f))
        .times(weyl_factor(&g))
        .then(&OperatorChain::single(weyl_factor(&(&f + &g))).inverse().unwrap());
    let lhs = r.realize(&lhs).unwrap();
    let rhs = r.identity().scaled(C::from_polar(1.0, -0.5 * sigma));
    assert!(lhs.error(&rhs) < 1e-6);
}

#[test]
fn coherent_overlap() {
    let r = rep();
    for (a, b) in [(0.5, 0.0), (0.0, -1.0), (1.2, 0.7)] {
        let mut psi = r.tracked()[0].clone();
        r.apply_weyl(&mut psi, &[a], &[b]);
        let overlap = r.inner(&r.tracked()[0], &psi).norm();
        assert!((overlap - (-(a * a + b * b) / 4.0f64).exp()).abs() < 1e-6);
    }
}

#[test]
fn split_formula_matches_eigendecomposition() {
    let r = rep();
    let (a, b) = (0.9, -1.3);
    let split = r
        .realize(&OperatorChain::single(Factor::Weyl {
            a: vec![a],
            b: vec![b],
        }))
        .unwrap();
    let dense = weyl_operator_dense(r, a, b).unwrap();
    // Both sides leak identically, so compare columns only.
    assert!(split.distance(&dense) < 1e-8, "{}", split.distance(&dense));
}

#[test]
fn dyson_trivial_cases() {
    let r = rep();
    let zero = Functional::zero(grid(), 1);
    assert!(dyson_t(r, &zero).unwrap().distance(&r.identity()) == 0.0);
    let h = Functional::constant(grid(), 1, 0.8);
    let e = r.identity().scaled(C::from_polar(1.0, 0.8));
    assert!(dyson_t(r, &h).unwrap().distance(&e) < 1e-8);
    let lin = Functional::linear(make_bump(&grid(), 0.0, 1.0, 1.0).unwrap());
    assert!(matches!(dyson_t(r, &lin), Err(Error::Precondition(_))));
}

#[test]
fn dyson_is_unitary_and_matches_series() {
    let r = rep();
    let f = bounded(0.0, 1.0, 0.15);
    let t = dyson_t(r, &f).unwrap();
    assert!(t.unitarity_defect(r) < 1e-7);
    let series = dyson_series(r, &f, 3).unwrap();
    let sum = series.iter().skip(1).fold(series[0].clone(), |acc, s| acc.add(s));
    // Fourth-order remainder of a weak coupling.
    assert!(t.distance(&sum) < 1e-4, "{}", t.distance(&sum));
}

#[test]
fn inverse_dyson_factor() {
    let r = rep();
    let f = bounded(0.3, 0.8, 0.3);
    let chain = dyson_chain(&f).unwrap();
    let both = chain.clone().then(&chain.inverse().unwrap());
    assert!(r.realize(&both).unwrap().distance(&r.identity()) < 1e-8);
}

#[test]
fn linear_ode_matches_closed_form() {
    let r = rep();
    let f0 = make_bump(&grid(), 0.3, 1.0, 0.7).unwrap();
    let ode = tordered_linear_ode(r, &f0).unwrap();
    let closed = tordered_linear(r, &f0).unwrap();
    assert!(ode.error(&closed) < 1e-5, "{}", ode.distance(&closed));
}

#[test]
fn tbar_reduces_to_parts() {
    let r = rep();
    let fb = bounded(0.0, 0.8, 0.2);
    assert_eq!(tbar(r, &fb).unwrap(), dyson_t(r, &fb).unwrap());
    let f0 = make_bump(&grid(), 0.0, 1.0, 0.5).unwrap();
    let lin = Functional::linear(f0.clone());
    assert_eq!(tbar(r, &lin).unwrap(), tordered_linear(r, &f0).unwrap());
}

#[test]
fn represent_identity_and_interacting_rejected() {
    let r = rep();
    let one = GroupWord::identity(Lagrangean::free(), grid(), 1);
    assert_eq!(represent(r, &one).unwrap(), r.identity());
    let v = Potential::gaussian(0.1, vec![0.0], 1.0).unwrap();
    let w = GroupWord::generator(Lagrangean::interacting(v), bounded(0.0, 1.0, 0.1));
    assert!(matches!(represent(r, &w), Err(Error::Precondition(_))));
}

#[test]
fn regularity_of_zero_and_linear() {
    let r = rep();
    let zero = Functional::zero(grid(), 1);
    let rep0 = regularity_probe(r, &zero, &[1.0, 1.1, 1.01]).unwrap();
    assert!(rep0.pass && rep0.slope.is_none());
    let lin = Functional::linear(make_bump(&grid(), 0.0, 1.0, 0.5).unwrap());
    let rep1 = regularity_probe(r, &lin, &[1.0, 1.08, 1.04, 1.02, 1.01]).unwrap();
    assert!(rep1.pass, "{rep1:?}");
}

#[test]
fn log_slope_of_power_law() {
    let pts: Vec<(f64, f64)> = [0.1f64, 0.2, 0.4]
        .iter()
        .map(|x| (x.ln(), (3.0 * x * x).ln()))
        .collect();
    assert!((log_slope(&pts).unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn two_dimensional_basics() {
    let cfg = RepConfig {
        n_x: 64,
        dim: 2,
        k_track: 6,
        ..RepConfig::default()
    };
    let r = build_rep(&cfg).unwrap();
    let d = r.diagnostics();
    assert!(d.ccr_defect < 1e-6 && d.oscillator_defect < 1e-6, "{d:?}");
    let mut psi = r.tracked()[0].clone();
    r.apply_weyl(&mut psi, &[0.4, -0.2], &[0.3, 0.5]);
    let overlap = r.inner(&r.tracked()[0], &psi).norm();
    let expected = (-(0.16 + 0.04 + 0.09 + 0.25) / 4.0f64).exp();
    assert!((overlap - expected).abs() < 1e-6);
}
