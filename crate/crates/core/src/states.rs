//! Vector states on the represented algebra and the operations acting on them.

use num_complex::Complex64 as C;

use crate::error::{Error, Result};
use crate::groupalg::GroupWord;
use crate::schrep::{represent_chain, RepSpace};

/// Normalization must hold to this accuracy.
pub const NORM_TOLERANCE: f64 = 1e-10;
/// Largest allowed amplitude on the box edge.
pub const EDGE_LIMIT: f64 = 1e-8;
/// Operations losing more norm than this are rejected.
pub const LEAKAGE_LIMIT: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct VectorState {
    psi: Vec<C>,
    label: String,
}

impl VectorState {
    /// Normalizes `psi` and checks that it vanishes on the box edge.
    pub fn new(rep: &RepSpace, psi: Vec<C>, label: impl Into<String>) -> Result<Self> {
        if psi.len() != rep.len() {
            return Err(Error::Argument(format!(
                "state has {} amplitudes, grid has {}",
                psi.len(),
                rep.len()
            )));
        }
        let n = rep.norm(&psi);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Argument("cannot normalize a zero state".into()));
        }
        let psi: Vec<C> = psi.into_iter().map(|z| z / n).collect();
        let edge = rep.edge_amplitude(&psi);
        if edge > EDGE_LIMIT {
            return Err(Error::Leakage {
                leakage: edge,
                limit: EDGE_LIMIT,
            });
        }
        Ok(VectorState {
            psi,
            label: label.into(),
        })
    }

    pub fn amplitudes(&self) -> &[C] {
        &self.psi
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Oscillator ground state.
    pub fn ground(rep: &RepSpace) -> Result<Self> {
        VectorState::excited(rep, 0)
    }

    /// The `n`-th tracked oscillator eigenstate, in energy order.
    pub fn excited(rep: &RepSpace, n: usize) -> Result<Self> {
        let psi = rep
            .tracked()
            .get(n)
            .ok_or_else(|| Error::Range(format!("only {} tracked states", rep.k_track())))?
            .clone();
        VectorState::new(rep, psi, format!("hermite({n})"))
    }

    /// Gaussian of unit width centered at `x0` with mean momentum `p0`.
    pub fn coherent(rep: &RepSpace, x0: &[f64], p0: &[f64]) -> Result<Self> {
        check_len(rep, x0)?;
        check_len(rep, p0)?;
        let psi = rep.sample(|x| coherent_amplitude(x, x0, p0));
        VectorState::new(rep, psi, format!("coherent({x0:?}, {p0:?})"))
    }

    /// `c₁·coherent(x₁, p₁) + c₂·coherent(x₂, p₂)`, normalized.
    pub fn superposition(
        rep: &RepSpace,
        first: (&[f64], &[f64], C),
        second: (&[f64], &[f64], C),
    ) -> Result<Self> {
        for v in [first.0, first.1, second.0, second.1] {
            check_len(rep, v)?;
        }
        let psi = rep.sample(|x| {
            first.2 * coherent_amplitude(x, first.0, first.1)
                + second.2 * coherent_amplitude(x, second.0, second.1)
        });
        VectorState::new(rep, psi, "superposition")
    }

    /// `(⟨Q_c⟩, ⟨P_c⟩)` for every component.
    pub fn center(&self, rep: &RepSpace) -> (Vec<f64>, Vec<f64>) {
        (0..rep.dim())
            .map(|c| {
                let q = rep.inner(&self.psi, &rep.apply_position(c, &self.psi)).re;
                let p = rep.inner(&self.psi, &rep.apply_momentum(c, &self.psi)).re;
                (q, p)
            })
            .unzip()
    }
}

fn check_len(rep: &RepSpace, v: &[f64]) -> Result<()> {
    if v.len() != rep.dim() {
        return Err(Error::Argument(format!(
            "expected {} components, got {}",
            rep.dim(),
            v.len()
        )));
    }
    Ok(())
}

fn coherent_amplitude(x: &[f64], x0: &[f64], p0: &[f64]) -> C {
    let mut exponent = C::new(0.0, 0.0);
    for ((xi, ci), pi) in x.iter().zip(x0).zip(p0) {
        exponent += C::new(-0.5 * (xi - ci).powi(2), pi * xi);
    }
    exponent.exp()
}

/// `π(w)ψ` together with the lost norm.
fn image(rep: &RepSpace, state: &VectorState, w: &GroupWord) -> Result<(Vec<C>, f64)> {
    if w.dim() != rep.dim() {
        return Err(Error::Argument("word and representation differ in dimension".into()));
    }
    let v = rep.apply_chain(&represent_chain(w)?, &state.psi)?;
    let leakage = (1.0 - rep.norm(&v)).abs().max(rep.layer_norm(&v));
    Ok((v, leakage))
}

/// `ω(S) = ⟨ψ, π(S)ψ⟩`.
pub fn expectation(state: &VectorState, w: &GroupWord, rep: &RepSpace) -> Result<C> {
    let (v, _) = image(rep, state, w)?;
    Ok(rep.inner(&state.psi, &v))
}

/// The state vector of `ω_S = ω ∘ Ad S⁻¹`, i.e. `π(S)ψ` renormalized,
/// together with the norm lost on the way.
pub fn apply_operation(state: &VectorState, w: &GroupWord, rep: &RepSpace) -> Result<(VectorState, f64)> {
    let (v, leakage) = image(rep, state, w)?;
    if leakage > LEAKAGE_LIMIT {
        return Err(Error::Leakage {
            leakage,
            limit: LEAKAGE_LIMIT,
        });
    }
    let n = rep.norm(&v);
    let psi = v.into_iter().map(|z| z / n).collect();
    let label = format!("S·{}", state.label);
    Ok((VectorState { psi, label }, leakage))
}

/// `|ω(S)|²`.
pub fn transition_probability(state: &VectorState, w: &GroupWord, rep: &RepSpace) -> Result<f64> {
    Ok(expectation(state, w, rep)?.norm_sqr())
}

/// Largest deviation between `ω_S(A)` and `ω(S⁻¹ A S)` over a battery of words.
pub fn adjoint_battery(
    state: &VectorState,
    s: &GroupWord,
    battery: &[GroupWord],
    rep: &RepSpace,
) -> Result<f64> {
    let (moved, _) = apply_operation(state, s, rep)?;
    let s_inv = s.inverse();
    let mut worst = 0.0f64;
    for a in battery {
        let lhs = expectation(&moved, a, rep)?;
        let conj = s_inv.multiply(a)?.multiply(s)?;
        let rhs = expectation(state, &conj, rep)?;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// Outcome of the projection search.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionSearch {
    pub rank: usize,
    pub best_a: Vec<f64>,
    pub best_b: Vec<f64>,
    /// `ω_S(1 - E)` at the best lattice point.
    pub epsilon: f64,
}

/// Finite illustration of steering a state into a subspace: scan Weyl
/// operators `W(a, b)` over a lattice and minimize the weight of
/// `W(a, b)ψ` outside the span of the tracked states `[lo, hi)`.
/// Only one component is displaced.
pub fn projection_search(
    rep: &RepSpace,
    state: &VectorState,
    range: (usize, usize),
    lattice: &[f64],
) -> Result<ProjectionSearch> {
    let (lo, hi) = range;
    if !(lo < hi && hi <= rep.k_track()) {
        return Err(Error::Argument(format!(
            "projection range {lo}..{hi} must lie in 0..{}",
            rep.k_track()
        )));
    }
    let basis = &rep.tracked()[lo..hi];
    let d = rep.dim();
    let mut best = ProjectionSearch {
        rank: hi - lo,
        best_a: vec![0.0; d],
        best_b: vec![0.0; d],
        epsilon: f64::INFINITY,
    };
    for &a in lattice {
        for &b in lattice {
            let mut av = vec![0.0; d];
            let mut bv = vec![0.0; d];
            av[0] = a;
            bv[0] = b;
            let mut psi = state.psi.clone();
            rep.apply_weyl(&mut psi, &av, &bv);
            let inside: f64 = basis.iter().map(|e| rep.inner(e, &psi).norm_sqr()).sum();
            let eps = (1.0 - inside).max(0.0);
            if eps < best.epsilon {
                best = ProjectionSearch {
                    rank: hi - lo,
                    best_a: av,
                    best_b: bv,
                    epsilon: eps,
                };
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{Functional, Lagrangean, Potential, PotentialTerm};
    use crate::groupalg::moments;
    use crate::schrep::{build_rep, RepConfig};
    use crate::timeaxis::{make_bump, TimeGrid};
    use std::sync::OnceLock;

    fn rep() -> &'static RepSpace {
        static REP: OnceLock<RepSpace> = OnceLock::new();
        REP.get_or_init(|| build_rep(&RepConfig::default()).unwrap())
    }

    fn grid() -> TimeGrid {
        TimeGrid::default()
    }

    fn weyl_word(center: f64, amp: f64) -> GroupWord {
        let f = make_bump(&grid(), center, 0.6, amp).unwrap();
        GroupWord::generator(Lagrangean::free(), Functional::linear(f))
    }

    fn one() -> GroupWord {
        GroupWord::identity(Lagrangean::free(), grid(), 1)
    }

    #[test]
    fn catalog_is_normalized() {
        let r = rep();
        let states = [
            VectorState::ground(r).unwrap(),
            VectorState::excited(r, 5).unwrap(),
            VectorState::coherent(r, &[1.0], &[-0.5]).unwrap(),
            VectorState::superposition(
                r,
                (&[-1.5], &[0.0], C::new(1.0, 0.0)),
                (&[1.5], &[0.3], C::new(0.0, 1.0)),
            )
            .unwrap(),
        ];
        for s in &states {
            assert!((r.norm(s.amplitudes()) - 1.0).abs() < NORM_TOLERANCE);
        }
        let (q, p) = states[2].center(r);
        assert!((q[0] - 1.0).abs() < 1e-10 && (p[0] + 0.5).abs() < 1e-10);
        assert!(VectorState::coherent(r, &[11.0], &[0.0]).is_err());
    }

    #[test]
    fn identity_word() {
        let r = rep();
        let s = VectorState::coherent(r, &[0.4], &[0.2]).unwrap();
        assert!((expectation(&s, &one(), r).unwrap() - 1.0).norm() < 1e-12);
        assert!((transition_probability(&s, &one(), r).unwrap() - 1.0).abs() < 1e-12);
        let (same, leak) = apply_operation(&s, &one(), r).unwrap();
        assert!(leak < 1e-12);
        let diff = same
            .amplitudes()
            .iter()
            .zip(s.amplitudes())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12);
    }

    #[test]
    fn weyl_on_ground_state() {
        let r = rep();
        let g = VectorState::ground(r).unwrap();
        let w = weyl_word(0.3, 0.8);
        let (a, b) = moments(&make_bump(&grid(), 0.3, 0.6, 0.8).unwrap());
        let p = transition_probability(&g, &w, r).unwrap();
        assert!((p - (-(a[0] * a[0] + b[0] * b[0]) / 2.0).exp()).abs() < 1e-6);
        let (moved, _) = apply_operation(&g, &w, r).unwrap();
        let (q, mom) = moved.center(r);
        assert!((q[0] + b[0]).abs() < 1e-5 && (mom[0] - a[0]).abs() < 1e-5);
        let back = apply_operation(&moved, &w.inverse(), r).unwrap().0;
        let diff = back
            .amplitudes()
            .iter()
            .zip(g.amplitudes())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff < 1e-6);
    }

    #[test]
    fn central_phase_and_inverse_symmetry() {
        let r = rep();
        let s = VectorState::excited(r, 2).unwrap();
        let w = weyl_word(-0.2, 0.6);
        let h = GroupWord::scalar(Lagrangean::free(), grid(), 1, 0.9);
        let p = transition_probability(&s, &w, r).unwrap();
        let ph = transition_probability(&s, &w.multiply(&h).unwrap(), r).unwrap();
        let pi = transition_probability(&s, &w.inverse(), r).unwrap();
        assert!((p - ph).abs() < 1e-10);
        assert!((p - pi).abs() < 1e-9);
        assert!(p <= 1.0 + 1e-9);
    }

    #[test]
    fn operations_act_by_conjugation() {
        let r = rep();
        let psi = VectorState::coherent(r, &[0.5], &[0.0]).unwrap();
        let weight = make_bump(&grid(), 0.0, 0.5, 1.0).unwrap();
        let bounded = Functional::zero(grid(), 1)
            .with_potential(
                PotentialTerm::new(weight, Potential::gaussian(0.2, vec![0.0], 1.0).unwrap())
                    .unwrap(),
            )
            .unwrap();
        let s = GroupWord::generator(Lagrangean::free(), bounded);
        let battery = [one(), weyl_word(0.0, 0.7), weyl_word(0.5, -0.4)];
        assert!(adjoint_battery(&psi, &s, &battery, r).unwrap() < 1e-6);
    }

    #[test]
    fn projection_search_reports_best_point() {
        let r = rep();
        let g = VectorState::ground(r).unwrap();
        let lattice: Vec<f64> = (0..=12).map(|k| 0.5 * k as f64).collect();
        let res = projection_search(r, &g, (12, 24), &lattice).unwrap();
        assert_eq!(res.rank, 12);
        assert!(res.epsilon < 0.5, "{res:?}");
        assert!(projection_search(r, &g, (3, 30), &lattice).is_err());
    }
}
