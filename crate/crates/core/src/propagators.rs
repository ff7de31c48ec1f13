//! `K = -d²/dt²` and its Green's functions acting on loops.
//!
//! The four kernels are evaluated through the running moments
//! `A(t) = ∫_{-∞}^t f` and `B(t) = ∫_{-∞}^t t' f(t') dt'`, e.g.
//! `(Δ_R f)(t) = B(t) - t A(t)`. Outside the support of `f` every output is
//! exactly affine, and the returned [`Orbit`] carries that continuation.

use crate::error::{Error, Result};
use crate::timeaxis::{
    cumulative_integral, differentiate, integrate_components, second_derivative_orbit, Affine,
    Orbit, SmoothFunction, STENCIL_MARGIN,
};

/// Green's functions of `K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// `Δ_R(t,t') = -Θ(t-t')(t-t')`
    Retarded,
    /// `Δ_A(t,t') = Θ(t'-t)(t-t')`
    Advanced,
    /// `Δ_D = (Δ_R + Δ_A)/2 = -|t-t'|/2`
    Mean,
    /// `Δ = Δ_R - Δ_A = t' - t`
    Commutator,
}

impl KernelKind {
    pub const ALL: [KernelKind; 4] = [
        KernelKind::Retarded,
        KernelKind::Advanced,
        KernelKind::Mean,
        KernelKind::Commutator,
    ];

    /// Pointwise kernel value, with `Θ(0) = 1/2`.
    pub fn kernel(self, t: f64, tp: f64) -> f64 {
        let theta = |x: f64| {
            if x > 0.0 {
                1.0
            } else if x < 0.0 {
                0.0
            } else {
                0.5
            }
        };
        match self {
            KernelKind::Retarded => -theta(t - tp) * (t - tp),
            KernelKind::Advanced => theta(tp - t) * (t - tp),
            KernelKind::Mean => -0.5 * (t - tp).abs(),
            KernelKind::Commutator => tp - t,
        }
    }
}

/// Second argument of [`pairing`]: a propagator, or plain `∫ f g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pairing {
    Identity,
    Kernel(KernelKind),
}

impl From<KernelKind> for Pairing {
    fn from(k: KernelKind) -> Self {
        Pairing::Kernel(k)
    }
}

/// `K f = -f''`.
pub fn apply_k(f: &SmoothFunction) -> Result<SmoothFunction> {
    Ok(differentiate(f, 2)?.scale(-1.0))
}

/// `K` on an orbit with affine tails; the result is compactly supported.
pub fn apply_k_orbit(orbit: &Orbit) -> SmoothFunction {
    second_derivative_orbit(orbit).scale(-1.0)
}

/// Zeroth and first moments `(∫ f, ∫ t f)` per component.
pub(crate) fn moment_pair(f: &SmoothFunction) -> (Vec<f64>, Vec<f64>) {
    let a = integrate_components(f);
    let grid = *f.grid();
    let weighted = SmoothFunction::from_samples_detected(
        grid,
        (0..f.components())
            .map(|c| {
                f.values(c)
                    .iter()
                    .zip(grid.times())
                    .map(|(v, t)| v * t)
                    .collect()
            })
            .collect(),
    );
    let b = integrate_components(&weighted);
    (a, b)
}

fn require_interior(f: &SmoothFunction) -> Result<()> {
    let grid = f.grid();
    if let Some((lo, hi)) = f.support().bounds() {
        let margin = STENCIL_MARGIN as f64 * grid.dt();
        if lo < grid.t_min() + margin - 1e-12 || hi > grid.t_max() - margin + 1e-12 {
            return Err(Error::Range(format!(
                "propagators need a support strictly inside the grid, got [{lo}, {hi}]"
            )));
        }
    }
    Ok(())
}

/// `g(t) = ∫ dt' kernel(t,t') f(t')`, with the exact affine continuation
/// beyond the grid.
pub fn apply_propagator(kind: KernelKind, f: &SmoothFunction) -> Result<Orbit> {
    require_interior(f)?;
    let grid = *f.grid();
    let (a, b) = moment_pair(f);
    let d = f.components();
    let mut values = Vec::with_capacity(d);
    let mut early = Vec::with_capacity(d);
    let mut late = Vec::with_capacity(d);
    for c in 0..d {
        let (ac, bc) = (a[c], b[c]);
        // Δ f = b - t a is independent of the running moments.
        if kind == KernelKind::Commutator {
            values.push(grid.times().map(|t| bc - t * ac).collect());
            let line = Affine {
                slope: -ac,
                intercept: bc,
            };
            early.push(line);
            late.push(line);
            continue;
        }
        let fv = f.values(c);
        let tf: Vec<f64> = fv.iter().zip(grid.times()).map(|(v, t)| v * t).collect();
        let big_a = cumulative_integral(&grid, fv);
        let big_b = cumulative_integral(&grid, &tf);
        let retarded = |i: usize, t: f64| big_b[i] - t * big_a[i];
        let advanced = |i: usize, t: f64| t * (ac - big_a[i]) - (bc - big_b[i]);
        let samples: Vec<f64> = grid
            .times()
            .enumerate()
            .map(|(i, t)| match kind {
                KernelKind::Retarded => retarded(i, t),
                KernelKind::Advanced => advanced(i, t),
                KernelKind::Mean => 0.5 * (retarded(i, t) + advanced(i, t)),
                KernelKind::Commutator => unreachable!(),
            })
            .collect();
        let zero = Affine::default();
        let forward = Affine {
            slope: -ac,
            intercept: bc,
        };
        let backward = Affine {
            slope: ac,
            intercept: -bc,
        };
        let half = |l: Affine| Affine {
            slope: 0.5 * l.slope,
            intercept: 0.5 * l.intercept,
        };
        let (e, l) = match kind {
            KernelKind::Retarded => (zero, forward),
            KernelKind::Advanced => (backward, zero),
            KernelKind::Mean => (half(backward), half(forward)),
            KernelKind::Commutator => unreachable!(),
        };
        values.push(samples);
        early.push(e);
        late.push(l);
    }
    Ok(Orbit::new(grid, values, early, late))
}

/// `Σ_components ∫∫ f(t) kernel(t,t') g(t')`, or `∫ f·g` for [`Pairing::Identity`].
pub fn pairing(f: &SmoothFunction, kind: impl Into<Pairing>, g: &SmoothFunction) -> Result<f64> {
    if f.components() != g.components() {
        return Err(Error::Argument(format!(
            "pairing of {}- and {}-component functions",
            f.components(),
            g.components()
        )));
    }
    f.check_grid(g)?;
    match kind.into() {
        Pairing::Identity => Ok(pair_with_orbit(f, &Orbit::from(g))),
        Pairing::Kernel(k) => {
            if f.is_zero() || g.is_zero() {
                return Ok(0.0);
            }
            let kg = apply_propagator(k, g)?;
            Ok(pair_with_orbit(f, &kg))
        }
    }
}

/// `Σ_components ∫ f(t) x(t) dt` for a compactly supported `f`.
pub fn pair_with_orbit(f: &SmoothFunction, x: &Orbit) -> f64 {
    let grid = f.grid();
    let Some((lo, hi)) = grid.index_range(f.support()) else {
        return 0.0;
    };
    (0..f.components())
        .map(|c| {
            let fv = f.values(c);
            let xv = x.values(c);
            (lo..=hi)
                .map(|i| grid.quadrature_weight(i) * fv[i] * xv[i])
                .sum::<f64>()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeaxis::{make_bump, TimeGrid};

    fn grid() -> TimeGrid {
        TimeGrid::default()
    }

    /// Brute-force double sum with the grid weights; independent of the
    /// running-moment route but only O(dt^2) accurate at the kernel kink.
    fn brute_force(kind: KernelKind, f: &SmoothFunction, t: f64) -> f64 {
        let g = f.grid();
        (0..g.len())
            .map(|j| g.quadrature_weight(j) * kind.kernel(t, g.time(j)) * f.sample(0, j))
            .sum()
    }

    #[test]
    fn kernel_formulas() {
        assert_eq!(KernelKind::Retarded.kernel(2.0, 1.0), -1.0);
        assert_eq!(KernelKind::Retarded.kernel(1.0, 2.0), 0.0);
        assert_eq!(KernelKind::Advanced.kernel(1.0, 2.0), -1.0);
        assert_eq!(KernelKind::Advanced.kernel(2.0, 1.0), 0.0);
        assert_eq!(KernelKind::Mean.kernel(1.0, 3.0), -1.0);
        assert_eq!(KernelKind::Commutator.kernel(1.0, 3.0), 2.0);
        assert_eq!(KernelKind::Retarded.kernel(1.0, 1.0), 0.0);
        for (t, tp) in [(0.3, -1.2), (-2.0, 0.5), (1.0, 1.0)] {
            let r = KernelKind::Retarded.kernel(t, tp);
            let a = KernelKind::Advanced.kernel(t, tp);
            assert_eq!(KernelKind::Mean.kernel(t, tp), 0.5 * (r + a));
            assert_eq!(KernelKind::Commutator.kernel(t, tp), r - a);
        }
    }

    #[test]
    fn apply_k_of_zero_and_bump() {
        let g = grid();
        assert!(apply_k(&SmoothFunction::zero(g, 1)).unwrap().is_zero());
        let kx = apply_k(&make_bump(&g, 0.0, 1.0, 1.0).unwrap()).unwrap();
        assert!(crate::timeaxis::integrate(&kx).abs() < 1e-8);
    }

    #[test]
    fn retarded_vanishes_before_support() {
        let g = grid();
        let f = make_bump(&g, 1.0, 0.5, 1.0).unwrap();
        let r = apply_propagator(KernelKind::Retarded, &f).unwrap();
        for i in 0..g.index_at_or_before(0.5) {
            assert_eq!(r.values(0)[i], 0.0);
        }
        assert_eq!(r.at(0, -20.0), 0.0);
    }

    #[test]
    fn commutator_is_moment_line() {
        let g = grid();
        let f = make_bump(&g, 0.4, 0.8, 1.3).unwrap();
        let (a, b) = moment_pair(&f);
        let c = apply_propagator(KernelKind::Commutator, &f).unwrap();
        for t in [-3.0, 0.1, 2.5, 20.0] {
            assert!((c.at(0, t) - (b[0] - t * a[0])).abs() < 1e-12);
        }
    }

    #[test]
    fn running_moments_match_brute_force() {
        let g = grid();
        let f = make_bump(&g, -0.3, 1.1, 0.9).unwrap();
        for kind in KernelKind::ALL {
            let o = apply_propagator(kind, &f).unwrap();
            for t in [-2.0, -0.5, 0.0, 0.45, 1.5] {
                let i = g.index_at_or_before(t);
                let exact = brute_force(kind, &f, g.time(i));
                assert!(
                    (o.values(0)[i] - exact).abs() < 1e-4,
                    "{kind:?} at {t}: {} vs {exact}",
                    o.values(0)[i]
                );
            }
        }
    }

    #[test]
    fn tails_continue_samples() {
        let g = grid();
        let f = make_bump(&g, 0.0, 2.0, 1.0).unwrap();
        for kind in KernelKind::ALL {
            let o = apply_propagator(kind, &f).unwrap();
            let n = g.len();
            assert!((o.early_tail(0).eval(g.time(0)) - o.values(0)[0]).abs() < 1e-12);
            assert!((o.late_tail(0).eval(g.time(n - 1)) - o.values(0)[n - 1]).abs() < 1e-12);
        }
    }

    #[test]
    fn green_identities_on_broad_loop() {
        let g = grid();
        let f = &make_bump(&g, 0.2, 2.0, 1.0).unwrap() + &make_bump(&g, -1.0, 1.8, -0.7).unwrap();
        let norm = f.sup_norm();
        for kind in [KernelKind::Retarded, KernelKind::Advanced, KernelKind::Mean] {
            let kf = apply_k_orbit(&apply_propagator(kind, &f).unwrap());
            let err = (&kf - &f).sup_norm();
            assert!(err < 1e-6 * norm, "{kind:?}: {err}");
        }
        let kc = apply_k_orbit(&apply_propagator(KernelKind::Commutator, &f).unwrap());
        assert!(kc.sup_norm() < 1e-6 * norm);
    }

    #[test]
    fn kernel_combinations_hold_after_quadrature() {
        let g = grid();
        let f = make_bump(&g, 0.5, 0.6, 1.0).unwrap();
        let r = apply_propagator(KernelKind::Retarded, &f).unwrap();
        let a = apply_propagator(KernelKind::Advanced, &f).unwrap();
        let m = apply_propagator(KernelKind::Mean, &f).unwrap();
        let c = apply_propagator(KernelKind::Commutator, &f).unwrap();
        let diff = r.try_sub(&a).unwrap().try_sub(&c).unwrap();
        assert!(diff.sup_norm_on_grid() < 1e-12);
        let mean = r.try_add(&a).unwrap().scale(0.5).try_sub(&m).unwrap();
        assert!(mean.sup_norm_on_grid() < 1e-12);
    }

    #[test]
    fn commutator_pairing_is_antisymmetric_moment_form() {
        let g = grid();
        let f = make_bump(&g, 1.0, 0.4, 1.0).unwrap();
        let h = make_bump(&g, -0.5, 0.7, 0.6).unwrap();
        assert!(pairing(&f, KernelKind::Commutator, &f).unwrap().abs() < 1e-10);
        let (af, bf) = moment_pair(&f);
        let (ah, bh) = moment_pair(&h);
        let p = pairing(&f, KernelKind::Commutator, &h).unwrap();
        assert!((p - (af[0] * bh[0] - bf[0] * ah[0])).abs() < 1e-10);
        let q = pairing(&h, KernelKind::Commutator, &f).unwrap();
        assert!((p + q).abs() < 1e-10);
    }

    #[test]
    fn commutator_pairing_of_ordered_bumps() {
        // b = c * a for a bump centred at c, so <f1, Δ f0> = a1 b0 - b1 a0 = -(a1 a0).
        let g = grid();
        let f1 = make_bump(&g, 1.0, 0.4, 1.0).unwrap();
        let f0 = make_bump(&g, 0.0, 0.4, 1.0).unwrap();
        let a1 = crate::timeaxis::integrate(&f1);
        let a0 = crate::timeaxis::integrate(&f0);
        let p = pairing(&f1, KernelKind::Commutator, &f0).unwrap();
        // Off-node centres leave a quadrature residual in b = c a.
        assert!((p + a1 * a0).abs() < 1e-8, "{}", p + a1 * a0);
    }

    #[test]
    fn pairing_rejects_mismatched_components() {
        let g = grid();
        let f = make_bump(&g, 0.0, 1.0, 1.0).unwrap();
        let h = f.clone().into_component(1, 2).unwrap();
        assert!(matches!(
            pairing(&f, Pairing::Identity, &h),
            Err(Error::Argument(_))
        ));
    }
}
