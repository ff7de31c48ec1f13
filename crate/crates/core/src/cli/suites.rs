//! Seeded check batteries, one per suite, and checks driven by scenario
//! literals.
//!
//! Every battery draws from its own ChaCha8 streams (see [`crate::sampling`]),
//! numbered `100·suite + k`, so the numbers depend only on the seed.

use std::time::Instant;

use num_complex::Complex64 as C;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::config::{ScenarioConfig, StateSpec};
use super::report::{Record, Report};
use super::{Settings, Suite};
use crate::embedding::{cocycle_u, gamma, s_chi, CutoffChain};
use crate::error::{Error, Result};
use crate::functionals::{Functional, Lagrangean, Potential};
use crate::groupalg::{
    causal_factorize, counting_gram, cutoff_for_loop, decompose_future, letter_normal_form,
    min_hermitian_eigenvalue, moments, reduce_dynamical, symplectic_form, weyl_normal_form,
    wrap_phase, GroupWord,
};
use crate::propagators::{apply_k, apply_k_orbit, apply_propagator, KernelKind};
use crate::sampling::{self, BumpFamily};
use crate::schrep::{
    commutant_certificate, dyson_chain, dyson_series, dyson_t, heisenberg_q, log_slope,
    regularity_probe, represent, tbar, tordered_linear, tordered_linear_ode, weyl_factor,
    weyl_operator, weyl_operator_dense, Factor, OperatorChain, RepOperator, RepSpace,
};
use crate::states::{
    adjoint_battery, apply_operation, expectation, projection_search, transition_probability,
    VectorState,
};
use crate::timeaxis::{
    integrate, make_bump_component, window_around, Affine, Orbit, SmoothFunction, TimeGrid,
};

/// Loops kept well inside the innermost chain interval.
const INNER: BumpFamily = BumpFamily {
    center: (-0.15, 0.15),
    halfwidth: (0.35, 0.5),
    max_amplitude: 0.4,
};

pub(crate) struct Ctx<'a> {
    id: String,
    grid: TimeGrid,
    rep: &'a RepSpace,
    seed: u64,
    scale: f64,
    report: Report,
}

struct Outcome {
    value: f64,
    reference: f64,
    leakage: f64,
}

fn value(v: f64) -> Outcome {
    Outcome {
        value: v,
        reference: 0.0,
        leakage: 0.0,
    }
}

fn against(v: f64, reference: f64) -> Outcome {
    Outcome {
        value: v,
        reference,
        leakage: 0.0,
    }
}

fn gap(a: &RepOperator, b: &RepOperator) -> Outcome {
    Outcome {
        value: a.distance(b),
        reference: 0.0,
        leakage: a.leakage() + b.leakage(),
    }
}

impl Outcome {
    /// Worst case of two deviations from zero.
    fn max(self, other: Outcome) -> Outcome {
        Outcome {
            value: self.value.max(other.value),
            reference: 0.0,
            leakage: self.leakage.max(other.leakage),
        }
    }
}

fn worst(items: impl IntoIterator<Item = Result<Outcome>>) -> Result<Outcome> {
    items.into_iter().try_fold(value(0.0), |acc, o| Ok(acc.max(o?)))
}

impl<'a> Ctx<'a> {
    pub(crate) fn new(id: &str, settings: &Settings, rep: &'a RepSpace) -> Self {
        Ctx {
            id: id.to_string(),
            grid: settings.grid,
            rep,
            seed: settings.seed,
            scale: settings.tolerance_scale,
            report: Report::default(),
        }
    }

    pub(crate) fn finish(self) -> Report {
        self.report
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        sampling::stream(self.seed, stream)
    }

    fn check(
        &mut self,
        name: &str,
        anchor: &str,
        tol: f64,
        body: impl FnOnce() -> Result<Outcome>,
    ) -> Result<()> {
        let start = Instant::now();
        let mut rec = match body() {
            Ok(o) => Record::new(&self.id, name, anchor, o.value, o.reference, tol * self.scale, o.leakage),
            // The numerical environment itself is broken: stop the run.
            Err(e @ (Error::RepConfig { .. } | Error::Leakage { .. } | Error::StepUnderflow { .. })) => {
                return Err(e)
            }
            Err(e) => Record::failed(&self.id, name, anchor, e.to_string()),
        };
        rec.ms = start.elapsed().as_secs_f64() * 1e3;
        self.report.push(rec);
        Ok(())
    }
}

pub(crate) fn battery(suite: Suite, ctx: &mut Ctx) -> Result<()> {
    match suite {
        Suite::Propagators => propagators(ctx),
        Suite::Weyl => weyl(ctx),
        Suite::Dyson => dyson(ctx),
        Suite::Causal => causal(ctx),
        Suite::Adjoint => adjoint(ctx),
        Suite::TbarDynamical => tbar_dynamical(ctx),
        Suite::Embedding => embedding(ctx),
        Suite::States => states(ctx),
        Suite::Regularity => regularity(ctx),
    }
}

fn free() -> Lagrangean {
    Lagrangean::free()
}

fn letter(f: Functional) -> GroupWord {
    GroupWord::generator(free(), f)
}

fn loops(rng: &mut ChaCha8Rng, family: &BumpFamily, grid: &TimeGrid, d: usize, n: usize) -> Result<Vec<SmoothFunction>> {
    (0..n).map(|_| family.sample(rng, grid, d)).collect()
}

fn bounded_in(rng: &mut ChaCha8Rng, grid: &TimeGrid, d: usize, window: (f64, f64), v_max: f64) -> Result<Functional> {
    sampling::bounded(rng, grid, d, window, (0.3, 0.6), v_max)
}

// ---------------------------------------------------------------------------
// Shared check bodies, used by the batteries and by scenario literals.

fn green_defect(kind: KernelKind, f: &SmoothFunction) -> Result<f64> {
    let kdf = apply_k_orbit(&apply_propagator(kind, f)?);
    let target = match kind {
        KernelKind::Commutator => SmoothFunction::zero(*f.grid(), f.components()),
        _ => f.clone(),
    };
    Ok(kdf.try_sub(&target)?.sup_norm() / f.sup_norm())
}

const GREEN: [(KernelKind, &str); 4] = [
    (KernelKind::Retarded, "green-retarded"),
    (KernelKind::Advanced, "green-advanced"),
    (KernelKind::Mean, "green-mean"),
    (KernelKind::Commutator, "commutator-annihilates-loops"),
];

fn sigma(f: &SmoothFunction, g: &SmoothFunction) -> f64 {
    let (af, bf) = moments(f);
    let (ag, bg) = moments(g);
    symplectic_form(&af, &bf, &ag, &bg)
}

fn commutator_word(f: &SmoothFunction, g: &SmoothFunction) -> Result<GroupWord> {
    let sf = letter(Functional::linear(f.clone()));
    let sg = letter(Functional::linear(g.clone()));
    sf.multiply(&sg)?.multiply(&sf.inverse())?.multiply(&sg.inverse())
}

/// Phase and moment defect of the commutator word against `e^{−iσ}`.
fn commutator_phase(f: &SmoothFunction, g: &SmoothFunction) -> Result<Outcome> {
    let nf = weyl_normal_form(&commutator_word(f, g)?)?;
    Ok(value(wrap_phase(nf.phase + sigma(f, g)).abs() + nf.moment_norm()))
}

fn commutator_represented(rep: &RepSpace, f: &SmoothFunction, g: &SmoothFunction) -> Result<Outcome> {
    let op = represent(rep, &commutator_word(f, g)?)?;
    Ok(gap(&op, &rep.identity().scaled(C::from_polar(1.0, -sigma(f, g)))))
}

fn weyl_relation(rep: &RepSpace, f: &SmoothFunction, g: &SmoothFunction) -> Result<Outcome> {
    let lhs = OperatorChain::single(weyl_factor(f))
        .times(weyl_factor(g))
        .then(&OperatorChain::single(weyl_factor(&f.try_add(g)?)).inverse()?);
    let rhs = rep.identity().scaled(C::from_polar(1.0, -0.5 * sigma(f, g)));
    Ok(gap(&rep.realize(&lhs)?, &rhs))
}

/// Letter `S(F)` against `S(F^{x₀} + δL(x₀))` in normal form: (phase, moments).
fn dynamical_relation(g: &SmoothFunction, x0: &SmoothFunction) -> Result<(f64, f64)> {
    let w = letter(Functional::linear(g.clone()));
    let moved = reduce_dynamical(&w, x0, 0)?;
    let a = weyl_normal_form(&w)?;
    let b = weyl_normal_form(&moved)?;
    let moment = a
        .a
        .iter()
        .zip(&b.a)
        .chain(a.b.iter().zip(&b.b))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok((a.phase_distance(&b), moment))
}

fn k_image(rep: &RepSpace, x0: &SmoothFunction) -> Result<Outcome> {
    Ok(gap(&weyl_operator(rep, &apply_k(x0)?)?, &rep.identity()))
}

fn causal_gap(rep: &RepSpace, f1: &Functional, f2: &Functional, f3: &Functional) -> Result<Outcome> {
    let (lhs, rhs) = causal_factorize(f1, f2, f3, &free())?;
    Ok(gap(&represent(rep, &lhs)?, &represent(rep, &rhs)?))
}

/// `W(f₀) T(F) W(f₀)⁻¹` against `T(F` shifted by `Δf₀)`.
fn adjoint_gap(rep: &RepSpace, f0: &SmoothFunction, f: &Functional) -> Result<Outcome> {
    let w = OperatorChain::single(weyl_factor(f0));
    let lhs = rep.realize(&w.clone().then(&dyson_chain(f)?).then(&w.inverse()?))?;
    let delta = apply_propagator(KernelKind::Commutator, f0)?;
    let rhs = dyson_t(rep, &f.shift_orbit(&delta)?.without_constant())?;
    Ok(gap(&lhs, &rhs))
}

/// `T̄(F^{x₀} + δL₀(x₀))` against `T̄(F)`.
fn tbar_gap(rep: &RepSpace, f: &Functional, x0: &SmoothFunction) -> Result<Outcome> {
    let moved = f
        .shift(x0)?
        .try_add(&free().relative_action(x0, &cutoff_for_loop(x0)?)?)?;
    Ok(gap(&tbar(rep, &moved)?, &tbar(rep, f)?))
}

fn word_gap(rep: &RepSpace, a: &GroupWord, b: &GroupWord) -> Result<Outcome> {
    Ok(gap(&represent(rep, a)?, &represent(rep, b)?))
}

fn intertwining(rep: &RepSpace, chain: &CutoffChain, f: &Functional) -> Result<Outcome> {
    let l = chain.lagrangean();
    worst((1..chain.depth()).map(|k| {
        let (c1, c2) = (chain.cutoff(k)?, chain.cutoff(k + 1)?);
        let u = cocycle_u(c1, c2, l, chain.dim())?;
        let lhs = u.multiply(&s_chi(f, c1, l)?)?.multiply(&u.inverse())?;
        word_gap(rep, &lhs, &s_chi(f, c2, l)?)
    }))
}

fn depth_stability(rep: &RepSpace, chain: &CutoffChain, f: &Functional) -> Result<Outcome> {
    let w = GroupWord::generator(chain.lagrangean().clone(), f.clone());
    let first = chain
        .level_of(f.support())
        .ok_or_else(|| Error::Range("functional exceeds the deepest interval".into()))?;
    let images = (first..=chain.depth())
        .map(|n| represent(rep, &gamma(&w, chain, n)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(images
        .windows(2)
        .map(|p| gap(&p[0], &p[1]))
        .fold(value(0.0), Outcome::max))
}

/// Letters of `γ(S(F))` whose support leaves the outer interval.
fn localization(chain: &CutoffChain, f: &Functional) -> Result<Outcome> {
    let w = GroupWord::generator(chain.lagrangean().clone(), f.clone());
    let first = chain
        .level_of(f.support())
        .ok_or_else(|| Error::Range("functional exceeds the deepest interval".into()))?;
    let mut outside = 0;
    for n in first..=chain.depth() {
        let (lo, hi) = chain.level(n)?.outer;
        outside += gamma(&w, chain, n)?
            .letters()
            .iter()
            .filter(|l| !l.functional.support().within(lo, hi))
            .count();
    }
    Ok(value(outside as f64))
}

fn regularity_slope(rep: &RepSpace, f: &Functional) -> Result<Outcome> {
    let r = regularity_probe(rep, f, &[1.0, 1.08, 1.04, 1.02, 1.01])?;
    match r.slope {
        Some(s) => Ok(against(s, 1.0)),
        None => Err(Error::Precondition("all differences vanish; no slope to fit".into())),
    }
}

fn build_state(rep: &RepSpace, spec: &StateSpec) -> Result<VectorState> {
    match spec {
        StateSpec::Ground => VectorState::ground(rep),
        StateSpec::Hermite(n) => VectorState::excited(rep, *n),
        StateSpec::Coherent { x, p } => VectorState::coherent(rep, x, p),
    }
}

// ---------------------------------------------------------------------------
// Batteries.

fn propagators(ctx: &mut Ctx) -> Result<()> {
    let (grid, d) = (ctx.grid, ctx.rep.dim());
    let family = loops(&mut ctx.rng(101), &BumpFamily::RESOLVED, &grid, d, 20)?;
    for (kind, name) in GREEN {
        ctx.check(name, "green-identity", 1e-6, || {
            worst(family.iter().map(|f| green_defect(kind, f).map(value)))
        })?;
    }
    let mut rng = ctx.rng(102);
    ctx.check("relative-action-cutoff-independence", "relative-action", 1e-9, || {
        let lag = Lagrangean::interacting(sampling::potential(&mut rng, d, 0.5)?);
        let mut dev = 0.0f64;
        for _ in 0..10 {
            let x0 = BumpFamily::LOCAL.sample(&mut rng, &grid, d)?;
            let Some((lo, hi)) = x0.support().bounds() else { continue };
            let narrow = window_around(&grid, lo - 0.1, hi + 0.1, 0.3)?;
            let wide = window_around(&grid, lo - 1.5, hi + 1.2, 1.0)?;
            let a = lag.relative_action(&x0, &narrow)?;
            let b = lag.relative_action(&x0, &wide)?;
            let lines: Vec<Affine> = (0..d)
                .map(|_| Affine {
                    slope: rng.gen_range(-1.0..=1.0),
                    intercept: rng.gen_range(-1.0..=1.0),
                })
                .collect();
            let bend = BumpFamily::RESOLVED.sample(&mut rng, &grid, d)?;
            let orbit = Orbit::affine(grid, &lines).try_add(&Orbit::from(&bend))?;
            dev = dev.max((a.evaluate(&orbit)? - b.evaluate(&orbit)?).abs());
        }
        Ok(value(dev))
    })
}

fn weyl(ctx: &mut Ctx) -> Result<()> {
    let (grid, rep) = (ctx.grid, ctx.rep);
    let d = rep.dim();
    let diag = *rep.diagnostics();
    ctx.check("ccr", "canonical-commutation", 1e-8, || Ok(value(diag.ccr_defect)))?;
    ctx.check("oscillator-spectrum", "oscillator-spectrum", 1e-6, || {
        Ok(value(diag.oscillator_defect))
    })?;
    ctx.check("free-evolution-unitarity", "free-evolution", 1e-10, || {
        Ok(value(diag.unitarity_defect))
    })?;
    ctx.check("edge-amplitude", "box-size", rep.config().boundary_limit, || {
        Ok(value(diag.edge_amplitude))
    })?;

    let horizon = rep.horizon();
    ctx.check("heisenberg-free-motion", "free-motion", 1e-6, || {
        worst((0..d).map(|c| {
            let qt = heisenberg_q(rep, c, horizon)?;
            let q = rep.realize(&OperatorChain::single(Factor::Position(c)))?;
            let p = rep.realize(&OperatorChain::single(Factor::Momentum(c)))?;
            Ok(gap(&qt, &q.add(&p.scaled(C::new(horizon, 0.0)))))
        }))
    })?;
    ctx.check("heisenberg-commutator", "free-motion", 1e-6, || {
        let (t, s) = (0.5 * horizon, -0.5 * horizon);
        let qt = Factor::HeisenbergQ { component: 0, t };
        let qs = Factor::HeisenbergQ { component: 0, t: s };
        let ts = rep.realize(&OperatorChain::single(qt.clone()).times(qs.clone()))?;
        let st = rep.realize(&OperatorChain::single(qs).times(qt))?;
        let comm = ts.add(&st.scaled(C::new(-1.0, 0.0)));
        Ok(gap(&comm, &rep.identity().scaled(C::new(0.0, s - t))))
    })?;
    let mut rng = ctx.rng(201);
    ctx.check("coherent-free-motion", "free-motion", 1e-6, || {
        let mut dev = 0.0f64;
        for _ in 0..3 {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let p: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let s = VectorState::coherent(rep, &x, &p)?;
            let chain = OperatorChain::single(Factor::HeisenbergQ { component: 0, t: horizon });
            let mean = rep.inner(s.amplitudes(), &rep.apply_chain(&chain, s.amplitudes())?);
            dev = dev.max((mean - C::new(x[0] + horizon * p[0], 0.0)).norm());
        }
        Ok(value(dev))
    })?;

    let mut rng = ctx.rng(202);
    let pairs: Vec<(SmoothFunction, SmoothFunction)> = (0..10)
        .map(|_| {
            Ok((
                BumpFamily::LOCAL.sample(&mut rng, &grid, d)?,
                BumpFamily::LOCAL.sample(&mut rng, &grid, d)?,
            ))
        })
        .collect::<Result<_>>()?;
    ctx.check("weyl-relation", "weyl-relation", 1e-6, || {
        worst(pairs.iter().map(|(f, g)| weyl_relation(rep, f, g)))
    })?;
    ctx.check("commutator-phase-represented", "weyl-commutator", 1e-6, || {
        worst(pairs.iter().take(5).map(|(f, g)| commutator_represented(rep, f, g)))
    })?;
    let resolved = loops(&mut ctx.rng(203), &BumpFamily::RESOLVED, &grid, d, 40)?;
    ctx.check("commutator-phase-normal-form", "weyl-commutator", 1e-7, || {
        worst(resolved.chunks(2).map(|p| commutator_phase(&p[0], &p[1])))
    })?;

    let mut rng = ctx.rng(204);
    ctx.check("normal-form-vs-represent", "weyl-normal-form", 1e-5, || {
        worst((0..50).map(|_| {
            let len = rng.gen_range(1..=4);
            let w = sampling::linear_word(&mut rng, &grid, d, len, &BumpFamily::LOCAL)?;
            let nf = weyl_normal_form(&w)?;
            let closed = rep.realize(
                &OperatorChain::single(Factor::Weyl { a: nf.a.clone(), b: nf.b.clone() })
                    .times(Factor::Scalar(C::from_polar(1.0, nf.phase))),
            )?;
            Ok(gap(&represent(rep, &w)?, &closed))
        }))
    })?;

    let x0s = loops(&mut ctx.rng(205), &BumpFamily::RESOLVED, &grid, d, 20)?;
    let gs = loops(&mut ctx.rng(206), &BumpFamily::RESOLVED, &grid, d, 20)?;
    let relation = x0s
        .iter()
        .zip(&gs)
        .map(|(x0, g)| dynamical_relation(g, x0))
        .collect::<Vec<_>>();
    ctx.check("dynamical-relation-phase", "dynamical-relation", 1e-7, || {
        worst(relation.iter().map(|r| r.clone().map(|(p, _)| value(p))))
    })?;
    ctx.check("dynamical-relation-moments", "dynamical-relation", 1e-8, || {
        worst(relation.iter().map(|r| r.clone().map(|(_, m)| value(m))))
    })?;
    ctx.check("dynamical-relation-free-action", "dynamical-relation", 1e-7, || {
        worst(x0s.iter().map(|x0| {
            let chi = cutoff_for_loop(x0)?;
            let nf = letter_normal_form(&free().relative_action(x0, &chi)?)?;
            Ok(value(wrap_phase(nf.phase).abs() + nf.moment_norm()))
        }))
    })?;
    ctx.check("weyl-k-image", "dynamical-relation", 1e-7, || {
        worst(x0s.iter().take(5).map(|x0| k_image(rep, x0)))
    })?;
    ctx.check("tordered-linear-k-image", "linear-closed-form", 1e-6, || {
        worst(x0s.iter().take(5).map(|x0| {
            let kinetic = 0.5 * integrate(&crate::timeaxis::differentiate(x0, 1)?.squared_norm_density());
            let op = tordered_linear(rep, &apply_k(x0)?)?;
            Ok(gap(&op, &rep.identity().scaled(C::from_polar(1.0, -kinetic))))
        }))
    })?;

    let mut rng = ctx.rng(207);
    ctx.check("coherent-overlap", "weyl-relation", 1e-6, || {
        let mut dev = 0.0f64;
        for _ in 0..5 {
            let a: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.5..=1.5)).collect();
            let b: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.5..=1.5)).collect();
            let mut psi = rep.tracked()[0].clone();
            rep.apply_weyl(&mut psi, &a, &b);
            let overlap = rep.inner(&rep.tracked()[0], &psi).norm();
            let r2: f64 = a.iter().chain(&b).map(|x| x * x).sum();
            dev = dev.max((overlap - (-r2 / 4.0).exp()).abs());
        }
        Ok(value(dev))
    })?;
    if d == 1 {
        let mut rng = ctx.rng(208);
        ctx.check("split-vs-eigendecomposition", "weyl-split", 1e-8, || {
            worst((0..2).map(|_| {
                let (a, b) = (rng.gen_range(-1.5..=1.5), rng.gen_range(-1.5..=1.5));
                let split = rep.realize(&OperatorChain::single(Factor::Weyl { a: vec![a], b: vec![b] }))?;
                // Both sides leak identically; compare columns only.
                Ok(value(split.distance(&weyl_operator_dense(rep, a, b)?)))
            }))
        })?;
    }

    let mut rng = ctx.rng(209);
    let mut cases = Vec::new();
    for _ in 0..20 {
        let f0 = BumpFamily::RESOLVED.sample(&mut rng, &grid, d)?;
        let (lo, hi) = f0.support().bounds().unwrap_or((-1.0, 1.0));
        let split = rng.gen_range(lo.max(-5.0)..=hi.min(5.0));
        cases.push((f0, split));
    }
    let parts = cases
        .iter()
        .map(|(f0, s)| decompose_future(f0, *s))
        .collect::<Vec<_>>();
    ctx.check("future-decomposition-reconstruction", "future-decomposition", 1e-6, || {
        worst(cases.iter().zip(&parts).map(|((f0, _), p)| {
            let (ff, x0) = p.clone()?;
            Ok(value(ff.try_add(&apply_k(&x0)?)?.try_sub(f0)?.sup_norm()))
        }))
    })?;
    ctx.check("future-decomposition-support", "future-decomposition", 0.0, || {
        let mut bad = 0;
        for ((_, split), p) in cases.iter().zip(&parts) {
            let (ff, _) = p.clone()?;
            if ff.support().bounds().is_some_and(|(lo, _)| lo <= *split) {
                bad += 1;
            }
        }
        Ok(value(bad as f64))
    })?;

    let mut rng = ctx.rng(210);
    ctx.check("counting-state-positive", "counting-state", 1e-12, || {
        let mut words = Vec::new();
        for _ in 0..6 {
            let w = sampling::linear_word(&mut rng, &grid, d, 2, &BumpFamily::LOCAL)?;
            let theta = rng.gen_range(-3.0..=3.0);
            words.push(w.multiply(&GroupWord::scalar(free(), grid, d, theta))?);
            words.push(w);
        }
        let lambda = min_hermitian_eigenvalue(&counting_gram(&words)?);
        Ok(value((-lambda).max(0.0)))
    })
}

fn dyson(ctx: &mut Ctx) -> Result<()> {
    let (grid, rep) = (ctx.grid, ctx.rep);
    let d = rep.dim();
    ctx.check("dyson-zero", "dyson-trivial", 0.0, || {
        Ok(value(dyson_t(rep, &Functional::zero(grid, d))?.distance(&rep.identity())))
    })?;
    let mut rng = ctx.rng(301);
    ctx.check("dyson-constant", "dyson-trivial", 1e-8, || {
        let h = rng.gen_range(-3.0..=3.0);
        let t = dyson_t(rep, &Functional::constant(grid, d, h))?;
        Ok(gap(&t, &rep.identity().scaled(C::from_polar(1.0, h))))
    })?;
    let mut rng = ctx.rng(302);
    let fs = (0..5)
        .map(|_| bounded_in(&mut rng, &grid, d, (-1.5, 1.5), 0.3))
        .collect::<Result<Vec<_>>>()?;
    ctx.check("dyson-unitarity", "dyson-unitary", 1e-7, || {
        worst(fs.iter().map(|f| {
            let t = dyson_t(rep, f)?;
            Ok(Outcome {
                value: t.unitarity_defect(rep),
                reference: 0.0,
                leakage: t.leakage(),
            })
        }))
    })?;
    ctx.check("dyson-inverse", "dyson-unitary", 1e-8, || {
        let chain = dyson_chain(&fs[0])?;
        let both = rep.realize(&chain.clone().then(&chain.inverse()?))?;
        Ok(gap(&both, &rep.identity()))
    })?;
    let mut rng = ctx.rng(303);
    ctx.check("dyson-series-order3", "dyson-series", 1e-4, || {
        let f = bounded_in(&mut rng, &grid, d, (-1.0, 1.0), 0.15)?;
        let series = dyson_series(rep, &f, 3)?;
        let sum = series.iter().skip(1).fold(series[0].clone(), |acc, s| acc.add(s));
        Ok(gap(&dyson_t(rep, &f)?, &sum))
    })?;
    ctx.check("dyson-first-order-slope", "dyson-series", 0.1, || {
        let f = &fs[1];
        let first = &dyson_series(rep, f, 1)?[1];
        let mut pts = Vec::new();
        for eps in [0.4, 0.2, 0.1] {
            let approx = rep.identity().add(&first.scaled(C::new(eps, 0.0)));
            let dist = dyson_t(rep, &f.scale(eps))?.distance(&approx);
            pts.push((f64::ln(eps), dist.ln()));
        }
        let slope = log_slope(&pts).ok_or_else(|| Error::Precondition("degenerate fit".into()))?;
        Ok(against(slope, 2.0))
    })?;
    ctx.check("tbar-bounded-part", "tbar-parts", 0.0, || {
        Ok(value(tbar(rep, &fs[2])?.distance(&dyson_t(rep, &fs[2])?)))
    })?;
    let local = loops(&mut ctx.rng(304), &BumpFamily::LOCAL, &grid, d, 10)?;
    ctx.check("tbar-linear-part", "tbar-parts", 0.0, || {
        let f0 = &local[0];
        Ok(value(tbar(rep, &Functional::linear(f0.clone()))?.distance(&tordered_linear(rep, f0)?)))
    })?;
    ctx.check("linear-ode-closed-form", "linear-closed-form", 1e-5, || {
        worst(local.iter().map(|f0| Ok(gap(&tordered_linear_ode(rep, f0)?, &tordered_linear(rep, f0)?))))
    })
}

fn causal(ctx: &mut Ctx) -> Result<()> {
    let (grid, rep) = (ctx.grid, ctx.rep);
    let d = rep.dim();
    let mut rng = ctx.rng(401);
    let mut triples = Vec::new();
    for _ in 0..10 {
        let f1 = bounded_in(&mut rng, &grid, d, (0.2, 1.6), 0.3)?;
        let f2 = bounded_in(&mut rng, &grid, d, (-1.6, -0.2), 0.3)?;
        let f3 = bounded_in(&mut rng, &grid, d, (-1.6, 1.6), 0.3)?;
        triples.push((f1, f2, f3));
    }
    ctx.check("causal-factorization", "causal-factorization", 1e-4, || {
        worst(triples.iter().map(|(f1, f2, f3)| causal_gap(rep, f1, f2, f3)))
    })?;
    ctx.check("causal-order-enforced", "causal-factorization", 0.0, || {
        let (f1, f2, f3) = &triples[0];
        let refused = matches!(causal_factorize(f2, f1, f3, &free()), Err(Error::Causality(_)));
        Ok(against(refused as u8 as f64, 1.0))
    })
}

fn adjoint(ctx: &mut Ctx) -> Result<()> {
    let (grid, rep) = (ctx.grid, ctx.rep);
    let d = rep.dim();
    let mut rng = ctx.rng(501);
    ctx.check("adjoint-relation", "adjoint-relation", 1e-4, || {
        worst((0..10).map(|_| {
            let f0 = BumpFamily::LOCAL.sample(&mut rng, &grid, d)?;
            let f = bounded_in(&mut rng, &grid, d, (-1.5, 1.5), 0.3)?;
            adjoint_gap(rep, &f0, &f)
        }))
    })
}

fn tbar_dynamical(ctx: &mut Ctx) -> Result<()> {
    let (grid, rep) = (ctx.grid, ctx.rep);
    let d = rep.dim();
    let mut rng = ctx.rng(601);
    ctx.check("tbar-dynamical-relation", "tbar-dynamical", 1e-4, || {
        worst((0..10).map(|k| {
            let mut f = bounded_in(&mut rng, &grid, d, (-1.5, 1.5), 0.3)?;
            if k % 2 == 1 {
                f = f.try_add(&Functional::linear(BumpFamily::LOCAL.sample(&mut rng, &grid, d)?))?;
            }
            let x0 = BumpFamily::LOCAL.sample(&mut rng, &grid, d)?;
            tbar_gap(rep, &f, &x0)
        }))
    })
}

fn embedding(ctx: &mut Ctx) -> Result<()> {
    let (grid, rep) = (ctx.grid, ctx.rep);
    let d = rep.dim();
    let mut rng = ctx.rng(701);
    let lag = Lagrangean::interacting(sampling::potential(&mut rng, d, 0.12)?);
    let chain = CutoffChain::standard(grid, d, lag.clone())?;
    ctx.check("coupling-budget", "embedding", 0.5, || {
        Ok(value(chain.coupling_budget()))
    })?;
    ctx.check("free-embedding-identity", "embedding", 0.0, || {
        let free_chain = CutoffChain::standard(grid, d, free())?;
        let w = sampling::linear_word(&mut rng, &grid, d, 2, &INNER)?
            .multiply(&letter(bounded_in(&mut rng, &grid, d, (-1.5, 1.5), 0.3)?))?;
        Ok(value((gamma(&w, &free_chain, 3)? != w) as u8 as f64))
    })?;
    let f = bounded_in(&mut rng, &grid, d, (-0.5, 0.5), 0.3)?;
    let g = bounded_in(&mut rng, &grid, d, (-0.5, 0.5), 0.3)?;
    ctx.check("cocycle-intertwining", "cocycle-intertwining", 1e-4, || {
        intertwining(rep, &chain, &f)
    })?;
    ctx.check("depth-stability", "embedding-stability", 1e-5, || {
        depth_stability(rep, &chain, &f)
    })?;
    ctx.check("homomorphism", "embedding-homomorphism", 1e-4, || {
        let (sf, sg) = (
            GroupWord::generator(lag.clone(), f.clone()),
            GroupWord::generator(lag.clone(), g.clone()),
        );
        let product = gamma(&sf.multiply(&sg.inverse())?, &chain, 2)?;
        let separate = gamma(&sf, &chain, 2)?.multiply(&gamma(&sg, &chain, 2)?.inverse())?;
        word_gap(rep, &product, &separate)
    })?;
    ctx.check("localization", "embedding-localization", 0.0, || localization(&chain, &f))?;
    ctx.check("interacting-dynamical-relation", "dynamical-relation", 1e-4, || {
        let x0 = INNER.sample(&mut rng, &grid, d)?;
        let (lo, hi) = x0
            .support()
            .widen(3.0 * grid.dt())
            .bounds()
            .ok_or_else(|| Error::Precondition("zero loop".into()))?;
        let xi = window_around(&grid, lo, hi, 0.15)?;
        let moved = f.shift(&x0)?.try_add(&lag.relative_action(&x0, &xi)?)?;
        let a = gamma(&GroupWord::generator(lag.clone(), moved), &chain, 2)?;
        let b = gamma(&GroupWord::generator(lag.clone(), f.clone()), &chain, 2)?;
        word_gap(rep, &a, &b)
    })
}

/// Loop with moments `(a, b)` in component 0, built from two bumps.
fn loop_with_moments(grid: &TimeGrid, d: usize, a: f64, b: f64) -> Result<SmoothFunction> {
    let (c, h) = (0.5, 0.45);
    let m0 = integrate(&make_bump_component(grid, 0.0, h, 1.0, 0, 1)?);
    let beta = (a + b / c) / (2.0 * m0);
    let alpha = (a - b / c) / (2.0 * m0);
    let mut f = SmoothFunction::zero(*grid, d);
    for (center, amp) in [(-c, alpha), (c, beta)] {
        if amp != 0.0 {
            f = f.try_add(&make_bump_component(grid, center, h, amp, 0, d)?)?;
        }
    }
    Ok(f)
}

fn states(ctx: &mut Ctx) -> Result<()> {
    let (grid, rep) = (ctx.grid, ctx.rep);
    let d = rep.dim();
    let ground = VectorState::ground(rep)?;
    ctx.check("transition-lattice", "transition-probability", 1e-6, || {
        let lattice = [-1.0, -0.5, 0.0, 0.5, 1.0];
        let mut dev = 0.0f64;
        for a in lattice {
            for b in lattice {
                let f = loop_with_moments(&grid, d, a, b)?;
                let (am, bm) = moments(&f);
                let r2: f64 = am.iter().chain(&bm).map(|x| x * x).sum();
                let p = transition_probability(&ground, &letter(Functional::linear(f)), rep)?;
                dev = dev.max((p - (-r2 / 2.0).exp()).abs());
            }
        }
        Ok(value(dev))
    })?;

    let mut rng = ctx.rng(801);
    let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let p: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let catalog = [
        ground.clone(),
        VectorState::excited(rep, 2)?,
        VectorState::coherent(rep, &x, &p)?,
    ];
    let linear = letter(Functional::linear(BumpFamily::LOCAL.sample(&mut rng, &grid, d)?));
    let bounded = letter(bounded_in(&mut rng, &grid, d, (-1.0, 1.0), 0.3)?);
    let mixed = linear.multiply(&bounded)?;
    let one = GroupWord::identity(free(), grid, d);
    let words = [linear.clone(), bounded.clone(), mixed.clone()];

    ctx.check("normalization", "state-normalization", 1e-12, || {
        worst(catalog.iter().map(|s| Ok(value((expectation(s, &one, rep)? - 1.0).norm()))))
    })?;
    ctx.check("expectation-bound", "state-positivity", 1e-9, || {
        worst(catalog.iter().flat_map(|s| {
            words
                .iter()
                .map(move |w| Ok(value((expectation(s, w, rep)?.norm() - 1.0).max(0.0))))
        }))
    })?;
    let theta = rng.gen_range(-3.0..=3.0);
    ctx.check("central-phase", "state-central-phase", 1e-10, || {
        let h = GroupWord::scalar(free(), grid, d, theta);
        worst(catalog.iter().map(|s| {
            let a = expectation(s, &mixed.multiply(&h)?, rep)?;
            let b = expectation(s, &mixed, rep)? * C::from_polar(1.0, theta);
            Ok(value((a - b).norm()))
        }))
    })?;
    ctx.check("inverse-symmetry", "state-central-phase", 1e-9, || {
        worst(catalog.iter().map(|s| {
            let a = transition_probability(s, &mixed, rep)?;
            let b = transition_probability(s, &mixed.inverse(), rep)?;
            Ok(value((a - b).abs()))
        }))
    })?;
    ctx.check("operation-inverse", "operation-adjoint", 1e-6, || {
        worst(catalog.iter().map(|s| {
            let (moved, l1) = apply_operation(s, &mixed, rep)?;
            let (back, l2) = apply_operation(&moved, &mixed.inverse(), rep)?;
            let overlap = rep.inner(s.amplitudes(), back.amplitudes()).norm_sqr();
            Ok(Outcome {
                value: (1.0 - overlap).abs(),
                reference: 0.0,
                leakage: l1 + l2,
            })
        }))
    })?;
    ctx.check("displacement-center", "operation-adjoint", 1e-6, || {
        let f = BumpFamily::LOCAL.sample(&mut rng, &grid, d)?;
        let (a, b) = moments(&f);
        let (moved, _) = apply_operation(&ground, &letter(Functional::linear(f)), rep)?;
        let (q, mom) = moved.center(rep);
        let dev = (0..d)
            .map(|c| (q[c] + b[c]).abs().max((mom[c] - a[c]).abs()))
            .fold(0.0, f64::max);
        Ok(value(dev))
    })?;
    ctx.check("adjoint-battery", "operation-adjoint", 1e-6, || {
        let battery = [
            one.clone(),
            linear.clone(),
            bounded.clone(),
            letter(Functional::linear(BumpFamily::LOCAL.sample(&mut rng, &grid, d)?)),
        ];
        worst(catalog.iter().flat_map(|s| {
            words
                .iter()
                .map(|w| Ok(value(adjoint_battery(s, w, &battery, rep)?)))
                .collect::<Vec<_>>()
        }))
    })?;
    let k = rep.k_track();
    ctx.check("projection-vignette", "projection-vignette", 1.0, || {
        // Reported, not asserted: the best lattice point's weight outside
        // the span of the upper half of the tracked states.
        let lattice: Vec<f64> = (0..=12).map(|j| 0.5 * j as f64).collect();
        Ok(value(projection_search(rep, &ground, (k / 2, k), &lattice)?.epsilon))
    })
}

fn regularity(ctx: &mut Ctx) -> Result<()> {
    let (grid, rep) = (ctx.grid, ctx.rep);
    let d = rep.dim();
    ctx.check("regularity-zero", "regularity", 0.0, || {
        let r = regularity_probe(rep, &Functional::zero(grid, d), &[1.0, 1.1, 1.01])?;
        Ok(value(r.differences.iter().fold(0.0, |a: f64, b| a.max(*b))))
    })?;
    let mut rng = ctx.rng(901);
    let lin = Functional::linear(BumpFamily::LOCAL.sample(&mut rng, &grid, d)?);
    let bnd = bounded_in(&mut rng, &grid, d, (-1.0, 1.0), 0.3)?;
    ctx.check("regularity-linear-slope", "regularity", 0.2, || regularity_slope(rep, &lin))?;
    ctx.check("regularity-bounded-slope", "regularity", 0.2, || regularity_slope(rep, &bnd))?;
    ctx.check("regularity-mixed-slope", "regularity", 0.2, || {
        regularity_slope(rep, &lin.try_add(&bnd)?)
    })?;
    if d == 1 {
        let set = [
            (vec![0.8], vec![0.0]),
            (vec![0.0], vec![0.8]),
            (vec![0.6], vec![0.6]),
        ];
        let mut smallest = Err(Error::Precondition("certificate not computed".into()));
        ctx.check("commutant-certificate", "irreducibility", 1e-4, || {
            let cert = commutant_certificate(rep, &set, 1e-6, 1e-4)?;
            smallest = Ok(cert.smallest);
            Ok(value(cert.bound))
        })?;
        ctx.check("commutant-scalars", "irreducibility", 1e-8, || Ok(value(smallest?)))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Scenario literals.

fn required<T>(x: Option<T>, name: &str) -> Result<T> {
    x.ok_or_else(|| Error::Unknown {
        kind: "functional".into(),
        name: name.into(),
    })
}

pub(crate) fn literal_checks(cfg: &ScenarioConfig, ctx: &mut Ctx) -> Result<()> {
    let rep = ctx.rep;
    match cfg.kind {
        Suite::Propagators => {
            for name in cfg.functionals.keys() {
                let f = required(cfg.loop_named(name)?, name)?;
                for (kind, check) in GREEN {
                    ctx.check(&format!("{name}-{check}"), "green-identity", 1e-6, || {
                        green_defect(kind, &f).map(value)
                    })?;
                }
            }
        }
        Suite::Weyl => {
            if let (Some(f), Some(g)) = (cfg.loop_named("f")?, cfg.loop_named("g")?) {
                ctx.check("literal-weyl-relation", "weyl-relation", 1e-6, || weyl_relation(rep, &f, &g))?;
                ctx.check("literal-commutator-phase", "weyl-commutator", 1e-7, || commutator_phase(&f, &g))?;
                ctx.check("literal-commutator-represented", "weyl-commutator", 1e-6, || {
                    commutator_represented(rep, &f, &g)
                })?;
            }
            if let Some(x0) = cfg.loop_named("x0")? {
                let g = cfg.loop_named("f")?.unwrap_or_else(|| SmoothFunction::zero(cfg.grid, rep.dim()));
                ctx.check("literal-dynamical-relation", "dynamical-relation", 1e-7, || {
                    let (p, m) = dynamical_relation(&g, &x0)?;
                    Ok(value(p + m))
                })?;
                ctx.check("literal-weyl-k-image", "dynamical-relation", 1e-7, || k_image(rep, &x0))?;
            }
        }
        Suite::Dyson => {
            let f = required(cfg.functional("F")?, "F")?;
            ctx.check("literal-dyson-unitarity", "dyson-unitary", 1e-7, || {
                let t = tbar(rep, &f)?;
                Ok(Outcome {
                    value: t.unitarity_defect(rep),
                    reference: 0.0,
                    leakage: t.leakage(),
                })
            })?;
            if f.linear_part().is_zero() && !f.potentials().is_empty() {
                ctx.check("literal-dyson-series-order3", "dyson-series", 1e-4, || {
                    let g = f.without_constant();
                    let series = dyson_series(rep, &g, 3)?;
                    let sum = series.iter().skip(1).fold(series[0].clone(), |acc, s| acc.add(s));
                    Ok(gap(&dyson_t(rep, &g)?, &sum))
                })?;
            }
            if f.potentials().is_empty() && !f.linear_part().is_zero() {
                let f0 = f.linear_part().clone();
                ctx.check("literal-linear-ode-closed-form", "linear-closed-form", 1e-5, || {
                    Ok(gap(&tordered_linear_ode(rep, &f0)?, &tordered_linear(rep, &f0)?))
                })?;
            }
        }
        Suite::Causal => {
            let f1 = required(cfg.functional("F1")?, "F1")?;
            let f2 = required(cfg.functional("F2")?, "F2")?;
            let f3 = required(cfg.functional("F3")?, "F3")?;
            ctx.check("literal-causal-factorization", "causal-factorization", 1e-4, || {
                causal_gap(rep, &f1, &f2, &f3)
            })?;
        }
        Suite::Adjoint => {
            let f0 = required(cfg.loop_named("f0")?, "f0")?;
            let f = required(cfg.functional("F")?, "F")?;
            ctx.check("literal-adjoint-relation", "adjoint-relation", 1e-4, || adjoint_gap(rep, &f0, &f))?;
        }
        Suite::TbarDynamical => {
            let f = required(cfg.functional("F")?, "F")?;
            let x0 = required(cfg.loop_named("x0")?, "x0")?;
            ctx.check("literal-tbar-dynamical", "tbar-dynamical", 1e-4, || tbar_gap(rep, &f, &x0))?;
        }
        Suite::Embedding => {
            let f = required(cfg.functional("F")?, "F")?;
            let chain = match &cfg.chain {
                Some(c) => c.clone(),
                None => CutoffChain::standard(
                    cfg.grid,
                    rep.dim(),
                    Lagrangean::interacting(Potential::gaussian(0.1, vec![0.0; rep.dim()], 1.0)?),
                )?,
            };
            ctx.check("literal-cocycle-intertwining", "cocycle-intertwining", 1e-4, || {
                intertwining(rep, &chain, &f)
            })?;
            ctx.check("literal-depth-stability", "embedding-stability", 1e-5, || {
                depth_stability(rep, &chain, &f)
            })?;
            ctx.check("literal-localization", "embedding-localization", 0.0, || localization(&chain, &f))?;
        }
        Suite::States => {
            let spec = cfg.state.clone().unwrap_or(StateSpec::Ground);
            let state = build_state(rep, &spec)?;
            if let Some(f) = cfg.loop_named("f")? {
                let w = letter(Functional::linear(f.clone()));
                if spec == StateSpec::Ground {
                    ctx.check("literal-transition-probability", "transition-probability", 1e-6, || {
                        let (a, b) = moments(&f);
                        let r2: f64 = a.iter().chain(&b).map(|x| x * x).sum();
                        Ok(against(transition_probability(&state, &w, rep)?, (-r2 / 2.0).exp()))
                    })?;
                }
                ctx.check("literal-adjoint-battery", "operation-adjoint", 1e-6, || {
                    let battery = [GroupWord::identity(free(), cfg.grid, rep.dim()), w.clone()];
                    Ok(value(adjoint_battery(&state, &w, &battery, rep)?))
                })?;
            }
        }
        Suite::Regularity => {
            let f = required(cfg.functional("F")?, "F")?;
            ctx.check("literal-regularity-slope", "regularity", 0.2, || regularity_slope(rep, &f))?;
        }
    }
    Ok(())
}
