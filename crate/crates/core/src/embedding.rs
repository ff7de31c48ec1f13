//! Interaction picture on the level of group words.
//!
//! An interacting theory `L = L₀ - V_I` is switched on inside a window `χ`
//! and expressed through free generators:
//! `S_χ(F) = S₀(-V_I(χ))⁻¹ S₀(F - V_I(χ))`. Cutoffs belonging to a nested
//! chain of intervals are related by cocycles, and conjugating with their
//! product gives the embedding `γ` of interacting words into free ones.

use crate::error::{Error, Result};
use crate::functionals::{Functional, Lagrangean, Potential, PotentialTerm};
use crate::groupalg::GroupWord;
use crate::timeaxis::{make_window, CutoffFunction, SmoothFunction, Support, TimeGrid};

/// One level of a chain: the cutoff is one on `inner` and vanishes outside `outer`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainLevel {
    pub inner: (f64, f64),
    pub outer: (f64, f64),
    pub cutoff: CutoffFunction,
}

/// Nested intervals `I₁ ⊂ Î₁ ⊂ I₂ ⊂ …` with their cutoffs and the interaction.
#[derive(Clone, Debug, PartialEq)]
pub struct CutoffChain {
    grid: TimeGrid,
    dim: usize,
    lagrangean: Lagrangean,
    levels: Vec<ChainLevel>,
}

impl CutoffChain {
    pub fn new(
        grid: TimeGrid,
        dim: usize,
        lagrangean: Lagrangean,
        intervals: &[((f64, f64), (f64, f64))],
    ) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::Argument("a cutoff chain needs at least one level".into()));
        }
        if let Some(v) = lagrangean.interaction() {
            if v.dim() != dim {
                return Err(Error::Argument(format!(
                    "interaction acts on R^{} but the chain is for R^{dim}",
                    v.dim()
                )));
            }
        }
        let mut levels = Vec::with_capacity(intervals.len());
        let mut previous: Option<(f64, f64)> = None;
        for &(inner, outer) in intervals {
            if !(outer.0 < inner.0 && inner.0 < inner.1 && inner.1 < outer.1) {
                return Err(Error::Argument(format!(
                    "interval {inner:?} must lie strictly inside {outer:?}"
                )));
            }
            if let Some(p) = previous {
                if !(inner.0 < p.0 && p.1 < inner.1) {
                    return Err(Error::Argument(format!(
                        "interval {inner:?} must strictly contain the previous outer interval {p:?}"
                    )));
                }
            }
            let cutoff = make_window(&grid, outer.0, inner.0, inner.1, outer.1)?;
            debug_assert!(cutoff.is_one_on(inner.0, inner.1));
            levels.push(ChainLevel {
                inner,
                outer,
                cutoff,
            });
            previous = Some(outer);
        }
        Ok(CutoffChain {
            grid,
            dim,
            lagrangean,
            levels,
        })
    }

    /// Depth-3 chain with `I_n = [-0.5, 0.5], [-1, 1], [-1.6, 1.6]` and
    /// ramps of 0.3.
    pub fn standard(grid: TimeGrid, dim: usize, lagrangean: Lagrangean) -> Result<Self> {
        CutoffChain::new(
            grid,
            dim,
            lagrangean,
            &[
                ((-0.5, 0.5), (-0.8, 0.8)),
                ((-1.0, 1.0), (-1.3, 1.3)),
                ((-1.6, 1.6), (-1.9, 1.9)),
            ],
        )
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lagrangean(&self) -> &Lagrangean {
        &self.lagrangean
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Level `n`, counted from 1.
    pub fn level(&self, n: usize) -> Result<&ChainLevel> {
        n.checked_sub(1)
            .and_then(|k| self.levels.get(k))
            .ok_or_else(|| Error::Range(format!("chain has no level {n} (depth {})", self.depth())))
    }

    pub fn cutoff(&self, n: usize) -> Result<&CutoffFunction> {
        Ok(&self.level(n)?.cutoff)
    }

    /// Smallest level whose inner interval contains `support`.
    pub fn level_of(&self, support: Support) -> Option<usize> {
        if support.is_empty() {
            return Some(1);
        }
        self.levels
            .iter()
            .position(|l| support.within(l.inner.0, l.inner.1))
            .map(|k| k + 1)
    }

    /// `sup|V_I| · |Î_n|` for the deepest level.
    pub fn coupling_budget(&self) -> f64 {
        let outer = self.levels.last().expect("chains are non-empty").outer;
        self.lagrangean
            .interaction()
            .map_or(0.0, |v| v.sup() * (outer.1 - outer.0))
    }
}

/// `V_I(w)[x] = ∫ w(t) V_I(x(t)) dt`.
fn switched(grid: TimeGrid, dim: usize, v: &Potential, weight: SmoothFunction) -> Result<Functional> {
    Functional::zero(grid, dim).with_potential(PotentialTerm::new(weight, v.clone())?)
}

/// `S_χ(F) = S₀(-V_I(χ))⁻¹ S₀(F - V_I(χ))` as a free word.
pub fn s_chi(f: &Functional, chi: &CutoffFunction, lagrangean: &Lagrangean) -> Result<GroupWord> {
    if chi.grid() != f.grid() {
        return Err(Error::Argument("cutoff and functional use different grids".into()));
    }
    let free = Lagrangean::free();
    let Some(v) = lagrangean.interaction() else {
        return Ok(GroupWord::generator(free, f.clone()));
    };
    let weight = chi.to_smooth()?;
    let vi = switched(*f.grid(), f.dim(), v, weight)?;
    let head = GroupWord::generator(free.clone(), -&vi).inverse();
    head.multiply(&GroupWord::generator(free, f.try_sub(&vi)?))
}

/// The past part `χ₋` of `χ₂ - χ₁`, split at the middle of the interval
/// where both cutoffs equal one.
pub fn past_difference(chi1: &CutoffFunction, chi2: &CutoffFunction) -> Result<SmoothFunction> {
    if chi1.grid() != chi2.grid() {
        return Err(Error::Argument("cutoffs use different grids".into()));
    }
    let grid = *chi1.grid();
    let (a1, b1) = chi1.plateau();
    let (a2, b2) = chi2.plateau();
    let (lo, hi) = (a1.max(a2), b1.min(b2));
    if !(lo < hi) {
        return Err(Error::Precondition(format!(
            "cutoffs share no interval where both equal one ({a1}..{b1} vs {a2}..{b2})"
        )));
    }
    let split = 0.5 * (lo + hi.min(grid.t_max()));
    let diff: Vec<f64> = chi1
        .values()
        .iter()
        .zip(chi2.values())
        .map(|(c1, c2)| c2 - c1)
        .collect();
    if let Some((i, j)) = grid.index_range(Support::interval(lo, hi.min(grid.t_max()))) {
        if diff[i..=j].iter().any(|d| d.abs() > 1e-12) {
            return Err(Error::Precondition(
                "cutoff difference does not vanish between its past and future parts".into(),
            ));
        }
    }
    let past = grid
        .times()
        .zip(&diff)
        .map(|(t, d)| if t < split { *d } else { 0.0 })
        .collect();
    Ok(SmoothFunction::from_samples_detected(grid, vec![past]))
}

/// `U_{χ₂,χ₁} = S_{χ₁}(-V_I(χ₋))⁻¹`.
pub fn cocycle_u(
    chi1: &CutoffFunction,
    chi2: &CutoffFunction,
    lagrangean: &Lagrangean,
    dim: usize,
) -> Result<GroupWord> {
    let past = past_difference(chi1, chi2)?;
    let grid = *chi1.grid();
    let free = Lagrangean::free();
    let v = match lagrangean.interaction() {
        Some(v) if !past.is_zero() => v,
        _ => return Ok(GroupWord::identity(free, grid, dim)),
    };
    let minus = -&switched(grid, dim, v, past)?;
    Ok(s_chi(&minus, chi1, lagrangean)?.inverse())
}

/// `U_{χ_n,χ_{n-1}} ⋯ U_{χ₂,χ₁}`.
pub fn cocycle_product(chain: &CutoffChain, n: usize) -> Result<GroupWord> {
    chain.level(n)?;
    let mut c = GroupWord::identity(Lagrangean::free(), chain.grid, chain.dim);
    for k in 1..n {
        let u = cocycle_u(
            chain.cutoff(k)?,
            chain.cutoff(k + 1)?,
            &chain.lagrangean,
            chain.dim,
        )?;
        c = u.multiply(&c)?;
    }
    Ok(c)
}

/// `γ(w)` computed at depth `n`: every letter `S(F)^ε` becomes
/// `C⁻¹ S_{χ_n}(F)^ε C` with `C` the cocycle product; the phase is kept.
pub fn gamma(w: &GroupWord, chain: &CutoffChain, n: usize) -> Result<GroupWord> {
    if w.lagrangean() != chain.lagrangean() {
        return Err(Error::Argument(
            "word and chain belong to different Lagrangeans".into(),
        ));
    }
    if w.grid() != chain.grid() || w.dim() != chain.dim() {
        return Err(Error::Argument("word and chain use different grids".into()));
    }
    let chi = chain.cutoff(n)?;
    for l in w.letters() {
        match chain.level_of(l.functional.support()) {
            Some(m) if m <= n => {}
            _ => {
                return Err(Error::Range(format!(
                    "letter support {:?} is not inside I_{n} = {:?}",
                    l.functional.support().bounds(),
                    chain.level(n)?.inner
                )))
            }
        }
    }
    let c = cocycle_product(chain, n)?;
    let free = Lagrangean::free();
    let mut out = c.inverse();
    for l in w.letters() {
        let s = s_chi(&l.functional, chi, chain.lagrangean())?;
        out = out.multiply(&if l.exponent < 0 { s.inverse() } else { s })?;
    }
    out = out.multiply(&c)?;
    let phase = GroupWord::scalar(free, chain.grid, chain.dim, w.phase());
    phase.multiply(&out)
}

/// `γ(S(F))` at the smallest admissible depth.
pub fn gamma_functional(f: &Functional, chain: &CutoffChain) -> Result<GroupWord> {
    let n = chain.level_of(f.support()).ok_or_else(|| {
        Error::Range(format!(
            "support {:?} exceeds the deepest interval",
            f.support().bounds()
        ))
    })?;
    gamma(&GroupWord::generator(chain.lagrangean.clone(), f.clone()), chain, n)
}
