//! Words in the generators `S(F)^{±1}`, the dynamical and causal relations,
//! and the closed-form Weyl calculus of the free Lagrangean.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::functionals::{Functional, Lagrangean};
use crate::propagators::{apply_propagator, moment_pair, pairing, KernelKind};
use crate::timeaxis::{
    make_step, second_derivative_orbit, window_around, CutoffFunction, Orbit, SmoothFunction,
    TimeGrid, STENCIL_MARGIN,
};

/// Moments below this are treated as zero by the counting state.
pub const MOMENT_TOLERANCE: f64 = 1e-8;

/// Ramp length of the automatic cutoffs.
pub const DEFAULT_RAMP: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct Letter {
    pub functional: Functional,
    /// `+1` or `-1`.
    pub exponent: i8,
}

impl Letter {
    fn inverse(&self) -> Letter {
        Letter {
            functional: self.functional.clone(),
            exponent: -self.exponent,
        }
    }

    fn cancels(&self, other: &Letter) -> bool {
        self.exponent == -other.exponent && self.functional == other.functional
    }
}

/// Which relations were used to produce a word.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct History {
    pub dynamical: bool,
    pub causal: bool,
}

/// `e^{iθ} · S(F₁)^{ε₁} ⋯ S(F_n)^{ε_n}` for a fixed Lagrangean.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupWord {
    lagrangean: Lagrangean,
    grid: TimeGrid,
    dim: usize,
    letters: Vec<Letter>,
    phase: f64,
    history: History,
}

impl GroupWord {
    pub fn identity(lagrangean: Lagrangean, grid: TimeGrid, dim: usize) -> Self {
        GroupWord {
            lagrangean,
            grid,
            dim,
            letters: Vec::new(),
            phase: 0.0,
            history: History::default(),
        }
    }

    /// `S(F)`. Constant functionals go straight into the phase, so `S(0)`
    /// is the empty word.
    pub fn generator(lagrangean: Lagrangean, f: Functional) -> Self {
        let mut w = GroupWord::identity(lagrangean, *f.grid(), f.dim());
        w.push(Letter {
            functional: f,
            exponent: 1,
        });
        w
    }

    /// `e^{iθ}·1`.
    pub fn scalar(lagrangean: Lagrangean, grid: TimeGrid, dim: usize, theta: f64) -> Self {
        GroupWord {
            phase: theta,
            ..GroupWord::identity(lagrangean, grid, dim)
        }
    }

    pub fn lagrangean(&self) -> &Lagrangean {
        &self.lagrangean
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// Accumulated central phase θ of the scalar `e^{iθ}`.
    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn scalar_value(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.phase)
    }

    pub fn history(&self) -> History {
        self.history
    }

    pub fn is_scalar(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Append with free reduction; constant letters become phase.
    fn push(&mut self, letter: Letter) {
        let f = &letter.functional;
        if f.is_constant() {
            self.phase += letter.exponent as f64 * f.constant_part();
            return;
        }
        if self.letters.last().is_some_and(|l| l.cancels(&letter)) {
            self.letters.pop();
        } else {
            self.letters.push(letter);
        }
    }

    fn check_compatible(&self, other: &GroupWord) -> Result<()> {
        if self.lagrangean != other.lagrangean {
            return Err(Error::Argument(
                "words belong to different Lagrangeans".into(),
            ));
        }
        if self.dim != other.dim || self.grid != other.grid {
            return Err(Error::Argument(
                "words use different grids or dimensions".into(),
            ));
        }
        Ok(())
    }

    pub fn multiply(&self, other: &GroupWord) -> Result<GroupWord> {
        word_multiply(self, other)
    }

    pub fn inverse(&self) -> GroupWord {
        word_inverse(self)
    }
}

pub fn word_multiply(u: &GroupWord, v: &GroupWord) -> Result<GroupWord> {
    u.check_compatible(v)?;
    let mut out = u.clone();
    out.phase += v.phase;
    out.history.dynamical |= v.history.dynamical;
    out.history.causal |= v.history.causal;
    for l in &v.letters {
        out.push(l.clone());
    }
    Ok(out)
}

pub fn word_inverse(u: &GroupWord) -> GroupWord {
    GroupWord {
        letters: u.letters.iter().rev().map(Letter::inverse).collect(),
        phase: -u.phase,
        ..u.clone()
    }
}

/// Cutoff equal to 1 on the support of `x0` widened by the stencil reach,
/// ramping over [`DEFAULT_RAMP`].
pub fn cutoff_for_loop(x0: &SmoothFunction) -> Result<CutoffFunction> {
    let grid = x0.grid();
    let (lo, hi) = x0
        .support()
        .widen((STENCIL_MARGIN + 1) as f64 * grid.dt())
        .bounds()
        .ok_or_else(|| Error::Argument("the zero loop needs no cutoff".into()))?;
    window_around(grid, lo, hi, DEFAULT_RAMP)
}

/// Dynamical relation: replace letter `index` by `S(F^{x₀} + δL(x₀))`.
pub fn reduce_dynamical(w: &GroupWord, x0: &SmoothFunction, index: usize) -> Result<GroupWord> {
    if x0.is_zero() {
        if index >= w.letters.len() {
            return Err(index_error(index, w.letters.len()));
        }
        return Ok(w.clone());
    }
    let chi = cutoff_for_loop(x0)?;
    reduce_dynamical_with(w, x0, index, &chi)
}

pub fn reduce_dynamical_with(
    w: &GroupWord,
    x0: &SmoothFunction,
    index: usize,
    chi: &CutoffFunction,
) -> Result<GroupWord> {
    let letter = w
        .letters
        .get(index)
        .ok_or_else(|| index_error(index, w.letters.len()))?;
    let replaced = letter
        .functional
        .shift(x0)?
        .try_add(&w.lagrangean.relative_action(x0, chi)?)?;
    let mut out = GroupWord {
        letters: Vec::new(),
        history: History {
            dynamical: true,
            ..w.history
        },
        ..w.clone()
    };
    for (k, l) in w.letters.iter().enumerate() {
        if k == index {
            out.push(Letter {
                functional: replaced.clone(),
                exponent: l.exponent,
            });
        } else {
            out.push(l.clone());
        }
    }
    Ok(out)
}

fn index_error(index: usize, len: usize) -> Error {
    Error::Range(format!("letter index {index} out of range for a word of length {len}"))
}

/// Causal relation: `S(F₁+F₂+F₃)` and `S(F₁+F₃) S(F₃)⁻¹ S(F₂+F₃)`, for `F₁`
/// strictly in the future of `F₂`.
pub fn causal_factorize(
    f1: &Functional,
    f2: &Functional,
    f3: &Functional,
    lagrangean: &Lagrangean,
) -> Result<(GroupWord, GroupWord)> {
    if !f1.is_later_than(f2) {
        return Err(Error::Causality(format!(
            "support {:?} is not strictly later than {:?}",
            f1.support().bounds(),
            f2.support().bounds()
        )));
    }
    let l = lagrangean.clone();
    let lhs = GroupWord::generator(l.clone(), f1.try_add(f2)?.try_add(f3)?);
    let a = GroupWord::generator(l.clone(), f1.try_add(f3)?);
    let b = GroupWord::generator(l.clone(), f3.clone()).inverse();
    let c = GroupWord::generator(l, f2.try_add(f3)?);
    let mut rhs = a.multiply(&b)?.multiply(&c)?;
    rhs.history.causal = true;
    Ok((lhs, rhs))
}

/// `(∫ f₀, ∫ t f₀)` per component.
pub fn moments(f0: &SmoothFunction) -> (Vec<f64>, Vec<f64>) {
    moment_pair(f0)
}

/// `Σ_k (a₁_k b₂_k − b₁_k a₂_k)`, equal to `⟨f₁, Δ f₂⟩`.
pub fn symplectic_form(a1: &[f64], b1: &[f64], a2: &[f64], b2: &[f64]) -> f64 {
    (0..a1.len()).map(|k| a1[k] * b2[k] - b1[k] * a2[k]).sum()
}

/// `e^{iθ} exp(i(a·Q + b·P))`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeylElement {
    pub phase: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl WeylElement {
    pub fn identity(dim: usize) -> Self {
        WeylElement {
            phase: 0.0,
            a: vec![0.0; dim],
            b: vec![0.0; dim],
        }
    }

    /// `W(f)` itself, without phase.
    pub fn from_loop(f: &SmoothFunction) -> Self {
        let (a, b) = moments(f);
        WeylElement { phase: 0.0, a, b }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn compose(&self, other: &WeylElement) -> WeylElement {
        let sigma = symplectic_form(&self.a, &self.b, &other.a, &other.b);
        WeylElement {
            phase: self.phase + other.phase - 0.5 * sigma,
            a: self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect(),
            b: self.b.iter().zip(&other.b).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn inverse(&self) -> WeylElement {
        WeylElement {
            phase: -self.phase,
            a: self.a.iter().map(|x| -x).collect(),
            b: self.b.iter().map(|x| -x).collect(),
        }
    }

    pub fn moment_norm(&self) -> f64 {
        self.a
            .iter()
            .chain(&self.b)
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }

    pub fn is_central(&self, tol: f64) -> bool {
        self.moment_norm() <= tol
    }

    /// Phase difference reduced to `(-π, π]`.
    pub fn phase_distance(&self, other: &WeylElement) -> f64 {
        wrap_phase(self.phase - other.phase).abs()
    }

    pub fn approx_eq(&self, other: &WeylElement, tol: f64) -> bool {
        self.dim() == other.dim()
            && self.phase_distance(other) <= tol
            && self
                .a
                .iter()
                .zip(&other.a)
                .chain(self.b.iter().zip(&other.b))
                .all(|(x, y)| (x - y).abs() <= tol)
    }
}

impl fmt::Display for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(phase {:.12}, a {:?}, b {:?})",
            wrap_phase(self.phase),
            self.a,
            self.b
        )
    }
}

/// Reduce to `(-π, π]`.
pub fn wrap_phase(theta: f64) -> f64 {
    let r = theta.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// `S(F)` for linear `F = F_f + c` as `(c − ½⟨f, Δ_D f⟩, a_f, b_f)`.
pub fn letter_normal_form(f: &Functional) -> Result<WeylElement> {
    if !f.is_linear() {
        return Err(Error::NormalFormUnavailable(
            "functional has potential terms".into(),
        ));
    }
    let lin = f.linear_part();
    let mut w = WeylElement::from_loop(lin);
    w.phase = f.constant_part() - 0.5 * pairing(lin, KernelKind::Mean, lin)?;
    Ok(w)
}

/// Closed-form normal form of a free-theory linear word.
pub fn weyl_normal_form(w: &GroupWord) -> Result<WeylElement> {
    if !w.lagrangean.is_free() {
        return Err(Error::NormalFormUnavailable(
            "only words of the free Lagrangean have a Weyl normal form".into(),
        ));
    }
    let mut acc = WeylElement::identity(w.dim);
    acc.phase = w.phase;
    for l in &w.letters {
        let e = letter_normal_form(&l.functional)?;
        let e = if l.exponent < 0 { e.inverse() } else { e };
        acc = acc.compose(&e);
    }
    Ok(acc)
}

/// `f₀ = f₀′ + K x₀` with `f₀′ = K(χ Δ_R f₀)` supported after `t_split`
/// and `x₀ = (1−χ) Δ_R f₀` compactly supported.
pub fn decompose_future(f0: &SmoothFunction, t_split: f64) -> Result<(SmoothFunction, SmoothFunction)> {
    let grid = *f0.grid();
    // Keep the stencil of K(χ·) from reaching back to t_split.
    let ramp_lo = t_split + (STENCIL_MARGIN + 1) as f64 * grid.dt();
    let ramp_hi = ramp_lo + DEFAULT_RAMP;
    if ramp_hi + (STENCIL_MARGIN as f64) * grid.dt() > grid.t_max() || t_split < grid.t_min() {
        return Err(Error::Range(format!(
            "ramp [{ramp_lo}, {ramp_hi}] does not fit the grid"
        )));
    }
    let chi = make_step(&grid, ramp_lo, ramp_hi)?;
    let y = apply_propagator(KernelKind::Retarded, f0)?;
    let d = f0.components();
    let mut future = Vec::with_capacity(d);
    let mut past = Vec::with_capacity(d);
    for c in 0..d {
        let yc = y.values(c);
        future.push(
            yc.iter()
                .zip(chi.values())
                .map(|(v, x)| v * x)
                .collect::<Vec<f64>>(),
        );
        past.push(
            yc.iter()
                .zip(chi.values())
                .map(|(v, x)| v * (1.0 - x))
                .collect::<Vec<f64>>(),
        );
    }
    let early = (0..d).map(|c| y.early_tail(c)).collect();
    let late = (0..d).map(|c| y.late_tail(c)).collect();
    let chi_y = Orbit::new(grid, future, early, late);
    let mut f_future = second_derivative_orbit(&chi_y).scale(-1.0);
    // Where χ ≡ 1 across the stencil, K(χ Δ_R f₀) is f₀ itself.
    let cv = chi.values();
    let m = STENCIL_MARGIN;
    let plateau = |i: usize| i >= m && i + m < cv.len() && cv[i - m..=i + m].iter().all(|&x| x == 1.0);
    let values = (0..d)
        .map(|c| {
            (0..grid.len())
                .map(|i| if plateau(i) { f0.sample(c, i) } else { f_future.sample(c, i) })
                .collect()
        })
        .collect();
    f_future = SmoothFunction::from_samples_detected(grid, values);
    let x0 = SmoothFunction::from_samples_detected(grid, past);
    Ok((f_future, x0))
}

/// `ω(w)`: the central phase if the word is a multiple of 1, else 0.
pub fn counting_state(w: &GroupWord) -> Result<Complex64> {
    let nf = weyl_normal_form(w).map_err(|e| match e {
        Error::NormalFormUnavailable(m) => Error::Undecidable(m),
        other => other,
    })?;
    if nf.is_central(MOMENT_TOLERANCE) {
        Ok(Complex64::from_polar(1.0, nf.phase))
    } else {
        Ok(Complex64::new(0.0, 0.0))
    }
}

/// `[ω(S_i⁻¹ S_j)]_{ij}`.
pub fn counting_gram(words: &[GroupWord]) -> Result<DMatrix<Complex64>> {
    let n = words.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        let inv = words[i].inverse();
        for j in 0..n {
            g[(i, j)] = counting_state(&inv.multiply(&words[j])?)?;
        }
    }
    Ok(g)
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_hermitian_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    herm.symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |a, &b| a.min(b))
}
