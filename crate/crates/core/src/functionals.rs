//! Localized functionals `F[x] = ∫ f₀·x + Σ g_k V_k(x) + h`, shifts by loops,
//! Lagrangeans and relative actions.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::error::{Error, Result};
use crate::propagators::{apply_k, pair_with_orbit};
use crate::timeaxis::{
    differentiate, integrate, CutoffFunction, Orbit, SmoothFunction, Support, TimeGrid,
    STENCIL_MARGIN,
};

/// Closed catalog of bounded smooth potentials on `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub enum Potential {
    /// `v·exp(-|x-c|²/w²)`
    Gaussian { v: f64, center: Vec<f64>, width: f64 },
    /// `v·cos(k·x + phase)`
    Cosine { v: f64, k: Vec<f64>, phase: f64 },
    /// `v·sech²(|x-c|/w)`
    SechSquared { v: f64, center: Vec<f64>, width: f64 },
}

impl Potential {
    pub fn gaussian(v: f64, center: Vec<f64>, width: f64) -> Result<Self> {
        check_params("gaussian", v, &center, width)?;
        Ok(Potential::Gaussian { v, center, width })
    }

    pub fn cosine(v: f64, k: Vec<f64>, phase: f64) -> Result<Self> {
        check_params("cosine", v, &k, 1.0)?;
        if !phase.is_finite() {
            return Err(Error::Argument("cosine phase must be finite".into()));
        }
        Ok(Potential::Cosine { v, k, phase })
    }

    pub fn sech_squared(v: f64, center: Vec<f64>, width: f64) -> Result<Self> {
        check_params("sech2", v, &center, width)?;
        Ok(Potential::SechSquared { v, center, width })
    }

    pub fn dim(&self) -> usize {
        match self {
            Potential::Gaussian { center, .. } | Potential::SechSquared { center, .. } => {
                center.len()
            }
            Potential::Cosine { k, .. } => k.len(),
        }
    }

    /// `sup |V|`; attained for every entry of the catalog.
    pub fn sup(&self) -> f64 {
        match self {
            Potential::Gaussian { v, .. }
            | Potential::Cosine { v, .. }
            | Potential::SechSquared { v, .. } => v.abs(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        match self {
            Potential::Gaussian { v, center, width } => {
                let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                v * (-r2 / (width * width)).exp()
            }
            Potential::Cosine { v, k, phase } => {
                let kx: f64 = x.iter().zip(k).map(|(a, k)| a * k).sum();
                v * (kx + phase).cos()
            }
            Potential::SechSquared { v, center, width } => {
                let r2: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
                let s = 1.0 / (r2.sqrt() / width).cosh();
                v * s * s
            }
        }
    }

    /// Same potential with amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Potential {
        let mut out = self.clone();
        match &mut out {
            Potential::Gaussian { v, .. }
            | Potential::Cosine { v, .. }
            | Potential::SechSquared { v, .. } => *v *= factor,
        }
        out
    }
}

fn check_params(name: &str, v: f64, vector: &[f64], width: f64) -> Result<()> {
    if vector.is_empty() {
        return Err(Error::Argument(format!("{name}: dimension must be at least 1")));
    }
    if !v.is_finite() || vector.iter().any(|c| !c.is_finite()) {
        return Err(Error::Argument(format!("{name}: parameters must be finite")));
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::Argument(format!("{name}: width must be positive")));
    }
    Ok(())
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(",")
        };
        match self {
            Potential::Gaussian { v, center, width } => {
                write!(f, "gaussian(v={v}, c={}, w={width})", list(center))
            }
            Potential::Cosine { v, k, phase } => {
                write!(f, "cosine(v={v}, k={}, phase={phase})", list(k))
            }
            Potential::SechSquared { v, center, width } => {
                write!(f, "sech2(v={v}, c={}, w={width})", list(center))
            }
        }
    }
}

/// `g(t)·V(x(t) + s(t))` with an optional stored shift loop `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialTerm {
    weight: SmoothFunction,
    potential: Potential,
    shift: Option<Orbit>,
}

impl PotentialTerm {
    pub fn new(weight: SmoothFunction, potential: Potential) -> Result<Self> {
        if weight.components() != 1 {
            return Err(Error::Argument(
                "potential weight must be a scalar function".into(),
            ));
        }
        Ok(PotentialTerm {
            weight,
            potential,
            shift: None,
        })
    }

    pub fn weight(&self) -> &SmoothFunction {
        &self.weight
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn shift_orbit(&self) -> Option<&Orbit> {
        self.shift.as_ref()
    }

    /// `g(t)` at an arbitrary time.
    pub fn weight_at(&self, t: f64) -> f64 {
        self.weight.at(0, t)
    }

    /// Component `c` of the stored shift at an arbitrary time.
    pub fn shift_at(&self, c: usize, t: f64) -> f64 {
        self.shift.as_ref().map_or(0.0, |s| s.at(c, t))
    }

    pub fn support(&self) -> Support {
        self.weight.support()
    }

    /// Potential evaluated along `x + shift` at grid node `i`.
    pub fn potential_at(&self, x: &[f64], i: usize) -> f64 {
        match &self.shift {
            None => self.potential.eval(x),
            Some(s) => {
                let y: Vec<f64> = x
                    .iter()
                    .enumerate()
                    .map(|(c, v)| v + s.values(c)[i])
                    .collect();
                self.potential.eval(&y)
            }
        }
    }

    pub(crate) fn shifted(&self, x0: &Orbit) -> Result<PotentialTerm> {
        let shift = match &self.shift {
            None => x0.clone(),
            Some(s) => s.try_add(x0)?,
        };
        let shift = if shift.is_zero() { None } else { Some(shift) };
        Ok(PotentialTerm {
            weight: self.weight.clone(),
            potential: self.potential.clone(),
            shift,
        })
    }

    fn scaled(&self, factor: f64) -> PotentialTerm {
        PotentialTerm {
            weight: self.weight.scale(factor),
            potential: self.potential.clone(),
            shift: self.shift.clone(),
        }
    }
}

/// A localized functional on orbits in `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional {
    linear: SmoothFunction,
    potentials: Vec<PotentialTerm>,
    constant: f64,
}

impl Functional {
    pub fn zero(grid: TimeGrid, dim: usize) -> Self {
        Functional {
            linear: SmoothFunction::zero(grid, dim),
            potentials: Vec::new(),
            constant: 0.0,
        }
    }

    /// `F_h`, the constant functional.
    pub fn constant(grid: TimeGrid, dim: usize, h: f64) -> Self {
        Functional {
            constant: h,
            ..Functional::zero(grid, dim)
        }
    }

    pub fn linear(f0: SmoothFunction) -> Self {
        Functional {
            linear: f0,
            potentials: Vec::new(),
            constant: 0.0,
        }
    }

    pub fn new(linear: SmoothFunction, potentials: Vec<PotentialTerm>, constant: f64) -> Result<Self> {
        let f = Functional {
            linear,
            potentials: Vec::new(),
            constant,
        };
        potentials
            .into_iter()
            .try_fold(f, |f, p| f.with_potential(p))
    }

    pub fn with_potential(mut self, term: PotentialTerm) -> Result<Self> {
        if term.potential.dim() != self.dim() {
            return Err(Error::Argument(format!(
                "potential on R^{} in a functional on R^{}",
                term.potential.dim(),
                self.dim()
            )));
        }
        self.linear.check_grid(&term.weight)?;
        self.potentials.push(term);
        Ok(self)
    }

    pub fn with_constant(mut self, h: f64) -> Self {
        self.constant += h;
        self
    }

    pub fn grid(&self) -> &TimeGrid {
        self.linear.grid()
    }

    pub fn dim(&self) -> usize {
        self.linear.components()
    }

    pub fn linear_part(&self) -> &SmoothFunction {
        &self.linear
    }

    pub fn potentials(&self) -> &[PotentialTerm] {
        &self.potentials
    }

    pub fn constant_part(&self) -> f64 {
        self.constant
    }

    pub fn is_linear(&self) -> bool {
        self.potentials.is_empty()
    }

    /// True for `F_h` (including `h = 0`).
    pub fn is_constant(&self) -> bool {
        self.potentials.is_empty() && self.linear.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.is_constant() && self.constant == 0.0
    }

    /// Functional with the constant part removed.
    pub fn without_constant(&self) -> Functional {
        Functional {
            constant: 0.0,
            ..self.clone()
        }
    }

    pub fn support(&self) -> Support {
        self.potentials
            .iter()
            .fold(self.linear.support(), |s, p| s.hull(p.support()))
    }

    /// `F` lies strictly in the future of `other`.
    pub fn is_later_than(&self, other: &Functional) -> bool {
        self.support().is_later_than(&other.support())
    }

    /// `F[x]` by quadrature; `x` may carry affine tails.
    pub fn evaluate(&self, x: &Orbit) -> Result<f64> {
        if x.components() != self.dim() {
            return Err(Error::Argument(format!(
                "orbit has {} components, functional expects {}",
                x.components(),
                self.dim()
            )));
        }
        if x.grid() != self.grid() {
            return Err(Error::Argument("orbit and functional use different grids".into()));
        }
        let mut total = self.constant + pair_with_orbit(&self.linear, x);
        let grid = self.grid();
        let mut point = vec![0.0; self.dim()];
        for term in &self.potentials {
            let Some((lo, hi)) = grid.index_range(term.support()) else {
                continue;
            };
            for i in lo..=hi {
                for (c, p) in point.iter_mut().enumerate() {
                    *p = x.values(c)[i];
                }
                total += grid.quadrature_weight(i) * term.weight.sample(0, i) * term.potential_at(&point, i);
            }
        }
        Ok(total)
    }

    /// `F^{x₀}[x] = F[x + x₀]`.
    pub fn shift(&self, x0: &SmoothFunction) -> Result<Functional> {
        self.linear.check_grid(x0)?;
        self.shift_orbit(&Orbit::from(x0))
    }

    /// Shift by an orbit with affine tails, e.g. a propagator image.
    pub fn shift_orbit(&self, x0: &Orbit) -> Result<Functional> {
        if x0.components() != self.dim() {
            return Err(Error::Argument("shift has the wrong dimension".into()));
        }
        if x0.grid() != self.grid() {
            return Err(Error::Argument("shift uses a different grid".into()));
        }
        if x0.is_zero() {
            return Ok(self.clone());
        }
        let potentials = self
            .potentials
            .iter()
            .map(|p| p.shifted(x0))
            .collect::<Result<Vec<_>>>()?;
        Ok(Functional {
            linear: self.linear.clone(),
            potentials,
            constant: self.constant + pair_with_orbit(&self.linear, x0),
        })
    }

    pub fn try_add(&self, other: &Functional) -> Result<Functional> {
        if self.dim() != other.dim() {
            return Err(Error::Argument(format!(
                "adding functionals on R^{} and R^{}",
                self.dim(),
                other.dim()
            )));
        }
        let mut potentials = self.potentials.clone();
        potentials.extend(other.potentials.iter().cloned());
        Ok(Functional {
            linear: self.linear.try_add(&other.linear)?,
            potentials,
            constant: self.constant + other.constant,
        })
    }

    pub fn try_sub(&self, other: &Functional) -> Result<Functional> {
        self.try_add(&other.scale(-1.0))
    }

    pub fn scale(&self, factor: f64) -> Functional {
        Functional {
            linear: self.linear.scale(factor),
            potentials: self.potentials.iter().map(|p| p.scaled(factor)).collect(),
            constant: self.constant * factor,
        }
    }
}

impl Add for &Functional {
    type Output = Functional;
    fn add(self, rhs: &Functional) -> Functional {
        self.try_add(rhs).expect("functional dimensions or grids differ")
    }
}

impl Sub for &Functional {
    type Output = Functional;
    fn sub(self, rhs: &Functional) -> Functional {
        self.try_sub(rhs).expect("functional dimensions or grids differ")
    }
}

impl Neg for &Functional {
    type Output = Functional;
    fn neg(self) -> Functional {
        self.scale(-1.0)
    }
}

/// `L = ẋ²/2 - V_I(x)` with unit mass.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Lagrangean {
    interaction: Option<Potential>,
}

impl Lagrangean {
    pub fn free() -> Self {
        Lagrangean { interaction: None }
    }

    pub fn interacting(v_i: Potential) -> Self {
        Lagrangean {
            interaction: Some(v_i),
        }
    }

    pub fn interaction(&self) -> Option<&Potential> {
        self.interaction.as_ref()
    }

    pub fn is_free(&self) -> bool {
        self.interaction.is_none()
    }

    /// `V_I(χ)`: the interaction switched on with the compact cutoff `χ`.
    pub fn interaction_functional(&self, dim: usize, chi: &CutoffFunction) -> Result<Functional> {
        let grid = *chi.grid();
        let Some(v) = &self.interaction else {
            return Ok(Functional::zero(grid, dim));
        };
        let weight = chi.to_smooth()?;
        Functional::zero(grid, dim).with_potential(PotentialTerm::new(weight, v.clone())?)
    }

    /// `δL(x₀)`, the action variation localized by `χ`.
    pub fn relative_action(&self, x0: &SmoothFunction, chi: &CutoffFunction) -> Result<Functional> {
        let grid = *x0.grid();
        let dim = x0.components();
        if chi.grid() != &grid {
            return Err(Error::Argument("cutoff and loop use different grids".into()));
        }
        if x0.is_zero() {
            return Ok(Functional::zero(grid, dim));
        }
        // Derivatives of x₀ reach a few nodes past its support.
        let (lo, hi) = x0
            .support()
            .widen(STENCIL_MARGIN as f64 * grid.dt())
            .bounds()
            .expect("non-zero loop has a support");
        if !chi.is_one_on(lo, hi) {
            return Err(Error::Precondition(format!(
                "cutoff must equal 1 on [{lo}, {hi}]"
            )));
        }
        let chi_values = chi.values();
        let linear = apply_k(x0)?.weighted(chi_values);
        let velocity = differentiate(x0, 1)?;
        let kinetic = 0.5 * integrate(&velocity.squared_norm_density().weighted(chi_values));
        let mut f = Functional {
            linear,
            potentials: Vec::new(),
            constant: kinetic,
        };
        if let Some(v) = &self.interaction {
            let weight = chi.to_smooth().map_err(|_| {
                Error::Precondition(
                    "an interacting relative action needs a compactly supported cutoff".into(),
                )
            })?;
            let plain = PotentialTerm::new(weight.clone(), v.clone())?;
            let moved = PotentialTerm::new(weight.scale(-1.0), v.clone())?.shifted(&Orbit::from(x0))?;
            f = f.with_potential(moved)?.with_potential(plain)?;
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeaxis::{make_bump, make_step, window_around};

    fn grid() -> TimeGrid {
        TimeGrid::new(-6.0, 6.0, 1537).unwrap()
    }

    fn gauss() -> Potential {
        Potential::gaussian(0.7, vec![0.3], 1.1).unwrap()
    }

    fn sample_functional(g: &TimeGrid) -> Functional {
        let w = make_bump(g, 0.5, 1.5, 1.0).unwrap();
        Functional::linear(make_bump(g, -0.5, 1.0, 0.8).unwrap())
            .with_potential(PotentialTerm::new(w, gauss()).unwrap())
            .unwrap()
            .with_constant(0.25)
    }

    fn test_orbit(g: &TimeGrid) -> Orbit {
        let x = SmoothFunction::from_samples_detected(
            *g,
            vec![g.times().map(|t| 0.3 * t + (1.3 * t).sin()).collect()],
        );
        let mut o = Orbit::from(&x);
        o = Orbit::new(
            *g,
            vec![o.values(0).to_vec()],
            vec![Default::default()],
            vec![Default::default()],
        );
        o
    }

    #[test]
    fn catalog_values_and_bounds() {
        assert!((gauss().eval(&[0.3]) - 0.7).abs() < 1e-15);
        let c = Potential::cosine(-0.4, vec![2.0], 0.0).unwrap();
        assert_eq!(c.eval(&[0.0]), -0.4);
        assert_eq!(c.sup(), 0.4);
        let s = Potential::sech_squared(1.5, vec![0.0, 0.0], 2.0).unwrap();
        assert_eq!(s.eval(&[0.0, 0.0]), 1.5);
        assert!(s.eval(&[4.0, 3.0]) < 1.5 * 4.0 * (-5.0f64).exp());
        assert!(Potential::gaussian(1.0, vec![0.0], 0.0).is_err());
        assert!(Potential::gaussian(1.0, vec![], 1.0).is_err());
    }

    #[test]
    fn constant_functional() {
        let g = grid();
        let f = Functional::constant(g, 1, 1.75);
        assert_eq!(f.evaluate(&test_orbit(&g)).unwrap(), 1.75);
        assert_eq!(f.support(), Support::Empty);
    }

    #[test]
    fn linear_evaluation_is_pairing() {
        let g = grid();
        let f0 = make_bump(&g, 0.0, 1.0, 1.0).unwrap();
        let x = test_orbit(&g);
        let direct = pair_with_orbit(&f0, &x);
        assert_eq!(Functional::linear(f0).evaluate(&x).unwrap(), direct);
    }

    #[test]
    fn support_is_hull() {
        let g = grid();
        let f = Functional::linear(make_bump(&g, 0.5, 0.5, 1.0).unwrap());
        assert_eq!(f.support().bounds(), Some((0.0, 1.0)).map(|(a, b)| {
            let s = f.linear_part().support().bounds().unwrap();
            assert!((s.0 - a).abs() < 2.0 * g.dt() && (s.1 - b).abs() < 2.0 * g.dt());
            s
        }));
        let h = Functional::linear(make_bump(&g, 3.0, 0.5, 1.0).unwrap());
        let sum = &f + &h;
        assert_eq!(sum.support(), f.support().hull(h.support()));
    }

    #[test]
    fn additivity_for_disjoint_pieces() {
        let g = grid();
        let f = sample_functional(&g);
        let x1 = Orbit::from(make_bump(&g, 1.5, 0.6, 0.9).unwrap());
        let x2 = Orbit::from(make_bump(&g, -0.6, 0.5, -1.2).unwrap());
        let x3 = test_orbit(&g);
        let e = |o: &Orbit| f.evaluate(o).unwrap();
        let x123 = x1.try_add(&x2).unwrap().try_add(&x3).unwrap();
        let x13 = x1.try_add(&x3).unwrap();
        let x23 = x2.try_add(&x3).unwrap();
        let lhs = e(&x123) - e(&x13) + e(&x3) - e(&x23);
        assert!(lhs.abs() < 1e-9, "{lhs}");
    }

    #[test]
    fn shift_matches_evaluation_of_moved_orbit() {
        let g = grid();
        let f = sample_functional(&g);
        let x0 = make_bump(&g, 0.2, 1.2, 0.6).unwrap();
        let x = test_orbit(&g);
        let moved = x.try_add(&Orbit::from(&x0)).unwrap();
        let a = f.shift(&x0).unwrap().evaluate(&x).unwrap();
        let b = f.evaluate(&moved).unwrap();
        assert!((a - b).abs() < 1e-10);
        let back = f.shift(&x0).unwrap().shift(&-&x0).unwrap();
        assert!((back.evaluate(&x).unwrap() - f.evaluate(&x).unwrap()).abs() < 1e-10);
        assert_eq!(f.shift(&SmoothFunction::zero(g, 1)).unwrap(), f);
    }

    #[test]
    fn relative_action_of_free_lagrangean() {
        let g = grid();
        let x0 = make_bump(&g, 0.0, 1.5, 0.8).unwrap();
        let chi = window_around(&g, -1.6, 1.6, 0.5).unwrap();
        let d = Lagrangean::free().relative_action(&x0, &chi).unwrap();
        let kx = apply_k(&x0).unwrap();
        assert!((d.linear_part() - &kx).sup_norm() < 1e-14);
        let v = differentiate(&x0, 1).unwrap();
        let half = 0.5 * integrate(&v.squared_norm_density());
        assert!((d.constant_part() - half).abs() < 1e-14);
        assert!(d.potentials().is_empty());
    }

    #[test]
    fn relative_action_requires_cutoff_plateau() {
        let g = grid();
        let x0 = make_bump(&g, 0.0, 1.5, 0.8).unwrap();
        let chi = window_around(&g, -1.0, 1.0, 0.5).unwrap();
        assert!(matches!(
            Lagrangean::free().relative_action(&x0, &chi),
            Err(Error::Precondition(_))
        ));
        let zero = SmoothFunction::zero(g, 1);
        assert!(Lagrangean::interacting(gauss())
            .relative_action(&zero, &chi)
            .unwrap()
            .is_zero());
    }

    #[test]
    fn relative_action_is_cutoff_independent() {
        let g = grid();
        let x0 = make_bump(&g, 0.3, 1.2, 0.5).unwrap();
        let l = Lagrangean::interacting(gauss());
        let narrow = window_around(&g, -1.0, 1.6, 0.4).unwrap();
        let wide = window_around(&g, -3.0, 3.0, 1.5).unwrap();
        let a = l.relative_action(&x0, &narrow).unwrap();
        let b = l.relative_action(&x0, &wide).unwrap();
        let x = test_orbit(&g);
        assert!((a.evaluate(&x).unwrap() - b.evaluate(&x).unwrap()).abs() < 1e-9);
        // Free part also accepts a one-sided step.
        let step = make_step(&g, -3.0, -2.0).unwrap();
        let c = Lagrangean::free().relative_action(&x0, &step).unwrap();
        let d = Lagrangean::free().relative_action(&x0, &wide).unwrap();
        assert!((c.evaluate(&x).unwrap() - d.evaluate(&x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn relative_action_moments_vanish() {
        let g = grid();
        let x0 = &make_bump(&g, 0.3, 1.2, 0.5).unwrap() + &make_bump(&g, -1.0, 0.9, -0.3).unwrap();
        let chi = window_around(&g, -2.5, 2.5, 0.5).unwrap();
        let d = Lagrangean::free().relative_action(&x0, &chi).unwrap();
        let (a, b) = crate::propagators::moment_pair(d.linear_part());
        assert!(a[0].abs() < 1e-8 && b[0].abs() < 1e-8, "{a:?} {b:?}");
    }
}
