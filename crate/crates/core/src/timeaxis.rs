//! Sampled smooth functions of time.
//!
//! Everything downstream (pairings, propagators, functionals, time-ordered
//! exponentials) is built from samples on one uniform [`TimeGrid`]. Integrals
//! use end-corrected trapezoid weights and derivatives use fourth-order centred
//! stencils, so all identities share a single O(dt^4) error budget.
//!
//! Support is explicit metadata. Values outside the declared support are
//! exactly zero (or below [`SUPPORT_THRESHOLD`] for derived functions).

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Sample magnitude below which a value counts as outside the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-14;

/// Minimum number of grid points between a support and the grid edge
/// required by the differentiation stencils.
pub const STENCIL_MARGIN: usize = 2;

/// Uniform grid on the time axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    t_min: f64,
    t_max: f64,
    n_points: usize,
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, n_points: usize) -> Result<Self> {
        if !(t_min.is_finite() && t_max.is_finite()) || t_min >= t_max {
            return Err(Error::Argument(format!(
                "time grid needs t_min < t_max, got [{t_min}, {t_max}]"
            )));
        }
        if n_points < 16 {
            return Err(Error::Argument(format!(
                "time grid needs at least 16 points, got {n_points}"
            )));
        }
        Ok(Self {
            t_min,
            t_max,
            n_points,
        })
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        (self.t_max - self.t_min) / (self.n_points - 1) as f64
    }

    /// Time of grid node `i`.
    pub fn time(&self, i: usize) -> f64 {
        self.t_min + i as f64 * self.dt()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.time(i))
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_min && t <= self.t_max
    }

    /// Smallest node index with time >= t (clamped to the grid).
    pub fn index_at_or_after(&self, t: f64) -> usize {
        let x = ((t - self.t_min) / self.dt() - 1e-9).ceil();
        x.clamp(0.0, (self.n_points - 1) as f64) as usize
    }

    /// Largest node index with time <= t (clamped to the grid).
    pub fn index_at_or_before(&self, t: f64) -> usize {
        let x = ((t - self.t_min) / self.dt() + 1e-9).floor();
        x.clamp(0.0, (self.n_points - 1) as f64) as usize
    }

    /// Node index range covering a support, inclusive.
    pub fn index_range(&self, support: Support) -> Option<(usize, usize)> {
        match support {
            Support::Empty => None,
            Support::Interval { lo, hi } => {
                let a = self.index_at_or_after(lo);
                let b = self.index_at_or_before(hi);
                (a <= b).then_some((a, b))
            }
        }
    }

    /// Gregory weight of node `i`: trapezoid with fourth-order end
    /// corrections. Interior weights are uniform, so sums of centred
    /// differences telescope exactly.
    pub fn quadrature_weight(&self, i: usize) -> f64 {
        const END: [f64; 3] = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];
        let from_end = i.min(self.n_points - 1 - i);
        self.dt() * END.get(from_end).copied().unwrap_or(1.0)
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            t_min: -8.0,
            t_max: 8.0,
            n_points: 2048,
        }
    }
}

/// Closed support interval on the time axis, or the empty set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Support {
    Empty,
    Interval { lo: f64, hi: f64 },
}

impl Support {
    pub fn interval(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        Support::Interval { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Support::Empty)
    }

    pub fn bounds(&self) -> Option<(f64, f64)> {
        match *self {
            Support::Empty => None,
            Support::Interval { lo, hi } => Some((lo, hi)),
        }
    }

    /// Convex hull of two supports.
    pub fn hull(self, other: Support) -> Support {
        match (self, other) {
            (Support::Empty, s) | (s, Support::Empty) => s,
            (Support::Interval { lo: a, hi: b }, Support::Interval { lo: c, hi: d }) => {
                Support::Interval {
                    lo: a.min(c),
                    hi: b.max(d),
                }
            }
        }
    }

    /// Strictly later: every point of `self` is after every point of `other`.
    /// Empty supports are ordered freely.
    pub fn is_later_than(&self, other: &Support) -> bool {
        match (self, other) {
            (Support::Interval { lo, .. }, Support::Interval { hi, .. }) => lo > hi,
            _ => true,
        }
    }

    /// Whether `self` is contained in the closed interval `[lo, hi]`.
    pub fn within(&self, lo: f64, hi: f64) -> bool {
        match *self {
            Support::Empty => true,
            Support::Interval { lo: a, hi: b } => a >= lo && b <= hi,
        }
    }

    pub fn widen(self, by: f64) -> Support {
        match self {
            Support::Empty => Support::Empty,
            Support::Interval { lo, hi } => Support::Interval {
                lo: lo - by,
                hi: hi + by,
            },
        }
    }

    fn clip(self, grid: &TimeGrid) -> Support {
        match self {
            Support::Empty => Support::Empty,
            Support::Interval { lo, hi } => {
                let lo = lo.max(grid.t_min);
                let hi = hi.min(grid.t_max);
                if lo <= hi {
                    Support::Interval { lo, hi }
                } else {
                    Support::Empty
                }
            }
        }
    }
}

/// Support of raw samples, thresholded at [`SUPPORT_THRESHOLD`].
fn detect_support(grid: &TimeGrid, values: &[Vec<f64>]) -> Support {
    let mut first = None;
    let mut last = None;
    for comp in values {
        if let Some(i) = comp.iter().position(|v| v.abs() > SUPPORT_THRESHOLD) {
            first = Some(first.map_or(i, |f: usize| f.min(i)));
        }
        if let Some(i) = comp.iter().rposition(|v| v.abs() > SUPPORT_THRESHOLD) {
            last = Some(last.map_or(i, |l: usize| l.max(i)));
        }
    }
    match (first, last) {
        (Some(a), Some(b)) => Support::interval(grid.time(a), grid.time(b)),
        _ => Support::Empty,
    }
}

/// A compactly supported function of time with `d` components, sampled on a
/// [`TimeGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothFunction {
    grid: TimeGrid,
    values: Vec<Vec<f64>>,
    support: Support,
}

impl SmoothFunction {
    pub fn zero(grid: TimeGrid, components: usize) -> Self {
        assert!(components > 0, "at least one component");
        Self {
            grid,
            values: vec![vec![0.0; grid.len()]; components],
            support: Support::Empty,
        }
    }

    /// Wraps samples with a declared support. Samples outside the support
    /// must be negligible; they are zeroed.
    pub fn from_samples(grid: TimeGrid, values: Vec<Vec<f64>>, support: Support) -> Result<Self> {
        if values.is_empty() || values.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::Argument(
                "sample arrays must match the grid length".into(),
            ));
        }
        if let Support::Interval { lo, hi } = support {
            if lo < grid.t_min - 1e-12 || hi > grid.t_max + 1e-12 {
                return Err(Error::Range(format!(
                    "support [{lo}, {hi}] leaves the grid [{}, {}]",
                    grid.t_min, grid.t_max
                )));
            }
        }
        let mut values = values;
        let range = grid.index_range(support);
        for comp in values.iter_mut() {
            for (i, v) in comp.iter_mut().enumerate() {
                let inside = range.is_some_and(|(a, b)| i >= a && i <= b);
                if !inside {
                    if v.abs() > SUPPORT_THRESHOLD {
                        return Err(Error::Argument(format!(
                            "sample {v:e} at t = {} lies outside the declared support",
                            grid.time(i)
                        )));
                    }
                    *v = 0.0;
                }
            }
        }
        Ok(Self {
            grid,
            values,
            support: support.clip(&grid),
        })
    }

    /// Wraps samples and infers the support once from the sample magnitudes.
    pub fn from_samples_detected(grid: TimeGrid, mut values: Vec<Vec<f64>>) -> Self {
        assert!(!values.is_empty() && values.iter().all(|c| c.len() == grid.len()));
        for comp in values.iter_mut() {
            for v in comp.iter_mut() {
                if v.abs() <= SUPPORT_THRESHOLD {
                    *v = 0.0;
                }
            }
        }
        let support = detect_support(&grid, &values);
        Self {
            grid,
            values,
            support,
        }
    }

    /// Samples a scalar closure on the grid, restricted to `support`.
    pub fn from_fn(grid: TimeGrid, support: Support, f: impl Fn(f64) -> f64) -> Result<Self> {
        let mut values = vec![0.0; grid.len()];
        if let Some((a, b)) = grid.index_range(support) {
            for (i, v) in values.iter_mut().enumerate().take(b + 1).skip(a) {
                *v = f(grid.time(i));
            }
        }
        Self::from_samples(grid, vec![values], support)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.values.len()
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn values(&self, component: usize) -> &[f64] {
        &self.values[component]
    }

    pub fn all_values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Sample at node `i`.
    pub fn sample(&self, component: usize, i: usize) -> f64 {
        self.values[component][i]
    }

    /// Value at an arbitrary time by cubic Hermite interpolation of the
    /// samples; zero off the grid.
    pub fn at(&self, component: usize, t: f64) -> f64 {
        interpolate(&self.grid, &self.values[component], t)
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    /// Sup norm over all components.
    pub fn sup_norm(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Places a scalar function into component `component` of a
    /// `components`-dimensional function.
    pub fn into_component(self, component: usize, components: usize) -> Result<Self> {
        if self.components() != 1 || component >= components {
            return Err(Error::Argument(format!(
                "cannot embed a {}-component function as component {component} of {components}",
                self.components()
            )));
        }
        let mut values = vec![vec![0.0; self.grid.len()]; components];
        values[component] = self.values.into_iter().next().unwrap();
        Ok(Self {
            grid: self.grid,
            values,
            support: self.support,
        })
    }

    pub fn component(&self, component: usize) -> SmoothFunction {
        let values = vec![self.values[component].clone()];
        SmoothFunction::from_samples_detected(self.grid, values)
            .with_support_within(self.support)
    }

    fn with_support_within(mut self, outer: Support) -> Self {
        if let (Support::Interval { lo, hi }, Some((a, b))) = (self.support, outer.bounds()) {
            self.support = Support::interval(lo.max(a), hi.min(b));
        }
        self
    }

    /// Pointwise product with a scalar weight sampled on the same grid.
    pub fn weighted(&self, weight: &[f64]) -> SmoothFunction {
        assert_eq!(weight.len(), self.grid.len());
        let values = self
            .values
            .iter()
            .map(|c| c.iter().zip(weight).map(|(v, w)| v * w).collect())
            .collect();
        SmoothFunction::from_samples_detected(self.grid, values).with_support_within(self.support)
    }

    /// Pointwise product of two functions (the second must be scalar).
    pub fn product(&self, scalar: &SmoothFunction) -> Result<SmoothFunction> {
        self.check_grid(scalar)?;
        if scalar.components() != 1 {
            return Err(Error::Argument("product weight must be scalar".into()));
        }
        let values = self
            .values
            .iter()
            .map(|c| c.iter().zip(&scalar.values[0]).map(|(a, b)| a * b).collect())
            .collect();
        Ok(SmoothFunction::from_samples_detected(self.grid, values))
    }

    /// Sum of squares of components, a scalar function.
    pub fn squared_norm_density(&self) -> SmoothFunction {
        let n = self.grid.len();
        let mut out = vec![0.0; n];
        for c in &self.values {
            for (o, v) in out.iter_mut().zip(c) {
                *o += v * v;
            }
        }
        SmoothFunction::from_samples_detected(self.grid, vec![out]).with_support_within(self.support)
    }

    /// Translates samples by `steps` grid nodes (positive = later).
    pub fn translate_nodes(&self, steps: isize) -> Result<SmoothFunction> {
        let n = self.grid.len() as isize;
        let shift = steps as f64 * self.grid.dt();
        let support = self.support.widen(0.0);
        let support = match support {
            Support::Empty => Support::Empty,
            Support::Interval { lo, hi } => Support::interval(lo + shift, hi + shift),
        };
        if !support.within(self.grid.t_min - 1e-12, self.grid.t_max + 1e-12) {
            return Err(Error::Range("translated support leaves the grid".into()));
        }
        let values = self
            .values
            .iter()
            .map(|c| {
                (0..n)
                    .map(|i| {
                        let j = i - steps;
                        if (0..n).contains(&j) {
                            c[j as usize]
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        SmoothFunction::from_samples(self.grid, values, support)
    }

    pub fn check_grid(&self, other: &SmoothFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Argument("functions live on different grids".into()));
        }
        Ok(())
    }

    fn check_shape(&self, other: &SmoothFunction) -> Result<()> {
        self.check_grid(other)?;
        if self.components() != other.components() {
            return Err(Error::Argument(format!(
                "component mismatch: {} vs {}",
                self.components(),
                other.components()
            )));
        }
        Ok(())
    }

    fn zip_with(&self, other: &SmoothFunction, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_shape(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| op(*x, *y)).collect())
            .collect();
        Ok(Self {
            grid: self.grid,
            values,
            support: self.support.hull(other.support),
        })
    }

    pub fn try_add(&self, other: &SmoothFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &SmoothFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Self {
        if factor == 0.0 {
            return Self::zero(self.grid, self.components());
        }
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .map(|c| c.iter().map(|v| v * factor).collect())
                .collect(),
            support: self.support,
        }
    }
}

impl Add for &SmoothFunction {
    type Output = SmoothFunction;
    fn add(self, rhs: &SmoothFunction) -> SmoothFunction {
        self.try_add(rhs).expect("incompatible functions")
    }
}

impl Sub for &SmoothFunction {
    type Output = SmoothFunction;
    fn sub(self, rhs: &SmoothFunction) -> SmoothFunction {
        self.try_sub(rhs).expect("incompatible functions")
    }
}

impl Neg for &SmoothFunction {
    type Output = SmoothFunction;
    fn neg(self) -> SmoothFunction {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &SmoothFunction {
    type Output = SmoothFunction;
    fn mul(self, rhs: f64) -> SmoothFunction {
        self.scale(rhs)
    }
}

/// Affine function `slope * t + intercept`, used for propagator tails.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Affine {
    pub slope: f64,
    pub intercept: f64,
}

impl Affine {
    pub fn eval(&self, t: f64) -> f64 {
        self.slope * t + self.intercept
    }
}

/// A sampled orbit that need not be compactly supported: samples on the grid
/// plus exact affine continuations before and after it.
#[derive(Clone, Debug, PartialEq)]
pub struct Orbit {
    grid: TimeGrid,
    values: Vec<Vec<f64>>,
    early: Vec<Affine>,
    late: Vec<Affine>,
}

impl Orbit {
    pub fn new(grid: TimeGrid, values: Vec<Vec<f64>>, early: Vec<Affine>, late: Vec<Affine>) -> Self {
        assert!(!values.is_empty());
        assert!(values.len() == early.len() && values.len() == late.len());
        assert!(values.iter().all(|c| c.len() == grid.len()));
        Self {
            grid,
            values,
            early,
            late,
        }
    }

    pub fn zero(grid: TimeGrid, components: usize) -> Self {
        Self::from(&SmoothFunction::zero(grid, components))
    }

    /// Samples an arbitrary closure per component; the closure also defines
    /// the tails, which must be affine off the grid.
    pub fn affine(grid: TimeGrid, lines: &[Affine]) -> Self {
        let values = lines
            .iter()
            .map(|l| grid.times().map(|t| l.eval(t)).collect())
            .collect();
        Self::new(grid, values, lines.to_vec(), lines.to_vec())
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn components(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self, component: usize) -> &[f64] {
        &self.values[component]
    }

    pub fn early_tail(&self, component: usize) -> Affine {
        self.early[component]
    }

    pub fn late_tail(&self, component: usize) -> Affine {
        self.late[component]
    }

    /// Value at node index `i`, where indices outside the grid use the tails.
    pub fn node(&self, component: usize, i: isize) -> f64 {
        let n = self.grid.len() as isize;
        if i < 0 {
            self.early[component].eval(self.grid.t_min + i as f64 * self.grid.dt())
        } else if i >= n {
            self.late[component].eval(self.grid.t_min + i as f64 * self.grid.dt())
        } else {
            self.values[component][i as usize]
        }
    }

    /// Value at any time.
    pub fn at(&self, component: usize, t: f64) -> f64 {
        if t < self.grid.t_min {
            self.early[component].eval(t)
        } else if t > self.grid.t_max {
            self.late[component].eval(t)
        } else {
            interpolate(&self.grid, &self.values[component], t)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|c| c.iter().all(|v| *v == 0.0))
            && self
                .early
                .iter()
                .chain(&self.late)
                .all(|a| a.slope == 0.0 && a.intercept == 0.0)
    }

    pub fn sup_norm_on_grid(&self) -> f64 {
        self.values
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    fn zip_with(&self, other: &Orbit, op: impl Fn(f64, f64) -> f64 + Copy) -> Result<Orbit> {
        if self.grid != other.grid || self.components() != other.components() {
            return Err(Error::Argument("orbits have different shapes".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| op(*x, *y)).collect())
            .collect();
        let tails = |x: &[Affine], y: &[Affine]| {
            x.iter()
                .zip(y)
                .map(|(p, q)| Affine {
                    slope: op(p.slope, q.slope),
                    intercept: op(p.intercept, q.intercept),
                })
                .collect()
        };
        Ok(Orbit {
            grid: self.grid,
            values,
            early: tails(&self.early, &other.early),
            late: tails(&self.late, &other.late),
        })
    }

    pub fn try_add(&self, other: &Orbit) -> Result<Orbit> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Orbit) -> Result<Orbit> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Orbit {
        let sc = |v: &[Affine]| {
            v.iter()
                .map(|a| Affine {
                    slope: a.slope * factor,
                    intercept: a.intercept * factor,
                })
                .collect()
        };
        Orbit {
            grid: self.grid,
            values: self
                .values
                .iter()
                .map(|c| c.iter().map(|v| v * factor).collect())
                .collect(),
            early: sc(&self.early),
            late: sc(&self.late),
        }
    }
}

impl From<&SmoothFunction> for Orbit {
    fn from(f: &SmoothFunction) -> Self {
        let d = f.components();
        Orbit {
            grid: f.grid,
            values: f.values.clone(),
            early: vec![Affine::default(); d],
            late: vec![Affine::default(); d],
        }
    }
}

impl From<SmoothFunction> for Orbit {
    fn from(f: SmoothFunction) -> Self {
        Orbit::from(&f)
    }
}

/// Cubic Hermite interpolation with fourth-order node derivatives; zero off
/// the grid.
pub(crate) fn interpolate(grid: &TimeGrid, values: &[f64], t: f64) -> f64 {
    if !grid.contains(t) {
        return 0.0;
    }
    let h = grid.dt();
    let n = values.len();
    let x = (t - grid.t_min) / h;
    let i = (x.floor() as usize).min(n - 2);
    let s = x - i as f64;
    let at = |k: isize| -> f64 {
        if k < 0 || k >= n as isize {
            0.0
        } else {
            values[k as usize]
        }
    };
    let deriv = |k: isize| -> f64 {
        (at(k - 2) - 8.0 * at(k - 1) + 8.0 * at(k + 1) - at(k + 2)) / 12.0
    };
    let (p0, p1) = (at(i as isize), at(i as isize + 1));
    let (m0, m1) = (deriv(i as isize), deriv(i as isize + 1));
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * p0
        + (s3 - 2.0 * s2 + s) * m0
        + (-2.0 * s3 + 3.0 * s2) * p1
        + (s3 - s2) * m1
}

/// `exp(1 - 1/(1-u^2))` on |u| < 1, zero elsewhere; equals 1 at u = 0.
pub fn bump_profile(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - u * u)).exp()
    }
}

fn flat_exp(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

/// Smooth partition `B(u) / (B(u) + B(1-u))`: 0 for u <= 0, 1 for u >= 1.
pub fn smooth_transition(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = flat_exp(u);
        let b = flat_exp(1.0 - u);
        a / (a + b)
    }
}

/// Scalar bump `amplitude * exp(1 - 1/(1-u^2))`, `u = (t - center)/halfwidth`.
pub fn make_bump(grid: &TimeGrid, center: f64, halfwidth: f64, amplitude: f64) -> Result<SmoothFunction> {
    if !(halfwidth > 0.0) {
        return Err(Error::Argument(format!("bump halfwidth must be positive, got {halfwidth}")));
    }
    let (lo, hi) = (center - halfwidth, center + halfwidth);
    if lo < grid.t_min || hi > grid.t_max {
        return Err(Error::Range(format!(
            "bump support [{lo}, {hi}] leaves the grid [{}, {}]",
            grid.t_min, grid.t_max
        )));
    }
    SmoothFunction::from_fn(*grid, Support::interval(lo, hi), |t| {
        amplitude * bump_profile((t - center) / halfwidth)
    })
}

/// Bump placed in one component of a `components`-dimensional loop.
pub fn make_bump_component(
    grid: &TimeGrid,
    center: f64,
    halfwidth: f64,
    amplitude: f64,
    component: usize,
    components: usize,
) -> Result<SmoothFunction> {
    make_bump(grid, center, halfwidth, amplitude)?.into_component(component, components)
}

/// Smooth cutoff: a rising ramp, optionally followed by a falling ramp.
#[derive(Clone, Debug, PartialEq)]
pub struct CutoffFunction {
    grid: TimeGrid,
    values: Vec<f64>,
    rise: (f64, f64),
    fall: Option<(f64, f64)>,
}

impl CutoffFunction {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn rise(&self) -> (f64, f64) {
        self.rise
    }

    pub fn fall(&self) -> Option<(f64, f64)> {
        self.fall
    }

    /// Exact value at any time.
    pub fn value_at(&self, t: f64) -> f64 {
        let up = smooth_transition((t - self.rise.0) / (self.rise.1 - self.rise.0));
        match self.fall {
            None => up,
            Some((a, b)) => up * (1.0 - smooth_transition((t - a) / (b - a))),
        }
    }

    /// Interval on which the cutoff is identically one.
    pub fn plateau(&self) -> (f64, f64) {
        (self.rise.1, self.fall.map_or(f64::INFINITY, |f| f.0))
    }

    pub fn is_compact(&self) -> bool {
        self.fall.is_some()
    }

    /// Support of the cutoff, `None` when it extends to +infinity.
    pub fn support(&self) -> Option<Support> {
        self.fall.map(|(_, b)| Support::interval(self.rise.0, b))
    }

    /// Whether the cutoff equals one on `[lo, hi]` within 1e-12.
    pub fn is_one_on(&self, lo: f64, hi: f64) -> bool {
        let (a, b) = self.plateau();
        if lo >= a && hi <= b {
            return true;
        }
        match self.grid.index_range(Support::interval(lo, hi)) {
            None => true,
            Some((i, j)) => (i..=j).all(|k| (self.values[k] - 1.0).abs() <= 1e-12),
        }
    }

    /// The cutoff as a compactly supported function (windows only).
    pub fn to_smooth(&self) -> Result<SmoothFunction> {
        let support = self.support().ok_or_else(|| {
            Error::Argument("a one-sided step is not compactly supported".into())
        })?;
        SmoothFunction::from_samples(self.grid, vec![self.values.clone()], support)
    }

    /// `1 - chi` sampled on the grid.
    pub fn complement(&self) -> Vec<f64> {
        self.values.iter().map(|v| 1.0 - v).collect()
    }
}

/// One-sided smooth step: 0 below `ramp_lo`, 1 above `ramp_hi`.
pub fn make_step(grid: &TimeGrid, ramp_lo: f64, ramp_hi: f64) -> Result<CutoffFunction> {
    if !(ramp_lo < ramp_hi) {
        return Err(Error::Argument(format!(
            "degenerate ramp [{ramp_lo}, {ramp_hi}]"
        )));
    }
    let mut c = CutoffFunction {
        grid: *grid,
        values: Vec::new(),
        rise: (ramp_lo, ramp_hi),
        fall: None,
    };
    c.values = grid.times().map(|t| c.value_at(t)).collect();
    Ok(c)
}

/// Two-sided smooth characteristic function: rises on `[rise_lo, rise_hi]`,
/// equals one up to `fall_lo`, vanishes after `fall_hi`.
pub fn make_window(
    grid: &TimeGrid,
    rise_lo: f64,
    rise_hi: f64,
    fall_lo: f64,
    fall_hi: f64,
) -> Result<CutoffFunction> {
    if !(rise_lo < rise_hi && rise_hi <= fall_lo && fall_lo < fall_hi) {
        return Err(Error::Argument(format!(
            "window ramps must be ordered, got [{rise_lo}, {rise_hi}] / [{fall_lo}, {fall_hi}]"
        )));
    }
    if rise_lo < grid.t_min || fall_hi > grid.t_max {
        return Err(Error::Range(format!(
            "window [{rise_lo}, {fall_hi}] leaves the grid"
        )));
    }
    let mut c = CutoffFunction {
        grid: *grid,
        values: Vec::new(),
        rise: (rise_lo, rise_hi),
        fall: Some((fall_lo, fall_hi)),
    };
    c.values = grid.times().map(|t| c.value_at(t)).collect();
    Ok(c)
}

/// Window equal to one on `[lo, hi]` with ramps of width `ramp` on each side.
pub fn window_around(grid: &TimeGrid, lo: f64, hi: f64, ramp: f64) -> Result<CutoffFunction> {
    make_window(grid, lo - ramp, lo, hi, hi + ramp)
}

/// Quadrature summed over all components.
pub fn integrate(f: &SmoothFunction) -> f64 {
    integrate_components(f).iter().sum()
}

/// Quadrature of each component.
pub fn integrate_components(f: &SmoothFunction) -> Vec<f64> {
    let grid = f.grid;
    match grid.index_range(f.support) {
        None => vec![0.0; f.components()],
        Some((a, b)) => f
            .values
            .iter()
            .map(|c| (a..=b).map(|i| grid.quadrature_weight(i) * c[i]).sum())
            .collect(),
    }
}

/// Quadrature of raw samples over the whole grid.
pub fn integrate_samples(grid: &TimeGrid, values: &[f64]) -> f64 {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| grid.quadrature_weight(i) * v)
        .sum()
}

/// Running integral `I_i = int_{t_min}^{t_i} f` with a fourth-order
/// per-interval cubic rule. Samples beyond the grid are taken as zero, so
/// the integrand must vanish near both ends.
pub fn cumulative_integral(grid: &TimeGrid, values: &[f64]) -> Vec<f64> {
    let h = grid.dt();
    let n = values.len();
    let at = |k: isize| -> f64 {
        if k < 0 || k >= n as isize {
            0.0
        } else {
            values[k as usize]
        }
    };
    let mut out = vec![0.0; n];
    let mut acc = 0.0;
    for i in 0..n - 1 {
        let k = i as isize;
        acc += h / 24.0 * (-at(k - 1) + 13.0 * at(k) + 13.0 * at(k + 1) - at(k + 2));
        out[i + 1] = acc;
    }
    out
}

fn stencil(order: u8, h: f64, at: impl Fn(isize) -> f64, k: isize) -> f64 {
    match order {
        1 => (at(k - 2) - 8.0 * at(k - 1) + 8.0 * at(k + 1) - at(k + 2)) / (12.0 * h),
        _ => {
            (-at(k - 2) + 16.0 * at(k - 1) - 30.0 * at(k) + 16.0 * at(k + 1) - at(k + 2))
                / (12.0 * h * h)
        }
    }
}

/// Fourth-order centred derivative of order 1 or 2. The support must keep
/// [`STENCIL_MARGIN`] nodes away from the grid ends; the result's support
/// widens by that many nodes.
pub fn differentiate(f: &SmoothFunction, order: u8) -> Result<SmoothFunction> {
    if order != 1 && order != 2 {
        return Err(Error::Argument(format!("derivative order must be 1 or 2, got {order}")));
    }
    let grid = f.grid;
    let h = grid.dt();
    let Some((a, b)) = grid.index_range(f.support) else {
        return Ok(SmoothFunction::zero(grid, f.components()));
    };
    let (lo, hi) = f.support.bounds().unwrap();
    let margin = STENCIL_MARGIN as f64 * h;
    if lo < grid.t_min + margin - 1e-12 || hi > grid.t_max - margin + 1e-12 {
        return Err(Error::Range(format!(
            "support [{lo}, {hi}] touches the grid boundary; differentiation needs {} nodes of margin",
            STENCIL_MARGIN
        )));
    }
    let n = grid.len() as isize;
    let (start, end) = (a as isize - 2, b as isize + 2);
    let values = f
        .values
        .iter()
        .map(|c| {
            let at = |k: isize| if k < 0 || k >= n { 0.0 } else { c[k as usize] };
            let mut out = vec![0.0; grid.len()];
            for k in start.max(0)..=end.min(n - 1) {
                let v = stencil(order, h, at, k);
                out[k as usize] = if v.abs() > SUPPORT_THRESHOLD { v } else { 0.0 };
            }
            out
        })
        .collect();
    let support = f.support.widen(margin).clip(&grid);
    SmoothFunction::from_samples(grid, values, support)
}

/// Fourth-order second derivative of an orbit; the affine tails supply the
/// stencil values beyond the grid, where the exact second derivative is zero.
pub fn second_derivative_orbit(orbit: &Orbit) -> SmoothFunction {
    let grid = orbit.grid;
    let h = grid.dt();
    let n = grid.len() as isize;
    let values = (0..orbit.components())
        .map(|c| (0..n).map(|k| stencil(2, h, |j| orbit.node(c, j), k)).collect())
        .collect();
    SmoothFunction::from_samples_detected(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> TimeGrid {
        TimeGrid::default()
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(0.0, 1.0, 15).is_err());
        assert!(TimeGrid::new(1.0, 1.0, 32).is_err());
        let g = grid();
        assert!((g.dt() - 16.0 / 2047.0).abs() < 1e-15);
        let total: f64 = (0..g.len()).map(|i| g.quadrature_weight(i)).sum();
        assert!((total - 16.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_weights_even_interval_count() {
        let g = TimeGrid::new(0.0, 1.0, 17).unwrap();
        let f: Vec<f64> = g.times().map(|t| t * t * t).collect();
        assert!((integrate_samples(&g, &f) - 0.25).abs() < 1e-14);
        let g = TimeGrid::new(0.0, 1.0, 18).unwrap();
        let f: Vec<f64> = g.times().map(|t| t * t * t).collect();
        assert!((integrate_samples(&g, &f) - 0.25).abs() < 1e-14);
    }

    #[test]
    fn bump_values() {
        let f = make_bump(&grid(), 0.0, 1.0, 1.0).unwrap();
        assert_eq!(bump_profile(0.0), 1.0);
        assert_eq!(bump_profile(1.0), 0.0);
        assert_eq!(bump_profile(-1.0), 0.0);
        assert_eq!(f.support(), Support::interval(-1.0, 1.0));
        assert!(f.at(0, 5.0).abs() == 0.0);
    }

    #[test]
    fn bump_out_of_range() {
        assert!(matches!(make_bump(&grid(), 7.5, 1.0, 1.0), Err(Error::Range(_))));
        assert!(matches!(make_bump(&grid(), 0.0, 0.0, 1.0), Err(Error::Argument(_))));
    }

    #[test]
    fn bump_integral_matches_reference() {
        // e * int_{-1}^{1} exp(-1/(1-u^2)) du by 30-digit adaptive quadrature.
        const BUMP_INTEGRAL: f64 = 1.206_900_322_437_876;
        let f = make_bump(&grid(), 0.0, 1.0, 1.0).unwrap();
        assert!((integrate(&f) - BUMP_INTEGRAL).abs() < 1e-10);
    }

    #[test]
    fn step_values() {
        let s = make_step(&grid(), 0.0, 1.0).unwrap();
        assert_eq!(s.value_at(-5.0), 0.0);
        assert_eq!(s.value_at(5.0), 1.0);
        assert!((s.value_at(0.5) - 0.5).abs() < 1e-15);
        assert!(make_step(&grid(), 1.0, 1.0).is_err());
        for t in [-0.3, 0.1, 0.25, 0.7, 0.99] {
            assert!(s.value_at(t) <= s.value_at(t + 0.01));
        }
    }

    #[test]
    fn window_is_one_on_plateau() {
        let w = make_window(&grid(), -2.0, -1.0, 1.0, 2.0).unwrap();
        assert!(w.is_one_on(-1.0, 1.0));
        assert!(!w.is_one_on(-1.5, 1.0));
        assert_eq!(w.value_at(-2.5), 0.0);
        assert_eq!(w.value_at(2.5), 0.0);
        assert!(w.to_smooth().is_ok());
        assert!(make_step(&grid(), 0.0, 1.0).unwrap().to_smooth().is_err());
    }

    #[test]
    fn zero_function_integrates_to_zero() {
        let z = SmoothFunction::zero(grid(), 2);
        assert_eq!(integrate(&z), 0.0);
        assert!(differentiate(&z, 1).unwrap().is_zero());
    }

    #[test]
    fn integral_is_linear() {
        let g = grid();
        let f = make_bump(&g, 0.3, 0.7, 1.3).unwrap();
        let h = make_bump(&g, -1.0, 0.4, -0.6).unwrap();
        let lhs = integrate(&(&f + &h));
        assert!((lhs - integrate(&f) - integrate(&h)).abs() < 1e-12);
        assert!(integrate(&f.product(&f).unwrap()) >= 0.0);
    }

    #[test]
    fn derivative_of_even_bump_vanishes_at_centre() {
        let g = grid();
        let f = make_bump(&g, 0.0, 1.0, 1.0).unwrap();
        let df = differentiate(&f, 1).unwrap();
        assert!(df.at(0, 0.0).abs() < 1e-12);
        assert!(df.support().within(-1.0 - 3.0 * g.dt(), 1.0 + 3.0 * g.dt()));
    }

    #[test]
    fn differentiation_needs_margin() {
        let g = TimeGrid::new(-1.0, 1.0, 64).unwrap();
        let f = make_bump(&g, 0.0, 1.0, 1.0).unwrap();
        assert!(matches!(differentiate(&f, 1), Err(Error::Range(_))));
        assert!(differentiate(&f, 3).is_err());
    }

    #[test]
    fn windowed_sine_derivative_matches_closed_form() {
        // f(t) = sin(3t) * b(t/2) with b the unit bump; derivative in closed form.
        let g = TimeGrid::new(-4.0, 4.0, 2048).unwrap();
        let bump = |u: f64| bump_profile(u);
        let dbump = |u: f64| {
            if u.abs() >= 1.0 {
                0.0
            } else {
                let q = 1.0 - u * u;
                bump(u) * (-2.0 * u / (q * q))
            }
        };
        let f = SmoothFunction::from_fn(g, Support::interval(-2.0, 2.0), |t| {
            (3.0 * t).sin() * bump(t / 2.0)
        })
        .unwrap();
        let df = differentiate(&f, 1).unwrap();
        let err = g
            .times()
            .enumerate()
            .map(|(i, t)| {
                let exact = 3.0 * (3.0 * t).cos() * bump(t / 2.0)
                    + (3.0 * t).sin() * dbump(t / 2.0) / 2.0;
                (df.sample(0, i) - exact).abs()
            })
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "derivative error {err}");
    }

    #[test]
    fn second_derivative_agrees_with_iterated_first() {
        let g = grid();
        // Broad enough for the iterated 9-point stencil to resolve the bump edges.
        let f = make_bump(&g, 0.0, 7.5, 0.8).unwrap();
        let d2 = differentiate(&f, 2).unwrap();
        let d11 = differentiate(&differentiate(&f, 1).unwrap(), 1).unwrap();
        let diff = (&d2 - &d11).sup_norm();
        assert!(diff < 1e-6 * d2.sup_norm(), "relative mismatch {}", diff / d2.sup_norm());
    }

    #[test]
    fn translation_commutes_with_bump_constructor() {
        let g = grid();
        let k = 37;
        let tau = k as f64 * g.dt();
        let f = make_bump(&g, 0.1, 0.9, 1.0).unwrap();
        let shifted = make_bump(&g, 0.1 + tau, 0.9, 1.0).unwrap();
        let moved = f.translate_nodes(k).unwrap();
        let diff = (0..g.len())
            .map(|i| (moved.sample(0, i) - shifted.sample(0, i)).abs())
            .fold(0.0, f64::max);
        assert!(diff < 1e-13, "translation mismatch {diff}");
    }

    #[test]
    fn declared_support_is_enforced() {
        let g = TimeGrid::new(0.0, 1.0, 32).unwrap();
        let values = vec![vec![1.0; 32]];
        assert!(SmoothFunction::from_samples(g, values, Support::interval(0.2, 0.4)).is_err());
    }

    #[test]
    fn cumulative_integral_total_matches_quadrature() {
        let g = grid();
        let f = make_bump(&g, 0.0, 0.5, 1.0).unwrap();
        let cum = cumulative_integral(&g, f.values(0));
        assert!((cum[g.len() - 1] - integrate(&f)).abs() < 1e-13);
    }

    #[test]
    fn interpolation_reproduces_nodes_and_smooth_values() {
        let g = grid();
        let f = make_bump(&g, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(f.at(0, g.time(1024)), f.sample(0, 1024));
        let t = 0.123_456;
        assert!((f.at(0, t) - bump_profile(t)).abs() < 1e-8);
    }
}
