//! Discretized Schrödinger representation.
//!
//! Wave functions live on a periodic position grid in `d ≤ 2` dimensions;
//! `Q` is diagonal and `P` acts by FFT. An operator is known through its
//! images of the tracked states (the lowest harmonic-oscillator states), and
//! every identity is measured as the largest image difference over them.

pub mod ode;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::functionals::{Functional, PotentialTerm};
use crate::groupalg::{moments, GroupWord};
use crate::propagators::{apply_propagator, pairing, KernelKind};
use crate::timeaxis::{cumulative_integral, SmoothFunction, Support, TimeGrid};

pub use ode::{OdeOptions, OdeStats};

type C = Complex64;

const ZERO: C = C { re: 0.0, im: 0.0 };
const I: C = C { re: 0.0, im: 1.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct RepConfig {
    pub x_min: f64,
    pub x_max: f64,
    /// Points per dimension; must be a power of two.
    pub n_x: usize,
    pub dim: usize,
    pub k_track: usize,
    /// Tracked states must be smaller than this on the box edge.
    pub boundary_limit: f64,
    /// Free spreading may put at most this much norm into the boundary
    /// layer before the Heisenberg horizon is reached.
    pub horizon_limit: f64,
    pub ode: OdeOptions,
}

impl Default for RepConfig {
    fn default() -> Self {
        RepConfig {
            x_min: -12.0,
            x_max: 12.0,
            n_x: 256,
            dim: 1,
            k_track: 24,
            boundary_limit: 1e-10,
            horizon_limit: 1e-8,
            ode: OdeOptions::default(),
        }
    }
}

/// Checks measured while building a [`RepSpace`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RepDiagnostics {
    /// `max |([Q_c,P_c] − i)ψ|` in continuum amplitude over tracked states.
    pub ccr_defect: f64,
    /// `max ‖Hψ_n − E_nψ_n‖` for the ten lowest oscillator states.
    pub oscillator_defect: f64,
    /// `max ‖U₀(t)U₀(−t)ψ − ψ‖`.
    pub unitarity_defect: f64,
    /// Largest continuum amplitude of a tracked state on the box edge.
    pub edge_amplitude: f64,
    /// Boundary-layer norm of the tracked states.
    pub boundary_leakage: f64,
    /// Largest `|t|` for which freely evolved tracked states stay below
    /// `horizon_limit` on the box edge.
    pub horizon: f64,
}

pub struct RepSpace {
    config: RepConfig,
    dx: f64,
    len: usize,
    coords: Vec<f64>,
    wavenumbers: Vec<f64>,
    wavenumbers_sq: Vec<f64>,
    /// `|k|²/2` per Fourier index.
    kinetic: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    layer: Vec<bool>,
    tracked: Vec<Vec<C>>,
    diagnostics: RepDiagnostics,
}

impl fmt::Debug for RepSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RepSpace")
            .field("config", &self.config)
            .field("diagnostics", &self.diagnostics)
            .finish()
    }
}

/// Build the representation and measure its invariants.
pub fn build_rep(config: &RepConfig) -> Result<RepSpace> {
    RepSpace::new(config.clone())
}

impl RepSpace {
    pub fn new(config: RepConfig) -> Result<Self> {
        if !config.n_x.is_power_of_two() || config.n_x < 16 {
            return Err(Error::Argument(format!(
                "n_x = {} must be a power of two ≥ 16",
                config.n_x
            )));
        }
        if !(1..=2).contains(&config.dim) {
            return Err(Error::Argument(format!(
                "only d = 1 or 2 is supported, got {}",
                config.dim
            )));
        }
        if !(config.x_min < config.x_max) {
            return Err(Error::Argument("empty position box".into()));
        }
        if config.k_track == 0 {
            return Err(Error::Argument("k_track must be positive".into()));
        }
        let n = config.n_x;
        let width = config.x_max - config.x_min;
        let dx = width / n as f64;
        let coords: Vec<f64> = (0..n).map(|j| config.x_min + j as f64 * dx).collect();
        let wavenumbers_sq: Vec<f64> = (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                let k = 2.0 * PI * m / width;
                k * k
            })
            .collect();
        // Odd derivative: the Nyquist mode has no sign and is dropped.
        let wavenumbers: Vec<f64> = (0..n)
            .map(|j| {
                if j == n / 2 {
                    0.0
                } else {
                    let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                    2.0 * PI * m / width
                }
            })
            .collect();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let len = n.pow(config.dim as u32);
        let layer_width = width / 16.0;
        let (lo, hi) = (config.x_min + layer_width, config.x_max - layer_width);
        let in_layer = move |x: f64| x < lo || x >= hi;
        let mut rep = RepSpace {
            dx,
            len,
            coords,
            wavenumbers,
            wavenumbers_sq,
            kinetic: Vec::new(),
            fft,
            ifft,
            layer: Vec::new(),
            tracked: Vec::new(),
            diagnostics: RepDiagnostics::default(),
            config,
        };
        rep.kinetic = (0..len)
            .map(|idx| {
                (0..rep.config.dim)
                    .map(|c| 0.5 * rep.wavenumbers_sq[rep.wave_index(c, idx)])
                    .sum()
            })
            .collect();
        rep.layer = (0..len)
            .map(|idx| (0..rep.config.dim).any(|c| in_layer(rep.coord(c, idx))))
            .collect();
        rep.tracked = rep.oscillator_states(rep.config.k_track);
        rep.diagnostics = rep.measure()?;
        Ok(rep)
    }

    pub fn config(&self) -> &RepConfig {
        &self.config
    }

    pub fn diagnostics(&self) -> &RepDiagnostics {
        &self.diagnostics
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    /// Number of grid points (`n_x^d`).
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn horizon(&self) -> f64 {
        self.diagnostics.horizon
    }

    pub fn tracked(&self) -> &[Vec<C>] {
        &self.tracked
    }

    pub fn k_track(&self) -> usize {
        self.tracked.len()
    }

    /// Coordinate `c` of grid point `idx` (row-major, first coordinate slowest).
    pub fn coord(&self, c: usize, idx: usize) -> f64 {
        let n = self.config.n_x;
        let j = if self.config.dim == 1 {
            idx
        } else if c == 0 {
            idx / n
        } else {
            idx % n
        };
        self.coords[j]
    }

    pub fn point(&self, idx: usize) -> [f64; 2] {
        [self.coord(0, idx), if self.config.dim > 1 { self.coord(1, idx) } else { 0.0 }]
    }

    fn wave_index(&self, c: usize, idx: usize) -> usize {
        let n = self.config.n_x;
        if self.config.dim == 1 {
            idx
        } else if c == 0 {
            idx / n
        } else {
            idx % n
        }
    }

    fn transform(&self, psi: &mut [C], inverse: bool) {
        let n = self.config.n_x;
        let plan = if inverse { &self.ifft } else { &self.fft };
        if self.config.dim == 1 {
            plan.process(psi);
        } else {
            for row in psi.chunks_mut(n) {
                plan.process(row);
            }
            let mut column = vec![ZERO; n];
            for j in 0..n {
                for i in 0..n {
                    column[i] = psi[i * n + j];
                }
                plan.process(&mut column);
                for i in 0..n {
                    psi[i * n + j] = column[i];
                }
            }
        }
        if inverse {
            let scale = 1.0 / self.len as f64;
            psi.iter_mut().for_each(|z| *z *= scale);
        }
    }

    /// Multiply in Fourier space by `m(idx)`.
    fn fourier_multiply(&self, psi: &mut [C], m: impl Fn(usize) -> C) {
        self.transform(psi, false);
        for (idx, z) in psi.iter_mut().enumerate() {
            *z *= m(idx);
        }
        self.transform(psi, true);
    }

    /// `U₀(t) = exp(−it P²/2)`.
    pub fn free_evolve(&self, psi: &mut [C], t: f64) {
        if t == 0.0 {
            return;
        }
        self.fourier_multiply(psi, |idx| C::from_polar(1.0, -t * self.kinetic[idx]));
    }

    pub fn apply_position(&self, c: usize, psi: &[C]) -> Vec<C> {
        psi.iter()
            .enumerate()
            .map(|(idx, z)| z * self.coord(c, idx))
            .collect()
    }

    pub fn apply_momentum(&self, c: usize, psi: &[C]) -> Vec<C> {
        let mut out = psi.to_vec();
        self.fourier_multiply(&mut out, |idx| C::new(self.wavenumbers[self.wave_index(c, idx)], 0.0));
        out
    }

    /// `exp(i b·P)ψ(x) = ψ(x + b)`.
    pub fn translate(&self, psi: &mut [C], b: &[f64]) {
        if b.iter().all(|x| *x == 0.0) {
            return;
        }
        self.fourier_multiply(psi, |idx| {
            let phase: f64 = (0..self.config.dim)
                .map(|c| b[c] * self.wavenumbers[self.wave_index(c, idx)])
                .sum();
            C::from_polar(1.0, phase)
        });
    }

    /// `exp(i(a·Q + b·P)) = exp(i a·Q) exp(i b·P) exp(i a·b/2)`.
    pub fn apply_weyl(&self, psi: &mut [C], a: &[f64], b: &[f64]) {
        self.translate(psi, b);
        let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let global = C::from_polar(1.0, 0.5 * ab);
        for (idx, z) in psi.iter_mut().enumerate() {
            let ax: f64 = (0..self.config.dim).map(|c| a[c] * self.coord(c, idx)).sum();
            *z *= C::from_polar(1.0, ax) * global;
        }
    }

    /// Norm carried by the outer sixteenth of the box.
    pub fn layer_norm(&self, psi: &[C]) -> f64 {
        psi.iter()
            .zip(&self.layer)
            .filter(|(_, l)| **l)
            .map(|(z, _)| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest continuum amplitude on the outermost grid lines.
    pub fn edge_amplitude(&self, psi: &[C]) -> f64 {
        let n = self.config.n_x;
        let scale = 1.0 / self.dx.powi(self.config.dim as i32).sqrt();
        psi.iter()
            .enumerate()
            .filter(|(idx, _)| {
                (0..self.config.dim).any(|c| {
                    let j = self.wave_index(c, *idx);
                    j == 0 || j == n - 1
                })
            })
            .map(|(_, z)| z.norm() * scale)
            .fold(0.0, f64::max)
    }

    pub fn inner(&self, a: &[C], b: &[C]) -> C {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }

    pub fn norm(&self, a: &[C]) -> f64 {
        a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Sampled wave function; samples are scaled so that the discrete
    /// Euclidean norm equals the continuum L² norm.
    pub fn sample(&self, f: impl Fn(&[f64]) -> C) -> Vec<C> {
        let scale = self.dx.powi(self.config.dim as i32).sqrt();
        (0..self.len)
            .map(|idx| {
                let p = self.point(idx);
                f(&p[..self.config.dim]) * scale
            })
            .collect()
    }

    /// Hermite function values `h_0..h_{count-1}` at `x`.
    fn hermite_functions(count: usize, x: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(count);
        let h0 = PI.powf(-0.25) * (-0.5 * x * x).exp();
        out.push(h0);
        if count > 1 {
            out.push(2f64.sqrt() * x * h0);
        }
        for n in 1..count.saturating_sub(1) {
            let nf = n as f64;
            let next = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
            out.push(next);
        }
        out.truncate(count);
        out
    }

    /// Oscillator quantum numbers of the tracked states, by energy.
    pub fn quantum_numbers(&self, count: usize) -> Vec<Vec<usize>> {
        if self.config.dim == 1 {
            return (0..count).map(|n| vec![n]).collect();
        }
        let mut out = Vec::new();
        let mut level = 0;
        while out.len() < count {
            for m in (0..=level).rev() {
                if out.len() < count {
                    out.push(vec![m, level - m]);
                }
            }
            level += 1;
        }
        out
    }

    fn oscillator_states(&self, count: usize) -> Vec<Vec<C>> {
        let numbers = self.quantum_numbers(count);
        let top = numbers.iter().flatten().copied().max().unwrap_or(0) + 1;
        let table: Vec<Vec<f64>> = self
            .coords
            .iter()
            .map(|&x| Self::hermite_functions(top, x))
            .collect();
        let scale = self.dx.powi(self.config.dim as i32).sqrt();
        let n = self.config.n_x;
        let mut states: Vec<Vec<C>> = numbers
            .iter()
            .map(|q| {
                (0..self.len)
                    .map(|idx| {
                        let v = if self.config.dim == 1 {
                            table[idx][q[0]]
                        } else {
                            table[idx / n][q[0]] * table[idx % n][q[1]]
                        };
                        C::new(v * scale, 0.0)
                    })
                    .collect()
            })
            .collect();
        // Modified Gram–Schmidt, twice.
        for _ in 0..2 {
            for j in 0..states.len() {
                for i in 0..j {
                    let (head, tail) = states.split_at_mut(j);
                    let p = self.inner(&head[i], &tail[0]);
                    for (z, w) in tail[0].iter_mut().zip(&head[i]) {
                        *z -= p * w;
                    }
                }
                let nrm = self.norm(&states[j]);
                states[j].iter_mut().for_each(|z| *z /= nrm);
            }
        }
        states
    }

    fn measure(&self) -> Result<RepDiagnostics> {
        let boundary_leakage = self
            .tracked
            .iter()
            .map(|s| self.layer_norm(s))
            .fold(0.0, f64::max);
        let edge_amplitude = self
            .tracked
            .iter()
            .map(|s| self.edge_amplitude(s))
            .fold(0.0, f64::max);
        if edge_amplitude > self.config.boundary_limit {
            return Err(Error::RepConfig {
                message: format!(
                    "box [{}, {}] is too small for {} tracked states",
                    self.config.x_min, self.config.x_max, self.config.k_track
                ),
                leakage: edge_amplitude,
            });
        }
        let amplitude = 1.0 / self.dx.powi(self.config.dim as i32).sqrt();
        let mut ccr_defect: f64 = 0.0;
        for s in &self.tracked {
            for c in 0..self.config.dim {
                let qp = self.apply_position(c, &self.apply_momentum(c, s));
                let pq = self.apply_momentum(c, &self.apply_position(c, s));
                for ((x, y), z) in qp.iter().zip(&pq).zip(s) {
                    ccr_defect = ccr_defect.max((x - y - I * z).norm() * amplitude);
                }
            }
        }
        let numbers = self.quantum_numbers(10.min(self.tracked.len()));
        let mut oscillator_defect: f64 = 0.0;
        for (s, q) in self.tracked.iter().zip(&numbers) {
            let energy = q.iter().sum::<usize>() as f64 + 0.5 * self.config.dim as f64;
            let mut h = vec![ZERO; self.len];
            for c in 0..self.config.dim {
                let p2 = self.apply_momentum_squared(c, s);
                let q2 = self.apply_position(c, &self.apply_position(c, s));
                for ((o, a), b) in h.iter_mut().zip(&p2).zip(&q2) {
                    *o += 0.5 * (a + b);
                }
            }
            let d: f64 = h
                .iter()
                .zip(s)
                .map(|(a, b)| (a - b * energy).norm_sqr())
                .sum::<f64>()
                .sqrt();
            oscillator_defect = oscillator_defect.max(d);
        }
        let mut unitarity_defect: f64 = 0.0;
        for s in &self.tracked {
            let mut v = s.clone();
            self.free_evolve(&mut v, 1.3);
            self.free_evolve(&mut v, -1.3);
            unitarity_defect = unitarity_defect.max(distance(&v, s));
        }
        Ok(RepDiagnostics {
            ccr_defect,
            oscillator_defect,
            unitarity_defect,
            edge_amplitude,
            boundary_leakage,
            horizon: self.free_horizon(),
        })
    }

    fn apply_momentum_squared(&self, c: usize, psi: &[C]) -> Vec<C> {
        let mut out = psi.to_vec();
        self.fourier_multiply(&mut out, |idx| {
            C::new(self.wavenumbers_sq[self.wave_index(c, idx)], 0.0)
        });
        out
    }

    /// Scan `t = 0.05, 0.10, …` until a freely evolved tracked state exceeds
    /// `horizon_limit` on the box edge.
    fn free_horizon(&self) -> f64 {
        let step = 0.05;
        let mut states = self.tracked.clone();
        let mut t = 0.0;
        while t < 8.0 {
            for s in &mut states {
                self.free_evolve(s, step);
            }
            let worst = states.iter().map(|s| self.edge_amplitude(s)).fold(0.0, f64::max);
            if worst > self.config.horizon_limit {
                return t;
            }
            t += step;
        }
        t
    }

    pub fn apply_factor(&self, factor: &Factor, psi: &mut Vec<C>) -> Result<()> {
        match factor {
            Factor::Scalar(z) => psi.iter_mut().for_each(|v| *v *= z),
            Factor::Weyl { a, b } => self.apply_weyl(psi, a, b),
            Factor::FreeEvolution(t) => self.free_evolve(psi, *t),
            Factor::Position(c) => *psi = self.apply_position(*c, psi),
            Factor::Momentum(c) => *psi = self.apply_momentum(*c, psi),
            Factor::HeisenbergQ { component, t } => {
                self.free_evolve(psi, *t);
                *psi = self.apply_position(*component, psi);
                self.free_evolve(psi, -*t);
            }
            Factor::Dyson { terms, inverse } => self.dyson_apply(terms, *inverse, psi)?,
            Factor::LinearOde { f0, inverse } => self.linear_ode_apply(f0, *inverse, psi)?,
        }
        Ok(())
    }

    /// Apply a product of factors, rightmost first.
    pub fn apply_chain(&self, chain: &OperatorChain, psi: &[C]) -> Result<Vec<C>> {
        let mut v = psi.to_vec();
        for f in chain.factors.iter().rev() {
            self.apply_factor(f, &mut v)?;
        }
        Ok(v)
    }

    /// Images of the tracked states.
    pub fn realize(&self, chain: &OperatorChain) -> Result<RepOperator> {
        let columns = self
            .tracked
            .iter()
            .map(|s| self.apply_chain(chain, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(self.operator_from_columns(columns))
    }

    pub fn operator_from_columns(&self, columns: Vec<Vec<C>>) -> RepOperator {
        let leakage = columns.iter().map(|c| self.layer_norm(c)).fold(0.0, f64::max);
        RepOperator { columns, leakage }
    }

    pub fn identity(&self) -> RepOperator {
        self.operator_from_columns(self.tracked.clone())
    }

    /// `Σ_k g_k(t) V_k(x + s_k(t))` on the position grid.
    fn potential_on_grid(&self, terms: &[PotentialTerm], t: f64) -> Vec<f64> {
        let d = self.config.dim;
        let mut v = vec![0.0; self.len];
        for term in terms {
            let g = term.weight_at(t);
            if g == 0.0 {
                continue;
            }
            let shift: Vec<f64> = (0..d).map(|c| term.shift_at(c, t)).collect();
            let mut x = vec![0.0; d];
            for (idx, out) in v.iter_mut().enumerate() {
                for c in 0..d {
                    x[c] = self.coord(c, idx) + shift[c];
                }
                *out += g * term.potential().eval(&x);
            }
        }
        v
    }

    /// `i F(Q(t)) φ` with `F(Q(t)) = U₀(t)† F(Q) U₀(t)`.
    fn interaction_rhs(&self, terms: &[PotentialTerm], t: f64, phi: &[C], out: &mut [C]) {
        out.copy_from_slice(phi);
        self.free_evolve(out, t);
        let v = self.potential_on_grid(terms, t);
        for (z, w) in out.iter_mut().zip(&v) {
            *z *= I * w;
        }
        self.free_evolve(out, -t);
    }

    /// Solves the interaction-picture equation for the Fourier coefficients
    /// of `φ`, so each evaluation costs one transform pair. Unshifted potentials are
    /// sampled once.
    fn dyson_apply(&self, terms: &[PotentialTerm], inverse: bool, psi: &mut Vec<C>) -> Result<()> {
        let Some((lo, hi)) = terms_window(terms) else {
            return Ok(());
        };
        let cached: Vec<Option<Vec<f64>>> = terms
            .iter()
            .map(|term| {
                term.shift_orbit().is_none().then(|| {
                    let mut x = [0.0; 2];
                    (0..self.len)
                        .map(|idx| {
                            for (c, xc) in x.iter_mut().enumerate().take(self.config.dim) {
                                *xc = self.coord(c, idx);
                            }
                            term.potential().eval(&x[..self.config.dim])
                        })
                        .collect()
                })
            })
            .collect();
        let shifted: Vec<PotentialTerm> = terms
            .iter()
            .filter(|t| t.shift_orbit().is_some())
            .cloned()
            .collect();
        let unit = (self.len as f64).sqrt();
        let mut phases = vec![ZERO; self.len];
        let rhs = |t: f64, y: &[C], dy: &mut [C]| {
            for (p, k) in phases.iter_mut().zip(&self.kinetic) {
                *p = C::from_polar(1.0, -t * k);
            }
            for ((d, z), p) in dy.iter_mut().zip(y).zip(&phases) {
                *d = z * p * unit;
            }
            self.transform(dy, true);
            let mut v = if shifted.is_empty() {
                vec![0.0; self.len]
            } else {
                self.potential_on_grid(&shifted, t)
            };
            for (term, base) in terms.iter().zip(&cached) {
                if let Some(base) = base {
                    let g = term.weight_at(t);
                    if g != 0.0 {
                        v.iter_mut().zip(base).for_each(|(o, b)| *o += g * b);
                    }
                }
            }
            for (z, w) in dy.iter_mut().zip(&v) {
                *z *= I * w;
            }
            self.transform(dy, false);
            for (d, p) in dy.iter_mut().zip(&phases) {
                *d *= p.conj() / unit;
            }
        };
        // Unitary normalization keeps the error control in state norm.
        self.transform(psi, false);
        psi.iter_mut().for_each(|z| *z /= unit);
        let (t0, t1) = if inverse { (hi, lo) } else { (lo, hi) };
        let result = ode::integrate(rhs, t0, t1, psi, &self.config.ode);
        psi.iter_mut().for_each(|z| *z *= unit);
        self.transform(psi, true);
        result?;
        Ok(())
    }

    fn linear_ode_apply(&self, f0: &SmoothFunction, inverse: bool, psi: &mut Vec<C>) -> Result<()> {
        let Some((lo, hi)) = f0.support().bounds() else {
            return Ok(());
        };
        let d = self.config.dim;
        let rhs = |t: f64, y: &[C], dy: &mut [C]| {
            dy.iter_mut().for_each(|z| *z = ZERO);
            for c in 0..d {
                let f = f0.at(c, t);
                if f == 0.0 {
                    continue;
                }
                // Q(t) = Q + tP on the free orbit.
                let p = self.apply_momentum(c, y);
                for (idx, z) in dy.iter_mut().enumerate() {
                    *z += I * f * (y[idx] * self.coord(c, idx) + p[idx] * t);
                }
            }
        };
        let (t0, t1) = if inverse { (hi, lo) } else { (lo, hi) };
        ode::integrate(rhs, t0, t1, psi, &self.config.ode)?;
        Ok(())
    }
}

fn terms_window(terms: &[PotentialTerm]) -> Option<(f64, f64)> {
    terms
        .iter()
        .fold(Support::Empty, |s, t| s.hull(t.support()))
        .bounds()
}

fn distance(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// One factor of a represented operator.
#[derive(Clone, Debug, PartialEq)]
pub enum Factor {
    Scalar(C),
    /// `exp(i(a·Q + b·P))`
    Weyl { a: Vec<f64>, b: Vec<f64> },
    /// `T(F)` for a purely bounded `F` (or its inverse).
    Dyson { terms: Vec<PotentialTerm>, inverse: bool },
    /// `T(L_{f₀})` by direct integration of `dT/dt = i f₀(t)·Q(t) T`.
    LinearOde { f0: SmoothFunction, inverse: bool },
    /// `U₀(t)`
    FreeEvolution(f64),
    Position(usize),
    Momentum(usize),
    HeisenbergQ { component: usize, t: f64 },
}

impl Factor {
    pub fn inverse(&self) -> Result<Factor> {
        Ok(match self {
            Factor::Scalar(z) => Factor::Scalar(z.inv()),
            Factor::Weyl { a, b } => Factor::Weyl {
                a: a.iter().map(|x| -x).collect(),
                b: b.iter().map(|x| -x).collect(),
            },
            Factor::Dyson { terms, inverse } => Factor::Dyson {
                terms: terms.clone(),
                inverse: !inverse,
            },
            Factor::LinearOde { f0, inverse } => Factor::LinearOde {
                f0: f0.clone(),
                inverse: !inverse,
            },
            Factor::FreeEvolution(t) => Factor::FreeEvolution(-t),
            other => {
                return Err(Error::Argument(format!("{other:?} is not invertible")));
            }
        })
    }
}

/// Product `F₁ F₂ ⋯ F_n` of factors, applied right to left.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct OperatorChain {
    factors: Vec<Factor>,
}

impl OperatorChain {
    pub fn identity() -> Self {
        OperatorChain::default()
    }

    pub fn single(f: Factor) -> Self {
        OperatorChain { factors: vec![f] }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    /// `self · other`
    pub fn then(mut self, other: &OperatorChain) -> Self {
        self.factors.extend(other.factors.iter().cloned());
        self
    }

    pub fn times(mut self, f: Factor) -> Self {
        self.factors.push(f);
        self
    }

    pub fn inverse(&self) -> Result<OperatorChain> {
        Ok(OperatorChain {
            factors: self
                .factors
                .iter()
                .rev()
                .map(Factor::inverse)
                .collect::<Result<_>>()?,
        })
    }
}

/// An operator seen through its images of the tracked states.
#[derive(Clone, Debug, PartialEq)]
pub struct RepOperator {
    columns: Vec<Vec<C>>,
    leakage: f64,
}

impl RepOperator {
    pub fn columns(&self) -> &[Vec<C>] {
        &self.columns
    }

    /// Largest boundary-layer norm among the images.
    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    /// `max_j ‖(A − B)ψ_j‖`.
    pub fn distance(&self, other: &RepOperator) -> f64 {
        self.columns
            .iter()
            .zip(&other.columns)
            .map(|(a, b)| distance(a, b))
            .fold(0.0, f64::max)
    }

    /// Distance plus both leakages; the figure every check reports.
    pub fn error(&self, other: &RepOperator) -> f64 {
        self.distance(other) + self.leakage + other.leakage
    }

    pub fn scaled(&self, z: C) -> RepOperator {
        RepOperator {
            columns: self
                .columns
                .iter()
                .map(|c| c.iter().map(|v| v * z).collect())
                .collect(),
            leakage: self.leakage * z.norm(),
        }
    }

    pub fn add(&self, other: &RepOperator) -> RepOperator {
        RepOperator {
            columns: self
                .columns
                .iter()
                .zip(&other.columns)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
                .collect(),
            leakage: self.leakage + other.leakage,
        }
    }

    /// `⟨ψ_i, Aψ_j⟩` on the tracked subspace.
    pub fn matrix(&self, rep: &RepSpace) -> DMatrix<C> {
        let k = self.columns.len();
        DMatrix::from_fn(k, k, |i, j| rep.inner(&rep.tracked[i], &self.columns[j]))
    }

    /// `max_{ij} |⟨Aψ_i, Aψ_j⟩ − δ_ij|`.
    pub fn unitarity_defect(&self, rep: &RepSpace) -> f64 {
        let k = self.columns.len();
        let mut worst: f64 = 0.0;
        for i in 0..k {
            for j in 0..k {
                let g = rep.inner(&self.columns[i], &self.columns[j]);
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }
}

/// `Q_c(t) = U₀(t)† Q_c U₀(t)` within the free horizon.
pub fn heisenberg_q(rep: &RepSpace, component: usize, t: f64) -> Result<RepOperator> {
    if component >= rep.dim() {
        return Err(Error::Argument(format!("no component {component}")));
    }
    if t.abs() > rep.horizon() {
        return Err(Error::Range(format!(
            "|t| = {} exceeds the free horizon {}",
            t.abs(),
            rep.horizon()
        )));
    }
    rep.realize(&OperatorChain::single(Factor::HeisenbergQ { component, t }))
}

pub fn weyl_factor(f0: &SmoothFunction) -> Factor {
    let (a, b) = moments(f0);
    Factor::Weyl { a, b }
}

/// `W(f₀) = exp(i(a·Q + b·P))`.
pub fn weyl_operator(rep: &RepSpace, f0: &SmoothFunction) -> Result<RepOperator> {
    check_dim(rep, f0.components())?;
    rep.realize(&OperatorChain::single(weyl_factor(f0)))
}

/// `exp(i(aQ + bP))` by Hermitian eigendecomposition of the full `d = 1`
/// grid matrix; an independent route to [`weyl_operator`].
pub fn weyl_operator_dense(rep: &RepSpace, a: f64, b: f64) -> Result<RepOperator> {
    if rep.dim() != 1 {
        return Err(Error::Argument("dense Weyl operator needs d = 1".into()));
    }
    let n = rep.len();
    let mut h = DMatrix::<C>::zeros(n, n);
    let mut e = vec![ZERO; n];
    for j in 0..n {
        e.iter_mut().for_each(|z| *z = ZERO);
        e[j] = C::new(1.0, 0.0);
        let p = rep.apply_momentum(0, &e);
        for i in 0..n {
            h[(i, j)] = p[i] * b;
        }
        h[(j, j)] += a * rep.coord(0, j);
    }
    let h = (&h + h.adjoint()) * C::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C::from_polar(1.0, l)));
    let u = v * phases * v.adjoint();
    let columns = rep
        .tracked()
        .iter()
        .map(|s| {
            let x = nalgebra::DVector::from_column_slice(s);
            (&u * x).iter().copied().collect()
        })
        .collect();
    Ok(rep.operator_from_columns(columns))
}

fn check_dim(rep: &RepSpace, d: usize) -> Result<()> {
    if d != rep.dim() {
        return Err(Error::Argument(format!(
            "{d}-component input for a {}-dimensional representation",
            rep.dim()
        )));
    }
    Ok(())
}

fn bounded_terms(f: &Functional) -> Result<(Vec<PotentialTerm>, f64)> {
    if !f.linear_part().is_zero() {
        return Err(Error::Precondition(
            "a bounded functional must have zero linear part".into(),
        ));
    }
    Ok((f.potentials().to_vec(), f.constant_part()))
}

/// Chain for `T(F)` with `F` bounded.
pub fn dyson_chain(f: &Functional) -> Result<OperatorChain> {
    let (terms, h) = bounded_terms(f)?;
    let mut chain = OperatorChain::identity();
    if !terms.is_empty() {
        chain = chain.times(Factor::Dyson {
            terms,
            inverse: false,
        });
    }
    if h != 0.0 {
        chain = chain.times(Factor::Scalar(C::from_polar(1.0, h)));
    }
    Ok(chain)
}

/// `T(F) = T exp(i ∫ F(Q(t)) dt)` for bounded `F`.
pub fn dyson_t(rep: &RepSpace, f: &Functional) -> Result<RepOperator> {
    check_dim(rep, f.dim())?;
    rep.realize(&dyson_chain(f)?)
}

/// Dyson terms of order `0..=order` of `T(F)`, by iterated Volterra
/// quadrature on the time grid.
pub fn dyson_series(rep: &RepSpace, f: &Functional, order: usize) -> Result<Vec<RepOperator>> {
    check_dim(rep, f.dim())?;
    let (terms, h) = bounded_terms(f)?;
    if h != 0.0 {
        return Err(Error::Precondition(
            "constant parts are central; pass the functional without them".into(),
        ));
    }
    let grid = *f.grid();
    let Some((lo, hi)) = terms_window(&terms).and_then(|(a, b)| grid.index_range(Support::interval(a, b))) else {
        let mut out = vec![rep.identity()];
        out.extend((0..order).map(|_| rep.identity().scaled(ZERO)));
        return Ok(out);
    };
    // Pad so the cubic rule sees the integrand vanish on both sides.
    let lo = lo.saturating_sub(2);
    let hi = (hi + 2).min(grid.len() - 1);
    let points = (hi - lo + 1).max(16);
    let sub = TimeGrid::new(grid.time(lo), grid.time(lo) + (points - 1) as f64 * grid.dt(), points)?;
    let times: Vec<f64> = (lo..=hi).map(|i| grid.time(i)).collect();
    let mut out: Vec<Vec<Vec<C>>> = vec![Vec::new(); order + 1];
    for s in rep.tracked() {
        // current[i] = n-th term evaluated at times[i]
        let mut current: Vec<Vec<C>> = vec![s.clone(); times.len()];
        out[0].push(s.clone());
        for slot in out.iter_mut().skip(1) {
            let mut integrand: Vec<Vec<C>> = Vec::with_capacity(times.len());
            for (t, phi) in times.iter().zip(&current) {
                let mut v = vec![ZERO; rep.len()];
                rep.interaction_rhs(&terms, *t, phi, &mut v);
                integrand.push(v);
            }
            current = cumulative_vectors(&sub, &integrand, times.len());
            slot.push(current.last().cloned().unwrap_or_default());
        }
    }
    Ok(out.into_iter().map(|c| rep.operator_from_columns(c)).collect())
}

fn cumulative_vectors(grid: &TimeGrid, integrand: &[Vec<C>], m: usize) -> Vec<Vec<C>> {
    let n = integrand[0].len();
    let mut out = vec![vec![ZERO; n]; m];
    let mut re = vec![0.0; grid.len()];
    let mut im = vec![0.0; grid.len()];
    for k in 0..n {
        for i in 0..m {
            re[i] = integrand[i][k].re;
            im[i] = integrand[i][k].im;
        }
        let cr = cumulative_integral(grid, &re);
        let ci = cumulative_integral(grid, &im);
        for i in 0..m {
            out[i][k] = C::new(cr[i], ci[i]);
        }
    }
    out
}

/// `T(L_{f₀}) = W(f₀) exp(−(i/2)⟨f₀, Δ_D f₀⟩)` in closed form.
pub fn tordered_linear_chain(f0: &SmoothFunction) -> Result<OperatorChain> {
    if f0.is_zero() {
        return Ok(OperatorChain::identity());
    }
    let phase = -0.5 * pairing(f0, KernelKind::Mean, f0)?;
    Ok(OperatorChain::single(weyl_factor(f0)).times(Factor::Scalar(C::from_polar(1.0, phase))))
}

pub fn tordered_linear(rep: &RepSpace, f0: &SmoothFunction) -> Result<RepOperator> {
    check_dim(rep, f0.components())?;
    rep.realize(&tordered_linear_chain(f0)?)
}

/// `T(L_{f₀})` by integrating `dT/dt = i f₀(t)·Q(t) T`.
pub fn tordered_linear_ode(rep: &RepSpace, f0: &SmoothFunction) -> Result<RepOperator> {
    check_dim(rep, f0.components())?;
    rep.realize(&OperatorChain::single(Factor::LinearOde {
        f0: f0.clone(),
        inverse: false,
    }))
}

/// `T̄(L_{f₀} + F_b + h) = T(F_b^{−Δ_A f₀}) · T(L_{f₀}) · e^{ih}`.
pub fn tbar_chain(f: &Functional) -> Result<OperatorChain> {
    let f0 = f.linear_part();
    let mut terms = f.potentials().to_vec();
    if !f0.is_zero() && !terms.is_empty() {
        let shift = apply_propagator(KernelKind::Advanced, f0)?.scale(-1.0);
        terms = terms
            .iter()
            .map(|t| t.shifted(&shift))
            .collect::<Result<Vec<_>>>()?;
    }
    let mut chain = OperatorChain::identity();
    if !terms.is_empty() {
        chain = chain.times(Factor::Dyson {
            terms,
            inverse: false,
        });
    }
    chain = chain.then(&tordered_linear_chain(f0)?);
    if f.constant_part() != 0.0 {
        chain = chain.times(Factor::Scalar(C::from_polar(1.0, f.constant_part())));
    }
    Ok(chain)
}

pub fn tbar(rep: &RepSpace, f: &Functional) -> Result<RepOperator> {
    check_dim(rep, f.dim())?;
    rep.realize(&tbar_chain(f)?)
}

/// `π_S(w)`: letters become `T̄(F)^{±1}`, the scalar multiplies.
pub fn represent_chain(w: &GroupWord) -> Result<OperatorChain> {
    if !w.lagrangean().is_free() {
        return Err(Error::Precondition(
            "represent needs a word of the free Lagrangean; embed interacting words first".into(),
        ));
    }
    let mut chain = OperatorChain::identity();
    for l in w.letters() {
        let c = tbar_chain(&l.functional)?;
        chain = chain.then(&if l.exponent < 0 { c.inverse()? } else { c });
    }
    if w.phase() != 0.0 {
        chain = chain.times(Factor::Scalar(w.scalar_value()));
    }
    Ok(chain)
}

pub fn represent(rep: &RepSpace, w: &GroupWord) -> Result<RepOperator> {
    check_dim(rep, w.dim())?;
    rep.realize(&represent_chain(w)?)
}

/// Modulus of continuity of `c ↦ π_S(S(cF))`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularityReport {
    pub separations: Vec<f64>,
    pub differences: Vec<f64>,
    /// Log–log slope; `None` when every difference vanishes.
    pub slope: Option<f64>,
    pub pass: bool,
}

/// Compare `π_S(S(c₀F))` with `π_S(S(cF))` for the remaining `c_values`;
/// passes when the differences vanish linearly (slope 1 ± 0.2).
pub fn regularity_probe(rep: &RepSpace, f: &Functional, c_values: &[f64]) -> Result<RegularityReport> {
    let (&c0, rest) = c_values
        .split_first()
        .ok_or_else(|| Error::Argument("regularity probe needs at least two values".into()))?;
    if rest.is_empty() {
        return Err(Error::Argument("regularity probe needs at least two values".into()));
    }
    let base = tbar(rep, &f.scale(c0))?;
    let mut separations = Vec::new();
    let mut differences = Vec::new();
    for &c in rest {
        separations.push((c - c0).abs());
        differences.push(tbar(rep, &f.scale(c))?.distance(&base));
    }
    if differences.iter().all(|d| *d == 0.0) {
        return Ok(RegularityReport {
            separations,
            differences,
            slope: None,
            pass: true,
        });
    }
    let pts: Vec<(f64, f64)> = separations
        .iter()
        .zip(&differences)
        .filter(|(s, d)| **s > 0.0 && **d > 0.0)
        .map(|(s, d)| (s.ln(), d.ln()))
        .collect();
    let slope = log_slope(&pts);
    Ok(RegularityReport {
        separations,
        differences,
        slope,
        pass: slope.is_some_and(|s| (s - 1.0).abs() <= 0.2),
    })
}

/// Least-squares slope of `y` on `x`.
pub fn log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Lower bound on how far from scalar an operator commuting with a set of
/// Weyl operators on the tracked subspace can be.
#[derive(Clone, Debug, PartialEq)]
pub struct CommutantCertificate {
    /// Smallest singular value of `X ↦ ([X, W_k])_k` (the scalars).
    pub smallest: f64,
    /// Second smallest singular value.
    pub gap: f64,
    /// Distance to the scalars of any unit `X` whose commutators are all
    /// below `commutator_tol`.
    pub bound: f64,
    pub pass: bool,
}

pub fn commutant_certificate(
    rep: &RepSpace,
    moment_set: &[(Vec<f64>, Vec<f64>)],
    commutator_tol: f64,
    scalar_tol: f64,
) -> Result<CommutantCertificate> {
    let k = rep.k_track();
    let mut normal = DMatrix::<C>::zeros(k * k, k * k);
    let id = DMatrix::<C>::identity(k, k);
    for (a, b) in moment_set {
        check_dim(rep, a.len())?;
        let w = rep
            .realize(&OperatorChain::single(Factor::Weyl {
                a: a.clone(),
                b: b.clone(),
            }))?
            .matrix(rep);
        // vec(XW − WX) = (Wᵀ ⊗ 1 − 1 ⊗ W) vec X
        let l = w.transpose().kronecker(&id) - id.kronecker(&w);
        normal += l.adjoint() * &l;
    }
    let mut eig: Vec<f64> = normal
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    eig.sort_by(|a, b| a.total_cmp(b));
    let smallest = eig[0];
    let gap = eig.get(1).copied().unwrap_or(f64::INFINITY);
    let bound = (moment_set.len() as f64).sqrt() * commutator_tol / gap;
    Ok(CommutantCertificate {
        smallest,
        gap,
        bound,
        pass: bound <= scalar_tol && smallest < 1e-8,
    })
}

#[cfg(test)]
mod tests;
