//! Seeded generators for test loops, functionals and words.
//!
//! Every draw comes from a ChaCha8 stream: `seed` picks the key and each
//! consumer picks its own stream number, so adding a suite never shifts the
//! numbers seen by another.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::functionals::{Functional, Lagrangean, Potential, PotentialTerm};
use crate::groupalg::GroupWord;
use crate::timeaxis::{make_bump_component, SmoothFunction, TimeGrid};

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Ranges for random bumps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BumpFamily {
    pub center: (f64, f64),
    pub halfwidth: (f64, f64),
    pub max_amplitude: f64,
}

impl BumpFamily {
    /// Broad loops resolved to the 1e-7 level by the time grid.
    pub const RESOLVED: BumpFamily = BumpFamily {
        center: (-3.0, 3.0),
        halfwidth: (2.2, 3.0),
        max_amplitude: 1.0,
    };

    /// Loops inside `[-1.5, 1.5]` for representation checks.
    pub const LOCAL: BumpFamily = BumpFamily {
        center: (-0.6, 0.6),
        halfwidth: (0.5, 0.9),
        max_amplitude: 0.6,
    };

    pub fn sample(&self, rng: &mut ChaCha8Rng, grid: &TimeGrid, dim: usize) -> Result<SmoothFunction> {
        let mut total = SmoothFunction::zero(*grid, dim);
        for c in 0..dim {
            let center = rng.gen_range(self.center.0..=self.center.1);
            let halfwidth = rng.gen_range(self.halfwidth.0..=self.halfwidth.1);
            let amplitude = rng.gen_range(-self.max_amplitude..=self.max_amplitude);
            let bump = make_bump_component(grid, center, halfwidth, amplitude, c, dim)?;
            total = total.try_add(&bump)?;
        }
        Ok(total)
    }
}

/// A localized catalog potential with `|v| ≤ v_max`, centered near the
/// origin. Cosines are left out: they do not decay inside the box.
pub fn potential(rng: &mut ChaCha8Rng, dim: usize, v_max: f64) -> Result<Potential> {
    let v = rng.gen_range(-v_max..=v_max);
    let center: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.5..=0.5)).collect();
    let width = rng.gen_range(0.8..=1.5);
    if rng.gen_bool(0.5) {
        Potential::gaussian(v, center, width)
    } else {
        Potential::sech_squared(v, center, width)
    }
}

/// Bounded functional with one or two potential terms whose weights are
/// bumps centered in `window`.
pub fn bounded(
    rng: &mut ChaCha8Rng,
    grid: &TimeGrid,
    dim: usize,
    window: (f64, f64),
    halfwidth: (f64, f64),
    v_max: f64,
) -> Result<Functional> {
    let terms = rng.gen_range(1..=2);
    let mut f = Functional::zero(*grid, dim);
    for _ in 0..terms {
        let h = rng.gen_range(halfwidth.0..=halfwidth.1);
        let lo = window.0 + h;
        let hi = window.1 - h;
        let center = if lo < hi { rng.gen_range(lo..=hi) } else { 0.5 * (window.0 + window.1) };
        let weight = make_bump_component(grid, center, h, 1.0, 0, 1)?;
        f = f.with_potential(PotentialTerm::new(weight, potential(rng, dim, v_max)?)?)?;
    }
    Ok(f)
}

/// Word of `len` linear letters `S(L_f)^{±1}` with loops from `family`.
pub fn linear_word(
    rng: &mut ChaCha8Rng,
    grid: &TimeGrid,
    dim: usize,
    len: usize,
    family: &BumpFamily,
) -> Result<GroupWord> {
    let free = Lagrangean::free();
    let mut w = GroupWord::identity(free.clone(), *grid, dim);
    for _ in 0..len {
        let f = family.sample(rng, grid, dim)?;
        let letter = GroupWord::generator(free.clone(), Functional::linear(f));
        let letter = if rng.gen_bool(0.5) { letter } else { letter.inverse() };
        w = w.multiply(&letter)?;
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_independent() {
        let grid = TimeGrid::default();
        let a = BumpFamily::RESOLVED.sample(&mut stream(7, 1), &grid, 1).unwrap();
        let b = BumpFamily::RESOLVED.sample(&mut stream(7, 1), &grid, 1).unwrap();
        let c = BumpFamily::RESOLVED.sample(&mut stream(7, 2), &grid, 1).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn samples_respect_their_ranges() {
        let grid = TimeGrid::default();
        let mut rng = stream(3, 0);
        for _ in 0..20 {
            let f = BumpFamily::LOCAL.sample(&mut rng, &grid, 2).unwrap();
            assert!(f.support().within(-1.5, 1.5));
            assert!(f.sup_norm() <= 0.6 + 1e-12);
            let b = bounded(&mut rng, &grid, 1, (-1.0, 1.0), (0.3, 0.6), 0.3).unwrap();
            assert!(b.support().within(-1.0, 1.0));
            assert!(b.potentials().iter().all(|p| p.potential().sup() <= 0.3));
            let w = linear_word(&mut rng, &grid, 1, 4, &BumpFamily::LOCAL).unwrap();
            assert!(w.len() <= 4);
        }
    }
}
