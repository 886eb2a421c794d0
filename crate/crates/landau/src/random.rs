//! Seeded smooth random fields: a few plane waves with physical wavenumbers
//! under a Gaussian envelope, so a given seed describes the same function on
//! every grid.

use crate::phase_space::{dot3, Field, PhaseGrid};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Parameters of one smooth random function of (x, v).
#[derive(Clone, Debug)]
pub struct SmoothSample {
    modes: Vec<Mode>,
    /// Envelope exp(−decay·|v|²).
    pub decay: f64,
}

#[derive(Clone, Debug)]
struct Mode {
    amp: f64,
    k: [f64; 3],
    phase: f64,
    x_freq: [f64; 3],
    x_phase: f64,
}

impl SmoothSample {
    /// `kmax` bounds the velocity wavenumber; `x_modes` is the largest
    /// integer spatial frequency (0 gives an x-independent function).
    pub fn draw(rng: &mut impl Rng, n_modes: usize, kmax: f64, decay: f64, x_modes: u32) -> Self {
        let modes = (0..n_modes)
            .map(|_| {
                let mut k: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(rng));
                let r = dot3(k, k).sqrt();
                let s = kmax * rng.gen::<f64>().cbrt() / r.max(1e-300);
                k.iter_mut().for_each(|c| *c *= s);
                let x_freq = std::array::from_fn(|_| if x_modes == 0 { 0.0 } else { rng.gen_range(0..=x_modes) as f64 });
                Mode {
                    amp: StandardNormal.sample(rng),
                    k,
                    phase: rng.gen_range(0.0..std::f64::consts::TAU),
                    x_freq,
                    x_phase: if x_modes == 0 { 0.0 } else { rng.gen_range(0.0..std::f64::consts::TAU) },
                }
            })
            .collect();
        Self { modes, decay }
    }

    pub fn eval(&self, x: [f64; 3], v: [f64; 3]) -> f64 {
        let s: f64 = self
            .modes
            .iter()
            .map(|m| m.amp * (dot3(m.k, v) + m.phase).cos() * (dot3(m.x_freq, x) + m.x_phase).cos())
            .sum();
        s * (-self.decay * dot3(v, v)).exp()
    }

    pub fn field(&self, grid: &PhaseGrid) -> Field {
        crate::phase_space::lift(grid, |x, v| self.eval(x, v))
    }
}

/// A field rescaled to the requested sup norm.
pub fn smooth_field(grid: &PhaseGrid, rng: &mut impl Rng, decay: f64, x_modes: u32, sup: f64) -> Field {
    let f = SmoothSample::draw(rng, 6, 2.0, decay, x_modes).field(grid);
    let m = f.max_abs();
    if m == 0.0 {
        f
    } else {
        f.scale(sup / m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_function() {
        let g = PhaseGrid::new(4, 6, 5.5, 1).unwrap();
        let a = smooth_field(&g, &mut rng(7), 0.5, 2, 1.0);
        let b = smooth_field(&g, &mut rng(7), 0.5, 2, 1.0);
        assert_eq!(a, b);
        assert!((a.max_abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn grid_independent_values() {
        let s = SmoothSample::draw(&mut rng(3), 4, 2.0, 0.5, 0);
        let g1 = PhaseGrid::new(1, 8, 4.0, 1).unwrap();
        let g2 = PhaseGrid::new(3, 8, 4.0, 1).unwrap();
        assert_eq!(s.field(&g1).node(0), s.field(&g2).node(2));
    }
}
