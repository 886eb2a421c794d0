//! Zero-padded 3-D FFTs for linear (non-circular) velocity convolutions and
//! small periodic transforms along the spatial axes.
//!
//! The padded transforms are pruned: input lives in the first n entries of
//! each axis of a p = 2n cube, and only that block is read back after the
//! inverse. Two real signals are packed into the real and imaginary parts of
//! one complex transform whenever possible.

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub struct PaddedFft {
    n: usize,
    p: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PaddedFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PaddedFft {{ n: {}, p: {} }}", self.n, self.p)
    }
}

impl PaddedFft {
    pub fn new(n: usize) -> Self {
        let p = 2 * n;
        let mut planner = FftPlanner::new();
        Self { n, p, fwd: planner.plan_fft_forward(p), inv: planner.plan_fft_inverse(p) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    fn run(&self, plan: &Arc<dyn Fft<f64>>, buf: &mut [Complex64]) {
        let mut scratch = vec![ZERO; plan.get_inplace_scratch_len()];
        plan.process_with_scratch(buf, &mut scratch);
    }

    /// Transform along the middle axis of slab `i` (all k).
    fn axis_j(&self, plan: &Arc<dyn Fft<f64>>, buf: &mut [Complex64], i: usize, tmp: &mut [Complex64], keep: usize) {
        let p = self.p;
        let slab = &mut buf[i * p * p..(i + 1) * p * p];
        for j in 0..p {
            for k in 0..p {
                tmp[k * p + j] = slab[j * p + k];
            }
        }
        self.run(plan, tmp);
        for j in 0..keep {
            for k in 0..p {
                slab[j * p + k] = tmp[k * p + j];
            }
        }
    }

    /// Transform along the slowest axis for fixed j (all k).
    fn axis_i(&self, plan: &Arc<dyn Fft<f64>>, buf: &mut [Complex64], j: usize, tmp: &mut [Complex64], keep: usize) {
        let p = self.p;
        for i in 0..p {
            let row = (i * p + j) * p;
            for k in 0..p {
                tmp[k * p + i] = buf[row + k];
            }
        }
        self.run(plan, tmp);
        for i in 0..keep {
            let row = (i * p + j) * p;
            for k in 0..p {
                buf[row + k] = tmp[k * p + i];
            }
        }
    }

    /// Spectrum of the zero-padded complex signal a + i·b (n³ inputs, p³ output).
    pub fn forward_packed(&self, a: &[f64], b: Option<&[f64]>) -> Vec<Complex64> {
        let (n, p) = (self.n, self.p);
        assert_eq!(a.len(), n * n * n);
        let mut buf = vec![ZERO; p * p * p];
        for i in 0..n {
            for j in 0..n {
                let src = (i * n + j) * n;
                let dst = (i * p + j) * p;
                match b {
                    Some(b) => {
                        for k in 0..n {
                            buf[dst + k] = Complex64::new(a[src + k], b[src + k]);
                        }
                    }
                    None => {
                        for k in 0..n {
                            buf[dst + k] = Complex64::new(a[src + k], 0.0);
                        }
                    }
                }
            }
            self.run(&self.fwd, &mut buf[i * p * p..(i * p + n) * p]);
        }
        let mut tmp = vec![ZERO; p * p];
        for i in 0..n {
            self.axis_j(&self.fwd, &mut buf, i, &mut tmp, p);
        }
        for j in 0..p {
            self.axis_i(&self.fwd, &mut buf, j, &mut tmp, p);
        }
        buf
    }

    /// Spectra of two real signals, separated from one packed transform.
    pub fn forward_real2(&self, a: &[f64], b: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let z = self.forward_packed(a, Some(b));
        let p = self.p;
        let mut sa = vec![ZERO; z.len()];
        let mut sb = vec![ZERO; z.len()];
        for i in 0..p {
            let mi = (p - i) % p;
            for j in 0..p {
                let mj = (p - j) % p;
                for k in 0..p {
                    let mk = (p - k) % p;
                    let zp = z[(i * p + j) * p + k];
                    let zm = z[(mi * p + mj) * p + mk].conj();
                    let idx = (i * p + j) * p + k;
                    sa[idx] = (zp + zm) * 0.5;
                    // (zp - zm) / 2i
                    let d = (zp - zm) * 0.5;
                    sb[idx] = Complex64::new(d.im, -d.re);
                }
            }
        }
        (sa, sb)
    }

    pub fn forward_real(&self, a: &[f64]) -> Vec<Complex64> {
        self.forward_packed(a, None)
    }

    /// Inverse of a padded spectrum, cropped to the n³ block; returns the real
    /// and imaginary parts. Passing X + iY for Hermitian X, Y recovers both
    /// real signals at once.
    pub fn inverse_packed(&self, mut buf: Vec<Complex64>) -> (Vec<f64>, Vec<f64>) {
        let (n, p) = (self.n, self.p);
        assert_eq!(buf.len(), p * p * p);
        let mut tmp = vec![ZERO; p * p];
        for j in 0..p {
            self.axis_i(&self.inv, &mut buf, j, &mut tmp, n);
        }
        for i in 0..n {
            self.axis_j(&self.inv, &mut buf, i, &mut tmp, n);
        }
        let scale = 1.0 / (p * p * p) as f64;
        let mut re = vec![0.0; n * n * n];
        let mut im = vec![0.0; n * n * n];
        for i in 0..n {
            self.run(&self.inv, &mut buf[i * p * p..(i * p + n) * p]);
            for j in 0..n {
                let src = (i * p + j) * p;
                let dst = (i * n + j) * n;
                for k in 0..n {
                    re[dst + k] = buf[src + k].re * scale;
                    im[dst + k] = buf[src + k].im * scale;
                }
            }
        }
        (re, im)
    }

    /// Unpruned in-place forward transform of a full p³ cube.
    pub fn forward_full(&self, buf: &mut [Complex64]) {
        let p = self.p;
        assert_eq!(buf.len(), p * p * p);
        self.run(&self.fwd, buf);
        let mut tmp = vec![ZERO; p * p];
        for i in 0..p {
            self.axis_j(&self.fwd, buf, i, &mut tmp, p);
        }
        for j in 0..p {
            self.axis_i(&self.fwd, buf, j, &mut tmp, p);
        }
    }
}

/// Angular wavenumbers of a length-p transform with sample spacing h
/// (numpy's `2π·fftfreq(p, h)` ordering).
pub fn wavenumbers(p: usize, h: f64) -> Vec<f64> {
    let scale = 2.0 * std::f64::consts::PI / (p as f64 * h);
    (0..p)
        .map(|m| {
            let s = if m < p.div_ceil(2) { m as i64 } else { m as i64 - p as i64 };
            s as f64 * scale
        })
        .collect()
}

/// Periodic multi-dimensional transform over `dim` axes of length `n`
/// (row-major, last axis fastest).
pub struct PeriodicFft {
    n: usize,
    dim: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl PeriodicFft {
    pub fn new(n: usize, dim: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { n, dim, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        let total = n.pow(self.dim as u32);
        assert_eq!(data.len(), total);
        let mut line = vec![ZERO; n];
        let mut scratch = vec![ZERO; plan.get_inplace_scratch_len()];
        for axis in 0..self.dim {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            for start in 0..total {
                // first element of each line has zero coordinate on `axis`
                if (start / stride) % n != 0 {
                    continue;
                }
                for (t, l) in line.iter_mut().enumerate() {
                    *l = data[start + t * stride];
                }
                plan.process_with_scratch(&mut line, &mut scratch);
                for (t, l) in line.iter().enumerate() {
                    data[start + t * stride] = *l;
                }
            }
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.fwd);
    }

    /// Normalized inverse.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inv);
        let s = 1.0 / data.len() as f64;
        for d in data.iter_mut() {
            *d *= s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_dft(n: usize, p: usize, a: &[f64], b: &[f64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; p * p * p];
        let w = |m: usize, x: usize| {
            let th = -2.0 * std::f64::consts::PI * (m * x) as f64 / p as f64;
            Complex64::new(th.cos(), th.sin())
        };
        for m1 in 0..p {
            for m2 in 0..p {
                for m3 in 0..p {
                    let mut s = ZERO;
                    for i in 0..n {
                        for j in 0..n {
                            for k in 0..n {
                                let idx = (i * n + j) * n + k;
                                s += Complex64::new(a[idx], b[idx]) * w(m1, i) * w(m2, j) * w(m3, k);
                            }
                        }
                    }
                    out[(m1 * p + m2) * p + m3] = s;
                }
            }
        }
        out
    }

    #[test]
    fn pruned_forward_matches_dense_dft() {
        let n = 3;
        let f = PaddedFft::new(n);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a: Vec<f64> = (0..27).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..27).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let z = f.forward_packed(&a, Some(&b));
        let d = dense_dft(n, 6, &a, &b);
        for (x, y) in z.iter().zip(&d) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn packed_round_trip_and_split() {
        let n = 5;
        let f = PaddedFft::new(n);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a: Vec<f64> = (0..125).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..125).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (sa, sb) = f.forward_real2(&a, &b);
        let (ra, _) = f.inverse_packed(sa.clone());
        let (rb, _) = f.inverse_packed(sb);
        for i in 0..125 {
            assert!((ra[i] - a[i]).abs() < 1e-13);
            assert!((rb[i] - b[i]).abs() < 1e-13);
        }
        let solo = f.forward_real(&a);
        for (x, y) in solo.iter().zip(&sa) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn full_forward_agrees_with_pruned() {
        let n = 4;
        let f = PaddedFft::new(n);
        let a: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut full = vec![ZERO; 512];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    full[(i * 8 + j) * 8 + k] = Complex64::new(a[(i * n + j) * n + k], 0.0);
                }
            }
        }
        f.forward_full(&mut full);
        let z = f.forward_real(&a);
        for (x, y) in z.iter().zip(&full) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn wavenumber_layout() {
        let k = wavenumbers(4, 0.5);
        let s = std::f64::consts::PI;
        assert_eq!(k, vec![0.0, s, -2.0 * s, -s]);
    }

    #[test]
    fn periodic_round_trip_2d() {
        let f = PeriodicFft::new(4, 2);
        let orig: Vec<Complex64> = (0..16).map(|i| Complex64::new(i as f64, -(i as f64) / 3.0)).collect();
        let mut d = orig.clone();
        f.forward(&mut d);
        // DC term is the plain sum
        let sum: Complex64 = orig.iter().sum();
        assert!((d[0] - sum).norm() < 1e-12);
        f.inverse(&mut d);
        for (x, y) in d.iter().zip(&orig) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
