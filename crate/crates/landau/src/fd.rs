//! Finite differences on one velocity block (nv³ values, axis 0 slowest).
//!
//! First derivatives are centered, with second-order one-sided closures at the
//! two end nodes; pure second derivatives use the compact three-point stencil
//! with a four-point closure. Both are exact on quadratics, so constants, the
//! velocity components and |v|² are differentiated without error.

use crate::sym3::{Sym3, SYM_PAIRS};

#[derive(Clone, Copy, Debug)]
pub struct Stencil {
    pub nv: usize,
    pub dv: f64,
}

impl Stencil {
    pub fn new(nv: usize, dv: f64) -> Self {
        Self { nv, dv }
    }

    #[inline]
    fn stride(&self, axis: usize) -> usize {
        self.nv.pow(2 - axis as u32)
    }

    /// Calls `line(start, stride)` for every grid line parallel to `axis`.
    fn for_lines(&self, axis: usize, mut line: impl FnMut(usize, usize)) {
        let n = self.nv;
        let s = self.stride(axis);
        for a in 0..n {
            for b in 0..n {
                let start = match axis {
                    0 => a * n + b,
                    1 => a * n * n + b,
                    _ => (a * n + b) * n,
                };
                line(start, s);
            }
        }
    }

    pub fn d1_into(&self, f: &[f64], axis: usize, out: &mut [f64]) {
        let n = self.nv;
        let h = 0.5 / self.dv;
        self.for_lines(axis, |s0, s| {
            let at = |m: usize| s0 + m * s;
            out[at(0)] = (-3.0 * f[at(0)] + 4.0 * f[at(1)] - f[at(2)]) * h;
            for m in 1..n - 1 {
                out[at(m)] = (f[at(m + 1)] - f[at(m - 1)]) * h;
            }
            out[at(n - 1)] = (3.0 * f[at(n - 1)] - 4.0 * f[at(n - 2)] + f[at(n - 3)]) * h;
        });
    }

    /// Row of the 1D first-derivative matrix at line position m: (position, weight).
    pub fn d1_row(&self, m: usize) -> [(usize, f64); 3] {
        let h = 0.5 / self.dv;
        let n = self.nv;
        if m == 0 {
            [(0, -3.0 * h), (1, 4.0 * h), (2, -h)]
        } else if m == n - 1 {
            [(n - 1, 3.0 * h), (n - 2, -4.0 * h), (n - 3, h)]
        } else {
            [(m - 1, -h), (m, 0.0), (m + 1, h)]
        }
    }

    /// Row of the 1D second-derivative matrix; the closures use four points.
    pub fn d2_row(&self, m: usize) -> Vec<(usize, f64)> {
        let h = 1.0 / (self.dv * self.dv);
        let n = self.nv;
        if m == 0 {
            vec![(0, 2.0 * h), (1, -5.0 * h), (2, 4.0 * h), (3, -h)]
        } else if m == n - 1 {
            vec![(n - 1, 2.0 * h), (n - 2, -5.0 * h), (n - 3, 4.0 * h), (n - 4, -h)]
        } else {
            vec![(m - 1, h), (m, -2.0 * h), (m + 1, h)]
        }
    }

    /// d1_row lifted to flat indices of the block.
    pub fn d1_entries(&self, p: usize, axis: usize) -> [(usize, f64); 3] {
        let s = self.stride(axis);
        let m = (p / s) % self.nv;
        self.d1_row(m).map(|(q, w)| (p - m * s + q * s, w))
    }

    pub fn d2_entries(&self, p: usize, axis: usize) -> Vec<(usize, f64)> {
        let s = self.stride(axis);
        let m = (p / s) % self.nv;
        self.d2_row(m).into_iter().map(|(q, w)| (p - m * s + q * s, w)).collect()
    }

    pub fn d1(&self, f: &[f64], axis: usize) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        self.d1_into(f, axis, &mut out);
        out
    }

    pub fn d2(&self, f: &[f64], axis: usize) -> Vec<f64> {
        let n = self.nv;
        let h = 1.0 / (self.dv * self.dv);
        let mut out = vec![0.0; f.len()];
        self.for_lines(axis, |s0, s| {
            let at = |m: usize| s0 + m * s;
            out[at(0)] = (2.0 * f[at(0)] - 5.0 * f[at(1)] + 4.0 * f[at(2)] - f[at(3)]) * h;
            for m in 1..n - 1 {
                out[at(m)] = (f[at(m + 1)] - 2.0 * f[at(m)] + f[at(m - 1)]) * h;
            }
            out[at(n - 1)] = (2.0 * f[at(n - 1)] - 5.0 * f[at(n - 2)] + 4.0 * f[at(n - 3)] - f[at(n - 4)]) * h;
        });
        out
    }

    pub fn grad(&self, f: &[f64]) -> [Vec<f64>; 3] {
        std::array::from_fn(|a| self.d1(f, a))
    }

    /// Σ_i D_i q_i.
    pub fn div(&self, q: &[Vec<f64>; 3]) -> Vec<f64> {
        let mut out = self.d1(&q[0], 0);
        let mut tmp = vec![0.0; out.len()];
        for (a, qa) in q.iter().enumerate().skip(1) {
            self.d1_into(qa, a, &mut tmp);
            out.iter_mut().zip(&tmp).for_each(|(o, t)| *o += t);
        }
        out
    }

    /// S^{ij} D²_{ij} f, with compact diagonal and D_i∘D_j mixed entries.
    /// `grad` must be D f.
    pub fn hessian_contract(&self, s: &[Sym3], f: &[f64], grad: &[Vec<f64>; 3]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        let mut tmp = vec![0.0; f.len()];
        for (c, &(i, j)) in SYM_PAIRS.iter().enumerate() {
            if i == j {
                let d = self.d2(f, i);
                out.iter_mut().zip(&d).zip(s).for_each(|((o, d), s)| *o += s[c] * d);
            } else {
                self.d1_into(&grad[j], i, &mut tmp);
                out.iter_mut().zip(&tmp).zip(s).for_each(|((o, d), s)| *o += 2.0 * s[c] * d);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::PhaseGrid;

    fn sample(g: &PhaseGrid, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        g.velocities().into_iter().map(f).collect()
    }

    #[test]
    fn exact_on_quadratics() {
        let g = PhaseGrid::new(1, 7, 2.0, 1).unwrap();
        let st = Stencil::new(g.nv, g.dv);
        let q = sample(&g, |v| 1.0 + v[0] - 2.0 * v[1] * v[2] + 0.5 * v[2] * v[2] + 3.0 * v[0] * v[0]);
        let vs = g.velocities();
        let d = st.grad(&q);
        for (iv, v) in vs.iter().enumerate() {
            assert!((d[0][iv] - (1.0 + 6.0 * v[0])).abs() < 1e-12);
            assert!((d[1][iv] + 2.0 * v[2]).abs() < 1e-12);
            assert!((d[2][iv] - (-2.0 * v[1] + v[2])).abs() < 1e-12);
        }
        let s = vec![[1.0, 0.5, -0.25, 2.0, 0.75, 3.0]; q.len()];
        let h = st.hessian_contract(&s, &q, &d);
        // D² q: xx = 6, yz = -2, zz = 1
        let want = 6.0 + 2.0 * 0.75 * -2.0 + 3.0;
        assert!(h.iter().all(|x| (x - want).abs() < 1e-10));
    }

    #[test]
    fn second_order_on_smooth_functions() {
        let err = |nv: usize| {
            let g = PhaseGrid::new(1, nv, 2.0, 1).unwrap();
            let st = Stencil::new(g.nv, g.dv);
            let f = sample(&g, |v| (v[0] + 0.3 * v[1]).sin());
            let d = st.d1(&f, 0);
            let dd = st.d2(&f, 1);
            let vs = g.velocities();
            vs.iter()
                .enumerate()
                .map(|(i, v)| {
                    let a = (d[i] - (v[0] + 0.3 * v[1]).cos()).abs();
                    let b = (dd[i] + 0.09 * (v[0] + 0.3 * v[1]).sin()).abs();
                    a.max(b)
                })
                .fold(0.0, f64::max)
        };
        let ratio = err(16) / err(32);
        // node positions shift with nv, so the ratio sits a little below 4
        assert!(ratio > 3.0, "{ratio}");
    }
}
