//! Discretized phase space: a periodic spatial grid times a truncated,
//! cell-centered velocity cube, plus the Maxwellian and polynomial weights.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_RV: f64 = 5.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub nx: usize,
    pub nv: usize,
    pub rv: f64,
    pub dim_x: usize,
    pub dx: f64,
    pub dv: f64,
}

impl PhaseGrid {
    pub fn new(nx: usize, nv: usize, rv: f64, dim_x: usize) -> Result<Self> {
        if nx == 0 {
            return Err(Error::InvalidGrid("nx must be positive".into()));
        }
        // one-sided boundary differences need three nodes per axis
        if nv < 4 {
            return Err(Error::InvalidGrid(format!("nv = {nv} is below the minimum of 4")));
        }
        if !(rv.is_finite() && rv > 0.0) {
            return Err(Error::InvalidGrid(format!("rv = {rv} must be positive")));
        }
        if !(1..=3).contains(&dim_x) {
            return Err(Error::InvalidGrid(format!("dim_x = {dim_x} not in {{1,2,3}}")));
        }
        Ok(Self { nx, nv, rv, dim_x, dx: 2.0 * PI / nx as f64, dv: 2.0 * rv / nv as f64 })
    }

    /// Desk-scale default: one spatial dimension, nx = 16, rv = 5.5.
    pub fn desk(nv: usize) -> Self {
        Self::new(16, nv, DEFAULT_RV, 1).expect("desk grid is valid")
    }

    /// Number of spatial nodes, nx^dim_x.
    pub fn n_x(&self) -> usize {
        self.nx.pow(self.dim_x as u32)
    }

    /// Number of velocity nodes, nv³.
    pub fn n_v(&self) -> usize {
        self.nv * self.nv * self.nv
    }

    pub fn len(&self) -> usize {
        self.n_x() * self.n_v()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell-centered velocity coordinate along one axis. The half-integer
    /// offset is exact, so v1(nv-1-i) == -v1(i) bit for bit.
    #[inline]
    pub fn v1(&self, i: usize) -> f64 {
        self.dv * (i as f64 + 0.5 - 0.5 * self.nv as f64)
    }

    #[inline]
    pub fn v_index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.nv + j) * self.nv + k
    }

    #[inline]
    pub fn v_triple(&self, iv: usize) -> [usize; 3] {
        let n = self.nv;
        [iv / (n * n), (iv / n) % n, iv % n]
    }

    #[inline]
    pub fn velocity(&self, iv: usize) -> [f64; 3] {
        let [i, j, k] = self.v_triple(iv);
        [self.v1(i), self.v1(j), self.v1(k)]
    }

    /// Spatial node coordinates on [-π, π)^dim_x; unused axes are zero.
    pub fn position(&self, ix: usize) -> [f64; 3] {
        let mut x = [0.0; 3];
        let mut r = ix;
        for d in (0..self.dim_x).rev() {
            x[d] = -PI + self.dx * (r % self.nx) as f64;
            r /= self.nx;
        }
        x
    }

    /// Midpoint quadrature weight of one velocity cell.
    pub fn dv3(&self) -> f64 {
        self.dv.powi(3)
    }

    /// Spatial quadrature weight of one x cell in dim_x dimensions.
    pub fn dx_vol(&self) -> f64 {
        self.dx.powi(self.dim_x as i32)
    }

    /// Nodes on the outermost layer of the velocity cube.
    pub fn is_v_boundary(&self, iv: usize) -> bool {
        let last = self.nv - 1;
        self.v_triple(iv).iter().any(|&c| c == 0 || c == last)
    }

    pub fn velocities(&self) -> Vec<[f64; 3]> {
        (0..self.n_v()).map(|iv| self.velocity(iv)).collect()
    }
}

/// Samples over velocity nodes only (μ, √μ, w^θ, ...).
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityProfile {
    pub grid: PhaseGrid,
    pub data: Vec<f64>,
}

impl VelocityProfile {
    pub fn from_fn(grid: &PhaseGrid, f: impl Fn([f64; 3]) -> f64) -> Self {
        Self { grid: *grid, data: (0..grid.n_v()).map(|iv| f(grid.velocity(iv))).collect() }
    }
}

/// A real sample array over (x-node, v-node), x-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub grid: PhaseGrid,
    pub data: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: &PhaseGrid) -> Self {
        Self { grid: *grid, data: vec![0.0; grid.len()] }
    }

    pub fn from_data(grid: &PhaseGrid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "data has {} entries, grid needs {}",
                data.len(),
                grid.len()
            )));
        }
        if let Some(i) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite sample at index {i}")));
        }
        Ok(Self { grid: *grid, data })
    }

    /// The same velocity profile at every spatial node.
    pub fn from_profile(p: &VelocityProfile, grid: &PhaseGrid) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for _ in 0..grid.n_x() {
            data.extend_from_slice(&p.data);
        }
        Self { grid: *grid, data }
    }

    #[inline]
    pub fn node(&self, ix: usize) -> &[f64] {
        let nv3 = self.grid.n_v();
        &self.data[ix * nv3..(ix + 1) * nv3]
    }

    #[inline]
    pub fn node_mut(&mut self, ix: usize) -> &mut [f64] {
        let nv3 = self.grid.n_v();
        &mut self.data[ix * nv3..(ix + 1) * nv3]
    }

    pub fn nodes(&self) -> std::slice::Chunks<'_, f64> {
        self.data.chunks(self.grid.n_v())
    }

    pub fn check_grid(&self, other: &PhaseGrid) -> Result<()> {
        if self.grid != *other {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other)));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn scale(&self, a: f64) -> Self {
        Self { grid: self.grid, data: self.data.iter().map(|x| a * x).collect() }
    }

    pub fn axpy(&self, a: f64, other: &Field) -> Self {
        let data = self.data.iter().zip(&other.data).map(|(x, y)| x + a * y).collect();
        Self { grid: self.grid, data }
    }

    pub fn sub(&self, other: &Field) -> Self {
        self.axpy(-1.0, other)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Plain discrete L² inner product with phase-space quadrature weights.
    pub fn dot(&self, other: &Field) -> f64 {
        let s: f64 = self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum();
        s * self.grid.dv3() * self.grid.dx_vol()
    }

    /// Build from a per-x-node map; the closure receives the x index.
    pub fn from_nodes(grid: &PhaseGrid, f: impl Fn(usize) -> Vec<f64> + Sync + Send) -> Self {
        use rayon::prelude::*;
        let parts: Vec<Vec<f64>> = (0..grid.n_x()).into_par_iter().map(f).collect();
        Self { grid: *grid, data: parts.concat() }
    }
}

/// μ(v) = exp(−|v|²).
pub fn maxwellian(grid: &PhaseGrid) -> VelocityProfile {
    VelocityProfile::from_fn(grid, |v| (-(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp())
}

/// w^θ(v) = (1 + |v|)^θ.
pub fn weight(grid: &PhaseGrid, theta: f64) -> VelocityProfile {
    VelocityProfile::from_fn(grid, |v| (1.0 + norm3(v)).powf(theta))
}

/// Sample a pointwise map at every (x, v) node.
pub fn lift(grid: &PhaseGrid, f: impl Fn([f64; 3], [f64; 3]) -> f64) -> Field {
    let vs = grid.velocities();
    let mut data = Vec::with_capacity(grid.len());
    for ix in 0..grid.n_x() {
        let x = grid.position(ix);
        data.extend(vs.iter().map(|&v| f(x, v)));
    }
    Field { grid: *grid, data }
}

#[inline]
pub fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

#[inline]
pub fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node_of(g: &PhaseGrid, v: [f64; 3]) -> usize {
        (0..g.n_v())
            .min_by(|&a, &b| {
                let da = norm3(sub(g.velocity(a), v));
                let db = norm3(sub(g.velocity(b), v));
                da.partial_cmp(&db).unwrap()
            })
            .unwrap()
    }
    fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(PhaseGrid::new(0, 16, 5.5, 1).is_err());
        assert!(PhaseGrid::new(8, 2, 5.5, 1).is_err());
        assert!(PhaseGrid::new(8, 16, -1.0, 1).is_err());
        assert!(PhaseGrid::new(8, 16, 5.5, 4).is_err());
    }

    #[test]
    fn nodes_are_symmetric_cell_centers() {
        let g = PhaseGrid::new(4, 10, 5.5, 1).unwrap();
        assert!((g.dv - 1.1).abs() < 1e-15);
        for i in 0..g.nv {
            assert_eq!(g.v1(i), -g.v1(g.nv - 1 - i));
            assert!(g.v1(i) != 0.0);
        }
    }

    #[test]
    fn maxwellian_point_values() {
        // odd nv with dv = 1 puts nodes exactly on v = 0 and v = e₁
        let g = PhaseGrid::new(1, 11, 5.5, 1).unwrap();
        let mu = maxwellian(&g);
        let c = g.v_index(5, 5, 5);
        assert_eq!(g.velocity(c), [0.0, 0.0, 0.0]);
        assert_eq!(mu.data[c], 1.0);
        let e1 = g.v_index(6, 5, 5);
        assert!((mu.data[e1] - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn maxwellian_mass_matches_gaussian_integral() {
        let g = PhaseGrid::new(1, 32, 5.5, 1).unwrap();
        let mass: f64 = maxwellian(&g).data.iter().sum::<f64>() * g.dv3();
        assert!((mass - PI.powf(1.5)).abs() < 1e-6, "{mass}");
    }

    #[test]
    fn maxwellian_quadrature_is_second_order_or_better() {
        // The midpoint rule on a Gaussian is spectrally accurate once the
        // cells resolve it; require at least a 4x drop per refinement pair
        // until round-off.
        let exact = PI.powf(1.5);
        let err = |nv| {
            let g = PhaseGrid::new(1, nv, 5.5, 1).unwrap();
            (maxwellian(&g).data.iter().sum::<f64>() * g.dv3() - exact).abs()
        };
        let (e8, e12) = (err(8), err(12));
        assert!(e8 > 0.0 && e12 < e8 / 4.0, "{e8} {e12}");
        assert!(err(16) < 1e-6 && err(24) < 1e-9);
    }

    #[test]
    fn maxwellian_is_even() {
        let g = PhaseGrid::new(1, 12, 5.5, 1).unwrap();
        let mu = maxwellian(&g);
        let n = g.nv - 1;
        for iv in 0..g.n_v() {
            let [i, j, k] = g.v_triple(iv);
            assert_eq!(mu.data[iv], mu.data[g.v_index(n - i, n - j, n - k)]);
        }
    }

    #[test]
    fn weight_examples() {
        let g = PhaseGrid::new(1, 11, 5.5, 1).unwrap();
        assert!(weight(&g, 0.0).data.iter().all(|&w| w == 1.0));
        let w2 = weight(&g, 2.0);
        assert!((w2.data[node_of(&g, [3.0, 0.0, 0.0])] - 16.0).abs() < 1e-12);
        let wm2 = weight(&g, -2.0);
        assert!((wm2.data[node_of(&g, [0.0, 4.0, 3.0])] - 1.0 / 36.0).abs() < 1e-15);
    }

    #[test]
    fn lift_examples() {
        let g = PhaseGrid::new(8, 8, 5.5, 1).unwrap();
        assert!(lift(&g, |_, _| 0.0).data.iter().all(|&x| x == 0.0));
        let mu = maxwellian(&g);
        let s = lift(&g, |_, v| (-(dot3(v, v)) / 2.0).exp());
        for ix in 0..g.n_x() {
            for (a, m) in s.node(ix).iter().zip(&mu.data) {
                assert!((a - m.sqrt()).abs() < 1e-15);
            }
        }
        let f = lift(&g, |x, v| x[0].sin() * (-(dot3(v, v))).exp());
        for iv in 0..g.n_v() {
            let mean: f64 = (0..g.n_x()).map(|ix| f.node(ix)[iv]).sum();
            assert!(mean.abs() < 1e-14);
        }
    }

    #[test]
    fn positions_cover_the_torus() {
        let g = PhaseGrid::new(4, 4, 5.5, 2).unwrap();
        assert_eq!(g.n_x(), 16);
        assert_eq!(g.position(0), [-PI, -PI, 0.0]);
        assert_eq!(g.position(5), [-PI + g.dx, -PI + g.dx, 0.0]);
    }

    #[test]
    fn field_rejects_shape_and_nan() {
        let g = PhaseGrid::new(2, 4, 5.5, 1).unwrap();
        assert!(Field::from_data(&g, vec![0.0; 3]).is_err());
        let mut d = vec![0.0; g.len()];
        d[7] = f64::NAN;
        assert!(Field::from_data(&g, d).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn weights_are_reciprocal(theta in -8.0f64..8.0) {
                let g = PhaseGrid::new(1, 8, 5.5, 1).unwrap();
                let (a, b) = (weight(&g, theta), weight(&g, -theta));
                for (x, y) in a.data.iter().zip(&b.data) {
                    prop_assert!((x * y - 1.0).abs() <= 4.0 * f64::EPSILON);
                }
            }
        }
    }
}
