//! P_v, and the macroscopic projection P onto span{√μ, v√μ, (|v|²−3)/2·√μ}
//! as an exact discrete orthogonal projection (Gram matrix on the grid).

use crate::error::{Error, Result};
use crate::phase_space::{dot3, norm3, Field, PhaseGrid};
use nalgebra::{Matrix5, Vector5};
use serde::Serialize;

#[allow(non_snake_case)]
pub fn project_Pv(v: [f64; 3], g: [f64; 3]) -> Result<[f64; 3]> {
    let r = norm3(v);
    if r == 0.0 {
        return Err(Error::ZeroDirection);
    }
    let e = v.map(|c| c / r);
    let s = dot3(g, e);
    Ok(e.map(|c| s * c))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MacroCoefficients {
    pub a: Vec<f64>,
    pub b: Vec<[f64; 3]>,
    pub c: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Projection {
    pub grid: PhaseGrid,
    /// ψ_k(v) for k = a, b₁, b₂, b₃, c.
    basis: [Vec<f64>; 5],
    gram_inv: Matrix5<f64>,
    pub condition: f64,
}

#[allow(non_snake_case)]
impl Projection {
    pub fn new(grid: &PhaseGrid) -> Result<Self> {
        let vs = grid.velocities();
        let sm: Vec<f64> = vs.iter().map(|v| (-0.5 * dot3(*v, *v)).exp()).collect();
        let basis: [Vec<f64>; 5] = std::array::from_fn(|k| {
            vs.iter()
                .zip(&sm)
                .map(|(v, s)| match k {
                    0 => *s,
                    1..=3 => v[k - 1] * s,
                    _ => 0.5 * (dot3(*v, *v) - 3.0) * s,
                })
                .collect()
        });
        let dv3 = grid.dv3();
        let gram = Matrix5::from_fn(|i, j| basis[i].iter().zip(&basis[j]).map(|(a, b)| a * b).sum::<f64>() * dv3);
        let eig = gram.symmetric_eigenvalues();
        let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        if !(lo > 0.0) {
            return Err(Error::SingularGram);
        }
        let gram_inv = gram.cholesky().ok_or(Error::SingularGram)?.inverse();
        Ok(Self { grid: *grid, basis, gram_inv, condition: hi / lo })
    }

    pub fn basis(&self) -> &[Vec<f64>; 5] {
        &self.basis
    }

    fn coeffs(&self, node: &[f64]) -> Vector5<f64> {
        let dv3 = self.grid.dv3();
        let rhs = Vector5::from_fn(|k, _| self.basis[k].iter().zip(node).map(|(p, f)| p * f).sum::<f64>() * dv3);
        self.gram_inv * rhs
    }

    fn check(&self, f: &Field) -> Result<()> {
        if f.grid.nv != self.grid.nv || f.grid.rv != self.grid.rv {
            return Err(Error::GridMismatch("projection built for another velocity grid".into()));
        }
        Ok(())
    }

    pub fn macro_coefficients(&self, f: &Field) -> Result<MacroCoefficients> {
        self.check(f)?;
        let mut m = MacroCoefficients { a: vec![], b: vec![], c: vec![] };
        for node in f.nodes() {
            let x = self.coeffs(node);
            m.a.push(x[0]);
            m.b.push([x[1], x[2], x[3]]);
            m.c.push(x[4]);
        }
        Ok(m)
    }

    /// P on one velocity block.
    pub fn project_node(&self, node: &[f64]) -> Vec<f64> {
        let x = self.coeffs(node);
        let mut out = vec![0.0; node.len()];
        for k in 0..5 {
            out.iter_mut().zip(&self.basis[k]).for_each(|(o, p)| *o += x[k] * p);
        }
        out
    }

    pub fn apply_P(&self, f: &Field) -> Result<Field> {
        self.check(f)?;
        let data = f.nodes().flat_map(|n| self.project_node(n)).collect();
        Ok(Field { grid: f.grid, data })
    }

    pub fn apply_IminusP(&self, f: &Field) -> Result<Field> {
        Ok(f.sub(&self.apply_P(f)?))
    }

    /// Spatially integrated ∬f√μ, ∬v_i f√μ, ∬|v|² f√μ.
    pub fn moments(&self, f: &Field) -> Result<[f64; 5]> {
        self.check(f)?;
        let vs = self.grid.velocities();
        let w = f.grid.dv3() * f.grid.dx_vol();
        let mut m = [0.0; 5];
        for node in f.nodes() {
            for (iv, &x) in node.iter().enumerate() {
                let s = self.basis[0][iv] * x;
                let v = vs[iv];
                m[0] += s;
                m[1] += v[0] * s;
                m[2] += v[1] * s;
                m[3] += v[2] * s;
                m[4] += dot3(v, v) * s;
            }
        }
        Ok(m.map(|x| x * w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::lift;
    use crate::random::{rng, smooth_field};
    use proptest::prelude::*;

    fn grid() -> PhaseGrid {
        PhaseGrid::new(3, 12, 5.5, 1).unwrap()
    }

    #[test]
    fn pv_examples() {
        assert_eq!(project_Pv([2.0, 0.0, 0.0], [3.0, 0.0, 0.0]).unwrap(), [3.0, 0.0, 0.0]);
        assert_eq!(project_Pv([0.0, 1.0, 0.0], [3.0, 0.0, -1.0]).unwrap(), [0.0, 0.0, 0.0]);
        assert_eq!(project_Pv([0.0; 3], [1.0; 3]), Err(Error::ZeroDirection));
    }

    proptest! {
        #[test]
        fn pv_is_idempotent(v in prop::array::uniform3(-5.0f64..5.0), g in prop::array::uniform3(-5.0f64..5.0)) {
            prop_assume!(norm3(v) > 1e-3);
            let p = project_Pv(v, g).unwrap();
            let pp = project_Pv(v, p).unwrap();
            for c in 0..3 {
                prop_assert!((p[c] - pp[c]).abs() <= 4.0 * f64::EPSILON * norm3(g).max(1e-300) * 4.0);
            }
        }
    }

    #[test]
    fn sqrt_mu_has_unit_a() {
        let g = grid();
        let p = Projection::new(&g).unwrap();
        let m = p.macro_coefficients(&lift(&g, |_, v| (-0.5 * dot3(v, v)).exp())).unwrap();
        for ix in 0..g.n_x() {
            assert!((m.a[ix] - 1.0).abs() < 1e-12);
            assert!(m.b[ix].iter().all(|x| x.abs() < 1e-12) && m.c[ix].abs() < 1e-12);
        }
        assert!(p.condition.is_finite() && p.condition >= 1.0);
    }

    #[test]
    fn odd_fields_have_no_a_or_c() {
        let g = grid();
        let p = Projection::new(&g).unwrap();
        let f = lift(&g, |x, v| x[0].cos() * v[1] * (1.0 + v[0] * v[0]) * (-0.4 * dot3(v, v)).exp());
        let m = p.macro_coefficients(&f).unwrap();
        assert!(m.a.iter().chain(&m.c).all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn projector_identities() {
        let g = grid();
        let p = Projection::new(&g).unwrap();
        let f = smooth_field(&g, &mut rng(3), 0.3, 2, 1.0);
        let pf = p.apply_P(&f).unwrap();
        let ppf = p.apply_P(&pf).unwrap();
        assert!(ppf.sub(&pf).dot(&ppf.sub(&pf)).sqrt() <= 1e-10 * pf.dot(&pf).sqrt());
        let q = p.apply_IminusP(&f).unwrap();
        let mq = p.macro_coefficients(&q).unwrap();
        assert!(mq.a.iter().chain(&mq.c).all(|x| x.abs() < 1e-12));
        let total = f.dot(&f);
        assert!((total - pf.dot(&pf) - q.dot(&q)).abs() <= 1e-10 * total);
        for psi in p.basis() {
            let psi = Field::from_profile(&crate::phase_space::VelocityProfile { grid: g, data: psi.clone() }, &g);
            assert!(q.dot(&psi).abs() < 1e-12);
        }
    }

    #[test]
    fn conserved_data_has_zero_mean_coefficients() {
        let g = PhaseGrid::new(8, 12, 5.5, 1).unwrap();
        let p = Projection::new(&g).unwrap();
        let f = lift(&g, |x, v| 0.01 * x[0].sin() * v[0] * (-dot3(v, v)).exp());
        assert!(p.moments(&f).unwrap().iter().all(|m| m.abs() < 1e-14));
        let m = p.macro_coefficients(&f).unwrap();
        let mean_b0: f64 = m.b.iter().map(|b| b[0]).sum::<f64>() / g.n_x() as f64;
        assert!(mean_b0.abs() < 1e-14);
    }
}
