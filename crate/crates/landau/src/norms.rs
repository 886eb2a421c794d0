//! Weighted norms, the σ inner product, sup norms, and the energy functional.

use crate::error::{Error, Result};
use crate::fd::Stencil;
use crate::kernel::Background;
use crate::phase_space::{weight, Field};
use crate::sym3;
use serde::Serialize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct NormReport {
    pub theta: f64,
    pub l2_theta: f64,
    pub sigma_theta: f64,
    pub sup_theta: f64,
    pub energy_theta: f64,
}

/// ‖f‖_{2,θ} = (∬ w^{2θ} f²)^{1/2}.
pub fn norm_l2_weighted(f: &Field, theta: f64) -> f64 {
    let w = weight(&f.grid, 2.0 * theta).data;
    let s: f64 = f.nodes().map(|n| n.iter().zip(&w).map(|(x, w)| w * x * x).sum::<f64>()).sum();
    (s * f.grid.dv3() * f.grid.dx_vol()).sqrt()
}

/// max w^θ|f|.
pub fn norm_sup_weighted(f: &Field, theta: f64) -> f64 {
    let w = weight(&f.grid, theta).data;
    f.nodes().flat_map(|n| n.iter().zip(&w).map(|(x, w)| w * x.abs())).fold(0.0, f64::max)
}

/// max_i ‖w^θ D_i f‖_∞.
pub fn norm_grad_sup_weighted(f: &Field, theta: f64) -> f64 {
    let st = Stencil::new(f.grid.nv, f.grid.dv);
    let w = weight(&f.grid, theta).data;
    f.nodes()
        .flat_map(|n| st.grad(n).into_iter().flat_map(|d| d.into_iter().zip(&w).map(|(x, w)| w * x.abs()).collect::<Vec<_>>()))
        .fold(0.0, f64::max)
}

/// ∬ w^{2θ}[σ^{ij}D_i f D_j h + σ^{ij}v_iv_j f h], σ = σ_μ.
pub fn inner_sigma(bg: &Background, f: &Field, h: &Field, theta: f64) -> Result<f64> {
    if f.grid != h.grid {
        return Err(Error::GridMismatch("inner_sigma arguments live on different grids".into()));
    }
    if f.grid.nv != bg.grid.nv || f.grid.rv != bg.grid.rv {
        return Err(Error::GridMismatch("field and background velocity grids differ".into()));
    }
    let st = Stencil::new(f.grid.nv, f.grid.dv);
    let w = weight(&f.grid, 2.0 * theta).data;
    let same = std::ptr::eq(f, h);
    let mut total = 0.0;
    for ix in 0..f.grid.n_x() {
        let (a, b) = (f.node(ix), h.node(ix));
        let da = st.grad(a);
        let db = if same { da.clone() } else { st.grad(b) };
        for iv in 0..a.len() {
            let s = &bg.sigma.sigma[iv];
            let x = [da[0][iv], da[1][iv], da[2][iv]];
            let y = [db[0][iv], db[1][iv], db[2][iv]];
            total += w[iv] * (sym3::quad(s, x, y) + bg.sigma_vv[iv] * a[iv] * b[iv]);
        }
    }
    Ok(total * f.grid.dv3() * f.grid.dx_vol())
}

pub fn norm_sigma_weighted(bg: &Background, f: &Field, theta: f64) -> Result<f64> {
    Ok(inner_sigma(bg, f, f, theta)?.max(0.0).sqrt())
}

/// ½‖f(t)‖²_{2,θ} + ∫₀ᵗ‖f‖²_{σ,θ} from precomputed samples (trapezoid rule).
pub fn energy_from_series(times: &[f64], l2_last: f64, sigma_sq: &[f64]) -> Result<f64> {
    if times.len() != sigma_sq.len() {
        return Err(Error::InvalidParameter("times and samples differ in length".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::UnorderedTimes);
    }
    let integral: f64 = times
        .windows(2)
        .zip(sigma_sq.windows(2))
        .map(|(t, s)| 0.5 * (t[1] - t[0]) * (s[0] + s[1]))
        .sum();
    Ok(0.5 * l2_last * l2_last + integral)
}

/// E_θ at the last sample of a time-ordered trajectory.
pub fn energy(bg: &Background, samples: &[(f64, Field)], theta: f64) -> Result<f64> {
    let Some((_, last)) = samples.last() else {
        return Ok(0.0);
    };
    let times: Vec<f64> = samples.iter().map(|s| s.0).collect();
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::UnorderedTimes);
    }
    let sig: Result<Vec<f64>> = samples.iter().map(|(_, f)| inner_sigma(bg, f, f, theta)).collect();
    energy_from_series(&times, norm_l2_weighted(last, theta), &sig?)
}

pub fn report(bg: &Background, f: &Field, theta: f64, energy_theta: f64) -> Result<NormReport> {
    Ok(NormReport {
        theta,
        l2_theta: norm_l2_weighted(f, theta),
        sigma_theta: norm_sigma_weighted(bg, f, theta)?,
        sup_theta: norm_sup_weighted(f, theta),
        energy_theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{dot3, lift, PhaseGrid};
    use crate::random::{rng, smooth_field};
    use std::f64::consts::PI;

    #[test]
    fn gaussian_l2_norm() {
        let g = PhaseGrid::new(4, 32, 5.5, 3).unwrap();
        let f = lift(&g, |_, v| (-0.5 * dot3(v, v)).exp());
        let want = ((2.0 * PI).powi(3) * PI.powf(1.5)).sqrt();
        assert!((norm_l2_weighted(&f, 0.0) / want - 1.0).abs() < 1e-6);
    }

    #[test]
    fn monotone_in_theta_and_homogeneous() {
        let g = PhaseGrid::new(2, 10, 5.5, 1).unwrap();
        let f = smooth_field(&g, &mut rng(1), 0.2, 1, 1.0);
        assert!(norm_l2_weighted(&f, -1.0) <= norm_l2_weighted(&f, 0.0));
        assert!(norm_l2_weighted(&f, 0.0) <= norm_l2_weighted(&f, 1.5));
        let a = norm_l2_weighted(&f.scale(-3.0), 1.0);
        assert!((a - 3.0 * norm_l2_weighted(&f, 1.0)).abs() <= 4.0 * f64::EPSILON * a);
        assert_eq!(norm_l2_weighted(&Field::zeros(&g), 2.0), 0.0);
    }

    #[test]
    fn sup_norm_bump() {
        let g = PhaseGrid::new(1, 11, 5.5, 1).unwrap();
        let mut f = Field::zeros(&g);
        // nv = 11 puts a node at v = (3·dv, 0, 0) with dv = 1
        let iv = g.v_index(8, 5, 5);
        assert_eq!(g.velocity(iv), [3.0, 0.0, 0.0]);
        f.data[iv] = -1.0;
        assert_eq!(norm_sup_weighted(&f, 1.0), 4.0);
    }

    #[test]
    fn sigma_inner_is_symmetric_and_dominates() {
        let g = PhaseGrid::new(2, 12, 5.5, 1).unwrap();
        let bg = Background::new(&g);
        let mut r = rng(2);
        let f = smooth_field(&g, &mut r, 0.3, 1, 1.0);
        let h = smooth_field(&g, &mut r, 0.3, 1, 1.0);
        let a = inner_sigma(&bg, &f, &h, 1.0).unwrap();
        let b = inner_sigma(&bg, &h, &f, 1.0).unwrap();
        assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
        assert_eq!(inner_sigma(&bg, &Field::zeros(&g), &Field::zeros(&g), 0.0).unwrap(), 0.0);
        let fs = norm_sigma_weighted(&bg, &f, 1.0).unwrap();
        let low = lift(&g, |_, v| (1.0 + dot3(v, v).sqrt()).powf(-0.5));
        let fl = Field { grid: g, data: f.data.iter().zip(&low.data).map(|(a, b)| a * b).collect() };
        assert!(fs > 0.0 && norm_l2_weighted(&fl, 1.0) / fs < 1e3);
    }

    #[test]
    fn energy_rules() {
        let g = PhaseGrid::new(1, 8, 5.5, 1).unwrap();
        let bg = Background::new(&g);
        let f = smooth_field(&g, &mut rng(4), 0.3, 0, 1.0);
        let e0 = energy(&bg, &[(0.0, f.clone())], 0.0).unwrap();
        assert!((e0 - 0.5 * norm_l2_weighted(&f, 0.0).powi(2)).abs() < 1e-14 * e0);
        let z = Field::zeros(&g);
        assert_eq!(energy(&bg, &[(0.0, z.clone()), (1.0, z.clone())], 0.0).unwrap(), 0.0);
        assert_eq!(energy(&bg, &[(1.0, z.clone()), (0.5, z)], 0.0), Err(Error::UnorderedTimes));
        let sig = [1.0, 2.0, 0.5];
        let e1 = energy_from_series(&[0.0, 1.0], 0.0, &sig[..2]).unwrap();
        let e2 = energy_from_series(&[0.0, 1.0, 2.0], 0.0, &sig).unwrap();
        assert!(e2 >= e1);
    }
}
