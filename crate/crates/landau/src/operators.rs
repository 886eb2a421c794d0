//! The Landau operators as maps on fields: A, K, L, Γ, Ā_g, K̄_g, their
//! weighted conjugates, and the pieces K₁, J_g of the rearranged equation.
//!
//! Every operator is assembled per x-node from a few shared building blocks
//! (the divergence operator Div_S, the flux convolution of K, and pointwise
//! coefficient profiles), so the algebraic identities between them hold to
//! round-off on the grid, not just in the continuum.

use crate::error::{Error, Result};
use crate::fd::Stencil;
use crate::kernel::{drift_from_set, Background, SigmaSet};
use crate::linalg::Csr;
use crate::phase_space::{dot3, norm3, Field, PhaseGrid};
use crate::sym3::{self, Sym3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::hash::{Hash, Hasher};
use std::sync::Arc;

/// How Div_S f = ∂_i(S^{ij}∂_j f) is discretized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VelocityForm {
    /// μ^{-1/2} D_i(μ S^{ij} D_j(μ^{-1/2} f)) + (vᵀSv − tr S − v·∂S) f.
    /// Exact on the collision invariants: L annihilates them to round-off.
    #[default]
    Conservative,
    /// S^{ij} D²_{ij} f + (∂_i S^{ij}) D_j f. Exact on quadratics, so every
    /// diffusion annihilates constants.
    Expanded,
}

/// Diffusion tensor with its spectral divergence and the zeroth-order
/// coefficient of the conservative form.
#[derive(Clone, Debug)]
pub struct Diffusion {
    pub sigma: Vec<Sym3>,
    pub div: Vec<[f64; 3]>,
    zeroth: Vec<f64>,
}

impl Diffusion {
    fn new(sigma: Vec<Sym3>, div: Vec<[f64; 3]>, velocities: &[[f64; 3]]) -> Self {
        let zeroth = velocities
            .iter()
            .zip(sigma.iter().zip(&div))
            .map(|(&v, (s, d))| sym3::quad(s, v, v) - sym3::trace(s) - dot3(v, *d))
            .collect();
        Self { sigma, div, zeroth }
    }

    fn from_set(set: &SigmaSet, velocities: &[[f64; 3]]) -> Self {
        Self::new(set.sigma.clone(), set.div.clone(), velocities)
    }
}

/// Per-node coefficient profiles derived from g.
#[derive(Clone, Debug)]
struct NodeCoef {
    /// σ_G = σ_μ + σ_{√μ g}.
    sg: Diffusion,
    /// σ_{√μ g}, with its double divergence.
    su: Diffusion,
    dd_su: Vec<f64>,
    drift: Vec<[f64; 3]>,
    /// β = ∂_iσ_u^{i·} + σ_u v, ∂_iβ^i and v·β.
    beta: Vec<[f64; 3]>,
    dbeta: Vec<f64>,
    vbeta: Vec<f64>,
    /// Zeroth-order coefficient of J_g.
    jg: Vec<f64>,
    c_theta: Vec<f64>,
}

/// Analytic w^θ = (1+|v|)^θ with its first and second derivatives.
#[derive(Clone, Debug)]
pub struct WeightProfile {
    pub theta: f64,
    pub w: Vec<f64>,
    pub w_inv: Vec<f64>,
    pub grad: Vec<[f64; 3]>,
    pub hess: Vec<Sym3>,
}

impl WeightProfile {
    pub fn new(velocities: &[[f64; 3]], theta: f64) -> Self {
        let mut w = Vec::with_capacity(velocities.len());
        let mut grad = Vec::with_capacity(velocities.len());
        let mut hess = Vec::with_capacity(velocities.len());
        for &v in velocities {
            let r = norm3(v);
            let q = 1.0 + r;
            w.push(q.powf(theta));
            if theta == 0.0 || r == 0.0 {
                grad.push([0.0; 3]);
                hess.push([0.0; 6]);
                continue;
            }
            let d1 = theta * q.powf(theta - 1.0);
            let d2 = theta * (theta - 1.0) * q.powf(theta - 2.0);
            let e = v.map(|c| c / r);
            grad.push(e.map(|c| d1 * c));
            hess.push(std::array::from_fn(|c| {
                let (i, j) = sym3::SYM_PAIRS[c];
                let delta = if i == j { 1.0 } else { 0.0 };
                d2 * e[i] * e[j] + d1 * (delta - e[i] * e[j]) / r
            }));
        }
        let w_inv = velocities.iter().map(|&v| (1.0 + norm3(v)).powf(-theta)).collect();
        Self { theta, w, w_inv, grad, hess }
    }
}

/// Frozen-coefficient operator data for one (grid, g, θ, form).
#[derive(Clone)]
pub struct OperatorContext {
    pub bg: Arc<Background>,
    pub grid: PhaseGrid,
    pub form: VelocityForm,
    pub theta: f64,
    pub g: Field,
    pub weight: WeightProfile,
    sigma_mu: Diffusion,
    nodes: Vec<NodeCoef>,
    stencil: Stencil,
    key: u64,
}

impl std::fmt::Debug for OperatorContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorContext")
            .field("grid", &self.grid)
            .field("form", &self.form)
            .field("theta", &self.theta)
            .field("key", &format_args!("{:016x}", self.key))
            .finish()
    }
}

/// A boundary node where the field is not negligible.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailReport {
    pub ix: usize,
    pub iv: usize,
    pub value: f64,
    pub ratio: f64,
}

/// Largest boundary value relative to the sup norm, if above 1e-7.
pub fn boundary_tail(f: &Field) -> Option<TailReport> {
    let sup = f.max_abs();
    if sup == 0.0 {
        return None;
    }
    let g = f.grid;
    let mut worst: Option<TailReport> = None;
    for (ix, node) in f.nodes().enumerate() {
        for (iv, &x) in node.iter().enumerate() {
            if g.is_v_boundary(iv) && worst.as_ref().map_or(true, |w| x.abs() > w.value.abs()) {
                worst = Some(TailReport { ix, iv, value: x, ratio: x.abs() / sup });
            }
        }
    }
    worst.filter(|w| w.ratio > 1e-7)
}

fn velocity_compatible(bg: &Background, grid: &PhaseGrid) -> Result<()> {
    if bg.grid.nv != grid.nv || bg.grid.rv != grid.rv {
        return Err(Error::GridMismatch(format!(
            "velocity grid nv={} rv={} vs background nv={} rv={}",
            grid.nv, grid.rv, bg.grid.nv, bg.grid.rv
        )));
    }
    Ok(())
}

#[allow(non_snake_case)]
impl OperatorContext {
    pub fn new(bg: Arc<Background>, g: &Field, theta: f64, form: VelocityForm) -> Result<Self> {
        velocity_compatible(&bg, &g.grid)?;
        if !g.is_finite() {
            return Err(Error::InvalidParameter("g has non-finite samples".into()));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParameter(format!("theta = {theta}")));
        }
        let grid = g.grid;
        let vs = &bg.velocities;
        let sigma_mu = Diffusion::from_set(&bg.sigma, vs);
        let weight = WeightProfile::new(vs, theta);
        let stencil = Stencil::new(grid.nv, grid.dv);
        let mut ctx = Self {
            bg: bg.clone(),
            grid,
            form,
            theta,
            g: g.clone(),
            weight,
            sigma_mu,
            nodes: Vec::new(),
            stencil,
            key: 0,
        };
        let nodes: Result<Vec<NodeCoef>> = (0..grid.n_x()).into_par_iter().map(|ix| ctx.node_coef(g.node(ix))).collect();
        ctx.nodes = nodes?;
        ctx.key = content_key(&grid, g, theta, form);
        Ok(ctx)
    }

    /// Context with g = 0.
    pub fn linearized(bg: Arc<Background>, grid: &PhaseGrid, theta: f64, form: VelocityForm) -> Result<Self> {
        Self::new(bg, &Field::zeros(grid), theta, form)
    }

    /// Same g with a different weight exponent or form.
    pub fn with(&self, theta: f64, form: VelocityForm) -> Result<Self> {
        Self::new(self.bg.clone(), &self.g, theta, form)
    }

    /// Content hash of (grid, g, θ, form).
    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn g_sup(&self) -> f64 {
        self.g.max_abs()
    }

    /// ‖g‖_∞ ≤ ε, the smallness regime of the frozen-coefficient estimates.
    pub fn admissible(&self, epsilon: f64) -> bool {
        self.g_sup() <= epsilon
    }

    pub fn stencil(&self) -> &Stencil {
        &self.stencil
    }

    fn node_coef(&self, g_node: &[f64]) -> Result<NodeCoef> {
        let bg = &self.bg;
        let vs = &bg.velocities;
        let set = bg.perturbation_set(g_node)?;
        let drift = drift_from_set(&set, vs);
        let n = vs.len();
        let mut beta = Vec::with_capacity(n);
        let mut dbeta = Vec::with_capacity(n);
        let mut vbeta = Vec::with_capacity(n);
        let mut jg = Vec::with_capacity(n);
        for iv in 0..n {
            let v = vs[iv];
            let s = &set.sigma[iv];
            let sv = sym3::matvec(s, v);
            let b = [set.div[iv][0] + sv[0], set.div[iv][1] + sv[1], set.div[iv][2] + sv[2]];
            let db = set.ddiv[iv] + sym3::trace(s) + dot3(v, set.div[iv]);
            let vb = dot3(v, b);
            beta.push(b);
            dbeta.push(db);
            vbeta.push(vb);
            jg.push(bg.div_sigma_v[iv] - bg.sigma_vv[iv] - db + vb);
        }
        let sg_sigma = bg.sigma.sigma.iter().zip(&set.sigma).map(|(a, b)| sym3::add(a, b)).collect();
        let sg_div = bg
            .sigma
            .div
            .iter()
            .zip(&set.div)
            .map(|(a, b)| [a[0] + b[0], a[1] + b[1], a[2] + b[2]])
            .collect();
        let mut coef = NodeCoef {
            sg: Diffusion::new(sg_sigma, sg_div, vs),
            su: Diffusion::from_set(&set, vs),
            dd_su: set.ddiv,
            drift,
            beta,
            dbeta,
            vbeta,
            jg,
            c_theta: vec![0.0; n],
        };
        if self.theta != 0.0 {
            let w = &self.weight;
            let conj = self.abar_with(&coef, &w.w_inv);
            let one = self.abar_with(&coef, &vec![1.0; n]);
            coef.c_theta = (0..n).map(|iv| w.w[iv] * conj[iv] - one[iv]).collect();
        }
        Ok(coef)
    }

    fn check(&self, f: &Field) -> Result<()> {
        f.check_grid(&self.grid)
    }

    fn map(&self, f: &Field, op: impl Fn(usize, &[f64]) -> Vec<f64> + Sync + Send) -> Result<Field> {
        self.check(f)?;
        Ok(Field::from_nodes(&self.grid, |ix| op(ix, f.node(ix))))
    }

    fn try_map(&self, f: &Field, op: impl Fn(usize, &[f64]) -> Result<Vec<f64>> + Sync + Send) -> Result<Field> {
        self.check(f)?;
        let parts: Result<Vec<Vec<f64>>> = (0..self.grid.n_x()).into_par_iter().map(|ix| op(ix, f.node(ix))).collect();
        Ok(Field { grid: self.grid, data: parts?.concat() })
    }

    // ---- building blocks -------------------------------------------------

    fn grad(&self, f: &[f64]) -> [Vec<f64>; 3] {
        self.stencil.grad(f)
    }

    /// Div_S f in the context's form.
    fn div_s(&self, s: &Diffusion, f: &[f64]) -> Vec<f64> {
        let bg = &self.bg;
        match self.form {
            VelocityForm::Conservative => {
                let h: Vec<f64> = f.iter().zip(&bg.sqrt_mu).map(|(f, r)| f / r).collect();
                let dh = self.grad(&h);
                let flux: [Vec<f64>; 3] = std::array::from_fn(|i| {
                    (0..f.len())
                        .map(|iv| {
                            let r = sym3::SYM_IDX[i];
                            let sg = &s.sigma[iv];
                            bg.mu[iv] * (sg[r[0]] * dh[0][iv] + sg[r[1]] * dh[1][iv] + sg[r[2]] * dh[2][iv])
                        })
                        .collect()
                });
                let d = self.stencil.div(&flux);
                (0..f.len()).map(|iv| d[iv] / bg.sqrt_mu[iv] + s.zeroth[iv] * f[iv]).collect()
            }
            VelocityForm::Expanded => {
                let df = self.grad(f);
                let mut out = self.stencil.hessian_contract(&s.sigma, f, &df);
                for (iv, o) in out.iter_mut().enumerate() {
                    *o += s.div[iv][0] * df[0][iv] + s.div[iv][1] * df[1][iv] + s.div[iv][2] * df[2][iv];
                }
                out
            }
        }
    }

    fn drift_dot(a: &[[f64; 3]], df: &[Vec<f64>; 3], iv: usize) -> f64 {
        a[iv][0] * df[0][iv] + a[iv][1] * df[1][iv] + a[iv][2] * df[2][iv]
    }

    fn abar_with(&self, c: &NodeCoef, f: &[f64]) -> Vec<f64> {
        let mut out = self.div_s(&c.sg, f);
        let df = self.grad(f);
        for (iv, o) in out.iter_mut().enumerate() {
            *o += Self::drift_dot(&c.drift, &df, iv);
        }
        out
    }

    /// Sparse matrix of the local part Ā_g + J_g of `q_node` at one x-node;
    /// what remains of Q is the nonlocal K.
    pub fn local_matrix(&self, ix: usize) -> Csr {
        let c = &self.nodes[ix];
        let (bg, st, n) = (&self.bg, &self.stencil, self.grid.n_v());
        let mut indptr = Vec::with_capacity(n + 1);
        let (mut indices, mut values) = (Vec::new(), Vec::new());
        indptr.push(0);
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(128);
        for p in 0..n {
            row.clear();
            match self.form {
                VelocityForm::Conservative => {
                    for i in 0..3 {
                        for (q, wq) in st.d1_entries(p, i) {
                            if wq == 0.0 {
                                continue;
                            }
                            let s = &c.sg.sigma[q];
                            for j in 0..3 {
                                let sij = s[sym3::SYM_IDX[i][j]];
                                let a = wq * bg.mu[q] * sij / bg.sqrt_mu[p];
                                for (r, wr) in st.d1_entries(q, j) {
                                    row.push((r, a * wr / bg.sqrt_mu[r]));
                                }
                            }
                        }
                    }
                    row.push((p, c.sg.zeroth[p]));
                }
                VelocityForm::Expanded => {
                    let s = &c.sg.sigma[p];
                    for &(i, j) in sym3::SYM_PAIRS.iter() {
                        let sij = s[sym3::SYM_IDX[i][j]];
                        if i == j {
                            row.extend(st.d2_entries(p, i).into_iter().map(|(r, w)| (r, sij * w)));
                        } else {
                            for (q, wq) in st.d1_entries(p, i) {
                                for (r, wr) in st.d1_entries(q, j) {
                                    row.push((r, 2.0 * sij * wq * wr));
                                }
                            }
                        }
                    }
                    for j in 0..3 {
                        let b = c.sg.div[p][j];
                        row.extend(st.d1_entries(p, j).into_iter().map(|(r, w)| (r, b * w)));
                    }
                }
            }
            for j in 0..3 {
                let b = c.drift[p][j];
                row.extend(st.d1_entries(p, j).into_iter().map(|(r, w)| (r, b * w)));
            }
            row.push((p, c.jg[p]));
            row.sort_unstable_by_key(|e| e.0);
            let mut last = usize::MAX;
            for &(r, w) in row.iter() {
                if r == last {
                    *values.last_mut().unwrap() += w;
                } else {
                    indices.push(r);
                    values.push(w);
                    last = r;
                }
            }
            indptr.push(indices.len());
        }
        Csr { n, indptr, indices, values }
    }

    /// q_j = μ D_j(f/√μ), the source of the K flux.
    fn k_source(&self, f: &[f64]) -> [Vec<f64>; 3] {
        let bg = &self.bg;
        let h: Vec<f64> = f.iter().zip(&bg.sqrt_mu).map(|(f, r)| f / r).collect();
        let mut dh = self.grad(&h);
        for d in dh.iter_mut() {
            d.iter_mut().zip(&bg.mu).for_each(|(x, m)| *x *= m);
        }
        dh
    }

    /// −μ^{-1/2} D_i(μ B^i).
    fn k_close(&self, mut b: [Vec<f64>; 3]) -> Vec<f64> {
        let bg = &self.bg;
        for bi in b.iter_mut() {
            bi.iter_mut().zip(&bg.mu).for_each(|(x, m)| *x *= m);
        }
        let d = self.stencil.div(&b);
        d.iter().zip(&bg.sqrt_mu).map(|(d, r)| -d / r).collect()
    }

    // ---- per-node operators ---------------------------------------------

    pub fn a_node(&self, f: &[f64]) -> Vec<f64> {
        let bg = &self.bg;
        let mut out = self.div_s(&self.sigma_mu, f);
        for (iv, o) in out.iter_mut().enumerate() {
            *o += (bg.div_sigma_v[iv] - bg.sigma_vv[iv]) * f[iv];
        }
        out
    }

    pub fn k_node(&self, f: &[f64]) -> Result<Vec<f64>> {
        let q = self.k_source(f);
        let b = self.bg.kernel.contract([&q[0], &q[1], &q[2]])?;
        Ok(self.k_close(b))
    }

    pub fn k1_node(&self, f: &[f64]) -> Result<Vec<f64>> {
        let q = self.k_source(f);
        let c = self.bg.kernel.convolve_each([&q[0], &q[1], &q[2]])?;
        let b: [Vec<f64>; 3] = std::array::from_fn(|i| {
            (0..f.len()).map(|iv| c[i][0][iv] + c[i][1][iv] + c[i][2][iv]).collect()
        });
        Ok(self.k_close(b))
    }

    pub fn l_node(&self, f: &[f64]) -> Result<Vec<f64>> {
        let a = self.a_node(f);
        let k = self.k_node(f)?;
        Ok(a.iter().zip(&k).map(|(a, k)| -a - k).collect())
    }

    pub fn abar_node(&self, ix: usize, f: &[f64]) -> Vec<f64> {
        self.abar_with(&self.nodes[ix], f)
    }

    pub fn jg_node(&self, ix: usize, f: &[f64]) -> Vec<f64> {
        self.nodes[ix].jg.iter().zip(f).map(|(c, f)| c * f).collect()
    }

    pub fn kbar_node(&self, ix: usize, f: &[f64]) -> Result<Vec<f64>> {
        let k = self.k_node(f)?;
        let c = &self.nodes[ix];
        Ok(k.iter().zip(&c.jg).zip(f).map(|((k, j), f)| k + j * f).collect())
    }

    /// Ā_g f + K̄_g f, the collision part of the rearranged equation.
    pub fn q_node(&self, ix: usize, f: &[f64]) -> Result<Vec<f64>> {
        let a = self.abar_node(ix, f);
        let k = self.kbar_node(ix, f)?;
        Ok(a.iter().zip(&k).map(|(a, k)| a + k).collect())
    }

    pub fn abar_theta_node(&self, ix: usize, f: &[f64]) -> Vec<f64> {
        if self.theta == 0.0 {
            return self.abar_node(ix, f);
        }
        let w = &self.weight;
        let c = &self.nodes[ix];
        let u: Vec<f64> = f.iter().zip(&w.w_inv).map(|(f, wi)| f * wi).collect();
        let a = self.abar_with(c, &u);
        (0..f.len()).map(|iv| w.w[iv] * a[iv] - c.c_theta[iv] * f[iv]).collect()
    }

    pub fn kbar_theta_node(&self, ix: usize, f: &[f64]) -> Result<Vec<f64>> {
        let k = self.kbar_node(ix, f)?;
        if self.theta == 0.0 {
            return Ok(k);
        }
        let w = &self.weight.w;
        let c = &self.nodes[ix].c_theta;
        Ok((0..f.len()).map(|iv| w[iv] * k[iv] + c[iv] * w[iv] * f[iv]).collect())
    }

    /// Γ[g, f] on one node for u = √μ g given through its σ-set.
    fn gamma_with(&self, c: &NodeCoef, f: &[f64]) -> Vec<f64> {
        let vs = &self.bg.velocities;
        let mut out = self.div_s(&c.su, f);
        let df = self.grad(f);
        for (iv, o) in out.iter_mut().enumerate() {
            let suv = sym3::matvec(&c.su.sigma[iv], vs[iv]);
            let d = [df[0][iv], df[1][iv], df[2][iv]];
            *o += -dot3(suv, d) - c.dbeta[iv] * f[iv] - dot3(c.beta[iv], d) + c.vbeta[iv] * f[iv];
        }
        out
    }

    pub fn gamma_node(&self, ix: usize, f: &[f64]) -> Vec<f64> {
        self.gamma_with(&self.nodes[ix], f)
    }

    /// μ^{1/2}[4 vᵀσ_u v − 2 tr σ_u − ∂_{ij}σ_u^{ij}] with u = √μ f.
    pub fn k_expanded_node(&self, f: &[f64]) -> Result<Vec<f64>> {
        let bg = &self.bg;
        let u: Vec<f64> = f.iter().zip(&bg.sqrt_mu).map(|(f, r)| f * r).collect();
        let set = bg.kernel.sigma_set(&u)?;
        Ok((0..f.len())
            .map(|iv| {
                let v = bg.velocities[iv];
                let s = &set.sigma[iv];
                bg.sqrt_mu[iv] * (4.0 * sym3::quad(s, v, v) - 2.0 * sym3::trace(s) - set.ddiv[iv])
            })
            .collect())
    }

    /// Left side of the §7 split: (∂_iσ_G^{ij})D_jf + a_g·Df + K₁f + J_g f + σ_G:D²f.
    pub fn split_node(&self, ix: usize, f: &[f64]) -> Result<Vec<f64>> {
        let c = &self.nodes[ix];
        let df = self.grad(f);
        let hess = self.stencil.hessian_contract(&c.sg.sigma, f, &df);
        let k1 = self.k1_node(f)?;
        Ok((0..f.len())
            .map(|iv| {
                Self::drift_dot(&c.sg.div, &df, iv)
                    + Self::drift_dot(&c.drift, &df, iv)
                    + k1[iv]
                    + c.jg[iv] * f[iv]
                    + hess[iv]
            })
            .collect())
    }

    /// Continuum conjugation coefficient
    /// 2∂w∂w/w² : σ_G − ∂²w/w : σ_G − (∂w/w)·∂σ_G − (∂w/w)·a_g.
    pub fn analytic_conjugation_node(&self, ix: usize) -> Vec<f64> {
        let w = &self.weight;
        let c = &self.nodes[ix];
        (0..w.w.len())
            .map(|iv| {
                let s = &c.sg.sigma[iv];
                let e = w.grad[iv].map(|x| x * w.w_inv[iv]);
                let h = w.hess[iv];
                let hs: f64 = (0..6).map(|k| {
                    let (i, j) = sym3::SYM_PAIRS[k];
                    if i == j { h[k] * s[k] } else { 2.0 * h[k] * s[k] }
                }).sum::<f64>() * w.w_inv[iv];
                2.0 * sym3::quad(s, e, e) - hs - dot3(e, c.sg.div[iv]) - dot3(e, c.drift[iv])
            })
            .collect()
    }

    // ---- accessors used by the steppers ---------------------------------

    pub fn sigma_g(&self, ix: usize) -> &[Sym3] {
        &self.nodes[ix].sg.sigma
    }

    pub fn sigma_g_div(&self, ix: usize) -> &[[f64; 3]] {
        &self.nodes[ix].sg.div
    }

    pub fn sigma_u(&self, ix: usize) -> &[Sym3] {
        &self.nodes[ix].su.sigma
    }

    pub fn sigma_u_ddiv(&self, ix: usize) -> &[f64] {
        &self.nodes[ix].dd_su
    }

    pub fn drift(&self, ix: usize) -> &[[f64; 3]] {
        &self.nodes[ix].drift
    }

    pub fn c_theta(&self, ix: usize) -> &[f64] {
        &self.nodes[ix].c_theta
    }

    pub fn sigma_mu(&self) -> &[Sym3] {
        &self.sigma_mu.sigma
    }

    // ---- field-level operators ------------------------------------------

    pub fn apply_A(&self, f: &Field) -> Result<Field> {
        self.map(f, |_, x| self.a_node(x))
    }

    pub fn apply_K(&self, f: &Field) -> Result<Field> {
        self.try_map(f, |_, x| self.k_node(x))
    }

    pub fn apply_K_expanded(&self, f: &Field) -> Result<Field> {
        self.try_map(f, |_, x| self.k_expanded_node(x))
    }

    pub fn apply_L(&self, f: &Field) -> Result<Field> {
        self.try_map(f, |_, x| self.l_node(x))
    }

    /// Γ[g, f] for an arbitrary g (not the context's).
    pub fn apply_Gamma(&self, g: &Field, f: &Field) -> Result<Field> {
        self.check(f)?;
        self.check(g)?;
        self.try_map(f, |ix, x| {
            let c = self.node_coef(g.node(ix))?;
            Ok(self.gamma_with(&c, x))
        })
    }

    /// Γ[g, f] with the context's g.
    pub fn apply_Gamma_g(&self, f: &Field) -> Result<Field> {
        self.map(f, |ix, x| self.gamma_node(ix, x))
    }

    pub fn apply_Abar(&self, f: &Field) -> Result<Field> {
        self.map(f, |ix, x| self.abar_node(ix, x))
    }

    pub fn apply_Kbar(&self, f: &Field) -> Result<Field> {
        self.try_map(f, |ix, x| self.kbar_node(ix, x))
    }

    pub fn apply_Abar_theta(&self, f: &Field) -> Result<Field> {
        self.map(f, |ix, x| self.abar_theta_node(ix, x))
    }

    pub fn apply_Kbar_theta(&self, f: &Field) -> Result<Field> {
        self.try_map(f, |ix, x| self.kbar_theta_node(ix, x))
    }

    pub fn apply_K1(&self, f: &Field) -> Result<Field> {
        self.try_map(f, |_, x| self.k1_node(x))
    }

    pub fn apply_Jg(&self, f: &Field) -> Result<Field> {
        self.map(f, |ix, x| self.jg_node(ix, x))
    }

    pub fn apply_split(&self, f: &Field) -> Result<Field> {
        self.try_map(f, |ix, x| self.split_node(ix, x))
    }

    pub fn apply_Q(&self, f: &Field) -> Result<Field> {
        self.try_map(f, |ix, x| self.q_node(ix, x))
    }

    /// c_θ as a field (per x-node profile).
    pub fn conjugation_field(&self) -> Field {
        Field::from_nodes(&self.grid, |ix| self.nodes[ix].c_theta.clone())
    }

    pub fn analytic_conjugation_field(&self) -> Field {
        Field::from_nodes(&self.grid, |ix| self.analytic_conjugation_node(ix))
    }

    /// w^θ f.
    pub fn weighted(&self, f: &Field) -> Result<Field> {
        self.map(f, |_, x| x.iter().zip(&self.weight.w).map(|(a, w)| a * w).collect())
    }
}

fn content_key(grid: &PhaseGrid, g: &Field, theta: f64, form: VelocityForm) -> u64 {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    (grid.nx, grid.nv, grid.dim_x, grid.rv.to_bits()).hash(&mut h);
    theta.to_bits().hash(&mut h);
    form.hash(&mut h);
    for x in &g.data {
        x.to_bits().hash(&mut h);
    }
    h.finish()
}
