//! Time integration.
//!
//! * `DriftDiffusion` realizes ∂_t h + v·∇_x h = Ā_g^θ h with a monotone
//!   scheme: semi-Lagrangian linear-interpolation transport in x and a
//!   backward-Euler velocity step whose matrix is an M-matrix (Selling
//!   stencil for σ_G, upwind drift). Both stages are convex averages, so the
//!   discrete flow obeys the maximum principle exactly.
//! * `LinearLandau` advances ∂_t f + v·∇_x f = Ā_g f + K̄_g f: exact spectral
//!   transport in x, then an IMEX step in v: the local differential part of
//!   the collision operator (assembled as a sparse matrix per x-node) is
//!   implicit, the nonlocal K is explicit. A final projection restores the
//!   local collision invariants.

use crate::error::{Error, Result};
use crate::fft::PeriodicFft;
use crate::kernel::Background;
use crate::linalg::{solve_general, Csr};
use crate::norms;
use crate::operators::OperatorContext;
use crate::phase_space::{dot3, Field, PhaseGrid};
use crate::projection::Projection;
use crate::selling;
use crate::sym3::{self, Sym3};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::{Arc, Mutex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Lie,
    Strang,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepperConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    /// Relative residual of the Krylov velocity solves.
    pub solver_tol: f64,
    pub solver_max_iter: usize,
    /// Keep a snapshot every `cadence` steps (the last step is always kept).
    pub cadence: usize,
    /// Project the collision update so local mass, momentum and energy are
    /// kept exactly.
    pub restore_moments: bool,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self { dt: 0.05, t_end: 0.5, scheme: Scheme::Lie, solver_tol: 1e-10, solver_max_iter: 500, cadence: 1, restore_moments: true }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::InvalidParameter(format!("t_end = {} must be nonnegative", self.t_end)));
        }
        if !(self.solver_tol > 0.0 && self.solver_tol <= 1e-10) {
            return Err(Error::InvalidParameter(format!("solver_tol = {} must lie in (0, 1e-10]", self.solver_tol)));
        }
        if self.cadence == 0 || self.solver_max_iter == 0 {
            return Err(Error::InvalidParameter("cadence and solver_max_iter must be positive".into()));
        }
        let n = self.t_end / self.dt;
        if (n - n.round()).abs() > 1e-9 * n.max(1.0) {
            return Err(Error::InvalidParameter(format!("t_end = {} is not a multiple of dt = {}", self.t_end, self.dt)));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    /// CFL number of the transport, advisory only (both transports are
    /// unconditionally stable).
    pub fn cfl(&self, grid: &PhaseGrid) -> f64 {
        self.dt * grid.rv / grid.dx
    }
}

// ---- transport ----------------------------------------------------------

/// f(x − v t) by multiplying each Fourier mode in x with e^{−ik·v t}.
pub struct SpectralTransport {
    grid: PhaseGrid,
    fft: PeriodicFft,
    k: Vec<[f64; 3]>,
}

impl SpectralTransport {
    pub fn new(grid: &PhaseGrid) -> Self {
        let n = grid.nx;
        let freq: Vec<f64> = (0..n).map(|m| if m < n.div_ceil(2) { m as f64 } else { m as f64 - n as f64 }).collect();
        let k = (0..grid.n_x())
            .map(|ix| {
                let mut kk = [0.0; 3];
                let mut r = ix;
                for d in (0..grid.dim_x).rev() {
                    kk[d] = freq[r % n];
                    r /= n;
                }
                kk
            })
            .collect();
        Self { grid: *grid, fft: PeriodicFft::new(n, grid.dim_x), k }
    }

    /// The real part is kept, which turns the Nyquist factor into cos(k v t).
    pub fn apply(&self, f: &Field, t: f64) -> Result<Field> {
        f.check_grid(&self.grid)?;
        let (nx, nv3) = (self.grid.n_x(), self.grid.n_v());
        if nx == 1 || t == 0.0 {
            return Ok(f.clone());
        }
        let vs = self.grid.velocities();
        let cols: Vec<Vec<f64>> = (0..nv3)
            .into_par_iter()
            .map(|iv| {
                let mut buf: Vec<Complex64> = (0..nx).map(|ix| Complex64::new(f.data[ix * nv3 + iv], 0.0)).collect();
                self.fft.forward(&mut buf);
                for (b, k) in buf.iter_mut().zip(&self.k) {
                    *b *= Complex64::from_polar(1.0, -dot3(*k, vs[iv]) * t);
                }
                self.fft.inverse(&mut buf);
                buf.iter().map(|z| z.re).collect()
            })
            .collect();
        let mut out = Field::zeros(&self.grid);
        for (iv, col) in cols.iter().enumerate() {
            for (ix, &x) in col.iter().enumerate() {
                out.data[ix * nv3 + iv] = x;
            }
        }
        Ok(out)
    }
}

impl SpectralTransport {
    /// v·∇_x f, with the Nyquist mode differentiated to zero.
    pub fn advection(&self, f: &Field) -> Result<Field> {
        f.check_grid(&self.grid)?;
        let (nx, nv3, n) = (self.grid.n_x(), self.grid.n_v(), self.grid.nx);
        if nx == 1 {
            return Ok(Field::zeros(&self.grid));
        }
        let nyq = (n % 2 == 0).then_some(n as f64 / 2.0);
        let vs = self.grid.velocities();
        let cols: Vec<Vec<f64>> = (0..nv3)
            .into_par_iter()
            .map(|iv| {
                let mut buf: Vec<Complex64> = (0..nx).map(|ix| Complex64::new(f.data[ix * nv3 + iv], 0.0)).collect();
                self.fft.forward(&mut buf);
                for (b, k) in buf.iter_mut().zip(&self.k) {
                    let kd = k.map(|c| if Some(c.abs()) == nyq { 0.0 } else { c });
                    *b *= Complex64::new(0.0, dot3(kd, vs[iv]));
                }
                self.fft.inverse(&mut buf);
                buf.iter().map(|z| z.re).collect()
            })
            .collect();
        let mut out = Field::zeros(&self.grid);
        for (iv, col) in cols.iter().enumerate() {
            for (ix, &x) in col.iter().enumerate() {
                out.data[ix * nv3 + iv] = x;
            }
        }
        Ok(out)
    }
}

/// f(x − v t) by periodic linear interpolation, one spatial axis at a time.
/// Every output is a convex combination of inputs, and mass is conserved.
pub fn semi_lagrangian(f: &Field, t: f64) -> Field {
    let g = f.grid;
    let (n, nv3) = (g.nx, g.n_v());
    if t == 0.0 || n == 1 {
        return f.clone();
    }
    let vs = g.velocities();
    let mut cur = f.clone();
    for axis in 0..g.dim_x {
        let stride = n.pow((g.dim_x - 1 - axis) as u32);
        let mut next = Field::zeros(&g);
        for (iv, v) in vs.iter().enumerate() {
            let s = v[axis] * t / g.dx;
            let m = s.floor();
            let alpha = s - m;
            let m = (m as i64).rem_euclid(n as i64) as usize;
            for ix in 0..g.n_x() {
                let c = (ix / stride) % n;
                let base = ix - c * stride;
                let a = base + ((c + n - m) % n) * stride;
                let b = base + ((c + 2 * n - m - 1) % n) * stride;
                let (ha, hb) = (cur.data[a * nv3 + iv], cur.data[b * nv3 + iv]);
                next.data[ix * nv3 + iv] = ha + alpha * (hb - ha);
            }
        }
        cur = next;
    }
    cur
}

// ---- monotone velocity stencils -----------------------------------------

fn neighbour(grid: &PhaseGrid, iv: usize, e: [i64; 3]) -> Option<usize> {
    let t = grid.v_triple(iv);
    let n = grid.nv as i64;
    let mut q = [0usize; 3];
    for c in 0..3 {
        let x = t[c] as i64 + e[c];
        if x < 0 || x >= n {
            return None;
        }
        q[c] = x as usize;
    }
    Some(grid.v_index(q[0], q[1], q[2]))
}

/// Triplets of the operator h ↦ ∇·(σ∇h): Selling weights split half to
/// each endpoint of an edge; edges that leave the grid are dropped, which
/// is a no-flux closure. Symmetric, zero row sums, nonnegative off-diagonals.
pub fn selling_diffusion(grid: &PhaseGrid, sigma: &[Sym3]) -> Result<Vec<(usize, usize, f64)>> {
    let h2 = grid.dv * grid.dv;
    let mut t = Vec::with_capacity(sigma.len() * 25);
    for (p, s) in sigma.iter().enumerate() {
        let d = selling::decompose(s)
            .ok_or_else(|| Error::InvalidParameter(format!("diffusion tensor at node {p} is not positive definite")))?;
        for (rho, e) in d {
            if rho == 0.0 {
                continue;
            }
            let w = 0.5 * rho / h2;
            for sgn in [1i64, -1] {
                if let Some(q) = neighbour(grid, p, e.map(|x| sgn * x)) {
                    t.push((p, q, w));
                    t.push((p, p, -w));
                    t.push((q, p, w));
                    t.push((q, q, -w));
                }
            }
        }
    }
    Ok(t)
}

/// Upwind b·∇h with the outgoing neighbour dropped at the edge.
pub fn upwind_drift(grid: &PhaseGrid, b: &[[f64; 3]]) -> Vec<(usize, usize, f64)> {
    let mut t = Vec::with_capacity(b.len() * 6);
    for (p, bp) in b.iter().enumerate() {
        for c in 0..3 {
            let x = bp[c];
            if x == 0.0 {
                continue;
            }
            let mut e = [0i64; 3];
            e[c] = if x > 0.0 { 1 } else { -1 };
            if let Some(q) = neighbour(grid, p, e) {
                let w = x.abs() / grid.dv;
                t.push((p, q, w));
                t.push((p, p, -w));
            }
        }
    }
    t
}

// ---- drift–diffusion flow -----------------------------------------------

/// Monotone stepper for h_t + v·∇_x h = Ā_g^θ h with frozen g.
pub struct DriftDiffusion {
    pub grid: PhaseGrid,
    pub cfg: StepperConfig,
    /// I − dt·(velocity operator) per x-node.
    mats: Vec<Csr>,
    /// The velocity operator itself, per x-node.
    ops: Vec<Csr>,
}

impl DriftDiffusion {
    pub fn new(ctx: &OperatorContext, cfg: &StepperConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = ctx.grid;
        let w = &ctx.weight;
        let parts: Result<Vec<(Csr, Csr)>> = (0..grid.n_x())
            .into_par_iter()
            .map(|ix| {
                let sg = ctx.sigma_g(ix);
                let mut t = selling_diffusion(&grid, sg)?;
                let b: Vec<[f64; 3]> = (0..sg.len())
                    .map(|iv| {
                        let e = w.grad[iv].map(|x| x * w.w_inv[iv]);
                        let s = sym3::matvec(&sg[iv], e);
                        let a = ctx.drift(ix)[iv];
                        [a[0] - 2.0 * s[0], a[1] - 2.0 * s[1], a[2] - 2.0 * s[2]]
                    })
                    .collect();
                t.extend(upwind_drift(&grid, &b));
                let op = Csr::from_triplets(grid.n_v(), t);
                Ok((op.shifted_identity(-cfg.dt), op))
            })
            .collect();
        let (mats, ops) = parts?.into_iter().unzip();
        Ok(Self { grid, cfg: cfg.clone(), mats, ops })
    }

    /// The assembled velocity operator at one x-node.
    pub fn operator(&self, ix: usize) -> &Csr {
        &self.ops[ix]
    }

    fn velocity_step(&self, h: &Field) -> Result<Field> {
        let parts: Result<Vec<Vec<f64>>> = (0..self.grid.n_x())
            .into_par_iter()
            .map(|ix| {
                let b = h.node(ix);
                Ok(solve_general(&self.mats[ix], b, b, self.cfg.solver_tol, self.cfg.solver_max_iter)?.0)
            })
            .collect();
        Ok(Field { grid: self.grid, data: parts?.concat() })
    }

    pub fn step(&self, h: &Field) -> Result<Field> {
        h.check_grid(&self.grid)?;
        let dt = self.cfg.dt;
        match self.cfg.scheme {
            Scheme::Lie => self.velocity_step(&semi_lagrangian(h, dt)),
            Scheme::Strang => Ok(semi_lagrangian(&self.velocity_step(&semi_lagrangian(h, 0.5 * dt))?, 0.5 * dt)),
        }
    }

    /// All snapshots, including t = 0.
    pub fn run(&self, h0: &Field) -> Result<Vec<(f64, Field)>> {
        let mut out = vec![(0.0, h0.clone())];
        let mut h = h0.clone();
        for k in 1..=self.cfg.steps() {
            h = self.step(&h)?;
            if k % self.cfg.cadence == 0 || k == self.cfg.steps() {
                out.push((k as f64 * self.cfg.dt, h.clone()));
            }
        }
        Ok(out)
    }
}

/// One step of the drift–diffusion flow.
pub fn step_drift_diffusion(h: &Field, ctx: &OperatorContext, dt: f64) -> Result<Field> {
    let cfg = StepperConfig { dt, t_end: dt, ..StepperConfig::default() };
    DriftDiffusion::new(ctx, &cfg)?.step(h)
}

// ---- linear Landau ------------------------------------------------------

/// Implicit matrices for one operator context.
struct LocalSystems {
    key: u64,
    dt: f64,
    /// Per x-node: the local operator L, I − dt·L and I − dt/2·L.
    local: Vec<Csr>,
    full: Vec<Csr>,
    half: Vec<Csr>,
}

pub struct LinearLandau {
    pub grid: PhaseGrid,
    pub bg: Arc<Background>,
    pub cfg: StepperConfig,
    transport: SpectralTransport,
    projection: Projection,
    systems: Mutex<Option<Arc<LocalSystems>>>,
}

impl LinearLandau {
    pub fn new(bg: Arc<Background>, grid: &PhaseGrid, cfg: &StepperConfig) -> Result<Self> {
        cfg.validate()?;
        if bg.grid.nv != grid.nv || bg.grid.rv != grid.rv {
            return Err(Error::GridMismatch("stepper and background velocity grids differ".into()));
        }
        Ok(Self {
            grid: *grid,
            bg,
            cfg: cfg.clone(),
            transport: SpectralTransport::new(grid),
            projection: Projection::new(grid)?,
            systems: Mutex::new(None),
        })
    }

    pub fn projection(&self) -> &Projection {
        &self.projection
    }

    fn systems(&self, ctx: &OperatorContext) -> Arc<LocalSystems> {
        let mut guard = self.systems.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(s) = guard.as_ref() {
            if s.key == ctx.key() && s.dt == self.cfg.dt {
                return s.clone();
            }
        }
        let dt = self.cfg.dt;
        let local: Vec<Csr> = (0..self.grid.n_x()).into_par_iter().map(|ix| ctx.local_matrix(ix)).collect();
        let full = local.par_iter().map(|l| l.shifted_identity(-dt)).collect();
        let half = local.par_iter().map(|l| l.shifted_identity(-0.5 * dt)).collect();
        let s = Arc::new(LocalSystems { key: ctx.key(), dt, local, full, half });
        *guard = Some(s.clone());
        s
    }

    fn solve(&self, a: &Csr, rhs: &[f64], x0: &[f64]) -> Result<Vec<f64>> {
        Ok(solve_general(a, rhs, x0, self.cfg.solver_tol, self.cfg.solver_max_iter)?.0)
    }

    /// y − P(y − f): restores the collision invariants of f node by node.
    fn restore_invariants(&self, y: Vec<f64>, f: &[f64]) -> Vec<f64> {
        let d: Vec<f64> = y.iter().zip(f).map(|(a, b)| a - b).collect();
        let p = self.projection.project_node(&d);
        y.iter().zip(&p).map(|(y, p)| y - p).collect()
    }

    /// (I − τL) y = f + τKf.
    fn imex_euler(&self, ctx: &OperatorContext, f: &[f64], tau: f64, a: &Csr) -> Result<Vec<f64>> {
        let k = ctx.k_node(f)?;
        let rhs: Vec<f64> = f.iter().zip(&k).map(|(f, k)| f + tau * k).collect();
        self.solve(a, &rhs, f)
    }

    fn collision_node(&self, ctx: &OperatorContext, sys: &LocalSystems, ix: usize, f: &[f64]) -> Result<Vec<f64>> {
        let dt = self.cfg.dt;
        let y = match self.cfg.scheme {
            Scheme::Lie => self.imex_euler(ctx, f, dt, &sys.full[ix])?,
            Scheme::Strang => {
                // Crank–Nicolson in L, explicit midpoint in K
                let half = self.imex_euler(ctx, f, 0.5 * dt, &sys.half[ix])?;
                let kh = ctx.k_node(&half)?;
                let lf = sys.local[ix].matvec(f);
                let rhs: Vec<f64> = (0..f.len()).map(|i| f[i] + 0.5 * dt * lf[i] + dt * kh[i]).collect();
                self.solve(&sys.half[ix], &rhs, &half)?
            }
        };
        Ok(if self.cfg.restore_moments { self.restore_invariants(y, f) } else { y })
    }

    pub fn collision(&self, ctx: &OperatorContext, f: &Field) -> Result<Field> {
        f.check_grid(&self.grid)?;
        ctx.g.check_grid(&self.grid)?;
        let sys = self.systems(ctx);
        let parts: Result<Vec<Vec<f64>>> =
            (0..self.grid.n_x()).into_par_iter().map(|ix| self.collision_node(ctx, &sys, ix, f.node(ix))).collect();
        Ok(Field { grid: self.grid, data: parts?.concat() })
    }

    pub fn step(&self, ctx: &OperatorContext, f: &Field) -> Result<Field> {
        let dt = self.cfg.dt;
        match self.cfg.scheme {
            Scheme::Lie => self.collision(ctx, &self.transport.apply(f, dt)?),
            Scheme::Strang => {
                let a = self.transport.apply(f, 0.5 * dt)?;
                self.transport.apply(&self.collision(ctx, &a)?, 0.5 * dt)
            }
        }
    }
}

/// One step of the linear Landau equation with the context's frozen g.
pub fn step_linear_landau(f: &Field, ctx: &OperatorContext, dt: f64) -> Result<Field> {
    let cfg = StepperConfig { dt, t_end: dt, ..StepperConfig::default() };
    LinearLandau::new(ctx.bg.clone(), &f.grid, &cfg)?.step(ctx, f)
}

// ---- trajectories -------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: f64,
    pub l2: f64,
    pub l2_theta: f64,
    pub sigma_theta: f64,
    pub sup_theta: f64,
    pub energy_theta: f64,
    /// Moments of f(t) minus those of f(0): mass, momentum (3), energy.
    pub moment_residual: [f64; 5],
    pub min_f: f64,
    /// ⟨w^{2θ}Lf, f⟩ when requested.
    pub dissipation: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub theta: f64,
    pub times: Vec<f64>,
    pub snapshots: Vec<Field>,
    pub records: Vec<StepRecord>,
}

impl Trajectory {
    pub fn samples(&self) -> Vec<(f64, Field)> {
        self.times.iter().copied().zip(self.snapshots.iter().cloned()).collect()
    }

    pub fn last(&self) -> &Field {
        self.snapshots.last().expect("trajectory holds the initial state")
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Weight exponent of the recorded norms.
    pub theta: f64,
    /// Also record ⟨w^{2θ}Lf, f⟩ at every step.
    pub dissipation: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PositivityReport {
    pub min_f: f64,
    pub max_f: f64,
    pub witness: (usize, usize),
    pub pass: bool,
}

/// F = μ + √μ f must satisfy min F ≥ −1e−9·max F.
pub fn positivity_check(f: &Field) -> PositivityReport {
    let vs = f.grid.velocities();
    let mu: Vec<f64> = vs.iter().map(|v| (-dot3(*v, *v)).exp()).collect();
    let (mut lo, mut hi, mut at) = (f64::INFINITY, f64::NEG_INFINITY, (0, 0));
    for (ix, node) in f.nodes().enumerate() {
        for (iv, x) in node.iter().enumerate() {
            let big_f = mu[iv] + mu[iv].sqrt() * x;
            if big_f < lo {
                lo = big_f;
                at = (ix, iv);
            }
            hi = hi.max(big_f);
        }
    }
    PositivityReport { min_f: lo, max_f: hi, witness: at, pass: lo >= -1e-9 * hi.max(0.0) }
}

fn weighted_dissipation(ctx: &OperatorContext, f: &Field, theta: f64) -> Result<f64> {
    let l = ctx.apply_L(f)?;
    let w = crate::phase_space::weight(&f.grid, 2.0 * theta).data;
    let nv3 = f.grid.n_v();
    let s: f64 = l.data.iter().zip(&f.data).enumerate().map(|(i, (a, b))| w[i % nv3] * a * b).sum();
    Ok(s * f.grid.dv3() * f.grid.dx_vol())
}

struct Recorder<'a> {
    bg: &'a Background,
    proj: &'a Projection,
    opts: RunOptions,
    m0: [f64; 5],
    energy_int: f64,
    prev: Option<(f64, f64)>,
}

impl Recorder<'_> {
    fn record(&mut self, t: f64, f: &Field, ctx: &OperatorContext) -> Result<StepRecord> {
        let th = self.opts.theta;
        let sig = norms::norm_sigma_weighted(self.bg, f, th)?;
        if let Some((t0, s0)) = self.prev {
            self.energy_int += 0.5 * (t - t0) * (s0 * s0 + sig * sig);
        }
        self.prev = Some((t, sig));
        let l2_theta = norms::norm_l2_weighted(f, th);
        let m = self.proj.moments(f)?;
        Ok(StepRecord {
            t,
            l2: norms::norm_l2_weighted(f, 0.0),
            l2_theta,
            sigma_theta: sig,
            sup_theta: norms::norm_sup_weighted(f, th),
            energy_theta: 0.5 * l2_theta * l2_theta + self.energy_int,
            moment_residual: std::array::from_fn(|k| m[k] - self.m0[k]),
            min_f: positivity_check(f).min_f,
            dissipation: if self.opts.dissipation { Some(weighted_dissipation(ctx, f, th)?) } else { None },
        })
    }
}

/// Runs the linear equation; `context(k)` supplies the frozen-coefficient
/// context for the step starting at t_k = k·dt.
pub fn run_linear(
    stepper: &LinearLandau,
    f0: &Field,
    opts: &RunOptions,
    mut context: impl FnMut(usize) -> Result<Arc<OperatorContext>>,
) -> Result<Trajectory> {
    f0.check_grid(&stepper.grid)?;
    let cfg = &stepper.cfg;
    let sup0 = f0.max_abs();
    let mut rec = Recorder {
        bg: &stepper.bg,
        proj: &stepper.projection,
        opts: opts.clone(),
        m0: stepper.projection.moments(f0)?,
        energy_int: 0.0,
        prev: None,
    };
    let mut ctx = context(0)?;
    let mut traj = Trajectory { theta: opts.theta, times: vec![0.0], snapshots: vec![f0.clone()], records: vec![] };
    traj.records.push(rec.record(0.0, f0, &ctx)?);
    let mut f = f0.clone();
    let n = cfg.steps();
    for k in 0..n {
        if k > 0 {
            ctx = context(k)?;
        }
        f = stepper.step(&ctx, &f)?;
        let t = (k + 1) as f64 * cfg.dt;
        let sup = f.max_abs();
        if !f.is_finite() || sup > 1e3 * sup0 {
            return Err(Error::BlowUp { t, sup, limit: 1e3 * sup0 });
        }
        traj.records.push(rec.record(t, &f, &ctx)?);
        if (k + 1) % cfg.cadence == 0 || k + 1 == n {
            traj.times.push(t);
            traj.snapshots.push(f.clone());
        }
    }
    Ok(traj)
}

/// |½‖f_N‖²_θ + Σ_trap dt⟨w^{2θ}Lf, f⟩ − ½‖f_0‖²_θ| from recorded dissipation.
pub fn energy_slack(traj: &Trajectory) -> Result<f64> {
    let r = &traj.records;
    let (first, last) = (r.first().ok_or(Error::InvalidParameter("empty trajectory".into()))?, r.last().unwrap());
    let mut integral = 0.0;
    for w in r.windows(2) {
        let (a, b) = (w[0].dissipation, w[1].dissipation);
        let (Some(a), Some(b)) = (a, b) else {
            return Err(Error::InvalidParameter("trajectory was run without dissipation records".into()));
        };
        integral += 0.5 * (w[1].t - w[0].t) * (a + b);
    }
    Ok((0.5 * last.l2_theta.powi(2) + integral - 0.5 * first.l2_theta.powi(2)).abs())
}

// ---- barrier ------------------------------------------------------------

/// e^{kt}(1 + |v|²).
pub fn barrier_value(t: f64, v: [f64; 3], k: f64) -> f64 {
    (k * t).exp() * (1.0 + dot3(v, v))
}

/// M_g^θ φ = (∂_t + v·∇_x − Ā_g^θ)φ at time t; φ is x-independent.
pub fn barrier_residual(ctx: &OperatorContext, k: f64, t: f64) -> Result<Field> {
    let phi = crate::phase_space::lift(&ctx.grid, |_, v| barrier_value(t, v, k));
    let a = ctx.apply_Abar_theta(&phi)?;
    Ok(phi.scale(k).sub(&a))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BarrierScan {
    pub k0: Option<f64>,
    /// (k, min over interior nodes of M φ) for every k tried.
    pub tried: Vec<(f64, f64)>,
}

/// Doubles k from 1 until M_g^θ φ ≥ 0 at all interior velocity nodes.
pub fn barrier_scan(ctx: &OperatorContext, k_max: f64) -> Result<BarrierScan> {
    let mut tried = Vec::new();
    let mut k = 1.0;
    while k <= k_max {
        let r = barrier_residual(ctx, k, 0.0)?;
        let g = ctx.grid;
        let min = r
            .nodes()
            .flat_map(|n| n.iter().enumerate().filter(|(iv, _)| !g.is_v_boundary(*iv)).map(|(_, x)| *x))
            .fold(f64::INFINITY, f64::min);
        tried.push((k, min));
        if min >= 0.0 {
            return Ok(BarrierScan { k0: Some(k), tried });
        }
        k *= 2.0;
    }
    Ok(BarrierScan { k0: None, tried })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::VelocityForm;
    use crate::phase_space::lift;
    use crate::random::{rng, smooth_field};

    fn cfg(dt: f64, t_end: f64) -> StepperConfig {
        StepperConfig { dt, t_end, ..StepperConfig::default() }
    }

    #[test]
    fn config_validation() {
        assert!(cfg(0.0, 1.0).validate().is_err());
        assert!(cfg(-0.1, 1.0).validate().is_err());
        assert!(cfg(0.3, 1.0).validate().is_err());
        assert!(StepperConfig { solver_tol: 1e-6, ..cfg(0.1, 1.0) }.validate().is_err());
        assert_eq!(cfg(0.1, 1.0).steps(), 10);
    }

    #[test]
    fn spectral_transport_is_an_exact_shift() {
        let g = PhaseGrid::new(16, 4, 2.0, 1).unwrap();
        let f = lift(&g, |x, v| (2.0 * x[0]).sin() * (1.0 + v[1]) + (x[0] - 0.3).cos());
        let t = 0.37;
        let tr = SpectralTransport::new(&g).apply(&f, t).unwrap();
        let want = lift(&g, |x, v| {
            let y = x[0] - v[0] * t;
            (2.0 * y).sin() * (1.0 + v[1]) + (y - 0.3).cos()
        });
        assert!(tr.sub(&want).max_abs() < 1e-12);
    }

    #[test]
    fn advection_differentiates_modes() {
        let g = PhaseGrid::new(16, 4, 2.0, 1).unwrap();
        let f = lift(&g, |x, v| (3.0 * x[0]).sin() * v[2]);
        let a = SpectralTransport::new(&g).advection(&f).unwrap();
        let want = lift(&g, |x, v| 3.0 * v[0] * (3.0 * x[0]).cos() * v[2]);
        assert!(a.sub(&want).max_abs() < 1e-12);
    }

    #[test]
    fn semi_lagrangian_is_monotone_and_conservative() {
        let g = PhaseGrid::new(12, 4, 3.0, 2).unwrap();
        let f = smooth_field(&g, &mut rng(1), 0.1, 3, 1.0);
        let s = semi_lagrangian(&f, 0.23);
        assert!(s.max_abs() <= f.max_abs());
        let nv3 = g.n_v();
        for iv in 0..nv3 {
            let a: f64 = (0..g.n_x()).map(|ix| f.data[ix * nv3 + iv]).sum();
            let b: f64 = (0..g.n_x()).map(|ix| s.data[ix * nv3 + iv]).sum();
            assert!((a - b).abs() < 1e-12);
        }
        let c = lift(&g, |_, _| 0.7);
        assert_eq!(semi_lagrangian(&c, 0.41), c);
    }

    #[test]
    fn selling_stencil_rows_sum_to_zero() {
        let g = PhaseGrid::new(1, 6, 5.5, 1).unwrap();
        let bg = Background::new(&g);
        let m = Csr::from_triplets(g.n_v(), selling_diffusion(&g, &bg.sigma.sigma).unwrap());
        let ones = vec![1.0; g.n_v()];
        assert!(m.matvec(&ones).iter().all(|x| x.abs() < 1e-10));
        for r in 0..m.n {
            for k in m.indptr[r]..m.indptr[r + 1] {
                if m.indices[k] != r {
                    assert!(m.values[k] >= 0.0);
                }
            }
        }
    }

    #[test]
    fn drift_diffusion_keeps_constants_and_contracts() {
        let g = PhaseGrid::new(4, 8, 5.5, 1).unwrap();
        let bg = Background::new(&g);
        let gg = smooth_field(&g, &mut rng(2), 0.5, 1, 0.05);
        let ctx = OperatorContext::new(bg, &gg, 1.0, VelocityForm::Conservative).unwrap();
        let dd = DriftDiffusion::new(&ctx, &cfg(0.1, 0.3)).unwrap();
        let c = lift(&g, |_, _| -1.25);
        let out = dd.run(&c).unwrap();
        assert!(out.iter().all(|(_, h)| h.data.iter().all(|&x| x == -1.25)));
        let h0 = smooth_field(&g, &mut rng(3), 0.1, 2, 1.0);
        let run = dd.run(&h0).unwrap();
        assert!(run.iter().all(|(_, h)| h.max_abs() <= h0.max_abs() * (1.0 + 1e-10)));
    }

    #[test]
    fn pure_diffusion_conserves_mass() {
        let g = PhaseGrid::new(1, 8, 5.5, 1).unwrap();
        let bg = Background::new(&g);
        let ctx = OperatorContext::linearized(bg, &g, 0.0, VelocityForm::Conservative).unwrap();
        let h0 = smooth_field(&g, &mut rng(5), 0.3, 0, 1.0);
        let h1 = step_drift_diffusion(&h0, &ctx, 0.1).unwrap();
        let (a, b): (f64, f64) = (h0.data.iter().sum(), h1.data.iter().sum());
        assert!((a - b).abs() * g.dv3() < 1e-9);
    }

    #[test]
    fn zero_stays_zero_and_moments_are_kept() {
        let g = PhaseGrid::new(4, 8, 5.5, 1).unwrap();
        let bg = Background::new(&g);
        let ctx = Arc::new(OperatorContext::linearized(bg.clone(), &g, 0.0, VelocityForm::Conservative).unwrap());
        let st = LinearLandau::new(bg, &g, &cfg(0.05, 0.2)).unwrap();
        let z = run_linear(&st, &Field::zeros(&g), &RunOptions::default(), |_| Ok(ctx.clone())).unwrap();
        assert!(z.snapshots.iter().all(|f| f.max_abs() == 0.0));
        let f0 = smooth_field(&g, &mut rng(6), 0.4, 1, 0.01);
        let tr = run_linear(&st, &f0, &RunOptions::default(), |_| Ok(ctx.clone())).unwrap();
        let scale = norms::norm_l2_weighted(&f0, 0.0);
        for r in &tr.records {
            assert!(r.moment_residual.iter().all(|m| m.abs() < 1e-12 * scale.max(1.0)));
        }
    }

    #[test]
    fn positivity_examples() {
        let g = PhaseGrid::new(1, 6, 5.5, 1).unwrap();
        assert!(positivity_check(&Field::zeros(&g)).pass);
        let half = lift(&g, |_, v| -0.5 * (-0.5 * dot3(v, v)).exp());
        let r = positivity_check(&half);
        assert!(r.pass && r.min_f > 0.0);
        let mut bad = Field::zeros(&g);
        let iv = g.v_index(3, 3, 3);
        bad.data[iv] = -2.0 * (-0.5 * dot3(g.velocity(iv), g.velocity(iv))).exp();
        let r = positivity_check(&bad);
        assert!(!r.pass);
        assert_eq!(r.witness, (0, iv));
    }

    #[test]
    fn barrier_examples() {
        assert_eq!(barrier_value(0.0, [0.0; 3], 3.0), 1.0);
        assert_eq!(barrier_value(0.0, [0.0, 2.0, 0.0], 3.0), 5.0);
        let g = PhaseGrid::new(2, 8, 5.5, 1).unwrap();
        let bg = Background::new(&g);
        let ctx = OperatorContext::new(bg, &smooth_field(&g, &mut rng(7), 0.5, 1, 0.05), 1.0, VelocityForm::Expanded).unwrap();
        let s = barrier_scan(&ctx, 1024.0).unwrap();
        assert!(s.k0.is_some());
    }
}
