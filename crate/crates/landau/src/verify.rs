//! Verification suites. Every check returns a `CheckResult` with the fitted
//! constants it measured; constant-free inequalities are read as "the
//! measured ratio is finite and stable under refinement".

use crate::error::{Error, Result};
use crate::evolution::{
    barrier_scan, energy_slack, run_linear, DriftDiffusion, LinearLandau, RunOptions, StepperConfig, Trajectory,
};
use crate::geometry::{self, FrameChange, Point};
use crate::kernel::{eigen_split, Background};
use crate::norms;
use crate::operators::{OperatorContext, VelocityForm};
use crate::phase_space::{dot3, lift, norm3, Field, PhaseGrid};
use crate::picard::{picard_solve, PicardConfig, PicardResult};
use crate::projection::Projection;
use crate::random::{rng, smooth_field, SmoothSample};
use crate::sym3;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "pass")]
    Pass,
    #[serde(rename = "fail")]
    Fail,
    #[serde(rename = "n/a")]
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub status: Status,
    pub fitted_constants: BTreeMap<String, f64>,
    pub tolerance: f64,
    /// The estimate this check stands for.
    pub provenance: String,
    /// Where a failure was observed (node, time or sample index).
    pub witness: Option<String>,
}

impl CheckResult {
    fn new(name: &str, provenance: &str, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            status: Status::Pass,
            fitted_constants: BTreeMap::new(),
            tolerance,
            provenance: provenance.into(),
            witness: None,
        }
    }

    fn set(mut self, key: &str, value: f64) -> Self {
        self.fitted_constants.insert(key.into(), value);
        self
    }

    /// Pass iff `ok`; a failure records `witness`.
    fn decide(mut self, ok: bool, witness: impl FnOnce() -> String) -> Self {
        if ok {
            self.status = Status::Pass;
        } else {
            self.status = Status::Fail;
            self.witness = Some(witness());
        }
        self
    }

    fn not_applicable(mut self, why: &str) -> Self {
        self.status = Status::NotApplicable;
        self.witness = Some(why.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    pub fn get(&self, key: &str) -> f64 {
        self.fitted_constants.get(key).copied().unwrap_or(f64::NAN)
    }
}

/// Knobs of the suites. The grid is the desk grid unless configured.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub nx: usize,
    pub nv: usize,
    pub rv: f64,
    pub dim_x: usize,
    pub seed: u64,
    pub theta: f64,
    pub theta_bar: f64,
    pub epsilon: f64,
    pub epsilon0: f64,
    pub form: VelocityForm,
    /// Random fields of the coercivity suite.
    pub samples: usize,
    /// Random initial data of the maximum-principle suite (per θ).
    pub max_principle_runs: usize,
    pub conservation_steps: usize,
    pub conservation_dt: f64,
    pub decay_t_end: f64,
    pub decay_dt: f64,
    pub energy_t_end: f64,
    pub energy_dt: f64,
    pub picard: PicardConfig,
    pub picard_t_end: f64,
    pub picard_dt: f64,
    pub holder_alpha: f64,
    pub frame_m: f64,
    pub frame_n: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            nx: 16,
            nv: 24,
            rv: crate::phase_space::DEFAULT_RV,
            dim_x: 1,
            seed: 2024,
            theta: 0.0,
            theta_bar: -2.0,
            epsilon: 0.1,
            epsilon0: 1e-2,
            form: VelocityForm::Conservative,
            samples: 100,
            max_principle_runs: 20,
            conservation_steps: 1000,
            conservation_dt: 0.01,
            decay_t_end: 20.0,
            decay_dt: 0.1,
            energy_t_end: 0.4,
            energy_dt: 0.04,
            picard: PicardConfig::default(),
            picard_t_end: 0.5,
            picard_dt: 0.05,
            holder_alpha: 1.0 / 3.0,
            frame_m: 10.0,
            frame_n: 3.0,
        }
    }
}

impl VerifyConfig {
    pub fn grid(&self) -> Result<PhaseGrid> {
        PhaseGrid::new(self.nx, self.nv, self.rv, self.dim_x)
    }

    fn velocity_grid(&self, nv: usize) -> Result<PhaseGrid> {
        PhaseGrid::new(1, nv, self.rv, 1)
    }

    fn picard_config(&self) -> PicardConfig {
        PicardConfig { theta: self.theta, theta_bar: self.theta_bar, epsilon0: self.epsilon0, form: self.form, ..self.picard.clone() }
    }
}

pub const SUITES: [&str; 12] = [
    "operator_identities",
    "spectral_bounds",
    "coercivity",
    "decay",
    "nonlinear_bounds",
    "conservation",
    "max_principle",
    "barrier",
    "energy",
    "picard",
    "positivity",
    "geometry",
];

pub fn run_suite(name: &str, cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    Ok(match name {
        "operator_identities" => suite_operator_identities(cfg)?,
        "spectral_bounds" => suite_spectral_bounds(cfg)?,
        "coercivity" => vec![check_coercivity(cfg, 16, cfg.nv)?],
        "decay" => suite_decay(cfg)?,
        "nonlinear_bounds" => vec![check_nonlinear_bounds(cfg, 16, cfg.nv)?],
        "conservation" => vec![check_conservation(cfg)?],
        "max_principle" => vec![check_max_principle(cfg)?],
        "barrier" => vec![check_barrier(cfg)?],
        "energy" => vec![check_energy(cfg)?],
        "picard" => vec![picard_checks(cfg)?.0],
        "positivity" => vec![picard_checks(cfg)?.1],
        "geometry" => suite_geometry(cfg)?,
        other => return Err(Error::InvalidParameter(format!("unknown suite '{other}'; known: {}", SUITES.join(", ")))),
    })
}

// ---- helpers ------------------------------------------------------------

/// ‖a − b‖₂/‖b‖₂, zero when both vanish.
fn rel_l2(a: &[f64], b: &[f64]) -> f64 {
    let n: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let d: f64 = b.iter().map(|y| y * y).sum();
    if d == 0.0 {
        if n == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        (n / d).sqrt()
    }
}

/// max|a − b| / max(|a|, |b|), zero when both vanish.
fn rel_max(a: &Field, b: &Field) -> f64 {
    let s = a.max_abs().max(b.max_abs());
    if s == 0.0 {
        0.0
    } else {
        a.sub(b).max_abs() / s
    }
}

/// Least-squares slope of y against x.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// A random field with zero local moments (collision invariants removed at
/// every x-node), rescaled so that ‖f‖_{∞,θ} = `sup`.
pub fn prepared_field(grid: &PhaseGrid, seed: u64, theta: f64, sup: f64) -> Result<Field> {
    let f = smooth_field(grid, &mut rng(seed), 0.6, 2, 1.0);
    let f = Projection::new(grid)?.apply_IminusP(&f)?;
    let s = norms::norm_sup_weighted(&f, theta);
    Ok(if s == 0.0 { f } else { f.scale(sup * (1.0 - 1e-12) / s) })
}

fn velocity_inner(grid: &PhaseGrid, a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * grid.dv3()
}

// ---- operator identities ------------------------------------------------

fn minus_8pi_errors(rv: f64, nv: usize) -> Result<[f64; 3]> {
    let g = PhaseGrid::new(1, nv, rv, 1)?;
    let bg = Background::new(&g);
    let polys: [fn([f64; 3]) -> f64; 3] =
        [|v| 1.0 + v[0] * v[1] - 0.5 * dot3(v, v), |_| 1.0, |v| v[2] + v[0] * v[0] * v[1]];
    let mut out = [0.0; 3];
    for (k, p) in polys.iter().enumerate() {
        let u: Vec<f64> = bg.velocities.iter().zip(&bg.sqrt_mu).map(|(v, r)| p(*v) * r).collect();
        let lhs = bg.kernel.double_divergence(&u)?;
        let rhs: Vec<f64> = u.iter().map(|x| -8.0 * PI * x).collect();
        out[k] = rel_l2(&lhs, &rhs);
    }
    Ok(out)
}

/// ∂_{ij}φ^{ij} * (√μ p) = −8π√μ p for three polynomials p, at one grid.
pub fn check_minus_8pi(rv: f64, nv: usize) -> Result<CheckResult> {
    let e = minus_8pi_errors(rv, nv)?;
    let worst = e.iter().copied().fold(0.0, f64::max);
    let c = CheckResult::new("minus_8pi_identity", "double divergence of the Coulomb kernel is −8π δ", 0.02)
        .set("nv", nv as f64)
        .set("rel_error_0", e[0])
        .set("rel_error_1", e[1])
        .set("rel_error_2", e[2]);
    Ok(c.decide(worst <= 0.02, || format!("relative L2 error {worst:.3e} > 2% at nv = {nv}")))
}

/// The same identity at two grids: fine error ≤ 2%, decrease ≥ 3×.
pub fn check_minus_8pi_refinement(rv: f64, coarse: usize, fine: usize) -> Result<CheckResult> {
    let (a, b) = (minus_8pi_errors(rv, coarse)?, minus_8pi_errors(rv, fine)?);
    let mut c = CheckResult::new("minus_8pi_refinement", "double divergence of the Coulomb kernel is −8π δ", 0.02);
    let mut bad = None;
    for k in 0..3 {
        let ratio = a[k] / b[k];
        c = c.set(&format!("error_coarse_{k}"), a[k]).set(&format!("error_fine_{k}"), b[k]).set(&format!("ratio_{k}"), ratio);
        if b[k] > 0.02 || ratio < 3.0 {
            bad.get_or_insert(k);
        }
    }
    Ok(c.decide(bad.is_none(), || format!("test field {}", bad.unwrap())))
}

pub fn check_rearrangement(cfg: &VerifyConfig) -> Result<CheckResult> {
    let grid = cfg.grid()?;
    let bg = Background::new(&grid);
    let mut r = rng(cfg.seed ^ 0x11);
    let g = smooth_field(&grid, &mut r, 0.5, 1, 0.5 * cfg.epsilon);
    let f = smooth_field(&grid, &mut r, 0.4, 1, 1.0);
    let mut c = CheckResult::new("rearrangement", "Ā_f f + K̄_f f = A f + K f + Γ(f, f) rearrangement", 1e-10);
    let mut worst: f64 = 0.0;
    for form in [VelocityForm::Conservative, VelocityForm::Expanded] {
        let ctx = OperatorContext::new(bg.clone(), &g, 0.0, form)?;
        let lhs = ctx.apply_Abar(&f)?.axpy(1.0, &ctx.apply_Kbar(&f)?);
        let rhs = ctx.apply_A(&f)?.axpy(1.0, &ctx.apply_K(&f)?).axpy(1.0, &ctx.apply_Gamma(&g, &f)?);
        let e = rel_max(&lhs, &rhs);
        c = c.set(&format!("rel_error_{form:?}").to_lowercase(), e);
        worst = worst.max(e);
    }
    Ok(c.decide(worst <= 1e-10, || format!("max relative deviation {worst:.3e}")))
}

pub fn check_k1(cfg: &VerifyConfig) -> Result<CheckResult> {
    let grid = cfg.velocity_grid(cfg.nv)?;
    let bg = Background::new(&grid);
    let ctx = OperatorContext::linearized(bg, &grid, 0.0, cfg.form)?;
    let f = smooth_field(&grid, &mut rng(cfg.seed ^ 0x12), 0.4, 0, 1.0);
    let e = rel_max(&ctx.apply_K1(&f)?, &ctx.apply_K(&f)?);
    Ok(CheckResult::new("k1_equals_k", "K₁ expansion of the nonlocal part", 1e-10)
        .set("rel_error", e)
        .decide(e <= 1e-10, || format!("relative deviation {e:.3e}")))
}

pub fn check_conjugation(cfg: &VerifyConfig) -> Result<CheckResult> {
    let grid = cfg.grid()?;
    let bg = Background::new(&grid);
    let mut r = rng(cfg.seed ^ 0x13);
    let g = smooth_field(&grid, &mut r, 0.5, 1, 0.5 * cfg.epsilon);
    let f = smooth_field(&grid, &mut r, 0.5, 1, 1.0);
    let mut c = CheckResult::new("weighted_conjugation", "w^θ(Ā + K̄)f = Ā^θ(w^θ f) + K̄^θ f", 1e-10);
    let mut worst: f64 = 0.0;
    for theta in [1.0, 2.0] {
        let ctx = OperatorContext::new(bg.clone(), &g, theta, cfg.form)?;
        let lhs = ctx.weighted(&ctx.apply_Abar(&f)?.axpy(1.0, &ctx.apply_Kbar(&f)?))?;
        let rhs = ctx.apply_Abar_theta(&ctx.weighted(&f)?)?.axpy(1.0, &ctx.apply_Kbar_theta(&f)?);
        let e = rel_max(&lhs, &rhs);
        c = c.set(&format!("rel_error_theta_{theta}"), e);
        worst = worst.max(e);
    }
    Ok(c.decide(worst <= 1e-10, || format!("max relative deviation {worst:.3e}")))
}

fn null_space_residuals(rv: f64, nv: usize, form: VelocityForm) -> Result<[f64; 5]> {
    let grid = PhaseGrid::new(1, nv, rv, 1)?;
    let bg = Background::new(&grid);
    let ctx = OperatorContext::linearized(bg, &grid, 0.0, form)?;
    let polys: [fn([f64; 3]) -> f64; 5] = [|_| 1.0, |v| v[0], |v| v[1], |v| v[2], |v| dot3(v, v)];
    let mut out = [0.0; 5];
    for (k, p) in polys.iter().enumerate() {
        let psi = lift(&grid, |_, v| p(v) * (-0.5 * dot3(v, v)).exp());
        let l = ctx.apply_L(&psi)?;
        out[k] = (l.dot(&l) / psi.dot(&psi)).sqrt();
    }
    Ok(out)
}

/// ‖Lψ‖/‖ψ‖ for the five collision invariants at `nv` (≤ 5e−3) and the
/// decrease at `nv_fine` (≥ 3×). Returned as two results.
pub fn check_null_space(cfg: &VerifyConfig, nv: usize, nv_fine: usize) -> Result<(CheckResult, CheckResult)> {
    let a = null_space_residuals(cfg.rv, nv, cfg.form)?;
    let worst = a.iter().copied().fold(0.0, f64::max);
    let mut c1 = CheckResult::new("null_space", "L vanishes on the collision invariants", 5e-3).set("nv", nv as f64);
    for (k, x) in a.iter().enumerate() {
        c1 = c1.set(&format!("residual_{k}"), *x);
    }
    let c1 = c1.decide(worst <= 5e-3, || format!("‖Lψ‖/‖ψ‖ = {worst:.3e}"));
    let b = null_space_residuals(cfg.rv, nv_fine, cfg.form)?;
    let mut c2 = CheckResult::new("null_space_refinement", "L vanishes on the collision invariants", 3.0).set("nv_fine", nv_fine as f64);
    let mut bad = None;
    for k in 0..5 {
        let ratio = a[k] / b[k];
        c2 = c2.set(&format!("residual_fine_{k}"), b[k]).set(&format!("ratio_{k}"), ratio);
        if !(ratio >= 3.0) {
            bad.get_or_insert((k, ratio));
        }
    }
    let c2 = c2.decide(bad.is_none(), || {
        let (k, r) = bad.unwrap();
        format!("invariant {k}: residual ratio {r:.3} (both residuals at round-off: {:.1e}, {:.1e})", a[k], b[k])
    });
    Ok((c1, c2))
}

pub fn suite_operator_identities(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let (n1, n2) = check_null_space(cfg, cfg.nv, 2 * cfg.nv)?;
    Ok(vec![
        check_minus_8pi(cfg.rv, cfg.nv)?,
        check_minus_8pi_refinement(cfg.rv, 16, 32)?,
        check_rearrangement(cfg)?,
        check_k1(cfg)?,
        check_conjugation(cfg)?,
        n1,
        n2,
    ])
}

// ---- spectral bounds ----------------------------------------------------

/// Decay exponents of the eigenvalues of σ_μ on 1 ≤ |v| ≤ rv − 1, fitted
/// against log(1 + |v|), and the alignment of the parallel eigenvector.
pub fn check_spectral_structure(cfg: &VerifyConfig) -> Result<CheckResult> {
    let grid = cfg.velocity_grid(cfg.nv)?;
    let bg = Background::new(&grid);
    let (mut lx, mut l1, mut l2, mut lv) = (vec![], vec![], vec![], vec![]);
    let mut align: f64 = 1.0;
    let mut witness = 0;
    for (iv, v) in bg.velocities.iter().enumerate() {
        let r = norm3(*v);
        if !(1.0..=cfg.rv - 1.0).contains(&r) {
            continue;
        }
        let e = eigen_split(&bg.sigma.sigma[iv], *v);
        if e.alignment < align {
            align = e.alignment;
            witness = iv;
        }
        lx.push((1.0 + r).ln());
        lv.push(r.ln());
        l1.push(e.lambda_parallel.ln());
        l2.push((0.5 * (e.lambda_perp[0] + e.lambda_perp[1])).ln());
    }
    let (s1, s2) = (fit_slope(&lx, &l1), fit_slope(&lx, &l2));
    // local slope over the outer quarter of the window
    let outer: Vec<usize> = (0..lv.len()).filter(|&i| lv[i].exp() >= 0.75 * (cfg.rv - 1.0)).collect();
    let pick = |v: &[f64]| outer.iter().map(|&i| v[i]).collect::<Vec<_>>();
    let (a1, a2) = (fit_slope(&pick(&lv), &pick(&l1)), fit_slope(&pick(&lv), &pick(&l2)));
    let c = CheckResult::new("sigma_mu_spectrum", "σ_μ eigenvalues ~ (1+|v|)^-3 along v and (1+|v|)^-1 across", 0.3)
        .set("exponent_parallel", s1)
        .set("exponent_perp", s2)
        .set("outer_slope_parallel", a1)
        .set("outer_slope_perp", a2)
        .set("min_alignment", align);
    let ok = (s1 + 3.0).abs() <= 0.3 && (s2 + 1.0).abs() <= 0.3 && align >= 0.999;
    Ok(c.decide(ok, || format!("exponents ({s1:.3}, {s2:.3}); min alignment {align:.6} at node {witness}")))
}

fn node_extremes(s: &sym3::Sym3) -> (f64, f64) {
    let (l, _) = sym3::eigen(s);
    (l[0], l[2])
}

/// Node-wise min/max eigenvalue ratios of σ_G to σ_μ for ‖g‖_∞ ∈
/// {0, ε/10, ε/2} within [1/2, 2]; also the ε/100 envelope change.
pub fn check_sigma_g_bounds(cfg: &VerifyConfig) -> Result<CheckResult> {
    let grid = cfg.grid()?;
    let bg = Background::new(&grid);
    let base: Vec<(f64, f64)> = bg.sigma.sigma.iter().map(node_extremes).collect();
    let shape = smooth_field(&grid, &mut rng(cfg.seed ^ 0x21), 0.5, 2, 1.0);
    let mut c = CheckResult::new("sigma_g_two_sided", "σ_G comparable to σ_μ for small g", 2.0);
    let (mut lo, mut hi): (f64, f64) = (f64::INFINITY, 0.0);
    let mut witness = String::new();
    for (k, level) in [0.0, 0.1, 0.5, 0.01].iter().enumerate() {
        let g = shape.scale(level * cfg.epsilon);
        let ctx = OperatorContext::new(bg.clone(), &g, 0.0, cfg.form)?;
        let (mut a, mut b): (f64, f64) = (f64::INFINITY, 0.0);
        for ix in 0..grid.n_x() {
            for (iv, s) in ctx.sigma_g(ix).iter().enumerate() {
                let (mn, mx) = node_extremes(s);
                let (r1, r2) = (mn / base[iv].0, mx / base[iv].1);
                for r in [r1, r2] {
                    if r < a {
                        a = r;
                    }
                    b = b.max(r);
                    if !(0.5..=2.0).contains(&r) && witness.is_empty() {
                        witness = format!("‖g‖ = {}ε, x-node {ix}, v-node {iv}: ratio {r:.4}", level);
                    }
                }
            }
        }
        c = c.set(&format!("min_ratio_{k}"), a).set(&format!("max_ratio_{k}"), b);
        if k < 3 {
            lo = lo.min(a);
            hi = hi.max(b);
        } else {
            c = c.set("envelope_change_small_g", (1.0 - a).abs().max(b - 1.0));
        }
    }
    let small = c.get("envelope_change_small_g");
    let ok = lo >= 0.5 && hi <= 2.0 && small <= 0.05;
    Ok(c.decide(ok, || if witness.is_empty() { format!("ε/100 envelope change {small:.3e}") } else { witness }))
}

pub fn suite_spectral_bounds(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    Ok(vec![check_spectral_structure(cfg)?, check_sigma_g_bounds(cfg)?])
}

/// The same bounds with an arbitrary g; n/a above ε.
pub fn check_sigma_g_for(cfg: &VerifyConfig, g: &Field) -> Result<CheckResult> {
    let c = CheckResult::new("sigma_g_given", "σ_G comparable to σ_μ for small g", 2.0).set("g_sup", g.max_abs());
    if g.max_abs() > cfg.epsilon {
        return Ok(c.not_applicable("‖g‖_∞ exceeds ε"));
    }
    let bg = Background::new(&g.grid);
    let ctx = OperatorContext::new(bg.clone(), g, 0.0, cfg.form)?;
    let (mut lo, mut hi): (f64, f64) = (f64::INFINITY, 0.0);
    for ix in 0..g.grid.n_x() {
        for (iv, s) in ctx.sigma_g(ix).iter().enumerate() {
            let (mn, mx) = node_extremes(s);
            let (b0, b1) = node_extremes(&bg.sigma.sigma[iv]);
            lo = lo.min((mn / b0).min(mx / b1));
            hi = hi.max((mn / b0).max(mx / b1));
        }
    }
    Ok(c.set("min_ratio", lo).set("max_ratio", hi).decide(lo >= 0.5 && hi <= 2.0, || format!("ratios [{lo:.4}, {hi:.4}]")))
}

// ---- coercivity ---------------------------------------------------------

fn coercivity_constant(cfg: &VerifyConfig, nv: usize) -> Result<(f64, usize, usize)> {
    let grid = cfg.velocity_grid(nv)?;
    let bg = Background::new(&grid);
    let ctx = OperatorContext::linearized(bg.clone(), &grid, 0.0, cfg.form)?;
    let proj = Projection::new(&grid)?;
    let mut r = rng(cfg.seed ^ 0x31);
    let draws: Vec<SmoothSample> = (0..cfg.samples).map(|_| SmoothSample::draw(&mut r, 6, nv as f64 / 8.0, 0.5, 0)).collect();
    let ratios: Vec<Option<f64>> = draws
        .par_iter()
        .map(|s| -> Result<Option<f64>> {
            let f = s.field(&grid);
            let micro = proj.apply_IminusP(&f)?;
            let den = norms::norm_sigma_weighted(&bg, &micro, 0.0)?.powi(2);
            if den <= 1e-12 * norms::norm_sigma_weighted(&bg, &f, 0.0)?.powi(2) {
                return Ok(None);
            }
            let l = ctx.apply_L(&f)?;
            Ok(Some(velocity_inner(&grid, &l.data, &f.data) / den))
        })
        .collect::<Result<_>>()?;
    let (mut best, mut at, mut used) = (f64::INFINITY, 0, 0);
    for (k, x) in ratios.iter().enumerate() {
        if let Some(x) = x {
            used += 1;
            if *x < best {
                best = *x;
                at = k;
            }
        }
    }
    Ok((best, at, used))
}

/// δ̂ = min ⟨Lf, f⟩ / |(I − P)f|²_σ over seeded random fields at two grids.
pub fn check_coercivity(cfg: &VerifyConfig, nv_a: usize, nv_b: usize) -> Result<CheckResult> {
    let (da, wa, ua) = coercivity_constant(cfg, nv_a)?;
    let (db, wb, ub) = coercivity_constant(cfg, nv_b)?;
    let ratio = da.max(db) / da.min(db);
    let c = CheckResult::new("coercivity", "⟨Lf, f⟩ ≥ δ |(I − P) f|²_σ", 1e-6)
        .set("delta_coarse", da)
        .set("delta_fine", db)
        .set("refinement_ratio", ratio)
        .set("samples_used", (ua + ub) as f64 / 2.0);
    let ok = da > 1e-6 && db > 1e-6 && ratio <= 2.0;
    Ok(c.decide(ok, || format!("δ̂ = {da:.4e} (sample {wa}, nv {nv_a}), {db:.4e} (sample {wb}, nv {nv_b})")))
}

// ---- evolution-based checks ---------------------------------------------

fn linear_run(cfg: &VerifyConfig, f0: &Field, stepper: &StepperConfig, opts: &RunOptions) -> Result<Trajectory> {
    let grid = f0.grid;
    let bg = Background::new(&grid);
    let ctx = Arc::new(OperatorContext::linearized(bg.clone(), &grid, opts.theta, cfg.form)?);
    let st = LinearLandau::new(bg, &grid, stepper)?;
    run_linear(&st, f0, opts, |_| Ok(ctx.clone()))
}

/// Moment drift of a long linear run: per step ≤ 1e−8‖f₀‖₂, cumulative ≤ 1e−5‖f₀‖₂.
pub fn check_conservation(cfg: &VerifyConfig) -> Result<CheckResult> {
    let grid = cfg.grid()?;
    let f0 = prepared_field(&grid, cfg.seed ^ 0x41, 0.0, 0.01)?.axpy(1.0, &macro_part(&grid, 1e-3)?);
    let dt = cfg.conservation_dt;
    let st = StepperConfig { dt, t_end: dt * cfg.conservation_steps as f64, cadence: cfg.conservation_steps, ..Default::default() };
    let tr = linear_run(cfg, &f0, &st, &RunOptions::default())?;
    let scale = norms::norm_l2_weighted(&f0, 0.0);
    let (mut step_max, mut at): (f64, usize) = (0.0, 0);
    for (k, w) in tr.records.windows(2).enumerate() {
        let d = (0..5).map(|m| (w[1].moment_residual[m] - w[0].moment_residual[m]).abs()).fold(0.0, f64::max);
        if d > step_max {
            step_max = d;
            at = k + 1;
        }
    }
    let cum = tr.records.last().unwrap().moment_residual.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let c = CheckResult::new("conservation", "mass, momentum and energy are invariants of the dynamics", 1e-8)
        .set("steps", cfg.conservation_steps as f64)
        .set("max_step_drift_rel", step_max / scale)
        .set("cumulative_drift_rel", cum / scale);
    Ok(c.decide(step_max <= 1e-8 * scale && cum <= 1e-5 * scale, || format!("step {at}: drift {:.3e}", step_max / scale)))
}

/// A small x-dependent macroscopic perturbation (nonzero local moments,
/// zero global moments) so conservation is not trivially satisfied.
fn macro_part(grid: &PhaseGrid, amp: f64) -> Result<Field> {
    Ok(lift(grid, |x, v| amp * x[0].sin() * (1.0 + v[1] + 0.5 * dot3(v, v)) * (-0.5 * dot3(v, v)).exp()))
}

/// Drift–diffusion flow with random admissible g: sup_t‖h‖_∞ ≤ ‖h₀‖_∞(1 + 1e−6).
pub fn check_max_principle(cfg: &VerifyConfig) -> Result<CheckResult> {
    let grid = cfg.grid()?;
    let bg = Background::new(&grid);
    let stepper = StepperConfig { dt: 0.05, t_end: 0.5, ..Default::default() };
    let mut c = CheckResult::new("max_principle", "sup_t ‖h(t)‖_∞ ≤ ‖h₀‖_∞ for the drift–diffusion flow", 1e-6);
    let mut worst: f64 = 0.0;
    let mut witness = String::new();
    for theta in [0.0, 1.0, 2.0] {
        let mut theta_worst: f64 = 0.0;
        for k in 0..cfg.max_principle_runs {
            let seed = cfg.seed ^ (0x5100 + 64 * theta as u64 + k as u64);
            let mut r = rng(seed);
            let amp = 0.5 * cfg.epsilon * r.gen_range(0.2..1.0);
            let g = smooth_field(&grid, &mut r, 0.5, 2, amp);
            if g.max_abs() > cfg.epsilon {
                return Ok(c.not_applicable("‖g‖_∞ exceeds ε"));
            }
            let decay = r.gen_range(0.05..0.5);
            let h0 = smooth_field(&grid, &mut r, decay, 2, 1.0);
            let ctx = OperatorContext::new(bg.clone(), &g, theta, cfg.form)?;
            let run = DriftDiffusion::new(&ctx, &stepper)?.run(&h0)?;
            let s0 = h0.max_abs();
            for (t, h) in &run {
                let excess = h.max_abs() / s0 - 1.0;
                theta_worst = theta_worst.max(excess);
                if excess > worst {
                    worst = excess;
                    if excess > 1e-6 {
                        witness = format!("θ = {theta}, run {k}, t = {t}: excess {excess:.3e}");
                    }
                }
            }
        }
        c = c.set(&format!("max_excess_theta_{theta}"), theta_worst);
    }
    c = c.set("max_excess", worst);
    Ok(c.decide(worst <= 1e-6, || witness))
}

/// Doubling scan for k₀ with M_g^θ φ ≥ 0, φ = e^{kt}(1 + |v|²), θ ∈ {0, 1, 2}.
pub fn check_barrier(cfg: &VerifyConfig) -> Result<CheckResult> {
    let grid = cfg.grid()?;
    let bg = Background::new(&grid);
    let g = smooth_field(&grid, &mut rng(cfg.seed ^ 0x61), 0.5, 2, 0.5 * cfg.epsilon);
    let mut c = CheckResult::new("barrier", "e^{kt}(1 + |v|²) is a supersolution for large k", 0.0);
    let mut missing = None;
    for theta in [0.0, 1.0, 2.0] {
        let ctx = OperatorContext::new(bg.clone(), &g, theta, VelocityForm::Expanded)?;
        let scan = barrier_scan(&ctx, 2f64.powi(30))?;
        match scan.k0 {
            Some(k) => c = c.set(&format!("k0_theta_{theta}"), k),
            None => {
                missing.get_or_insert(theta);
            }
        }
    }
    Ok(c.decide(missing.is_none(), || format!("no k ≤ 2^30 found for θ = {}", missing.unwrap())))
}

/// Decay of ‖f(t)‖_{2,θ} against log(1 + t/k), k = 2, on t ∈ [1, t_end].
pub fn suite_decay(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let grid = cfg.grid()?;
    let f0 = prepared_field(&grid, cfg.seed ^ 0x71, cfg.theta, 0.01)?;
    let st = StepperConfig { dt: cfg.decay_dt, t_end: cfg.decay_t_end, cadence: usize::MAX, ..Default::default() };
    let tr = linear_run(cfg, &f0, &st, &RunOptions { theta: cfg.theta, dissipation: false })?;
    Ok(decay_checks(&tr, 2.0))
}

pub fn decay_checks(tr: &Trajectory, k: f64) -> Vec<CheckResult> {
    let recs: Vec<_> = tr.records.iter().filter(|r| r.t >= 1.0 && r.l2_theta > 0.0).collect();
    let mut decay = CheckResult::new("decay", "‖f(t)‖_{2,θ} ≲ (1 + t/k)^{-k/2}", 0.5).set("k", k);
    if recs.len() < 2 || tr.records[0].l2_theta == 0.0 {
        decay = decay.set("slope", f64::NEG_INFINITY);
    } else {
        let x: Vec<f64> = recs.iter().map(|r| (1.0 + r.t / k).ln()).collect();
        let y: Vec<f64> = recs.iter().map(|r| r.l2_theta.ln()).collect();
        let s = fit_slope(&x, &y);
        decay = decay.set("slope", s).set("t_last", recs.last().unwrap().t);
        decay = decay.decide(s <= -k / 2.0 + 0.5, || format!("fitted slope {s:.3} > {:.3}", -k / 2.0 + 0.5));
    }
    let e0 = tr.records[0].energy_theta;
    let c_hat = if e0 == 0.0 { 0.0 } else { tr.records.iter().map(|r| r.energy_theta / e0).fold(0.0, f64::max) };
    let sup0 = tr.records[0].sup_theta;
    let sup_ratio = if sup0 == 0.0 { 0.0 } else { tr.records.iter().map(|r| r.sup_theta / sup0).fold(0.0, f64::max) };
    let energy = CheckResult::new("energy_bounded", "E_θ(t) ≤ C E_θ(0)", f64::INFINITY)
        .set("c_hat", c_hat)
        .decide(c_hat.is_finite(), || "non-finite energy".into());
    let sup = CheckResult::new("weighted_sup_bounded", "weighted L∞ bound along the linear flow", f64::INFINITY)
        .set("sup_ratio", sup_ratio)
        .set("final_sup_ratio", if sup0 == 0.0 { 0.0 } else { tr.records.last().unwrap().sup_theta / sup0 })
        .decide(sup_ratio.is_finite(), || "non-finite sup norm".into());
    vec![decay, energy, sup]
}

/// Slack of the discrete energy identity under dt halving, and Ĉ = max
/// E_θ(t)/E_θ(0) for both runs.
pub fn check_energy(cfg: &VerifyConfig) -> Result<CheckResult> {
    let grid = cfg.grid()?;
    let f0 = prepared_field(&grid, cfg.seed ^ 0x81, cfg.theta, 0.01)?;
    let opts = RunOptions { theta: cfg.theta, dissipation: true };
    let mut out = vec![];
    for dt in [cfg.energy_dt, 0.5 * cfg.energy_dt] {
        let st = StepperConfig { dt, t_end: cfg.energy_t_end, cadence: usize::MAX, restore_moments: false, ..Default::default() };
        let tr = linear_run(cfg, &f0, &st, &opts)?;
        let e0 = tr.records[0].energy_theta;
        let c_hat = tr.records.iter().map(|r| r.energy_theta / e0).fold(0.0, f64::max);
        out.push((energy_slack(&tr)?, c_hat));
    }
    let ratio = out[0].0 / out[1].0;
    let c_ratio = out[0].1.max(out[1].1) / out[0].1.min(out[1].1);
    let c = CheckResult::new("energy_slack", "½‖f(t)‖²_θ + ∫⟨w^{2θ}Lf, f⟩ = ½‖f₀‖²_θ", 1.8)
        .set("slack_dt", out[0].0)
        .set("slack_dt_half", out[1].0)
        .set("slack_ratio", ratio)
        .set("c_hat_dt", out[0].1)
        .set("c_hat_dt_half", out[1].1)
        .set("c_hat_ratio", c_ratio);
    Ok(c.decide(ratio >= 1.8 && c_ratio <= 2.0, || format!("slack ratio {ratio:.3}, Ĉ ratio {c_ratio:.3}")))
}

// ---- nonlinear bounds ---------------------------------------------------

fn trilinear_ratios(cfg: &VerifyConfig, nv: usize, draws: &[[SmoothSample; 3]]) -> Result<(f64, f64)> {
    let grid = PhaseGrid::new(cfg.nx.min(4), nv, cfg.rv, 1)?;
    let bg = Background::new(&grid);
    let ctx = OperatorContext::linearized(bg.clone(), &grid, 0.0, cfg.form)?;
    let (th, tb) = (cfg.theta, cfg.theta_bar);
    let (w, wb) = (crate::phase_space::weight(&grid, 2.0 * th).data, crate::phase_space::weight(&grid, 2.0 * tb).data);
    let nv3 = grid.n_v();
    let (mut r1, mut r2): (f64, f64) = (0.0, 0.0);
    for d in draws {
        let [g1, g2, g3] = [d[0].field(&grid), d[1].field(&grid), d[2].field(&grid)];
        let gam = ctx.apply_Gamma(&g1, &g2)?;
        let pair = |wt: &[f64]| -> f64 {
            gam.data.iter().zip(&g3.data).enumerate().map(|(i, (a, b))| wt[i % nv3] * a * b).sum::<f64>()
                * grid.dv3()
                * grid.dx_vol()
        };
        let n1 = g1.max_abs() * norms::norm_sigma_weighted(&bg, &g2, th)? * norms::norm_sigma_weighted(&bg, &g3, th)?;
        let m1 = norms::norm_l2_weighted(&g1, tb).min(norms::norm_sigma_weighted(&bg, &g1, tb)?);
        let n2 = m1 * (g2.max_abs() + norms::norm_grad_sup_weighted(&g2, 0.0)) * norms::norm_sigma_weighted(&bg, &g3, tb)?;
        if n1 > 0.0 {
            r1 = r1.max(pair(&w).abs() / n1);
        }
        if n2 > 0.0 {
            r2 = r2.max(pair(&wb).abs() / n2);
        }
    }
    Ok((r1, r2))
}

/// Sup of the two trilinear ratios for Γ over random triples, at two grids.
pub fn check_nonlinear_bounds(cfg: &VerifyConfig, nv_a: usize, nv_b: usize) -> Result<CheckResult> {
    let mut r = rng(cfg.seed ^ 0x91);
    let n = (cfg.samples / 10).max(3);
    let draws: Vec<[SmoothSample; 3]> =
        (0..n).map(|_| std::array::from_fn(|_| SmoothSample::draw(&mut r, 6, 2.0, 0.5, 1))).collect();
    let (a1, a2) = trilinear_ratios(cfg, nv_a, &draws)?;
    let (b1, b2) = trilinear_ratios(cfg, nv_b, &draws)?;
    // homogeneity of the first ratio under (g₁, g₂, g₃) → (2g₁, 3g₂, 5g₃)
    let grid = PhaseGrid::new(cfg.nx.min(4), nv_a, cfg.rv, 1)?;
    let bg = Background::new(&grid);
    let ctx = OperatorContext::linearized(bg.clone(), &grid, 0.0, cfg.form)?;
    let [g1, g2, g3] = [draws[0][0].field(&grid), draws[0][1].field(&grid), draws[0][2].field(&grid)];
    let ratio = |a: &Field, b: &Field, c: &Field| -> Result<f64> {
        let num = ctx.apply_Gamma(a, b)?.dot(c).abs();
        Ok(num / (a.max_abs() * norms::norm_sigma_weighted(&bg, b, 0.0)? * norms::norm_sigma_weighted(&bg, c, 0.0)?))
    };
    let base = ratio(&g1, &g2, &g3)?;
    let scaled = ratio(&g1.scale(2.0), &g2.scale(3.0), &g3.scale(5.0))?;
    let homog = (scaled - base).abs() / base;
    let change = |a: f64, b: f64| a.max(b) / a.min(b);
    let c = CheckResult::new("nonlinear_bounds", "trilinear bounds on ⟨w^{2θ}Γ[g₁, g₂], g₃⟩", 2.0)
        .set("ratio1_coarse", a1)
        .set("ratio1_fine", b1)
        .set("ratio2_coarse", a2)
        .set("ratio2_fine", b2)
        .set("homogeneity_error", homog);
    let ok = [a1, a2, b1, b2].iter().all(|x| x.is_finite()) && change(a1, b1) <= 2.0 && change(a2, b2) <= 2.0 && homog <= 1e-10;
    Ok(c.decide(ok, || format!("ratio changes {:.3}, {:.3}; homogeneity {homog:.2e}", change(a1, b1), change(a2, b2))))
}

// ---- Picard and positivity ----------------------------------------------

pub fn picard_run(cfg: &VerifyConfig) -> Result<(Field, PicardResult)> {
    let grid = cfg.grid()?;
    let bg = Background::new(&grid);
    let f0 = positive_initial_data(&grid, cfg.seed ^ 0xa1, cfg.theta, cfg.epsilon0)?;
    let st = StepperConfig { dt: cfg.picard_dt, t_end: cfg.picard_t_end, ..Default::default() };
    let r = picard_solve(bg, &f0, &st, &cfg.picard_config())?;
    Ok((f0, r))
}

/// Well-prepared data with F₀ = μ + √μ f₀ ≥ 0 and ‖f₀‖_{∞,θ} = ε₀.
pub fn positive_initial_data(grid: &PhaseGrid, seed: u64, theta: f64, eps0: f64) -> Result<Field> {
    prepared_field(grid, seed, theta, eps0)
}

pub fn picard_checks(cfg: &VerifyConfig) -> Result<(CheckResult, CheckResult)> {
    let (_, r) = picard_run(cfg)?;
    Ok((picard_check(&r), positivity_along(&r.trajectory)))
}

/// Deltas decrease from n = 2, reach tol within 10 iterations, and
/// log δₙ is concave from n = 2 (up to 0.1 in the second difference).
pub fn picard_check(r: &PicardResult) -> CheckResult {
    let d: Vec<f64> = r.records.iter().map(|x| x.delta_sup).collect();
    let mut c = CheckResult::new("picard", "(Ct)ⁿ/n! contraction of the iteration", r.tol)
        .set("iterations", d.len() as f64)
        .set("tol", r.tol);
    for (k, x) in d.iter().enumerate() {
        c = c.set(&format!("delta_{:02}", k + 1), *x);
    }
    let monotone = d.windows(2).skip(1).all(|w| w[1] <= w[0]);
    let hit = d.iter().take(10).position(|&x| x <= r.tol);
    let floor = d.first().copied().unwrap_or(0.0) * 1e-13;
    // δ₁ measures the distance from the constant initial guess, not a
    // contraction step, so the shape is read from n = 2 like monotonicity.
    let logs: Vec<f64> = d.iter().skip(1).take_while(|&&x| x > floor && x > 0.0).map(|x| x.ln()).collect();
    let second: Vec<f64> = logs.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).collect();
    let concave = second.iter().all(|&s| s <= 0.1);
    c = c.set("max_second_difference", second.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let ok = r.converged && monotone && hit.is_some() && concave;
    c.decide(ok, || format!("converged {}, monotone {monotone}, within 10 {}, concave {concave}", r.converged, hit.is_some()))
}

pub fn positivity_along(tr: &Trajectory) -> CheckResult {
    let mut c = CheckResult::new("positivity", "F = μ + √μ f stays nonnegative", 1e-9);
    let mut worst = f64::INFINITY;
    let mut witness = String::new();
    for (t, f) in tr.times.iter().zip(&tr.snapshots) {
        let p = crate::evolution::positivity_check(f);
        let rel = p.min_f / p.max_f;
        if rel < worst {
            worst = rel;
            witness = format!("t = {t}, x-node {}, v-node {}", p.witness.0, p.witness.1);
        }
    }
    c = c.set("min_f_over_max_f", worst);
    c.decide(worst >= -1e-9, || witness)
}

// ---- geometry -----------------------------------------------------------

pub fn suite_geometry(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    let mut r = rng(cfg.seed ^ 0xb1);
    let (mut res, mut scal): (f64, f64) = (0.0, 0.0);
    for _ in 0..500 {
        let z = Point::new(r.gen_range(-2.0..2.0), std::array::from_fn(|_| r.gen_range(-2.0..2.0)), std::array::from_fn(|_| r.gen_range(-2.0..2.0)));
        res = res.max(geometry::kinetic_distance_residual(&z));
        let d = geometry::kinetic_distance(&z);
        for s in [0.5, 2.0, 10.0] {
            let zs = Point::new(s * s * z.t, z.x.map(|c| s * s * s * c), z.v.map(|c| s * c));
            scal = scal.max((geometry::kinetic_distance(&zs) - s * d).abs() / (s * d));
        }
    }
    let dist = CheckResult::new("kinetic_distance", "ρ solves t²/ρ⁴ + |x|²/ρ⁶ + |v|²/ρ² = 1", 1e-12)
        .set("max_residual", res)
        .decide(res <= 1e-12, || format!("residual {res:.3e}"));
    let scaling = CheckResult::new("kinetic_scaling", "|||(r²t, r³x, rv)||| = r |||(t, x, v)|||", 1e-10)
        .set("max_rel_error", scal)
        .decide(scal <= 1e-10, || format!("relative error {scal:.3e}"));
    let n = cfg.frame_n;
    let dir = {
        let u: [f64; 3] = std::array::from_fn(|_| r.gen_range(-1.0..1.0));
        let l = norm3(u);
        u.map(|c| c / l)
    };
    let center = Point::new(0.5, [0.3, -0.2, 0.1], dir.map(|c| c * n));
    let fc = FrameChange::new(center, cfg.frame_m)?;
    let rep = geometry::check_containments(&fc, 500, &mut r)?;
    let frame = CheckResult::new("change_of_variables", "frame change maps Q_{r₀} into Q_{r₁} and back into Q_{128 r₂}", 0.0)
        .set("forward_violations", rep.forward_violations as f64)
        .set("backward_violations", rep.backward_violations as f64)
        .set("orthonormality_defect", fc.orthonormality_defect())
        .set("r0", rep.r0)
        .set("r1", rep.r1)
        .set("r2", rep.r2)
        .decide(rep.forward_violations == 0 && rep.backward_violations == 0 && fc.orthonormality_defect() <= 1e-12, || {
            format!("{} forward, {} backward violations", rep.forward_violations, rep.backward_violations)
        });
    Ok(vec![dist, scaling, frame])
}

/// Oscillation decay and the sampled Hölder seminorm of a drift–diffusion
/// run (reported, not asserted beyond finiteness).
pub fn check_regularity(cfg: &VerifyConfig) -> Result<CheckResult> {
    let grid = cfg.grid()?;
    let bg = Background::new(&grid);
    let mut r = rng(cfg.seed ^ 0xc1);
    let g = smooth_field(&grid, &mut r, 0.5, 2, 0.5 * cfg.epsilon);
    let h0 = smooth_field(&grid, &mut r, 0.2, 2, 1.0);
    let ctx = OperatorContext::new(bg, &g, 0.0, cfg.form)?;
    let run = DriftDiffusion::new(&ctx, &StepperConfig { dt: 0.05, t_end: 1.0, ..Default::default() })?.run(&h0)?;
    let center = Point::new(1.0, [0.0; 3], [0.0; 3]);
    let big = geometry::KineticCylinder::on_torus(center, 1.0)?;
    let small = geometry::KineticCylinder::on_torus(center, 0.125 * 0.5)?;
    let (ob, os) = (geometry::oscillation(&run, &big)?, geometry::oscillation(&run, &small).unwrap_or(0.0));
    let hold = geometry::holder_seminorm(&run, cfg.holder_alpha, 2000, &mut r)?;
    let hold3 = geometry::holder_seminorm(&run, 3.0 * cfg.holder_alpha, 2000, &mut rng(cfg.seed ^ 0xc2))?;
    Ok(CheckResult::new("regularity", "oscillation decay and Hölder continuity", f64::INFINITY)
        .set("osc_big", ob)
        .set("osc_small", os)
        .set("holder_alpha", hold.sup)
        .set("holder_3alpha", hold3.sup)
        .decide(os <= ob && hold.sup.is_finite(), || "oscillation grew on the smaller cylinder".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> VerifyConfig {
        VerifyConfig { nx: 4, nv: 12, samples: 10, max_principle_runs: 2, ..VerifyConfig::default() }
    }

    #[test]
    fn slope_fit_is_exact_on_lines() {
        let x = [0.0, 1.0, 2.0, 5.0];
        let y: Vec<f64> = x.iter().map(|t| 3.0 - 0.5 * t).collect();
        assert!((fit_slope(&x, &y) + 0.5).abs() < 1e-14);
    }

    #[test]
    fn coarse_grid_fails_minus_8pi() {
        let c = check_minus_8pi(5.5, 8).unwrap();
        assert_eq!(c.status, Status::Fail);
        assert!(c.get("rel_error_0") > 0.02);
        assert!(c.witness.is_some());
    }

    #[test]
    fn identities_pass_on_a_small_grid() {
        let cfg = small();
        for c in [check_rearrangement(&cfg).unwrap(), check_k1(&cfg).unwrap(), check_conjugation(&cfg).unwrap()] {
            assert_eq!(c.status, Status::Pass, "{c:?}");
        }
    }

    #[test]
    fn large_g_is_not_applicable() {
        let cfg = small();
        let g = smooth_field(&cfg.grid().unwrap(), &mut rng(1), 0.5, 1, 10.0 * cfg.epsilon);
        assert_eq!(check_sigma_g_for(&cfg, &g).unwrap().status, Status::NotApplicable);
    }

    #[test]
    fn zero_trajectory_decays_trivially() {
        let g = PhaseGrid::new(2, 6, 5.5, 1).unwrap();
        let tr = linear_run(
            &small(),
            &Field::zeros(&g),
            &StepperConfig { dt: 0.5, t_end: 2.0, ..Default::default() },
            &RunOptions::default(),
        )
        .unwrap();
        assert!(decay_checks(&tr, 2.0).iter().all(|c| c.passed()));
    }

    #[test]
    fn geometry_suite_passes() {
        assert!(suite_geometry(&small()).unwrap().iter().all(|c| c.status == Status::Pass));
    }

    #[test]
    fn checks_are_reproducible() {
        let cfg = small();
        assert_eq!(check_coercivity(&cfg, 8, 12).unwrap(), check_coercivity(&cfg, 8, 12).unwrap());
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(run_suite("nope", &small()).is_err());
    }
}
