//! Picard iteration: f⁽⁰⁾ ≡ f₀, and f⁽ⁿ⁺¹⁾ solves the linear problem with the
//! coefficients frozen at g = f⁽ⁿ⁾ (sampled at the start of every step).

use crate::error::{Error, Result};
use crate::evolution::{run_linear, LinearLandau, RunOptions, SpectralTransport, StepperConfig, Trajectory};
use crate::kernel::Background;
use crate::norms;
use crate::operators::{OperatorContext, VelocityForm};
use crate::phase_space::Field;
use crate::projection::Projection;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardConfig {
    /// Absolute tolerance; `None` means 1e−8·‖f₀‖_{2,θ̄}.
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub theta: f64,
    pub theta_bar: f64,
    pub epsilon0: f64,
    pub form: VelocityForm,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self { tol: None, max_iter: 20, theta: 0.0, theta_bar: -2.0, epsilon0: 1e-2, form: VelocityForm::Conservative }
    }
}

impl PicardConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        if self.theta_bar >= 0.0 {
            return Err(Error::InvalidParameter(format!("theta_bar = {} must be negative", self.theta_bar)));
        }
        if !(self.epsilon0 > 0.0) {
            return Err(Error::InvalidParameter("epsilon0 must be positive".into()));
        }
        if let Some(t) = self.tol {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::InvalidParameter(format!("tol = {t} must be finite and nonnegative")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub n: usize,
    /// ‖f⁽ⁿ⁾(t) − f⁽ⁿ⁻¹⁾(t)‖_{2,θ̄} at every step time.
    pub delta_l2: Vec<f64>,
    pub delta_sup: f64,
    pub converged: bool,
    pub theta_bar: f64,
}

#[derive(Clone, Debug)]
pub struct PicardResult {
    pub trajectory: Trajectory,
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    pub tol: f64,
}

fn deltas(a: &Trajectory, b: &[Field], theta_bar: f64) -> Vec<f64> {
    a.snapshots.iter().zip(b).map(|(x, y)| norms::norm_l2_weighted(&x.sub(y), theta_bar)).collect()
}

/// Runs the iteration. The stepper must keep every step (cadence 1), since
/// step k of the next iterate is frozen at the current iterate's f(t_k).
pub fn picard_solve(bg: Arc<Background>, f0: &Field, stepper: &StepperConfig, cfg: &PicardConfig) -> Result<PicardResult> {
    cfg.validate()?;
    let grid = f0.grid;
    let sup = norms::norm_sup_weighted(f0, cfg.theta);
    if sup > cfg.epsilon0 {
        return Err(Error::InvalidParameter(format!(
            "‖f0‖_(∞,θ) = {sup:.3e} exceeds epsilon0 = {:.3e}",
            cfg.epsilon0
        )));
    }
    let report = verify_initial_data(&bg, f0, cfg.theta)?;
    if !report.conservation_ok {
        return Err(Error::InvalidParameter(format!(
            "initial data violates the conservation laws: moments {:?}",
            report.moments
        )));
    }
    let st = LinearLandau::new(bg.clone(), &grid, &StepperConfig { cadence: 1, ..stepper.clone() })?;
    let tol = cfg.tol.unwrap_or(1e-8 * norms::norm_l2_weighted(f0, cfg.theta_bar));
    let opts = RunOptions { theta: cfg.theta, dissipation: false };
    let n_steps = st.cfg.steps();

    let mut prev: Vec<Field> = vec![f0.clone(); n_steps + 1];
    let mut records: Vec<IterationRecord> = Vec::new();
    let mut rising = 0;
    for n in 1..=cfg.max_iter {
        let traj = run_linear(&st, f0, &opts, |k| {
            Ok(Arc::new(OperatorContext::new(bg.clone(), &prev[k], cfg.theta, cfg.form)?))
        })?;
        let d = deltas(&traj, &prev, cfg.theta_bar);
        let delta_sup = d.iter().copied().fold(0.0, f64::max);
        let converged = delta_sup <= tol;
        if let Some(last) = records.last() {
            rising = if delta_sup > last.delta_sup { rising + 1 } else { 0 };
        }
        records.push(IterationRecord { n, delta_l2: d, delta_sup, converged, theta_bar: cfg.theta_bar });
        if converged {
            return Ok(PicardResult { trajectory: traj, records, converged: true, tol });
        }
        if rising >= 3 {
            return Err(Error::NonContraction { n });
        }
        prev = traj.snapshots.clone();
        if n == cfg.max_iter {
            return Ok(PicardResult { trajectory: traj, records, converged: false, tol });
        }
    }
    unreachable!("max_iter is positive")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InitialDataReport {
    /// ∬f√μ, ∬v f√μ, ∬|v|²f√μ.
    pub moments: [f64; 5],
    pub conservation_ok: bool,
    pub sup_theta: f64,
    pub grad_sup_theta: f64,
    /// ‖−v·∇_x f₀ + Ā_{f₀}f₀‖_{∞,θ}.
    pub f0t_sup_theta: f64,
    pub finite: bool,
}

pub fn verify_initial_data(bg: &Arc<Background>, f0: &Field, theta: f64) -> Result<InitialDataReport> {
    let grid = f0.grid;
    let moments = Projection::new(&grid)?.moments(f0)?;
    let scale = norms::norm_l2_weighted(f0, 0.0);
    let conservation_ok = moments.iter().all(|m| m.abs() <= 1e-10 * scale.max(f64::MIN_POSITIVE));
    let ctx = OperatorContext::new(bg.clone(), f0, theta, VelocityForm::Conservative)?;
    let f0t = ctx.apply_Abar(f0)?.sub(&SpectralTransport::new(&grid).advection(f0)?);
    let sup_theta = norms::norm_sup_weighted(f0, theta);
    let grad_sup_theta = norms::norm_grad_sup_weighted(f0, theta);
    let f0t_sup_theta = norms::norm_sup_weighted(&f0t, theta);
    Ok(InitialDataReport {
        moments,
        conservation_ok,
        sup_theta,
        grad_sup_theta,
        f0t_sup_theta,
        finite: sup_theta.is_finite() && grad_sup_theta.is_finite() && f0t_sup_theta.is_finite(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{lift, PhaseGrid};
    use crate::random::{rng, smooth_field};

    fn setup() -> (PhaseGrid, Arc<Background>) {
        let g = PhaseGrid::new(4, 8, 5.5, 1).unwrap();
        (g, Background::new(&g))
    }

    fn prepared(g: &PhaseGrid, seed: u64, sup: f64) -> Field {
        let f = smooth_field(g, &mut rng(seed), 0.6, 1, 1.0);
        let f = Projection::new(g).unwrap().apply_IminusP(&f).unwrap();
        f.scale(sup / f.max_abs())
    }

    #[test]
    fn zero_data_converges_at_once() {
        let (g, bg) = setup();
        let st = StepperConfig { dt: 0.05, t_end: 0.2, ..StepperConfig::default() };
        let r = picard_solve(bg, &Field::zeros(&g), &st, &PicardConfig::default()).unwrap();
        assert!(r.converged);
        assert_eq!(r.records.len(), 1);
        assert!(r.trajectory.snapshots.iter().all(|f| f.max_abs() == 0.0));
    }

    #[test]
    fn small_data_contracts() {
        let (g, bg) = setup();
        let st = StepperConfig { dt: 0.05, t_end: 0.2, ..StepperConfig::default() };
        let f0 = prepared(&g, 3, 5e-3);
        let r = picard_solve(bg.clone(), &f0, &st, &PicardConfig::default()).unwrap();
        assert!(r.converged);
        let d: Vec<f64> = r.records.iter().map(|x| x.delta_sup).collect();
        assert!(d.windows(2).skip(1).all(|w| w[1] <= w[0]), "{d:?}");
        // the frozen-at-step-start iteration is exact after as many sweeps as steps
        assert!(r.records.len() <= st.steps() + 1);
        let half = picard_solve(bg, &f0.scale(0.5), &st, &PicardConfig::default()).unwrap();
        assert!(half.records.len() <= r.records.len());
    }

    #[test]
    fn rejects_large_or_nonconserving_data() {
        let (g, bg) = setup();
        let st = StepperConfig { dt: 0.05, t_end: 0.1, ..StepperConfig::default() };
        assert!(picard_solve(bg.clone(), &prepared(&g, 4, 0.5), &st, &PicardConfig::default()).is_err());
        let c = lift(&g, |_, v| 1e-3 * (-0.5 * crate::phase_space::dot3(v, v)).exp());
        assert!(picard_solve(bg, &c, &st, &PicardConfig::default()).is_err());
    }

    #[test]
    fn initial_data_examples() {
        let (g, bg) = setup();
        let z = verify_initial_data(&bg, &Field::zeros(&g), 1.0).unwrap();
        assert!(z.conservation_ok && z.sup_theta == 0.0 && z.f0t_sup_theta == 0.0);
        let c = lift(&g, |_, v| 0.1 * (-0.5 * crate::phase_space::dot3(v, v)).exp());
        assert!(!verify_initial_data(&bg, &c, 0.0).unwrap().conservation_ok);
        let s = lift(&g, |x, v| 0.01 * x[0].sin() * v[0] * (-crate::phase_space::dot3(v, v)).exp());
        let r = verify_initial_data(&bg, &s, 0.0).unwrap();
        assert!(r.conservation_ok && r.finite);
    }
}
