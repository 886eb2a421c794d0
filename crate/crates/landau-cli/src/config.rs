//! Run configuration: a TOML file with one table per block. Unknown keys
//! are rejected and every block is re-validated by its owning module.

use anyhow::{bail, Context, Result};
use landau::evolution::StepperConfig;
use landau::operators::VelocityForm;
use landau::phase_space::{PhaseGrid, DEFAULT_RV};
use landau::picard::PicardConfig;
use landau::verify::VerifyConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridBlock {
    pub nx: usize,
    pub nv: usize,
    pub rv: f64,
    pub dim_x: usize,
}

impl Default for GridBlock {
    fn default() -> Self {
        Self { nx: 16, nv: 24, rv: DEFAULT_RV, dim_x: 1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Linearized equation around the Maxwellian (g = 0).
    #[default]
    Linear,
    /// Full perturbation equation via the Picard iteration.
    Nonlinear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsBlock {
    pub mode: Mode,
    pub theta: f64,
    pub theta_bar: f64,
    pub epsilon: f64,
    pub epsilon0: f64,
    /// Scaling exponent of the change of variables.
    pub m: f64,
    pub form: VelocityForm,
}

impl Default for PhysicsBlock {
    fn default() -> Self {
        Self { mode: Mode::Linear, theta: 0.0, theta_bar: -2.0, epsilon: 0.1, epsilon0: 1e-2, m: 10.0, form: VelocityForm::Conservative }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PicardBlock {
    pub tol: Option<f64>,
    pub max_iter: usize,
}

impl Default for PicardBlock {
    fn default() -> Self {
        let d = PicardConfig::default();
        Self { tol: d.tol, max_iter: d.max_iter }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    Zero,
    /// Seeded smooth field with zero local moments.
    #[default]
    Prepared,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialBlock {
    pub kind: InitialKind,
    /// ‖f₀‖_{∞,θ}.
    pub amplitude: f64,
}

impl Default for InitialBlock {
    fn default() -> Self {
        Self { kind: InitialKind::Prepared, amplitude: 1e-2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyBlock {
    pub samples: usize,
    pub max_principle_runs: usize,
    pub conservation_steps: usize,
    pub conservation_dt: f64,
    pub decay_t_end: f64,
    pub decay_dt: f64,
    pub energy_t_end: f64,
    pub energy_dt: f64,
    pub frame_n: f64,
}

impl Default for VerifyBlock {
    fn default() -> Self {
        let d = VerifyConfig::default();
        Self {
            samples: d.samples,
            max_principle_runs: d.max_principle_runs,
            conservation_steps: d.conservation_steps,
            conservation_dt: d.conservation_dt,
            decay_t_end: d.decay_t_end,
            decay_dt: d.decay_dt,
            energy_t_end: d.energy_t_end,
            energy_dt: d.energy_dt,
            frame_n: d.frame_n,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub dir: PathBuf,
    pub checkpoints: bool,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), checkpoints: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub grid: GridBlock,
    pub stepper: StepperConfig,
    pub physics: PhysicsBlock,
    pub picard: PicardBlock,
    pub initial: InitialBlock,
    pub verify: VerifyBlock,
    pub output: OutputBlock,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: VerifyConfig::default().seed,
            grid: GridBlock::default(),
            stepper: StepperConfig::default(),
            physics: PhysicsBlock::default(),
            picard: PicardBlock::default(),
            initial: InitialBlock::default(),
            verify: VerifyBlock::default(),
            output: OutputBlock::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let cfg = Self::parse(&text).with_context(|| format!("in config {}", path.display()))?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        self.stepper.validate().context("[stepper]")?;
        self.picard_config().validate().context("[picard]")?;
        let p = &self.physics;
        if !(p.epsilon > 0.0) || !(p.epsilon0 > 0.0) {
            bail!("[physics] epsilon and epsilon0 must be positive");
        }
        if !(p.m > 0.0) {
            bail!("[physics] m must be positive");
        }
        if !(self.initial.amplitude >= 0.0) || !self.initial.amplitude.is_finite() {
            bail!("[initial] amplitude must be finite and nonnegative");
        }
        if p.mode == Mode::Nonlinear && self.initial.kind == InitialKind::Prepared && self.initial.amplitude > p.epsilon0 {
            bail!("[initial] amplitude {} exceeds physics.epsilon0 = {} (smallness required for the nonlinear run)", self.initial.amplitude, p.epsilon0);
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<PhaseGrid> {
        let g = &self.grid;
        PhaseGrid::new(g.nx, g.nv, g.rv, g.dim_x).context("[grid]")
    }

    pub fn picard_config(&self) -> PicardConfig {
        let p = &self.physics;
        PicardConfig {
            tol: self.picard.tol,
            max_iter: self.picard.max_iter,
            theta: p.theta,
            theta_bar: p.theta_bar,
            epsilon0: p.epsilon0,
            form: p.form,
        }
    }

    pub fn verify_config(&self) -> VerifyConfig {
        let (g, p, v) = (&self.grid, &self.physics, &self.verify);
        VerifyConfig {
            nx: g.nx,
            nv: g.nv,
            rv: g.rv,
            dim_x: g.dim_x,
            seed: self.seed,
            theta: p.theta,
            theta_bar: p.theta_bar,
            epsilon: p.epsilon,
            epsilon0: p.epsilon0,
            form: p.form,
            samples: v.samples,
            max_principle_runs: v.max_principle_runs,
            conservation_steps: v.conservation_steps,
            conservation_dt: v.conservation_dt,
            decay_t_end: v.decay_t_end,
            decay_dt: v.decay_dt,
            energy_t_end: v.energy_t_end,
            energy_dt: v.energy_dt,
            picard: self.picard_config(),
            picard_t_end: self.stepper.t_end,
            picard_dt: self.stepper.dt,
            frame_m: p.m,
            frame_n: v.frame_n,
            ..VerifyConfig::default()
        }
    }

    /// SHA-256 of the canonical JSON form of the (validated) configuration.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("[grid]\nnx = 8\nny = 3\n").is_err());
        assert!(RunConfig::parse("colour = 1\n").is_err());
    }

    #[test]
    fn gates_are_revalidated() {
        assert!(RunConfig::parse("[stepper]\ndt = -0.1\n").is_err());
        assert!(RunConfig::parse("[grid]\nnv = 3\n").is_err());
        assert!(RunConfig::parse("[physics]\nmode = \"nonlinear\"\n[initial]\namplitude = 0.5\n").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let b = RunConfig { seed: 1, ..RunConfig::default() };
        assert_eq!(a.hash(), RunConfig::default().hash());
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
