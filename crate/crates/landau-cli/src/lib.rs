//! Driver behind the `landau` binary: simulate, verify, export.

pub mod checkpoint;
pub mod config;

use anyhow::{bail, Context, Result};
use config::{InitialKind, Mode, RunConfig};
use landau::error::Error as LandauError;
use landau::evolution::{run_linear, LinearLandau, RunOptions, StepRecord, Trajectory};
use landau::kernel::Background;
use landau::operators::OperatorContext;
use landau::phase_space::{Field, PhaseGrid};
use landau::picard::{picard_solve, IterationRecord};
use landau::verify::{self, CheckResult};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_BLOW_UP: i32 = 2;
pub const EXIT_NON_CONTRACTION: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

pub const EXPORT_FORMATS: [&str; 3] = ["full", "v-slice", "x-slice"];

/// Maps an error chain to the process exit code.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    match err.chain().find_map(|e| e.downcast_ref::<LandauError>()) {
        Some(LandauError::BlowUp { .. }) => EXIT_BLOW_UP,
        Some(LandauError::NonContraction { .. }) => EXIT_NON_CONTRACTION,
        _ => EXIT_INVALID,
    }
}

#[derive(Serialize)]
struct Provenance<'a> {
    config_hash: String,
    code_version: &'a str,
    seed: u64,
}

impl Provenance<'_> {
    fn of(cfg: &RunConfig) -> Self {
        Self { config_hash: cfg.hash(), code_version: env!("CARGO_PKG_VERSION"), seed: cfg.seed }
    }
}

#[derive(Serialize)]
struct Diagnostics<'a> {
    provenance: Provenance<'a>,
    mode: Mode,
    /// Checkpoint times.
    snapshot_times: &'a [f64],
    records: &'a [StepRecord],
    conservation_residuals: Vec<[f64; 5]>,
    picard: Option<&'a [IterationRecord]>,
    checks: Vec<CheckResult>,
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    provenance: Provenance<'a>,
    suites: Vec<String>,
    checks: &'a [CheckResult],
}

pub fn initial_data(cfg: &RunConfig, grid: &PhaseGrid) -> Result<Field> {
    Ok(match cfg.initial.kind {
        InitialKind::Zero => Field::zeros(grid),
        InitialKind::Prepared => verify::prepared_field(grid, cfg.seed, cfg.physics.theta, cfg.initial.amplitude)?,
    })
}

pub const CSV_HEADER: &str =
    "t,l2_0,l2_theta,sigma_theta,sup_theta,energy_theta,mass_residual,momentum_x_residual,momentum_y_residual,momentum_z_residual,energy_residual,min_F";

pub fn timeseries_csv(cfg: &RunConfig, records: &[StepRecord]) -> String {
    let mut s = format!("# config_sha256={}\n{CSV_HEADER}\n", cfg.hash());
    for r in records {
        let cols = [r.t, r.l2, r.l2_theta, r.sigma_theta, r.sup_theta, r.energy_theta]
            .into_iter()
            .chain(r.moment_residual)
            .chain([r.min_f]);
        let line: Vec<String> = cols.map(|x| format!("{x:.17e}")).collect();
        writeln!(s, "{}", line.join(",")).unwrap();
    }
    s
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn simulate_trajectory(cfg: &RunConfig, f0: &Field) -> Result<(Trajectory, Option<Vec<IterationRecord>>, Vec<CheckResult>)> {
    let grid = f0.grid;
    let bg = Background::new(&grid);
    let p = &cfg.physics;
    match p.mode {
        Mode::Linear => {
            let ctx = Arc::new(OperatorContext::linearized(bg.clone(), &grid, p.theta, p.form)?);
            let st = LinearLandau::new(bg, &grid, &cfg.stepper)?;
            let tr = run_linear(&st, f0, &RunOptions { theta: p.theta, dissipation: false }, |_| Ok(ctx.clone()))?;
            let checks = vec![verify::positivity_along(&tr)];
            Ok((tr, None, checks))
        }
        Mode::Nonlinear => {
            let r = picard_solve(bg, f0, &cfg.stepper, &cfg.picard_config())?;
            let checks = vec![verify::picard_check(&r), verify::positivity_along(&r.trajectory)];
            Ok((r.trajectory, Some(r.records), checks))
        }
    }
}

/// Runs the configured evolution and writes `timeseries.csv`,
/// `diagnostics.json` and (optionally) `checkpoints/step_*.bin` to `out`.
pub fn cmd_simulate(cfg: &RunConfig, out: &Path) -> Result<i32> {
    let grid = cfg.grid()?;
    let f0 = initial_data(cfg, &grid)?;
    let (mut tr, picard, checks) = simulate_trajectory(cfg, &f0)?;
    create_dir(out)?;
    if cfg.output.checkpoints {
        let dir = out.join("checkpoints");
        create_dir(&dir)?;
        for (k, (t, f)) in tr.times.iter().zip(&tr.snapshots).enumerate() {
            checkpoint::write(&dir.join(format!("step_{k:06}.bin")), f, *t)?;
        }
    }
    write_file(&out.join("timeseries.csv"), timeseries_csv(cfg, &tr.records).as_bytes())?;
    let diag = Diagnostics {
        provenance: Provenance::of(cfg),
        mode: cfg.physics.mode,
        snapshot_times: &tr.times,
        records: &tr.records,
        conservation_residuals: tr.records.iter().map(|r| r.moment_residual).collect(),
        picard: picard.as_deref(),
        checks,
    };
    write_file(&out.join("diagnostics.json"), serde_json::to_string_pretty(&diag)?.as_bytes())?;
    tr.snapshots.clear();
    Ok(EXIT_OK)
}

pub fn suite_names(suite: Option<&str>) -> Result<Vec<String>> {
    match suite {
        None | Some("all") => Ok(verify::SUITES.iter().map(|s| s.to_string()).collect()),
        Some(s) if verify::SUITES.contains(&s) => Ok(vec![s.to_string()]),
        Some(s) => bail!("unknown suite '{s}'; run with --suite list for the available suites"),
    }
}

/// Runs the selected suites (all by default), prints one line per check and
/// writes `verify.json`. Exit 0 iff no check fails.
pub fn cmd_verify(cfg: &RunConfig, suite: Option<&str>, out: &Path) -> Result<i32> {
    if suite == Some("list") {
        for s in verify::SUITES {
            println!("{s}");
        }
        return Ok(EXIT_OK);
    }
    let names = suite_names(suite)?;
    let vcfg = cfg.verify_config();
    let mut checks = Vec::new();
    for name in &names {
        checks.extend(verify::run_suite(name, &vcfg)?);
    }
    for c in &checks {
        let status = match c.status {
            verify::Status::Pass => "PASS",
            verify::Status::Fail => "FAIL",
            verify::Status::NotApplicable => "N/A ",
        };
        println!("{status} {}{}", c.name, c.witness.as_ref().map(|w| format!(" ({w})")).unwrap_or_default());
    }
    create_dir(out)?;
    let report = VerifyReport { provenance: Provenance::of(cfg), suites: names, checks: &checks };
    write_file(&out.join("verify.json"), serde_json::to_string_pretty(&report)?.as_bytes())?;
    Ok(if checks.iter().all(|c| c.passed()) { EXIT_OK } else { EXIT_CHECK_FAILED })
}

/// CSV view of a checkpoint:
/// - `full`: every value, columns ix, iv, f;
/// - `v-slice`: f at the velocity node nearest 0 for every x-node;
/// - `x-slice`: f at the first x-node for every velocity node.
pub fn export_csv(f: &Field, t: f64, format: &str) -> Result<String> {
    let g = &f.grid;
    let mut s = format!("# t={t:.17e} dim_x={} nx={} nv={} rv={:.17e}\n", g.dim_x, g.nx, g.nv, g.rv);
    match format {
        "full" => {
            s.push_str("ix,iv,f\n");
            for (ix, node) in f.nodes().enumerate() {
                for (iv, x) in node.iter().enumerate() {
                    writeln!(s, "{ix},{iv},{x:.17e}").unwrap();
                }
            }
        }
        "v-slice" => {
            let iv = (0..g.n_v())
                .min_by(|&a, &b| {
                    let (va, vb) = (g.velocity(a), g.velocity(b));
                    let n = |v: [f64; 3]| v.iter().map(|c| c * c).sum::<f64>();
                    n(va).total_cmp(&n(vb)).then(a.cmp(&b))
                })
                .unwrap();
            let v = g.velocity(iv);
            writeln!(s, "# v=({:.17e},{:.17e},{:.17e})\nix,x1,x2,x3,f", v[0], v[1], v[2]).unwrap();
            for ix in 0..g.n_x() {
                let x = g.position(ix);
                writeln!(s, "{ix},{:.17e},{:.17e},{:.17e},{:.17e}", x[0], x[1], x[2], f.node(ix)[iv]).unwrap();
            }
        }
        "x-slice" => {
            s.push_str("# ix=0\niv,v1,v2,v3,f\n");
            for (iv, x) in f.node(0).iter().enumerate() {
                let v = g.velocity(iv);
                writeln!(s, "{iv},{:.17e},{:.17e},{:.17e},{x:.17e}", v[0], v[1], v[2]).unwrap();
            }
        }
        other => bail!("unknown export format '{other}'; supported: {}", EXPORT_FORMATS.join(", ")),
    }
    Ok(s)
}

/// Reads a `full` export back into a field.
pub fn import_full_csv(text: &str) -> Result<(Field, f64)> {
    let mut lines = text.lines();
    let head = lines.next().context("empty export")?;
    let mut kv = std::collections::HashMap::new();
    for part in head.trim_start_matches('#').split_whitespace() {
        if let Some((k, v)) = part.split_once('=') {
            kv.insert(k, v);
        }
    }
    let get = |k: &str| kv.get(k).copied().with_context(|| format!("export header lacks {k}"));
    let grid = PhaseGrid::new(get("nx")?.parse()?, get("nv")?.parse()?, get("rv")?.parse()?, get("dim_x")?.parse()?)?;
    let t: f64 = get("t")?.parse()?;
    if lines.next() != Some("ix,iv,f") {
        bail!("not a full export");
    }
    let mut f = Field::zeros(&grid);
    let mut seen = 0;
    for line in lines {
        let mut cols = line.split(',');
        let (ix, iv, x): (usize, usize, f64) = (
            cols.next().context("ix")?.parse()?,
            cols.next().context("iv")?.parse()?,
            cols.next().context("f")?.parse()?,
        );
        if ix >= grid.n_x() || iv >= grid.n_v() {
            bail!("index ({ix}, {iv}) out of range");
        }
        f.node_mut(ix)[iv] = x;
        seen += 1;
    }
    if seen != grid.len() {
        bail!("export has {seen} values, grid has {}", grid.len());
    }
    Ok((f, t))
}

/// Converts a checkpoint to CSV; writes `<out>/<stem>_<format>.csv`.
pub fn cmd_export(ckpt: &Path, format: &str, out: &Path) -> Result<PathBuf> {
    if !EXPORT_FORMATS.contains(&format) {
        bail!("unknown export format '{format}'; supported: {}", EXPORT_FORMATS.join(", "));
    }
    let (f, t) = checkpoint::read(ckpt)?;
    let csv = export_csv(&f, t, format)?;
    create_dir(out)?;
    let stem = ckpt.file_stem().and_then(|s| s.to_str()).unwrap_or("checkpoint");
    let path = out.join(format!("{stem}_{format}.csv"));
    write_file(&path, csv.as_bytes())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use landau::random::{rng, smooth_field};

    #[test]
    fn full_export_round_trips_bitwise() {
        let g = PhaseGrid::new(4, 6, 5.5, 1).unwrap();
        let f = smooth_field(&g, &mut rng(9), 0.5, 1, 1.0);
        let (h, t) = import_full_csv(&export_csv(&f, 0.3, "full").unwrap()).unwrap();
        assert_eq!(t, 0.3);
        assert!(h.data.iter().zip(&f.data).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn v_slice_of_zero_field_is_zero() {
        let g = PhaseGrid::new(4, 6, 5.5, 1).unwrap();
        let s = export_csv(&Field::zeros(&g), 0.0, "v-slice").unwrap();
        let rows: Vec<&str> = s.lines().skip(3).collect();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.ends_with(",0.00000000000000000e0")));
    }

    #[test]
    fn unknown_format_lists_supported() {
        let g = PhaseGrid::new(4, 6, 5.5, 1).unwrap();
        let e = export_csv(&Field::zeros(&g), 0.0, "parquet").unwrap_err().to_string();
        assert!(e.contains("full") && e.contains("v-slice"));
    }

    #[test]
    fn exit_codes_follow_the_error() {
        let blow = anyhow::Error::new(LandauError::BlowUp { t: 1.0, sup: 2.0, limit: 1.0 });
        assert_eq!(exit_code(&blow), EXIT_BLOW_UP);
        assert_eq!(exit_code(&anyhow::Error::new(LandauError::NonContraction { n: 4 })), EXIT_NON_CONTRACTION);
        assert_eq!(exit_code(&anyhow::anyhow!("io")), EXIT_INVALID);
        assert_eq!(exit_code(&blow.context("while stepping")), EXIT_BLOW_UP);
    }
}
