//! Command-line front end: parses configs and paths, drives the engine and writes CSV/JSON
//! artifacts together with a run manifest.
//!
//! Every command writes into `--out DIR` (created if missing), which afterwards holds exactly
//! one `manifest.json` plus the artifacts it lists.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::apps::{
    cnoidal_period_report, cnoidal_wave, hill_along, hill_period_smallest, kdv_frozen_u_control,
    kdv_wavevector_report, lame_two_gap_along, lame_two_gap_config, neumann_lame_example,
    weierstrass_flow, write_wave_csv, Lattice, WeierstrassData, WAVE_GRID,
};
use crate::comb::{
    comb_for_config, comb_frozen_u_control, comb_invariance_check, theta_trace, write_theta_csv,
};
use crate::error::Error;
use crate::hypercurve::{ensure_valid, BranchConfig};
use crate::isoflow::{
    hill_check, hill_period_from_first, integrate_flow, verify_identities, DeformationState,
    FlowMode, FlowOptions, RationalSystem, Snapshot, Trajectory,
};
use crate::periodics::{curve_periods, laurent_check, w_table, wavevector_u, CanonicalBasis};
use crate::scalar::{cser, Cx};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INPUT: i32 = 2;
    pub const VALIDATION: i32 = 3;
    pub const SINGULAR: i32 = 4;
    pub const DRIFT: i32 = 5;
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Engine(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => exit::INPUT,
            CliError::Engine(e) => match e {
                Error::InvalidInput(_) => exit::INPUT,
                Error::DegenerateConfig(_) | Error::OrderingViolation(_) => exit::VALIDATION,
                Error::DriftExceeded { .. } => exit::DRIFT,
                _ => exit::SINGULAR,
            },
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "isoperiodic",
    version,
    about = "Periods and isoperiodic deformations of hyperelliptic curves"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Periods, Riemann matrix, Ω and W constants of one curve.
    Periods(PeriodsArgs),
    /// Integrate an isoperiodic deformation along a polyline in x-space.
    Deform(DeformArgs),
    /// Check identities of a curve, or isoperiodicity of a stored trajectory.
    Verify(VerifyArgs),
    /// Comb region of a real curve, or comb invariance along a stored trajectory.
    Comb(CombArgs),
    /// Canned runs.
    Examples(ExamplesArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Relative tolerance of the period quadrature.
    #[arg(long, default_value_t = 1e-12)]
    pub tol_quad: f64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PeriodsArgs {
    /// JSON file {"x": [...], "u": [...], "alpha": [...]}; entries are numbers or [re, im].
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct DeformArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Polyline of x-vectors (excluding the start), inline JSON or a file holding it.
    #[arg(long)]
    pub path: String,
    #[arg(long, value_enum, default_value_t = FlowMode::PeriodImplicit)]
    pub mode: FlowMode,
    /// Drift bound enforced during the flow; defaults to 1e−7 with correction, 1e−5 without.
    #[arg(long)]
    pub tol_flow: Option<f64>,
    /// Newton projection after every accepted step (implicit mode).
    #[arg(long, overrides_with = "no_correct")]
    pub correct: bool,
    #[arg(long, overrides_with = "correct")]
    pub no_correct: bool,
    /// Use the hard-coded genus-2 system in rational mode.
    #[arg(long)]
    pub genus2_closed: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(
        long,
        conflicts_with = "trajectory",
        required_unless_present = "trajectory"
    )]
    pub config: Option<PathBuf>,
    /// `trajectory.json` written by `deform`.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    /// Hill period T as "re" or "re,im"; defaults to 2πi/β₁.
    #[arg(long)]
    pub period: Option<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CombArgs {
    #[arg(
        long,
        conflicts_with = "trajectory",
        required_unless_present = "trajectory"
    )]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
    /// Bound on the drift of the base marks q along a trajectory.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Example {
    Genus1Reference,
    LameOneGap,
    LameTwoGap,
    NeumannN2,
    CombG1,
}

#[derive(Debug, Args)]
pub struct ExamplesArgs {
    #[arg(value_enum)]
    pub name: Example,
    #[command(flatten)]
    pub common: Common,
}

/// Input curve description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(with = "cser::vec")]
    pub x: Vec<Cx<f64>>,
    #[serde(with = "cser::vec")]
    pub u: Vec<Cx<f64>>,
    /// a-periods of Ω; zeros when omitted.
    #[serde(default, with = "cser::vec")]
    pub alpha: Vec<Cx<f64>>,
}

impl RunConfig {
    pub fn branch_config(&self) -> BranchConfig<f64> {
        BranchConfig::new(self.x.clone(), self.u.clone())
    }

    pub fn alpha(&self) -> Vec<Cx<f64>> {
        if self.alpha.is_empty() {
            vec![Cx::new(0.0, 0.0); self.x.len()]
        } else {
            self.alpha.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestTolerances {
    pub quad: f64,
    pub flow: Option<f64>,
    pub rk_rtol: f64,
    pub rk_atol: f64,
}

/// Provenance of one run; re-running `argv` reproduces the listed outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub config: Option<String>,
    pub tolerances: ManifestTolerances,
    pub mode: Option<FlowMode>,
    pub path: Option<Value>,
    pub outputs: Vec<String>,
    pub engine_version: String,
    pub wall_clock_seconds: f64,
}

/// Sidecar of `deform`: enough to re-check the run without re-integrating.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectoryFile {
    pub state: DeformationState<f64>,
    pub options: FlowOptions,
    pub trajectory: Trajectory<f64>,
    pub max_drift: f64,
    pub max_im_u: f64,
    pub max_du_consistency: Option<f64>,
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

pub fn load_config(path: &Path) -> CliResult<RunConfig> {
    let text = read_text(path)?;
    let cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: malformed config: {e}", path.display())))?;
    if !cfg.alpha.is_empty() && cfg.alpha.len() != cfg.x.len() {
        return Err(CliError::Input(format!(
            "alpha has {} entries, expected {}",
            cfg.alpha.len(),
            cfg.x.len()
        )));
    }
    ensure_valid(&cfg.branch_config(), false)?;
    Ok(cfg)
}

/// A polyline given inline or as a file; vertices are lists of numbers or [re, im] pairs.
pub fn parse_path(spec: &str) -> CliResult<(Vec<Vec<Cx<f64>>>, Value)> {
    let text = if Path::new(spec).is_file() {
        read_text(Path::new(spec))?
    } else {
        spec.to_string()
    };
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("malformed path: {e}")))?;
    #[derive(Deserialize)]
    struct Vertex(#[serde(with = "cser::vec")] Vec<Cx<f64>>);
    let vs: Vec<Vertex> = serde_json::from_value(value.clone())
        .map_err(|e| CliError::Input(format!("path must be a list of x-vectors: {e}")))?;
    Ok((vs.into_iter().map(|v| v.0).collect(), value))
}

fn parse_complex(s: &str) -> CliResult<Cx<f64>> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| {
        p.parse::<f64>()
            .map_err(|e| CliError::Input(format!("bad number '{p}': {e}")))
    };
    match parts.as_slice() {
        [re] => Ok(Cx::new(num(re)?, 0.0)),
        [re, im] => Ok(Cx::new(num(re)?, num(im)?)),
        _ => Err(CliError::Input(format!(
            "expected 're' or 're,im', got '{s}'"
        ))),
    }
}

struct OutDir {
    dir: PathBuf,
    outputs: Vec<String>,
}

impl OutDir {
    fn new(dir: &Path) -> CliResult<Self> {
        fs::create_dir_all(dir)
            .map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    fn file(&mut self, name: &str) -> CliResult<fs::File> {
        self.outputs.push(name.to_string());
        let p = self.dir.join(name);
        fs::File::create(&p)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display())))
    }

    fn json<S: Serialize>(&mut self, name: &str, value: &S) -> CliResult<()> {
        let f = self.file(name)?;
        serde_json::to_writer_pretty(f, value)
            .map_err(|e| CliError::Input(format!("cannot serialize {name}: {e}")))
    }

    fn manifest(self, mut m: RunManifest) -> CliResult<Vec<String>> {
        m.outputs = self.outputs.clone();
        let p = self.dir.join("manifest.json");
        let f = fs::File::create(&p)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display())))?;
        serde_json::to_writer_pretty(f, &m)
            .map_err(|e| CliError::Input(format!("cannot serialize manifest: {e}")))?;
        Ok(self.outputs)
    }
}

struct Ctx {
    argv: Vec<String>,
    started: Instant,
}

impl Ctx {
    fn manifest(
        &self,
        command: &str,
        config: Option<&Path>,
        tol: ManifestTolerances,
    ) -> RunManifest {
        RunManifest {
            command: command.to_string(),
            argv: self.argv.clone(),
            config: config.map(|p| p.display().to_string()),
            tolerances: tol,
            mode: None,
            path: None,
            outputs: Vec::new(),
            engine_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
        }
    }
}

fn tolerances(quad: f64, opts: Option<&FlowOptions>) -> ManifestTolerances {
    let d = FlowOptions::default();
    let o = opts.unwrap_or(&d);
    ManifestTolerances {
        quad,
        flow: o.drift_limit,
        rk_rtol: o.rtol,
        rk_atol: o.atol,
    }
}

fn cmd_periods(a: &PeriodsArgs, ctx: &Ctx) -> CliResult<String> {
    let cfg = load_config(&a.config)?;
    let tol = a.common.tol_quad;
    let curve = cfg.branch_config().curve();
    let basis = CanonicalBasis::default_for(&curve, tol)?;
    let cp = curve_periods(&curve, &basis, &cfg.alpha(), tol)?;
    let wt = w_table(&curve, &cp.pd, tol)?;
    let laurent = laurent_check(&curve, &cp.pd, &cp.omega)?;
    let mut out = OutDir::new(&a.common.out)?;
    out.json(
        "periods.json",
        &json!({
            "config": cfg,
            "periods": cp.pd,
            "omega": cp.omega,
            "wavevector_u": wavevector_u(&cp.pd),
            "w_table": wt,
            "laurent_check": laurent,
        }),
    )?;
    let max_re_b = cp
        .pd
        .riemann
        .iter()
        .flatten()
        .map(|z| z.re.abs())
        .fold(0.0, f64::max);
    out.manifest(ctx.manifest("periods", Some(&a.config), tolerances(tol, None)))?;
    Ok(format!(
        "genus {} periods written; max |Re B| = {max_re_b:.3e}",
        curve.genus
    ))
}

fn flow_options(a: &DeformArgs) -> FlowOptions {
    let base = match a.mode {
        FlowMode::PeriodImplicit => FlowOptions {
            correct: !a.no_correct,
            ..FlowOptions::default()
        },
        FlowMode::Rational => FlowOptions::rational(),
    };
    let limit = a.tol_flow.unwrap_or(if base.correct { 1e-7 } else { 1e-5 });
    let system = if a.genus2_closed {
        RationalSystem::Genus2Closed
    } else {
        RationalSystem::General
    };
    FlowOptions {
        quad_tol: a.common.tol_quad,
        drift_limit: Some(limit),
        system,
        ..base
    }
}

fn write_trajectory(
    out: &mut OutDir,
    stem: &str,
    state: &DeformationState<f64>,
    opts: &FlowOptions,
    traj: &Trajectory<f64>,
) -> CliResult<()> {
    traj.write_csv(out.file(&format!("{stem}.csv"))?)?;
    let cons = traj
        .samples
        .iter()
        .filter_map(|s| s.du_consistency)
        .reduce(f64::max);
    out.json(
        &format!("{stem}.json"),
        &TrajectoryFile {
            state: state.clone(),
            options: opts.clone(),
            trajectory: traj.clone(),
            max_drift: traj.max_drift(),
            max_im_u: traj.max_im_u(),
            max_du_consistency: cons,
        },
    )
}

fn cmd_deform(a: &DeformArgs, ctx: &Ctx) -> CliResult<String> {
    let cfg = load_config(&a.config)?;
    let (path, path_json) = parse_path(&a.path)?;
    let opts = flow_options(a);
    let state = DeformationState::new(cfg.branch_config(), cfg.alpha(), a.mode, opts.quad_tol)?;
    let traj = integrate_flow(&state, &path, &opts)?;
    let mut out = OutDir::new(&a.common.out)?;
    write_trajectory(&mut out, "trajectory", &state, &opts, &traj)?;
    let mut m = ctx.manifest(
        "deform",
        Some(&a.config),
        tolerances(opts.quad_tol, Some(&opts)),
    );
    m.mode = Some(a.mode);
    m.path = Some(path_json);
    out.manifest(m)?;
    Ok(format!(
        "{} samples; max drift {:.3e}; final u = [{}]",
        traj.samples.len(),
        traj.max_drift(),
        traj.last()
            .u
            .iter()
            .map(|z| fmt_cx(*z))
            .collect::<Vec<_>>()
            .join(", ")
    ))
}

fn load_trajectory(path: &Path) -> CliResult<TrajectoryFile> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| CliError::Input(format!("{}: malformed trajectory: {e}", path.display())))
}

fn cmd_verify(a: &VerifyArgs, ctx: &Ctx) -> CliResult<String> {
    let tol = a.common.tol_quad;
    let mut out = OutDir::new(&a.common.out)?;
    let period = a.period.as_deref().map(parse_complex).transpose()?;
    let summary;
    let config_path;
    if let Some(tp) = &a.trajectory {
        let tf = load_trajectory(tp)?;
        let st = &tf.state;
        let mut drift = 0.0_f64;
        for s in &tf.trajectory.samples {
            let snap = Snapshot::new(
                BranchConfig::new(s.x.clone(), s.u.clone()).curve(),
                &st.basis,
                &st.alpha,
                tol,
            )?;
            drift = drift.max(snap.drift(&st.beta_target).into_iter().fold(0.0, f64::max));
        }
        let t = period.unwrap_or_else(|| hill_period_from_first(&st.beta_target));
        let hill = hill_along(&tf.trajectory, &st.basis, t, tol)?;
        let alpha_zero = st.alpha.iter().all(|z| z.norm() == 0.0);
        let kdv = if alpha_zero {
            Some(kdv_wavevector_report(&tf.trajectory, &st.basis, tol)?)
        } else {
            None
        };
        out.json(
            "verify.json",
            &json!({
                "recomputed_max_drift": drift,
                "stored_max_drift": tf.max_drift,
                "max_im_u": tf.max_im_u,
                "hill_period": [t.re, t.im],
                "hill": hill,
                "wavevector": kdv,
            }),
        )?;
        summary = format!("trajectory re-checked: max drift {drift:.3e}");
        config_path = Some(tp.as_path());
    } else {
        let cp_path = a
            .config
            .as_ref()
            .expect("clap enforces config or trajectory");
        let cfg = load_config(cp_path)?;
        let curve = cfg.branch_config().curve();
        let basis = CanonicalBasis::default_for(&curve, tol)?;
        let cp = curve_periods(&curve, &basis, &cfg.alpha(), tol)?;
        let ids = verify_identities(&curve, &cp.pd, &cp.omega, tol)?;
        let t = period.unwrap_or_else(|| hill_period_from_first(&cp.omega.beta));
        let hill = if cfg.alpha().iter().all(|z| z.norm() == 0.0) {
            Some(hill_check(&curve, &cp.omega.beta, t, 1e-9))
        } else {
            None
        };
        let worst = ids
            .checks
            .iter()
            .map(|c| c.mismatch / c.scale.max(1.0))
            .fold(0.0, f64::max);
        out.json(
            "verify.json",
            &json!({ "identities": ids, "hill_period": [t.re, t.im], "hill": hill }),
        )?;
        summary = format!(
            "{} identities checked; worst scaled mismatch {worst:.3e}",
            ids.checks.len()
        );
        config_path = Some(cp_path.as_path());
    }
    out.manifest(ctx.manifest("verify", config_path, tolerances(tol, None)))?;
    Ok(summary)
}

fn cmd_comb(a: &CombArgs, ctx: &Ctx) -> CliResult<String> {
    let tol = a.common.tol_quad;
    let mut out = OutDir::new(&a.common.out)?;
    let (summary, src) = if let Some(tp) = &a.trajectory {
        let tf = load_trajectory(tp)?;
        let inv = comb_invariance_check(&tf.trajectory, &tf.state.basis, tol, a.tol)?;
        out.json("comb_invariance.json", &inv)?;
        (
            format!(
                "q drift {:.3e}; h variation {:.3e}; passed {}",
                inv.q_drift, inv.h_variation, inv.passed
            ),
            tp.as_path(),
        )
    } else {
        let cp_path = a
            .config
            .as_ref()
            .expect("clap enforces config or trajectory");
        let cfg = load_config(cp_path)?;
        let bc = cfg.branch_config();
        let curve = bc.curve();
        let basis = CanonicalBasis::default_for(&curve, tol)?;
        let region = comb_for_config(&bc, &basis, tol)?;
        let cp = curve_periods(&curve, &basis, &vec![Cx::new(0.0, 0.0); bc.genus], tol)?;
        write_theta_csv(
            &theta_trace(&curve, &cp.omega, 64, tol)?,
            out.file("theta.csv")?,
        )?;
        out.json("comb.json", &region)?;
        (
            format!("q = {:?}; h = {:?}", region.q, region.h),
            cp_path.as_path(),
        )
    };
    out.manifest(ctx.manifest("comb", Some(src), tolerances(tol, None)))?;
    Ok(summary)
}

/// Real numbers print plainly; imaginary parts below 1e−12·(1+|re|) are noise.
fn fmt_cx(z: Cx<f64>) -> String {
    if z.im.abs() <= 1e-12 * (1.0 + z.re.abs()) {
        format!("{:.12}", z.re)
    } else {
        format!("{:.12}{:+.12}i", z.re, z.im)
    }
}

fn cx_path(xs: &[f64]) -> Vec<Vec<Cx<f64>>> {
    vec![xs.iter().map(|&v| Cx::new(v, 0.0)).collect()]
}

fn cmd_examples(a: &ExamplesArgs, ctx: &Ctx) -> CliResult<String> {
    let tol = a.common.tol_quad;
    let mut out = OutDir::new(&a.common.out)?;
    let implicit = FlowOptions {
        quad_tol: tol,
        ..FlowOptions::default()
    };
    let rational = FlowOptions {
        quad_tol: tol,
        ..FlowOptions::rational()
    };
    let summary = match a.name {
        Example::Genus1Reference => {
            let st = DeformationState::new(
                BranchConfig::from_real(&[2.0], &[1.0]),
                vec![Cx::new(0.0, 0.0)],
                FlowMode::PeriodImplicit,
                tol,
            )?;
            let path = cx_path(&[2.2]);
            let ti = integrate_flow(&st, &path, &implicit)?;
            let tr = integrate_flow(&st, &path, &rational)?;
            write_trajectory(&mut out, "implicit", &st, &implicit, &ti)?;
            write_trajectory(&mut out, "rational", &st, &rational, &tr)?;
            let diff = (ti.last().u[0] - tr.last().u[0]).norm();
            out.json(
                "summary.json",
                &json!({ "implicit_drift": ti.max_drift(), "rational_drift": tr.max_drift(), "final_u_difference": diff,
                         "u_final": ti.last().u[0].re }),
            )?;
            format!(
                "u(2.2) = {:.12}; drift {:.2e} / {:.2e}; modes differ by {diff:.2e}",
                ti.last().u[0].re,
                ti.max_drift(),
                tr.max_drift()
            )
        }
        Example::LameOneGap => {
            let (rep, traj) = cnoidal_period_report(0.0, 1.0, &[2.1], &implicit)?;
            let wd = WeierstrassData::from_config(traj.last().x[0].re, traj.last().u[0].re, tol)?;
            let wave = cnoidal_wave(&Lattice::new(&wd, None), WAVE_GRID)?;
            write_wave_csv(&wave, out.file("wave.csv")?)?;
            out.json("cnoidal.json", &rep)?;
            format!(
                "2w1 drift {:.2e}; wave periodicity defect {:.2e}",
                rep.max_relative_drift, rep.max_periodicity_defect
            )
        }
        Example::LameTwoGap => {
            let traj = weierstrass_flow(0.0, 1.0, 2.1, &implicit)?;
            let rep = lame_two_gap_along(&traj, tol)?;
            let initial = lame_two_gap_config(0.0, 1.0)?;
            out.json(
                "lame_two_gap.json",
                &json!({ "initial": initial, "deformation": rep }),
            )?;
            format!(
                "genus-2 b-period drift {:.2e} along the genus-1 flow",
                rep.max_beta_drift
            )
        }
        Example::NeumannN2 => {
            let (cfg, path) = neumann_lame_example::<f64>()?;
            let st = DeformationState::new(
                cfg.clone(),
                vec![Cx::new(0.0, 0.0); 2],
                FlowMode::PeriodImplicit,
                tol,
            )?;
            let traj = integrate_flow(&st, &path, &implicit)?;
            let t = hill_period_smallest(&st.beta_target);
            let hill = hill_along(&traj, &st.basis, t, tol)?;
            let kdv = kdv_wavevector_report(&traj, &st.basis, tol)?;
            let control = kdv_frozen_u_control(&traj, &st.basis, tol)?;
            write_trajectory(&mut out, "trajectory", &st, &implicit, &traj)?;
            out.json("neumann.json", &json!({ "config": cfg, "hill": hill, "wavevector": kdv, "frozen_u_control": control }))?;
            let stays = hill.iter().all(|h| h.is_hill && h.n == hill[0].n);
            format!(
                "Hill n = {:?} kept along the flow: {stays}; U drift {:.2e} (frozen u: {:.2e})",
                hill[0].n, kdv.max_drift, control.max_drift
            )
        }
        Example::CombG1 => {
            let bc = BranchConfig::from_real(&[2.0], &[1.0]);
            let st = DeformationState::new(
                bc.clone(),
                vec![Cx::new(0.0, 0.0)],
                FlowMode::PeriodImplicit,
                tol,
            )?;
            let traj = integrate_flow(&st, &cx_path(&[2.2]), &implicit)?;
            let inv = comb_invariance_check(&traj, &st.basis, tol, 1e-6)?;
            let control = comb_frozen_u_control(&traj, &st.basis, tol, 1e-6)?;
            let curve = bc.curve();
            let cp = curve_periods(&curve, &st.basis, &[Cx::new(0.0, 0.0)], tol)?;
            write_theta_csv(
                &theta_trace(&curve, &cp.omega, 64, tol)?,
                out.file("theta.csv")?,
            )?;
            out.json("comb.json", &json!({ "initial": comb_for_config(&bc, &st.basis, tol)?, "invariance": inv, "frozen_u_control": control }))?;
            format!(
                "q drift {:.2e}, h variation {:.2e}; frozen-u q drift {:.2e}",
                inv.q_drift, inv.h_variation, control.q_drift
            )
        }
    };
    let mut m = ctx.manifest("examples", None, tolerances(tol, Some(&implicit)));
    m.path = Some(json!({ "example": a.name }));
    out.manifest(m)?;
    Ok(summary)
}

pub fn run(cli: &Cli, argv: Vec<String>) -> CliResult<String> {
    let ctx = Ctx {
        argv,
        started: Instant::now(),
    };
    match &cli.command {
        Command::Periods(a) => cmd_periods(a, &ctx),
        Command::Deform(a) => cmd_deform(a, &ctx),
        Command::Verify(a) => cmd_verify(a, &ctx),
        Command::Comb(a) => cmd_comb(a, &ctx),
        Command::Examples(a) => cmd_examples(a, &ctx),
    }
}

/// Parses `argv`, runs, prints a one-line summary or the error, and returns the exit code.
pub fn main_with_args(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::INPUT
            } else {
                exit::OK
            };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli, argv) {
        Ok(summary) => {
            println!("{summary}");
            exit::OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_error_class() {
        assert_eq!(CliError::Input("x".into()).exit_code(), exit::INPUT);
        assert_eq!(
            CliError::from(Error::DegenerateConfig("d".into())).exit_code(),
            exit::VALIDATION
        );
        assert_eq!(
            CliError::from(Error::SingularLocus("s".into())).exit_code(),
            exit::SINGULAR
        );
        assert_eq!(
            CliError::from(Error::DriftExceeded {
                drift: 1.0,
                tol: 0.1
            })
            .exit_code(),
            exit::DRIFT
        );
    }

    #[test]
    fn path_accepts_reals_and_pairs() {
        let (p, _) = parse_path("[[2.1], [[2.2, 0.1]]]").unwrap();
        assert_eq!(p, vec![vec![Cx::new(2.1, 0.0)], vec![Cx::new(2.2, 0.1)]]);
        assert!(parse_path("[2.1").is_err());
    }

    #[test]
    fn complex_flag_parsing() {
        assert_eq!(parse_complex("1.5").unwrap(), Cx::new(1.5, 0.0));
        assert_eq!(parse_complex("0, -2").unwrap(), Cx::new(0.0, -2.0));
        assert!(parse_complex("a,b,c").is_err());
    }
}
