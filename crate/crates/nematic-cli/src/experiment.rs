//! Experiment orchestration: translate a resolved configuration into library
//! calls and write the run artifacts (`run.json`, diagnostics CSVs, binary
//! snapshots, vortex trajectories).
//!
//! Everything written here is deterministic in (config, seed): fixed
//! iteration orders, fixed float formatting, no clocks or process state.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use nematic::closure::{run_closure, ClosureConfig, ClosureFlow, ClosureTrajectory};
use nematic::grid::{multi_vortex_field, ComplexField, Grid2D, RealField};
use nematic::kinetic::{run_kinetic, KineticConfig, KineticTrajectory, MomentState, Truncation};
use nematic::snapshot::{fmt_e, read_snapshot, write_snapshot};
use nematic::specfun::make_params;
use nematic::vortex::{
    run_vortex_dynamics, solve_harmonic_phase, BoundaryCurve, HaltStatus, VortexConfiguration,
    VortexTrajectory,
};
use nematic::{NematicError, NematicParams};

use crate::config::{BoundarySpec, ExperimentConfig, InitialSpec, Tier};

/// Failure channel, ordered by pipeline stage; the stage decides the exit
/// code (config problems are 2, numerical failures 3).
#[derive(Debug)]
pub enum StageError {
    /// Key-level or build-time configuration problems.
    Config(Vec<String>),
    /// Solver failure during time integration or analysis.
    Numerical(NematicError),
    /// Filesystem trouble while writing artifacts.
    Io(std::io::Error),
}

impl From<std::io::Error> for StageError {
    fn from(e: std::io::Error) -> Self {
        StageError::Io(e)
    }
}

impl StageError {
    fn build(e: NematicError) -> Self {
        StageError::Config(vec![e.to_string()])
    }

    pub fn describe(&self) -> String {
        match self {
            StageError::Config(list) => {
                let mut s = String::from("configuration errors:\n");
                for item in list {
                    s.push_str("  - ");
                    s.push_str(item);
                    s.push('\n');
                }
                s
            }
            StageError::Numerical(e) => format!("numerical failure: {e}"),
            StageError::Io(e) => format!("i/o failure: {e}"),
        }
    }
}

/// Everything a finished run leaves behind.
#[derive(Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    /// Artifact file names relative to `out_dir` (excluding `run.json`).
    pub artifacts: Vec<String>,
    /// Close-approach halt description, if the run stopped early.
    pub halt: Option<String>,
}

// ---------------------------------------------------------------------------
// builders
// ---------------------------------------------------------------------------

pub fn build_params(cfg: &ExperimentConfig) -> Result<NematicParams, StageError> {
    let gamma = cfg.gamma.ok_or_else(|| missing("params.gamma"))?;
    let epsilon = cfg.epsilon.ok_or_else(|| missing("params.epsilon"))?;
    make_params(gamma, epsilon).map_err(StageError::build)
}

fn missing(key: &str) -> StageError {
    StageError::Config(vec![format!("{key}: missing (required)")])
}

/// Grid with the boundary phase installed from the boundary spec.
pub fn build_grid(cfg: &ExperimentConfig) -> Result<Grid2D, StageError> {
    let spec = cfg.grid.ok_or_else(|| missing("grid.nx"))?;
    let mut grid = Grid2D::new(spec.nx, spec.ny, spec.lx, spec.ly).map_err(StageError::build)?;
    match cfg.boundary.as_ref().ok_or_else(|| missing("boundary.kind"))? {
        BoundarySpec::UniformAngle(theta0) => {
            // the order-parameter phase is twice the director angle
            grid.set_boundary_psi_uniform(2.0 * theta0);
        }
        BoundarySpec::Winding { degree, anchors } => {
            if anchors.is_empty() {
                grid.set_boundary_psi_winding(*degree);
            } else {
                let (pos, deg) = split_triples(anchors);
                grid.set_boundary_psi_anchored(&pos, &deg);
            }
        }
        BoundarySpec::Sampled(path) => {
            let samples = read_sample_file(path)?;
            grid.set_boundary_psi_samples(samples).map_err(|e| {
                StageError::Config(vec![format!("boundary.file: {e}")])
            })?;
        }
    }
    Ok(grid)
}

fn split_triples(list: &[(f64, f64, i32)]) -> (Vec<Complex64>, Vec<i32>) {
    let pos = list.iter().map(|&(x, y, _)| Complex64::new(x, y)).collect();
    let deg = list.iter().map(|&(_, _, d)| d).collect();
    (pos, deg)
}

fn read_sample_file(path: &Path) -> Result<Vec<f64>, StageError> {
    let text = fs::read_to_string(path)
        .map_err(|e| StageError::Config(vec![format!("boundary.file: {}: {e}", path.display())]))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = match line.find('#') {
            Some(p) => &line[..p],
            None => line,
        };
        for token in line.split([',', ' ', '\t']).filter(|t| !t.trim().is_empty()) {
            out.push(token.trim().parse::<f64>().map_err(|_| {
                StageError::Config(vec![format!(
                    "boundary.file: line {}: `{token}` is not a number",
                    lineno + 1
                )])
            })?);
        }
    }
    Ok(out)
}

/// Tier-3 configuration on the rectangle boundary with phase samples drawn
/// from the boundary spec at the polygon vertices.
pub fn build_vortex_configuration(
    cfg: &ExperimentConfig,
    grid: &Grid2D,
) -> Result<VortexConfiguration, StageError> {
    let spec = cfg.grid.ok_or_else(|| missing("grid.lx"))?;
    let curve = BoundaryCurve::rectangle(spec.lx, spec.ly, cfg.m_b).map_err(StageError::build)?;
    let psi = match cfg.boundary.as_ref().ok_or_else(|| missing("boundary.kind"))? {
        BoundarySpec::UniformAngle(theta0) => {
            let v = 2.0 * theta0;
            curve.sample(|_| v)
        }
        BoundarySpec::Winding { degree, anchors } => {
            if anchors.is_empty() {
                let d = *degree as f64;
                curve.sample(|z| d * z.arg())
            } else {
                let (pos, deg) = split_triples(anchors);
                curve.sample(|z| {
                    pos.iter().zip(&deg).map(|(a, d)| *d as f64 * (z - a).arg()).sum()
                })
            }
        }
        // resample grid-node data onto the polygon by nearest boundary node
        BoundarySpec::Sampled(_) => {
            let path = grid.boundary_path();
            let nodes: Vec<Complex64> =
                path.iter().map(|&(i, j)| grid.point(i, j)).collect();
            curve.sample(|z| {
                let mut best = 0;
                let mut best_d = f64::INFINITY;
                for (p, &w) in nodes.iter().enumerate() {
                    let d = (z - w).norm();
                    if d < best_d {
                        best_d = d;
                        best = p;
                    }
                }
                grid.boundary_psi[best]
            })
        }
    };
    let Some(InitialSpec::Multivortex(list)) = &cfg.initial else {
        return Err(StageError::Config(vec![
            "initial.kind: vortex dynamics needs multivortex initial data".into(),
        ]));
    };
    let (pos, deg) = split_triples(list);
    VortexConfiguration::bounded(pos, deg, curve, psi).map_err(StageError::build)
}

/// Order-parameter field for the requested initial condition (tier-2 state;
/// tier-1 lifts it through the local-equilibrium family).
pub fn build_initial_field(
    cfg: &ExperimentConfig,
    grid: &Grid2D,
    params: &NematicParams,
) -> Result<ComplexField, StageError> {
    match cfg.initial.as_ref().ok_or_else(|| missing("initial.kind"))? {
        InitialSpec::Equilibrium => {
            let psi = match cfg.boundary {
                Some(BoundarySpec::UniformAngle(theta0)) => 2.0 * theta0,
                _ => 0.0,
            };
            Ok(ComplexField::constant(grid, Complex64::from_polar(params.r_eq, psi)))
        }
        InitialSpec::Isotropic => Ok(ComplexField::constant(grid, Complex64::new(0.0, 0.0))),
        InitialSpec::Multivortex(list) => {
            // matched data: harmonic smooth phase so the initial state already
            // satisfies the boundary condition
            let vcfg = build_vortex_configuration(cfg, grid)?;
            let phase = solve_harmonic_phase(&vcfg, grid).map_err(StageError::build)?;
            let (pos, deg) = split_triples(list);
            multi_vortex_field(grid, &pos, &deg, &phase, params).map_err(StageError::build)
        }
        InitialSpec::Snapshot(path) => {
            let data = read_snapshot(path).map_err(StageError::build)?;
            let mut fields = data.into_fields(grid).map_err(StageError::build)?;
            // single component: the order parameter itself; hierarchy layout:
            // component index = mode number, so mode 1 is the order parameter
            let take = if fields.len() == 1 { 0 } else { 1 };
            Ok(fields.swap_remove(take))
        }
    }
}

/// Moment state for a tier-1 run: exact resume when the snapshot stores a
/// full hierarchy of the right depth, otherwise an equilibrium-family lift of
/// the order parameter.
pub fn build_initial_moments(
    cfg: &ExperimentConfig,
    grid: &Grid2D,
    params: &NematicParams,
) -> Result<MomentState, StageError> {
    if let Some(InitialSpec::Snapshot(path)) = &cfg.initial {
        let data = read_snapshot(path).map_err(StageError::build)?;
        if data.components.len() == cfg.k_max as usize + 1 {
            let moments = data.into_fields(grid).map_err(StageError::build)?;
            return Ok(MomentState { moments });
        }
    }
    if matches!(cfg.initial, Some(InitialSpec::Isotropic)) {
        return Ok(MomentState::isotropic(grid, cfg.k_max));
    }
    let n = build_initial_field(cfg, grid, params)?;
    MomentState::from_order_parameter(&n, cfg.k_max).map_err(StageError::build)
}

fn time_spec(cfg: &ExperimentConfig) -> Result<(f64, f64, bool), StageError> {
    let t = cfg.time.ok_or_else(|| missing("time.dt"))?;
    Ok((t.dt, t.t_end, t.rescaled))
}

pub fn build_kinetic_config(cfg: &ExperimentConfig) -> Result<KineticConfig, StageError> {
    let params = build_params(cfg)?;
    let grid = build_grid(cfg)?;
    let (dt, t_end, rescaled) = time_spec(cfg)?;
    Ok(KineticConfig {
        params,
        grid,
        k_max: cfg.k_max,
        dt,
        t_end,
        rescaled_time: rescaled,
        truncation: if cfg.truncation_equilibrium {
            Truncation::Equilibrium
        } else {
            Truncation::Zero
        },
        output_every: cfg.output_every,
        diagnostics_every: cfg.diagnostics_every,
    })
}

pub fn build_closure_config(cfg: &ExperimentConfig) -> Result<ClosureConfig, StageError> {
    let params = build_params(cfg)?;
    let grid = build_grid(cfg)?;
    let (dt, t_end, rescaled) = time_spec(cfg)?;
    Ok(ClosureConfig {
        params,
        grid,
        flow: if cfg.flow_maxent { ClosureFlow::MaximalEntropy } else { ClosureFlow::LandauDeGennes },
        dt,
        t_end,
        rescaled_time: rescaled,
        output_every: cfg.output_every,
        diagnostics_every: cfg.diagnostics_every,
    })
}

// ---------------------------------------------------------------------------
// artifact writers
// ---------------------------------------------------------------------------

fn write_text(path: &Path, text: &str) -> Result<(), StageError> {
    fs::write(path, text)?;
    Ok(())
}

pub fn write_kinetic_artifacts(
    out_dir: &Path,
    traj: &KineticTrajectory,
) -> Result<Vec<String>, StageError> {
    let mut artifacts = Vec::new();
    let mut csv = String::from("t,e_total,e_reduced,s_rel,n_vortices\n");
    for row in &traj.diagnostics {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_e(row.t),
            fmt_e(row.e_total),
            fmt_e(row.e_reduced),
            fmt_e(row.s_rel),
            row.n_vortices
        ));
    }
    write_text(&out_dir.join("diagnostics.csv"), &csv)?;
    artifacts.push("diagnostics.csv".into());
    for (idx, state) in traj.states.iter().enumerate() {
        let name = format!("snapshot_{idx:04}.nemf");
        let refs: Vec<&ComplexField> = state.moments.iter().collect();
        write_snapshot(&out_dir.join(&name), &refs).map_err(StageError::Numerical)?;
        artifacts.push(name);
    }
    let times = traj
        .state_times
        .iter()
        .map(|t| fmt_e(*t))
        .collect::<Vec<_>>()
        .join("\n");
    write_text(&out_dir.join("snapshot_times.csv"), &format!("t\n{times}\n"))?;
    artifacts.push("snapshot_times.csv".into());
    Ok(artifacts)
}

pub fn write_closure_artifacts(
    out_dir: &Path,
    traj: &ClosureTrajectory,
) -> Result<Vec<String>, StageError> {
    let mut artifacts = Vec::new();
    let mut csv = String::from("t,e_reduced,n_vortices\n");
    for row in &traj.diagnostics {
        csv.push_str(&format!(
            "{},{},{}\n",
            fmt_e(row.t),
            fmt_e(row.e_reduced),
            row.n_vortices
        ));
    }
    write_text(&out_dir.join("diagnostics.csv"), &csv)?;
    artifacts.push("diagnostics.csv".into());
    for (idx, state) in traj.states.iter().enumerate() {
        let name = format!("snapshot_{idx:04}.nemf");
        write_snapshot(&out_dir.join(&name), &[state]).map_err(StageError::Numerical)?;
        artifacts.push(name);
    }
    let times = traj
        .state_times
        .iter()
        .map(|t| fmt_e(*t))
        .collect::<Vec<_>>()
        .join("\n");
    write_text(&out_dir.join("snapshot_times.csv"), &format!("t\n{times}\n"))?;
    artifacts.push("snapshot_times.csv".into());
    Ok(artifacts)
}

pub fn write_vortex_artifacts(
    out_dir: &Path,
    traj: &VortexTrajectory,
) -> Result<Vec<String>, StageError> {
    let mut csv = String::from("t_prime,k,re_z,im_z,degree,U\n");
    for (s, t) in traj.times.iter().enumerate() {
        for (k, z) in traj.positions[s].iter().enumerate() {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt_e(*t),
                k,
                fmt_e(z.re),
                fmt_e(z.im),
                traj.degrees[k],
                fmt_e(traj.potential[s])
            ));
        }
    }
    write_text(&out_dir.join("vortex-trajectory.csv"), &csv)?;
    Ok(vec!["vortex-trajectory.csv".into()])
}

fn halt_description(status: &HaltStatus) -> Option<String> {
    match status {
        HaltStatus::Completed => None,
        HaltStatus::PairApproach { t, first, second, distance } => Some(format!(
            "pair approach at t_prime = {}: vortices {first} and {second} within {}",
            fmt_e(*t),
            fmt_e(*distance)
        )),
        HaltStatus::BoundaryApproach { t, vortex, distance } => Some(format!(
            "boundary approach at t_prime = {}: vortex {vortex} within {}",
            fmt_e(*t),
            fmt_e(*distance)
        )),
    }
}

/// Write the run manifest: resolved config echo, declared artifacts, outcome.
pub fn write_run_manifest(
    out_dir: &Path,
    cfg: &ExperimentConfig,
    artifacts: &[String],
    halt: Option<&str>,
) -> Result<(), StageError> {
    let mut config_echo = serde_json::Map::new();
    for line in crate::config::serialize_config(cfg).lines() {
        if let Some((k, v)) = line.split_once('=') {
            config_echo.insert(
                k.trim().to_string(),
                serde_json::Value::String(v.trim().to_string()),
            );
        }
    }
    let manifest = serde_json::json!({
        "config": config_echo,
        "artifacts": artifacts,
        "status": if halt.is_some() { "halted" } else { "success" },
        "halt": halt,
    });
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| StageError::Io(std::io::Error::other(e)))?;
    write_text(&out_dir.join("run.json"), &(text + "\n"))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// tier runners
// ---------------------------------------------------------------------------

/// Run a simulation tier and write all artifacts into `out_dir`.
pub fn run_simulation(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome, StageError> {
    fs::create_dir_all(out_dir)?;
    let (artifacts, halt) = match cfg.tier {
        Tier::Kinetic => {
            let kin_cfg = build_kinetic_config(cfg)?;
            let initial = build_initial_moments(cfg, &kin_cfg.grid, &kin_cfg.params)?;
            let traj = run_kinetic(initial, &kin_cfg).map_err(StageError::Numerical)?;
            (write_kinetic_artifacts(out_dir, &traj)?, None)
        }
        Tier::Closure => {
            let clo_cfg = build_closure_config(cfg)?;
            let initial = build_initial_field(cfg, &clo_cfg.grid, &clo_cfg.params)?;
            let traj = run_closure(initial, &clo_cfg).map_err(StageError::Numerical)?;
            (write_closure_artifacts(out_dir, &traj)?, None)
        }
        Tier::Vortex => {
            let grid = build_grid(cfg)?;
            let vcfg = build_vortex_configuration(cfg, &grid)?;
            let (dt, t_end, _) = time_spec(cfg)?;
            let traj = run_vortex_dynamics(&vcfg, t_end, dt).map_err(StageError::Numerical)?;
            let halt = halt_description(&traj.status);
            (write_vortex_artifacts(out_dir, &traj)?, halt)
        }
        Tier::SpecfunTable => {
            let params = build_params(cfg)?;
            let name = "specfun-table.csv";
            crate::tables::write_specfun_table(&out_dir.join(name), params.gamma)
                .map_err(StageError::Numerical)?;
            (vec![name.to_string()], None)
        }
        Tier::MaxslopeDemo => {
            let name = "maxslope-demo.csv";
            crate::tables::write_maxslope_demo(&out_dir.join(name))
                .map_err(StageError::Numerical)?;
            (vec![name.to_string()], None)
        }
        Tier::Validate => {
            return Err(StageError::Config(vec![
                "tier: validate runs through the `validate` subcommand".into(),
            ]))
        }
    };
    write_run_manifest(out_dir, cfg, &artifacts, halt.as_deref())?;
    Ok(RunOutcome { out_dir: out_dir.to_path_buf(), artifacts, halt })
}

/// Resolve the output directory: `NEMATIC_OUT_DIR` overrides the root,
/// and the run writes into `<root>/<name>`.
pub fn resolve_out_dir(name: &str) -> PathBuf {
    let root = std::env::var_os("NEMATIC_OUT_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"));
    root.join(name)
}

/// Convenience for tests and the validate tier: run the three solver tiers
/// from compatible configs and return the trajectories.
pub fn run_kinetic_from(cfg: &ExperimentConfig) -> Result<(KineticConfig, KineticTrajectory), StageError> {
    let kin_cfg = build_kinetic_config(cfg)?;
    let initial = build_initial_moments(cfg, &kin_cfg.grid, &kin_cfg.params)?;
    let traj = run_kinetic(initial, &kin_cfg).map_err(StageError::Numerical)?;
    Ok((kin_cfg, traj))
}

pub fn run_closure_from(cfg: &ExperimentConfig) -> Result<(ClosureConfig, ClosureTrajectory), StageError> {
    let clo_cfg = build_closure_config(cfg)?;
    let initial = build_initial_field(cfg, &clo_cfg.grid, &clo_cfg.params)?;
    let traj = run_closure(initial, &clo_cfg).map_err(StageError::Numerical)?;
    Ok((clo_cfg, traj))
}

pub fn run_vortex_from(cfg: &ExperimentConfig) -> Result<(VortexConfiguration, VortexTrajectory), StageError> {
    let grid = build_grid(cfg)?;
    let vcfg = build_vortex_configuration(cfg, &grid)?;
    let (dt, t_end, _) = time_spec(cfg)?;
    let traj = run_vortex_dynamics(&vcfg, t_end, dt).map_err(StageError::Numerical)?;
    Ok((vcfg, traj))
}

/// Smooth zero-phase field helper shared by validate scenarios.
pub fn flat_phase(grid: &Grid2D) -> RealField {
    RealField::constant(grid, 0.0)
}
