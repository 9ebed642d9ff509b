//! Cross-tier comparison: line up a moment-hierarchy run, a closed
//! order-parameter run, and a vortex-dynamics run over the same physical
//! setup, and measure where they agree.
//!
//! Clock bookkeeping: the field solvers advance the slow (diffusive) clock
//! `t`; vortex dynamics advance the once-more rescaled clock
//! `t' = 8 t / (pi tau_gamma |ln eps|)`. All comparison rows are reported on
//! the `t'` axis.

use num_complex::Complex64;

use nematic::closure::{ClosureConfig, ClosureTrajectory};
use nematic::grid::{detect_vortices, wrap_angle, ComplexField, Grid2D};
use nematic::kinetic::{KineticConfig, KineticTrajectory};
use nematic::vortex::{solve_harmonic_phase, VortexConfiguration, VortexTrajectory};
use nematic::{NematicError, NematicParams, Result};

/// `dt'/dt`: conversion factor from the field-solver clock to the vortex
/// clock.
pub fn vortex_clock_factor(params: &NematicParams) -> Result<f64> {
    if params.tau_gamma <= 0.0 {
        return Err(NematicError::domain(
            "vortex clock",
            format!("tau_gamma = {} not positive (need gamma > 2)", params.tau_gamma),
        ));
    }
    let ln_eps = params.epsilon.ln();
    if ln_eps >= 0.0 {
        return Err(NematicError::domain("vortex clock", "epsilon must lie in (0, 1)"));
    }
    Ok(8.0 / (std::f64::consts::PI * params.tau_gamma * (-ln_eps)))
}

/// One row of the track comparison: a field-solver sample mapped to the
/// vortex clock with its worst vortex-position discrepancy per tier.
#[derive(Debug, Clone, Copy)]
pub struct TrackRow {
    pub t_prime: f64,
    pub kinetic: f64,
    pub closure: f64,
}

/// One row of the energy comparison.
#[derive(Debug, Clone, Copy)]
pub struct EnergyRow {
    pub t_prime: f64,
    pub kinetic_total: f64,
    pub kinetic_reduced: f64,
    pub closure_reduced: f64,
    pub vortex_potential: f64,
}

/// Report produced by [`compare_tiers`].
#[derive(Debug, Clone)]
pub struct TierReport {
    pub tracks: Vec<TrackRow>,
    pub max_kinetic_track: f64,
    pub max_closure_track: f64,
    /// Final-time phase mismatches outside 5-epsilon disks around the
    /// tier-3 vortex positions.
    pub phase_kinetic_vs_closure: f64,
    pub phase_kinetic_vs_vortex: f64,
    pub phase_closure_vs_vortex: f64,
    pub energies: Vec<EnergyRow>,
}

fn interp(times: &[f64], values: &[f64], t: f64) -> f64 {
    match times.iter().position(|&u| u >= t) {
        Some(0) => values[0],
        None => *values.last().unwrap(),
        Some(i) => {
            let w = (t - times[i - 1]) / (times[i] - times[i - 1]);
            values[i - 1] * (1.0 - w) + values[i] * w
        }
    }
}

fn interp_positions(traj: &VortexTrajectory, t: f64) -> Vec<Complex64> {
    match traj.times.iter().position(|&u| u >= t) {
        Some(0) => traj.positions[0].clone(),
        None => traj.positions.last().unwrap().clone(),
        Some(i) => {
            let w = (t - traj.times[i - 1]) / (traj.times[i] - traj.times[i - 1]);
            traj.positions[i - 1]
                .iter()
                .zip(&traj.positions[i])
                .map(|(a, b)| a * (1.0 - w) + b * w)
                .collect()
        }
    }
}

/// Worst distance from each predicted vortex to the nearest detected one;
/// infinite when the counts disagree (a vortex appeared or annihilated).
pub fn track_discrepancy(field: &ComplexField, predicted: &[Complex64]) -> f64 {
    let found = detect_vortices(field);
    if found.len() != predicted.len() {
        return f64::INFINITY;
    }
    predicted
        .iter()
        .map(|p| {
            found
                .iter()
                .map(|v| (v.position - p).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Max phase mismatch between two order-parameter fields over nodes farther
/// than `margin` from every listed position.
pub fn phase_mismatch(
    a: &ComplexField,
    b: &ComplexField,
    positions: &[Complex64],
    margin: f64,
) -> Result<f64> {
    if !a.grid.same_shape(&b.grid) {
        return Err(NematicError::GridMismatch("phase comparison on different grids".into()));
    }
    let g = &a.grid;
    let mut worst = 0.0f64;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let z = g.point(i, j);
            if positions.iter().any(|p| (z - p).norm() <= margin) {
                continue;
            }
            let d = wrap_angle(a.get(i, j).arg() - b.get(i, j).arg()).abs();
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

/// Order-parameter field predicted by tier-3 data: harmonic smooth phase for
/// the given vortex positions plus the singular winding factors, at unit
/// amplitude (only the phase is compared).
pub fn vortex_phase_prediction(
    base: &VortexConfiguration,
    positions: &[Complex64],
    grid: &Grid2D,
) -> Result<ComplexField> {
    let moved = VortexConfiguration {
        positions: positions.to_vec(),
        degrees: base.degrees.clone(),
        curve: base.curve.clone(),
        boundary_psi: base.boundary_psi.clone(),
        free_space: base.free_space,
    };
    let phi = solve_harmonic_phase(&moved, grid)?;
    let mut out = ComplexField::constant(grid, Complex64::new(0.0, 0.0));
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let z = grid.point(i, j);
            let mut angle = phi.get(i, j);
            for (zk, d) in moved.positions.iter().zip(&moved.degrees) {
                angle += *d as f64 * (z - zk).arg();
            }
            out.set(i, j, Complex64::from_polar(1.0, angle));
        }
    }
    Ok(out)
}

/// Line up the three tiers. The field runs must share grid shape, clock
/// convention, and material parameters; the vortex run supplies the predicted
/// tracks and the boundary data for the phase prediction.
pub fn compare_tiers(
    kinetic: (&KineticConfig, &KineticTrajectory),
    closure: (&ClosureConfig, &ClosureTrajectory),
    vortex: (&VortexConfiguration, &VortexTrajectory),
) -> Result<TierReport> {
    let (kin_cfg, kin) = kinetic;
    let (clo_cfg, clo) = closure;
    let (vor_cfg, vor) = vortex;
    if !kin_cfg.grid.same_shape(&clo_cfg.grid) {
        return Err(NematicError::GridMismatch(
            "tier comparison: kinetic and closure grids differ".into(),
        ));
    }
    if kin_cfg.rescaled_time != clo_cfg.rescaled_time {
        return Err(NematicError::InvalidConfig(
            "tier comparison: clock mismatch (rescaled_time differs)".into(),
        ));
    }
    let p = &kin_cfg.params;
    let q = &clo_cfg.params;
    if (p.gamma - q.gamma).abs() > 1e-12 || (p.epsilon - q.epsilon).abs() > 1e-12 {
        return Err(NematicError::InvalidConfig(
            "tier comparison: material parameters differ between runs".into(),
        ));
    }
    let factor = vortex_clock_factor(p)?;

    // (a) vortex tracks at every stored field state
    let mut tracks = Vec::new();
    let mut max_kin = 0.0f64;
    let mut max_clo = 0.0f64;
    for (s, &t) in kin.state_times.iter().enumerate() {
        let t_prime = t * factor;
        let predicted = interp_positions(vor, t_prime);
        let dk = track_discrepancy(kin.states[s].order_parameter(), &predicted);
        // closure states are stored on the same cadence contract but maybe
        // different times; use its nearest stored state
        let c_idx = nearest_index(&clo.state_times, t);
        let dc = track_discrepancy(&clo.states[c_idx], &predicted);
        max_kin = max_kin.max(dk);
        max_clo = max_clo.max(dc);
        tracks.push(TrackRow { t_prime, kinetic: dk, closure: dc });
    }

    // (b) final-time phase agreement outside vortex cores
    let final_positions = vor.final_positions().to_vec();
    let margin = 5.0 * p.epsilon;
    let kin_final = kin.final_state().order_parameter();
    let clo_final = clo.final_state();
    let prediction = vortex_phase_prediction(vor_cfg, &final_positions, &kin_cfg.grid)?;
    let phase_kc = phase_mismatch(kin_final, clo_final, &final_positions, margin)?;
    let phase_kv = phase_mismatch(kin_final, &prediction, &final_positions, margin)?;
    let phase_cv = phase_mismatch(clo_final, &prediction, &final_positions, margin)?;

    // (c) energy curves on the shared t' axis
    let clo_t: Vec<f64> = clo.diagnostics.iter().map(|r| r.t).collect();
    let clo_e: Vec<f64> = clo.diagnostics.iter().map(|r| r.e_reduced).collect();
    let energies = kin
        .diagnostics
        .iter()
        .map(|row| EnergyRow {
            t_prime: row.t * factor,
            kinetic_total: row.e_total,
            kinetic_reduced: row.e_reduced,
            closure_reduced: interp(&clo_t, &clo_e, row.t),
            vortex_potential: interp(&vor.times, &vor.potential, row.t * factor),
        })
        .collect();

    Ok(TierReport {
        tracks,
        max_kinetic_track: max_kin,
        max_closure_track: max_clo,
        phase_kinetic_vs_closure: phase_kc,
        phase_kinetic_vs_vortex: phase_kv,
        phase_closure_vs_vortex: phase_cv,
        energies,
    })
}

fn nearest_index(times: &[f64], t: f64) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, &u) in times.iter().enumerate() {
        let d = (u - t).abs();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Exponential decay rate of a boundary-compatible phase perturbation in a
/// hierarchy run, from a log-linear fit of the center-node phase over the
/// stored states (the first state is skipped as transient). The asymptotic
/// prediction for the first unit-square eigenmode is
/// `2 pi^2 * 4 / (|domain| tau_gamma)` on the same clock.
pub fn phase_relaxation_rate(cfg: &KineticConfig, traj: &KineticTrajectory) -> Result<f64> {
    let g = &cfg.grid;
    let (ci, cj) = (g.nx / 2, g.ny / 2);
    let mut ts = Vec::new();
    let mut logs = Vec::new();
    for (s, state) in traj.states.iter().enumerate().skip(1) {
        let phi = wrap_angle(state.order_parameter().get(ci, cj).arg());
        if phi.abs() < 1e-10 {
            break;
        }
        ts.push(traj.state_times[s]);
        logs.push(phi.abs().ln());
    }
    if ts.len() < 2 {
        return Err(NematicError::domain(
            "phase relaxation fit",
            "need at least two usable stored states",
        ));
    }
    // least-squares slope of log-amplitude against time
    let n = ts.len() as f64;
    let mt = ts.iter().sum::<f64>() / n;
    let ml = logs.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, l) in ts.iter().zip(&logs) {
        num += (t - mt) * (l - ml);
        den += (t - mt) * (t - mt);
    }
    if den == 0.0 {
        return Err(NematicError::domain("phase relaxation fit", "degenerate time samples"));
    }
    Ok(-num / den)
}
