//! Tier 1: the orientation-space Smoluchowski dynamics as a truncated
//! hierarchy of complex Fourier moments `n^(k)(z, t)` on a grid.
//!
//! The k-th moment obeys
//! `d/dt n^(k) = [-4 k^2 n^(k) + 2k (n^(k-1) L n - n^(k+1) conj(L n))] / scale`
//! with `L = eps^2 Laplacian + gamma` acting on the first moment and
//! `scale = eps^2` when the slow clock is selected (`rescaled_time`), 1
//! otherwise. `n^(0)` is identically one; the hierarchy is closed at `k_max`
//! either by dropping `n^(k_max+1)` or by slaving it to the local equilibrium
//! of the first moment.
//!
//! Time stepping is semi-implicit: the stiff diagonal `-4k^2/scale` is
//! integrated exactly (integrating factor), the mode coupling explicitly, so
//! every uniform equilibrium state is a fixed point of the discrete update to
//! roundoff.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::error::{NematicError, Result};
use crate::grid::{
    detect_vortices, apply_elastic_operator, equilibrium_moments, reduced_energy, relative_entropy,
    ComplexField, Grid2D, PhiDensity,
};
use crate::specfun::{bessel_ratio_to_i0, NematicParams};

/// How the hierarchy is closed at the top mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truncation {
    /// Treat `n^(k_max+1)` as zero.
    Zero,
    /// Slave `n^(k_max+1)` to the local equilibrium of the first moment.
    Equilibrium,
}

/// Configuration of a hierarchy run.
#[derive(Debug, Clone)]
pub struct KineticConfig {
    pub params: NematicParams,
    pub grid: Grid2D,
    /// Highest retained mode (2..=63).
    pub k_max: u32,
    pub dt: f64,
    pub t_end: f64,
    /// `true`: evolve on the slow clock (all rates divided by `eps^2`).
    pub rescaled_time: bool,
    pub truncation: Truncation,
    /// Store a full state every this many steps (0 = only first and last).
    pub output_every: usize,
    /// Record an energy-diagnostics row every this many steps (1 = each step).
    pub diagnostics_every: usize,
}

impl KineticConfig {
    fn validate(&self) -> Result<()> {
        if !(2..=63).contains(&self.k_max) {
            return Err(NematicError::InvalidConfig(format!(
                "k_max = {} outside 2..=63",
                self.k_max
            )));
        }
        if !(self.dt > 0.0) || !(self.t_end >= 0.0) {
            return Err(NematicError::InvalidConfig(format!(
                "need dt > 0 and t_end >= 0 (got dt = {}, t_end = {})",
                self.dt, self.t_end
            )));
        }
        if self.diagnostics_every == 0 {
            return Err(NematicError::InvalidConfig("diagnostics_every must be >= 1".into()));
        }
        Ok(())
    }

    /// Rate divisor selected by the clock choice.
    fn time_scale(&self) -> f64 {
        if self.rescaled_time {
            self.params.epsilon * self.params.epsilon
        } else {
            1.0
        }
    }
}

/// All retained moments of the orientation density, index = mode number.
#[derive(Debug, Clone)]
pub struct MomentState {
    pub moments: Vec<ComplexField>,
}

impl MomentState {
    /// The isotropic state: `n^(0) = 1`, all higher moments zero.
    pub fn isotropic(grid: &Grid2D, k_max: u32) -> Self {
        let mut moments = vec![ComplexField::constant(grid, Complex64::new(1.0, 0.0))];
        for _ in 1..=k_max {
            moments.push(ComplexField::constant(grid, Complex64::new(0.0, 0.0)));
        }
        MomentState { moments }
    }

    /// The local-equilibrium family state slaved to a first-moment field.
    pub fn from_order_parameter(n: &ComplexField, k_max: u32) -> Result<Self> {
        let mut moments = Vec::with_capacity(k_max as usize + 1);
        for k in 0..=k_max {
            moments.push(equilibrium_moments(n, k)?);
        }
        Ok(MomentState { moments })
    }

    /// Highest retained mode number.
    pub fn k_max(&self) -> u32 {
        (self.moments.len() - 1) as u32
    }

    /// The first moment (complex order parameter).
    pub fn order_parameter(&self) -> &ComplexField {
        &self.moments[1]
    }

    /// Largest moment magnitude over all modes and nodes.
    pub fn max_moment_abs(&self) -> f64 {
        self.moments.iter().map(|f| f.max_abs()).fold(0.0, f64::max)
    }
}

/// Boundary values of every moment along the boundary path: the Dirichlet data
/// pins the first moment to `r_eq e^{i psi}` and each higher mode to the
/// corresponding equilibrium moment `b_k e^{i k psi}`.
fn boundary_moment_rows(cfg: &KineticConfig) -> Result<Vec<Vec<Complex64>>> {
    let lambda_eq = cfg.params.gamma * cfg.params.r_eq;
    let psi = &cfg.grid.boundary_psi;
    let mut rows = Vec::with_capacity(cfg.k_max as usize + 1);
    for k in 0..=cfg.k_max {
        let b_k = bessel_ratio_to_i0(k, lambda_eq)?;
        rows.push(psi.iter().map(|&p| Complex64::from_polar(b_k, k as f64 * p)).collect());
    }
    Ok(rows)
}

fn pin_boundary_rows(state: &mut MomentState, cfg: &KineticConfig, rows: &[Vec<Complex64>]) {
    let path = cfg.grid.boundary_path();
    for (k, row) in rows.iter().enumerate() {
        for (p, &(i, j)) in path.iter().enumerate() {
            state.moments[k].set(i, j, row[p]);
        }
    }
}

/// The closure tail `n^(k_max+1)` selected by the truncation rule.
fn truncation_tail(state: &MomentState, cfg: &KineticConfig) -> Result<ComplexField> {
    match cfg.truncation {
        Truncation::Zero => {
            Ok(ComplexField::constant(&cfg.grid, Complex64::new(0.0, 0.0)))
        }
        Truncation::Equilibrium => equilibrium_moments(state.order_parameter(), cfg.k_max + 1),
    }
}

/// Instantaneous hierarchy increment for every mode. Boundary rows are zero
/// (they are pinned); the `k = 0` row is identically zero.
pub fn hierarchy_rhs(state: &MomentState, cfg: &KineticConfig) -> Result<Vec<ComplexField>> {
    cfg.validate()?;
    check_state(state, cfg)?;
    let g = &cfg.grid;
    let scale = cfg.time_scale();
    let ln = apply_elastic_operator(state.order_parameter(), &cfg.params);
    let tail = truncation_tail(state, cfg)?;
    let mut rhs = Vec::with_capacity(state.moments.len());
    rhs.push(ComplexField::constant(g, Complex64::new(0.0, 0.0)));
    for k in 1..=cfg.k_max {
        let kf = k as f64;
        let below = &state.moments[(k - 1) as usize];
        let above = if k < cfg.k_max { &state.moments[(k + 1) as usize] } else { &tail };
        let mut out = ComplexField::constant(g, Complex64::new(0.0, 0.0));
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                let idx = g.idx(i, j);
                let l = ln.values[idx];
                let bracket =
                    2.0 * kf * (below.values[idx] * l - above.values[idx] * l.conj());
                out.values[idx] =
                    (-4.0 * kf * kf * state.moments[k as usize].values[idx] + bracket) / scale;
            }
        }
        rhs.push(out);
    }
    Ok(rhs)
}

/// One semi-implicit step: exact integrating factor on the `-4k^2/scale`
/// relaxation, explicit mode coupling, Dirichlet boundary re-pinned.
pub fn step_kinetic(state: &MomentState, cfg: &KineticConfig) -> Result<MomentState> {
    cfg.validate()?;
    check_state(state, cfg)?;
    let rows = boundary_moment_rows(cfg)?;
    let mut next = advance(state, cfg)?;
    pin_boundary_rows(&mut next, cfg, &rows);
    check_stability(&next)?;
    Ok(next)
}

/// Interior update shared by [`step_kinetic`] and [`run_kinetic`].
fn advance(state: &MomentState, cfg: &KineticConfig) -> Result<MomentState> {
    let g = &cfg.grid;
    let scale = cfg.time_scale();
    let ln = apply_elastic_operator(state.order_parameter(), &cfg.params);
    let tail = truncation_tail(state, cfg)?;
    let mut next = state.clone();
    for k in 1..=cfg.k_max {
        let kf = k as f64;
        let a = 4.0 * kf * kf / scale;
        let decay = (-a * cfg.dt).exp();
        let weight = -(-a * cfg.dt).exp_m1() / a; // (1 - e^{-a dt}) / a
        let below = &state.moments[(k - 1) as usize];
        let above = if k < cfg.k_max { &state.moments[(k + 1) as usize] } else { &tail };
        let field = &mut next.moments[k as usize];
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                let idx = g.idx(i, j);
                let l = ln.values[idx];
                let bracket =
                    2.0 * kf * (below.values[idx] * l - above.values[idx] * l.conj());
                field.values[idx] =
                    decay * state.moments[k as usize].values[idx] + weight * bracket / scale;
            }
        }
    }
    Ok(next)
}

fn check_state(state: &MomentState, cfg: &KineticConfig) -> Result<()> {
    if state.k_max() != cfg.k_max {
        return Err(NematicError::InvalidConfig(format!(
            "state has k_max = {}, config wants {}",
            state.k_max(),
            cfg.k_max
        )));
    }
    if !state.moments[0].grid.same_shape(&cfg.grid) {
        return Err(NematicError::GridMismatch("state grid does not match config grid".into()));
    }
    Ok(())
}

fn check_stability(state: &MomentState) -> Result<()> {
    for (k, field) in state.moments.iter().enumerate() {
        let m = field.max_abs();
        if m > 1.0 + 1e-6 {
            return Err(NematicError::Instability { mode: k, max_abs: m });
        }
    }
    Ok(())
}

/// One row of run diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub e_total: f64,
    pub e_reduced: f64,
    pub s_rel: f64,
    pub n_vortices: usize,
}

/// Output of a hierarchy run: diagnostics rows plus stored states.
#[derive(Debug, Clone)]
pub struct KineticTrajectory {
    pub diagnostics: Vec<DiagnosticsRow>,
    pub state_times: Vec<f64>,
    pub states: Vec<MomentState>,
}

impl KineticTrajectory {
    pub fn final_state(&self) -> &MomentState {
        self.states.last().expect("trajectory stores at least the initial state")
    }
}

/// Reconstruction tolerance used for run diagnostics: equilibrium-family
/// states at strong alignment truncated at moderate `k_max` carry Fourier-tail
/// negativity of order 1e-3 (measured: 1.1e-3 for `gamma = 6`, `k_max = 8`),
/// which is truncation error, not invalid data. Entropy *tests* use the
/// strict 1e-8 threshold instead.
pub const DIAGNOSTICS_NEGATIVITY_TOL: f64 = 1e-2;

/// Strict reconstruction threshold for entropy tests.
pub const STRICT_NEGATIVITY_TOL: f64 = 1e-8;

/// Reconstruct the orientation density from the truncated moments at `m`
/// uniform angles per node:
/// `rho(phi) = (1 + 2 sum_k Re(conj(n^(k)) e^{2 i k phi})) / (2 pi)`.
///
/// Negative overshoot up to `negativity_tol` is clipped to zero and the mass
/// renormalized; anything worse is an error.
pub fn reconstruct_density(
    state: &MomentState,
    m: usize,
    negativity_tol: f64,
) -> Result<PhiDensity> {
    let g = &state.moments[0].grid;
    let k_max = state.k_max() as usize;
    if m < 4 * (k_max + 1) {
        return Err(NematicError::InvalidConfig(format!(
            "need at least {} angular samples for k_max = {k_max}, got {m}",
            4 * (k_max + 1)
        )));
    }
    let dphi = TAU / m as f64;
    let mut values = vec![0.0f64; g.nx * g.ny * m];
    for j in 0..g.ny {
        for i in 0..g.nx {
            let node = g.idx(i, j);
            let slice = &mut values[node * m..(node + 1) * m];
            for (q, out) in slice.iter_mut().enumerate() {
                let phase = Complex64::from_polar(1.0, 2.0 * q as f64 * dphi);
                let mut acc = 1.0;
                let mut p = Complex64::new(1.0, 0.0);
                for k in 1..=k_max {
                    p *= phase;
                    acc += 2.0 * (state.moments[k].values[node].conj() * p).re;
                }
                *out = acc / TAU;
            }
            let min = slice.iter().cloned().fold(f64::INFINITY, f64::min);
            if min < -negativity_tol {
                return Err(NematicError::InvalidDensity {
                    i,
                    j,
                    message: format!("reconstructed density dips to {min:.3e}"),
                });
            }
            if min < 0.0 {
                for v in slice.iter_mut() {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
                let mass: f64 = slice.iter().sum::<f64>() * dphi;
                for v in slice.iter_mut() {
                    *v /= mass;
                }
            }
        }
    }
    Ok(PhiDensity { grid: g.clone(), m, values })
}

/// Energy split of a hierarchy state.
#[derive(Debug, Clone, Copy)]
pub struct EnergyBreakdown {
    /// Order-parameter part (elastic + single-well potential).
    pub reduced: f64,
    /// Orientational excess over the local equilibrium.
    pub entropy: f64,
    /// Sum of the two: the full free energy of the state.
    pub total: f64,
}

/// Full free energy of a state through the decomposition
/// `E = E_reduced(n^(1)) + S(rho | rho_hat[n^(1)])`.
pub fn total_energy(
    state: &MomentState,
    params: &NematicParams,
    m: usize,
    negativity_tol: f64,
) -> Result<EnergyBreakdown> {
    let reduced = reduced_energy(state.order_parameter(), params)?;
    let density = reconstruct_density(state, m, negativity_tol)?;
    let entropy = relative_entropy(&density, state.order_parameter())?;
    Ok(EnergyBreakdown { reduced, entropy, total: reduced + entropy })
}

/// Integrate the hierarchy. Diagnostics rows are recorded at `t = 0`, every
/// `diagnostics_every`-th step and the final step; full states at `t = 0`,
/// every `output_every`-th step (if nonzero) and the final step.
pub fn run_kinetic(initial: MomentState, cfg: &KineticConfig) -> Result<KineticTrajectory> {
    cfg.validate()?;
    check_state(&initial, cfg)?;
    let ones_err = initial
        .moments[0]
        .values
        .iter()
        .map(|v| (v - Complex64::new(1.0, 0.0)).norm())
        .fold(0.0, f64::max);
    if ones_err > 1e-12 {
        return Err(NematicError::InvalidConfig(format!(
            "initial zeroth moment deviates from 1 by {ones_err:.3e}"
        )));
    }
    let n_steps = (cfg.t_end / cfg.dt).round().max(0.0) as usize;
    let m_quad = 64.max(4 * (cfg.k_max as usize + 1));
    let rows = boundary_moment_rows(cfg)?;

    let mut state = initial;
    pin_boundary_rows(&mut state, cfg, &rows);
    let mut traj = KineticTrajectory {
        diagnostics: Vec::new(),
        state_times: vec![0.0],
        states: vec![state.clone()],
    };
    let record = |state: &MomentState, t: f64, traj: &mut KineticTrajectory| -> Result<()> {
        let energy = total_energy(state, &cfg.params, m_quad, DIAGNOSTICS_NEGATIVITY_TOL)?;
        traj.diagnostics.push(DiagnosticsRow {
            t,
            e_total: energy.total,
            e_reduced: energy.reduced,
            s_rel: energy.entropy,
            n_vortices: detect_vortices(state.order_parameter()).len(),
        });
        Ok(())
    };
    record(&state, 0.0, &mut traj)?;

    for step in 1..=n_steps {
        let mut next = advance(&state, cfg)?;
        pin_boundary_rows(&mut next, cfg, &rows);
        check_stability(&next)?;
        state = next;
        let t = step as f64 * cfg.dt;
        if step % cfg.diagnostics_every == 0 || step == n_steps {
            record(&state, t, &mut traj)?;
        }
        if (cfg.output_every != 0 && step % cfg.output_every == 0) || step == n_steps {
            traj.state_times.push(t);
            traj.states.push(state.clone());
        }
    }
    Ok(traj)
}

/// Spatially uniform (0-dimensional) hierarchy: the same moment equations with
/// `L n = gamma n`, used for fixed-point studies and oracle comparisons.
pub mod homogeneous {
    use super::*;
    use crate::specfun::lambda_of;

    /// Equilibrium moment vector `b_k e^{i k theta}` at alignment `r`.
    pub fn equilibrium(r: f64, theta: f64, k_max: u32) -> Result<Vec<Complex64>> {
        let lambda = if r == 0.0 { 0.0 } else { lambda_of(r)? };
        (0..=k_max)
            .map(|k| {
                Ok(Complex64::from_polar(bessel_ratio_to_i0(k, lambda)?, k as f64 * theta))
            })
            .collect()
    }

    /// Closure tail for the uniform system.
    fn tail(moments: &[Complex64], truncation: Truncation) -> Result<Complex64> {
        match truncation {
            Truncation::Zero => Ok(Complex64::new(0.0, 0.0)),
            Truncation::Equilibrium => {
                let n1 = moments[1];
                let r = n1.norm();
                if r < 1e-14 {
                    return Ok(Complex64::new(0.0, 0.0));
                }
                let k_above = moments.len() as u32;
                let amp = bessel_ratio_to_i0(k_above, lambda_of(r)?)?;
                Ok(amp * (n1 / r).powu(k_above))
            }
        }
    }

    /// Instantaneous increment of the uniform hierarchy.
    pub fn rhs(moments: &[Complex64], gamma: f64, truncation: Truncation) -> Result<Vec<Complex64>> {
        let k_max = moments.len() - 1;
        let ln = gamma * moments[1];
        let tail = tail(moments, truncation)?;
        let mut out = vec![Complex64::new(0.0, 0.0); moments.len()];
        for k in 1..=k_max {
            let kf = k as f64;
            let above = if k < k_max { moments[k + 1] } else { tail };
            out[k] = -4.0 * kf * kf * moments[k]
                + 2.0 * kf * (moments[k - 1] * ln - above * ln.conj());
        }
        Ok(out)
    }

    /// Semi-implicit step mirroring the grid stepper.
    pub fn step(moments: &mut [Complex64], gamma: f64, dt: f64, truncation: Truncation) -> Result<()> {
        let k_max = moments.len() - 1;
        let ln = gamma * moments[1];
        let t = tail(moments, truncation)?;
        let old: Vec<Complex64> = moments.to_vec();
        for k in 1..=k_max {
            let kf = k as f64;
            let a = 4.0 * kf * kf;
            let decay = (-a * dt).exp();
            let weight = -(-a * dt).exp_m1() / a;
            let above = if k < k_max { old[k + 1] } else { t };
            let bracket = 2.0 * kf * (old[k - 1] * ln - above * ln.conj());
            moments[k] = decay * old[k] + weight * bracket;
        }
        Ok(())
    }

    /// Integrate to `t_end` and return the final moment vector.
    pub fn run(
        mut moments: Vec<Complex64>,
        gamma: f64,
        dt: f64,
        t_end: f64,
        truncation: Truncation,
    ) -> Result<Vec<Complex64>> {
        let n_steps = (t_end / dt).round() as usize;
        for _ in 0..n_steps {
            step(&mut moments, gamma, dt, truncation)?;
        }
        Ok(moments)
    }
}
