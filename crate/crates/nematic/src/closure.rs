//! Tier 2: closed evolution equations for the order parameter alone.
//!
//! Two dissipative flows for the first moment `n(z, t)`:
//!
//! * **maximal-entropy closure** — the first hierarchy row with the second
//!   moment slaved to the local equilibrium, `n^(2) = c(n)`:
//!   `d/dt n = -4 n + 2 [L n - c(n) conj(L n)]`, `L = eps^2 Lap + gamma`;
//! * **L2 potential flow** (Landau–de Gennes type) driven by the reduced
//!   energy alone: `d/dt n = (eps^2 / 2) Lap n - W'(r) n / (2 r)`.
//!
//! The closure flow is itself a gradient system: it equals
//! `4 [c(n) dE/dn - dE/dconj(n)]` with the *same* discrete Laplacian, an
//! identity [`gradient_form_rhs`] reproduces to roundoff. Near `r = 0` the
//! closure coefficient and the potential slope switch to power series so both
//! flows stay finite through the isotropic state.

use num_complex::Complex64;

use crate::error::{NematicError, Result};
use crate::grid::{
    apply_elastic_operator, detect_vortices, reduced_energy, ComplexField, Grid2D,
};
use crate::specfun::{lambda_of, NematicParams};

/// Which tier-2 flow to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosureFlow {
    /// First hierarchy row closed through the local equilibrium family.
    MaximalEntropy,
    /// Plain L2 gradient flow of the reduced energy.
    LandauDeGennes,
}

/// Configuration of a tier-2 run.
#[derive(Debug, Clone)]
pub struct ClosureConfig {
    pub params: NematicParams,
    pub grid: Grid2D,
    pub flow: ClosureFlow,
    pub dt: f64,
    pub t_end: f64,
    /// `true`: evolve on the slow clock (rates divided by `eps^2`).
    pub rescaled_time: bool,
    /// Store a state every this many steps (0 = only first and last).
    pub output_every: usize,
    /// Record a diagnostics row every this many steps.
    pub diagnostics_every: usize,
}

impl ClosureConfig {
    fn time_scale(&self) -> f64 {
        if self.rescaled_time {
            self.params.epsilon * self.params.epsilon
        } else {
            1.0
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.t_end >= 0.0) {
            return Err(NematicError::InvalidConfig(format!(
                "need dt > 0 and t_end >= 0 (got dt = {}, t_end = {})",
                self.dt, self.t_end
            )));
        }
        if self.diagnostics_every == 0 {
            return Err(NematicError::InvalidConfig("diagnostics_every must be >= 1".into()));
        }
        // explicit Euler stability: elastic CFL plus reaction-rate headroom,
        // with a factor-2 safety margin
        let eps2 = self.params.epsilon * self.params.epsilon;
        let rate = 16.0 * eps2 / (self.grid.h * self.grid.h) + 2.0 * self.params.gamma + 4.0;
        let dt_max = self.time_scale() / rate;
        if self.dt > dt_max {
            return Err(NematicError::InvalidConfig(format!(
                "dt = {:.3e} exceeds the explicit stability bound {:.3e}",
                self.dt, dt_max
            )));
        }
        Ok(())
    }
}

/// Closure coefficient `c(n) = (n^2 / r^2) (1 - 2r / Lambda(r))`: the second
/// equilibrium moment as a function of the first. Below `r = 1e-3` the direct
/// form cancels (`Lambda - 2r = r^3` falls under the root-finder tolerance),
/// so the series `c = n^2 (1/2 + r^2/6)` takes over; its omitted term is
/// O(r^4) relative, ~1e-12 at the switch.
pub fn closure_coefficient(n: Complex64) -> Result<Complex64> {
    let r = n.norm();
    if r < 1e-3 {
        return Ok(n * n * (0.5 + r * r / 6.0));
    }
    let lambda = lambda_of(r)?;
    Ok(n * n / (r * r) * (1.0 - 2.0 * r / lambda))
}

/// Potential slope over radius, `W'(r) / r = Lambda(r)/r - gamma`, continued
/// through `r = 0` by the series `Lambda/r = 2 + r^2 + (5/6) r^4` (same
/// switch point as [`closure_coefficient`] and for the same reason).
fn potential_slope_over_r(r: f64, gamma: f64) -> Result<f64> {
    if r < 1e-3 {
        let r2 = r * r;
        return Ok(2.0 + r2 + 5.0 / 6.0 * r2 * r2 - gamma);
    }
    Ok(lambda_of(r)? / r - gamma)
}

/// Right-hand side of the maximal-entropy closure flow (fast clock). Boundary
/// rows are zero: the boundary is pinned.
pub fn closure_rhs(n: &ComplexField, params: &NematicParams) -> Result<ComplexField> {
    let g = &n.grid;
    let ln = apply_elastic_operator(n, params);
    let mut out = ComplexField::constant(g, Complex64::new(0.0, 0.0));
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let idx = g.idx(i, j);
            let v = n.values[idx];
            let l = ln.values[idx];
            let c = closure_coefficient(v)?;
            out.values[idx] = -4.0 * v + 2.0 * (l - c * l.conj());
        }
    }
    Ok(out)
}

/// Right-hand side of the L2 potential flow (fast clock): the negative
/// variational derivative of the reduced energy under the same discrete
/// Laplacian. Boundary rows are zero.
pub fn ldg_rhs(n: &ComplexField, params: &NematicParams) -> Result<ComplexField> {
    let g = &n.grid;
    let eps2 = params.epsilon * params.epsilon;
    let h2 = g.h * g.h;
    let mut out = ComplexField::constant(g, Complex64::new(0.0, 0.0));
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let idx = g.idx(i, j);
            let v = n.values[idx];
            let lap = (n.get(i + 1, j) + n.get(i - 1, j) + n.get(i, j + 1) + n.get(i, j - 1)
                - 4.0 * v)
                / h2;
            let slope = potential_slope_over_r(v.norm(), params.gamma)?;
            out.values[idx] = 0.5 * eps2 * lap - 0.5 * slope * v;
        }
    }
    Ok(out)
}

/// The closure flow written as a metric-weighted energy gradient,
/// `4 [c(n) dE/dn - dE/dconj(n)]`. Algebraically identical to
/// [`closure_rhs`]; kept separate so the identity can be checked numerically.
pub fn gradient_form_rhs(n: &ComplexField, params: &NematicParams) -> Result<ComplexField> {
    let g = &n.grid;
    let descent = ldg_rhs(n, params)?; // -dE/dconj(n)
    let mut out = ComplexField::constant(g, Complex64::new(0.0, 0.0));
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let idx = g.idx(i, j);
            let d = descent.values[idx];
            let c = closure_coefficient(n.values[idx])?;
            // dE/dn = conj(dE/dconj n) = -conj(d)
            out.values[idx] = 4.0 * (d - c * d.conj());
        }
    }
    Ok(out)
}

fn flow_rhs(n: &ComplexField, cfg: &ClosureConfig) -> Result<ComplexField> {
    match cfg.flow {
        ClosureFlow::MaximalEntropy => closure_rhs(n, &cfg.params),
        ClosureFlow::LandauDeGennes => ldg_rhs(n, &cfg.params),
    }
}

fn pin_boundary(n: &mut ComplexField, cfg: &ClosureConfig) {
    let path = cfg.grid.boundary_path();
    for (p, &(i, j)) in path.iter().enumerate() {
        n.set(i, j, Complex64::from_polar(cfg.params.r_eq, cfg.grid.boundary_psi[p]));
    }
}

/// One explicit Euler step of the selected flow with the boundary re-pinned.
pub fn step_closure(n: &ComplexField, cfg: &ClosureConfig) -> Result<ComplexField> {
    cfg.validate()?;
    if !n.grid.same_shape(&cfg.grid) {
        return Err(NematicError::GridMismatch("state grid does not match config grid".into()));
    }
    let rhs = flow_rhs(n, cfg)?;
    let dt_eff = cfg.dt / cfg.time_scale();
    let mut next = n.clone();
    for (v, r) in next.values.iter_mut().zip(&rhs.values) {
        *v += dt_eff * r;
    }
    pin_boundary(&mut next, cfg);
    let m = next.max_abs();
    if m > 1.0 + 1e-6 {
        return Err(NematicError::Instability { mode: 1, max_abs: m });
    }
    Ok(next)
}

/// One row of tier-2 run diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct ClosureDiagnosticsRow {
    pub t: f64,
    pub e_reduced: f64,
    pub n_vortices: usize,
}

/// Output of a tier-2 run.
#[derive(Debug, Clone)]
pub struct ClosureTrajectory {
    pub diagnostics: Vec<ClosureDiagnosticsRow>,
    pub state_times: Vec<f64>,
    pub states: Vec<ComplexField>,
}

impl ClosureTrajectory {
    pub fn final_state(&self) -> &ComplexField {
        self.states.last().expect("trajectory stores at least the initial state")
    }
}

/// Integrate the selected flow. Recording cadence mirrors the tier-1 runner:
/// diagnostics at `t = 0`, every `diagnostics_every`-th step and the final
/// step; states at `t = 0`, every `output_every`-th step and the final step.
pub fn run_closure(initial: ComplexField, cfg: &ClosureConfig) -> Result<ClosureTrajectory> {
    cfg.validate()?;
    if !initial.grid.same_shape(&cfg.grid) {
        return Err(NematicError::GridMismatch("initial grid does not match config grid".into()));
    }
    let n_steps = (cfg.t_end / cfg.dt).round().max(0.0) as usize;
    let mut state = initial;
    pin_boundary(&mut state, cfg);
    let mut traj = ClosureTrajectory {
        diagnostics: Vec::new(),
        state_times: vec![0.0],
        states: vec![state.clone()],
    };
    let record = |state: &ComplexField, t: f64, traj: &mut ClosureTrajectory| -> Result<()> {
        traj.diagnostics.push(ClosureDiagnosticsRow {
            t,
            e_reduced: reduced_energy(state, &cfg.params)?,
            n_vortices: detect_vortices(state).len(),
        });
        Ok(())
    };
    record(&state, 0.0, &mut traj)?;
    for step in 1..=n_steps {
        state = step_closure(&state, cfg)?;
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
