//! Tier 3: asymptotic vortex dynamics and phase evolution.
//!
//! In the small-core limit a tempered state is described by vortex positions
//! `z_k` with degrees `d_k = ±1` and a slowly varying phase `phi`. The vortex
//! positions obey the gradient flow of a renormalized interaction potential
//! `U` whose boundary part couples the vortices to the Dirichlet phase data
//! `psi` through contour integrals over a polygonal discretization of the
//! domain boundary:
//!
//! ```text
//! U = -pi sum_{j != k} d_k d_j ln|z_k - z_j|
//!     + sum_k d_k  oint ln|z - z_k| d psi
//!     - 1/2 sum_{j,k} d_k d_j oint ln|z - z_k| d arg(z - z_j)
//! ```
//!
//! Contour integrals use the midpoint rule with the phase measures `d psi`,
//! `d arg` taken as wrapped per-segment increments. The gradient
//! `d/d conj(z_k) U` is assembled from the same closed forms that define the
//! quadrature, so it agrees with finite differences of `U` to quadrature
//! roundoff rather than O(h) discretization error.
//!
//! The slow phase relaxes by a heat flow with diffusivity `4 / (|Omega|
//! tau_gamma)` toward the harmonic extension of its boundary trace
//! `phi = psi - sum_k d_k arg(z - z_k)`; both solvers live here, as does the
//! mobility diagnostic recovering the `pi tau_gamma / 8` coefficient of the
//! logarithmically divergent vortex friction.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::error::{NematicError, Result};
use crate::grid::{wrap_angle, Grid2D, RealField};
use crate::specfun::{bessel_i, lambda_of, NematicParams};

/// Real phase field on a grid (alias kept for call-site clarity).
pub type PhaseField = RealField;

// ---------------------------------------------------------------------------
// boundary polygon
// ---------------------------------------------------------------------------

/// Closed polygonal discretization of the domain boundary, counterclockwise,
/// with vertices at uniform arclength.
#[derive(Debug, Clone)]
pub struct BoundaryCurve {
    pub vertices: Vec<Complex64>,
}

impl BoundaryCurve {
    /// Rectangle of extents `lx x ly` centered at the origin, walked
    /// counterclockwise from the lower-left corner.
    pub fn rectangle(lx: f64, ly: f64, m_b: usize) -> Result<Self> {
        if !(lx > 0.0) || !(ly > 0.0) {
            return Err(NematicError::InvalidConfig("rectangle extents must be positive".into()));
        }
        if m_b < 8 {
            return Err(NematicError::InvalidConfig(format!(
                "need at least 8 boundary points, got {m_b}"
            )));
        }
        let perimeter = 2.0 * (lx + ly);
        let vertices = (0..m_b)
            .map(|p| {
                let mut s = p as f64 * perimeter / m_b as f64;
                if s < lx {
                    return Complex64::new(-lx / 2.0 + s, -ly / 2.0);
                }
                s -= lx;
                if s < ly {
                    return Complex64::new(lx / 2.0, -ly / 2.0 + s);
                }
                s -= ly;
                if s < lx {
                    return Complex64::new(lx / 2.0 - s, ly / 2.0);
                }
                s -= lx;
                Complex64::new(-lx / 2.0, ly / 2.0 - s)
            })
            .collect();
        Ok(BoundaryCurve { vertices })
    }

    /// Circle of the given radius centered at the origin.
    pub fn disk(radius: f64, m_b: usize) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(NematicError::InvalidConfig("disk radius must be positive".into()));
        }
        if m_b < 8 {
            return Err(NematicError::InvalidConfig(format!(
                "need at least 8 boundary points, got {m_b}"
            )));
        }
        let vertices = (0..m_b)
            .map(|p| Complex64::from_polar(radius, TAU * p as f64 / m_b as f64))
            .collect();
        Ok(BoundaryCurve { vertices })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Arclength spacing between consecutive vertices (midpoint-rule cell
    /// size; for the rectangle this is the arclength step, slightly above the
    /// chord length of corner-crossing segments).
    pub fn segment_length(&self) -> f64 {
        let m = self.vertices.len();
        (0..m)
            .map(|p| (self.vertices[(p + 1) % m] - self.vertices[p]).norm())
            .fold(0.0, f64::max)
    }

    /// Segment midpoints (quadrature nodes).
    pub fn midpoints(&self) -> Vec<Complex64> {
        let m = self.vertices.len();
        (0..m).map(|p| 0.5 * (self.vertices[p] + self.vertices[(p + 1) % m])).collect()
    }

    /// Sample a pointwise angle function at the vertices.
    pub fn sample(&self, f: impl Fn(Complex64) -> f64) -> Vec<f64> {
        self.vertices.iter().map(|&v| f(v)).collect()
    }

    /// Distance from a point to the polygon.
    pub fn distance(&self, z: Complex64) -> f64 {
        let m = self.vertices.len();
        (0..m)
            .map(|p| {
                let a = self.vertices[p];
                let b = self.vertices[(p + 1) % m];
                let ab = b - a;
                let t = ((z - a).re * ab.re + (z - a).im * ab.im) / ab.norm_sqr();
                let t = t.clamp(0.0, 1.0);
                (z - (a + t * ab)).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

// ---------------------------------------------------------------------------
// vortex configuration
// ---------------------------------------------------------------------------

/// Vortex positions and degrees together with the boundary data that closes
/// the renormalized potential.
#[derive(Debug, Clone)]
pub struct VortexConfiguration {
    pub positions: Vec<Complex64>,
    pub degrees: Vec<i32>,
    pub curve: BoundaryCurve,
    /// Dirichlet phase data sampled at the polygon vertices.
    pub boundary_psi: Vec<f64>,
    /// `true`: drop all boundary contour integrals (whole-plane pair law).
    pub free_space: bool,
}

impl VortexConfiguration {
    /// Whole-plane configuration: pair interactions only.
    pub fn free_space(positions: Vec<Complex64>, degrees: Vec<i32>) -> Result<Self> {
        let cfg = VortexConfiguration {
            positions,
            degrees,
            curve: BoundaryCurve::rectangle(1.0, 1.0, 8)?,
            boundary_psi: vec![0.0; 8],
            free_space: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Bounded-domain configuration with boundary phase data at the polygon
    /// vertices.
    pub fn bounded(
        positions: Vec<Complex64>,
        degrees: Vec<i32>,
        curve: BoundaryCurve,
        boundary_psi: Vec<f64>,
    ) -> Result<Self> {
        let cfg =
            VortexConfiguration { positions, degrees, curve, boundary_psi, free_space: false };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Winding number of the boundary phase data (sum of wrapped increments
    /// over 2 pi).
    pub fn psi_winding(&self) -> i32 {
        let m = self.boundary_psi.len();
        let total: f64 = (0..m)
            .map(|p| wrap_angle(self.boundary_psi[(p + 1) % m] - self.boundary_psi[p]))
            .sum();
        (total / TAU).round() as i32
    }

    pub fn total_degree(&self) -> i32 {
        self.degrees.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.positions.len() != self.degrees.len() {
            return Err(NematicError::InvalidVortexData(format!(
                "{} positions vs {} degrees",
                self.positions.len(),
                self.degrees.len()
            )));
        }
        if let Some(&d) = self.degrees.iter().find(|&&d| d != 1 && d != -1) {
            return Err(NematicError::InvalidVortexData(format!("degree {d} outside {{+1, -1}}")));
        }
        for a in 0..self.positions.len() {
            for b in a + 1..self.positions.len() {
                if (self.positions[a] - self.positions[b]).norm() < 1e-12 {
                    return Err(NematicError::InvalidVortexData(format!(
                        "vortices {a} and {b} coincide"
                    )));
                }
            }
        }
        if !self.free_space {
            if self.boundary_psi.len() != self.curve.len() {
                return Err(NematicError::InvalidVortexData(format!(
                    "{} psi samples vs {} polygon vertices",
                    self.boundary_psi.len(),
                    self.curve.len()
                )));
            }
            let margin = 3.0 * self.curve.segment_length();
            for (k, &z) in self.positions.iter().enumerate() {
                let d = self.curve.distance(z);
                if d < margin {
                    return Err(NematicError::InvalidVortexData(format!(
                        "vortex {k} is {d:.3e} from the boundary (needs >= {margin:.3e})"
                    )));
                }
            }
            let winding = self.psi_winding();
            let total = self.total_degree();
            if winding != total {
                return Err(NematicError::DegreeMismatch { winding, total_degree: total });
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// potential and gradient
// ---------------------------------------------------------------------------

/// Wrapped per-segment increments of `psi` over the polygon.
fn psi_increments(cfg: &VortexConfiguration) -> Vec<f64> {
    let m = cfg.boundary_psi.len();
    (0..m).map(|p| wrap_angle(cfg.boundary_psi[(p + 1) % m] - cfg.boundary_psi[p])).collect()
}

/// Wrapped per-segment increments of `arg(z - z_j)` over the polygon.
fn arg_increments(curve: &BoundaryCurve, z_j: Complex64) -> Vec<f64> {
    let m = curve.len();
    (0..m)
        .map(|p| {
            let a = curve.vertices[p] - z_j;
            let b = curve.vertices[(p + 1) % m] - z_j;
            wrap_angle(b.arg() - a.arg())
        })
        .collect()
}

/// Renormalized multi-vortex potential (see module docs for the formula).
pub fn multivortex_potential(cfg: &VortexConfiguration) -> Result<f64> {
    cfg.validate()?;
    let n = cfg.positions.len();
    let mut u = 0.0;
    for k in 0..n {
        for j in 0..n {
            if j != k {
                u -= PI
                    * (cfg.degrees[k] * cfg.degrees[j]) as f64
                    * (cfg.positions[k] - cfg.positions[j]).norm().ln();
            }
        }
    }
    if cfg.free_space {
        return Ok(u);
    }
    let mids = cfg.curve.midpoints();
    let dpsi = psi_increments(cfg);
    for k in 0..n {
        let dk = cfg.degrees[k] as f64;
        for (p, &m) in mids.iter().enumerate() {
            u += dk * (m - cfg.positions[k]).norm().ln() * dpsi[p];
        }
    }
    for j in 0..n {
        let darg = arg_increments(&cfg.curve, cfg.positions[j]);
        for k in 0..n {
            let w = -0.5 * (cfg.degrees[k] * cfg.degrees[j]) as f64;
            for (p, &m) in mids.iter().enumerate() {
                u += w * (m - cfg.positions[k]).norm().ln() * darg[p];
            }
        }
    }
    Ok(u)
}

/// Analytic gradient `d/d conj(z_k) U` for every vortex, assembled from the
/// closed-form derivatives of the quadrature itself:
/// `d/d conj(z_k) ln|w - z_k| = -1 / (2 conj(w - z_k))` and
/// `d/d conj(z_k) arg(w - z_k) = -i / (2 conj(w - z_k))`.
pub fn potential_gradient(cfg: &VortexConfiguration) -> Result<Vec<Complex64>> {
    cfg.validate()?;
    gradient_unchecked(cfg, &cfg.positions)
}

/// Gradient at explicit positions (used by the ODE stages, which step off the
/// validated initial configuration).
fn gradient_unchecked(
    cfg: &VortexConfiguration,
    positions: &[Complex64],
) -> Result<Vec<Complex64>> {
    let n = positions.len();
    for a in 0..n {
        for b in a + 1..n {
            if (positions[a] - positions[b]).norm() < 1e-12 {
                return Err(NematicError::InvalidVortexData(format!(
                    "vortices {a} and {b} coincide during gradient evaluation"
                )));
            }
        }
    }
    let mut grad = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let dk = cfg.degrees[k] as f64;
        for j in 0..n {
            if j != k {
                let dj = cfg.degrees[j] as f64;
                grad[k] -= PI * dk * dj / (positions[k] - positions[j]).conj();
            }
        }
    }
    if cfg.free_space {
        return Ok(grad);
    }
    let mids = cfg.curve.midpoints();
    let dpsi = psi_increments(cfg);
    let m_b = mids.len();
    // d/d conj(z_k) of the single boundary sum
    for k in 0..n {
        let dk = cfg.degrees[k] as f64;
        for p in 0..m_b {
            grad[k] += dk * dpsi[p] * (-0.5) / (mids[p] - positions[k]).conj();
        }
    }
    // d/d conj(z_k) of the double boundary sum: the ln|..| slot ...
    for j in 0..n {
        let darg = arg_increments(&cfg.curve, positions[j]);
        let dj = cfg.degrees[j] as f64;
        for k in 0..n {
            let w = -0.5 * cfg.degrees[k] as f64 * dj;
            for p in 0..m_b {
                grad[k] += w * darg[p] * (-0.5) / (mids[p] - positions[k]).conj();
            }
        }
    }
    // ... and the d arg(z - z_j) slot, by differentiating the wrapped
    // endpoint increments
    for j in 0..n {
        let dj = cfg.degrees[j] as f64;
        for k in 0..n {
            let w = -0.5 * cfg.degrees[k] as f64 * dj;
            for p in 0..m_b {
                let a = (cfg.curve.vertices[p] - positions[j]).conj();
                let b = (cfg.curve.vertices[(p + 1) % m_b] - positions[j]).conj();
                let d_darg = Complex64::new(0.0, -0.5) * (1.0 / b - 1.0 / a);
                grad[j] += w * (mids[p] - positions[k]).norm().ln() * d_darg;
            }
        }
    }
    Ok(grad)
}

// ---------------------------------------------------------------------------
// vortex ODE
// ---------------------------------------------------------------------------

/// Why a vortex run stopped early.
#[derive(Debug, Clone, PartialEq)]
pub enum HaltStatus {
    Completed,
    /// Two vortices within four current step displacements of each other.
    PairApproach { t: f64, first: usize, second: usize, distance: f64 },
    /// A vortex within three polygon segment lengths of the boundary.
    BoundaryApproach { t: f64, vortex: usize, distance: f64 },
}

impl HaltStatus {
    pub fn is_halt(&self) -> bool {
        !matches!(self, HaltStatus::Completed)
    }
}

/// Sampled vortex trajectory on the slow clock.
#[derive(Debug, Clone)]
pub struct VortexTrajectory {
    pub times: Vec<f64>,
    /// `positions[s][k]`: vortex `k` at sample `s`.
    pub positions: Vec<Vec<Complex64>>,
    pub potential: Vec<f64>,
    pub degrees: Vec<i32>,
    pub status: HaltStatus,
}

impl VortexTrajectory {
    pub fn final_positions(&self) -> &[Complex64] {
        self.positions.last().expect("at least the initial sample is stored")
    }
}

/// Integrate `d/dt z_k = -d/d conj(z_k) U` with the classical 4th-order
/// scheme, recording every step. Halts (status, not error) when a vortex pair
/// comes within `4 dt max|dz/dt|` or a vortex drifts within three segment
/// lengths of the boundary.
pub fn run_vortex_dynamics(
    cfg: &VortexConfiguration,
    t_end: f64,
    dt: f64,
) -> Result<VortexTrajectory> {
    cfg.validate()?;
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return Err(NematicError::InvalidConfig(format!(
            "need dt > 0 and t_end >= 0 (got dt = {dt}, t_end = {t_end})"
        )));
    }
    let n_steps = (t_end / dt).round().max(0.0) as usize;
    let mut z = cfg.positions.clone();
    let mut traj = VortexTrajectory {
        times: vec![0.0],
        positions: vec![z.clone()],
        potential: vec![eval_potential_at(cfg, &z)?],
        degrees: cfg.degrees.clone(),
        status: HaltStatus::Completed,
    };
    let velocity = |pos: &[Complex64]| -> Result<Vec<Complex64>> {
        Ok(gradient_unchecked(cfg, pos)?.into_iter().map(|g| -g).collect())
    };
    for step in 0..n_steps {
        let t = step as f64 * dt;
        let k1 = velocity(&z)?;
        // halt checks use the current speed scale
        let speed = k1.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let scale = 4.0 * dt * speed;
        for a in 0..z.len() {
            for b in a + 1..z.len() {
                let d = (z[a] - z[b]).norm();
                if d < scale {
                    traj.status = HaltStatus::PairApproach { t, first: a, second: b, distance: d };
                    return Ok(traj);
                }
            }
        }
        if !cfg.free_space {
            let margin = 3.0 * cfg.curve.segment_length();
            for (k, &zk) in z.iter().enumerate() {
                let d = cfg.curve.distance(zk);
                if d < margin {
                    traj.status = HaltStatus::BoundaryApproach { t, vortex: k, distance: d };
                    return Ok(traj);
                }
            }
        }
        let zs: Vec<Complex64> = z.iter().zip(&k1).map(|(&p, &v)| p + 0.5 * dt * v).collect();
        let k2 = velocity(&zs)?;
        let zs: Vec<Complex64> = z.iter().zip(&k2).map(|(&p, &v)| p + 0.5 * dt * v).collect();
        let k3 = velocity(&zs)?;
        let zs: Vec<Complex64> = z.iter().zip(&k3).map(|(&p, &v)| p + dt * v).collect();
        let k4 = velocity(&zs)?;
        for i in 0..z.len() {
            z[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        traj.times.push(t + dt);
        traj.positions.push(z.clone());
        traj.potential.push(eval_potential_at(cfg, &z)?);
    }
    Ok(traj)
}

/// Potential at explicit positions (trajectory sampling; skips the placement
/// invariants which the halt checks supervise dynamically).
fn eval_potential_at(cfg: &VortexConfiguration, positions: &[Complex64]) -> Result<f64> {
    let moved = VortexConfiguration { positions: positions.to_vec(), ..cfg.clone() };
    let n = positions.len();
    let mut u = 0.0;
    for k in 0..n {
        for j in 0..n {
            if j != k {
                let d = (positions[k] - positions[j]).norm();
                if d < 1e-12 {
                    return Err(NematicError::InvalidVortexData(
                        "coincident vortices in potential evaluation".into(),
                    ));
                }
                u -= PI * (cfg.degrees[k] * cfg.degrees[j]) as f64 * d.ln();
            }
        }
    }
    if cfg.free_space {
        return Ok(u);
    }
    let mids = moved.curve.midpoints();
    let dpsi = psi_increments(&moved);
    for k in 0..n {
        let dk = moved.degrees[k] as f64;
        for (p, &m) in mids.iter().enumerate() {
            u += dk * (m - positions[k]).norm().ln() * dpsi[p];
        }
    }
    for j in 0..n {
        let darg = arg_increments(&moved.curve, positions[j]);
        for k in 0..n {
            let w = -0.5 * (moved.degrees[k] * moved.degrees[j]) as f64;
            for (p, &m) in mids.iter().enumerate() {
                u += w * (m - positions[k]).norm().ln() * darg[p];
            }
        }
    }
    Ok(u)
}

// ---------------------------------------------------------------------------
// phase field: harmonic extension and heat relaxation
// ---------------------------------------------------------------------------

/// Single-valued boundary trace `phi = psi - sum_k d_k arg(z - z_k)` along
/// the grid boundary path, built by accumulating wrapped increments. The
/// closure defect over the full loop must vanish (compatible degrees) within
/// 1e-8.
pub fn boundary_phase_trace(cfg: &VortexConfiguration, grid: &Grid2D) -> Result<Vec<f64>> {
    let path = grid.boundary_path();
    if grid.boundary_psi.len() != path.len() {
        return Err(NematicError::GridMismatch(
            "grid boundary phase samples not initialized".into(),
        ));
    }
    let winding = grid.boundary_winding();
    let total = cfg.total_degree();
    if winding != total {
        return Err(NematicError::DegreeMismatch { winding, total_degree: total });
    }
    for (k, &z) in cfg.positions.iter().enumerate() {
        if z.re.abs() >= grid.lx / 2.0 || z.im.abs() >= grid.ly / 2.0 {
            return Err(NematicError::InvalidVortexData(format!(
                "vortex {k} at {z} is not interior to the grid"
            )));
        }
    }
    let point = |p: usize| -> Complex64 {
        let (i, j) = path[p];
        grid.point(i, j)
    };
    let arg_sum = |z: Complex64| -> f64 {
        cfg.positions
            .iter()
            .zip(&cfg.degrees)
            .map(|(&zk, &d)| d as f64 * (z - zk).arg())
            .sum()
    };
    let m = path.len();
    let mut trace = Vec::with_capacity(m);
    let mut acc = grid.boundary_psi[0] - arg_sum(point(0));
    trace.push(acc);
    for p in 1..=m {
        let q = p % m;
        let prev = p - 1;
        let dpsi = wrap_angle(grid.boundary_psi[q] - grid.boundary_psi[prev]);
        let darg: f64 = cfg
            .positions
            .iter()
            .zip(&cfg.degrees)
            .map(|(&zk, &d)| d as f64 * wrap_angle((point(q) - zk).arg() - (point(prev) - zk).arg()))
            .sum();
        acc += dpsi - darg;
        if p < m {
            trace.push(acc);
        }
    }
    let defect = acc - trace[0];
    if defect.abs() > 1e-8 {
        return Err(NematicError::domain(
            "boundary phase trace",
            format!("trace fails to close (defect {defect:.3e}); incompatible data"),
        ));
    }
    Ok(trace)
}

/// Harmonic extension of the boundary phase trace: discrete `Lap phi = 0`
/// (5-point) solved by conjugate gradients to residual 1e-10.
pub fn solve_harmonic_phase(cfg: &VortexConfiguration, grid: &Grid2D) -> Result<PhaseField> {
    let trace = boundary_phase_trace(cfg, grid)?;
    let mut phi = RealField::constant(grid, 0.0);
    let path = grid.boundary_path();
    for (p, &(i, j)) in path.iter().enumerate() {
        phi.set(i, j, trace[p]);
    }
    solve_interior_laplace(&mut phi)?;
    Ok(phi)
}

/// In-place CG solve of the interior 5-point Laplace system with the current
/// boundary values as Dirichlet data.
fn solve_interior_laplace(phi: &mut RealField) -> Result<()> {
    let g = phi.grid.clone();
    let (nx, ny) = (g.nx, g.ny);
    let inx = nx - 2;
    let iny = ny - 2;
    let dim = inx * iny;
    let iidx = |i: usize, j: usize| (j - 1) * inx + (i - 1);
    // right-hand side: boundary contributions moved across the equals sign
    let mut b = vec![0.0f64; dim];
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let mut s = 0.0;
            for (di, dj) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
                let (pi, pj) = ((i as i64 + di) as usize, (j as i64 + dj) as usize);
                if g.is_boundary(pi, pj) {
                    s += phi.get(pi, pj);
                }
            }
            b[iidx(i, j)] = s;
        }
    }
    // A x = 4x - (interior neighbors)
    let apply = |x: &[f64], out: &mut [f64]| {
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let mut v = 4.0 * x[iidx(i, j)];
                if i > 1 {
                    v -= x[iidx(i - 1, j)];
                }
                if i < nx - 2 {
                    v -= x[iidx(i + 1, j)];
                }
                if j > 1 {
                    v -= x[iidx(i, j - 1)];
                }
                if j < ny - 2 {
                    v -= x[iidx(i, j + 1)];
                }
                out[iidx(i, j)] = v;
            }
        }
    };
    let dot = |a: &[f64], c: &[f64]| -> f64 { a.iter().zip(c).map(|(x, y)| x * y).sum() };
    let mut x = vec![0.0f64; dim];
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            x[iidx(i, j)] = phi.get(i, j); // warm start from the current interior
        }
    }
    let mut ax = vec![0.0f64; dim];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut p = r.clone();
    let mut rs = dot(&r, &r);
    let tol = 1e-10 * dot(&b, &b).sqrt().max(1.0);
    let max_iter = 20 * dim.max(100);
    let mut ap = vec![0.0f64; dim];
    let mut iter = 0;
    while rs.sqrt() > tol {
        if iter >= max_iter {
            return Err(NematicError::SolverFailure {
                context: "harmonic phase".into(),
                message: format!("CG stalled at residual {:.3e} after {iter} iterations", rs.sqrt()),
            });
        }
        apply(&p, &mut ap);
        let alpha = rs / dot(&p, &ap);
        for i in 0..dim {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rs_new = dot(&r, &r);
        let beta = rs_new / rs;
        rs = rs_new;
        for i in 0..dim {
            p[i] = r[i] + beta * p[i];
        }
        iter += 1;
    }
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            phi.set(i, j, x[iidx(i, j)]);
        }
    }
    Ok(())
}

/// One explicit heat step `phi += dt D0 Lap phi` with diffusivity
/// `D0 = 4 / (|Omega| tau_gamma)` and the boundary held at the phase trace.
pub fn step_heat_phase(
    phi: &PhaseField,
    cfg: &VortexConfiguration,
    params: &NematicParams,
    dt: f64,
) -> Result<PhaseField> {
    if params.tau_gamma <= 0.0 {
        return Err(NematicError::domain(
            "heat phase step",
            format!("mobility scale vanishes at gamma = {} <= 2", params.gamma),
        ));
    }
    let g = &phi.grid;
    let area = g.lx * g.ly;
    let d0 = 4.0 / (area * params.tau_gamma);
    let cfl = dt * d0 * 4.0 / (g.h * g.h);
    if cfl > 1.0 {
        return Err(NematicError::InvalidConfig(format!(
            "heat step dt = {dt:.3e} violates the explicit limit (CFL number {cfl:.2})"
        )));
    }
    let trace = boundary_phase_trace(cfg, g)?;
    let mut next = phi.clone();
    let h2 = g.h * g.h;
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let lap = (phi.get(i + 1, j) + phi.get(i - 1, j) + phi.get(i, j + 1)
                + phi.get(i, j - 1)
                - 4.0 * phi.get(i, j))
                / h2;
            next.set(i, j, phi.get(i, j) + dt * d0 * lap);
        }
    }
    for (p, &(i, j)) in g.boundary_path().iter().enumerate() {
        next.set(i, j, trace[p]);
    }
    Ok(next)
}

// ---------------------------------------------------------------------------
// mobility log-divergence diagnostic
// ---------------------------------------------------------------------------

/// Vortex-core friction integral
/// `(1/16) int [1 - 1/I0^2(Lambda(r_hat))] / |z|^2 dv` over the unit square
/// with the surrogate core profile `r_hat = r_eq min(1, |z|/eps)`, by the
/// midpoint rule at cell centers (which never touch the core singularity).
pub fn mobility_integral(params: &NematicParams, eps: f64, h: f64) -> Result<f64> {
    if params.tau_gamma <= 0.0 {
        return Err(NematicError::domain(
            "mobility integral",
            format!("mobility scale vanishes at gamma = {} <= 2", params.gamma),
        ));
    }
    if !(eps > 0.0) || eps >= 0.5 {
        return Err(NematicError::InvalidConfig(format!("core size eps = {eps} outside (0, 0.5)")));
    }
    if h > eps / 8.0 * (1.0 + 1e-12) {
        return Err(NematicError::InvalidConfig(format!(
            "cell size h = {h:.3e} under-resolves the core (needs h <= eps/8 = {:.3e})",
            eps / 8.0
        )));
    }
    let n = (1.0 / h).round() as usize;
    let hc = 1.0 / n as f64;
    let mut sum = 0.0;
    for j in 0..n {
        for i in 0..n {
            let x = -0.5 + (i as f64 + 0.5) * hc;
            let y = -0.5 + (j as f64 + 0.5) * hc;
            let rho2 = x * x + y * y;
            let r_hat = params.r_eq * (rho2.sqrt() / eps).min(1.0);
            sum += mobility_weight(r_hat)? / (16.0 * rho2);
        }
    }
    Ok(sum * hc * hc)
}

/// Pointwise mobility weight `1 - 1/I0^2(Lambda(r))`; quadratic in `r` near
/// the isotropic state, which is what makes the core integrable.
pub fn mobility_weight(r: f64) -> Result<f64> {
    if r == 0.0 {
        return Ok(0.0);
    }
    let i0 = bessel_i(0, lambda_of(r)?)?;
    Ok(1.0 - 1.0 / (i0 * i0))
}

/// Least-squares slope of the mobility integral against `-ln eps` over a
/// decreasing dyadic list of core sizes; the expected value is
/// `pi tau_gamma / 8`.
pub fn mobility_log_divergence(params: &NematicParams, eps_list: &[f64]) -> Result<f64> {
    if eps_list.len() < 2 {
        return Err(NematicError::InvalidConfig("need at least two core sizes for a slope".into()));
    }
    for w in eps_list.windows(2) {
        let ratio = w[1] / w[0];
        if !(w[1] > 0.0) || (ratio - 0.5).abs() > 5e-3 {
            return Err(NematicError::InvalidConfig(format!(
                "core sizes must form a decreasing dyadic sequence (ratio {ratio:.4})"
            )));
        }
    }
    let mut xs = Vec::with_capacity(eps_list.len());
    let mut ys = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let n = (8.0 / eps).ceil() as usize;
        xs.push(-eps.ln());
        ys.push(mobility_integral(params, eps, 1.0 / n as f64)?);
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(cov / var)
}
