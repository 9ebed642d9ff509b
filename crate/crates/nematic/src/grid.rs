//! Uniform square-cell grids, complex/real fields, the elastic operator, the
//! reduced order-parameter energy, equilibrium moments, relative entropy, and
//! winding-number vortex detection.
//!
//! The rectangular domain is centered at the origin and carries node-sampled
//! fields including the boundary nodes. Boundary conditions enter through the
//! director angle `psi` sampled along the boundary path; solvers pin boundary
//! values and evolve the interior.

use num_complex::Complex64;
use std::f64::consts::{PI, TAU};

use crate::error::{NematicError, Result};
use crate::specfun::{
    bessel_ratio_to_i0, lambda_of, ln_bessel_i0, w_gamma, NematicParams,
};

/// Wrap an angle difference into `(-pi, pi]`.
pub fn wrap_angle(x: f64) -> f64 {
    let w = x.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Uniform node-centered grid over the rectangle
/// `[-lx/2, lx/2] x [-ly/2, ly/2]` with square cells of side `h`.
///
/// `boundary_psi` holds the boundary director angle sampled at the boundary
/// nodes in counterclockwise order starting from the bottom-left corner.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub h: f64,
    pub boundary_psi: Vec<f64>,
}

impl Grid2D {
    /// Construct a grid; cells must be square (`lx/(nx-1) = ly/(ny-1)`) and
    /// there must be at least one interior node in each direction.
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(NematicError::InvalidConfig(format!(
                "grid needs nx, ny >= 3 (got {nx} x {ny})"
            )));
        }
        if !(lx > 0.0) || !(ly > 0.0) {
            return Err(NematicError::InvalidConfig(format!(
                "grid extents must be positive (got {lx} x {ly})"
            )));
        }
        let hx = lx / (nx - 1) as f64;
        let hy = ly / (ny - 1) as f64;
        if ((hx - hy) / hx).abs() > 1e-9 {
            return Err(NematicError::InvalidConfig(format!(
                "cells must be square: lx/(nx-1) = {hx}, ly/(ny-1) = {hy}"
            )));
        }
        let n_boundary = 2 * (nx - 1) + 2 * (ny - 1);
        Ok(Grid2D { nx, ny, lx, ly, h: hx, boundary_psi: vec![0.0; n_boundary] })
    }

    /// Linear index of node `(i, j)`, x-fastest.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// x-coordinate of column `i`.
    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        -0.5 * self.lx + i as f64 * self.h
    }

    /// y-coordinate of row `j`.
    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        -0.5 * self.ly + j as f64 * self.h
    }

    /// Node position as a complex number `x + i y`.
    #[inline]
    pub fn point(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(self.x(i), self.y(j))
    }

    /// Whether node `(i, j)` lies on the boundary.
    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.nx - 1 || j == self.ny - 1
    }

    /// Trapezoidal quadrature weight of node `(i, j)` (integrates to the
    /// domain area).
    pub fn trapezoid_weight(&self, i: usize, j: usize) -> f64 {
        let wx = if i == 0 || i == self.nx - 1 { 0.5 } else { 1.0 };
        let wy = if j == 0 || j == self.ny - 1 { 0.5 } else { 1.0 };
        wx * wy * self.h * self.h
    }

    /// Boundary nodes in counterclockwise order starting at `(0, 0)`.
    pub fn boundary_path(&self) -> Vec<(usize, usize)> {
        let (nx, ny) = (self.nx, self.ny);
        let mut path = Vec::with_capacity(2 * (nx - 1) + 2 * (ny - 1));
        for i in 0..nx - 1 {
            path.push((i, 0));
        }
        for j in 0..ny - 1 {
            path.push((nx - 1, j));
        }
        for i in (1..nx).rev() {
            path.push((i, ny - 1));
        }
        for j in (1..ny).rev() {
            path.push((0, j));
        }
        path
    }

    /// Install explicit boundary-angle samples (must match the boundary path
    /// length).
    pub fn set_boundary_psi_samples(&mut self, samples: Vec<f64>) -> Result<()> {
        if samples.len() != self.boundary_psi.len() {
            return Err(NematicError::InvalidConfig(format!(
                "boundary psi needs {} samples, got {}",
                self.boundary_psi.len(),
                samples.len()
            )));
        }
        self.boundary_psi = samples;
        Ok(())
    }

    /// Constant boundary angle (zero winding).
    pub fn set_boundary_psi_uniform(&mut self, theta0: f64) {
        for v in self.boundary_psi.iter_mut() {
            *v = theta0;
        }
    }

    /// Boundary angle `d * arg(z)` relative to the domain center.
    pub fn set_boundary_psi_winding(&mut self, d: i32) {
        let path = self.boundary_path();
        for (p, (i, j)) in path.into_iter().enumerate() {
            self.boundary_psi[p] = d as f64 * self.point(i, j).arg();
        }
    }

    /// Boundary angle `sum_k d_k arg(z - z_k)` anchored at the given points.
    pub fn set_boundary_psi_anchored(&mut self, positions: &[Complex64], degrees: &[i32]) {
        let path = self.boundary_path();
        for (p, (i, j)) in path.into_iter().enumerate() {
            let z = self.point(i, j);
            self.boundary_psi[p] = positions
                .iter()
                .zip(degrees)
                .map(|(zk, d)| *d as f64 * (z - zk).arg())
                .sum();
        }
    }

    /// Total winding of the boundary angle in units of `2 pi` (always an
    /// integer because it is computed from wrapped increments of a closed
    /// loop).
    pub fn boundary_winding(&self) -> i32 {
        let m = self.boundary_psi.len();
        let total: f64 = (0..m)
            .map(|p| wrap_angle(self.boundary_psi[(p + 1) % m] - self.boundary_psi[p]))
            .sum();
        (total / TAU).round() as i32
    }

    /// Geometric compatibility (same node layout and extents).
    pub fn same_shape(&self, other: &Grid2D) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && (self.lx - other.lx).abs() < 1e-12 * self.lx.abs().max(1.0)
            && (self.ly - other.ly).abs() < 1e-12 * self.ly.abs().max(1.0)
    }
}

/// Complex scalar field sampled on the nodes of a [`Grid2D`], x-fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub grid: Grid2D,
    pub values: Vec<Complex64>,
}

impl ComplexField {
    /// Constant field.
    pub fn constant(grid: &Grid2D, value: Complex64) -> Self {
        ComplexField { grid: grid.clone(), values: vec![value; grid.nx * grid.ny] }
    }

    /// Build from a function of the node coordinates.
    pub fn from_fn(grid: &Grid2D, mut f: impl FnMut(f64, f64) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(grid.nx * grid.ny);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(f(grid.x(i), grid.y(j)));
            }
        }
        ComplexField { grid: grid.clone(), values }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        let k = self.grid.idx(i, j);
        self.values[k] = v;
    }

    /// Pointwise map keeping the grid.
    pub fn map(&self, mut f: impl FnMut(Complex64) -> Complex64) -> Self {
        ComplexField {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise map with access to the node coordinates.
    pub fn map_with_coords(&self, mut f: impl FnMut(f64, f64, Complex64) -> Complex64) -> Self {
        let mut out = self.clone();
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                let k = self.grid.idx(i, j);
                out.values[k] = f(self.grid.x(i), self.grid.y(j), self.values[k]);
            }
        }
        out
    }

    /// Complex conjugate field.
    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    /// Largest magnitude over all nodes.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Trapezoid-weighted L2 distance to another field on the same grid.
    pub fn l2_distance(&self, other: &ComplexField) -> Result<f64> {
        if !self.grid.same_shape(&other.grid) {
            return Err(NematicError::GridMismatch("l2_distance between different grids".into()));
        }
        let mut acc = 0.0;
        for j in 0..self.grid.ny {
            for i in 0..self.grid.nx {
                let k = self.grid.idx(i, j);
                acc += self.grid.trapezoid_weight(i, j) * (self.values[k] - other.values[k]).norm_sqr();
            }
        }
        Ok(acc.sqrt())
    }

    /// Pin the boundary nodes to `r * e^{i m psi}` using the grid's boundary
    /// angle samples (`m` is the phase multiple; the first moment uses 1).
    pub fn pin_boundary(&mut self, r: f64, m: i32) {
        let path = self.grid.boundary_path();
        let psi = self.grid.boundary_psi.clone();
        for (p, (i, j)) in path.into_iter().enumerate() {
            self.set(i, j, Complex64::from_polar(r, m as f64 * psi[p]));
        }
    }
}

/// Real scalar field on a [`Grid2D`] (phase fields and diagnostics).
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    pub grid: Grid2D,
    pub values: Vec<f64>,
}

impl RealField {
    pub fn constant(grid: &Grid2D, value: f64) -> Self {
        RealField { grid: grid.clone(), values: vec![value; grid.nx * grid.ny] }
    }

    pub fn from_fn(grid: &Grid2D, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.nx * grid.ny);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(f(grid.x(i), grid.y(j)));
            }
        }
        RealField { grid: grid.clone(), values }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.grid.idx(i, j);
        self.values[k] = v;
    }

    /// Largest absolute value over all nodes.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Apply the elastic operator `L = eps^2 Laplacian + gamma` to a field.
///
/// Interior nodes use the 5-point Laplacian reading the pinned boundary values
/// as Dirichlet ghosts; boundary rows carry only the `gamma` term (every
/// stepper re-pins them, so they never feed back into the interior update).
pub fn apply_elastic_operator(f: &ComplexField, params: &NematicParams) -> ComplexField {
    let g = &f.grid;
    let eps2_h2 = params.epsilon * params.epsilon / (g.h * g.h);
    let mut out = ComplexField::constant(g, Complex64::new(0.0, 0.0));
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = g.idx(i, j);
            let v = f.values[k];
            out.values[k] = if g.is_boundary(i, j) {
                params.gamma * v
            } else {
                let lap = f.values[k - 1] + f.values[k + 1] + f.values[k - g.nx]
                    + f.values[k + g.nx]
                    - 4.0 * v;
                params.gamma * v + eps2_h2 * lap
            };
        }
    }
    out
}

/// Reduced energy of an order-parameter field:
/// elastic part as the edge-based Dirichlet form `(eps^2/2) sum_edges |dn|^2`
/// (whose exact gradient is the 5-point Laplacian used by the flows) plus the
/// trapezoid-weighted single-well potential.
pub fn reduced_energy(n: &ComplexField, params: &NematicParams) -> Result<f64> {
    let g = &n.grid;
    let mut elastic = 0.0;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let k = g.idx(i, j);
            if i + 1 < g.nx {
                elastic += (n.values[k + 1] - n.values[k]).norm_sqr();
            }
            if j + 1 < g.ny {
                elastic += (n.values[k + g.nx] - n.values[k]).norm_sqr();
            }
        }
    }
    elastic *= 0.5 * params.epsilon * params.epsilon;
    let mut potential = 0.0;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let r = n.values[g.idx(i, j)].norm();
            if r >= 1.0 - 1e-12 {
                return Err(NematicError::domain(
                    "reduced_energy",
                    format!("|n| = {r} >= 1 at node ({i}, {j})"),
                ));
            }
            potential += g.trapezoid_weight(i, j) * w_gamma(r, params)?;
        }
    }
    Ok(elastic + potential)
}

/// Equilibrium Fourier moment of order `k` slaved to the first moment:
/// `I_k(lambda(|n|))/I_0(lambda(|n|)) * e^{i k arg n}`.
pub fn equilibrium_moments(n: &ComplexField, k: u32) -> Result<ComplexField> {
    if k == 0 {
        return Ok(ComplexField::constant(&n.grid, Complex64::new(1.0, 0.0)));
    }
    let mut out = n.clone();
    for v in out.values.iter_mut() {
        let r = v.norm();
        *v = if r < 1e-14 {
            Complex64::new(0.0, 0.0)
        } else {
            if r >= 1.0 - 1e-12 {
                return Err(NematicError::domain(
                    "equilibrium_moments",
                    format!("|n| = {r} >= 1"),
                ));
            }
            let lambda = lambda_of(r)?;
            let amp = bessel_ratio_to_i0(k, lambda)?;
            let phase = (*v / r).powu(k);
            amp * phase
        };
    }
    Ok(out)
}

/// Orientation density sampled at `m` uniform angles per grid node
/// (`phi_q = q * 2 pi / m`), x-fastest in space, angle-fastest per node.
#[derive(Debug, Clone)]
pub struct PhiDensity {
    pub grid: Grid2D,
    pub m: usize,
    pub values: Vec<f64>,
}

impl PhiDensity {
    pub fn from_fn(grid: &Grid2D, m: usize, mut f: impl FnMut(f64, f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.nx * grid.ny * m);
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                for q in 0..m {
                    values.push(f(grid.x(i), grid.y(j), q as f64 * TAU / m as f64));
                }
            }
        }
        PhiDensity { grid: grid.clone(), m, values }
    }

    #[inline]
    pub fn node_slice(&self, i: usize, j: usize) -> &[f64] {
        let start = (j * self.grid.nx + i) * self.m;
        &self.values[start..start + self.m]
    }
}

/// Local equilibrium density `exp(lambda cos(2 phi - theta)) / (2 pi I_0)`
/// sampled at `m` uniform angles, for one order-parameter value.
pub fn local_equilibrium_density(n: Complex64, m: usize) -> Result<Vec<f64>> {
    let r = n.norm();
    if r >= 1.0 - 1e-12 {
        return Err(NematicError::domain("local_equilibrium_density", format!("|n| = {r} >= 1")));
    }
    let (lambda, theta) = if r < 1e-14 { (0.0, 0.0) } else { (lambda_of(r)?, n.arg()) };
    let ln_norm = (TAU).ln() + ln_bessel_i0(lambda);
    Ok((0..m)
        .map(|q| {
            let phi = q as f64 * TAU / m as f64;
            (lambda * (2.0 * phi - theta).cos() - ln_norm).exp()
        })
        .collect())
}

/// Relative entropy of a sampled orientation density against the local
/// equilibrium slaved to the order-parameter field `n`:
/// `integral over the domain of sum_phi rho ln(rho / rho_hat) * (2 pi / m)`.
///
/// Nonnegative; zero exactly when `rho` is the local equilibrium everywhere.
pub fn relative_entropy(density: &PhiDensity, n: &ComplexField) -> Result<f64> {
    let g = &n.grid;
    if !g.same_shape(&density.grid) {
        return Err(NematicError::GridMismatch("relative_entropy: density grid != field grid".into()));
    }
    let m = density.m;
    let dphi = TAU / m as f64;
    let mut total = 0.0;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let rho = density.node_slice(i, j);
            let mut mass = 0.0;
            for &v in rho {
                if v < 0.0 {
                    return Err(NematicError::InvalidDensity {
                        i,
                        j,
                        message: format!("negative sample {v}"),
                    });
                }
                mass += v;
            }
            mass *= dphi;
            if (mass - 1.0).abs() > 1e-8 {
                return Err(NematicError::InvalidDensity {
                    i,
                    j,
                    message: format!("mass {mass} deviates from 1 beyond 1e-8"),
                });
            }
            let rho_hat = local_equilibrium_density(n.values[g.idx(i, j)], m)?;
            let mut s = 0.0;
            for (&r, &rh) in rho.iter().zip(&rho_hat) {
                if r > 0.0 {
                    s += r * (r / rh).ln();
                }
            }
            total += g.trapezoid_weight(i, j) * s * dphi;
        }
    }
    Ok(total)
}

/// Order-parameter field of a multi-vortex configuration:
/// `n(z) = r_eq exp{i [phase(z) + sum_k d_k arg(z - z_k)]}` with flat
/// amplitude `r_eq`.
pub fn multi_vortex_field(
    grid: &Grid2D,
    positions: &[Complex64],
    degrees: &[i32],
    phase: &RealField,
    params: &NematicParams,
) -> Result<ComplexField> {
    if positions.len() != degrees.len() {
        return Err(NematicError::InvalidVortexData(format!(
            "{} positions but {} degrees",
            positions.len(),
            degrees.len()
        )));
    }
    if !phase.grid.same_shape(grid) {
        return Err(NematicError::GridMismatch("multi_vortex_field: phase grid mismatch".into()));
    }
    for (a, za) in positions.iter().enumerate() {
        if za.re.abs() >= 0.5 * grid.lx || za.im.abs() >= 0.5 * grid.ly {
            return Err(NematicError::InvalidVortexData(format!(
                "vortex {a} at {za} lies outside the open domain"
            )));
        }
        for (b, zb) in positions.iter().enumerate().skip(a + 1) {
            if (za - zb).norm() < 1e-12 {
                return Err(NematicError::InvalidVortexData(format!(
                    "vortices {a} and {b} coincide at {za}"
                )));
            }
        }
    }
    let mut out = ComplexField::constant(grid, Complex64::new(0.0, 0.0));
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let z = grid.point(i, j);
            let mut angle = phase.get(i, j);
            for (zk, d) in positions.iter().zip(degrees) {
                angle += *d as f64 * (z - zk).arg();
            }
            out.set(i, j, Complex64::from_polar(params.r_eq, angle));
        }
    }
    Ok(out)
}

/// A vortex found by plaquette winding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectedVortex {
    /// Cell-center estimate of the vortex position.
    pub position: Complex64,
    /// Winding number of the phase around the cell.
    pub degree: i32,
}

/// Detect phase singularities: accumulate wrapped phase differences around
/// every grid cell and report cells whose winding is a nonzero multiple of
/// `2 pi` (position resolved to the cell center).
pub fn detect_vortices(n: &ComplexField) -> Vec<DetectedVortex> {
    let g = &n.grid;
    let mut found = Vec::new();
    for j in 0..g.ny - 1 {
        for i in 0..g.nx - 1 {
            let t00 = n.get(i, j).arg();
            let t10 = n.get(i + 1, j).arg();
            let t11 = n.get(i + 1, j + 1).arg();
            let t01 = n.get(i, j + 1).arg();
            let winding = wrap_angle(t10 - t00)
                + wrap_angle(t11 - t10)
                + wrap_angle(t01 - t11)
                + wrap_angle(t00 - t01);
            if winding.abs() > 1.0 {
                found.push(DetectedVortex {
                    position: g.point(i, j) + Complex64::new(0.5 * g.h, 0.5 * g.h),
                    degree: (winding / TAU).round() as i32,
                });
            }
        }
    }
    found
}
