//! Finite-dimensional gradient-flow toolkit: generalized inverses, the
//! maximal-slope inequality residual, metric pullback onto constraint
//! manifolds, a singular block-inverse expansion, and a constrained-reduction
//! demonstration.
//!
//! A gradient flow `dx/dt = -D(x) dE/dx` with symmetric PSD mobility `D` is
//! characterized variationally: along any curve,
//!
//! ```text
//! E(x(0)) - E(x(t)) - 1/2 int ( |dE|_D^2 + |dx/dt|_G^2 ) ds  <=  0
//! ```
//!
//! with `G` the generalized inverse of `D`, and equality holds exactly for
//! the gradient flow. [`maximal_slope_residual`] evaluates the left side on a
//! sampled curve; the remaining items support the singular limit in which a
//! steep penalty confines the flow to a manifold and the dynamics reduce to a
//! gradient flow of the restricted energy in the induced metric.

use nalgebra::{DMatrix, DVector};

use crate::error::{NematicError, Result};

// ---------------------------------------------------------------------------
// symmetric matrices and the generalized inverse
// ---------------------------------------------------------------------------

/// Real symmetric matrix (validated on construction).
#[derive(Debug, Clone)]
pub struct SymMatrix {
    data: DMatrix<f64>,
}

impl SymMatrix {
    /// Wrap a square matrix, requiring symmetry to 1e-12 (relative to the
    /// largest entry).
    pub fn new(data: DMatrix<f64>) -> Result<Self> {
        if !data.is_square() {
            return Err(NematicError::Matrix {
                context: "symmetric wrapper".into(),
                message: format!("matrix is {}x{}, not square", data.nrows(), data.ncols()),
            });
        }
        let scale = data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let mut asym = 0.0f64;
        for i in 0..data.nrows() {
            for j in 0..i {
                asym = asym.max((data[(i, j)] - data[(j, i)]).abs());
            }
        }
        if asym > 1e-12 * scale {
            return Err(NematicError::Matrix {
                context: "symmetric wrapper".into(),
                message: format!("asymmetry {asym:.3e} exceeds 1e-12 x scale"),
            });
        }
        // store the exactly symmetrized matrix so eigensolves see clean input
        let sym = 0.5 * (&data + data.transpose());
        Ok(SymMatrix { data: sym })
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix { data: DMatrix::identity(n, n) }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        SymMatrix { data: DMatrix::from_diagonal(&DVector::from_row_slice(diag)) }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    fn eigen(&self) -> (DVector<f64>, DMatrix<f64>) {
        let e = self.data.clone().symmetric_eigen();
        (e.eigenvalues, e.eigenvectors)
    }

    /// Largest eigenvalue magnitude.
    pub fn spectral_radius(&self) -> f64 {
        let (vals, _) = self.eigen();
        vals.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Moore–Penrose inverse of a symmetric positive semi-definite matrix via
/// eigendecomposition: eigenvalues below `rank_tol x lambda_max` are treated
/// as kernel directions and inverted to zero.
pub fn generalized_inverse(m: &SymMatrix, rank_tol: f64) -> Result<SymMatrix> {
    let (vals, vecs) = m.eigen();
    let lambda_max = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if vals.iter().any(|&v| v < -1e-10 * lambda_max.max(1.0)) {
        return Err(NematicError::Matrix {
            context: "generalized inverse".into(),
            message: format!(
                "matrix is not positive semi-definite (min eigenvalue {:.3e})",
                vals.iter().cloned().fold(f64::INFINITY, f64::min)
            ),
        });
    }
    let cut = rank_tol * lambda_max;
    let inv_vals: Vec<f64> =
        vals.iter().map(|&v| if v > cut { 1.0 / v } else { 0.0 }).collect();
    let g = &vecs * DMatrix::from_diagonal(&DVector::from_row_slice(&inv_vals)) * vecs.transpose();
    SymMatrix::new(0.5 * (&g + g.transpose()))
}

/// Default relative eigenvalue threshold separating range from kernel.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

// ---------------------------------------------------------------------------
// sampled curves and the maximal-slope residual
// ---------------------------------------------------------------------------

/// A curve sampled at strictly increasing times.
#[derive(Debug, Clone)]
pub struct SampledCurve {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

impl SampledCurve {
    pub fn new(times: Vec<f64>, points: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() != points.len() || times.len() < 2 {
            return Err(NematicError::Curve(format!(
                "need matching times/points with at least 2 samples ({} vs {})",
                times.len(),
                points.len()
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(NematicError::Curve("times must be strictly increasing".into()));
        }
        let dim = points[0].len();
        if dim == 0 || points.iter().any(|p| p.len() != dim) {
            return Err(NematicError::Curve("points must share one positive dimension".into()));
        }
        Ok(SampledCurve { times, points })
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    /// Finite-difference velocities: centered in the interior, one-sided at
    /// the endpoints.
    pub fn velocities(&self) -> Vec<Vec<f64>> {
        let k = self.times.len();
        let mut v = Vec::with_capacity(k);
        for s in 0..k {
            let (lo, hi) = if s == 0 {
                (0, 1)
            } else if s == k - 1 {
                (k - 2, k - 1)
            } else {
                (s - 1, s + 1)
            };
            let dt = self.times[hi] - self.times[lo];
            v.push(
                self.points[hi]
                    .iter()
                    .zip(&self.points[lo])
                    .map(|(a, b)| (a - b) / dt)
                    .collect(),
            );
        }
        v
    }
}

/// Central-difference gradient of a scalar function.
fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut g = Vec::with_capacity(x.len());
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        let h = 1e-6 * x[i].abs().max(1.0);
        probe[i] = x[i] + h;
        let up = f(&probe);
        probe[i] = x[i] - h;
        let down = f(&probe);
        probe[i] = x[i];
        g.push((up - down) / (2.0 * h));
    }
    g
}

/// Evaluate the maximal-slope inequality residual
/// `E(x(0)) - E(x(T)) - 1/2 int (dE' D dE + v' G v) dt` on a sampled curve
/// (trapezoid rule; velocities by finite differences). The exact residual is
/// nonpositive for every admissible curve and zero precisely on gradient-flow
/// trajectories, so the sampled value is zero up to O(dt^2) for those.
pub fn maximal_slope_residual(
    curve: &SampledCurve,
    energy: &dyn Fn(&[f64]) -> f64,
    mobility: &dyn Fn(&[f64]) -> SymMatrix,
) -> Result<f64> {
    let velocities = curve.velocities();
    let k = curve.times.len();
    let mut integrand = Vec::with_capacity(k);
    for s in 0..k {
        let x = &curve.points[s];
        let d = mobility(x);
        if d.dim() != curve.dim() {
            return Err(NematicError::Matrix {
                context: "maximal slope".into(),
                message: format!("mobility is {}-dim, curve is {}-dim", d.dim(), curve.dim()),
            });
        }
        let g = generalized_inverse(&d, DEFAULT_RANK_TOL)?;
        let v = DVector::from_row_slice(&velocities[s]);
        // admissibility: v must lie in range(D); D G is the range projector
        let projected = d.as_matrix() * (g.as_matrix() * &v);
        let defect = (&v - &projected).norm();
        if defect > 1e-8 * v.norm().max(1.0) {
            return Err(NematicError::Curve(format!(
                "velocity leaves the mobility range at t = {} (defect {defect:.3e})",
                curve.times[s]
            )));
        }
        let grad = DVector::from_row_slice(&fd_gradient(energy, x));
        let slope = (grad.transpose() * d.as_matrix() * &grad)[(0, 0)];
        let speed = (v.transpose() * g.as_matrix() * &v)[(0, 0)];
        integrand.push(slope + speed);
    }
    let mut integral = 0.0;
    for s in 0..k - 1 {
        integral += 0.5 * (curve.times[s + 1] - curve.times[s]) * (integrand[s] + integrand[s + 1]);
    }
    Ok(energy(&curve.points[0]) - energy(&curve.points[k - 1]) - 0.5 * integral)
}

// ---------------------------------------------------------------------------
// induced metric
// ---------------------------------------------------------------------------

/// Pull a metric back through a chart Jacobian: `Gt = J' G J`. The Jacobian
/// (n x m, columns = chart directions) must have full column rank.
pub fn induced_metric(jacobian: &DMatrix<f64>, g: &SymMatrix) -> Result<SymMatrix> {
    if jacobian.nrows() != g.dim() {
        return Err(NematicError::Matrix {
            context: "induced metric".into(),
            message: format!(
                "jacobian has {} rows, metric is {}-dim",
                jacobian.nrows(),
                g.dim()
            ),
        });
    }
    let svals = jacobian.clone().svd(false, false).singular_values;
    let smax = svals.iter().fold(0.0f64, |a, v| a.max(*v));
    let rank = svals.iter().filter(|&&s| s > 1e-10 * smax.max(1.0)).count();
    if rank < jacobian.ncols() {
        return Err(NematicError::Matrix {
            context: "induced metric".into(),
            message: format!("jacobian rank {rank} below column count {}", jacobian.ncols()),
        });
    }
    let m = jacobian.transpose() * g.as_matrix() * jacobian;
    SymMatrix::new(0.5 * (&m + m.transpose()))
}

// ---------------------------------------------------------------------------
// block-inverse expansion
// ---------------------------------------------------------------------------

/// The `B` and `C` coefficient blocks of the singular family
/// `A(delta) = (1/delta) [A11, 0; 0, 0] + B + delta C`
/// with `B12 = B21'` and `C12 = C21'` enforced by construction.
#[derive(Debug, Clone)]
pub struct BlockCoefficients {
    pub m11: SymMatrix,
    pub m12: DMatrix<f64>,
    pub m22: SymMatrix,
}

impl BlockCoefficients {
    pub fn new(m11: SymMatrix, m12: DMatrix<f64>, m22: SymMatrix) -> Result<Self> {
        if m12.nrows() != m11.dim() || m12.ncols() != m22.dim() {
            return Err(NematicError::Matrix {
                context: "block coefficients".into(),
                message: format!(
                    "off-diagonal block is {}x{}, expected {}x{}",
                    m12.nrows(),
                    m12.ncols(),
                    m11.dim(),
                    m22.dim()
                ),
            });
        }
        Ok(BlockCoefficients { m11, m12, m22 })
    }
}

/// Assemble the full matrix `A(delta)` of the singular family (oracle for the
/// expansion below).
pub fn assemble_block_matrix(
    a11: &SymMatrix,
    b: &BlockCoefficients,
    c: &BlockCoefficients,
    delta: f64,
) -> Result<DMatrix<f64>> {
    let d = a11.dim();
    let e = b.m22.dim();
    if b.m11.dim() != d || c.m11.dim() != d || c.m22.dim() != e {
        return Err(NematicError::Matrix {
            context: "block assembly".into(),
            message: "coefficient block dimensions disagree".into(),
        });
    }
    let n = d + e;
    let mut a = DMatrix::zeros(n, n);
    a.view_mut((0, 0), (d, d)).copy_from(&(a11.as_matrix() / delta));
    a.view_mut((0, 0), (d, d)).add_assign_scaled(b.m11.as_matrix(), 1.0);
    a.view_mut((0, 0), (d, d)).add_assign_scaled(c.m11.as_matrix(), delta);
    let top_right = &b.m12 + delta * &c.m12;
    a.view_mut((0, d), (d, e)).copy_from(&top_right);
    a.view_mut((d, 0), (e, d)).copy_from(&top_right.transpose());
    a.view_mut((d, d), (e, e)).copy_from(b.m22.as_matrix());
    a.view_mut((d, d), (e, e)).add_assign_scaled(c.m22.as_matrix(), delta);
    Ok(a)
}

/// First-order expansion of `A(delta)^{-1}`:
/// `[0, 0; 0, B22^{-1}] + delta [A11^{-1}, D12; D12', D22]` with
/// `D12 = -A11^{-1} B12 B22^{-1}` and
/// `D22 = B22^{-1} (B21 A11^{-1} B12 - C22) B22^{-1}`.
/// The truncation error is O(delta^2) in any fixed norm.
pub fn block_inverse_asymptotic(
    a11: &SymMatrix,
    b: &BlockCoefficients,
    c: &BlockCoefficients,
    delta: f64,
) -> Result<DMatrix<f64>> {
    let d = a11.dim();
    let e = b.m22.dim();
    let a11_inv = a11.as_matrix().clone().try_inverse().ok_or_else(|| NematicError::Matrix {
        context: "block inverse".into(),
        message: "top-left stiff block is singular".into(),
    })?;
    let b22_inv = b.m22.as_matrix().clone().try_inverse().ok_or_else(|| {
        NematicError::Matrix {
            context: "block inverse".into(),
            message: "bottom-right coefficient block is singular".into(),
        }
    })?;
    let b12 = &b.m12;
    let d12 = -(&a11_inv * b12 * &b22_inv);
    let d22 = &b22_inv * (b12.transpose() * &a11_inv * b12 - c.m22.as_matrix()) * &b22_inv;
    let n = d + e;
    let mut out = DMatrix::zeros(n, n);
    out.view_mut((d, d), (e, e)).copy_from(&b22_inv);
    out.view_mut((0, 0), (d, d)).add_assign_scaled(&a11_inv, delta);
    out.view_mut((0, d), (d, e)).add_assign_scaled(&d12, delta);
    out.view_mut((d, 0), (e, d)).add_assign_scaled(&d12.transpose(), delta);
    out.view_mut((d, d), (e, e)).add_assign_scaled(&d22, delta);
    Ok(out)
}

trait AddAssignScaled {
    fn add_assign_scaled(&mut self, other: &DMatrix<f64>, factor: f64);
}

impl AddAssignScaled for nalgebra::DMatrixViewMut<'_, f64> {
    fn add_assign_scaled(&mut self, other: &DMatrix<f64>, factor: f64) {
        for j in 0..other.ncols() {
            for i in 0..other.nrows() {
                self[(i, j)] += factor * other[(i, j)];
            }
        }
    }
}

// ---------------------------------------------------------------------------
// constrained reduction demonstration
// ---------------------------------------------------------------------------

/// A singularly perturbed gradient system `E = U(x) + (1/eps) V(zeta(x))`
/// together with one chart of the constraint manifold `{V(zeta) = 0}`.
pub struct ReductionProblem {
    /// Ambient dimension.
    pub dim: usize,
    /// Chart (manifold) dimension.
    pub chart_dim: usize,
    /// Smooth ambient energy `U`.
    pub u_energy: Box<dyn Fn(&[f64]) -> f64>,
    /// Penalty `V` on the transverse coordinates, `V >= 0`, `V(0) = 0`.
    pub v_penalty: Box<dyn Fn(&[f64]) -> f64>,
    /// Transverse coordinates `zeta(x)` (zero exactly on the manifold).
    pub zeta_map: Box<dyn Fn(&[f64]) -> Vec<f64>>,
    /// Chart embedding `chi(y)` into the ambient space.
    pub chart: Box<dyn Fn(&[f64]) -> Vec<f64>>,
    /// Chart coordinates of a nearby ambient point; errors outside the chart.
    pub chart_inverse: Box<dyn Fn(&[f64]) -> Result<Vec<f64>>>,
}

impl ReductionProblem {
    /// Builtin demonstration: unit circle in the plane, `U(x) = x_0`,
    /// `V(s) = s^2` with `zeta = |x| - 1`. The reduced flow is
    /// `d theta/dt = sin theta`.
    pub fn circle() -> Self {
        ReductionProblem {
            dim: 2,
            chart_dim: 1,
            u_energy: Box::new(|x: &[f64]| x[0]),
            v_penalty: Box::new(|s: &[f64]| s[0] * s[0]),
            zeta_map: Box::new(|x: &[f64]| vec![(x[0] * x[0] + x[1] * x[1]).sqrt() - 1.0]),
            chart: Box::new(|y: &[f64]| vec![y[0].cos(), y[0].sin()]),
            chart_inverse: Box::new(|x: &[f64]| {
                let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
                if r < 0.5 {
                    return Err(NematicError::Curve(format!(
                        "point at radius {r:.3} escaped the circle chart"
                    )));
                }
                Ok(vec![x[1].atan2(x[0])])
            }),
        }
    }

    fn full_energy(&self, eps: f64, x: &[f64]) -> f64 {
        (self.u_energy)(x) + (self.v_penalty)(&(self.zeta_map)(x)) / eps
    }

    fn chart_jacobian(&self, y: &[f64]) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.dim, self.chart_dim);
        let mut probe = y.to_vec();
        for col in 0..self.chart_dim {
            let h = 1e-6 * y[col].abs().max(1.0);
            probe[col] = y[col] + h;
            let up = (self.chart)(&probe);
            probe[col] = y[col] - h;
            let down = (self.chart)(&probe);
            probe[col] = y[col];
            for row in 0..self.dim {
                j[(row, col)] = (up[row] - down[row]) / (2.0 * h);
            }
        }
        j
    }

    fn zeta_jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let z0 = (self.zeta_map)(x);
        let mut j = DMatrix::zeros(z0.len(), self.dim);
        let mut probe = x.to_vec();
        for col in 0..self.dim {
            let h = 1e-6 * x[col].abs().max(1.0);
            probe[col] = x[col] + h;
            let up = (self.zeta_map)(&probe);
            probe[col] = x[col] - h;
            let down = (self.zeta_map)(&probe);
            probe[col] = x[col];
            for row in 0..z0.len() {
                j[(row, col)] = (up[row] - down[row]) / (2.0 * h);
            }
        }
        j
    }

    /// Reduced energy on the chart.
    fn reduced_energy(&self, y: &[f64]) -> f64 {
        (self.u_energy)(&(self.chart)(y))
    }
}

/// Per-epsilon outcome of [`reduction_demo`].
#[derive(Debug, Clone)]
pub struct ReductionReport {
    pub epsilons: Vec<f64>,
    /// Sup over the time window of the distance between the full trajectory
    /// and the chart image of the reduced trajectory.
    pub sup_distances: Vec<f64>,
    pub t_end: f64,
}

impl ReductionReport {
    /// Whether the tracking distance is nonincreasing along the epsilon list.
    pub fn distances_monotone(&self) -> bool {
        self.sup_distances.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9))
    }
}

/// Compare the full stiff flow `dx/dt = -dE^eps` against the reduced flow
/// `dy/dt = -Dt dUt` (with `Dt` the generalized inverse of the metric induced
/// by the identity mobility) for each requested penalty strength.
///
/// The starting point is projected onto the manifold through the chart and
/// offset transversally by `eps`, so the preparation `V = O(eps)` holds for
/// every entry of the list. The transversality assumption (zeta directions
/// orthogonal to chart directions under the ambient mobility) is asserted
/// numerically along the way rather than assumed.
pub fn reduction_demo(
    problem: &ReductionProblem,
    epsilon_list: &[f64],
    x0: &[f64],
    t_end: f64,
) -> Result<ReductionReport> {
    if epsilon_list.is_empty() || epsilon_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(NematicError::InvalidConfig(
            "epsilon list must be nonempty and strictly decreasing".into(),
        ));
    }
    if x0.len() != problem.dim {
        return Err(NematicError::InvalidConfig(format!(
            "starting point has dimension {}, problem wants {}",
            x0.len(),
            problem.dim
        )));
    }
    let y0 = (problem.chart_inverse)(x0)?;
    let base = (problem.chart)(&y0);
    let mut sup_distances = Vec::with_capacity(epsilon_list.len());
    for &eps in epsilon_list {
        // transversal offset along the first zeta gradient direction
        let jz = problem.zeta_jacobian(&base);
        let mut t_dir: Vec<f64> = (0..problem.dim).map(|i| jz[(0, i)]).collect();
        let norm = t_dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(NematicError::domain(
                "reduction demo",
                "degenerate transverse direction at the starting point",
            ));
        }
        for v in t_dir.iter_mut() {
            *v /= norm;
        }
        let x_start: Vec<f64> = base.iter().zip(&t_dir).map(|(b, d)| b + eps * d).collect();

        let dt = (eps / 10.0).min(t_end / 100.0);
        let n_steps = (t_end / dt).ceil() as usize;
        let dt = t_end / n_steps as f64;

        let mut x = x_start;
        let mut y = y0.clone();
        let mut sup = 0.0f64;
        let orth_check_every = (n_steps / 8).max(1);
        for step in 0..=n_steps {
            let chi_y = (problem.chart)(&y);
            let dist = x
                .iter()
                .zip(&chi_y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            sup = sup.max(dist);
            if step == n_steps {
                break;
            }
            if step % orth_check_every == 0 {
                // transversality: zeta rows against chart columns
                let prod = problem.zeta_jacobian(&chi_y) * problem.chart_jacobian(&y);
                let worst = prod.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if worst > 1e-6 {
                    return Err(NematicError::domain(
                        "reduction demo",
                        format!("orthogonality assumption violated ({worst:.3e})"),
                    ));
                }
            }
            // full flow step (classical RK4 on the stiff energy)
            let f_full = |x: &[f64]| -> Vec<f64> {
                fd_gradient(&|p: &[f64]| problem.full_energy(eps, p), x)
                    .into_iter()
                    .map(|g| -g)
                    .collect()
            };
            x = rk4_step(&f_full, &x, dt);
            (problem.chart_inverse)(&x)?; // chart-escape detection
            // reduced flow step
            let f_red = |y: &[f64]| -> Result<Vec<f64>> {
                let j = problem.chart_jacobian(y);
                let induced = induced_metric(&j, &SymMatrix::identity(problem.dim))?;
                let d_tilde = generalized_inverse(&induced, DEFAULT_RANK_TOL)?;
                let grad =
                    DVector::from_row_slice(&fd_gradient(&|p| problem.reduced_energy(p), y));
                let v = -(d_tilde.as_matrix() * grad);
                Ok(v.iter().cloned().collect())
            };
            y = rk4_step_result(&f_red, &y, dt)?;
        }
        sup_distances.push(sup);
    }
    Ok(ReductionReport { epsilons: epsilon_list.to_vec(), sup_distances, t_end })
}

fn rk4_step(f: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], dt: f64) -> Vec<f64> {
    let add = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + s * y).collect()
    };
    let k1 = f(x);
    let k2 = f(&add(x, &k1, dt / 2.0));
    let k3 = f(&add(x, &k2, dt / 2.0));
    let k4 = f(&add(x, &k3, dt));
    x.iter()
        .enumerate()
        .map(|(i, &v)| v + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

fn rk4_step_result(
    f: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    x: &[f64],
    dt: f64,
) -> Result<Vec<f64>> {
    let add = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> {
        a.iter().zip(b).map(|(x, y)| x + s * y).collect()
    };
    let k1 = f(x)?;
    let k2 = f(&add(x, &k1, dt / 2.0))?;
    let k3 = f(&add(x, &k2, dt / 2.0))?;
    let k4 = f(&add(x, &k3, dt))?;
    Ok(x.iter()
        .enumerate()
        .map(|(i, &v)| v + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}
