//! Reference-table writers: the special-function sweep and the
//! constrained-reduction demonstration, both as fixed-format CSV.

use std::path::Path;

use nematic::maxslope::{reduction_demo, ReductionProblem};
use nematic::snapshot::fmt_e;
use nematic::specfun::{lambda_of, make_params, w_gamma, w_gamma_prime};
use nematic::Result;

/// Amplitude sweep of the effective potential: columns
/// `r,lambda,w_gamma,w_gamma_prime`, hundredth steps over [0, 0.99] with the
/// equilibrium amplitude inserted as its own row (where `w_gamma` attains its
/// minimum, zero by construction).
pub fn write_specfun_table(path: &Path, gamma: f64) -> Result<()> {
    let params = make_params(gamma, 0.1)?;
    let mut rs: Vec<f64> = (0..100).map(|k| k as f64 / 100.0).collect();
    if rs.iter().all(|r| (r - params.r_eq).abs() > 1e-12) {
        rs.push(params.r_eq);
    }
    rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut csv = String::from("r,lambda,w_gamma,w_gamma_prime\n");
    for &r in &rs {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt_e(r),
            fmt_e(lambda_of(r)?),
            fmt_e(w_gamma(r, &params)?),
            fmt_e(w_gamma_prime(r, &params)?),
        ));
    }
    std::fs::write(path, csv)?;
    Ok(())
}

/// Circle-problem reduction ladder: columns `epsilon,sup_distance,t_end`,
/// one row per penalty strength. Returns the CSV text (also written to
/// `path`) so the caller can echo it.
pub fn write_maxslope_demo(path: &Path) -> Result<String> {
    let problem = ReductionProblem::circle();
    let x0 = [2.0f64.cos(), 2.0f64.sin()];
    let report = reduction_demo(&problem, &[1e-1, 1e-2, 1e-3], &x0, 1.0)?;
    let mut csv = String::from("epsilon,sup_distance,t_end\n");
    for (eps, dist) in report.epsilons.iter().zip(&report.sup_distances) {
        csv.push_str(&format!("{},{},{}\n", fmt_e(*eps), fmt_e(*dist), fmt_e(report.t_end)));
    }
    std::fs::write(path, &csv)?;
    Ok(csv)
}
