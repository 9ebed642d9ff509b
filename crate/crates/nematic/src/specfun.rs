//! Modified Bessel functions, the inverse Bessel-ratio map, and the effective
//! single-well potential that controls the scalar order parameter.
//!
//! The alignment strength `gamma` and elastic length `epsilon` enter every tier
//! through the derived constants bundled in [`NematicParams`]: the preferred
//! order parameter `r_eq` (largest root of `gamma*r = lambda(r)`), the phase
//! mobility factor `tau_gamma = 1 - 1/I0^2(gamma*r_eq)`, and the additive
//! constant `c_gamma` that pins the potential minimum to zero.

use crate::error::{NematicError, Result};

/// Largest Bessel order the moment hierarchy ever requests.
pub const MAX_BESSEL_ORDER: u32 = 64;

/// Arguments above this are evaluated with the scaled asymptotic expansion.
const SERIES_CUTOFF: f64 = 20.0;

/// Modified Bessel function of the first kind, `I_nu(x)`.
///
/// Power series below `x = 20`; scaled asymptotic expansion (order 0/1) plus a
/// backward-recurrence ladder (higher orders) beyond. Relative error stays
/// below 1e-12 for `|x| <= 700`; arguments whose result would leave the f64
/// range produce an overflow error.
pub fn bessel_i(nu: u32, x: f64) -> Result<f64> {
    if nu > MAX_BESSEL_ORDER {
        return Err(NematicError::domain(
            "bessel_i",
            format!("order {nu} exceeds supported maximum {MAX_BESSEL_ORDER}"),
        ));
    }
    if !x.is_finite() {
        return Err(NematicError::domain("bessel_i", format!("non-finite argument {x}")));
    }
    // I_nu(-x) = (-1)^nu I_nu(x).
    let sign = if x < 0.0 && nu % 2 == 1 { -1.0 } else { 1.0 };
    let ax = x.abs();
    if ax == 0.0 {
        return Ok(if nu == 0 { 1.0 } else { 0.0 });
    }
    if ax < SERIES_CUTOFF {
        return Ok(sign * series_i(nu, ax));
    }
    let scaled = bessel_i_scaled(nu, ax);
    // Unscale in two factors so arguments slightly above ln(f64::MAX) can
    // still produce finite results when the scaled part is small.
    let value = if ax <= 700.0 {
        scaled * ax.exp()
    } else {
        (scaled * 700f64.exp()) * (ax - 700.0).exp()
    };
    if !value.is_finite() {
        return Err(NematicError::Overflow { context: "bessel_i", argument: x });
    }
    Ok(sign * value)
}

/// Exponentially scaled modified Bessel function, `e^{-x} I_nu(x)` for `x >= 0`.
///
/// Never overflows; this is the workhorse for large-argument ratios.
pub fn bessel_i_scaled(nu: u32, x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        return if nu == 0 { 1.0 } else { 0.0 };
    }
    if x < SERIES_CUTOFF {
        return series_i(nu, x) * (-x).exp();
    }
    match nu {
        0 => asymptotic_scaled(0, x),
        1 => asymptotic_scaled(1, x),
        _ => {
            // Higher orders: ratios from the downward ladder, anchored at I0.
            let ratios = ratio_ladder(nu, x);
            ratios[nu as usize] * asymptotic_scaled(0, x)
        }
    }
}

/// `ln I_0(x)` for `x >= 0`, stable far beyond the overflow point of `I_0`.
pub fn ln_bessel_i0(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < SERIES_CUTOFF {
        series_i(0, x).ln()
    } else {
        x + asymptotic_scaled(0, x).ln()
    }
}

/// The Bessel ratio `I_1(x) / I_0(x)`, odd in `x`, mapping the real line onto
/// `(-1, 1)`. This is the mean alignment of the single-site Boltzmann density
/// with concentration parameter `x`.
pub fn bessel_ratio(x: f64) -> f64 {
    let ax = x.abs();
    let r = if ax == 0.0 {
        0.0
    } else if ax < SERIES_CUTOFF {
        // Shared-term evaluation of both series:
        //   I0 = sum t_m, I1 = (x/2) sum t_m/(m+1), t_m = (x^2/4)^m / (m!)^2.
        let y = ax * ax / 4.0;
        let mut t = 1.0;
        let mut s0 = 1.0;
        let mut s1 = 1.0;
        let mut m = 0.0;
        loop {
            m += 1.0;
            t *= y / (m * m);
            s0 += t;
            s1 += t / (m + 1.0);
            if t < s0 * 1e-17 {
                break;
            }
        }
        (ax / 2.0) * s1 / s0
    } else {
        asymptotic_scaled(1, ax) / asymptotic_scaled(0, ax)
    };
    if x < 0.0 {
        -r
    } else {
        r
    }
}

/// The ratio `I_nu(x) / I_0(x)` for `x >= 0`, stable at any magnitude.
///
/// These ratios are the equilibrium Fourier moments of the single-site
/// Boltzmann density at concentration `x`.
pub fn bessel_ratio_to_i0(nu: u32, x: f64) -> Result<f64> {
    if nu > MAX_BESSEL_ORDER {
        return Err(NematicError::domain(
            "bessel_ratio_to_i0",
            format!("order {nu} exceeds supported maximum {MAX_BESSEL_ORDER}"),
        ));
    }
    if x < 0.0 || !x.is_finite() {
        return Err(NematicError::domain("bessel_ratio_to_i0", format!("argument {x} not in [0, inf)")));
    }
    if nu == 0 {
        return Ok(1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < SERIES_CUTOFF {
        Ok(series_i(nu, x) / series_i(0, x))
    } else {
        Ok(ratio_ladder(nu, x)[nu as usize])
    }
}

/// Derivative of [`bessel_ratio`] with respect to its argument:
/// `d/dx [I1/I0](x) = 1 - r^2 - r/x` with `r = I1/I0`.
fn bessel_ratio_derivative(x: f64, r: f64) -> f64 {
    if x.abs() < 1e-8 {
        // Series limit of the derivative at zero.
        0.5 - 3.0 * x * x / 16.0
    } else {
        1.0 - r * r - r / x
    }
}

/// Inverse of the Bessel ratio: the unique `lambda` with
/// `I_1(lambda)/I_0(lambda) = r`. Odd and strictly increasing, with a vertical
/// asymptote at `r = 1` where `lambda ~ 1/(2(1-r))`.
///
/// Accepts `|r| < 1 - 1e-12`; the root is located by a bracketed Newton
/// iteration (bisection fallback keeps the bracket monotone) run to 1e-14
/// bracket width or the f64 resolution limit near the asymptote.
pub fn lambda_of(r: f64) -> Result<f64> {
    if !r.is_finite() || r.abs() >= 1.0 - 1e-12 {
        return Err(NematicError::domain(
            "lambda_of",
            format!("ratio {r} outside (-1 + 1e-12, 1 - 1e-12)"),
        ));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    let target = r.abs();
    // Bracket [lo, hi] with ratio(lo) < target < ratio(hi).
    let mut lo = 0.0f64;
    let mut hi = if target < 0.9 { 4.0 } else { 1.0 / (1.0 - target) };
    while bessel_ratio(hi) < target {
        hi *= 2.0;
    }
    // Seed: small-ratio series for the bulk, asymptote scaling near 1.
    let mut lambda = if target < 0.8 {
        2.0 * target + target.powi(3)
    } else {
        0.5 / (1.0 - target)
    };
    lambda = lambda.clamp(1e-12, hi);
    for _ in 0..200 {
        let f = bessel_ratio(lambda) - target;
        if f > 0.0 {
            hi = lambda;
        } else {
            lo = lambda;
        }
        if hi - lo < 1e-14 {
            break;
        }
        let d = bessel_ratio_derivative(lambda, f + target);
        let newton = lambda - f / d;
        lambda = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if lambda == lo || lambda == hi {
            break; // f64 resolution reached
        }
    }
    Ok(if r < 0.0 { -lambda } else { lambda })
}

/// Derived constants for one `(gamma, epsilon)` pair, shared by every tier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NematicParams {
    /// Alignment strength of the mean-field interaction.
    pub gamma: f64,
    /// Elastic coupling length in the spatial operator.
    pub epsilon: f64,
    /// Preferred scalar order parameter: largest root of `gamma*r = lambda(r)`
    /// (zero at and below the transition `gamma = 2`).
    pub r_eq: f64,
    /// Phase mobility factor `1 - 1/I_0^2(gamma*r_eq)`, in `[0, 1)`.
    pub tau_gamma: f64,
    /// Additive constant making `min_r w_gamma(r) = 0`.
    pub c_gamma: f64,
}

/// Build [`NematicParams`] from the two model constants.
///
/// `r_eq` comes from a bracketed root solve of `lambda(r) - gamma*r` on (0, 1)
/// (the `r = 0` root is kept only when it has the lower potential value, i.e.
/// for `gamma <= 2`); `c_gamma` from a 1e-4-spaced scan of the raw potential
/// refined by golden-section search.
pub fn make_params(gamma: f64, epsilon: f64) -> Result<NematicParams> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(NematicError::domain("make_params", format!("gamma = {gamma} must be positive")));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(NematicError::domain(
            "make_params",
            format!("epsilon = {epsilon} must be positive"),
        ));
    }
    let r_eq = solve_r_eq(gamma)?;
    let lambda_eq = gamma * r_eq;
    // 1/I0^2 via the scaled function; underflows cleanly to tau = 1 for huge
    // concentration.
    let tau_gamma = 1.0 - (-2.0 * lambda_eq).exp() / bessel_i_scaled(0, lambda_eq).powi(2);
    let c_gamma = solve_c_gamma(gamma)?;
    Ok(NematicParams { gamma, epsilon, r_eq, tau_gamma, c_gamma })
}

/// Effective potential for the order-parameter magnitude:
/// `w(r) = -gamma r^2/2 + [r lambda(r) - ln I_0(lambda(r))] + c_gamma`.
///
/// Defined on `0 <= r < 1`; its minimum value is zero, attained at `r_eq`.
pub fn w_gamma(r: f64, params: &NematicParams) -> Result<f64> {
    if !(0.0..1.0 - 1e-12).contains(&r) {
        return Err(NematicError::domain("w_gamma", format!("r = {r} outside [0, 1)")));
    }
    Ok(w_gamma_raw(r, params.gamma)? + params.c_gamma)
}

/// Derivative of the effective potential: `w'(r) = lambda(r) - gamma*r`.
pub fn w_gamma_prime(r: f64, params: &NematicParams) -> Result<f64> {
    if !(0.0..1.0 - 1e-12).contains(&r) {
        return Err(NematicError::domain("w_gamma_prime", format!("r = {r} outside [0, 1)")));
    }
    Ok(lambda_of(r)? - params.gamma * r)
}

/// The potential without its additive normalization.
fn w_gamma_raw(r: f64, gamma: f64) -> Result<f64> {
    let lambda = lambda_of(r)?;
    Ok(-gamma * r * r / 2.0 + r * lambda - ln_bessel_i0(lambda))
}

/// Largest root of `lambda(r) = gamma*r` on `[0, 1)`.
fn solve_r_eq(gamma: f64) -> Result<f64> {
    if gamma <= 2.0 {
        // lambda(r) >= 2r everywhere, so the only root is r = 0.
        return Ok(0.0);
    }
    let g = |r: f64| -> Result<f64> { Ok(lambda_of(r)? - gamma * r) };
    let mut lo = 1e-8;
    let mut hi = 1.0 - 1e-12;
    if g(lo)? >= 0.0 {
        return Ok(0.0);
    }
    // Plain bisection: the bracket is guaranteed and evaluations are cheap here.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi || hi - lo < 1e-15 {
            break;
        }
        if g(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    // Keep whichever candidate minimizes the potential (always the positive
    // root above the transition; the comparison guards the rule explicitly).
    if w_gamma_raw(root, gamma)? < 0.0 {
        Ok(root)
    } else {
        Ok(0.0)
    }
}

/// Normalization constant: `-min_r` of the raw potential via coarse scan plus
/// golden-section refinement.
fn solve_c_gamma(gamma: f64) -> Result<f64> {
    let step = 1e-4;
    let n = 9_999usize; // covers r in [0, 0.9999]
    let mut best_i = 0usize;
    let mut best = 0.0f64; // raw potential at r = 0
    for i in 1..=n {
        let v = w_gamma_raw(i as f64 * step, gamma)?;
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let mut a = (best_i.saturating_sub(1)) as f64 * step;
    let mut b = ((best_i + 1).min(n)) as f64 * step;
    // Golden-section search down to 1e-12 interval width; the minimum value is
    // quadratically flat, so this pins c_gamma far below 1e-12.
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = w_gamma_raw(x1, gamma)?;
    let mut f2 = w_gamma_raw(x2, gamma)?;
    while b - a > 1e-12 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = w_gamma_raw(x1, gamma)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = w_gamma_raw(x2, gamma)?;
        }
    }
    let min_value = w_gamma_raw(0.5 * (a + b), gamma)?.min(0.0);
    // At and below the transition the true minimum is the exact 0 at r = 0;
    // don't let scan roundoff (~1e-17) leak into the constant.
    Ok(if min_value > -1e-13 { 0.0 } else { -min_value })
}

/// Power series `I_nu(x) = (x/2)^nu/nu! * sum_m (x^2/4)^m / (m! (nu+1)_m)`,
/// valid for `0 < x < 20` at any supported order.
fn series_i(nu: u32, x: f64) -> f64 {
    let half = x / 2.0;
    // Leading coefficient (x/2)^nu / nu!.
    let mut lead = 1.0f64;
    for k in 1..=nu {
        lead *= half / k as f64;
    }
    let y = half * half;
    let mut term = lead;
    let mut sum = lead;
    let mut m = 0.0f64;
    let nu_f = nu as f64;
    loop {
        m += 1.0;
        term *= y / (m * (nu_f + m));
        sum += term;
        if term < sum * 1e-17 || m > 500.0 {
            break;
        }
    }
    sum
}

/// Scaled asymptotic expansion `e^{-x} I_nu(x)` for `x >= 20`, orders 0 and 1
/// only (higher orders go through the recurrence ladder).
fn asymptotic_scaled(nu: u32, x: f64) -> f64 {
    debug_assert!(nu <= 1);
    let mu = 4.0 * (nu * nu) as f64;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut k = 0.0f64;
    loop {
        let next = -term * (mu - (2.0 * k + 1.0).powi(2)) / (8.0 * x * (k + 1.0));
        if next.abs() >= term.abs() && k > 0.0 {
            break; // asymptotic tail started growing
        }
        term = next;
        sum += term;
        k += 1.0;
        if term.abs() < sum.abs() * 1e-17 || k > 60.0 {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

/// Downward (Miller) recurrence for the ratios `I_k(x)/I_0(x)`, `k = 0..=nu`.
/// Stable for every order because `I` is the dominant solution downward.
fn ratio_ladder(nu: u32, x: f64) -> Vec<f64> {
    let start = nu as usize + 15 + (90.0 * x).sqrt().ceil() as usize;
    let mut values = vec![0.0f64; start + 2];
    values[start + 1] = 0.0;
    values[start] = 1e-280;
    for k in (1..=start).rev() {
        let v = values[k + 1] + (2.0 * k as f64 / x) * values[k];
        values[k - 1] = v;
        if v > 1e260 {
            let inv = 1e-260;
            for w in values[k - 1..].iter_mut() {
                *w *= inv;
            }
        }
    }
    let i0 = values[0];
    values.truncate(nu as usize + 1);
    for v in values.iter_mut() {
        *v /= i0;
    }
    values
}
