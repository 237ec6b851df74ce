//! Algebraic wall model: Spalding's law of the wall, optionally fed with a
//! van Driest transformed velocity to account for compressibility.
//!
//! All functions are pure and allocation free.

use crate::error::WallModelError;

/// von Kármán constant used in Spalding's law.
pub const KAPPA: f64 = 0.4;
/// `exp(-kappa B)` with `B` the log-law intercept.
pub const SPALDING_E: f64 = 0.1108;

/// Log-law intercept implied by [`SPALDING_E`].
pub fn log_law_intercept() -> f64 {
    -SPALDING_E.ln() / KAPPA
}

/// Below this the arcsin transforms switch to a three-term series.
const SERIES_THRESHOLD: f64 = 1e-6;
/// `exp(0.4 u+)` overflows past this.
const MAX_U_PLUS: f64 = 709.0 / KAPPA;
const MAX_ITER: usize = 100;
/// Guaranteed bound on the Spalding residual, relative to `max(1, y+)`.
const RESIDUAL_TOL: f64 = 1e-10;
/// Relative residual at which the Newton iteration stops.
const NEWTON_REL_TOL: f64 = 1e-14;

/// `e^k - 1 - k - k^2/2 - k^3/6 - k^4/24`, by its Taylor tail for small `k`
/// where the direct form cancels catastrophically.
fn exp_tail5(k: f64) -> f64 {
    if k.abs() < 1.0 {
        let mut term = k.powi(5) / 120.0;
        let mut sum = term;
        let mut n = 5.0;
        while term.abs() > 1e-18 * sum.abs() {
            n += 1.0;
            term *= k / n;
            sum += term;
        }
        sum
    } else {
        k.exp() - 1.0 - k - k * k / 2.0 - k.powi(3) / 6.0 - k.powi(4) / 24.0
    }
}

/// `e^k - 1 - k - k^2/2 - k^3/6`, the derivative of [`exp_tail5`].
fn exp_tail4(k: f64) -> f64 {
    exp_tail5(k) + k.powi(4) / 24.0
}

fn spalding_unchecked(u_plus: f64) -> f64 {
    u_plus + SPALDING_E * exp_tail5(KAPPA * u_plus)
}

fn spalding_slope(u_plus: f64) -> f64 {
    1.0 + SPALDING_E * KAPPA * exp_tail4(KAPPA * u_plus)
}

/// Spalding's law `y+(u+)`.
pub fn spalding_y_plus(u_plus: f64) -> Result<f64, WallModelError> {
    if !(u_plus >= 0.0) {
        return Err(WallModelError::Input(format!("u+ = {u_plus} must be non-negative")));
    }
    if u_plus > MAX_U_PLUS {
        return Err(WallModelError::Range { u_plus });
    }
    Ok(spalding_unchecked(u_plus))
}

/// `arcsin(c x) / c` with its series limit for tiny `c`.
fn scaled_arcsin(c: f64, x: f64) -> Result<f64, WallModelError> {
    if c < SERIES_THRESHOLD {
        let c2 = c * c;
        return Ok(x + c2 * x.powi(3) / 6.0 + 3.0 * c2 * c2 * x.powi(5) / 40.0);
    }
    let argument = c * x;
    if argument > 1.0 {
        return Err(WallModelError::Domain { argument });
    }
    Ok(argument.asin() / c)
}

/// Freestream coefficient `b` of the van Driest transformation.
pub fn van_driest_coefficient(ma_inf: f64, gamma: f64, prandtl: f64) -> f64 {
    let k = 0.5 * (gamma - 1.0) * ma_inf * ma_inf * prandtl.cbrt();
    k.sqrt() / (1.0 + k).sqrt()
}

/// Van Driest transformation with edge conditions taken from the freestream:
/// `u_eq = u_inf / b * asin(b u / u_inf)`.
pub fn van_driest_transform(u: f64, u_inf: f64, ma_inf: f64, gamma: f64, prandtl: f64) -> Result<f64, WallModelError> {
    if !(u >= 0.0) || !(u_inf > 0.0) || !(ma_inf >= 0.0) {
        return Err(WallModelError::Input(format!(
            "van Driest transform needs u >= 0, u_inf > 0, Ma >= 0 (got {u}, {u_inf}, {ma_inf})"
        )));
    }
    let b = van_driest_coefficient(ma_inf, gamma, prandtl);
    Ok(u_inf * scaled_arcsin(b, u / u_inf)?)
}

/// Van Driest transformation in boundary-layer-edge form:
/// `u_eq = u_e / a * asin(a u / u_e)` with `a = sqrt(1 - T_e / T_aw)`.
pub fn van_driest_edge_form(u: f64, u_e: f64, t_e: f64, t_aw: f64) -> Result<f64, WallModelError> {
    if !(u >= 0.0) || !(u_e > 0.0) || !(t_e > 0.0) {
        return Err(WallModelError::Input(format!(
            "edge form needs u >= 0, u_e > 0, T_e > 0 (got {u}, {u_e}, {t_e})"
        )));
    }
    if t_e > t_aw {
        return Err(WallModelError::Domain {
            argument: 1.0 - t_e / t_aw,
        });
    }
    let a = (1.0 - t_e / t_aw).sqrt();
    Ok(u_e * scaled_arcsin(a, u / u_e)?)
}

/// Inverse of [`van_driest_transform`]: `u = u_inf / b * sin(b u_eq / u_inf)`.
pub fn van_driest_inverse(u_eq: f64, u_inf: f64, ma_inf: f64, gamma: f64, prandtl: f64) -> f64 {
    let b = van_driest_coefficient(ma_inf, gamma, prandtl);
    if b < SERIES_THRESHOLD {
        let x = u_eq / u_inf;
        let b2 = b * b;
        return u_inf * (x - b2 * x.powi(3) / 6.0 + b2 * b2 * x.powi(5) / 120.0);
    }
    u_inf / b * (b * u_eq / u_inf).sin()
}

/// Inverse of Spalding's law, `u+(y+)`, by safeguarded Newton.
pub fn spalding_u_plus(y_plus: f64) -> Result<f64, WallModelError> {
    if !(y_plus >= 0.0) || !y_plus.is_finite() {
        return Err(WallModelError::Input(format!("y+ = {y_plus} must be finite and non-negative")));
    }
    if y_plus == 0.0 {
        return Ok(0.0);
    }
    // y+(u+) >= u+, so the root lies in [0, min(y+, MAX_U_PLUS)]
    bracketed_newton(y_plus, y_plus.min(MAX_U_PLUS), |x| (spalding_unchecked(x), spalding_slope(x))).map(|(x, _)| x)
}

/// Root of an increasing `g(x) = target` on `[0, hi]` with `g(0) = 0 < target`.
///
/// Newton runs on `ln g - ln target`, which takes large steps where `g` grows
/// exponentially; iterates leaving the current bracket are replaced by its
/// midpoint. Stops at a relative residual of `NEWTON_REL_TOL` or when the
/// step drops below round-off. Returns the root and the iteration count.
fn bracketed_newton<G>(target: f64, hi: f64, g: G) -> Result<(f64, usize), WallModelError>
where
    G: Fn(f64) -> (f64, f64),
{
    let mut lo = 0.0;
    let mut hi = hi;
    let mut x = hi;
    for it in 1..=MAX_ITER {
        let (value, slope) = g(x);
        if (value - target).abs() <= NEWTON_REL_TOL * target {
            return Ok((x, it));
        }
        if value > target {
            hi = x;
        } else {
            lo = x;
        }
        let next = x - (value.ln() - target.ln()) * value / slope;
        let next = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x {
            return Ok((next, it));
        }
        x = next;
    }
    Err(WallModelError::NoConvergence {
        iterations: MAX_ITER,
        lo,
        hi,
    })
}

/// Adiabatic-wall to edge temperature ratio in the printed form
/// `(1 + (gamma - 1) / gamma * Pr^(1/3)) * Ma_e^2`.
///
/// Note this vanishes at `Ma_e = 0`; it is not the recovery ratio implied by
/// [`van_driest_coefficient`], which is `1 + (gamma - 1)/2 * Pr^(1/3) * Ma^2`.
pub fn recovery_ratio(ma_e: f64, gamma: f64, prandtl: f64) -> f64 {
    (1.0 + (gamma - 1.0) / gamma * prandtl.cbrt()) * ma_e * ma_e
}

/// Instantaneous input at the exchange location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallModelQuery {
    /// Wall-parallel velocity at the exchange location.
    pub u: f64,
    /// Wall distance of the exchange location.
    pub h_wm: f64,
    pub rho_w: f64,
    pub mu_w: f64,
    pub ma_inf: f64,
    pub u_inf: f64,
    pub gamma: f64,
    pub prandtl: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WallStress {
    pub tau_w: f64,
    pub u_tau: f64,
    pub y_plus: f64,
    /// Spalding argument: the (possibly transformed) velocity over `u_tau`.
    pub u_plus: f64,
    pub iterations: usize,
}

impl WallModelQuery {
    fn validate(&self, use_van_driest: bool) -> Result<(), WallModelError> {
        let mut problems = Vec::new();
        if !(self.h_wm > 0.0) {
            problems.push(format!("h_wm = {} must be positive", self.h_wm));
        }
        if !(self.u >= 0.0) {
            problems.push(format!("u = {} must be non-negative", self.u));
        }
        if !(self.rho_w > 0.0) {
            problems.push(format!("rho_w = {} must be positive", self.rho_w));
        }
        if !(self.mu_w > 0.0) {
            problems.push(format!("mu_w = {} must be positive", self.mu_w));
        }
        if use_van_driest {
            if !(self.prandtl > 0.0) {
                problems.push(format!("Pr = {} must be positive", self.prandtl));
            }
            if !(self.gamma > 1.0) {
                problems.push(format!("gamma = {} must exceed 1", self.gamma));
            }
            if !(self.ma_inf >= 0.0) {
                problems.push(format!("Ma_inf = {} must be non-negative", self.ma_inf));
            }
            if !(self.u_inf > 0.0) {
                problems.push(format!("u_inf = {} must be positive", self.u_inf));
            } else if self.u > self.u_inf * (1.0 + 1e-6) {
                problems.push(format!("u = {} exceeds u_inf = {}", self.u, self.u_inf));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(WallModelError::Input(problems.join("; ")))
        }
    }
}

/// Wall shear stress from Spalding's law.
///
/// With `Re_h = rho_w h_wm u / mu_w`, the law becomes `u+ * y+(u+) = Re_h`
/// for the unknown `u+`. The left side is increasing, at least `u+^2`, and
/// vanishes at zero, so the root lies in `[0, sqrt(Re_h)]`.
pub fn solve_wall_stress(q: &WallModelQuery, use_van_driest: bool) -> Result<WallStress, WallModelError> {
    q.validate(use_van_driest)?;
    if q.u == 0.0 {
        return Ok(WallStress {
            tau_w: 0.0,
            u_tau: 0.0,
            y_plus: 0.0,
            u_plus: 0.0,
            iterations: 0,
        });
    }
    let u = if use_van_driest {
        van_driest_transform(q.u.min(q.u_inf), q.u_inf, q.ma_inf, q.gamma, q.prandtl)?
    } else {
        q.u
    };
    let re = q.rho_w * q.h_wm * u / q.mu_w;

    let hi = re.sqrt().min(MAX_U_PLUS);
    let (x, iterations) = bracketed_newton(re, hi, |x| {
        let s = spalding_unchecked(x);
        (x * s, s + x * spalding_slope(x))
    })?;
    let y_plus = re / x;
    if (spalding_unchecked(x) - y_plus).abs() >= RESIDUAL_TOL * y_plus.max(1.0) {
        return Err(WallModelError::NoConvergence {
            iterations,
            lo: x,
            hi: x,
        });
    }
    let u_tau = u / x;
    Ok(WallStress {
        tau_w: q.rho_w * u_tau * u_tau,
        u_tau,
        y_plus,
        u_plus: x,
        iterations,
    })
}
