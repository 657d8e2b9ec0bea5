//! Closed-form energies of the unit ball.

use crate::error::{domain, Result};
use crate::specfun::log_gamma;
use crate::spectrum::{lambda_frac, mu_alpha};
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallGeometry {
    pub n: usize,
    pub omega_n: f64,
    pub surface: f64,
}

/// Volume of the unit ball in R^n (n = 1 gives 2).
pub fn omega(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    (h * PI.ln() - log_gamma(h + 1.0).expect("positive argument").magnitude).exp()
}

pub fn geometry(n: usize) -> BallGeometry {
    let omega_n = omega(n);
    BallGeometry { n, omega_n, surface: n as f64 * omega_n }
}

/// P_s(B) of the unit ball.
pub fn ps_ball(n: usize, s: f64) -> Result<f64> {
    if !(s > 0.0 && s < 1.0) {
        return domain(format!("s = {s} must lie in (0,1)"));
    }
    let g = geometry(n);
    Ok(g.surface * lambda_frac(1, n, s)? / (s * (n as f64 - s)))
}

/// V_α(B) of the unit ball.
pub fn valpha_ball(n: usize, alpha: f64) -> Result<f64> {
    let g = geometry(n);
    Ok(g.surface * mu_alpha(1, n, alpha)? / (alpha * (n as f64 + alpha)))
}

/// Per_s(B): (1-s)/ω_{n-1}·P_s(B), and P(B) at s = 1.
pub fn pers_ball(n: usize, s: f64) -> Result<f64> {
    if s == 1.0 {
        return Ok(geometry(n).surface);
    }
    Ok((1.0 - s) / omega(n - 1) * ps_ball(n, s)?)
}

/// Constant nonlocal mean curvature of ∂B.
pub fn curvature_ball(n: usize, s: f64) -> Result<f64> {
    Ok((n as f64 - s) * ps_ball(n, s)? / geometry(n).surface)
}

pub fn ps_ball_radius(n: usize, s: f64, r: f64) -> Result<f64> {
    Ok(r.powf(n as f64 - s) * ps_ball(n, s)?)
}

pub fn valpha_ball_radius(n: usize, alpha: f64, r: f64) -> Result<f64> {
    Ok(r.powf(n as f64 + alpha) * valpha_ball(n, alpha)?)
}

/// Right-hand side of the nonlocal isoperimetric inequality at volume `vol`.
pub fn iso_lower_bound(n: usize, s: f64, vol: f64) -> Result<f64> {
    let nf = n as f64;
    let b = omega(n);
    Ok(ps_ball(n, s)? / b.powf((nf - s) / nf) * vol.powf((nf - s) / nf))
}
