//! Eigenvalues of the hypersingular and Riesz operators on the unit sphere.

use crate::error::{domain, Result};
use crate::specfun::{digamma, gamma_ratio, ln_gamma_ratio, log_gamma};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const DEFAULT_KMAX: usize = 512;

/// Distance from 1 below which `mu_alpha` switches to the digamma form.
pub const ALPHA_ONE_BAND: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub n: usize,
    pub s: f64,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
}

impl Params {
    pub fn new(n: usize, s: f64, alpha: f64) -> Result<Self> {
        let p = Params { n, s, alpha, beta: None, m: None };
        p.validate()?;
        Ok(p)
    }

    pub fn with_beta(mut self, beta: f64) -> Result<Self> {
        self.beta = Some(beta);
        self.validate()?;
        Ok(self)
    }

    pub fn with_m(mut self, m: f64) -> Result<Self> {
        self.m = Some(m);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return domain(format!("dimension n = {} must be at least 2", self.n));
        }
        if !(self.s > 0.0 && self.s <= 1.0) {
            return domain(format!("s = {} must lie in (0, 1]", self.s));
        }
        if !(self.alpha > 0.0 && self.alpha < self.n as f64) {
            return domain(format!("alpha = {} must lie in (0, n)", self.alpha));
        }
        if let Some(b) = self.beta {
            if !(b > 0.0 && b.is_finite()) {
                return domain(format!("beta = {b} must be positive"));
            }
        }
        if let Some(m) = self.m {
            if !(m > 0.0 && m.is_finite()) {
                return domain(format!("m = {m} must be positive"));
            }
        }
        Ok(())
    }

    pub fn is_local(&self) -> bool {
        self.s == 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumKind {
    LambdaS,
    LambdaLocal,
    MuAlpha,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralSequence {
    pub kind: SpectrumKind,
    pub params: Params,
    pub values: Vec<f64>,
}

impl SpectralSequence {
    /// Values for k = 0..=kmax.
    pub fn materialize(kind: SpectrumKind, params: Params, kmax: usize) -> Result<Self> {
        params.validate()?;
        let n = params.n;
        let values = (0..=kmax)
            .map(|k| match kind {
                SpectrumKind::LambdaS => lambda_frac(k, n, params.s),
                SpectrumKind::LambdaLocal => Ok(lambda_local(k, n)),
                SpectrumKind::MuAlpha => mu_alpha(k, n, params.alpha),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SpectralSequence { kind, params, values })
    }

    pub fn get(&self, k: usize) -> f64 {
        self.values[k]
    }
}

/// Dimension of the space of degree-k spherical harmonics on S^{n-1}.
pub fn multiplicity(k: usize, n: usize) -> usize {
    let binom = |m: usize, r: usize| -> usize {
        if m < r {
            return 0;
        }
        let r = r.min(m - r);
        let mut acc: u128 = 1;
        for j in 0..r {
            acc = acc * (m - j) as u128 / (j + 1) as u128;
        }
        acc as usize
    };
    if k == 0 {
        return 1;
    }
    binom(k + n - 1, n - 1) - if k >= 2 { binom(k + n - 3, n - 1) } else { 0 }
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return domain(format!("dimension n = {n} must be at least 2"));
    }
    Ok(())
}

/// Γ(k+a)/Γ(k+b) − Γ(a)/Γ(b).
fn shifted_ratio_gap(k: usize, a: f64, b: f64) -> Result<f64> {
    if k == 0 {
        return Ok(0.0);
    }
    let kf = k as f64;
    let hi = ln_gamma_ratio(kf + a, kf + b)?.value();
    let lo = gamma_ratio(a, b)?;
    Ok(hi - lo)
}

/// Eigenvalue of D^γ on degree-k harmonics.
pub fn lambda_star(k: usize, gamma: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    if !(gamma > 0.0 && gamma < 2.0 && gamma != 1.0) {
        return domain(format!("gamma = {gamma} must lie in (0,1) or (1,2)"));
    }
    let nm1 = (n - 1) as f64;
    shifted_ratio_gap(k, (nm1 + gamma) / 2.0, (nm1 - gamma) / 2.0)
}

/// Eigenvalue of the Riesz operator R^γ on degree-k harmonics.
pub fn mu_star(k: usize, gamma: f64, n: usize) -> Result<f64> {
    check_n(n)?;
    let nm1 = (n - 1) as f64;
    if !(gamma > 0.0 && gamma < nm1) {
        return domain(format!("gamma = {gamma} must lie in (0, n-1)"));
    }
    let kf = k as f64;
    Ok(ln_gamma_ratio(kf + (nm1 - gamma) / 2.0, kf + (nm1 + gamma) / 2.0)?.value())
}

/// Constant converting D^{1+s} eigenvalues into those of I_s.
pub fn frac_prefactor(n: usize, s: f64) -> Result<f64> {
    let nm1 = (n - 1) as f64;
    Ok(2f64.powf(1.0 - s) * PI.powf(nm1 / 2.0) / (1.0 + s) * gamma_ratio((1.0 - s) / 2.0, (n as f64 + s) / 2.0)?)
}

/// λ_k^s, eigenvalue of the seminorm [u]_{(1+s)/2}.
pub fn lambda_frac(k: usize, n: usize, s: f64) -> Result<f64> {
    check_n(n)?;
    if !(s > 0.0 && s < 1.0) {
        return domain(format!("s = {s} must lie in (0,1)"));
    }
    if k == 0 {
        return Ok(0.0);
    }
    Ok(frac_prefactor(n, s)? * lambda_star(k, 1.0 + s, n)?)
}

/// Laplace-Beltrami eigenvalue k(k+n-2).
pub fn lambda_local(k: usize, n: usize) -> f64 {
    let k = k as f64;
    k * (k + n as f64 - 2.0)
}

/// λ_k^s for s < 1 and k(k+n-2) at s = 1.
pub fn lambda_any(k: usize, n: usize, s: f64) -> Result<f64> {
    if s == 1.0 {
        check_n(n)?;
        Ok(lambda_local(k, n))
    } else {
        lambda_frac(k, n, s)
    }
}

/// μ_k^α, eigenvalue of the seminorm [u]_{(1-α)/2}.
pub fn mu_alpha(k: usize, n: usize, alpha: f64) -> Result<f64> {
    check_n(n)?;
    let nf = n as f64;
    if !(alpha > 0.0 && alpha < nf) {
        return domain(format!("alpha = {alpha} must lie in (0, n)"));
    }
    if k == 0 {
        return Ok(0.0);
    }
    let half_pi = PI.powf((nf - 1.0) / 2.0);
    if (alpha - 1.0).abs() < ALPHA_ONE_BAND {
        let c = (nf - 1.0) / 2.0;
        let g = log_gamma(c)?.value();
        return Ok(4.0 * half_pi / g * (digamma(k as f64 + c)? - digamma(c)?));
    }
    let a = (nf - alpha) / 2.0;
    let b = (nf - 2.0 + alpha) / 2.0;
    let gap = shifted_ratio_gap(k, a, b)?;
    if alpha < 1.0 {
        let c = 2f64.powf(1.0 + alpha) * half_pi / (1.0 - alpha) * gamma_ratio((1.0 + alpha) / 2.0, a)?;
        Ok(c * gap)
    } else {
        let c = 2f64.powf(alpha) * half_pi * gamma_ratio((alpha - 1.0) / 2.0, a)?;
        Ok(-c * gap)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn params_validation() {
        assert!(Params::new(1, 0.5, 0.5).is_err());
        assert!(Params::new(2, 0.0, 0.5).is_err());
        assert!(Params::new(2, 1.1, 0.5).is_err());
        assert!(Params::new(2, 0.5, 2.0).is_err());
        assert!(Params::new(3, 1.0, 2.0).unwrap().with_beta(-1.0).is_err());
        assert!(Params::new(3, 1.0, 2.0).unwrap().with_m(0.0).is_err());
        assert!(Params::new(3, 1.0, 2.9).is_ok());
    }

    #[test]
    fn multiplicities() {
        assert_eq!(multiplicity(0, 2), 1);
        assert_eq!(multiplicity(3, 2), 2);
        for k in 0..10 {
            assert_eq!(multiplicity(k, 3), 2 * k + 1);
        }
        assert_eq!(multiplicity(2, 4), 9);
        assert_eq!(multiplicity(1, 6), 6);
    }

    #[test]
    fn lambda_star_closed_forms() {
        for n in 2..=6 {
            for &g in &[0.3, 0.9, 1.2, 1.5, 1.9] {
                assert_eq!(lambda_star(0, g, n).unwrap(), 0.0);
                let kappa = (n as f64 - 1.0 - g) / 2.0;
                let l1 = lambda_star(1, g, n).unwrap();
                let want = g / kappa * gamma_ratio(g + kappa, kappa).unwrap();
                assert!(rel(l1, want) < 1e-12, "n={n} g={g}");
                let l2 = lambda_star(2, g, n).unwrap();
                assert!(rel(l2 / l1, (1.0 + g + 2.0 * kappa) / (1.0 + kappa)) < 1e-12);
            }
        }
        assert!(lambda_star(3, 1.0, 3).is_err());
        assert!(lambda_star(3, 2.0, 3).is_err());
    }

    #[test]
    fn mu_star_examples() {
        assert!(rel(mu_star(1, 1.0, 3).unwrap(), 2.0 / 3.0) < 1e-14);
        for k in 0..30 {
            let r = mu_star(k + 1, 0.7, 4).unwrap() / mu_star(k, 0.7, 4).unwrap();
            let kf = k as f64;
            assert!(rel(r, (kf + (3.0 - 0.7) / 2.0) / (kf + (3.0 + 0.7) / 2.0)) < 1e-12);
            assert!(r < 1.0);
        }
        assert!(mu_star(1, 2.0, 3).is_err());
        assert!(mu_star(10_000, 1.5, 3).unwrap() < 1e-5);
    }

    #[test]
    fn local_examples() {
        assert_eq!(lambda_local(0, 4), 0.0);
        assert_eq!(lambda_local(2, 3), 6.0);
        assert_eq!(lambda_local(2, 4), 8.0);
        assert_eq!(lambda_local(5, 2), 25.0);
    }

    #[test]
    fn ratio_identities() {
        assert!(rel(lambda_frac(2, 3, 0.5).unwrap() / lambda_frac(1, 3, 0.5).unwrap(), 2.4) < 1e-12);
        assert!(rel(mu_alpha(2, 3, 2.0).unwrap() / mu_alpha(1, 3, 2.0).unwrap(), 1.2) < 1e-12);
    }

    #[test]
    fn mu_n3_alpha2_matches_sphere_integral() {
        // integral over S^2 of |z - y| dH_y = 16 pi / 3, computed by colatitude quadrature
        let m = 200_000;
        let mut acc = 0.0;
        for j in 0..m {
            let theta = PI * (j as f64 + 0.5) / m as f64;
            acc += 2.0 * (theta / 2.0).sin() * 2.0 * PI * theta.sin();
        }
        let oracle = acc * PI / m as f64;
        assert!(rel(oracle, 16.0 * PI / 3.0) < 1e-9);
        assert!(rel(mu_alpha(1, 3, 2.0).unwrap(), oracle) < 1e-9);
    }

    #[test]
    fn lambda1_matches_circle_quadrature() {
        // (1/P(B)) double integral of |x-y|^{-(n+s-2)} on the circle, singularity removed by theta = pi w^2
        let s = 0.5;
        let p = s;
        let m = 400_000;
        let mut acc = 0.0;
        for j in 0..m {
            let w = (j as f64 + 0.5) / m as f64;
            let theta = PI * w * w;
            acc += (2.0 * (theta / 2.0).sin()).powf(-p) * 2.0 * PI * w;
        }
        let inner = 2.0 * acc / m as f64;
        assert!(rel(lambda_frac(1, 2, s).unwrap(), inner) < 1e-6);
    }

    #[test]
    fn mu_alpha_one_branch() {
        for n in 2..=6 {
            for k in 1..=20 {
                let eps = 1e-4;
                let lo = mu_alpha(k, n, 1.0 - eps).unwrap();
                let hi = mu_alpha(k, n, 1.0 + eps).unwrap();
                let mid = mu_alpha(k, n, 1.0).unwrap();
                assert!((lo - hi).abs() <= 50.0 * eps * mid, "n={n} k={k} {lo} {hi}");
                assert!((lo - mid).abs() <= 50.0 * eps * mid);
            }
        }
    }

    #[test]
    fn lambda_frac_matches_direct_product_oracle() {
        for n in 2..=6 {
            for &s in &[0.1, 0.5, 0.9] {
                let nf = n as f64;
                let pre = 2f64.powf(1.0 - s) * PI.powf((nf - 1.0) / 2.0) / (1.0 + s)
                    * gamma_ratio((1.0 - s) / 2.0, (nf + s) / 2.0).unwrap();
                let a = (nf + s) / 2.0;
                let b = (nf - 2.0 - s) / 2.0;
                let r0 = gamma_ratio(a, b).unwrap();
                let mut r = r0;
                for k in 1..=500usize {
                    let j = (k - 1) as f64;
                    r *= (j + a) / (j + b);
                    let direct = pre * (r - r0);
                    let got = lambda_frac(k, n, s).unwrap();
                    assert!(rel(got, direct) < 1e-10, "n={n} s={s} k={k}");
                }
            }
        }
    }

    #[test]
    fn sequences_start_at_zero() {
        let p = Params::new(3, 0.5, 2.0).unwrap();
        for kind in [SpectrumKind::LambdaS, SpectrumKind::LambdaLocal, SpectrumKind::MuAlpha] {
            let seq = SpectralSequence::materialize(kind, p, 40).unwrap();
            assert_eq!(seq.values.len(), 41);
            assert_eq!(seq.get(0), 0.0);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(lambda_frac(2, 3, 1.0).is_err());
        assert!(mu_alpha(2, 3, 3.0).is_err());
        assert!(mu_alpha(2, 1, 0.5).is_err());
    }
}
