//! Stability thresholds β⋆, m⋆ and the explicit lemma constants.

use crate::ball_energy::{geometry, omega, pers_ball, ps_ball, valpha_ball};
use crate::error::{domain, Result};
use crate::spectrum::{lambda_any, mu_alpha, Params};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaMode {
    Spectral { kmax: usize },
    Closed,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub params: Params,
    pub beta_star_spectral: f64,
    pub beta_star_closed: f64,
    pub argmin_k: usize,
    pub m_star: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioTable {
    pub argmin_k: usize,
    /// (k, (λ_k - λ_1)/(μ_k - μ_1)) for k = 2..=kmax.
    pub ratios: Vec<(usize, f64)>,
}

/// Normalization in front of the eigenvalue ratio: (1-s)/ω_{n-1}, or 1 at s = 1.
fn ratio_weight(p: &Params) -> f64 {
    if p.is_local() {
        1.0
    } else {
        (1.0 - p.s) / omega(p.n - 1)
    }
}

pub fn ratio_min_check(params: &Params, kmax: usize) -> Result<RatioTable> {
    params.validate()?;
    if kmax < 2 {
        return domain(format!("kmax = {kmax} must be at least 2"));
    }
    let (n, s, a) = (params.n, params.s, params.alpha);
    let l1 = lambda_any(1, n, s)?;
    let m1 = mu_alpha(1, n, a)?;
    let mut ratios = Vec::with_capacity(kmax - 1);
    for k in 2..=kmax {
        let r = (lambda_any(k, n, s)? - l1) / (mu_alpha(k, n, a)? - m1);
        ratios.push((k, r));
    }
    let argmin_k = ratios
        .iter()
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|x| x.0)
        .expect("non-empty table");
    Ok(RatioTable { argmin_k, ratios })
}

pub fn beta_star(params: &Params, mode: BetaMode) -> Result<f64> {
    params.validate()?;
    let (n, s, a) = (params.n, params.s, params.alpha);
    let nf = n as f64;
    match mode {
        BetaMode::Spectral { kmax } => {
            let t = ratio_min_check(params, kmax)?;
            let min = t.ratios.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
            Ok(ratio_weight(params) * min)
        }
        BetaMode::Closed => {
            let v = valpha_ball(n, a)?;
            if params.is_local() {
                Ok((nf + 1.0) / (nf - a) * geometry(n).surface / (a * v))
            } else {
                Ok((nf + s) / (nf - a) * s * (1.0 - s) * ps_ball(n, s)? / (a * omega(n - 1) * v))
            }
        }
    }
}

pub fn m_star(params: &Params) -> Result<f64> {
    params.validate()?;
    m_star_with(params, valpha_ball(params.n, params.alpha)?)
}

/// m⋆ with a supplied value of V_α(B), e.g. an independent estimate.
pub fn m_star_with(params: &Params, v: f64) -> Result<f64> {
    params.validate()?;
    if !(v > 0.0 && v.is_finite()) {
        return domain("V_alpha(B) must be positive");
    }
    let (n, s, a) = (params.n, params.s, params.alpha);
    let nf = n as f64;
    let inner = if params.is_local() {
        (nf + 1.0) / (nf - a) * geometry(n).surface / (a * v)
    } else {
        (nf + s) / (nf - a) * s * (1.0 - s) * ps_ball(n, s)? / (omega(n - 1) * a * v)
    };
    Ok(omega(n) * inner.powf(nf / (a + s)))
}

/// Charge β of the unit-volume problem equivalent to mass m: (m/|B|)^{(α+s)/n}.
pub fn beta_from_mass(params: &Params, m: f64) -> Result<f64> {
    params.validate()?;
    if !(m > 0.0 && m.is_finite()) {
        return domain("mass must be positive");
    }
    Ok((m / omega(params.n)).powf((params.alpha + params.s) / params.n as f64))
}

pub fn threshold_report(params: &Params, kmax: usize) -> Result<ThresholdReport> {
    let table = ratio_min_check(params, kmax)?;
    let min = table.ratios.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    Ok(ThresholdReport {
        params: *params,
        beta_star_spectral: ratio_weight(params) * min,
        beta_star_closed: beta_star(params, BetaMode::Closed)?,
        argmin_k: table.argmin_k,
        m_star: m_star(params)?,
    })
}

/// Inputs that the lemmas leave non-explicit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LedgerInputs {
    /// Besicovitch covering constant ξ(n).
    pub besicovitch: f64,
    /// Constant C(n,s) of the quantitative isoperimetric inequality.
    pub iso_constant: f64,
    /// Relative margin of Λ above Λ_0.
    pub lambda_margin: f64,
}

impl LedgerInputs {
    /// Conservative placeholders: ξ(n) = 5^n and C(n,s) = 1.
    pub fn defaults(n: usize) -> Self {
        LedgerInputs { besicovitch: 5f64.powi(n as i32), iso_constant: 1.0, lambda_margin: 1e-6 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsLedger {
    pub n: usize,
    pub s: f64,
    pub alpha: f64,
    pub inputs: LedgerInputs,
    pub lambda: f64,
    pub c0_density: f64,
    pub r0_density: f64,
    pub chi1: f64,
    pub chi2: f64,
    pub c1_trunc: f64,
    pub c2_trunc: f64,
    pub lambda0: f64,
    pub eps1: f64,
    pub c4: f64,
    pub m1: f64,
    pub r0: f64,
    pub c7: f64,
    pub lambda1: f64,
    pub c8: f64,
}

impl ConstantsLedger {
    pub fn named(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("c0_density", self.c0_density),
            ("r0_density", self.r0_density),
            ("chi1", self.chi1),
            ("chi2", self.chi2),
            ("C1_trunc", self.c1_trunc),
            ("C2_trunc", self.c2_trunc),
            ("Lambda0", self.lambda0),
            ("eps1", self.eps1),
            ("C4", self.c4),
            ("m1", self.m1),
            ("R0", self.r0),
            ("C7", self.c7),
            ("Lambda1", self.lambda1),
            ("C8", self.c8),
        ]
    }
}

pub fn constants_ledger(n: usize, s: f64, alpha: f64) -> Result<ConstantsLedger> {
    constants_ledger_with(n, s, alpha, LedgerInputs::defaults(n))
}

pub fn constants_ledger_with(n: usize, s: f64, alpha: f64, inputs: LedgerInputs) -> Result<ConstantsLedger> {
    if !(s > 0.0 && s < 1.0) {
        return domain(format!("s = {s} must lie in (0,1)"));
    }
    Params::new(n, s, alpha)?;
    if !(inputs.besicovitch > 0.0 && inputs.iso_constant > 0.0 && inputs.lambda_margin > 0.0) {
        return domain("ledger inputs must be positive");
    }
    let nf = n as f64;
    let g = geometry(n);
    let vol = g.omega_n;
    let per = g.surface;
    let ps = ps_ball(n, s)?;
    let va = valpha_ball(n, alpha)?;
    let pers = pers_ball(n, s)?;
    let vol_pow = vol.powf((nf - s) / nf);

    let lambda0 = (1.0 - s) * ps / vol;
    let lambda = lambda0 * (1.0 + inputs.lambda_margin);
    let c0_density = (s / (8.0 * vol * 2f64.powf(nf / s)) * (1.0 - s) * ps / per).powf(nf / s);
    let r0_density = ((1.0 - s) * ps / (2.0 * lambda * vol)).powf(1.0 / s);
    let chi1 = (1.0 - s) * ps / (4.0 * vol_pow * inputs.besicovitch);
    let chi2 = 2f64.powf(3.0 + nf / s) * vol_pow * per / (s * (1.0 - s) * ps);
    let c1_trunc = 2f64.powf(1.0 + (nf - s) / s) * (4.0 * vol_pow * per / (s * (1.0 - s) * ps)).powf(1.0 / s);
    let c2_trunc = 2.0 * vol_pow / ((1.0 - s) * ps);
    let eps1 = 0.5 * 1f64.min((1.0 / ((lambda + 1.0) * c2_trunc)).powf(nf / s)).min(4.0 * vol);
    let c4 = 1.0 + c1_trunc * (2.0 * eps1).powf(1.0 / nf);
    let c7 = 2.0 * (pers + va);
    let c8 = (1.0 + va / pers).powf(nf / (nf - s));
    let lambda1 = 4.0 * c7 / vol + 6.0 * vol * (1.0 + c8) * c8.powf(alpha / nf) / alpha;
    let r0 = 3.0 * (1.0 + c1_trunc);
    let c = inputs.iso_constant;
    let m1_inner = 1f64
        .min(pers / (8.0 * vol * vol * c * va))
        .min(pers / (2.0 * vol * vol * c * va) * (vol / (8.0 * c2_trunc * c7)).powf(2.0 * nf / s));
    let m1 = vol * m1_inner.powf(nf / (alpha + s));

    Ok(ConstantsLedger {
        n,
        s,
        alpha,
        inputs,
        lambda,
        c0_density,
        r0_density,
        chi1,
        chi2,
        c1_trunc,
        c2_trunc,
        lambda0,
        eps1,
        c4,
        m1,
        r0,
        c7,
        lambda1,
        c8,
    })
}

/// Extremes of the uniformity quantities over an s-grid.
#[derive(Debug, Clone, Serialize)]
pub struct UniformitySummary {
    pub s_grid: Vec<f64>,
    pub inf_chi1: f64,
    pub inf_inv_chi2: f64,
    pub sup_c1_plus_c2: f64,
    pub argsup_c1_plus_c2: f64,
    pub inf_eps1: f64,
    pub sup_lambda0_plus_c4: f64,
}

/// Grid s_0, s_0 + 0.1, ... capped by 0.999.
pub fn s_grid(s0: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let mut j = 0;
    loop {
        let s = s0 + 0.1 * j as f64;
        if s >= 0.999 - 1e-12 {
            break;
        }
        v.push((s * 1e10).round() / 1e10);
        j += 1;
    }
    v.push(0.999);
    v
}

pub fn uniformity(n: usize, alpha: f64, s0: f64) -> Result<UniformitySummary> {
    let grid = s_grid(s0);
    let mut out = UniformitySummary {
        s_grid: grid.clone(),
        inf_chi1: f64::INFINITY,
        inf_inv_chi2: f64::INFINITY,
        sup_c1_plus_c2: f64::NEG_INFINITY,
        argsup_c1_plus_c2: f64::NAN,
        inf_eps1: f64::INFINITY,
        sup_lambda0_plus_c4: f64::NEG_INFINITY,
    };
    for &s in &grid {
        let l = constants_ledger(n, s, alpha)?;
        out.inf_chi1 = out.inf_chi1.min(l.chi1);
        out.inf_inv_chi2 = out.inf_inv_chi2.min(1.0 / l.chi2);
        if l.c1_trunc + l.c2_trunc > out.sup_c1_plus_c2 {
            out.sup_c1_plus_c2 = l.c1_trunc + l.c2_trunc;
            out.argsup_c1_plus_c2 = s;
        }
        out.inf_eps1 = out.inf_eps1.min(l.eps1);
        out.sup_lambda0_plus_c4 = out.sup_lambda0_plus_c4.max(l.lambda0 + l.c4);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn flagship_values() {
        let p = Params::new(3, 1.0, 2.0).unwrap();
        assert!((m_star(&p).unwrap() - 5.0).abs() < 1e-9);
        assert!(rel(beta_star(&p, BetaMode::Closed).unwrap(), 15.0 / (4.0 * PI)) < 1e-12);
        assert!(rel(beta_star(&p, BetaMode::Spectral { kmax: 500 }).unwrap(), 15.0 / (4.0 * PI)) < 1e-10);
        assert!(rel(beta_from_mass(&p, 5.0).unwrap(), 15.0 / (4.0 * PI)) < 1e-12);
        let q = Params::new(2, 0.4, 1.3).unwrap();
        let m = m_star(&q).unwrap();
        assert!(rel(beta_from_mass(&q, m).unwrap(), beta_star(&q, BetaMode::Closed).unwrap()) < 1e-12);
    }

    #[test]
    fn m_star_is_omega_times_beta_power() {
        let p = Params::new(2, 0.5, 1.0).unwrap();
        let b = beta_star(&p, BetaMode::Closed).unwrap();
        assert!(rel(m_star(&p).unwrap(), PI * b.powf(2.0 / 1.5)) < 1e-12);
    }

    #[test]
    fn blow_up_near_alpha_n() {
        for n in 2..=4 {
            let nf = n as f64;
            let far = Params::new(n, 0.5, nf - 1e-2).unwrap();
            let near = Params::new(n, 0.5, nf - 1e-3).unwrap();
            let bf = beta_star(&far, BetaMode::Closed).unwrap();
            let bn = beta_star(&near, BetaMode::Closed).unwrap();
            // β⋆(n-α) stays bounded below, so β⋆ grows roughly like 1/(n-α)
            assert!(bn * 1e-3 > 0.5 * bf * 1e-2);
            assert!(bn > 5.0 * bf);
            let mf = m_star(&Params::new(n, 0.5, nf - 0.1).unwrap()).unwrap();
            let mn = m_star(&Params::new(n, 0.5, nf - 0.01).unwrap()).unwrap();
            assert!(mn > mf);
        }
    }

    #[test]
    fn ratio_argmin_examples() {
        for (n, s, a) in [(3, 0.5, 2.0), (2, 0.9, 0.3), (4, 1.0, 1.0)] {
            let t = ratio_min_check(&Params::new(n, s, a).unwrap(), 500).unwrap();
            assert_eq!(t.argmin_k, 2);
            assert_eq!(t.ratios.len(), 499);
        }
        assert!(ratio_min_check(&Params::new(3, 0.5, 2.0).unwrap(), 1).is_err());
    }

    #[test]
    fn lambda0_matches_pers_form() {
        let l = constants_ledger(2, 0.5, 1.0).unwrap();
        let via_pers = pers_ball(2, 0.5).unwrap() * omega(1) / omega(2);
        assert!(rel(l.lambda0, via_pers) < 1e-12);
        let l = constants_ledger(3, 0.7, 1.0).unwrap();
        assert!(rel(l.r0, 3.0 * (1.0 + l.c1_trunc)) < 1e-15);
    }

    #[test]
    fn besicovitch_enters_chi1_inversely() {
        let base = constants_ledger(3, 0.5, 1.0).unwrap();
        let mut inp = LedgerInputs::defaults(3);
        inp.besicovitch *= 2.0;
        let other = constants_ledger_with(3, 0.5, 1.0, inp).unwrap();
        assert!(rel(base.chi1, 2.0 * other.chi1) < 1e-15);
        assert_eq!(base.chi2, other.chi2);
    }

    #[test]
    fn ledger_positive_and_uniform() {
        for n in 2..=4 {
            for &a in &[0.5, 1.0, n as f64 - 0.5] {
                for s0 in [0.2, 0.5] {
                    for &s in &s_grid(s0) {
                        let l = constants_ledger(n, s, a).unwrap();
                        for (name, v) in l.named() {
                            assert!(v > 0.0 && v.is_finite(), "{name} = {v} at n={n} s={s} a={a}");
                        }
                    }
                    let u = uniformity(n, a, s0).unwrap();
                    assert!(u.inf_chi1 > 0.0 && u.inf_inv_chi2 > 0.0 && u.inf_eps1 > 0.0);
                    assert!(u.sup_c1_plus_c2.is_finite() && u.sup_lambda0_plus_c4.is_finite());
                    assert!(u.argsup_c1_plus_c2 < 0.999);
                }
            }
        }
    }

    #[test]
    fn grid_shape() {
        let g = s_grid(0.2);
        assert_eq!(g.first(), Some(&0.2));
        assert_eq!(g.last(), Some(&0.999));
        assert_eq!(g.len(), 9);
    }
}
