//! Log-gamma, digamma and signed gamma ratios on the real line.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// `sign * exp(magnitude)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub sign: i8,
    pub magnitude: f64,
}

impl SignedLog {
    pub fn value(&self) -> f64 {
        f64::from(self.sign) * self.magnitude.exp()
    }
}

const LANCZOS_G: f64 = 607.0 / 128.0;
const LANCZOS: [f64; 15] = [
    0.999_999_999_999_997_1,
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_746,
    -0.491_913_816_097_620_2,
    3.399_464_998_481_189e-5,
    4.652_362_892_704_858e-5,
    -9.837_447_530_487_956e-5,
    1.580_887_032_249_125e-4,
    -2.102_644_417_241_049e-4,
    2.174_396_181_152_126_5e-4,
    -1.643_181_065_367_639e-4,
    8.441_822_398_385_275e-5,
    -2.619_083_840_158_141e-5,
    3.689_918_265_953_162_7e-6,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

fn is_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// sin(pi x) with exact argument reduction.
fn sin_pi(x: f64) -> f64 {
    let r = x.rem_euclid(2.0);
    let (r, flip) = if r > 1.0 { (r - 1.0, -1.0) } else { (r, 1.0) };
    let r = if r > 0.5 { 1.0 - r } else { r };
    flip * (PI * r).sin()
}

fn lanczos_ln_gamma(x: f64) -> f64 {
    let xm = x - 1.0;
    let mut sum = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (xm + i as f64);
    }
    let t = xm + LANCZOS_G + 0.5;
    HALF_LN_2PI + (xm + 0.5) * t.ln() - t + sum.ln()
}

pub fn log_gamma(x: f64) -> Result<SignedLog> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("log_gamma of non-finite {x}")));
    }
    if is_pole(x) {
        return Err(Error::Pole(x));
    }
    if x >= 0.5 {
        return Ok(SignedLog { sign: 1, magnitude: lanczos_ln_gamma(x) });
    }
    // Gamma(x) Gamma(1-x) = pi / sin(pi x)
    let sp = sin_pi(x);
    let sign = if sp > 0.0 { 1 } else { -1 };
    Ok(SignedLog {
        sign,
        magnitude: PI.ln() - sp.abs().ln() - lanczos_ln_gamma(1.0 - x),
    })
}

const BERNOULLI_STIRLING: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
];

fn stirling_tail(x: f64) -> f64 {
    let x2 = x * x;
    let mut p = 1.0 / x;
    let mut acc = 0.0;
    for c in BERNOULLI_STIRLING {
        acc += c * p;
        p /= x2;
    }
    acc
}

/// Γ(a)/Γ(b).
pub fn gamma_ratio(a: f64, b: f64) -> Result<f64> {
    Ok(ln_gamma_ratio(a, b)?.value())
}

/// Signed log of Γ(a)/Γ(b); large positive arguments avoid the cancellation of two big log-gammas.
pub fn ln_gamma_ratio(a: f64, b: f64) -> Result<SignedLog> {
    if is_pole(a) {
        return Err(Error::Pole(a));
    }
    if is_pole(b) {
        return Err(Error::Pole(b));
    }
    if a == b {
        return Ok(SignedLog { sign: 1, magnitude: 0.0 });
    }
    if a >= 10.0 && b >= 10.0 {
        let d = a - b;
        let magnitude = (a - 0.5) * (d / b).ln_1p() + d * b.ln() - d + stirling_tail(a) - stirling_tail(b);
        return Ok(SignedLog { sign: 1, magnitude });
    }
    let la = log_gamma(a)?;
    let lb = log_gamma(b)?;
    Ok(SignedLog { sign: la.sign * lb.sign, magnitude: la.magnitude - lb.magnitude })
}

const DIGAMMA_ASYM: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
];

pub fn digamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("digamma of non-finite {x}")));
    }
    if is_pole(x) {
        return Err(Error::Pole(x));
    }
    if x < 0.5 {
        // psi(1-x) - psi(x) = pi cot(pi x)
        let c = (PI * (x - x.round())).tan();
        return Ok(digamma(1.0 - x)? - PI / c);
    }
    let mut acc = 0.0;
    let mut y = x;
    while y < 12.0 {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let inv2 = 1.0 / (y * y);
    let mut p = inv2;
    let mut tail = 0.0;
    for c in DIGAMMA_ASYM {
        tail += c * p;
        p *= inv2;
    }
    Ok(acc + y.ln() - 0.5 / y - tail)
}

#[cfg(test)]
mod tests {
    use super::*;

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    // Gamma(1/4), independent literature constant
    const GAMMA_QUARTER: f64 = 3.625_609_908_221_908_3;

    #[test]
    fn trivial_values() {
        let g1 = log_gamma(1.0).unwrap();
        assert_eq!(g1.sign, 1);
        assert!(g1.magnitude.abs() < 1e-14);
        let g5 = log_gamma(5.0).unwrap();
        assert!((g5.magnitude - 24f64.ln()).abs() < 1e-13 * 24f64.ln());
        let gh = log_gamma(0.5).unwrap();
        assert!((gh.magnitude - PI.sqrt().ln()).abs() < 1e-14);
    }

    #[test]
    fn negative_quarter_matches_reflection_oracle() {
        // Gamma(-1/4) = -4 Gamma(3/4) = -4 pi sqrt2 / Gamma(1/4)
        let want = -4.0 * PI * 2f64.sqrt() / GAMMA_QUARTER;
        let got = log_gamma(-0.25).unwrap();
        assert_eq!(got.sign, -1);
        assert!((got.value() - want).abs() < 1e-13 * want.abs());
        let r = gamma_ratio(0.5, -0.25).unwrap();
        assert!(r < 0.0);
        assert!((r - PI.sqrt() / want).abs() < 1e-12 * r.abs());
    }

    #[test]
    fn quarter_against_literature() {
        let g = log_gamma(0.25).unwrap().value();
        assert!((g - GAMMA_QUARTER).abs() < 1e-13 * GAMMA_QUARTER);
    }

    #[test]
    fn poles() {
        for x in [0.0, -1.0, -7.0] {
            assert!(matches!(log_gamma(x), Err(Error::Pole(_))));
            assert!(matches!(digamma(x), Err(Error::Pole(_))));
            assert!(gamma_ratio(x, 1.5).is_err());
            assert!(gamma_ratio(1.5, x).is_err());
        }
    }

    #[test]
    fn ratio_examples() {
        assert!((gamma_ratio(5.0, 4.0).unwrap() - 4.0).abs() < 1e-13);
        assert!((gamma_ratio(1.5, 0.5).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn large_ratio_matches_product() {
        // Gamma(k+a)/Gamma(k+b) by telescoping from a small base
        let (a, b) = (1.75, 0.25);
        let mut r = gamma_ratio(a, b).unwrap();
        for j in 0..2000 {
            r *= (j as f64 + a) / (j as f64 + b);
            if j % 97 == 0 {
                let k = (j + 1) as f64;
                let direct = gamma_ratio(k + a, k + b).unwrap();
                assert!((direct / r - 1.0).abs() < 1e-12, "k={k} {direct} {r}");
            }
        }
    }

    #[test]
    fn digamma_values() {
        assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-14);
        assert!((digamma(2.0).unwrap() - digamma(1.0).unwrap() - 1.0).abs() < 1e-14);
        let dup = digamma(1.0).unwrap() - 2.0 * 2f64.ln();
        assert!((digamma(0.5).unwrap() - dup).abs() < 1e-13);
        // psi(1/4) = -gamma - pi/2 - 3 ln 2
        let q = -EULER_GAMMA - PI / 2.0 - 3.0 * 2f64.ln();
        assert!((digamma(0.25).unwrap() - q).abs() < 1e-13);
        // psi(-1/2) = psi(1/2) + 2
        assert!((digamma(-0.5).unwrap() - digamma(0.5).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn digamma_matches_log_gamma_derivative() {
        for &x in &[0.3, 1.7, 4.2, 13.5, 37.0] {
            let h = 1e-5;
            let fd = (log_gamma(x + h).unwrap().magnitude - log_gamma(x - h).unwrap().magnitude) / (2.0 * h);
            assert!((fd - digamma(x).unwrap()).abs() < 1e-8);
        }
    }
}
