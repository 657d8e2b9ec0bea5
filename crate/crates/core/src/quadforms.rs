//! Harmonic profiles on the sphere and the quadratic forms QP_s, QV_α.

use crate::ball_energy::omega;
use crate::error::{domain, Error, Result};
use crate::harmonics::eval_basis;
use crate::spectrum::{lambda_any, lambda_local, mu_alpha, multiplicity, Params};
use crate::thresholds::{beta_star, BetaMode};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Admission tolerance |a_0| ≤ MEAN_ZERO_TOL·‖u‖ for the stability form.
pub const MEAN_ZERO_TOL: f64 = 1e-12;

/// Relative slack on β ≤ β⋆ so that β⋆ typed in as a decimal counts as the closed endpoint.
pub const VERDICT_ROUNDOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub k: usize,
    pub i: usize,
    pub a: f64,
}

/// A function on ∂B ⊂ R^n given by its coefficients on the orthonormal basis Y_k^i.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicProfile {
    n: usize,
    coeffs: BTreeMap<(usize, usize), f64>,
}

#[derive(Serialize, Deserialize)]
struct ProfileFile {
    n: usize,
    coefficients: Vec<Coefficient>,
}

impl HarmonicProfile {
    pub fn zero(n: usize) -> Self {
        HarmonicProfile { n, coeffs: BTreeMap::new() }
    }

    pub fn single_mode(n: usize, k: usize, i: usize, a: f64) -> Result<Self> {
        let mut p = Self::zero(n);
        p.set(k, i, a)?;
        Ok(p)
    }

    pub fn from_coefficients(n: usize, coeffs: &[Coefficient]) -> Result<Self> {
        let mut p = Self::zero(n);
        for c in coeffs {
            let prev = p.get(c.k, c.i);
            p.set(c.k, c.i, prev + c.a)?;
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn set(&mut self, k: usize, i: usize, a: f64) -> Result<()> {
        if self.n < 2 {
            return domain(format!("profile dimension {} must be at least 2", self.n));
        }
        let d = multiplicity(k, self.n);
        if i == 0 || i > d {
            return Err(Error::Input(format!("index i = {i} outside 1..={d} for degree {k}")));
        }
        if !a.is_finite() {
            return Err(Error::Input(format!("coefficient ({k},{i}) is not finite")));
        }
        self.coeffs.insert((k, i), a);
        Ok(())
    }

    pub fn get(&self, k: usize, i: usize) -> f64 {
        self.coeffs.get(&(k, i)).copied().unwrap_or(0.0)
    }

    pub fn coefficients(&self) -> Vec<Coefficient> {
        self.coeffs.iter().map(|(&(k, i), &a)| Coefficient { k, i, a }).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.coeffs.iter().map(|(&(k, i), &a)| (k, i, a))
    }

    pub fn kmax(&self) -> usize {
        self.coeffs.keys().map(|&(k, _)| k).max().unwrap_or(0)
    }

    /// ‖u‖² by Parseval.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.values().map(|a| a * a).sum()
    }

    pub fn a0(&self) -> f64 {
        self.get(0, 1)
    }

    pub fn scaled(&self, c: f64) -> Self {
        HarmonicProfile { n: self.n, coeffs: self.coeffs.iter().map(|(&key, &a)| (key, c * a)).collect() }
    }

    /// Σ w(k) (a_k^i)².
    pub fn weighted_sum<F: Fn(usize) -> Result<f64>>(&self, w: F) -> Result<f64> {
        let mut by_k: BTreeMap<usize, f64> = BTreeMap::new();
        for (&(k, _), &a) in &self.coeffs {
            *by_k.entry(k).or_insert(0.0) += a * a;
        }
        let mut acc = 0.0;
        for (k, sq) in by_k {
            acc += w(k)? * sq;
        }
        Ok(acc)
    }

    pub fn eval(&self, x: &[f64; 3]) -> Result<f64> {
        let kmax = self.kmax();
        let basis = eval_basis(self.n, kmax, x)?;
        let mut acc = 0.0;
        for (&(k, i), &a) in &self.coeffs {
            acc += a * basis[crate::harmonics::flat_index(self.n, k, i)];
        }
        Ok(acc)
    }

    /// Tangential gradient at a unit vector by central differences along great circles.
    pub fn tangential_gradient(&self, x: &[f64; 3]) -> Result<[f64; 3]> {
        tangential_gradient_of(self.n, x, |p| self.eval(p))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ProfileFile { n: self.n, coefficients: self.coefficients() })
            .expect("profile serializes")
    }

    /// Accepts `{"n": .., "coefficients": [{k,i,a}, ..]}` or a bare list of triples with `n` given.
    pub fn from_json(text: &str, n: Option<usize>) -> Result<Self> {
        if let Ok(f) = serde_json::from_str::<ProfileFile>(text) {
            return Self::from_coefficients(f.n, &f.coefficients);
        }
        let list: Vec<Coefficient> =
            serde_json::from_str(text).map_err(|e| Error::Input(format!("profile JSON: {e}")))?;
        let n = n.ok_or_else(|| Error::Input("a bare coefficient list needs the dimension n".into()))?;
        Self::from_coefficients(n, &list)
    }
}

pub(crate) fn tangent_basis(n: usize, x: &[f64; 3]) -> Vec<[f64; 3]> {
    if n == 2 {
        return vec![[-x[1], x[0], 0.0]];
    }
    let r = if x[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let mut t1 = cross(x, &r);
    let nrm = dot(&t1, &t1).sqrt();
    t1.iter_mut().for_each(|v| *v /= nrm);
    let t2 = cross(x, &t1);
    vec![t1, t2]
}

pub(crate) fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

const FD_STEP: f64 = 1e-5;

pub(crate) fn tangential_gradient_of<F>(n: usize, x: &[f64; 3], f: F) -> Result<[f64; 3]>
where
    F: Fn(&[f64; 3]) -> Result<f64>,
{
    let (sn, c) = FD_STEP.sin_cos();
    let mut g = [0.0; 3];
    for t in tangent_basis(n, x) {
        let plus = [c * x[0] + sn * t[0], c * x[1] + sn * t[1], c * x[2] + sn * t[2]];
        let minus = [c * x[0] - sn * t[0], c * x[1] - sn * t[1], c * x[2] - sn * t[2]];
        let d = (f(&plus)? - f(&minus)?) / (2.0 * FD_STEP);
        for q in 0..3 {
            g[q] += d * t[q];
        }
    }
    Ok(g)
}

fn frac_weight(n: usize, s: f64) -> f64 {
    if s == 1.0 {
        1.0
    } else {
        (1.0 - s) / omega(n - 1)
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s <= 1.0) {
        return domain(format!("s = {s} must lie in (0,1]"));
    }
    Ok(())
}

/// [u]²_{(1+s)/2} = Σ λ_k^s (a_k^i)², the Dirichlet energy at s = 1.
pub fn seminorm_frac(u: &HarmonicProfile, s: f64) -> Result<f64> {
    check_s(s)?;
    u.weighted_sum(|k| lambda_any(k, u.n, s))
}

/// [u]²_{(1-α)/2} = Σ μ_k^α (a_k^i)².
pub fn seminorm_riesz(u: &HarmonicProfile, alpha: f64) -> Result<f64> {
    u.weighted_sum(|k| mu_alpha(k, u.n, alpha))
}

pub fn qp_form(u: &HarmonicProfile, s: f64) -> Result<f64> {
    check_s(s)?;
    let n = u.n;
    let l1 = lambda_any(1, n, s)?;
    Ok(frac_weight(n, s) * u.weighted_sum(|k| Ok(lambda_any(k, n, s)? - l1))?)
}

pub fn qv_form(u: &HarmonicProfile, alpha: f64) -> Result<f64> {
    let n = u.n;
    let m1 = mu_alpha(1, n, alpha)?;
    u.weighted_sum(|k| Ok(mu_alpha(k, n, alpha)? - m1))
}

/// Coefficient of (a_k^i)² in QP_s − β QV_α.
pub fn mode_coefficient(k: usize, params: &Params, beta: f64) -> Result<f64> {
    let (n, s, a) = (params.n, params.s, params.alpha);
    let dl = lambda_any(k, n, s)? - lambda_any(1, n, s)?;
    let dm = mu_alpha(k, n, a)? - mu_alpha(1, n, a)?;
    Ok(frac_weight(n, s) * dl - beta * dm)
}

pub fn stability_form(u: &HarmonicProfile, params: &Params) -> Result<f64> {
    params.validate()?;
    if u.n != params.n {
        return Err(Error::Input(format!("profile dimension {} differs from n = {}", u.n, params.n)));
    }
    let beta = params.beta.ok_or_else(|| Error::Input("stability form needs beta".into()))?;
    if u.a0().abs() > MEAN_ZERO_TOL * u.norm_sq().sqrt() {
        return domain(format!("profile has mean component a_0 = {:e}; the form acts on mean-zero profiles", u.a0()));
    }
    u.weighted_sum(|k| mode_coefficient(k, params, beta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub verdict: Verdict,
    pub beta: f64,
    pub beta_star: f64,
    /// (k, coefficient of a single unit mode of degree k), k = 2..=kmax.
    pub modes: Vec<(usize, f64)>,
    pub min_mode_k: usize,
    /// Whether the verdict matches the sign of the smallest single-mode value.
    pub consistent: bool,
}

pub fn stability_verdict(params: &Params, kmax: usize) -> Result<StabilityReport> {
    params.validate()?;
    let beta = params.beta.ok_or_else(|| Error::Input("stability verdict needs beta".into()))?;
    if kmax < 2 {
        return domain("kmax must be at least 2");
    }
    let bs = beta_star(params, BetaMode::Closed)?;
    let verdict = if beta <= bs * (1.0 + VERDICT_ROUNDOFF) { Verdict::Stable } else { Verdict::Unstable };
    let modes = (2..=kmax)
        .map(|k| Ok((k, mode_coefficient(k, params, beta)?)))
        .collect::<Result<Vec<_>>>()?;
    let (min_mode_k, min_val) = modes.iter().cloned().min_by(|a, b| a.1.total_cmp(&b.1)).expect("kmax >= 2");
    let scale = frac_weight(params.n, params.s) * (lambda_any(2, params.n, params.s)? - lambda_any(1, params.n, params.s)?);
    let tol = 1e-9 * scale;
    let consistent = match verdict {
        Verdict::Stable => min_val >= -tol,
        Verdict::Unstable => min_val < tol,
    };
    Ok(StabilityReport { verdict, beta, beta_star: bs, modes, min_mode_k, consistent })
}

/// (Σ (1+λ_k^1)(a_k^i)²)^{1/2} times the sup of the band reproducing kernel.
pub fn c1_proxy(u: &HarmonicProfile) -> Result<f64> {
    let n = u.n;
    let h1 = u.weighted_sum(|k| Ok(1.0 + lambda_local(k, n)))?;
    let surface = crate::ball_energy::geometry(n).surface;
    let band: f64 = (0..=u.kmax()).map(|k| multiplicity(k, n) as f64).sum::<f64>() / surface;
    Ok(h1.sqrt() * band.sqrt())
}
