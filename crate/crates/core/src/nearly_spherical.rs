//! Energies of nearly spherical sets {(1 + t u(x)) x}, normalized in volume and barycenter.

use crate::ball_energy::{geometry, omega, ps_ball, valpha_ball};
use crate::error::{domain, Error, Result};
use crate::par;
use crate::quadforms::{c1_proxy, dot, seminorm_frac, seminorm_riesz, tangential_gradient_of, HarmonicProfile};
use crate::sphere_numerics::{gauss_legendre, harmonic_project, max_projection_degree, model_integral, SphereGrid};
use crate::spectrum::{lambda_frac, mu_alpha, Params};
use crate::thresholds::{beta_star, BetaMode};
use serde::Serialize;

pub const MAX_AMPLITUDE: f64 = 0.45;
pub const PROXY_SAFETY: f64 = 0.5;
pub const RADIAL_ORDER: usize = 8;
const VOLUME_TOL: f64 = 1e-10;
const BARYCENTER_TOL: f64 = 1e-8;
const MAX_NORMALIZE_STEPS: usize = 60;
const ROW_BLOCK: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyKind {
    Ps(f64),
    VAlpha(f64),
}

/// E = λ·E⁰ − c with E⁰ = {r x : r < 1 + t u(x)}; `radial` holds the radial function of E on the grid.
#[derive(Debug, Clone)]
pub struct NearlySphericalSet {
    pub profile: HarmonicProfile,
    pub t: f64,
    pub n: usize,
    pub grid: SphereGrid,
    pub normalized: bool,
    pub scale: f64,
    pub shift: [f64; 3],
    pub radial: Vec<f64>,
    pub radial_grad: Vec<[f64; 3]>,
}

fn norm3(v: &[f64; 3]) -> f64 {
    dot(v, v).sqrt()
}

/// Radial function of λ·E⁰ − c in direction x.
fn solve_radial(u: &HarmonicProfile, t: f64, scale: f64, shift: &[f64; 3], x: &[f64; 3]) -> Result<f64> {
    let f = |r: f64| -> Result<f64> {
        let y = [r * x[0] + shift[0], r * x[1] + shift[1], r * x[2] + shift[2]];
        let ny = norm3(&y);
        let w = [y[0] / ny, y[1] / ny, y[2] / ny];
        Ok(ny - scale * (1.0 + t * u.eval(&w)?))
    };
    let mut r0 = scale * (1.0 + t * u.eval(x)?) - dot(x, shift);
    let mut f0 = f(r0)?;
    if f0 == 0.0 {
        return Ok(r0);
    }
    let mut r1 = r0 - f0;
    for _ in 0..100 {
        if !(r1 > 0.0 && r1.is_finite()) {
            break;
        }
        let f1 = f(r1)?;
        if f1 == 0.0 || (r1 - r0).abs() <= 1e-15 * r1 {
            return Ok(r1);
        }
        let slope = (f1 - f0) / (r1 - r0);
        if slope <= 0.0 || !slope.is_finite() {
            break;
        }
        r0 = r1;
        f0 = f1;
        r1 -= f1 / slope;
    }
    Err(Error::Numerical(format!("radial function lost star-shapedness in direction {x:?}")))
}

impl NearlySphericalSet {
    pub fn radial_at(&self, x: &[f64; 3]) -> Result<f64> {
        if self.t == 0.0 {
            return Ok(self.scale);
        }
        solve_radial(&self.profile, self.t, self.scale, &self.shift, x)
    }

    pub fn volume(&self) -> f64 {
        let nf = self.n as f64;
        self.grid.weights.iter().zip(&self.radial).map(|(w, r)| w * r.powf(nf)).sum::<f64>() / nf
    }

    pub fn barycenter(&self) -> [f64; 3] {
        let nf = self.n as f64;
        let mut b = [0.0; 3];
        for ((w, r), x) in self.grid.weights.iter().zip(&self.radial).zip(&self.grid.nodes) {
            let m = w * r.powf(nf + 1.0);
            for q in 0..3 {
                b[q] += m * x[q];
            }
        }
        let v = self.volume();
        b.map(|c| c / ((nf + 1.0) * v))
    }

    /// Samples of R − 1 on the grid.
    pub fn perturbation(&self) -> Vec<f64> {
        self.radial.iter().map(|r| r - 1.0).collect()
    }
}

fn radial_samples(u: &HarmonicProfile, t: f64, scale: f64, shift: &[f64; 3], grid: &SphereGrid) -> Result<Vec<f64>> {
    let parts = par::map_blocks(grid.len(), 64, |rows| {
        rows.map(|j| solve_radial(u, t, scale, shift, &grid.nodes[j])).collect::<Result<Vec<_>>>()
    });
    let mut out = Vec::with_capacity(grid.len());
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

pub fn build_normalized(profile: &HarmonicProfile, t: f64, grid: &SphereGrid) -> Result<NearlySphericalSet> {
    let n = grid.n;
    if profile.n() != n {
        return Err(Error::Input("profile and grid dimensions differ".into()));
    }
    let samples = grid.sample(|x| profile.eval(x))?;
    let sup = samples.iter().fold(0.0f64, |m, v| m.max((t * v).abs()));
    if sup > MAX_AMPLITUDE {
        return domain(format!("sup |t u| = {sup:.3} exceeds {MAX_AMPLITUDE}"));
    }
    let mut set = NearlySphericalSet {
        profile: profile.clone(),
        t,
        n,
        grid: grid.clone(),
        normalized: false,
        scale: 1.0,
        shift: [0.0; 3],
        radial: vec![1.0; grid.len()],
        radial_grad: vec![[0.0; 3]; grid.len()],
    };
    if t == 0.0 || profile.norm_sq() == 0.0 {
        set.t = 0.0;
        set.normalized = true;
        return Ok(set);
    }
    let nf = n as f64;
    let target = omega(n);
    let mut converged = false;
    for _ in 0..MAX_NORMALIZE_STEPS {
        set.radial = radial_samples(profile, t, set.scale, &set.shift, grid)?;
        let v = set.volume();
        let b = set.barycenter();
        let vol_err = (v / target - 1.0).abs();
        if vol_err < 1e-15 && norm3(&b) < 1e-15 {
            converged = true;
            break;
        }
        let f = (target / v).powf(1.0 / nf);
        set.scale *= f;
        for q in 0..3 {
            set.shift[q] = f * (set.shift[q] + b[q]);
        }
    }
    if !converged {
        // accept a stagnated loop only if the invariants hold
        set.radial = radial_samples(profile, t, set.scale, &set.shift, grid)?;
        if (set.volume() / target - 1.0).abs() > VOLUME_TOL || norm3(&set.barycenter()) > BARYCENTER_TOL {
            return Err(Error::Numerical("volume/barycenter normalization did not converge".into()));
        }
    }
    let (scale, shift) = (set.scale, set.shift);
    let grads = par::map_blocks(grid.len(), 64, |rows| {
        rows.map(|j| tangential_gradient_of(n, &grid.nodes[j], |x| solve_radial(profile, t, scale, &shift, x)))
            .collect::<Result<Vec<_>>>()
    });
    set.radial_grad = Vec::with_capacity(grid.len());
    for g in grads {
        set.radial_grad.extend(g?);
    }
    set.normalized = true;
    Ok(set)
}

struct RadialRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl RadialRule {
    fn new(order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        RadialRule { nodes: x.iter().map(|v| 0.5 * (v + 1.0)).collect(), weights: w.iter().map(|v| 0.5 * v).collect() }
    }
}

/// ½ ∬ ∫∫_{[R(y),R(x)]²} (rρ)^{n-1} (|r−ρ|² + rρ|x−y|²)^{-p/2} over sphere pairs.
fn radial_pair_term(set: &NearlySphericalSet, p: f64) -> Result<f64> {
    let grid = &set.grid;
    let n = set.n;
    let nm1 = n as f64 - 1.0;
    let q = -0.5 * p;
    let model = model_integral(n, p)?;
    let rule = RadialRule::new(RADIAL_ORDER);
    let rows = par::map_blocks(grid.len(), ROW_BLOCK, |range| {
        let mut acc = 0.0;
        for i in range {
            let xi = &grid.nodes[i];
            let ri = set.radial[i];
            let gi = &set.radial_grad[i];
            let ci = ri.powf(2.0 * nm1 - p);
            let mut row = 0.0;
            for (j, xj) in grid.nodes.iter().enumerate() {
                if j == i {
                    continue;
                }
                let th2 = {
                    let d = [xi[0] - xj[0], xi[1] - xj[1], xi[2] - xj[2]];
                    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
                };
                let rj = set.radial[j];
                let len = ri - rj;
                let mut g = 0.0;
                if len != 0.0 {
                    let mut inner = 0.0;
                    for (a, wa) in rule.nodes.iter().zip(&rule.weights) {
                        let r = rj + len * a;
                        for (b, wb) in rule.nodes.iter().zip(&rule.weights) {
                            let rho = rj + len * b;
                            let rr = r * rho;
                            let d = (r - rho) * (r - rho) + rr * th2;
                            inner += wa * wb * rr.powf(nm1) * d.powf(q);
                        }
                    }
                    g = len * len * inner;
                }
                let gy = dot(gi, xj);
                row += grid.weights[j] * (g - ci * gy * gy * th2.powf(q));
            }
            row += ci * dot(gi, gi) * model;
            acc += grid.weights[i] * row;
        }
        acc
    });
    let total: f64 = rows.into_iter().sum();
    if !total.is_finite() {
        return Err(Error::Numerical("singular sphere pair produced a non-finite radial integral".into()));
    }
    Ok(0.5 * total)
}

fn ensure_normalized(set: &NearlySphericalSet) -> Result<()> {
    if !set.normalized {
        return Err(Error::Input("energy requires a normalized set".into()));
    }
    Ok(())
}

/// Σ w (R^e − 1).
fn radial_power_excess(set: &NearlySphericalSet, e: f64) -> f64 {
    set.grid.weights.iter().zip(&set.radial).map(|(w, r)| w * (e * r.ln()).exp_m1()).sum()
}

/// P_s(E) − P_s(B) for kind P_s, V_α(B) − V_α(E) for kind V_α.
pub fn deficit(set: &NearlySphericalSet, kind: EnergyKind) -> Result<f64> {
    ensure_normalized(set)?;
    let n = set.n;
    let nf = n as f64;
    let surface = geometry(n).surface;
    let grid_defect = set.grid.weights.iter().sum::<f64>() - surface;
    match kind {
        EnergyKind::Ps(s) => {
            let ratio = ps_ball(n, s)? / surface;
            if set.t == 0.0 {
                return Ok(ratio * grid_defect);
            }
            let pair = radial_pair_term(set, nf + s)?;
            Ok(pair + ratio * (radial_power_excess(set, nf - s) + grid_defect))
        }
        EnergyKind::VAlpha(a) => {
            let ratio = valpha_ball(n, a)? / surface;
            if set.t == 0.0 {
                return Ok(-ratio * grid_defect);
            }
            let pair = radial_pair_term(set, nf - a)?;
            Ok(pair - ratio * (radial_power_excess(set, nf + a) + grid_defect))
        }
    }
}

pub fn energy(set: &NearlySphericalSet, kind: EnergyKind) -> Result<f64> {
    match kind {
        EnergyKind::Ps(s) => Ok(ps_ball(set.n, s)? + deficit(set, kind)?),
        EnergyKind::VAlpha(a) => Ok(valpha_ball(set.n, a)? - deficit(set, kind)?),
    }
}

/// Polynomial extrapolation of (t_j, y_j) to t = 0 (Neville).
pub fn extrapolate_to_zero(t: &[f64], y: &[f64]) -> f64 {
    let mut p = y.to_vec();
    let m = t.len();
    for level in 1..m {
        for i in 0..(m - level) {
            p[i] = (t[i] * p[i + 1] - t[i + level] * p[i]) / (t[i] - t[i + level]);
        }
    }
    p[0]
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeRow {
    pub t: f64,
    pub deficit_ps_over_t2: f64,
    pub deficit_v_over_t2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VariationProbe {
    pub limit_ps: f64,
    pub limit_v: f64,
    pub predicted_ps: f64,
    pub predicted_v: f64,
    pub rows: Vec<ProbeRow>,
}

pub const DEFAULT_T_STEP: f64 = 1e-3;

pub fn default_t_sequence() -> Vec<f64> {
    vec![4.0 * DEFAULT_T_STEP, 2.0 * DEFAULT_T_STEP, DEFAULT_T_STEP]
}

/// ½([u]²_{(1+s)/2} − λ_1^s‖u‖²) and ½([u]²_{(1−α)/2} − μ_1^α‖u‖²).
pub fn second_variation_prediction(u: &HarmonicProfile, s: f64, alpha: f64) -> Result<(f64, f64)> {
    let n = u.n();
    let l1 = lambda_frac(1, n, s)?;
    let m1 = mu_alpha(1, n, alpha)?;
    Ok((
        0.5 * (seminorm_frac(u, s)? - l1 * u.norm_sq()),
        0.5 * (seminorm_riesz(u, alpha)? - m1 * u.norm_sq()),
    ))
}

fn check_amplitude(u: &HarmonicProfile, t: f64) -> Result<()> {
    let proxy = c1_proxy(u)?;
    if t.abs() * proxy > PROXY_SAFETY {
        return domain(format!("t = {t} outside the admissible range (C^1 proxy {:.3})", t.abs() * proxy));
    }
    Ok(())
}

pub fn variation_probe(
    profile: &HarmonicProfile,
    params: &Params,
    t_sequence: &[f64],
    grid: &SphereGrid,
) -> Result<VariationProbe> {
    params.validate()?;
    let (s, a) = (params.s, params.alpha);
    if s >= 1.0 {
        return domain("the radial energy decomposition needs s < 1");
    }
    if t_sequence.len() < 2 || t_sequence.windows(2).any(|w| !(w[0] > w[1] && w[1] > 0.0)) {
        return Err(Error::Input("t sequence must be positive and strictly decreasing".into()));
    }
    let mut rows = Vec::with_capacity(t_sequence.len());
    for &t in t_sequence {
        check_amplitude(profile, t)?;
        let set = build_normalized(profile, t, grid)?;
        rows.push(ProbeRow {
            t,
            deficit_ps_over_t2: deficit(&set, EnergyKind::Ps(s))? / (t * t),
            deficit_v_over_t2: deficit(&set, EnergyKind::VAlpha(a))? / (t * t),
        });
    }
    let ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let qp: Vec<f64> = rows.iter().map(|r| r.deficit_ps_over_t2).collect();
    let qv: Vec<f64> = rows.iter().map(|r| r.deficit_v_over_t2).collect();
    let limit_ps = extrapolate_to_zero(&ts, &qp);
    let limit_v = extrapolate_to_zero(&ts, &qv);
    // noise floor: a relative quadrature error on the first-eigenvalue scale
    let norm = profile.norm_sq();
    let floors = [
        1e-5 * norm * lambda_frac(1, params.n, s)?,
        1e-5 * norm * mu_alpha(1, params.n, a)?.abs(),
    ];
    for ((lim, q), floor) in [(limit_ps, &qp), (limit_v, &qv)].into_iter().zip(floors) {
        let scale = q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let last = *q.last().expect("non-empty");
        if !lim.is_finite() || (lim - last).abs() > 0.1 * scale + floor {
            return Err(Error::Numerical(format!(
                "deficit/t^2 is not quadratic: extrapolated {lim:e}, smallest-t value {last:e}"
            )));
        }
    }
    let (predicted_ps, predicted_v) = second_variation_prediction(profile, s, a)?;
    Ok(VariationProbe { limit_ps, limit_v, predicted_ps, predicted_v, rows })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub t: f64,
    pub deficit_ps: f64,
    pub deficit_v: f64,
    pub deficit_combined: f64,
    pub bound_fug0: f64,
    pub bound_alpha: f64,
    pub bound_fugbeta: f64,
    pub quotient: f64,
}

pub const SCAN_HEADER: [&str; 8] =
    ["t", "deficit_ps", "deficit_v", "deficit_combined", "bound_fug0", "bound_alpha", "bound_fugbeta", "quotient"];

impl ScanRow {
    pub fn values(&self) -> [f64; 8] {
        [
            self.t,
            self.deficit_ps,
            self.deficit_v,
            self.deficit_combined,
            self.bound_fug0,
            self.bound_alpha,
            self.bound_fugbeta,
            self.quotient,
        ]
    }
}

/// Deficits of P_s, V_α and Per_s + βV_α along t, with the Fuglede-type functionals of R − 1.
pub fn fuglede_scan(
    profile: &HarmonicProfile,
    params: &Params,
    beta: f64,
    t_grid: &[f64],
    grid: &SphereGrid,
) -> Result<Vec<ScanRow>> {
    params.validate()?;
    let (n, s, a) = (params.n, params.s, params.alpha);
    if s >= 1.0 {
        return domain("the radial energy decomposition needs s < 1");
    }
    if beta < 0.0 {
        return domain("beta must be non-negative");
    }
    let bs = beta_star(params, BetaMode::Closed)?;
    let per_weight = (1.0 - s) / omega(n - 1);
    let ps = ps_ball(n, s)?;
    let va = valpha_ball(n, a)?;
    let kproj = max_projection_degree(grid).min(24);
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        check_amplitude(profile, t)?;
        let set = build_normalized(profile, t, grid)?;
        let dps = deficit(&set, EnergyKind::Ps(s))?;
        let dv = deficit(&set, EnergyKind::VAlpha(a))?;
        let v = harmonic_project(&set.perturbation(), grid, kproj)?;
        let semi_s = seminorm_frac(&v, s)?;
        let semi_a = seminorm_riesz(&v, a)?;
        let l2 = v.norm_sq();
        let combined = per_weight * dps - beta * dv;
        let bound_fugbeta = (1.0 - beta / bs) * ((1.0 - s) * semi_s + l2);
        rows.push(ScanRow {
            t,
            deficit_ps: dps,
            deficit_v: dv,
            deficit_combined: combined,
            bound_fug0: semi_s + s * ps * l2,
            bound_alpha: semi_a + a * va * l2,
            bound_fugbeta,
            quotient: if bound_fugbeta > 0.0 { combined / bound_fugbeta } else { f64::NAN },
        });
    }
    Ok(rows)
}
