//! Energies, asymmetry and isoperimetric gaps of finite unions of disjoint balls.

use crate::ball_energy::{omega, ps_ball, ps_ball_radius, valpha_ball_radius};
use crate::error::{domain, Error, Result};
use crate::par;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Samples per RNG stream; batches are reduced in index order.
pub const BATCH: usize = 1 << 14;
pub const MAX_CUT_S: f64 = 0.45;
pub const GAP_MAX_STD_ERROR: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallUnionShape {
    pub n: usize,
    pub balls: Vec<Ball>,
    pub rng_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnionKind {
    Ps(f64),
    VAlpha(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate { value, std_error: 0.0, samples: 0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultRow {
    pub quantity: String,
    pub value: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
}

pub const RESULT_HEADER: [&str; 5] = ["quantity", "value", "std_error", "samples", "seed"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfSpace {
    pub normal: [f64; 3],
    pub offset: f64,
}

impl HalfSpace {
    /// {x : normal·x ≤ offset}, with the normal rescaled to unit length.
    pub fn new(normal: &[f64], offset: f64) -> Result<Self> {
        let mut v = [0.0; 3];
        if normal.len() > 3 || normal.is_empty() {
            return Err(Error::Input("half-space normal must have 2 or 3 entries".into()));
        }
        v[..normal.len()].copy_from_slice(normal);
        let len = dot(&v, &v).sqrt();
        if !(len > 0.0 && len.is_finite() && offset.is_finite()) {
            return Err(Error::Input("half-space normal must be non-zero".into()));
        }
        Ok(HalfSpace { normal: v.map(|c| c / len), offset: offset / len })
    }

    fn contains(&self, x: &[f64; 3]) -> bool {
        dot(&self.normal, x) <= self.offset
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    dot(&d, &d).sqrt()
}

fn pad(c: &[f64]) -> [f64; 3] {
    let mut v = [0.0; 3];
    v[..c.len()].copy_from_slice(c);
    v
}

impl BallUnionShape {
    pub fn new(n: usize, balls: Vec<Ball>, rng_seed: u64) -> Result<Self> {
        let shape = BallUnionShape { n, balls, rng_seed };
        shape.validate()?;
        Ok(shape)
    }

    pub fn single(n: usize, radius: f64) -> Result<Self> {
        Self::new(n, vec![Ball { center: vec![0.0; n], radius }], 0)
    }

    /// Two balls of radius r whose centers are `separation` apart along the first axis.
    pub fn pair(n: usize, radius: f64, separation: f64, rng_seed: u64) -> Result<Self> {
        let mut a = vec![0.0; n];
        let mut b = vec![0.0; n];
        a[0] = -0.5 * separation;
        b[0] = 0.5 * separation;
        Self::new(n, vec![Ball { center: a, radius }, Ball { center: b, radius }], rng_seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n != 2 && self.n != 3 {
            return domain("ball unions are supported for n = 2, 3");
        }
        if self.balls.is_empty() {
            return Err(Error::Input("shape has no balls".into()));
        }
        for b in &self.balls {
            if b.center.len() != self.n || b.center.iter().any(|c| !c.is_finite()) {
                return Err(Error::Input(format!("ball center must have {} finite entries", self.n)));
            }
            if !(b.radius > 0.0 && b.radius.is_finite()) {
                return Err(Error::Input("radii must be positive".into()));
            }
        }
        for i in 0..self.balls.len() {
            for j in (i + 1)..self.balls.len() {
                let (a, b) = (&self.balls[i], &self.balls[j]);
                if dist(&pad(&a.center), &pad(&b.center)) <= a.radius + b.radius {
                    return Err(Error::Input(format!("balls {i} and {j} overlap or touch")));
                }
            }
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        let w = omega(self.n);
        self.balls.iter().map(|b| w * b.radius.powi(self.n as i32)).sum()
    }

    /// Radius of the ball with the same volume.
    pub fn equivalent_radius(&self) -> f64 {
        (self.volume() / omega(self.n)).powf(1.0 / self.n as f64)
    }

    pub fn translated(&self, shift: &[f64]) -> Self {
        let mut out = self.clone();
        for b in &mut out.balls {
            for (c, d) in b.center.iter_mut().zip(shift) {
                *c += d;
            }
        }
        out
    }

    /// Applies a rotation given as a row-major n×n matrix.
    pub fn rotated(&self, m: &[f64]) -> Self {
        let n = self.n;
        let mut out = self.clone();
        for b in &mut out.balls {
            let c = b.center.clone();
            for r in 0..n {
                b.center[r] = (0..n).map(|k| m[r * n + k] * c[k]).sum();
            }
        }
        out
    }

    /// Random disjoint union of `count` balls (radii in [0.3, 1], gaps at least 0.1).
    pub fn random(n: usize, count: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut balls: Vec<Ball> = Vec::with_capacity(count);
        let mut attempts = 0;
        while balls.len() < count {
            attempts += 1;
            if attempts > 100_000 {
                return Err(Error::Numerical("could not place disjoint balls".into()));
            }
            let radius = rng.random_range(0.3..1.0);
            let center: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let ok = balls.iter().all(|b| {
                dist(&pad(&b.center), &pad(&center)) > b.radius + radius + 0.1
            });
            if ok {
                balls.push(Ball { center, radius });
            }
        }
        Self::new(n, balls, seed)
    }

    /// Accepts a bare list of balls or an object with `n`, `balls` and `seed`.
    pub fn from_json(text: &str, n: Option<usize>, seed: u64) -> Result<Self> {
        #[derive(Deserialize)]
        struct Wrapped {
            n: Option<usize>,
            balls: Vec<Ball>,
            seed: Option<u64>,
        }
        let bad = |e: serde_json::Error| Error::Input(format!("shape file: {e}"));
        // branch on the JSON shape by hand; untagged enums mis-handle arbitrary-precision numbers
        let value: serde_json::Value = serde_json::from_str(text).map_err(bad)?;
        let (file_n, balls, file_seed) = if value.is_array() {
            (None, serde_json::from_value::<Vec<Ball>>(value).map_err(bad)?, None)
        } else {
            let w: Wrapped = serde_json::from_value(value).map_err(bad)?;
            (w.n, w.balls, w.seed)
        };
        let guess = balls.first().map(|b| b.center.len());
        let dim = n.or(file_n).or(guess).ok_or_else(|| Error::Input("shape file has no balls".into()))?;
        Self::new(dim, balls, file_seed.unwrap_or(seed))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "n": self.n, "balls": self.balls, "seed": self.rng_seed })
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stream key for one MC term.
fn subseed(seed: u64, tag: u64, i: usize, j: usize) -> u64 {
    splitmix(splitmix(splitmix(splitmix(seed) ^ tag) ^ i as u64) ^ j as u64)
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, o: Moments) -> Moments {
        if o.count == 0 {
            return self;
        }
        if self.count == 0 {
            return o;
        }
        let count = self.count + o.count;
        let d = o.mean - self.mean;
        let (a, b) = (self.count as f64, o.count as f64);
        Moments { count, mean: self.mean + d * b / count as f64, m2: self.m2 + o.m2 + d * d * a * b / count as f64 }
    }

    fn estimate(&self, scale: f64) -> Estimate {
        let var = if self.count > 1 { self.m2 / (self.count - 1) as f64 } else { 0.0 };
        Estimate {
            value: scale * self.mean,
            std_error: scale * (var / self.count as f64).sqrt(),
            samples: self.count,
        }
    }
}

/// Mean of `f(rng)` over `samples` draws split into fixed batches, each on its own stream.
fn sample_mean<F>(samples: u64, key: u64, f: F) -> Moments
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let batches = samples.div_ceil(BATCH as u64) as usize;
    let parts = par::map_blocks(batches, 1, |range| {
        let mut m = Moments::default();
        for b in range {
            let mut rng = ChaCha8Rng::seed_from_u64(key);
            rng.set_stream(b as u64);
            let len = (samples - (b * BATCH) as u64).min(BATCH as u64);
            for _ in 0..len {
                m.push(f(&mut rng));
            }
        }
        m
    });
    parts.into_iter().fold(Moments::default(), Moments::merge)
}

fn uniform_in_ball<R: Rng>(rng: &mut R, n: usize, center: &[f64; 3], r: f64) -> [f64; 3] {
    loop {
        let mut p = [0.0; 3];
        for c in p.iter_mut().take(n) {
            *c = rng.random_range(-1.0..1.0);
        }
        if dot(&p, &p) <= 1.0 {
            return [center[0] + r * p[0], center[1] + r * p[1], center[2] + r * p[2]];
        }
    }
}

/// Uniform point of {x ∈ B_r(c) : ν·(x − c) ≤ depth} for depth < 0.
fn uniform_in_cap<R: Rng>(rng: &mut R, n: usize, c: &[f64; 3], r: f64, nu: &[f64; 3], depth: f64) -> [f64; 3] {
    let frame = normal_frame(n, nu);
    let half = (r * r - depth * depth).max(0.0).sqrt();
    loop {
        let a = rng.random_range(-r..=depth);
        let mut x = [c[0] + a * nu[0], c[1] + a * nu[1], c[2] + a * nu[2]];
        let mut rr = a * a;
        for e in frame.iter().take(n - 1) {
            let b = rng.random_range(-half..=half);
            rr += b * b;
            for q in 0..3 {
                x[q] += b * e[q];
            }
        }
        if rr <= r * r {
            return x;
        }
    }
}

/// Orthonormal complement of the unit vector ν (first n − 1 entries used).
fn normal_frame(n: usize, nu: &[f64; 3]) -> [[f64; 3]; 2] {
    if n == 2 {
        return [[-nu[1], nu[0], 0.0], [0.0; 3]];
    }
    let seed = if nu[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = dot(&seed, nu);
    let mut e1 = [seed[0] - d * nu[0], seed[1] - d * nu[1], seed[2] - d * nu[2]];
    let len = dot(&e1, &e1).sqrt();
    e1 = e1.map(|v| v / len);
    let e2 = [nu[1] * e1[2] - nu[2] * e1[1], nu[2] * e1[0] - nu[0] * e1[2], nu[0] * e1[1] - nu[1] * e1[0]];
    [e1, e2]
}

fn uniform_direction<R: Rng>(rng: &mut R, n: usize) -> [f64; 3] {
    let phi = rng.random_range(0.0..2.0 * PI);
    if n == 2 {
        [phi.cos(), phi.sin(), 0.0]
    } else {
        let z: f64 = rng.random_range(-1.0..1.0);
        let rho = (1.0 - z * z).max(0.0).sqrt();
        [rho * phi.cos(), rho * phi.sin(), z]
    }
}

fn kernel_exponent(n: usize, kind: UnionKind) -> Result<f64> {
    let nf = n as f64;
    match kind {
        UnionKind::Ps(s) if s > 0.0 && s < 1.0 => Ok(nf + s),
        UnionKind::VAlpha(a) if a > 0.0 && a < nf => Ok(nf - a),
        UnionKind::Ps(_) => domain("s must lie in (0, 1)"),
        UnionKind::VAlpha(_) => domain("alpha must lie in (0, n)"),
    }
}

/// ∫_{B_i∩H}∫_{B_j∩H} |x−y|^{-p} by sampling both balls uniformly.
fn cross_term(shape: &BallUnionShape, i: usize, j: usize, p: f64, cut: Option<&HalfSpace>, samples: u64, tag: u64) -> Estimate {
    let n = shape.n;
    let (bi, bj) = (&shape.balls[i], &shape.balls[j]);
    let (ci, cj) = (pad(&bi.center), pad(&bj.center));
    let (ri, rj) = (bi.radius, bj.radius);
    let w = omega(n);
    let scale = w * ri.powi(n as i32) * w * rj.powi(n as i32);
    let key = subseed(shape.rng_seed, tag, i, j);
    let m = sample_mean(samples, key, |rng| {
        let x = uniform_in_ball(rng, n, &ci, ri);
        let y = uniform_in_ball(rng, n, &cj, rj);
        if let Some(h) = cut {
            if !(h.contains(&x) && h.contains(&y)) {
                return 0.0;
            }
        }
        dist(&x, &y).powf(-p)
    });
    m.estimate(scale)
}

#[derive(Debug, Clone, Serialize)]
pub struct PairTerm {
    pub i: usize,
    pub j: usize,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, Serialize)]
pub struct UnionEnergy {
    pub estimate: Estimate,
    pub self_terms: Vec<f64>,
    pub cross_terms: Vec<PairTerm>,
}

const TAG_CROSS: u64 = 1;
const TAG_CUT_CROSS: u64 = 2;
const TAG_CUT_SELF: u64 = 3;

pub fn energy_union(shape: &BallUnionShape, kind: UnionKind, samples: u64) -> Result<UnionEnergy> {
    shape.validate()?;
    let n = shape.n;
    let p = kernel_exponent(n, kind)?;
    let multi = shape.balls.len() > 1;
    if multi && samples == 0 {
        return Err(Error::Input("samples must be positive".into()));
    }
    let self_terms = shape
        .balls
        .iter()
        .map(|b| match kind {
            UnionKind::Ps(s) => ps_ball_radius(n, s, b.radius),
            UnionKind::VAlpha(a) => valpha_ball_radius(n, a, b.radius),
        })
        .collect::<Result<Vec<_>>>()?;
    let sign = match kind {
        UnionKind::Ps(_) => -2.0,
        UnionKind::VAlpha(_) => 2.0,
    };
    let mut value: f64 = self_terms.iter().sum();
    let mut var = 0.0;
    let mut cross_terms = Vec::new();
    for i in 0..shape.balls.len() {
        for j in (i + 1)..shape.balls.len() {
            let e = cross_term(shape, i, j, p, None, samples, TAG_CROSS);
            value += sign * e.value;
            var += 4.0 * e.std_error * e.std_error;
            cross_terms.push(PairTerm { i, j, estimate: e });
        }
    }
    let total = if multi { samples * cross_terms.len() as u64 } else { 0 };
    Ok(UnionEnergy { estimate: Estimate { value, std_error: var.sqrt(), samples: total }, self_terms, cross_terms })
}

/// Volume of {x ∈ B_r(c) : ν·x ≤ offset}.
pub fn cut_ball_volume(n: usize, r: f64, h: f64) -> f64 {
    let h = h.clamp(-r, r);
    if n == 2 {
        r * r * (-h / r).clamp(-1.0, 1.0).acos() + h * (r * r - h * h).max(0.0).sqrt()
    } else {
        PI * (r + h).powi(2) * (2.0 * r - h) / 3.0
    }
}

/// Exit distance from the convex set B_r(c)∩H along direction w, starting inside.
fn exit_distance(x: &[f64; 3], w: &[f64; 3], c: &[f64; 3], r: f64, cut: Option<&HalfSpace>) -> f64 {
    let d = [x[0] - c[0], x[1] - c[1], x[2] - c[2]];
    let b = dot(w, &d);
    let cc = dot(&d, &d) - r * r;
    let mut rho = -b + (b * b - cc).max(0.0).sqrt();
    if let Some(h) = cut {
        let vn = dot(&h.normal, w);
        if vn > 0.0 {
            rho = rho.min((h.offset - dot(&h.normal, x)) / vn);
        }
    }
    rho
}

/// Ray estimator for a convex body K = B_r(c)∩H:
/// P_s(K) = (1/s)∫_K∫_S ρ^{-s}, V_α(K) = (1/α)∫_K∫_S ρ^α, with ρ the exit distance.
pub fn convex_ray_mc(
    n: usize,
    center: &[f64],
    r: f64,
    cut: Option<&HalfSpace>,
    kind: UnionKind,
    samples: u64,
    key: u64,
) -> Result<Estimate> {
    if n != 2 && n != 3 {
        return domain("ray estimator supports n = 2, 3");
    }
    kernel_exponent(n, kind)?;
    if samples == 0 {
        return Err(Error::Input("samples must be positive".into()));
    }
    let c = pad(center);
    let ball_vol = omega(n) * r.powi(n as i32);
    let vol = match cut {
        Some(h) => cut_ball_volume(n, r, h.offset - dot(&h.normal, &c)),
        None => ball_vol,
    };
    if vol <= 0.0 {
        return Ok(Estimate::exact(0.0));
    }
    let (pow, coef) = match kind {
        UnionKind::Ps(s) => {
            if s > MAX_CUT_S {
                return domain(format!("ray estimator needs s <= {MAX_CUT_S} for finite variance"));
            }
            (-s, 1.0 / s)
        }
        UnionKind::VAlpha(a) => (a, 1.0 / a),
    };
    let sphere = crate::ball_energy::geometry(n).surface;
    // caps below half the ball are drawn from a box aligned with the cut normal
    let thin = cut.map(|h| (h, h.offset - dot(&h.normal, &c))).filter(|(_, depth)| *depth < 0.0);
    let m = sample_mean(samples, key, |rng| {
        let x = match thin {
            Some((h, depth)) => uniform_in_cap(rng, n, &c, r, &h.normal, depth),
            None => loop {
                let x = uniform_in_ball(rng, n, &c, r);
                if cut.is_none_or(|h| h.contains(&x)) {
                    break x;
                }
            },
        };
        let w = uniform_direction(rng, n);
        exit_distance(&x, &w, &c, r, cut).powf(pow)
    });
    Ok(m.estimate(coef * vol * sphere))
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationCheck {
    pub lhs: Estimate,
    pub rhs: Estimate,
    pub holds: bool,
    /// (rhs − lhs) in units of the combined standard error.
    pub margin_sigma: f64,
}

/// Compares P_s(E∩H) against P_s(E) for a half-space H.
pub fn convex_truncation_check(shape: &BallUnionShape, cut: &HalfSpace, s: f64, samples: u64) -> Result<TruncationCheck> {
    shape.validate()?;
    if !(s > 0.0 && s <= MAX_CUT_S) {
        return domain(format!("convex truncation check needs s in (0, {MAX_CUT_S}]"));
    }
    if samples == 0 {
        return Err(Error::Input("samples must be positive".into()));
    }
    let n = shape.n;
    let kind = UnionKind::Ps(s);
    let rhs = energy_union(shape, kind, samples)?.estimate;
    let mut value = 0.0;
    let mut var = 0.0;
    let mut used = 0u64;
    for (i, b) in shape.balls.iter().enumerate() {
        let h = cut.offset - dot(&cut.normal, &pad(&b.center));
        if h >= b.radius {
            value += ps_ball_radius(n, s, b.radius)?;
        } else if h > -b.radius {
            let e = convex_ray_mc(n, &b.center, b.radius, Some(cut), kind, samples, subseed(shape.rng_seed, TAG_CUT_SELF, i, i))?;
            value += e.value;
            var += e.std_error * e.std_error;
            used += e.samples;
        }
    }
    let p = n as f64 + s;
    for i in 0..shape.balls.len() {
        for j in (i + 1)..shape.balls.len() {
            let e = cross_term(shape, i, j, p, Some(cut), samples, TAG_CUT_CROSS);
            value -= 2.0 * e.value;
            var += 4.0 * e.std_error * e.std_error;
            used += e.samples;
        }
    }
    let lhs = Estimate { value, std_error: var.sqrt(), samples: used };
    let sigma = (lhs.std_error.powi(2) + rhs.std_error.powi(2)).sqrt();
    let gap = rhs.value - lhs.value;
    let holds = gap >= -3.0 * sigma;
    let margin_sigma = if sigma > 0.0 { gap / sigma } else if gap >= 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
    Ok(TruncationCheck { lhs, rhs, holds, margin_sigma })
}

/// |B_{r1}(c1) ∩ B_{r2}(c2)| for centers at distance d.
pub fn lens_volume(n: usize, r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    let small = r1.min(r2);
    if d <= (r1 - r2).abs() {
        return omega(n) * small.powi(n as i32);
    }
    if n == 2 {
        let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).clamp(-1.0, 1.0).acos();
        let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).clamp(-1.0, 1.0).acos();
        let k = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
        r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * k.max(0.0).sqrt()
    } else {
        PI * (r1 + r2 - d).powi(2) * (d * d + 2.0 * d * (r1 + r2) - 3.0 * (r1 - r2).powi(2)) / (12.0 * d)
    }
}

/// Downhill simplex minimization; returns (argmin, min, converged).
fn nelder_mead<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], step: f64, ftol: f64, xtol: f64, max_iter: usize) -> (Vec<f64>, f64, bool) {
    let dim = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for k in 0..dim {
        let mut v = x0.to_vec();
        v[k] += step;
        simplex.push(v);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|v| f(v)).collect();
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        let size = simplex[1..].iter().map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)).fold(0.0, f64::max);
        if vals[dim] - vals[0] <= ftol && size <= xtol {
            return (simplex[0].clone(), vals[0], true);
        }
        let centroid: Vec<f64> = (0..dim).map(|k| simplex[..dim].iter().map(|v| v[k]).sum::<f64>() / dim as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..dim).map(|k| centroid[k] + t * (simplex[dim][k] - centroid[k])).collect() };
        let xr = along(-1.0);
        let fr = f(&xr);
        if fr < vals[0] {
            let xe = along(-2.0);
            let fe = f(&xe);
            if fe < fr {
                simplex[dim] = xe;
                vals[dim] = fe;
            } else {
                simplex[dim] = xr;
                vals[dim] = fr;
            }
        } else if fr < vals[dim - 1] {
            simplex[dim] = xr;
            vals[dim] = fr;
        } else {
            let (xc, fc) = if fr < vals[dim] {
                let x = along(-0.5);
                let v = f(&x);
                (x, v)
            } else {
                let x = along(0.5);
                let v = f(&x);
                (x, v)
            };
            if fc < vals[dim].min(fr) {
                simplex[dim] = xc;
                vals[dim] = fc;
            } else {
                for i in 1..=dim {
                    let v: Vec<f64> = (0..dim).map(|k| 0.5 * (simplex[0][k] + simplex[i][k])).collect();
                    vals[i] = f(&v);
                    simplex[i] = v;
                }
            }
        }
    }
    let best = (0..=dim).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).expect("non-empty simplex");
    (simplex[best].clone(), vals[best], false)
}

#[derive(Debug, Clone, Serialize)]
pub struct Asymmetry {
    pub value: f64,
    pub center: Vec<f64>,
    pub converged: bool,
}

pub const ASYMMETRY_MAX_ITER: usize = 4000;

/// Fraenkel asymmetry 2 − 2 max_x Σ|B_i ∩ B_{r_E}(x)|/|E|, with `starts` extra random simplex starts.
pub fn asymmetry(shape: &BallUnionShape, starts: usize) -> Result<Asymmetry> {
    shape.validate()?;
    let n = shape.n;
    let vol = shape.volume();
    let re = shape.equivalent_radius();
    let overlap = |x: &[f64]| -> f64 {
        let c = pad(x);
        shape.balls.iter().map(|b| lens_volume(n, b.radius, re, dist(&pad(&b.center), &c))).sum::<f64>()
    };
    let mut seeds: Vec<Vec<f64>> = shape.balls.iter().map(|b| b.center.clone()).collect();
    let mut bary = vec![0.0; n];
    for b in &shape.balls {
        let m = b.radius.powi(n as i32);
        for k in 0..n {
            bary[k] += m * b.center[k];
        }
    }
    let mass: f64 = shape.balls.iter().map(|b| b.radius.powi(n as i32)).sum();
    seeds.push(bary.iter().map(|v| v / mass).collect());
    let (mut lo, mut hi) = (vec![f64::INFINITY; n], vec![f64::NEG_INFINITY; n]);
    for b in &shape.balls {
        for k in 0..n {
            lo[k] = lo[k].min(b.center[k] - b.radius);
            hi[k] = hi[k].max(b.center[k] + b.radius);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(subseed(shape.rng_seed, 4, 0, 0));
    for _ in 0..starts {
        seeds.push((0..n).map(|k| rng.random_range(lo[k]..=hi[k])).collect());
    }
    let mut best: Option<(Vec<f64>, f64, bool)> = None;
    for x0 in &seeds {
        let r = nelder_mead(|x| -overlap(x) / vol, x0, 0.5 * re, 1e-14, 1e-10, ASYMMETRY_MAX_ITER);
        if best.as_ref().is_none_or(|b| r.1 < b.1) {
            best = Some(r);
        }
    }
    let (center, neg, converged) = best.expect("at least one start");
    let value = (2.0 + 2.0 * neg).clamp(0.0, 2.0);
    Ok(Asymmetry { value, center, converged })
}

/// D_s(E) = P_s(E)/P_s(B_{r_E}) − 1.
pub fn iso_gap(shape: &BallUnionShape, s: f64, samples: u64) -> Result<Estimate> {
    shape.validate()?;
    if shape.balls.len() == 1 {
        kernel_exponent(shape.n, UnionKind::Ps(s))?;
        return Ok(Estimate::exact(0.0));
    }
    let n = shape.n;
    let e = energy_union(shape, UnionKind::Ps(s), samples)?.estimate;
    let denom = shape.equivalent_radius().powf(n as f64 - s) * ps_ball(n, s)?;
    let gap = Estimate { value: e.value / denom - 1.0, std_error: e.std_error / denom, samples: e.samples };
    if gap.std_error > GAP_MAX_STD_ERROR {
        return Err(Error::Numerical(format!(
            "isoperimetric gap standard error {:.3e} exceeds {GAP_MAX_STD_ERROR}",
            gap.std_error
        )));
    }
    Ok(gap)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub separation: f64,
    pub gap: f64,
    pub gap_std_error: f64,
    pub asymmetry: f64,
    pub ratio: f64,
}

pub const SWEEP_HEADER: [&str; 5] = ["separation", "gap", "gap_std_error", "asymmetry", "ratio"];

/// Gap and asymmetry of two unit balls along a list of center distances; ratio = A²/D_s.
pub fn separation_sweep(n: usize, s: f64, separations: &[f64], samples: u64, seed: u64, starts: usize) -> Result<Vec<SweepRow>> {
    separations
        .iter()
        .map(|&d| {
            let shape = BallUnionShape::pair(n, 1.0, d, seed)?;
            let gap = iso_gap(&shape, s, samples)?;
            let a = asymmetry(&shape, starts)?;
            Ok(SweepRow {
                separation: d,
                gap: gap.value,
                gap_std_error: gap.std_error,
                asymmetry: a.value,
                ratio: if gap.value > 0.0 { a.value * a.value / gap.value } else { f64::NAN },
            })
        })
        .collect()
}
