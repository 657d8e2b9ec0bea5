//! Quadrature on S^1 and S^2: grids, fractional seminorms, harmonic projection.

use crate::ball_energy::geometry;
use crate::error::{domain, Error, Result};
use crate::harmonics::{eval_basis, flat_index, MAX_DEGREE_S2};
use crate::par;
use crate::quadforms::{dot, HarmonicProfile};
use crate::specfun::{gamma_ratio, log_gamma};
use crate::spectrum::multiplicity;
use std::f64::consts::PI;
use std::io::Write;

const ROW_BLOCK: usize = 16;

#[derive(Debug, Clone)]
pub struct SphereGrid {
    pub n: usize,
    pub resolution: usize,
    pub nodes: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl SphereGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Largest degree integrated exactly.
    pub fn exact_degree(&self) -> usize {
        match self.n {
            2 => self.resolution - 1,
            _ => 2 * self.resolution - 1,
        }
    }

    /// Typical node spacing.
    pub fn spacing(&self) -> f64 {
        match self.n {
            2 => 2.0 * PI / self.resolution as f64,
            _ => PI / self.resolution as f64,
        }
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }

    pub fn sample<F: Fn(&[f64; 3]) -> Result<f64>>(&self, f: F) -> Result<Vec<f64>> {
        self.nodes.iter().map(f).collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,y,z,weight")?;
        for (p, w) in self.nodes.iter().zip(&self.weights) {
            writeln!(out, "{:.17e},{:.17e},{:.17e},{:.17e}", p[0], p[1], p[2], w)?;
        }
        Ok(())
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=m {
                let jf = j as f64;
                let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
                p0 = p1;
                p1 = p2;
            }
            let pm = if m == 1 { 1.0 } else { p1 };
            let pm1 = if m == 1 { 0.0 } else { p0 };
            dp = m as f64 * (z * pm - pm1) / (z * z - 1.0);
            let dz = pm / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        x[m - 1 - i] = -z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[m - 1 - i] = w[i];
    }
    (x, w)
}

pub fn make_grid(n: usize, resolution: usize) -> Result<SphereGrid> {
    if resolution < 8 {
        return Err(Error::Input(format!("resolution {resolution} is below the minimum 8")));
    }
    match n {
        2 => {
            let m = resolution;
            let nodes = (0..m)
                .map(|j| {
                    let phi = 2.0 * PI * j as f64 / m as f64;
                    [phi.cos(), phi.sin(), 0.0]
                })
                .collect();
            Ok(SphereGrid { n, resolution, nodes, weights: vec![2.0 * PI / m as f64; m] })
        }
        3 => {
            let (z, wz) = gauss_legendre(resolution);
            let np = 2 * resolution;
            let mut nodes = Vec::with_capacity(resolution * np);
            let mut weights = Vec::with_capacity(resolution * np);
            for (zi, wi) in z.iter().zip(&wz) {
                let st = (1.0 - zi * zi).sqrt();
                for j in 0..np {
                    let phi = 2.0 * PI * j as f64 / np as f64;
                    nodes.push([st * phi.cos(), st * phi.sin(), *zi]);
                    weights.push(wi * 2.0 * PI / np as f64);
                }
            }
            Ok(SphereGrid { n, resolution, nodes, weights })
        }
        _ => domain(format!("sphere grids exist for n = 2, 3 (got {n})")),
    }
}

fn check_exponent(n: usize, p: f64) -> Result<()> {
    if !(p.is_finite() && p < n as f64 + 1.0) {
        return domain(format!("kernel exponent p = {p} must be below n + 1 = {}", n + 1));
    }
    if n != 2 && n != 3 {
        return domain(format!("seminorm quadrature exists for n = 2, 3 (got {n})"));
    }
    Ok(())
}

/// ∫_{S^{n-1}} (g·y)² |x−y|^{−p} dH_y for a unit x and a tangent vector g at x, divided by |g|².
pub fn model_integral(n: usize, p: f64) -> Result<f64> {
    check_exponent(n, p)?;
    let beta = |a: f64, b: f64| -> Result<f64> {
        Ok((log_gamma(a)?.magnitude + log_gamma(b)?.magnitude - log_gamma(a + b)?.magnitude).exp())
    };
    match n {
        2 => Ok(8.0 * 2f64.powf(-p) * beta((3.0 - p) / 2.0, 1.5)?),
        _ => Ok(8.0 * PI * 2f64.powf(-p) * beta(2.0 - p / 2.0, 2.0)?),
    }
}

fn dist_sq(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    d[0] * d[0] + d[1] * d[1] + d[2] * d[2]
}

/// Double quadrature of |u(x)-u(y)|²|x-y|^{-p} from samples and tangential gradients.
///
/// Each row subtracts the model (g_x·(y−x))²|x−y|^{-p}, whose sphere integral is known in
/// closed form, so the diagonal exclusion only sees an integrand that vanishes at x = y.
pub fn corrected_seminorm(grid: &SphereGrid, values: &[f64], grads: &[[f64; 3]], p: f64) -> Result<f64> {
    check_exponent(grid.n, p)?;
    if values.len() != grid.len() || grads.len() != grid.len() {
        return Err(Error::Input("samples do not match the grid".into()));
    }
    let model = model_integral(grid.n, p)?;
    let half_p = -0.5 * p;
    let total = par::sum_blocks(grid.len(), ROW_BLOCK, |rows| {
        let mut acc = 0.0;
        for i in rows {
            let xi = &grid.nodes[i];
            let gi = &grads[i];
            let ui = values[i];
            let mut row = 0.0;
            for (j, xj) in grid.nodes.iter().enumerate() {
                if j == i {
                    continue;
                }
                let k = dist_sq(xi, xj).powf(half_p);
                let du = ui - values[j];
                let gy = dot(gi, xj);
                row += grid.weights[j] * (du * du - gy * gy) * k;
            }
            row += model * dot(gi, gi);
            acc += grid.weights[i] * row;
        }
        acc
    });
    Ok(total)
}

/// Plain diagonal-excluded double quadrature from samples only.
pub fn raw_seminorm(grid: &SphereGrid, values: &[f64], p: f64) -> Result<f64> {
    check_exponent(grid.n, p)?;
    if values.len() != grid.len() {
        return Err(Error::Input("samples do not match the grid".into()));
    }
    let half_p = -0.5 * p;
    Ok(par::sum_blocks(grid.len(), ROW_BLOCK, |rows| {
        let mut acc = 0.0;
        for i in rows {
            let mut row = 0.0;
            for (j, xj) in grid.nodes.iter().enumerate() {
                if j != i {
                    let du = values[i] - values[j];
                    row += grid.weights[j] * du * du * dist_sq(&grid.nodes[i], xj).powf(half_p);
                }
            }
            acc += grid.weights[i] * row;
        }
        acc
    }))
}

/// [u]² with kernel |x−y|^{−p}: p = n+s gives [u]_{(1+s)/2}, p = n−α gives [u]_{(1−α)/2}.
pub fn frac_seminorm(u: &HarmonicProfile, grid: &SphereGrid, p: f64) -> Result<f64> {
    if u.n() != grid.n {
        return Err(Error::Input("profile and grid dimensions differ".into()));
    }
    check_exponent(grid.n, p)?;
    let values = grid.sample(|x| u.eval(x))?;
    let grads = grid.nodes.iter().map(|x| u.tangential_gradient(x)).collect::<Result<Vec<_>>>()?;
    corrected_seminorm(grid, &values, &grads, p)
}

pub fn max_projection_degree(grid: &SphereGrid) -> usize {
    match grid.n {
        2 => (grid.resolution - 1) / 2,
        _ => (grid.resolution - 1).min(MAX_DEGREE_S2),
    }
}

pub fn harmonic_project(samples: &[f64], grid: &SphereGrid, kmax: usize) -> Result<HarmonicProfile> {
    if samples.len() != grid.len() {
        return Err(Error::Input("samples do not match the grid".into()));
    }
    if kmax > max_projection_degree(grid) {
        return domain(format!(
            "degree {kmax} too large for the grid (at most {})",
            max_projection_degree(grid)
        ));
    }
    let n = grid.n;
    let len = crate::harmonics::basis_len(n, kmax);
    let parts = par::map_blocks(grid.len(), 256, |rows| -> Result<Vec<f64>> {
        let mut acc = vec![0.0; len];
        for j in rows {
            let b = eval_basis(n, kmax, &grid.nodes[j])?;
            let f = grid.weights[j] * samples[j];
            for (a, y) in acc.iter_mut().zip(&b) {
                *a += f * y;
            }
        }
        Ok(acc)
    });
    let mut coeffs = vec![0.0; len];
    for part in parts {
        for (c, v) in coeffs.iter_mut().zip(part?) {
            *c += v;
        }
    }
    let mut u = HarmonicProfile::zero(n);
    for k in 0..=kmax {
        for i in 1..=multiplicity(k, n) {
            u.set(k, i, coeffs[flat_index(n, k, i)])?;
        }
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Operator {
    /// I_s, eigenvalues λ_k^s.
    IFrac(f64),
    /// R_α, eigenvalues μ_k^α.
    RAlpha(f64),
    /// D^γ, eigenvalues λ_k^*(γ).
    DGamma(f64),
}

/// Kernel exponent and the factor turning [Y]²/‖Y‖² into the operator eigenvalue.
pub fn operator_kernel(n: usize, op: Operator) -> Result<(f64, f64)> {
    let nf = n as f64;
    match op {
        Operator::IFrac(s) if s > 0.0 && s < 1.0 => Ok((nf + s, 1.0)),
        Operator::RAlpha(a) if a > 0.0 && a < nf => Ok((nf - a, 1.0)),
        Operator::DGamma(g) if g > 0.0 && g < 2.0 && g != 1.0 => {
            // D^γ u = c_γ p.v.∫ (u(x)-u(y)) |x-y|^{-(n-1+γ)}, and ∫ u D^γ u = c_γ [u]²/2
            let c = g * 2f64.powf(g - 1.0) / PI.powf((nf - 1.0) / 2.0)
                * gamma_ratio((nf - 1.0 + g) / 2.0, 1.0 - g / 2.0)?;
            Ok((nf - 1.0 + g, 0.5 * c))
        }
        _ => domain(format!("unsupported operator {op:?} for n = {n}")),
    }
}

/// Rayleigh quotient of Y_k^i for the operator, from the absolutely convergent seminorm form.
pub fn rayleigh_check_mode(k: usize, i: usize, grid: &SphereGrid, op: Operator) -> Result<f64> {
    if k == 0 {
        return domain("Rayleigh check needs k >= 1");
    }
    if grid.n == 3 && k > MAX_DEGREE_S2 {
        return domain(format!("degree {k} beyond the S^2 basis"));
    }
    let (p, factor) = operator_kernel(grid.n, op)?;
    let y = HarmonicProfile::single_mode(grid.n, k, i, 1.0)?;
    let values = grid.sample(|x| y.eval(x))?;
    let norm: f64 = grid.integrate(&values.iter().map(|v| v * v).collect::<Vec<_>>());
    Ok(factor * frac_seminorm(&y, grid, p)? / norm)
}

pub fn rayleigh_check(k: usize, grid: &SphereGrid, op: Operator) -> Result<f64> {
    rayleigh_check_mode(k, 1, grid, op)
}

/// Σ weights − P(B).
pub fn weight_defect(grid: &SphereGrid) -> f64 {
    grid.weights.iter().sum::<f64>() - geometry(grid.n).surface
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{lambda_frac, lambda_star, mu_alpha};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn grid_weights() {
        let g = make_grid(2, 16).unwrap();
        assert!(weight_defect(&g).abs() < 1e-14);
        let g = make_grid(3, 32).unwrap();
        assert!(weight_defect(&g).abs() < 1e-13);
        let z2: Vec<f64> = g.nodes.iter().map(|p| p[2] * p[2]).collect();
        assert!((g.integrate(&z2) - 4.0 * PI / 3.0).abs() < 1e-12);
        for p in &g.nodes {
            assert!((dot(p, p) - 1.0).abs() < 1e-15);
        }
        assert!(make_grid(2, 4).is_err());
        assert!(make_grid(4, 16).is_err());
    }

    #[test]
    fn gauss_legendre_exactness() {
        let (x, w) = gauss_legendre(12);
        for d in 0..24 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d)).sum();
            let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {d}");
        }
    }

    #[test]
    fn model_integral_matches_quadrature() {
        // brute force with a fine polar grid around the north pole, g = e_x
        for &p in &[1.5, 2.5, 3.5] {
            let m = 400_000;
            let mut acc = 0.0;
            // theta = pi w^2 removes the endpoint singularity
            for j in 0..m {
                let w = (j as f64 + 0.5) / m as f64;
                let th = PI * w * w;
                let chord = 2.0 * (th / 2.0).sin();
                acc += th.sin().powi(3) * PI * chord.powf(-p) * 2.0 * PI * w;
            }
            let q = acc / m as f64;
            assert!(rel(model_integral(3, p).unwrap(), q) < 1e-4, "p={p}");
        }
        let m = 400_000;
        let mut acc = 0.0;
        for j in 0..m {
            let th = 2.0 * PI * (j as f64 + 0.5) / m as f64;
            acc += th.sin().powi(2) * (2.0 * (th / 2.0).sin()).powf(-1.5);
        }
        assert!(rel(model_integral(2, 1.5).unwrap(), acc * 2.0 * PI / m as f64) < 1e-6);
    }

    #[test]
    fn circle_seminorm_examples() {
        let g = make_grid(2, 4096).unwrap();
        let u = HarmonicProfile::single_mode(2, 2, 1, 1.0).unwrap();
        let v = frac_seminorm(&u, &g, 2.5).unwrap();
        assert!(rel(v, lambda_frac(2, 2, 0.5).unwrap()) < 1e-3);
        let u1 = HarmonicProfile::single_mode(2, 1, 1, 1.0).unwrap();
        let v1 = frac_seminorm(&u1, &g, 1.5).unwrap();
        assert!(rel(v1, mu_alpha(1, 2, 0.5).unwrap()) < 1e-3);
        let c = HarmonicProfile::single_mode(2, 0, 1, 2.0).unwrap();
        assert_eq!(frac_seminorm(&c, &g, 2.5).unwrap(), 0.0);
        assert!(frac_seminorm(&u, &g, 3.0).is_err());
    }

    #[test]
    fn comparison_bound() {
        let g = make_grid(2, 512).unwrap();
        let mut u = HarmonicProfile::zero(2);
        u.set(1, 2, 0.5).unwrap();
        u.set(3, 1, -0.7).unwrap();
        u.set(5, 2, 0.2).unwrap();
        for &(s, a) in &[(0.3, 0.5), (0.8, 1.5), (0.1, 1.9)] {
            let lo = frac_seminorm(&u, &g, 2.0 - a).unwrap();
            let hi = frac_seminorm(&u, &g, 2.0 + s).unwrap();
            assert!(lo <= 2f64.powf(a + s) * hi);
        }
    }

    #[test]
    fn parseval_convergence_doubling() {
        for &s in &[0.3, 0.5, 0.7] {
            let u = HarmonicProfile::single_mode(2, 3, 2, 1.0).unwrap();
            let exact = lambda_frac(3, 2, s).unwrap();
            let mut errs = Vec::new();
            for m in [64, 128, 256, 512] {
                let g = make_grid(2, m).unwrap();
                errs.push((frac_seminorm(&u, &g, 2.0 + s).unwrap() - exact).abs() / exact);
            }
            for w in errs.windows(2) {
                assert!(w[1] <= 0.5 * w[0] || w[1] < 1e-12, "s={s} {errs:?}");
            }
        }
    }

    #[test]
    fn raw_estimator_converges_slowly() {
        let u = HarmonicProfile::single_mode(2, 2, 1, 1.0).unwrap();
        let exact = lambda_frac(2, 2, 0.5).unwrap();
        let mut errs = Vec::new();
        for m in [256, 1024] {
            let g = make_grid(2, m).unwrap();
            let v = grid_values(&u, &g);
            errs.push((raw_seminorm(&g, &v, 2.5).unwrap() - exact).abs() / exact);
        }
        assert!(errs[1] < errs[0]);
        assert!(errs[1] > 1e-3);
    }

    fn grid_values(u: &HarmonicProfile, g: &SphereGrid) -> Vec<f64> {
        g.sample(|x| u.eval(x)).unwrap()
    }

    #[test]
    fn rotation_symmetry_on_circle() {
        let g = make_grid(2, 256).unwrap();
        let mut u = HarmonicProfile::zero(2);
        u.set(2, 1, 0.6).unwrap();
        u.set(3, 2, -0.4).unwrap();
        let base = frac_seminorm(&u, &g, 2.4).unwrap();
        // rotation by 5 grid steps, applied to the coefficients
        let phi = 2.0 * PI * 5.0 / 256.0;
        let mut r = HarmonicProfile::zero(2);
        for (k, i, a) in u.iter() {
            let (sn, c) = (k as f64 * phi).sin_cos();
            if i == 1 {
                r.set(k, 1, r.get(k, 1) + a * c).unwrap();
                r.set(k, 2, r.get(k, 2) + a * sn).unwrap();
            } else {
                r.set(k, 1, r.get(k, 1) - a * sn).unwrap();
                r.set(k, 2, r.get(k, 2) + a * c).unwrap();
            }
        }
        let rot = frac_seminorm(&r, &g, 2.4).unwrap();
        assert!(rel(rot, base) < 1e-10);
    }

    #[test]
    fn projection_examples() {
        let g = make_grid(3, 16).unwrap();
        let y = HarmonicProfile::single_mode(3, 3, 4, 1.0).unwrap();
        let p = harmonic_project(&grid_values(&y, &g), &g, 8).unwrap();
        for (k, i, a) in p.iter() {
            let want = if (k, i) == (3, 4) { 1.0 } else { 0.0 };
            assert!((a - want).abs() < 1e-10, "({k},{i}) = {a}");
        }
        let ones = vec![1.0; g.len()];
        let p = harmonic_project(&ones, &g, 4).unwrap();
        assert!((p.a0() - (4.0 * PI).sqrt()).abs() < 1e-12);
        assert!(harmonic_project(&ones, &g, 16).is_err());

        let c = make_grid(2, 64).unwrap();
        let f: Vec<f64> = c.nodes.iter().map(|x| {
            let t = x[1].atan2(x[0]);
            (5.0 * t).cos() + 0.5 * (2.0 * t).sin()
        }).collect();
        let p = harmonic_project(&f, &c, 10).unwrap();
        assert!((p.get(5, 1) - PI.sqrt()).abs() < 1e-12);
        assert!((p.get(2, 2) - 0.5 * PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn reconstruct_then_project_identity() {
        let g = make_grid(3, 12).unwrap();
        let mut u = HarmonicProfile::zero(3);
        for (k, i, a) in [(0, 1, 0.3), (2, 2, -0.8), (5, 7, 0.25), (6, 13, 1.1)] {
            u.set(k, i, a).unwrap();
        }
        let back = harmonic_project(&grid_values(&u, &g), &g, 8).unwrap();
        for k in 0..=8 {
            for i in 1..=multiplicity(k, 3) {
                assert!((back.get(k, i) - u.get(k, i)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rayleigh_examples() {
        let c = make_grid(2, 4096).unwrap();
        let q = rayleigh_check(1, &c, Operator::IFrac(0.5)).unwrap();
        assert!(rel(q, lambda_frac(1, 2, 0.5).unwrap()) < 1e-3);
        let q = rayleigh_check(4, &c, Operator::DGamma(1.5)).unwrap();
        assert!(rel(q, lambda_star(4, 1.5, 2).unwrap()) < 1e-3);
        let q = rayleigh_check(3, &c, Operator::DGamma(0.6)).unwrap();
        assert!(rel(q, lambda_star(3, 0.6, 2).unwrap()) < 1e-3);
        let s2 = make_grid(3, 32).unwrap();
        let q = rayleigh_check(2, &s2, Operator::RAlpha(2.0)).unwrap();
        assert!(rel(q, 1.2 * 16.0 * PI / 3.0) < 1e-3);
        assert!(rayleigh_check(2, &s2, Operator::DGamma(1.0)).is_err());
        assert!(rayleigh_check(2, &s2, Operator::RAlpha(3.0)).is_err());
    }
}
