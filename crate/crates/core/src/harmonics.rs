//! Real orthonormal spherical harmonics on S^1 and S^2.

use crate::error::{domain, Result};
use crate::spectrum::multiplicity;
use std::f64::consts::PI;

/// Highest degree with an explicit basis on S^2.
pub const MAX_DEGREE_S2: usize = 64;

/// Position of (k, i) in the flat (k, i)-ordered coefficient vector, i starting at 1.
pub fn flat_index(n: usize, k: usize, i: usize) -> usize {
    (0..k).map(|j| multiplicity(j, n)).sum::<usize>() + i - 1
}

pub fn basis_len(n: usize, kmax: usize) -> usize {
    (0..=kmax).map(|j| multiplicity(j, n)).sum()
}

/// All basis functions of degree ≤ kmax at a unit vector, ordered by (k, i).
///
/// Circle: i=1 is cos(kφ)/√π, i=2 is sin(kφ)/√π.
/// Sphere: i = m + k + 1 for m in -k..=k, cosine type for m > 0, sine type for m < 0.
pub fn eval_basis(n: usize, kmax: usize, x: &[f64; 3]) -> Result<Vec<f64>> {
    match n {
        2 => Ok(eval_circle(kmax, x[1].atan2(x[0]))),
        3 => {
            if kmax > MAX_DEGREE_S2 {
                return domain(format!("degree {kmax} exceeds {MAX_DEGREE_S2}"));
            }
            Ok(eval_sphere(kmax, x))
        }
        _ => domain(format!("harmonic evaluation only for n = 2, 3 (got {n})")),
    }
}

fn eval_circle(kmax: usize, phi: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * kmax + 1);
    out.push(1.0 / (2.0 * PI).sqrt());
    let c = 1.0 / PI.sqrt();
    for k in 1..=kmax {
        let (s, co) = (k as f64 * phi).sin_cos();
        out.push(c * co);
        out.push(c * s);
    }
    out
}

fn eval_sphere(kmax: usize, x: &[f64; 3]) -> Vec<f64> {
    let z = x[2].clamp(-1.0, 1.0);
    let st = (x[0] * x[0] + x[1] * x[1]).sqrt();
    let phi = x[1].atan2(x[0]);
    // q[k][m], orthonormal associated Legendre without the Condon-Shortley phase
    let mut q = vec![vec![0.0; kmax + 1]; kmax + 1];
    q[0][0] = 1.0 / (4.0 * PI).sqrt();
    for m in 1..=kmax {
        let mf = m as f64;
        q[m][m] = q[m - 1][m - 1] * ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * st;
    }
    for m in 0..kmax {
        q[m + 1][m] = (2.0 * m as f64 + 3.0).sqrt() * z * q[m][m];
    }
    for m in 0..=kmax {
        for k in (m + 2)..=kmax {
            let (kf, mf) = (k as f64, m as f64);
            let a = ((4.0 * kf * kf - 1.0) / (kf * kf - mf * mf)).sqrt();
            let b = (((kf - 1.0).powi(2) - mf * mf) / (4.0 * (kf - 1.0).powi(2) - 1.0)).sqrt();
            q[k][m] = a * (z * q[k - 1][m] - b * q[k - 2][m]);
        }
    }
    let mut out = Vec::with_capacity((kmax + 1) * (kmax + 1));
    let r2 = std::f64::consts::SQRT_2;
    for (k, row) in q.iter().enumerate() {
        for i in 0..(2 * k + 1) {
            let m = i as i64 - k as i64;
            let v = match m.cmp(&0) {
                std::cmp::Ordering::Equal => row[0],
                std::cmp::Ordering::Greater => r2 * row[m as usize] * (m as f64 * phi).cos(),
                std::cmp::Ordering::Less => r2 * row[(-m) as usize] * ((-m) as f64 * phi).sin(),
            };
            out.push(v);
        }
    }
    out
}
