//! The `verify` suite: identities and properties across all modules.

use crate::commands::{default_resolution, params};
use crate::output::{num, write_csv, write_json, Format, Table};
use crate::{Cli, VerificationFailed};
use anyhow::Result;
use nliso_core::ball_energy::{geometry, omega, ps_ball, ps_ball_radius, valpha_ball, valpha_ball_radius};
use nliso_core::general_sets::{asymmetry, convex_truncation_check, energy_union, iso_gap, BallUnionShape, HalfSpace, UnionKind};
use nliso_core::nearly_spherical::{build_normalized, deficit, default_t_sequence, variation_probe, EnergyKind};
use nliso_core::quadforms::{stability_form, stability_verdict, HarmonicProfile, Verdict};
use nliso_core::specfun::{digamma, log_gamma};
use nliso_core::sphere_numerics::{make_grid, rayleigh_check, Operator};
use nliso_core::spectrum::{lambda_any, lambda_frac, mu_alpha, Params};
use nliso_core::thresholds::{beta_star, constants_ledger, m_star, ratio_min_check, uniformity, BetaMode};
use serde_json::{json, Value};
use std::io::Write;

type Outcome = std::result::Result<String, String>;

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn within(name: &str, err: f64, tol: f64) -> Outcome {
    if err <= tol {
        Ok(format!("{name} {err:.2e} <= {tol:.1e}"))
    } else {
        Err(format!("{name} {err:.3e} exceeds {tol:.1e}"))
    }
}

struct Settings {
    p: Params,
    tol: f64,
    kmax: usize,
    samples: u64,
    seed: u64,
    resolution: usize,
}

fn gamma(x: f64) -> std::result::Result<f64, String> {
    log_gamma(x).map(|g| g.value()).map_err(fail)
}

fn check_specfun(st: &Settings) -> Outcome {
    let mut worst: f64 = 0.0;
    for x in [0.3, 2.7, 11.25, -0.4, -3.6, 40.5] {
        worst = worst.max(rel(gamma(x + 1.0)?, x * gamma(x)?));
        worst = worst.max(rel(digamma(x + 1.0).map_err(fail)?, digamma(x).map_err(fail)? + 1.0 / x));
    }
    let x = 0.3;
    let refl = gamma(x)? * gamma(1.0 - x)? * (std::f64::consts::PI * x).sin() / std::f64::consts::PI;
    worst = worst.max((refl - 1.0).abs());
    within("recurrence/reflection residual", worst, st.tol)
}

fn check_eigen_identities(st: &Settings) -> Outcome {
    let n = st.p.n;
    let nf = n as f64;
    let mut worst: f64 = 0.0;
    for j in 1..=9 {
        let s = 0.1 * j as f64;
        worst = worst.max(rel(lambda_frac(2, n, s).map_err(fail)? / lambda_frac(1, n, s).map_err(fail)?, 2.0 * nf / (nf - s)));
    }
    for j in 1..4 * n {
        let a = 0.25 * j as f64;
        worst = worst.max(rel(mu_alpha(2, n, a).map_err(fail)? / mu_alpha(1, n, a).map_err(fail)?, 2.0 * nf / (nf + a)));
    }
    within("2n/(n-s), 2n/(n+alpha) ratio error", worst, st.tol)
}

fn check_spectrum_shape(st: &Settings) -> Outcome {
    let Params { n, s, alpha, .. } = st.p;
    let (mut prev_l, mut prev_m) = (lambda_any(0, n, s).map_err(fail)?, mu_alpha(0, n, alpha).map_err(fail)?);
    if prev_l != 0.0 || prev_m != 0.0 {
        return Err(format!("k = 0 eigenvalues {prev_l}, {prev_m} are not zero"));
    }
    for k in 1..=st.kmax {
        let (l, m) = (lambda_any(k, n, s).map_err(fail)?, mu_alpha(k, n, alpha).map_err(fail)?);
        if l <= prev_l {
            return Err(format!("lambda not increasing at k = {k}"));
        }
        if m <= prev_m {
            return Err(format!("mu not increasing at k = {k}"));
        }
        prev_l = l;
        prev_m = m;
    }
    let jump = (mu_alpha(3, n, 1.0 + 1e-6).map_err(fail)? - mu_alpha(3, n, 1.0).map_err(fail)?).abs();
    Ok(format!("monotone up to k = {}, alpha = 1 continuity gap {jump:.1e}", st.kmax))
}

fn check_beta_star(st: &Settings) -> Outcome {
    let spectral = beta_star(&st.p, BetaMode::Spectral { kmax: st.kmax }).map_err(fail)?;
    let closed = beta_star(&st.p, BetaMode::Closed).map_err(fail)?;
    let k = ratio_min_check(&st.p, st.kmax).map_err(fail)?.argmin_k;
    if k != 2 {
        return Err(format!("ratio minimized at k = {k}"));
    }
    within("spectral vs closed beta*", rel(spectral, closed), st.tol)
}

fn check_flagship(st: &Settings) -> Outcome {
    let m = m_star(&Params::new(3, 1.0, 2.0).map_err(fail)?).map_err(fail)?;
    within("|m*(3,1,2) - 5|", (m - 5.0).abs(), st.tol)
}

fn check_ball(st: &Settings) -> Outcome {
    let Params { n, alpha, .. } = st.p;
    let target = omega(n - 1) * geometry(n).surface;
    let lim = rel(0.001 * ps_ball(n, 0.999).map_err(fail)?, target);
    if lim >= 5e-3 {
        return Err(format!("(1-s)P_s(B) at s = 0.999 off by {lim:.2e}"));
    }
    let r = 1.7;
    let scale = rel(valpha_ball_radius(n, alpha, r).map_err(fail)?, r.powf(n as f64 + alpha) * valpha_ball(n, alpha).map_err(fail)?)
        .max(rel(ps_ball_radius(n, 0.4, r).map_err(fail)?, r.powf(n as f64 - 0.4) * ps_ball(n, 0.4).map_err(fail)?));
    within(&format!("s -> 1 gap {lim:.2e}; scaling residual"), scale, st.tol)
}

fn check_stability(st: &Settings) -> Outcome {
    let bs = beta_star(&st.p, BetaMode::Closed).map_err(fail)?;
    let u = HarmonicProfile::single_mode(st.p.n, 2, 1, 1.0).map_err(fail)?;
    let below = stability_form(&u, &st.p.with_beta(bs * (1.0 - 1e-6)).map_err(fail)?).map_err(fail)?;
    let above = stability_form(&u, &st.p.with_beta(bs * (1.0 + 1e-6)).map_err(fail)?).map_err(fail)?;
    if !(below > 0.0 && above < 0.0) {
        return Err(format!("form does not change sign at beta*: {below:e}, {above:e}"));
    }
    let lo = stability_verdict(&st.p.with_beta(0.5 * bs).map_err(fail)?, st.kmax.min(64)).map_err(fail)?;
    let hi = stability_verdict(&st.p.with_beta(1.5 * bs).map_err(fail)?, st.kmax.min(64)).map_err(fail)?;
    if lo.verdict != Verdict::Stable || hi.verdict != Verdict::Unstable || !lo.consistent || !hi.consistent {
        return Err("verdicts disagree with the mode coefficients".into());
    }
    Ok(format!("sign change within ±1e-6 of beta* = {bs:.10}"))
}

fn check_ledger(st: &Settings) -> Outcome {
    let Params { n, s, alpha, .. } = st.p;
    let s_ledger = if s < 1.0 { s } else { 0.999 };
    for (name, v) in constants_ledger(n, s_ledger, alpha).map_err(fail)?.named() {
        if !(v > 0.0 && v.is_finite()) {
            return Err(format!("{name} = {v}"));
        }
    }
    let u = uniformity(n, alpha, 0.2).map_err(fail)?;
    let vals = [u.inf_chi1, u.inf_inv_chi2, u.sup_c1_plus_c2, u.inf_eps1, u.sup_lambda0_plus_c4];
    if vals.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(format!("uniformity bounds {vals:?}"));
    }
    Ok("constants positive, uniformity bounds finite on s in [0.2, 0.999]".into())
}

fn check_rayleigh(st: &Settings) -> Outcome {
    let Params { n, s, alpha, .. } = st.p;
    let grid = make_grid(n, st.resolution).map_err(fail)?;
    let mut worst: f64 = 0.0;
    for k in 1..=4 {
        if s < 1.0 {
            worst = worst.max(rel(rayleigh_check(k, &grid, Operator::IFrac(s)).map_err(fail)?, lambda_frac(k, n, s).map_err(fail)?));
        }
        worst = worst.max(rel(rayleigh_check(k, &grid, Operator::RAlpha(alpha)).map_err(fail)?, mu_alpha(k, n, alpha).map_err(fail)?));
    }
    within("Rayleigh quotient vs eigenvalue", worst, 1e-3)
}

fn check_nearly_spherical(st: &Settings) -> Outcome {
    let Params { n, s, .. } = st.p;
    if s >= 1.0 {
        return Ok("skipped: radial energies need s < 1".into());
    }
    let grid = make_grid(n, st.resolution).map_err(fail)?;
    let ball = build_normalized(&HarmonicProfile::zero(n), 0.0, &grid).map_err(fail)?;
    let d0 = deficit(&ball, EnergyKind::Ps(s)).map_err(fail)?.abs() / ps_ball(n, s).map_err(fail)?;
    if d0 > 1e-8 {
        return Err(format!("t = 0 does not reproduce P_s(B): {d0:e}"));
    }
    let y2 = HarmonicProfile::single_mode(n, 2, 1, 1.0).map_err(fail)?;
    let probe = variation_probe(&y2, &st.p, &default_t_sequence(), &grid).map_err(fail)?;
    let (eps, ev) = (rel(probe.limit_ps, probe.predicted_ps), rel(probe.limit_v, probe.predicted_v));
    if eps > 0.01 || ev > 0.01 {
        return Err(format!("second variation off: P_s {eps:.2e}, V {ev:.2e}"));
    }
    let y1 = HarmonicProfile::single_mode(n, 1, 1, 1.0).map_err(fail)?;
    let t1 = variation_probe(&y1, &st.p, &default_t_sequence(), &grid).map_err(fail)?;
    if t1.limit_ps.abs() > 0.01 * probe.predicted_ps || t1.limit_v.abs() > 0.01 * probe.predicted_v {
        return Err(format!("translation mode not neutral: {:e}, {:e}", t1.limit_ps, t1.limit_v));
    }
    Ok(format!("second variation within {:.1e}, translation mode neutral", eps.max(ev)))
}

fn check_general_sets(st: &Settings) -> Outcome {
    let n = st.p.n;
    let s = if st.p.s < 1.0 { st.p.s } else { 0.5 };
    let mut notes = Vec::new();
    for seed in 0..3u64 {
        let shape = BallUnionShape::random(n, 2 + seed as usize, st.seed.wrapping_add(seed)).map_err(fail)?;
        let e = energy_union(&shape, UnionKind::Ps(s), st.samples).map_err(fail)?.estimate;
        let lb = nliso_core::ball_energy::iso_lower_bound(n, s, shape.volume()).map_err(fail)?;
        if e.value < lb - 3.0 * e.std_error {
            return Err(format!("isoperimetric inequality violated: {} < {lb}", e.value));
        }
        let again = energy_union(&shape, UnionKind::Ps(s), st.samples).map_err(fail)?.estimate;
        if again.value.to_bits() != e.value.to_bits() {
            return Err("same seed gave different estimates".into());
        }
    }
    notes.push("isoperimetric inequality and determinism hold".to_string());
    let single = BallUnionShape::single(n, 0.8).map_err(fail)?;
    if iso_gap(&single, s, st.samples).map_err(fail)?.value != 0.0 || asymmetry(&single, 2).map_err(fail)?.value > 1e-6 {
        return Err("single ball has non-zero gap or asymmetry".into());
    }
    let far = BallUnionShape::pair(n, 1.0, 50.0, st.seed).map_err(fail)?;
    let a = asymmetry(&far, 4).map_err(fail)?.value;
    let g = iso_gap(&far, s, st.samples).map_err(fail)?.value;
    let limit = 2f64.powf(s / n as f64) - 1.0;
    if (a - 1.0).abs() > 0.02 || rel(g, limit) > 0.02 {
        return Err(format!("far pair: asymmetry {a}, gap {g} vs {limit}"));
    }
    let pair = BallUnionShape::pair(n, 1.0, 3.0, st.seed).map_err(fail)?;
    let mut normal = vec![0.0; n];
    normal[0] = 1.0;
    let cut = HalfSpace::new(&normal, 1.5).map_err(fail)?;
    let chk = convex_truncation_check(&pair, &cut, s.min(0.45), st.samples).map_err(fail)?;
    if !chk.holds {
        return Err(format!("truncation by a half-space increased P_s: {chk:?}"));
    }
    notes.push(format!("far-pair limits hold, truncation margin {:.1} sigma", chk.margin_sigma));
    Ok(notes.join("; "))
}

pub fn run(cli: &Cli, quick: bool, out: &mut dyn Write) -> Result<()> {
    let p = params(cli)?;
    let grid_ok = p.n == 2 || p.n == 3;
    let resolution = match (cli.resolution, quick) {
        (Some(r), _) => r,
        (None, true) => if p.n == 2 { 256 } else { 16 },
        (None, false) => default_resolution(p.n),
    };
    let st = Settings {
        p,
        tol: cli.tolerance,
        kmax: if quick { cli.kmax.min(128) } else { cli.kmax },
        samples: if quick { cli.samples.min(100_000) } else { cli.samples },
        seed: cli.seed,
        resolution,
    };
    let mut checks: Vec<(&str, fn(&Settings) -> Outcome)> = vec![
        ("specfun recurrences", check_specfun),
        ("eigenvalue identities", check_eigen_identities),
        ("spectrum monotonicity", check_spectrum_shape),
        ("beta* spectral = closed", check_beta_star),
        ("flagship m* = 5", check_flagship),
        ("ball energies", check_ball),
        ("stability threshold", check_stability),
        ("constants ledger", check_ledger),
    ];
    if grid_ok {
        checks.push(("quadrature Rayleigh quotients", check_rayleigh));
        checks.push(("nearly spherical energies", check_nearly_spherical));
        checks.push(("ball unions", check_general_sets));
    }
    let text = cli.format.is_none();
    let mut results = Vec::new();
    let mut failed = 0;
    for (name, f) in checks {
        let r = f(&st);
        if r.is_err() {
            failed += 1;
        }
        if text {
            match &r {
                Ok(d) => writeln!(out, "PASS  {name}: {d}")?,
                Err(d) => writeln!(out, "FAIL  {name}: {d}")?,
            }
            out.flush()?;
        }
        results.push((name, r));
    }
    if !grid_ok && text {
        writeln!(out, "SKIP  sphere-grid checks: grids exist for n = 2, 3")?;
    }
    match cli.format {
        None => writeln!(out, "{} checks, {failed} failed", results.len())?,
        Some(Format::Json) => {
            let list: Vec<Value> = results
                .iter()
                .map(|(name, r)| {
                    let (passed, detail) = match r {
                        Ok(d) => (true, d.clone()),
                        Err(d) => (false, d.clone()),
                    };
                    json!({ "name": name, "passed": passed, "detail": detail })
                })
                .collect();
            let v = json!({
                "command": "verify",
                "n": st.p.n,
                "s": num(st.p.s),
                "alpha": num(st.p.alpha),
                "quick": quick,
                "checks": list,
                "passed": failed == 0,
            });
            write_json(&v, &mut *out)?;
        }
        Some(Format::Csv) => {
            let mut t = Table::new(&["check", "passed", "detail"]);
            for (name, r) in &results {
                let (passed, detail) = match r {
                    Ok(d) => ("true", d.clone()),
                    Err(d) => ("false", d.clone()),
                };
                t.push(vec![name.to_string(), passed.into(), detail]);
            }
            write_csv(&t, &mut *out)?;
        }
    }
    if failed > 0 {
        return Err(VerificationFailed(failed).into());
    }
    Ok(())
}
