//! Subcommand implementations.

use crate::output::{cell, head, num, opt_num, Report, Table};
use crate::{Cli, Command, UsageError};
use anyhow::Result;
use nliso_core::ball_energy::{curvature_ball, geometry, omega, pers_ball, ps_ball, valpha_ball};
use nliso_core::general_sets::{
    asymmetry, energy_union, iso_gap, separation_sweep, BallUnionShape, UnionKind, RESULT_HEADER, SWEEP_HEADER,
};
use nliso_core::nearly_spherical::{fuglede_scan, SCAN_HEADER};
use nliso_core::quadforms::{stability_form, stability_verdict, HarmonicProfile};
use nliso_core::sphere_numerics::{make_grid, SphereGrid};
use nliso_core::spectrum::{lambda_any, lambda_local, multiplicity, mu_alpha, Params};
use nliso_core::thresholds::{
    beta_from_mass, beta_star, constants_ledger_with, threshold_report, uniformity, BetaMode, LedgerInputs,
};
use serde_json::{json, Map, Value};
use std::io::Write;
use std::path::Path;

pub fn default_resolution(n: usize) -> usize {
    if n == 2 {
        2048
    } else {
        32
    }
}

pub fn params(cli: &Cli) -> Result<Params> {
    Ok(Params::new(cli.n, cli.s, cli.alpha)?)
}

pub fn grid(cli: &Cli) -> Result<SphereGrid> {
    if cli.n != 2 && cli.n != 3 {
        return Err(UsageError(format!("sphere grids exist for n = 2, 3 (got n = {})", cli.n)).into());
    }
    Ok(make_grid(cli.n, cli.resolution.unwrap_or_else(|| default_resolution(cli.n)))?)
}

/// β from --beta or --m; both together are rejected.
fn resolve_beta(cli: &Cli, p: &Params) -> Result<Option<f64>> {
    match (cli.beta, cli.m) {
        (Some(_), Some(_)) => Err(UsageError("give either --beta or --m, not both".into()).into()),
        (Some(b), None) => Ok(Some(p.with_beta(b)?.beta.expect("set"))),
        (None, Some(m)) => Ok(Some(beta_from_mass(p, m)?)),
        (None, None) => Ok(None),
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())).into())
}

fn load_profile(path: Option<&Path>, n: usize) -> Result<HarmonicProfile> {
    match path {
        Some(p) => Ok(HarmonicProfile::from_json(&read_file(p)?, Some(n))?),
        None => Ok(HarmonicProfile::single_mode(n, 2, 1, 1.0)?),
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let report = match &cli.command {
        Command::Spectrum => spectrum(cli)?,
        Command::Ball => ball(cli)?,
        Command::Thresholds => thresholds(cli)?,
        Command::Stability { profile } => stability(cli, profile.as_deref())?,
        Command::Fuglede { profile, t } => fuglede(cli, profile.as_deref(), t)?,
        Command::Isoperimetric { shape, separations, starts } => isoperimetric(cli, shape.as_deref(), separations, *starts)?,
        Command::Constants { s0, besicovitch, iso_constant } => constants(cli, *s0, *besicovitch, *iso_constant)?,
        Command::Verify { quick } => return crate::verify::run(cli, *quick, out),
    };
    report.write(cli.format, out)
}

fn spectrum(cli: &Cli) -> Result<Report> {
    let p = params(cli)?;
    let mut table = Table::new(&["k", "multiplicity", "lambda_s", "lambda_local", "mu_alpha"]);
    let mut rows = Vec::with_capacity(cli.kmax + 1);
    for k in 0..=cli.kmax {
        let (l, ll, mu) = (lambda_any(k, p.n, p.s)?, lambda_local(k, p.n), mu_alpha(k, p.n, p.alpha)?);
        let mult = multiplicity(k, p.n);
        table.push(vec![k.to_string(), mult.to_string(), cell(l), cell(ll), cell(mu)]);
        rows.push(json!({ "k": k, "multiplicity": mult, "lambda_s": num(l), "lambda_local": num(ll), "mu_alpha": num(mu) }));
    }
    let mut m = head("spectrum", p.n, p.s, p.alpha);
    m.insert("kmax".into(), Value::from(cli.kmax));
    m.insert("rows".into(), Value::Array(rows));
    Ok(Report::csv_first(Value::Object(m), table))
}

fn ball(cli: &Cli) -> Result<Report> {
    let p = params(cli)?;
    let (n, s, a) = (p.n, p.s, p.alpha);
    let g = geometry(n);
    let ps = if p.is_local() { None } else { Some(ps_ball(n, s)?) };
    let curv = if p.is_local() { None } else { Some(curvature_ball(n, s)?) };
    let vals = [
        ("omega_n", Some(omega(n))),
        ("perimeter", Some(g.surface)),
        ("ps_ball", ps),
        ("valpha_ball", Some(valpha_ball(n, a)?)),
        ("pers_ball", Some(pers_ball(n, s)?)),
        ("curvature", curv),
    ];
    let mut m = head("ball", n, s, a);
    let mut table = Table::new(&["quantity", "value"]);
    for (k, v) in vals {
        m.insert(k.into(), opt_num(v));
        table.push(vec![k.into(), v.map(cell).unwrap_or_else(|| "NaN".into())]);
    }
    Ok(Report::json_first(Value::Object(m), table))
}

fn thresholds(cli: &Cli) -> Result<Report> {
    let p = params(cli)?;
    let r = threshold_report(&p, cli.kmax)?;
    let mut m = head("thresholds", p.n, p.s, p.alpha);
    m.insert("kmax".into(), Value::from(cli.kmax));
    m.insert("beta_star_spectral".into(), num(r.beta_star_spectral));
    m.insert("beta_star_closed".into(), num(r.beta_star_closed));
    m.insert("argmin_k".into(), Value::from(r.argmin_k));
    m.insert("m_star".into(), num(r.m_star));
    let table = Table::quantities(&[
        ("beta_star_spectral", r.beta_star_spectral),
        ("beta_star_closed", r.beta_star_closed),
        ("argmin_k", r.argmin_k as f64),
        ("m_star", r.m_star),
    ]);
    Ok(Report::json_first(Value::Object(m), table))
}

fn stability(cli: &Cli, profile: Option<&Path>) -> Result<Report> {
    let p = params(cli)?;
    let beta = resolve_beta(cli, &p)?.ok_or_else(|| UsageError("stability needs --beta or --m".into()))?;
    let pb = p.with_beta(beta)?;
    let r = stability_verdict(&pb, cli.kmax)?;
    let verdict = serde_json::to_value(r.verdict)?;
    let mut m = head("stability", p.n, p.s, p.alpha);
    m.insert("beta".into(), num(beta));
    m.insert("beta_star".into(), num(r.beta_star));
    m.insert("verdict".into(), verdict);
    m.insert("min_mode_k".into(), Value::from(r.min_mode_k));
    m.insert("consistent".into(), Value::from(r.consistent));
    if profile.is_some() {
        let u = load_profile(profile, p.n)?;
        m.insert("profile_form".into(), num(stability_form(&u, &pb)?));
    }
    let mut table = Table::new(&["k", "coefficient"]);
    let mut modes = Vec::with_capacity(r.modes.len());
    for (k, c) in &r.modes {
        table.push(vec![k.to_string(), cell(*c)]);
        modes.push(json!({ "k": k, "coefficient": num(*c) }));
    }
    m.insert("modes".into(), Value::Array(modes));
    Ok(Report::json_first(Value::Object(m), table))
}

fn fuglede(cli: &Cli, profile: Option<&Path>, t: &[f64]) -> Result<Report> {
    let p = params(cli)?;
    let u = load_profile(profile, p.n)?;
    let bs = beta_star(&p, BetaMode::Closed)?;
    let beta = resolve_beta(cli, &p)?.unwrap_or(0.5 * bs);
    let g = grid(cli)?;
    let rows = fuglede_scan(&u, &p, beta, t, &g)?;
    let mut table = Table::new(&SCAN_HEADER);
    let mut json_rows = Vec::with_capacity(rows.len());
    for r in &rows {
        let vals = r.values();
        table.push(vals.iter().map(|v| cell(*v)).collect());
        let obj: Map<String, Value> = SCAN_HEADER.iter().zip(vals).map(|(k, v)| (k.to_string(), num(v))).collect();
        json_rows.push(Value::Object(obj));
    }
    let mut m = head("fuglede", p.n, p.s, p.alpha);
    m.insert("beta".into(), num(beta));
    m.insert("beta_star".into(), num(bs));
    m.insert("resolution".into(), Value::from(g.resolution));
    m.insert("rows".into(), Value::Array(json_rows));
    Ok(Report::csv_first(Value::Object(m), table))
}

fn isoperimetric(cli: &Cli, shape: Option<&Path>, separations: &[f64], starts: usize) -> Result<Report> {
    let (n, s, a) = (cli.n, cli.s, cli.alpha);
    if !(s > 0.0 && s < 1.0) {
        return Err(UsageError("isoperimetric needs s in (0, 1)".into()).into());
    }
    let mut m = head("isoperimetric", n, s, a);
    m.insert("samples".into(), Value::from(cli.samples));
    m.insert("seed".into(), Value::from(cli.seed));
    match shape {
        None => {
            let rows = separation_sweep(n, s, separations, cli.samples, cli.seed, starts)?;
            let mut table = Table::new(&SWEEP_HEADER);
            let mut json_rows = Vec::new();
            for r in &rows {
                let vals = [r.separation, r.gap, r.gap_std_error, r.asymmetry, r.ratio];
                table.push(vals.iter().map(|v| cell(*v)).collect());
                let obj: Map<String, Value> = SWEEP_HEADER.iter().zip(vals).map(|(k, v)| (k.to_string(), num(v))).collect();
                json_rows.push(Value::Object(obj));
            }
            m.insert("rows".into(), Value::Array(json_rows));
            Ok(Report::csv_first(Value::Object(m), table))
        }
        Some(path) => {
            let shape = BallUnionShape::from_json(&read_file(path)?, Some(n), cli.seed)?;
            let ps = energy_union(&shape, UnionKind::Ps(s), cli.samples)?.estimate;
            let va = energy_union(&shape, UnionKind::VAlpha(a), cli.samples)?.estimate;
            let gap = iso_gap(&shape, s, cli.samples)?;
            let asym = asymmetry(&shape, starts)?;
            let rows = [
                ("volume", shape.volume(), 0.0, 0),
                ("ps", ps.value, ps.std_error, ps.samples),
                ("valpha", va.value, va.std_error, va.samples),
                ("gap", gap.value, gap.std_error, gap.samples),
                ("asymmetry", asym.value, 0.0, 0),
            ];
            let mut table = Table::new(&RESULT_HEADER);
            let mut json_rows = Vec::new();
            for (q, v, e, k) in rows {
                table.push(vec![q.into(), cell(v), cell(e), k.to_string(), shape.rng_seed.to_string()]);
                json_rows.push(json!({ "quantity": q, "value": num(v), "std_error": num(e), "samples": k, "seed": shape.rng_seed }));
            }
            m.insert("asymmetry_converged".into(), Value::from(asym.converged));
            m.insert("rows".into(), Value::Array(json_rows));
            Ok(Report::csv_first(Value::Object(m), table))
        }
    }
}

fn constants(cli: &Cli, s0: f64, besicovitch: Option<f64>, iso_constant: Option<f64>) -> Result<Report> {
    let (n, s, a) = (cli.n, cli.s, cli.alpha);
    let mut inputs = LedgerInputs::defaults(n);
    if let Some(b) = besicovitch {
        inputs.besicovitch = b;
    }
    if let Some(c) = iso_constant {
        inputs.iso_constant = c;
    }
    let l = constants_ledger_with(n, s, a, inputs)?;
    let u = uniformity(n, a, s0)?;
    let mut m = head("constants", n, s, a);
    m.insert(
        "inputs".into(),
        json!({ "besicovitch": num(inputs.besicovitch), "iso_constant": num(inputs.iso_constant), "lambda_margin": num(inputs.lambda_margin) }),
    );
    m.insert("lambda".into(), num(l.lambda));
    let named = l.named();
    let consts: Map<String, Value> = named.iter().map(|(k, v)| (k.to_string(), num(*v))).collect();
    m.insert("constants".into(), Value::Object(consts));
    m.insert(
        "uniformity".into(),
        json!({
            "s_grid": u.s_grid.iter().map(|v| num(*v)).collect::<Vec<_>>(),
            "inf_chi1": num(u.inf_chi1),
            "inf_inv_chi2": num(u.inf_inv_chi2),
            "sup_c1_plus_c2": num(u.sup_c1_plus_c2),
            "argsup_c1_plus_c2": num(u.argsup_c1_plus_c2),
            "inf_eps1": num(u.inf_eps1),
            "sup_lambda0_plus_c4": num(u.sup_lambda0_plus_c4),
        }),
    );
    let mut pairs: Vec<(&str, f64)> = vec![("Lambda", l.lambda)];
    pairs.extend(named.iter().cloned());
    Ok(Report::json_first(Value::Object(m), Table::quantities(&pairs)))
}
