//! The six `heatrate` subcommands. Each returns the process exit code or
//! a [`Failure`] carrying one.
//!
//! All spatial commands run on the canonical domain: length pi with
//! homogeneous Dirichlet data (environment temperature 0), so the mode
//! weights are Lambda_n = n^2.

use std::f64::consts::PI;

use heatrate::tol::RH_MARGINAL_BAND;
use heatrate::{
    build_a, classification_report, classify, eigen_modes, mode_roots, model_characteristic,
    mu_admissibility, routh_hurwitz, sig17, simulate, stability_conditions, Boundary,
    ClassificationReport, ConsistencyStatus, ConsistencyVerdict, CubicCoeffs, Domain1D, Error,
    InitialData, MaterialParams, ModelKind, MuRegion, ParameterVerdict, StabilityStatus,
};
use num_complex::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::{
    check, csv_line, load_model, require_lso, thread_pool, to_json, write_csv, write_out,
    CmdResult, Failure, RunConfig, EXIT_CHECK_FAILED, EXIT_INFEASIBLE, EXIT_OK,
};

fn canonical_domain() -> Domain1D {
    Domain1D::new(PI, Boundary::Dirichlet { theta_env: 0.0 }).expect("pi is a valid length")
}

#[derive(Serialize)]
struct PsdEntry {
    item: u8,
    psd: bool,
    min_eigenvalue: f64,
    frobenius_norm: f64,
}

#[derive(Serialize)]
struct ConsistencyDoc<'a> {
    model: &'a ModelKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    classification: Option<ClassificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    psd: Option<Vec<PsdEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    parameter_consistency: Option<ConsistencyVerdict>,
}

/// Classifies the model parameters and verifies any constructive recipes.
pub fn cmd_consistency(cfg: &RunConfig) -> CmdResult {
    let model = load_model(cfg)?;
    let doc;
    let exit;
    match &model {
        ModelKind::Lso(p) => {
            let cls = match classify(p) {
                Ok(c) => c,
                Err(e @ Error::ExcludedDegenerate { .. }) => {
                    let hint = match model.reduce() {
                        Ok(r) => format!("; the model reduces to \"{}\", run that instead", r.name()),
                        Err(_) => String::new(),
                    };
                    return Err(Failure::config(format!("{e}{hint}")));
                }
                Err(e) => return Err(Failure::config(e.to_string())),
            };
            let psd: Vec<PsdEntry> = cls
                .matched
                .iter()
                .filter_map(|m| {
                    m.recipe.as_ref().map(|r| {
                        let a = build_a(p, &r.coeffs).expect("classified params have lambda != 0");
                        PsdEntry {
                            item: m.item,
                            psd: a.is_psd_default(),
                            min_eigenvalue: a.min_eigenvalue(),
                            frobenius_norm: a.frobenius_norm(),
                        }
                    })
                })
                .collect();
            exit = if cls.infeasible { EXIT_INFEASIBLE } else { EXIT_OK };
            doc = ConsistencyDoc {
                model: &model,
                classification: Some(classification_report(&cls)),
                psd: Some(psd),
                parameter_consistency: None,
            };
        }
        other => {
            let verdict = other.check_parameter_consistency();
            exit = if verdict.status == ConsistencyStatus::Inconsistent {
                EXIT_INFEASIBLE
            } else {
                EXIT_OK
            };
            doc = ConsistencyDoc {
                model: &model,
                classification: None,
                psd: None,
                parameter_consistency: Some(verdict),
            };
        }
    }
    let json = to_json(&doc);
    print!("{json}");
    write_out(cfg, "consistency.json", &json)?;
    if exit == EXIT_INFEASIBLE {
        eprintln!("infeasible: no admissible potential exists for these parameters");
    }
    Ok(exit)
}

#[derive(Serialize)]
struct ModeRow {
    n: usize,
    lambda: f64,
    verdict: StabilityStatus,
    /// Largest real part over the mode's characteristic roots; `None`
    /// when the characteristic polynomial is constant.
    max_re_root: Option<f64>,
    /// Root pairs `[re, im]`, sorted by descending real part.
    roots: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct StabilityDoc<'a> {
    model: &'a ModelKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    parameter_verdict: Option<ParameterVerdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu_region: Option<MuRegion>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mu_region_error: Option<String>,
    modes: Vec<ModeRow>,
}

fn sort_roots(roots: &mut [Complex<f64>]) {
    roots.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
}

/// Grades one mode of `model`: verdict plus its characteristic roots.
fn grade_mode(model: &ModelKind, n: usize, lambda: f64) -> Result<ModeRow, Failure> {
    let coeffs = model_characteristic(model, lambda);
    let mut roots: Vec<Complex<f64>> = Vec::new();
    let verdict;
    if coeffs.len() == 4 {
        let c = CubicCoeffs::new(coeffs[0], coeffs[1], coeffs[2], coeffs[3]);
        verdict = routh_hurwitz(c)
            .map_err(|e| Failure::config(format!("mode {n}: {e}")))?
            .status;
        roots = mode_roots(c)
            .map_err(|e| Failure::config(format!("mode {n}: {e}")))?
            .to_vec();
    } else if coeffs.len() >= 2 {
        roots = heatrate::roots::solve_poly(&coeffs)
            .map_err(|e| Failure::config(format!("mode {n}: {e}")))?;
        sort_roots(&mut roots);
        let band = |w: &Complex<f64>| RH_MARGINAL_BAND * 1.0f64.max(w.norm());
        verdict = if roots.iter().any(|w| w.re > band(w)) {
            StabilityStatus::Unstable
        } else if roots.iter().any(|w| w.re.abs() <= band(w)) {
            StabilityStatus::Marginal
        } else {
            StabilityStatus::Stable
        };
    } else {
        // Constant characteristic: no dynamics left in this mode.
        verdict = StabilityStatus::Stable;
    }
    let max_re_root = roots
        .iter()
        .map(|w| w.re)
        .fold(None, |acc: Option<f64>, re| {
            Some(acc.map_or(re, |a| a.max(re)))
        });
    Ok(ModeRow {
        n,
        lambda,
        verdict,
        max_re_root,
        roots: roots.iter().map(|w| [w.re, w.im]).collect(),
    })
}

/// Per-mode damping verdicts plus, for the second-order law, the
/// parameter-level conditions and the admissible `mu` region.
pub fn cmd_stability(cfg: &RunConfig) -> CmdResult {
    let model = load_model(cfg)?;
    if cfg.modes == 0 {
        return Err(Failure::config("--modes must be at least 1"));
    }
    let d = canonical_domain();
    let mut rows = Vec::with_capacity(cfg.modes);
    for m in eigen_modes(&d, cfg.modes) {
        rows.push(grade_mode(&model, m.n, m.lambda)?);
    }
    let mut parameter_verdict = None;
    let mut mu_region = None;
    let mut mu_region_error = None;
    if let ModelKind::Lso(p) = &model {
        parameter_verdict = Some(stability_conditions(p));
        match mu_admissibility(p.lambda, p.tau, p.nu, p.kappa) {
            Ok(r) => mu_region = Some(r),
            Err(e) => mu_region_error = Some(e.to_string()),
        }
    }
    let any_unstable = rows.iter().any(|r| r.verdict == StabilityStatus::Unstable);
    let regime_failed = mu_region_error.is_some();
    let mut csv = vec![csv_line(&["n", "Lambda", "verdict", "max_re_root"])];
    for r in &rows {
        csv.push(csv_line(&[
            r.n.to_string(),
            sig17(r.lambda),
            r.verdict.to_string(),
            r.max_re_root.map(sig17).unwrap_or_default(),
        ]));
    }
    let doc = StabilityDoc {
        model: &model,
        parameter_verdict,
        mu_region,
        mu_region_error,
        modes: rows,
    };
    let json = to_json(&doc);
    print!("{json}");
    write_out(cfg, "stability.json", &json)?;
    write_csv(cfg, "stability_modes.csv", &csv)?;
    if regime_failed {
        eprintln!("infeasible: the parameter regime fails a sign condition (see parameter_verdict)");
        return Ok(EXIT_INFEASIBLE);
    }
    if any_unstable {
        eprintln!("unstable: at least one mode has a growing root");
        return Ok(EXIT_INFEASIBLE);
    }
    Ok(EXIT_OK)
}

/// Characteristic-root table for the first N modes, as plot-ready CSV.
pub fn cmd_roots(cfg: &RunConfig) -> CmdResult {
    let model = load_model(cfg)?;
    if cfg.modes == 0 {
        return Err(Failure::config("--modes must be at least 1"));
    }
    let d = canonical_domain();
    let mut csv = vec![csv_line(&[
        "n", "Lambda", "re_w1", "im_w1", "re_w2", "im_w2", "re_w3", "im_w3",
    ])];
    for m in eigen_modes(&d, cfg.modes) {
        let coeffs = model_characteristic(&model, m.lambda);
        let mut roots = if coeffs.len() >= 2 {
            heatrate::roots::solve_poly(&coeffs)
                .map_err(|e| Failure::config(format!("mode {}: {e}", m.n)))?
        } else {
            Vec::new()
        };
        sort_roots(&mut roots);
        let mut fields = vec![m.n.to_string(), sig17(m.lambda)];
        for k in 0..3 {
            match roots.get(k) {
                Some(w) => {
                    fields.push(sig17(w.re));
                    fields.push(sig17(w.im));
                }
                None => {
                    fields.push(String::new());
                    fields.push(String::new());
                }
            }
        }
        csv.push(csv_line(&fields));
    }
    let mut body = csv.join("\n");
    body.push('\n');
    print!("{body}");
    write_out(cfg, "roots.csv", &body)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SimulateDoc<'a> {
    model: &'a ModelKind,
    modes: usize,
    grid: usize,
    horizon: f64,
    times: usize,
    truncation_tail: f64,
    csv: &'static str,
}

/// Evolves a unit sine initial profile on the canonical domain and writes
/// the sampled field.
pub fn cmd_simulate(cfg: &RunConfig) -> CmdResult {
    let model = load_model(cfg)?;
    if cfg.horizon <= 0.0 || !cfg.horizon.is_finite() {
        return Err(Failure::config("--horizon must be positive"));
    }
    if cfg.modes == 0 {
        return Err(Failure::config("--modes must be at least 1"));
    }
    if cfg.grid < 2 * cfg.modes {
        return Err(Failure::config(format!(
            "--grid {} is too coarse to resolve {} modes (need at least {})",
            cfg.grid,
            cfg.modes,
            2 * cfg.modes
        )));
    }
    let d = canonical_domain();
    let grid: Vec<f64> = (0..=cfg.grid)
        .map(|j| PI * j as f64 / cfg.grid as f64)
        .collect();
    let theta0: Vec<f64> = grid.iter().map(|x| x.sin()).collect();
    let ic = InitialData {
        grid,
        theta0,
        q0: vec![0.0; cfg.grid + 1],
        qdot0: Some(vec![0.0; cfg.grid + 1]),
    };
    let times: Vec<f64> = (0..17).map(|i| cfg.horizon * i as f64 / 16.0).collect();
    let field = simulate(&model, &d, &ic, &times, cfg.modes, false).map_err(|e| match e {
        Error::UnstableParameters { .. } => Failure::infeasible(e.to_string()),
        other => Failure::config(other.to_string()),
    })?;
    let mut csv = vec![csv_line(&["t", "X", "theta"])];
    for (k, t) in field.times.iter().enumerate() {
        for (j, x) in field.grid.iter().enumerate() {
            csv.push(csv_line(&[sig17(*t), sig17(*x), sig17(field.values[k][j])]));
        }
    }
    write_csv(cfg, "field.csv", &csv)?;
    let doc = SimulateDoc {
        model: &model,
        modes: cfg.modes,
        grid: cfg.grid,
        horizon: cfg.horizon,
        times: field.times.len(),
        truncation_tail: field.truncation_tail,
        csv: "field.csv",
    };
    print!("{}", to_json(&doc));
    Ok(EXIT_OK)
}

fn set_param(p: &mut MaterialParams, name: &str, value: f64) -> Result<(), Failure> {
    match name {
        "lambda" => p.lambda = value,
        "tau" => p.tau = value,
        "mu" => p.mu = value,
        "nu" => p.nu = value,
        "kappa" => p.kappa = value,
        other => {
            return Err(Failure::config(format!(
                "unknown sweep parameter `{other}` (valid: lambda, tau, mu, nu, kappa)"
            )))
        }
    }
    Ok(())
}

/// One sweep grid point rendered as CSV fields (classification columns are
/// empty where the classifier does not apply, e.g. lambda = 0).
fn sweep_point(base: &MaterialParams, axes: &[(String, f64)]) -> Vec<String> {
    let mut p = *base;
    for (name, v) in axes {
        set_param(&mut p, name, *v).expect("axis names validated before dispatch");
    }
    let mut fields: Vec<String> = axes.iter().map(|(_, v)| sig17(*v)).collect();
    match classify(&p) {
        Ok(cls) => {
            let items: Vec<String> = cls
                .matched
                .iter()
                .filter(|m| !m.conditional)
                .map(|m| m.item.to_string())
                .collect();
            let conditional: Vec<String> = cls
                .matched
                .iter()
                .filter(|m| m.conditional)
                .map(|m| m.item.to_string())
                .collect();
            fields.push(items.join(";"));
            fields.push(conditional.join(";"));
            fields.push(cls.infeasible.to_string());
        }
        Err(_) => {
            fields.push(String::new());
            fields.push(String::new());
            fields.push(String::new());
        }
    }
    let verdict = stability_conditions(&p);
    fields.push(verdict.pass.to_string());
    fields.push(verdict.regime.to_string());
    match mu_admissibility(p.lambda, p.tau, p.nu, p.kappa) {
        Ok(r) => {
            fields.push(sig17(r.lo));
            fields.push(sig17(r.hi));
        }
        Err(_) => {
            fields.push(String::new());
            fields.push(String::new());
        }
    }
    fields
}

/// Maps classification and stability over a one- or two-axis parameter
/// grid of the second-order law.
pub fn cmd_sweep(cfg: &RunConfig) -> CmdResult {
    let model = load_model(cfg)?;
    let base = require_lso(&model)?;
    if cfg.sweep.is_empty() || cfg.sweep.len() > 2 {
        return Err(Failure::config(format!(
            "sweep needs one or two --sweep axes, got {}",
            cfg.sweep.len()
        )));
    }
    for axis in &cfg.sweep {
        let mut probe = base;
        set_param(&mut probe, &axis.name, axis.min)?;
    }
    let header: Vec<String> = cfg
        .sweep
        .iter()
        .map(|a| a.name.clone())
        .chain(
            ["items", "conditional", "infeasible", "stable", "regime", "mu_lo", "mu_hi"]
                .iter()
                .map(|s| s.to_string()),
        )
        .collect();
    // Row-major over the axes: the first axis is the outer loop.
    let points: Vec<Vec<(String, f64)>> = match cfg.sweep.len() {
        1 => cfg.sweep[0]
            .values()
            .into_iter()
            .map(|v| vec![(cfg.sweep[0].name.clone(), v)])
            .collect(),
        _ => {
            let outer = cfg.sweep[0].values();
            let inner = cfg.sweep[1].values();
            outer
                .into_iter()
                .flat_map(|a| {
                    inner.iter().map(move |&b| {
                        vec![
                            (cfg.sweep[0].name.clone(), a),
                            (cfg.sweep[1].name.clone(), b),
                        ]
                    })
                })
                .collect()
        }
    };
    let pool = thread_pool()?;
    let rows: Vec<Vec<String>> =
        pool.install(|| points.par_iter().map(|axes| sweep_point(&base, axes)).collect());
    let mut csv = vec![csv_line(&header)];
    csv.extend(rows.iter().map(|r| csv_line(r)));
    let mut body = csv.join("\n");
    body.push('\n');
    print!("{body}");
    write_out(cfg, "sweep.csv", &body)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ValidateDoc {
    seed: u64,
    fault: bool,
    pass: bool,
    checks: Vec<check::CheckOutcome>,
}

/// Runs the randomized cross-check suite and reports pass/fail per check.
pub fn cmd_validate(cfg: &RunConfig) -> CmdResult {
    let checks = check::run_validate_suite(cfg.seed, cfg.fault);
    for c in &checks {
        let tag = if c.pass { "pass" } else { "FAIL" };
        println!("check {}: {} ({})", c.name, tag, c.detail);
    }
    let pass = checks.iter().all(|c| c.pass);
    let doc = ValidateDoc {
        seed: cfg.seed,
        fault: cfg.fault,
        pass,
        checks,
    };
    write_out(cfg, "validate.json", &to_json(&doc))?;
    Ok(if pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}
