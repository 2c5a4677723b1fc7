//! Randomized cross-check suite behind `heatrate validate`.
//!
//! The generators here produce parameter sets lying exactly on one catalog
//! row each: equality constraints are solved for, inequality ranges are
//! drawn from. That lets the suite probe every regime, including the
//! measure-zero ones (a pinned `lambda` or `nu`) that an unconstrained
//! random draw would never hit.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use heatrate::consistency::{
    alpha1_window, item_dynamically_admissible, mu_window_det123, mu_window_item3,
    mu_window_item8, mu_window_q_grad, mu_window_qdot_grad,
};
use heatrate::tol::{PSD_REL_TOL, RH_MARGINAL_BAND, ROOT_RESIDUAL_REL};
use heatrate::{
    build_a, classify, coeffs_for_item, fd_reference, mode_roots, routh_hurwitz, simulate,
    stability_conditions, Boundary, CubicCoeffs, Domain1D, InitialData, MaterialParams, McvParams,
    ModelKind, QuadForm4, StabilityStatus,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Result of one named check: a verdict plus a one-line summary for the
/// report. `detail` quotes the first few failures when there are any.
#[derive(Clone, Debug, serde::Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

/// One generated point of a catalog row, together with the
/// free-coefficient choices its recipe was built with (`None` means the
/// documented defaults).
#[derive(Clone, Debug)]
pub struct ItemSample {
    pub params: MaterialParams,
    pub free: Option<Vec<f64>>,
}

fn signed(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let m = rng.gen_range(lo..hi);
    if rng.gen::<bool>() {
        m
    } else {
        -m
    }
}

fn blank(rng: &mut ChaCha8Rng) -> MaterialParams {
    MaterialParams {
        lambda: 0.0,
        tau: 0.0,
        mu: 0.0,
        nu: 0.0,
        kappa: 0.0,
        rho_cv: rng.gen_range(0.5..2.0),
        theta_ref: rng.gen_range(0.5..4.0),
    }
}

/// `n` seeded points on catalog row `item`. Rows 1-9 points satisfy the
/// row's own gate (rows 3, 8 and 9 draw `mu` strictly inside the
/// admissibility windows); rows 10-16 points land in the row's parameter
/// family, where matches can only be coefficient-conditional.
pub fn sample_item_points(item: u8, n: usize, seed: u64) -> Vec<ItemSample> {
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed ^ (item as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut out = Vec::with_capacity(n);
    let mut tries = 0usize;
    while out.len() < n {
        tries += 1;
        assert!(tries < n * 500 + 5000, "row {item} generator stalled");
        if let Some(s) = try_sample(item, &mut rng) {
            out.push(s);
        }
    }
    out
}

fn try_sample(item: u8, rng: &mut ChaCha8Rng) -> Option<ItemSample> {
    let mut p = blank(rng);
    match item {
        1 => {
            let c = rng.gen_range(0.1..3.0);
            p.lambda = signed(rng, 0.1, 2.0);
            p.tau = signed(rng, 0.1, 2.0);
            p.mu = c;
            p.nu = c;
            p.kappa = c;
        }
        2 => {
            let c = rng.gen_range(0.1..3.0);
            p.kappa = c;
            p.mu = c;
            p.nu = if rng.gen_ratio(1, 6) {
                0.0
            } else {
                rng.gen_range(0.0..3.0)
            };
            if (p.nu - c).abs() < 0.05 {
                return None;
            }
            p.lambda = signed(rng, 0.1, 2.0);
            p.tau = signed(rng, 0.1, 2.0);
        }
        3 => {
            p.lambda = signed(rng, 0.1, 2.0);
            p.kappa = rng.gen_range(0.1..3.0);
            p.nu = p.kappa + p.lambda.signum() * rng.gen_range(0.05..2.0);
            p.tau = signed(rng, 0.1, 1.5);
            let w = mu_window_item3(&p)?;
            if w.hi - w.lo < 1e-6 {
                return None;
            }
            p.mu = w.lo + rng.gen_range(0.1..0.9) * (w.hi - w.lo);
            if p.mu <= 0.0 {
                return None;
            }
        }
        4 => {
            p.kappa = rng.gen_range(0.1..3.0);
            p.tau = signed(rng, 0.2, 2.0);
            p.lambda = signed(rng, 0.1, 2.0);
            p.nu = p.kappa * (p.lambda + p.tau * p.tau) / (p.tau * p.tau);
        }
        5 => {
            p.kappa = rng.gen_range(0.1..3.0);
            if rng.gen_ratio(1, 7) {
                // tau = 0 corner: the cap collapses to zero, so lambda < 0.
                p.tau = 0.0;
                p.nu = signed(rng, 0.1, 2.0);
                p.lambda = -rng.gen_range(0.05..1.5);
            } else {
                p.tau = signed(rng, 0.2, 2.0);
                p.nu = signed(rng, 0.1, 2.0);
                let cap = p.tau * p.tau * p.nu / p.kappa;
                p.lambda = cap - rng.gen_range(0.05..1.5);
            }
            if p.lambda.abs() < 1e-3 {
                return None;
            }
            let pinned = -p.nu * (p.nu - p.kappa) * p.tau * p.tau / (p.kappa * p.kappa);
            if (p.lambda - pinned).abs() < 1e-3 * 1.0f64.max(pinned.abs()) {
                return None;
            }
        }
        6 | 7 => {
            p.tau = signed(rng, 0.2, 2.0);
            p.kappa = rng.gen_range(0.1..3.0);
            // (nu - kappa) tau > 0 on row 6, < 0 on row 7.
            let gap = if item == 6 {
                p.tau.signum() * rng.gen_range(0.05..2.0)
            } else {
                -p.tau.signum() * rng.gen_range(0.05..p.kappa + 2.0)
            };
            p.nu = p.kappa + gap;
            if p.nu.abs() < 0.02 || (p.nu - p.kappa).abs() < 0.02 {
                return None;
            }
            p.lambda = -p.nu * (p.nu - p.kappa) * p.tau * p.tau / (p.kappa * p.kappa);
        }
        8 => {
            p.lambda = signed(rng, 0.1, 2.0);
            p.kappa = rng.gen_range(0.1..3.0);
            p.nu = if p.lambda > 0.0 {
                p.kappa * rng.gen_range(0.05..0.95)
            } else if rng.gen::<bool>() {
                -rng.gen_range(0.05..2.0)
            } else {
                p.kappa + rng.gen_range(0.05..2.0)
            };
            p.tau = signed(rng, 0.1, 1.5);
            let w = mu_window_item8(&p)?;
            if w.hi - w.lo < 1e-6 {
                return None;
            }
            p.mu = w.lo + rng.gen_range(0.1..0.9) * (w.hi - w.lo);
            if p.mu <= 0.0 {
                return None;
            }
        }
        9 => {
            p.lambda = signed(rng, 0.1, 2.0);
            p.tau = signed(rng, 0.2, 2.0);
            p.nu = signed(rng, 0.1, 2.0);
            p.kappa = rng.gen_range(0.1..3.0);
            let beta1 = p.lambda.signum() * rng.gen_range(0.2..2.0);
            // tau*alpha2 = lambda*(beta1 + u) keeps
            // lambda*(tau*alpha2 - lambda*beta1) = lambda^2 u >= 0.
            let u = rng.gen_range(0.05..2.0) * beta1.abs();
            let alpha2 = p.lambda * (beta1 + u) / p.tau;
            let a1w = alpha1_window(p.lambda, p.tau, beta1, alpha2)?;
            if a1w.hi - a1w.lo < 1e-9 {
                return None;
            }
            let alpha1 = a1w.lo + rng.gen_range(0.15..0.85) * (a1w.hi - a1w.lo);
            let w = mu_window_q_grad(&p, beta1, alpha2)?
                .intersect(&mu_window_qdot_grad(&p, beta1, alpha2, alpha1)?)?
                .intersect(&mu_window_det123(&p, beta1, alpha2, alpha1)?)?;
            let lo = w.lo.max(0.0);
            if w.hi - lo < 1e-9 {
                return None;
            }
            p.mu = lo + rng.gen_range(0.1..0.9) * (w.hi - lo);
            if p.mu <= 0.0 {
                return None;
            }
            let free = vec![beta1, alpha2, alpha1];
            // The kappa floor depends on all three choices at once; building
            // the recipe is the authoritative test.
            coeffs_for_item(9, &p, Some(&free)).ok()?;
            return Some(ItemSample {
                params: p,
                free: Some(free),
            });
        }
        10 => {
            p.lambda = -rng.gen_range(0.1..2.0);
            p.tau = 0.0;
            p.kappa = rng.gen_range(0.1..3.0);
            p.mu = rng.gen_range(0.1..3.0);
            p.nu = signed(rng, 0.1, 2.0);
        }
        11 | 12 => {
            p.lambda = signed(rng, 0.1, 2.0);
            p.tau = signed(rng, 0.1, 2.0);
            p.kappa = rng.gen_range(0.1..3.0);
            p.mu = rng.gen_range(0.1..3.0);
            p.nu = signed(rng, 0.1, 2.0);
        }
        13 | 15 => {
            p.lambda = -rng.gen_range(0.05..2.0);
            p.tau = signed(rng, 0.1, 2.0);
            p.kappa = rng.gen_range(0.1..3.0);
            p.mu = rng.gen_range(0.1..3.0);
            p.nu = signed(rng, 0.1, 2.0);
        }
        14 | 16 => {
            p.tau = signed(rng, 0.1, 2.0);
            let q = p.tau * p.tau / 4.0;
            p.lambda = if item == 16 {
                -q
            } else {
                -q - rng.gen_range(0.05..2.0)
            };
            p.kappa = rng.gen_range(0.1..3.0);
            p.mu = rng.gen_range(0.1..3.0);
            p.nu = signed(rng, 0.1, 2.0);
        }
        _ => panic!("catalog rows are 1-16, got {item}"),
    }
    Some(ItemSample {
        params: p,
        free: None,
    })
}

/// Catalog rows whose gates pin `mu = 0`.
pub const MU_ZERO_ROWS: [u8; 4] = [4, 5, 6, 7];

/// Items that both classify unconditionally and pass the all-modes damping
/// conditions somewhere on their row, split by the `mu` sign the row pins,
/// next to the per-row admissibility flags they are expected to match.
#[derive(Clone, Debug, serde::Serialize)]
pub struct IntersectionReport {
    pub mu_positive: Vec<u8>,
    pub mu_zero: Vec<u8>,
    pub expected_mu_positive: Vec<u8>,
    pub expected_mu_zero: Vec<u8>,
    pub samples_per_item: usize,
    pub pass: bool,
}

/// Computes the classifier/stability intersection by existential sampling:
/// a row enters iff some generated point on it classifies unconditionally
/// and passes [`stability_conditions`]. Coefficient-conditional matches
/// never enter (their consistency is not decided by the parameters alone).
pub fn admissibility_intersection(samples_per_item: usize, seed: u64) -> IntersectionReport {
    let mut pos = BTreeSet::new();
    let mut zero = BTreeSet::new();
    for item in 1..=16u8 {
        for s in sample_item_points(item, samples_per_item, seed) {
            let Ok(cls) = classify(&s.params) else {
                continue;
            };
            if !stability_conditions(&s.params).pass {
                continue;
            }
            for m in cls.matched.iter().filter(|m| !m.conditional) {
                if s.params.mu == 0.0 {
                    zero.insert(m.item);
                } else if s.params.mu > 0.0 {
                    pos.insert(m.item);
                }
            }
        }
    }
    let expected_mu_zero: Vec<u8> = MU_ZERO_ROWS
        .iter()
        .copied()
        .filter(|&i| item_dynamically_admissible(i))
        .collect();
    let expected_mu_positive: Vec<u8> = (1..=16u8)
        .filter(|i| !MU_ZERO_ROWS.contains(i))
        .filter(|&i| item_dynamically_admissible(i))
        .collect();
    let mu_positive: Vec<u8> = pos.into_iter().collect();
    let mu_zero: Vec<u8> = zero.into_iter().collect();
    let pass = mu_positive == expected_mu_positive && mu_zero == expected_mu_zero;
    IntersectionReport {
        mu_positive,
        mu_zero,
        expected_mu_positive,
        expected_mu_zero,
        samples_per_item,
        pass,
    }
}

fn summarize(name: &'static str, failures: Vec<String>, ok_detail: String) -> CheckOutcome {
    if failures.is_empty() {
        CheckOutcome {
            name,
            pass: true,
            detail: ok_detail,
        }
    } else {
        let shown = failures.iter().take(3).cloned().collect::<Vec<_>>().join("; ");
        CheckOutcome {
            name,
            pass: false,
            detail: format!("{} failure(s), first: {}", failures.len(), shown),
        }
    }
}

/// Classifier soundness against the constructive recipes and the numeric
/// feasibility search: row points must classify as their row and carry a
/// PSD recipe; negative-mu points must come back infeasible with a failed
/// search. `fault` deliberately corrupts one assembled form (a hook the
/// test suite uses to prove the check has teeth).
pub fn check_classifier_vs_search(samples: usize, seed: u64, fault: bool) -> CheckOutcome {
    let mut failures = Vec::new();
    let mut worst = f64::INFINITY;
    for item in 1..=9u8 {
        for (k, s) in sample_item_points(item, samples, seed).into_iter().enumerate() {
            let p = s.params;
            match classify(&p) {
                Ok(cls) if cls.matched_items().contains(&item) => {}
                Ok(cls) => {
                    failures.push(format!(
                        "row {item} sample {k}: classified as {:?}",
                        cls.matched_items()
                    ));
                    continue;
                }
                Err(e) => {
                    failures.push(format!("row {item} sample {k}: {e}"));
                    continue;
                }
            }
            let coeffs = match coeffs_for_item(item, &p, s.free.as_deref()) {
                Ok(c) => c,
                Err(e) => {
                    failures.push(format!("row {item} sample {k}: no recipe: {e}"));
                    continue;
                }
            };
            let mut a = build_a(&p, &coeffs).expect("row points have lambda != 0");
            if fault && item == 1 && k == 0 {
                // A negative diagonal entry defeats every PSD test.
                let mut m = a.to_matrix();
                m[0][0] = -(m[0][0].abs() + 0.5);
                a = QuadForm4::from_matrix(m);
            }
            let normalized = a.min_eigenvalue() / 1.0f64.max(a.frobenius_norm());
            worst = worst.min(normalized);
            if normalized < -PSD_REL_TOL || !a.is_psd(PSD_REL_TOL) {
                failures.push(format!(
                    "row {item} sample {k}: recipe form not PSD (normalized min eigenvalue {normalized:.3e})"
                ));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6665_6173);
    for k in 0..samples {
        let p = MaterialParams {
            lambda: signed(&mut rng, 0.1, 2.0),
            tau: signed(&mut rng, 0.1, 2.0),
            mu: -rng.gen_range(0.05..3.0),
            nu: signed(&mut rng, 0.1, 2.0),
            kappa: signed(&mut rng, 0.1, 3.0),
            rho_cv: 1.0,
            theta_ref: rng.gen_range(0.5..4.0),
        };
        match classify(&p) {
            Ok(cls) => {
                if !cls.infeasible {
                    failures.push(format!(
                        "negative-mu sample {k}: unexpectedly matched {:?}",
                        cls.matched_items()
                    ));
                } else if cls.search.as_ref().is_some_and(|s| s.coeffs.is_some()) {
                    failures.push(format!("negative-mu sample {k}: search claimed feasibility"));
                }
            }
            Err(e) => failures.push(format!("negative-mu sample {k}: {e}")),
        }
    }
    summarize(
        "classifier_vs_search",
        failures,
        format!(
            "{} row points and {samples} negative-mu draws; worst normalized recipe eigenvalue {worst:.2e}",
            9 * samples
        ),
    )
}

/// Sign-condition verdicts against computed roots on random cubics, with
/// per-root residual bounds. Draws inside the marginal band (either in the
/// coefficients or in a root's real part) are skipped, everything else
/// must agree exactly.
pub fn check_verdicts_vs_roots(count: usize, seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut tested = 0usize;
    let mut skipped = 0usize;
    for k in 0..count {
        let c = CubicCoeffs::new(
            signed(&mut rng, 0.3, 2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        );
        let roots = match mode_roots(c) {
            Ok(r) => r,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        for w in &roots {
            let m = 1.0f64.max(w.norm());
            let r = c.eval(*w).norm();
            if r > ROOT_RESIDUAL_REL * c.scale() * m * m * m {
                failures.push(format!("cubic {k}: root residual {r:.3e}"));
            }
        }
        let s = c.scale();
        let coeff_marginal = [c.c3, c.c2, c.c1, c.c0]
            .iter()
            .any(|v| v.abs() <= 10.0 * RH_MARGINAL_BAND * s)
            || c.hurwitz_product().abs() <= 10.0 * RH_MARGINAL_BAND * s * s;
        let root_marginal = roots
            .iter()
            .any(|w| w.re.abs() <= 10.0 * RH_MARGINAL_BAND * 1.0f64.max(w.norm()));
        if coeff_marginal || root_marginal {
            skipped += 1;
            continue;
        }
        tested += 1;
        let expect = if roots.iter().any(|w| w.re > 0.0) {
            StabilityStatus::Unstable
        } else {
            StabilityStatus::Stable
        };
        let verdict = routh_hurwitz(c).expect("leading coefficient is nonzero");
        if verdict.status != expect {
            failures.push(format!(
                "cubic {k}: criterion says {}, roots say {}",
                verdict.status, expect
            ));
        }
    }
    if tested < count / 2 {
        failures.push(format!("only {tested} of {count} draws were decidable"));
    }
    summarize(
        "verdicts_vs_roots",
        failures,
        format!("{tested} cubics agree ({skipped} inside the marginal band skipped)"),
    )
}

/// Modal synthesis against the finite-difference reference on a stiff and
/// a non-stiff model.
pub fn check_spectral_vs_fd() -> CheckOutcome {
    let cases: [ModelKind; 2] = [
        ModelKind::Lso(MaterialParams {
            lambda: 0.5,
            tau: 1.0,
            mu: 1.0,
            nu: 1.0,
            kappa: 0.5,
            rho_cv: 1.0,
            theta_ref: 300.0,
        }),
        ModelKind::Mcv(McvParams {
            tau: 0.5,
            kappa: 1.0,
        }),
    ];
    let d = Domain1D::new(PI, Boundary::Dirichlet { theta_env: 0.0 }).expect("valid domain");
    let grid: Vec<f64> = (0..=256).map(|j| PI * j as f64 / 256.0).collect();
    let theta0: Vec<f64> = grid.iter().map(|&x| x.sin() + 0.25 * (2.0 * x).sin()).collect();
    let ic = InitialData {
        grid: grid.clone(),
        theta0,
        q0: vec![0.0; grid.len()],
        qdot0: Some(vec![0.0; grid.len()]),
    };
    let times = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5];
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for model in &cases {
        let spectral = simulate(model, &d, &ic, &times, 64, false);
        let fd = fd_reference(model, &d, &ic, &times, 256);
        match (spectral, fd) {
            (Ok(a), Ok(b)) => {
                let mut num = 0.0;
                let mut den = 0.0;
                for (ra, rb) in a.values.iter().zip(&b.values) {
                    for (va, vb) in ra.iter().zip(rb) {
                        num += (va - vb) * (va - vb);
                        den += va * va;
                    }
                }
                let rel = (num / den).sqrt();
                worst = worst.max(rel);
                if rel >= 1e-4 {
                    failures.push(format!("{}: relative L2 distance {rel:.3e}", model.name()));
                }
            }
            (Err(e), _) | (_, Err(e)) => failures.push(format!("{}: {e}", model.name())),
        }
    }
    summarize(
        "spectral_vs_fd",
        failures,
        format!("2 models, worst relative L2 distance {worst:.2e}"),
    )
}

/// The sampled classifier/stability intersection must reproduce the
/// per-row admissibility flags.
pub fn check_admissibility_intersection(samples: usize, seed: u64) -> CheckOutcome {
    let r = admissibility_intersection(samples, seed);
    CheckOutcome {
        name: "admissibility_intersection",
        pass: r.pass,
        detail: format!(
            "mu>0 rows {:?} (flags say {:?}); mu=0 rows {:?} (flags say {:?})",
            r.mu_positive, r.expected_mu_positive, r.mu_zero, r.expected_mu_zero
        ),
    }
}

/// The full suite in report order.
pub fn run_validate_suite(seed: u64, fault: bool) -> Vec<CheckOutcome> {
    vec![
        check_classifier_vs_search(24, seed, fault),
        check_verdicts_vs_roots(2000, seed.wrapping_add(1)),
        check_spectral_vs_fd(),
        check_admissibility_intersection(48, seed.wrapping_add(2)),
    ]
}
