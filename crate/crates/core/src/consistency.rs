//! Thermodynamic-consistency engine for the second-order flux-rate model.
//!
//! The dissipation of the full model is a quadratic form `x . A x` on
//! `x = (q, q_dot, grad_theta, grad_theta_dot)` whose entries mix the free
//! energy coefficients with the material parameters. Consistency means `A`
//! is positive semidefinite for some admissible coefficient choice. This
//! module provides:
//!
//! * the constraint map tying the gradient-rate coefficients to `kappa`
//!   ([`apply_constraints`]),
//! * assembly of `A` ([`build_a`]) plus minor/PSD queries,
//! * a closed-form classifier over a 16-entry regime catalog
//!   ([`classify`]): regimes 1-8 are decidable from the material parameters
//!   alone and come with constructive coefficient recipes
//!   ([`coeffs_for_item`]); regimes 9-16 couple the parameter conditions to
//!   the unknown coefficients and are reported as conditional, and
//! * a deterministic derivative-free search ([`feasibility_search`]) used
//!   as a numeric oracle when no regime matches.
//!
//! Throughout, `x` abbreviates `nu - kappa` and `theta` is the reference
//! temperature.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{validate_params, FreeEnergyCoeffs, MaterialParams};
use crate::quadform::QuadForm4;
use crate::scalar::Scalar;
use crate::tol::{CLASSIFY_EQ_REL, SEARCH_ACCEPT_REL};

/// Ties the gradient-rate block of the free energy to `kappa`.
///
/// The entropy inequality is linear in the second gradient rate; killing
/// that term forces `beta4 = kappa*beta1`, `beta5 = kappa*alpha2`,
/// `beta6 = kappa*beta3` and `alpha4 = kappa*beta5`. All other fields pass
/// through unchanged, so the map is idempotent.
pub fn apply_constraints<T: Scalar>(c: &FreeEnergyCoeffs<T>, kappa: T) -> FreeEnergyCoeffs<T> {
    let mut out = c.clone();
    out.beta4 = kappa * c.beta1;
    out.beta5 = kappa * c.alpha2;
    out.beta6 = kappa * c.beta3;
    out.alpha4 = kappa * out.beta5;
    out
}

/// Assembles the dissipation form `A` at the reference temperature.
///
/// Only `alpha1..alpha3` and `beta1..beta3` enter: the gradient-rate block
/// of the free energy has already been eliminated by [`apply_constraints`],
/// so its coefficients cancel out of the reduced inequality.
pub fn build_a<T: Scalar>(
    p: &MaterialParams<T>,
    c: &FreeEnergyCoeffs<T>,
) -> Result<QuadForm4<T>> {
    build_a_at(p, c, p.theta_ref)
}

/// Same as [`build_a`] but at an explicit temperature (the identity checks
/// in the model catalog evaluate the form at the state temperature).
pub fn build_a_at<T: Scalar>(
    p: &MaterialParams<T>,
    c: &FreeEnergyCoeffs<T>,
    theta: T,
) -> Result<QuadForm4<T>> {
    if p.lambda == T::zero() {
        return Err(Error::ZeroLambda);
    }
    let (la, tau, mu, nu, ka) = (p.lambda, p.tau, p.mu, p.nu, p.kappa);
    let two = T::two();
    let a11 = c.beta1 / la;
    let a22 = (tau * c.alpha2 - la * c.beta1) / la;
    let a33 = mu * c.beta3 / la;
    let a44 = tau * nu * ka * c.alpha2 / la - ka * c.beta3;
    let a12 = (c.alpha2 + tau * c.beta1 - la * c.alpha1) / (two * la);
    let a13 = (c.beta1 * mu * theta + c.beta3 * theta - la) / (two * la * theta);
    let a14 = (c.beta1 * nu * tau + ka * c.alpha2 - la * c.beta2) / (two * la);
    let a23 = (mu * c.alpha2 + tau * c.beta3 - la * c.beta2) / (two * la);
    let a24 = (tau * (ka + nu) * c.alpha2 - la * (ka * c.beta1 + c.beta3)) / (two * la);
    let a34 = (ka * mu * c.alpha2 + nu * tau * c.beta3 - la * c.alpha3) / (two * la);
    Ok(QuadForm4::from_upper([
        a11, a12, a13, a14, a22, a23, a24, a33, a34, a44,
    ]))
}

/// All fifteen principal minors of `A`: the four diagonal entries, the six
/// 2x2 minors indexed by the deleted row/column pair in lexicographic
/// order, the four 3x3 minors indexed by the deleted row/column, and the
/// determinant.
pub fn principal_minors<T: Scalar>(a: &QuadForm4<T>) -> Vec<T> {
    a.principal_minors().to_vec()
}

/// Positive semidefiniteness by the principal-minor criterion; each order-k
/// minor must be `>= -tol * max(1, ||A||_F^k)`.
pub fn is_psd<T: Scalar>(a: &QuadForm4<T>, tol: T) -> bool {
    a.is_psd(tol)
}

// ---------------------------------------------------------------------------
// Relative comparisons for the classifier's equality branches.

fn eq_scale<T: Scalar>(a: T, b: T) -> T {
    T::one().max(a.abs()).max(b.abs())
}

fn rel_eq<T: Scalar>(a: T, b: T) -> bool {
    (a - b).abs() <= T::of(CLASSIFY_EQ_REL) * eq_scale(a, b)
}

fn rel_zero<T: Scalar>(a: T) -> bool {
    rel_eq(a, T::zero())
}

fn rel_le<T: Scalar>(a: T, b: T) -> bool {
    a <= b + T::of(CLASSIFY_EQ_REL) * eq_scale(a, b)
}

fn rel_ge<T: Scalar>(a: T, b: T) -> bool {
    rel_le(b, a)
}

// ---------------------------------------------------------------------------
// Windows (closed intervals) produced by the minor conditions.

/// Closed interval with sorted endpoints; may degenerate to a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval<T = f64> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Interval<T> {
    /// Builds the interval with endpoints sorted.
    pub fn sorted(a: T, b: T) -> Self {
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn midpoint(&self) -> T {
        (self.lo + self.hi) * T::half()
    }

    /// Membership with a small relative slack so endpoint values (which
    /// put the form exactly on the PSD boundary) are accepted.
    pub fn contains(&self, v: T) -> bool {
        let slack = T::of(CLASSIFY_EQ_REL) * T::one().max(self.lo.abs()).max(self.hi.abs());
        v >= self.lo - slack && v <= self.hi + slack
    }

    /// Intersection, `None` when empty.
    pub fn intersect(&self, other: &Self) -> Option<Self> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        if lo <= hi {
            Some(Interval { lo, hi })
        } else {
            None
        }
    }
}

/// `mu` window for regime 3 (vanishing flux/flux-rate coupling): the lone
/// surviving 2x2 minor caps `mu` between `(sqrt(kappa) -+ |tau|
/// sqrt(x/lambda))^2`. Requires `lambda*x > 0` and `kappa >= 0`.
pub fn mu_window_item3<T: Scalar>(p: &MaterialParams<T>) -> Option<Interval<T>> {
    let x = p.nu - p.kappa;
    let r = x / p.lambda;
    if !(r > T::zero()) || p.kappa < T::zero() {
        return None;
    }
    let s = p.tau.abs() * r.sqrt();
    let root_k = p.kappa.sqrt();
    let lo = (root_k - s) * (root_k - s);
    let hi = (root_k + s) * (root_k + s);
    Some(Interval::sorted(lo, hi))
}

/// `mu` window for regime 8 (degenerate cross-minor discriminant):
/// `((|tau| sqrt(-lambda x nu) +- |lambda| kappa)^2) / (kappa lambda^2)`.
/// Requires `lambda*nu*(nu-kappa) <= 0` and `kappa > 0`.
pub fn mu_window_item8<T: Scalar>(p: &MaterialParams<T>) -> Option<Interval<T>> {
    let x = p.nu - p.kappa;
    let radicand = -p.lambda * x * p.nu;
    if radicand < T::zero() || !(p.kappa > T::zero()) {
        return None;
    }
    let s = p.tau.abs() * radicand.sqrt();
    let t = p.lambda.abs() * p.kappa;
    let den = p.kappa * p.lambda * p.lambda;
    let lo = (s - t) * (s - t) / den;
    let hi = (s + t) * (s + t) / den;
    Some(Interval::sorted(lo, hi))
}

/// `mu` window from the 2x2 minor on the (q, grad_theta) block, given the
/// coefficient choices `beta1`, `alpha2`. Defined when `lambda*beta1 > 0`
/// and `kappa*lambda*beta1 + x*tau*alpha2 >= 0`.
pub fn mu_window_q_grad<T: Scalar>(
    p: &MaterialParams<T>,
    beta1: T,
    alpha2: T,
) -> Option<Interval<T>> {
    let x = p.nu - p.kappa;
    let theta = p.theta_ref;
    let den = p.lambda * beta1 * theta;
    let radicand = theta * (p.kappa * p.lambda * beta1 + x * p.tau * alpha2);
    if !(den > T::zero()) || radicand < T::zero() {
        return None;
    }
    let s = radicand.sqrt();
    let t = p.lambda.abs();
    Some(Interval::sorted(
        (s - t) * (s - t) / den,
        (s + t) * (s + t) / den,
    ))
}

/// Mixing invariant of the coefficient triple: `(alpha1*alpha2 - beta1^2) /
/// lambda`. Consistency in the coefficient-coupled regimes forces it
/// positive.
pub fn phi_of<T: Scalar>(lambda: T, alpha1: T, alpha2: T, beta1: T) -> T {
    (alpha1 * alpha2 - beta1 * beta1) / lambda
}

/// `mu` window from the 2x2 minor on the (q_dot, grad_theta) block
/// (nonzero `alpha2` branch).
pub fn mu_window_qdot_grad<T: Scalar>(
    p: &MaterialParams<T>,
    beta1: T,
    alpha2: T,
    alpha1: T,
) -> Option<Interval<T>> {
    if alpha2 == T::zero() {
        return None;
    }
    let x = p.nu - p.kappa;
    let la = p.lambda;
    let phi = phi_of(la, alpha1, alpha2, beta1);
    let r1 = la * la * p.kappa * phi;
    let r2 = (p.tau * alpha2 - la * beta1) * (la * p.kappa * beta1 + x * p.tau * alpha2) / la;
    if r1 < T::zero() || r2 < T::zero() {
        return None;
    }
    let (s1, s2) = (r1.sqrt(), r2.sqrt());
    let den = alpha2 * alpha2;
    Some(Interval::sorted(
        (s1 - s2) * (s1 - s2) / den,
        (s1 + s2) * (s1 + s2) / den,
    ))
}

/// `mu` floor from the (q_dot, grad_theta) minor when `alpha2 = 0`: the
/// quadratic opens upward and admits `[floor, +inf)`.
pub fn mu_floor_alpha2_zero<T: Scalar>(p: &MaterialParams<T>, beta1: T, alpha1: T) -> T {
    let x = p.nu - p.kappa;
    let num = p.kappa * (p.lambda * alpha1 - p.tau * beta1) + x * p.tau * beta1;
    let four = T::of(4.0);
    -(num * num) / (four * p.kappa * p.lambda * beta1 * beta1)
}

/// Coefficients of the 3x3 minor on (q, q_dot, grad_theta) viewed as a
/// quadratic in `mu`: returns `(a, p_lin, q_const)` with
/// `d = a*mu^2 + 2*p_lin*mu - q_const`.
pub fn d4_quadratic<T: Scalar>(
    p: &MaterialParams<T>,
    beta1: T,
    alpha2: T,
    alpha1: T,
) -> (T, T, T) {
    let x = p.nu - p.kappa;
    let (la, tau, ka, theta) = (p.lambda, p.tau, p.kappa, p.theta_ref);
    let phi = phi_of(la, alpha1, alpha2, beta1);
    let four = T::of(4.0);
    let eight = T::of(8.0);
    let a = -beta1 * phi / (four * la);
    let p_lin = phi / (eight * la * la * theta)
        * (x * theta * beta1 * tau * tau + x * tau * theta * (alpha2 - la * alpha1)
            + la * (la + T::two() * ka * beta1 * theta))
        + (beta1 * (tau * alpha2 - la * beta1) - alpha2 * alpha2) / (eight * la * la * theta);
    // Constant term evaluated as minus the minor at mu = 0; the entries that
    // survive there only involve the eliminated beta2, beta3.
    let beta3 = ka * beta1 + x * tau * alpha2 / la;
    let beta2 = ka * alpha1 + x * tau * beta1 / la;
    let a11 = beta1 / la;
    let a22 = (tau * alpha2 - la * beta1) / la;
    let a12 = (alpha2 + tau * beta1 - la * alpha1) / (T::two() * la);
    let a13 = (beta3 * theta - la) / (T::two() * la * theta);
    let a23 = (tau * beta3 - la * beta2) / (T::two() * la);
    let q_const = a11 * a23 * a23 - T::two() * a12 * a13 * a23 + a22 * a13 * a13;
    (a, p_lin, q_const)
}

/// Discriminant of the 3x3-minor quadratic in factored form:
/// `d34/(16 lambda^2 theta^2) * (4 kappa lambda beta1 phi theta -
/// (alpha2 - x tau phi theta)^2)`.
pub fn d4_discriminant<T: Scalar>(
    p: &MaterialParams<T>,
    beta1: T,
    alpha2: T,
    alpha1: T,
) -> T {
    let x = p.nu - p.kappa;
    let (la, tau, ka, theta) = (p.lambda, p.tau, p.kappa, p.theta_ref);
    let phi = phi_of(la, alpha1, alpha2, beta1);
    let four = T::of(4.0);
    let w = la * alpha1 - tau * beta1 + alpha2;
    let d34 = phi - w * w / (four * la * la);
    let u = alpha2 - x * tau * phi * theta;
    d34 / (T::of(16.0) * la * la * theta * theta) * (four * ka * la * beta1 * phi * theta - u * u)
}

/// `mu` window from the 3x3 minor on (q, q_dot, grad_theta); empty when the
/// minor cannot be made nonnegative for any `mu`.
pub fn mu_window_det123<T: Scalar>(
    p: &MaterialParams<T>,
    beta1: T,
    alpha2: T,
    alpha1: T,
) -> Option<Interval<T>> {
    let phi = phi_of(p.lambda, alpha1, alpha2, beta1);
    if !(p.lambda * beta1 > T::zero()) || !(phi > T::zero()) {
        return None;
    }
    let (_, p_lin, _) = d4_quadratic(p, beta1, alpha2, alpha1);
    let disc = d4_discriminant(p, beta1, alpha2, alpha1);
    if disc < T::zero() {
        return None;
    }
    let s = disc.sqrt();
    let four_la = T::of(4.0) * p.lambda;
    let den = beta1 * phi;
    Some(Interval::sorted(
        four_la * (p_lin - s) / den,
        four_la * (p_lin + s) / den,
    ))
}

/// Admissible window for `alpha1` at fixed `beta1`, `alpha2`: keeps the
/// 2x2 minor on (q, q_dot) of the coefficient block positive. Requires
/// `beta1*(tau*alpha2 - lambda*beta1) >= 0`.
pub fn alpha1_window<T: Scalar>(lambda: T, tau: T, beta1: T, alpha2: T) -> Option<Interval<T>> {
    let radicand = beta1 * (tau * alpha2 - lambda * beta1);
    if radicand < T::zero() {
        return None;
    }
    let s = T::two() * radicand.sqrt();
    let base = tau * beta1 + alpha2;
    Some(Interval::sorted(
        (base - s) / lambda,
        (base + s) / lambda,
    ))
}

/// The same window expressed for the mixing invariant `phi`:
/// `((alpha2 -+ sqrt(beta1*(tau*alpha2 - lambda*beta1)))^2) / lambda^2`.
pub fn phi_window<T: Scalar>(lambda: T, tau: T, beta1: T, alpha2: T) -> Option<Interval<T>> {
    let radicand = beta1 * (tau * alpha2 - lambda * beta1);
    if radicand < T::zero() {
        return None;
    }
    let s = radicand.sqrt();
    let den = lambda * lambda;
    let lo = (alpha2 - s) * (alpha2 - s) / den;
    let hi = (alpha2 + s) * (alpha2 + s) / den;
    Some(Interval::sorted(lo, hi))
}

/// Window of `nu` values compatible with the kappa floor at fixed
/// coefficients (requires `tau != 0`, `kappa*lambda*beta1*phi*theta >= 0`):
/// `kappa + (alpha2 +- 2 sqrt(kappa lambda beta1 phi theta)) / (tau phi
/// theta)`. With `alpha2 = 0` this is the window used by the
/// vanishing-`alpha2` regimes.
pub fn nu_window<T: Scalar>(
    p: &MaterialParams<T>,
    beta1: T,
    alpha2: T,
    alpha1: T,
) -> Option<Interval<T>> {
    if p.tau == T::zero() {
        return None;
    }
    let phi = phi_of(p.lambda, alpha1, alpha2, beta1);
    let radicand = p.kappa * p.lambda * beta1 * phi * p.theta_ref;
    if radicand < T::zero() || phi == T::zero() {
        return None;
    }
    let s = T::two() * radicand.sqrt();
    let den = p.tau * phi * p.theta_ref;
    Some(Interval::sorted(
        p.kappa + (alpha2 - s) / den,
        p.kappa + (alpha2 + s) / den,
    ))
}

/// `alpha2` window for regime 2; collapses to a single point when `nu = 0`.
pub fn alpha2_window_item2<T: Scalar>(p: &MaterialParams<T>) -> Option<Interval<T>> {
    let (la, tau, ka, nu, theta) = (p.lambda, p.tau, p.kappa, p.nu, p.theta_ref);
    if tau == T::zero() || ka <= T::zero() || nu < T::zero() {
        return None;
    }
    if rel_zero(nu) {
        let v = la * la / (tau * theta * ka);
        return Some(Interval { lo: v, hi: v });
    }
    let dk = ka - nu;
    let den = tau * theta * dk * dk;
    let lo = la * la * (ka.sqrt() - nu.sqrt()) * (ka.sqrt() - nu.sqrt()) / den;
    let hi = la * la * (ka.sqrt() + nu.sqrt()) * (ka.sqrt() + nu.sqrt()) / den;
    Some(Interval::sorted(lo, hi))
}

/// `alpha2` window for regime 5 (zero `mu`, generic `lambda`).
pub fn alpha2_window_item5<T: Scalar>(p: &MaterialParams<T>) -> Option<Interval<T>> {
    let x = p.nu - p.kappa;
    let (la, tau, ka, theta) = (p.lambda, p.tau, p.kappa, p.theta_ref);
    let den_base = x * tau * tau * (ka + x) + la * ka * ka;
    if den_base == T::zero() {
        return None;
    }
    let radicand = ka * la * la * (tau * tau * (ka + x) - la * ka);
    if radicand < T::zero() {
        return None;
    }
    let s = T::two() * ka * ka * radicand.sqrt();
    let core = x * x * tau * tau * tau * (ka + x) + la * ka * ka * tau * (T::two() * ka + T::of(3.0) * x);
    let den = theta * den_base * den_base;
    Some(Interval::sorted(
        la * la * (core - s) / den,
        la * la * (core + s) / den,
    ))
}

/// One-sided `alpha2` bound shared by regimes 6 and 7 (pinned `lambda`):
/// `x^2 tau^3 (4 kappa + 3 x) / (4 kappa^4 theta)`.
pub fn alpha2_bound_item6_7<T: Scalar>(p: &MaterialParams<T>) -> T {
    let x = p.nu - p.kappa;
    let four = T::of(4.0);
    let k4 = p.kappa * p.kappa * p.kappa * p.kappa;
    x * x * p.tau * p.tau * p.tau * (four * p.kappa + T::of(3.0) * x) / (four * k4 * p.theta_ref)
}

// ---------------------------------------------------------------------------
// Regime catalog.

/// A regime matched by [`classify`].
#[derive(Clone, Debug)]
pub struct ItemMatch<T = f64> {
    /// Catalog index, 1-16.
    pub item: u8,
    /// True for regimes 9-16 whose conditions couple to the coefficients.
    pub conditional: bool,
    /// Whether the regime also keeps the temperature dynamics bounded
    /// (fixed per-regime verdict; see [`item_dynamically_admissible`]).
    pub dynamically_admissible: bool,
    /// Parameter-level conditions that were verified to hold.
    pub conditions: Vec<String>,
    /// Coefficient-level requirements left open (conditional regimes).
    pub predicates: Vec<String>,
    /// Constructive coefficient recipe at default free choices, when one
    /// is available (regimes 1-9; for 9 only if the defaults happen to be
    /// compatible with the given `mu`, `nu`, `kappa`).
    pub recipe: Option<Recipe<T>>,
}

/// Description of one free coefficient in a recipe.
#[derive(Clone, Debug)]
pub struct FreeCoeff<T = f64> {
    pub name: &'static str,
    /// Admissible window; `None` on an unbounded side.
    pub lo: Option<T>,
    pub hi: Option<T>,
    /// Value used when the caller does not supply one: the midpoint when
    /// the window is bounded, else the finite endpoint pushed one unit of
    /// its own scale into the interior.
    pub default: T,
}

/// Instantiated coefficient recipe.
#[derive(Clone, Debug)]
pub struct Recipe<T = f64> {
    /// Full coefficient set (gradient-rate block already constrained).
    pub coeffs: FreeEnergyCoeffs<T>,
    /// The free choices the recipe exposes, with their windows.
    pub free: Vec<FreeCoeff<T>>,
}

/// Outcome of [`classify`].
#[derive(Clone, Debug)]
pub struct LsoClassification<T = f64> {
    /// Every regime whose parameter-level conditions hold.
    pub matched: Vec<ItemMatch<T>>,
    /// True iff nothing matched and the numeric search also failed.
    pub infeasible: bool,
    /// Search outcome when the search ran (only when nothing matched).
    pub search: Option<SearchOutcome<T>>,
}

impl<T: Scalar> LsoClassification<T> {
    /// Indices of all matched regimes, ascending.
    pub fn matched_items(&self) -> Vec<u8> {
        self.matched.iter().map(|m| m.item).collect()
    }

    /// True when only coefficient-conditional regimes matched.
    pub fn conditional_only(&self) -> bool {
        !self.matched.is_empty() && self.matched.iter().all(|m| m.conditional)
    }
}

/// Fixed per-regime verdict on whether the regime is also dynamically
/// admissible (temperature perturbations stay bounded): regimes 1-3 and 8
/// for positive `mu`, 4 and 5 for zero `mu`; every other regime is not.
pub fn item_dynamically_admissible(item: u8) -> bool {
    matches!(item, 1 | 2 | 3 | 4 | 5 | 8)
}

/// Classifies material parameters against the regime catalog.
///
/// Returns every regime whose parameter-level conditions hold. Regimes 9-16
/// are conditional: their remaining requirements reference the free-energy
/// coefficients and are attached as predicates. When nothing matches, the
/// numeric feasibility search decides; `infeasible` is set iff it fails.
pub fn classify<T: Scalar>(p: &MaterialParams<T>) -> Result<LsoClassification<T>> {
    let vp = validate_params(p)?;
    let flags = vp.flags();
    if flags.lambda_zero || flags.kappa_zero {
        return Err(Error::ExcludedDegenerate {
            lambda_zero: flags.lambda_zero,
            kappa_zero: flags.kappa_zero,
        });
    }
    let mut matched = Vec::new();
    for item in 1..=8u8 {
        if let Some(m) = match_decidable(item, p) {
            matched.push(m);
        }
    }
    for item in 9..=16u8 {
        if let Some(m) = match_conditional(item, p) {
            matched.push(m);
        }
    }
    let search = if matched.is_empty() {
        Some(feasibility_search(p)?)
    } else {
        None
    };
    let infeasible = matched.is_empty()
        && search.as_ref().map_or(true, |s| s.coeffs.is_none());
    Ok(LsoClassification {
        matched,
        infeasible,
        search,
    })
}

fn match_decidable<T: Scalar>(item: u8, p: &MaterialParams<T>) -> Option<ItemMatch<T>> {
    let x = p.nu - p.kappa;
    let kappa_pos = p.kappa > T::zero();
    let tau_nonzero = p.tau != T::zero();
    let mut conditions: Vec<String> = Vec::new();
    let ok = match item {
        1 => {
            let ok = rel_eq(p.mu, p.kappa) && rel_eq(p.nu, p.kappa) && kappa_pos && tau_nonzero;
            if ok {
                conditions.extend([
                    "mu = kappa".into(),
                    "nu = kappa".into(),
                    "kappa > 0".into(),
                    "tau != 0".into(),
                ]);
            }
            ok
        }
        2 => {
            let ok = rel_eq(p.mu, p.kappa)
                && p.nu >= T::zero()
                && !rel_eq(p.nu, p.kappa)
                && kappa_pos
                && tau_nonzero;
            if ok {
                conditions.extend([
                    "mu = kappa".into(),
                    "nu >= 0 and nu != kappa".into(),
                    "kappa > 0".into(),
                    "tau != 0".into(),
                ]);
            }
            ok
        }
        3 => {
            let window = mu_window_item3(p);
            let ok = kappa_pos
                && tau_nonzero
                && p.lambda * x > T::zero()
                && p.mu > T::zero()
                && window.map_or(false, |w| w.contains(p.mu));
            if ok {
                conditions.extend([
                    "kappa > 0".into(),
                    "tau != 0".into(),
                    "lambda*(nu - kappa) > 0".into(),
                    "mu > 0 inside its closed window".into(),
                ]);
            }
            ok
        }
        4 => {
            let ok = rel_zero(p.mu)
                && kappa_pos
                && tau_nonzero
                && rel_eq(p.nu, p.kappa * (p.lambda + p.tau * p.tau) / (p.tau * p.tau));
            if ok {
                conditions.extend([
                    "mu = 0".into(),
                    "kappa > 0".into(),
                    "tau != 0".into(),
                    "nu = kappa*(lambda + tau^2)/tau^2".into(),
                ]);
            }
            ok
        }
        5 => {
            let pinned = -p.nu * x * p.tau * p.tau / (p.kappa * p.kappa);
            let ok = rel_zero(p.mu)
                && kappa_pos
                && rel_le(p.lambda * p.kappa, p.tau * p.tau * p.nu)
                && !rel_eq(p.lambda, pinned);
            if ok {
                conditions.extend([
                    "mu = 0".into(),
                    "kappa > 0".into(),
                    "lambda*kappa <= tau^2*nu".into(),
                    "lambda != -nu*(nu - kappa)*tau^2/kappa^2".into(),
                ]);
            }
            ok
        }
        6 | 7 => {
            let pinned = -p.nu * x * p.tau * p.tau / (p.kappa * p.kappa);
            let sign_ok = if item == 6 {
                x * p.tau > T::zero()
            } else {
                x * p.tau < T::zero()
            };
            let ok = rel_zero(p.mu)
                && kappa_pos
                && tau_nonzero
                && !rel_zero(p.nu)
                && !rel_eq(p.nu, p.kappa)
                && sign_ok
                && rel_eq(p.lambda, pinned);
            if ok {
                conditions.extend([
                    "mu = 0".into(),
                    "kappa > 0".into(),
                    "nu != 0 and nu != kappa".into(),
                    if item == 6 {
                        "(nu - kappa)*tau > 0".into()
                    } else {
                        "(nu - kappa)*tau < 0".into()
                    },
                    "lambda = -nu*(nu - kappa)*tau^2/kappa^2".into(),
                ]);
            }
            ok
        }
        8 => {
            let window = mu_window_item8(p);
            let ok = kappa_pos
                && tau_nonzero
                && p.mu > T::zero()
                && !rel_eq(p.nu, p.kappa)
                && rel_ge(p.lambda * p.nu * (p.kappa - p.nu), T::zero())
                && window.map_or(false, |w| w.contains(p.mu));
            if ok {
                conditions.extend([
                    "kappa > 0".into(),
                    "tau != 0".into(),
                    "mu > 0 inside its closed window".into(),
                    "nu != kappa".into(),
                    "lambda*nu*(kappa - nu) >= 0".into(),
                ]);
            }
            ok
        }
        _ => unreachable!("decidable regimes are 1-8"),
    };
    if !ok {
        return None;
    }
    let recipe = recipe_for_item(item, p, None).ok().map(|r| r);
    Some(ItemMatch {
        item,
        conditional: false,
        dynamically_admissible: item_dynamically_admissible(item),
        conditions,
        predicates: Vec::new(),
        recipe,
    })
}

fn match_conditional<T: Scalar>(item: u8, p: &MaterialParams<T>) -> Option<ItemMatch<T>> {
    let kappa_pos = p.kappa > T::zero();
    let mu_pos = p.mu > T::zero();
    let quarter_tau2 = -p.tau * p.tau / T::of(4.0);
    let (ok, conditions, predicates): (bool, Vec<String>, Vec<String>) = match item {
        9 => (
            mu_pos && kappa_pos && p.tau != T::zero(),
            vec!["mu > 0".into(), "kappa > 0".into(), "tau != 0".into()],
            vec![
                "lambda*beta1 > 0".into(),
                "alpha2 != 0 with lambda*(tau*alpha2 - lambda*beta1) >= 0".into(),
                "alpha1 inside the window keeping the coefficient block positive".into(),
                "kappa above the floor set by (beta1, alpha2, alpha1)".into(),
                "mu inside the intersection of the three coefficient windows".into(),
            ],
        ),
        10 => (
            mu_pos && kappa_pos && p.tau == T::zero() && p.lambda < T::zero(),
            vec![
                "mu > 0".into(),
                "kappa > 0".into(),
                "tau = 0".into(),
                "lambda < 0".into(),
            ],
            vec![
                "beta1 < 0".into(),
                "alpha2 != 0".into(),
                "kappa >= alpha2^2/(4*lambda*beta1*phi*theta)".into(),
                "mu inside the intersection of the three coefficient windows".into(),
            ],
        ),
        11 => (
            mu_pos && kappa_pos,
            vec!["mu > 0".into(), "kappa > 0".into()],
            vec![
                "lambda*beta1 > 0 and lambda*(tau*alpha2 - lambda*beta1) >= 0".into(),
                "alpha1 at the boundary of its window (degenerate 3x3 minor)".into(),
                "lambda*kappa*beta1 + (nu - kappa)*tau*alpha2 > 0".into(),
                "mu at the collapsed point of the coefficient windows".into(),
            ],
        ),
        12 => (
            mu_pos && kappa_pos && p.lambda < T::zero(),
            vec!["mu > 0".into(), "kappa > 0".into(), "lambda < 0".into()],
            vec![
                "beta1 < 0, alpha1 = 0, tau*alpha2 - lambda*beta1 <= 0".into(),
                "lambda = -(beta1*tau - alpha2)^2/(4*beta1^2)".into(),
                "lambda*kappa*beta1 + (nu - kappa)*tau*alpha2 > 0".into(),
                "mu at the collapsed point of the coefficient windows".into(),
            ],
        ),
        13 => (
            mu_pos && kappa_pos && p.lambda < T::zero(),
            vec!["mu > 0".into(), "kappa > 0".into(), "lambda < 0".into()],
            vec![
                "alpha2 = 0, beta1 < 0".into(),
                "alpha1 strictly inside its window (positive 2x2 coefficient minor)".into(),
                "nu inside the window at alpha2 = 0 (when tau != 0)".into(),
                "mu above the cross-minor floor and inside the 3x3 window".into(),
            ],
        ),
        14 => (
            mu_pos && kappa_pos && p.lambda < quarter_tau2,
            vec![
                "mu > 0".into(),
                "kappa > 0".into(),
                "lambda < -tau^2/4".into(),
            ],
            vec![
                "alpha2 = 0, alpha1 = 0, beta1 < 0".into(),
                "nu inside the window at alpha2 = 0 (when tau != 0)".into(),
                "mu above the cross-minor floor and inside the 3x3 window".into(),
            ],
        ),
        15 => (
            mu_pos && kappa_pos && p.lambda < T::zero(),
            vec!["mu > 0".into(), "kappa > 0".into(), "lambda < 0".into()],
            vec![
                "alpha2 = 0, beta1 < 0".into(),
                "alpha1 at the boundary of its window (degenerate 3x3 minor)".into(),
                "mu above the cross-minor floor, at the collapsed 3x3 point".into(),
            ],
        ),
        16 => (
            mu_pos && kappa_pos && rel_eq(p.lambda, quarter_tau2),
            vec![
                "mu > 0".into(),
                "kappa > 0".into(),
                "lambda = -tau^2/4".into(),
            ],
            vec![
                "alpha2 = 0, alpha1 = 0, beta1 < 0".into(),
                "mu above the cross-minor floor, at the collapsed 3x3 point".into(),
            ],
        ),
        _ => unreachable!("conditional regimes are 9-16"),
    };
    if !ok {
        return None;
    }
    let recipe = if item == 9 {
        recipe_for_item(9, p, None).ok()
    } else {
        None
    };
    Some(ItemMatch {
        item,
        conditional: true,
        dynamically_admissible: item_dynamically_admissible(item),
        conditions,
        predicates,
        recipe,
    })
}

// ---------------------------------------------------------------------------
// Coefficient recipes.

/// Builds free-energy coefficients realizing a catalog regime at the given
/// parameters. `free` supplies values for the regime's free coefficients in
/// catalog order (regimes 1, 2, 5, 6, 7: `[alpha2]`; regime 9: `[beta1,
/// alpha2, alpha1]`; regimes 3, 4, 8 take none); omitted entries use the
/// documented defaults. The result is fully constrained and verified PSD.
pub fn coeffs_for_item<T: Scalar>(
    item: u8,
    p: &MaterialParams<T>,
    free: Option<&[T]>,
) -> Result<FreeEnergyCoeffs<T>> {
    Ok(recipe_for_item(item, p, free)?.coeffs)
}

fn item_violation<T: std::fmt::Display>(item: u8, condition: T) -> Error {
    Error::ItemConditionViolated {
        item,
        condition: condition.to_string(),
    }
}

fn free_out_of_range<T: Scalar>(
    item: u8,
    name: &'static str,
    value: T,
    lo: Option<T>,
    hi: Option<T>,
) -> Error {
    let as_f64 = |b: Option<T>, unbounded: f64| {
        b.map_or(unbounded, |v| v.to_f64().unwrap_or(f64::NAN))
    };
    Error::FreeCoeffOutOfRange {
        item,
        name,
        value: value.to_f64().unwrap_or(f64::NAN),
        lo: as_f64(lo, f64::NEG_INFINITY),
        hi: as_f64(hi, f64::INFINITY),
    }
}

/// Accepts `v` inside `[lo, hi]` with the classifier's relative slack so a
/// caller may pass an exact endpoint.
fn within<T: Scalar>(v: T, lo: Option<T>, hi: Option<T>) -> bool {
    let anchor = T::one()
        .max(lo.map_or(T::zero(), |b| b.abs()))
        .max(hi.map_or(T::zero(), |b| b.abs()));
    let slack = T::of(CLASSIFY_EQ_REL) * anchor;
    lo.map_or(true, |b| v >= b - slack) && hi.map_or(true, |b| v <= b + slack)
}

/// Default for a one-sided window: push the endpoint one unit of its own
/// scale into the interior.
fn one_sided_default<T: Scalar>(endpoint: T, into_positive: bool) -> T {
    let step = T::one().max(endpoint.abs());
    if into_positive {
        endpoint + step
    } else {
        endpoint - step
    }
}

fn take_free<T: Scalar>(
    item: u8,
    free: Option<&[T]>,
    expected: usize,
) -> Result<Vec<Option<T>>> {
    match free {
        None => Ok(vec![None; expected]),
        Some(vals) => {
            if vals.len() > expected {
                return Err(Error::PreconditionViolated {
                    op: "coeffs_for_item",
                    what: format!(
                        "regime {item} takes at most {expected} free coefficient(s), got {}",
                        vals.len()
                    ),
                });
            }
            let mut out = vec![None; expected];
            for (slot, v) in out.iter_mut().zip(vals) {
                *slot = Some(*v);
            }
            Ok(out)
        }
    }
}

fn recipe_for_item<T: Scalar>(
    item: u8,
    p: &MaterialParams<T>,
    free: Option<&[T]>,
) -> Result<Recipe<T>> {
    let vp = validate_params(p)?;
    let flags = vp.flags();
    if flags.lambda_zero || flags.kappa_zero {
        return Err(Error::ExcludedDegenerate {
            lambda_zero: flags.lambda_zero,
            kappa_zero: flags.kappa_zero,
        });
    }
    let recipe = match item {
        1 | 2 => recipe_items_1_2(item, p, free)?,
        3 => recipe_item3(p, free)?,
        4 => recipe_item4(p, free)?,
        5 | 6 | 7 => recipe_items_5_6_7(item, p, free)?,
        8 => recipe_item8(p, free)?,
        9 => recipe_item9(p, free)?,
        _ => {
            return Err(Error::PreconditionViolated {
                op: "coeffs_for_item",
                what: format!("no constructive recipe for regime {item} (valid: 1-9)"),
            })
        }
    };
    let a = build_a(p, &recipe.coeffs)?;
    if !a.is_psd_default() {
        return Err(item_violation(
            item,
            "constructed coefficients failed the positivity postcondition",
        ));
    }
    Ok(recipe)
}

/// Regimes 1 and 2 share one formula set; only the `alpha2` window differs.
fn recipe_items_1_2<T: Scalar>(
    item: u8,
    p: &MaterialParams<T>,
    free: Option<&[T]>,
) -> Result<Recipe<T>> {
    let (la, tau, ka, nu, theta) = (p.lambda, p.tau, p.kappa, p.nu, p.theta_ref);
    if !(ka > T::zero()) || tau == T::zero() || !rel_eq(p.mu, ka) {
        return Err(item_violation(item, "needs mu = kappa > 0 and tau != 0"));
    }
    let free = take_free(item, free, 1)?;
    let (lo, hi, default) = if item == 1 {
        if !rel_eq(nu, ka) {
            return Err(item_violation(1, "needs nu = kappa"));
        }
        let bound = la * la / (T::of(4.0) * ka * theta * tau);
        if tau > T::zero() {
            (Some(bound), None, one_sided_default(bound, true))
        } else {
            (None, Some(bound), one_sided_default(bound, false))
        }
    } else {
        if rel_eq(nu, ka) || nu < T::zero() {
            return Err(item_violation(2, "needs nu >= 0 and nu != kappa"));
        }
        let w = alpha2_window_item2(p)
            .ok_or_else(|| item_violation(2, "alpha2 window is empty"))?;
        (Some(w.lo), Some(w.hi), w.midpoint())
    };
    let alpha2 = free[0].unwrap_or(default);
    if !within(alpha2, lo, hi) {
        return Err(free_out_of_range(item, "alpha2", alpha2, lo, hi));
    }
    let la2 = la * la;
    let coeffs = FreeEnergyCoeffs {
        alpha1: (tau * tau + la) * alpha2 / la2,
        alpha2,
        alpha3: (la * ka * ka + tau * tau * nu * nu) * alpha2 / la2,
        beta1: tau * alpha2 / la,
        beta2: (nu * tau * tau + ka * la) * alpha2 / la2,
        beta3: tau * nu * alpha2 / la,
        ..FreeEnergyCoeffs::zero()
    };
    Ok(Recipe {
        coeffs: apply_constraints(&coeffs, ka),
        free: vec![FreeCoeff {
            name: "alpha2",
            lo,
            hi,
            default,
        }],
    })
}

fn recipe_item3<T: Scalar>(p: &MaterialParams<T>, free: Option<&[T]>) -> Result<Recipe<T>> {
    let (la, tau, ka, theta) = (p.lambda, p.tau, p.kappa, p.theta_ref);
    let x = p.nu - ka;
    take_free(3, free, 0)?;
    if !(ka > T::zero()) || tau == T::zero() || !(la * x > T::zero()) || !(p.mu > T::zero()) {
        return Err(item_violation(
            3,
            "needs kappa > 0, tau != 0, lambda*(nu - kappa) > 0 and mu > 0",
        ));
    }
    let window = mu_window_item3(p).ok_or_else(|| item_violation(3, "mu window is empty"))?;
    if !window.contains(p.mu) {
        return Err(item_violation(3, "mu outside its closed window"));
    }
    let xt = x * tau * theta;
    let coeffs = FreeEnergyCoeffs {
        alpha1: la / xt,
        alpha2: la * la / xt,
        alpha3: (x * x * tau * tau + ka * ka * la) / xt,
        beta1: T::zero(),
        beta2: ka * la / xt,
        beta3: la / theta,
        ..FreeEnergyCoeffs::zero()
    };
    Ok(Recipe {
        coeffs: apply_constraints(&coeffs, ka),
        free: Vec::new(),
    })
}

fn recipe_item4<T: Scalar>(p: &MaterialParams<T>, free: Option<&[T]>) -> Result<Recipe<T>> {
    let (la, tau, ka, theta) = (p.lambda, p.tau, p.kappa, p.theta_ref);
    take_free(4, free, 0)?;
    let target_nu = ka * (la + tau * tau) / (tau * tau);
    if !rel_zero(p.mu) || !(ka > T::zero()) || tau == T::zero() || !rel_eq(p.nu, target_nu) {
        return Err(item_violation(
            4,
            "needs mu = 0, kappa > 0, tau != 0 and nu = kappa*(lambda + tau^2)/tau^2",
        ));
    }
    let coeffs = FreeEnergyCoeffs {
        alpha1: tau / (ka * theta),
        alpha2: la * tau / (ka * theta),
        alpha3: ka * (la + tau * tau) / (tau * theta),
        beta1: T::zero(),
        beta2: tau / theta,
        beta3: la / theta,
        ..FreeEnergyCoeffs::zero()
    };
    Ok(Recipe {
        coeffs: apply_constraints(&coeffs, ka),
        free: Vec::new(),
    })
}

/// Regimes 5, 6 and 7 share the zero-`mu`, nonzero-`beta1` formula set;
/// they differ in the `alpha2` window and in whether `lambda` is pinned.
fn recipe_items_5_6_7<T: Scalar>(
    item: u8,
    p: &MaterialParams<T>,
    free: Option<&[T]>,
) -> Result<Recipe<T>> {
    let (la, tau, ka, nu, theta) = (p.lambda, p.tau, p.kappa, p.nu, p.theta_ref);
    let x = nu - ka;
    if !rel_zero(p.mu) || !(ka > T::zero()) {
        return Err(item_violation(item, "needs mu = 0 and kappa > 0"));
    }
    let free = take_free(item, free, 1)?;
    let (lo, hi, default) = match item {
        5 => {
            let pinned = -nu * x * tau * tau / (ka * ka);
            if !rel_le(la * ka, tau * tau * nu) || rel_eq(la, pinned) {
                return Err(item_violation(
                    5,
                    "needs lambda*kappa <= tau^2*nu with lambda off the pinned value",
                ));
            }
            let w = alpha2_window_item5(p)
                .ok_or_else(|| item_violation(5, "alpha2 window is empty"))?;
            (Some(w.lo), Some(w.hi), w.midpoint())
        }
        6 | 7 => {
            let pinned = -nu * x * tau * tau / (ka * ka);
            let want_pos = item == 6;
            let sign_ok = if want_pos {
                x * tau > T::zero()
            } else {
                x * tau < T::zero()
            };
            if tau == T::zero() || rel_zero(nu) || rel_eq(nu, ka) || !sign_ok
                || !rel_eq(la, pinned)
            {
                return Err(item_violation(
                    item,
                    "needs lambda pinned to -nu*(nu - kappa)*tau^2/kappa^2 with the \
                     matching sign of (nu - kappa)*tau",
                ));
            }
            let bound = alpha2_bound_item6_7(p);
            if want_pos {
                (None, Some(bound), one_sided_default(bound, false))
            } else {
                (Some(bound), None, one_sided_default(bound, true))
            }
        }
        _ => unreachable!(),
    };
    let alpha2 = free[0].unwrap_or(default);
    if !within(alpha2, lo, hi) {
        return Err(free_out_of_range(item, "alpha2", alpha2, lo, hi));
    }
    let coeffs = FreeEnergyCoeffs {
        alpha1: tau * (x * x * tau * alpha2 * theta + la * la * (T::two() * ka - nu))
            / (ka * ka * la * la * theta),
        alpha2,
        alpha3: tau * nu / theta,
        beta1: (la * la - tau * alpha2 * x * theta) / (ka * la * theta),
        beta2: tau / theta,
        beta3: la / theta,
        ..FreeEnergyCoeffs::zero()
    };
    Ok(Recipe {
        coeffs: apply_constraints(&coeffs, ka),
        free: vec![FreeCoeff {
            name: "alpha2",
            lo,
            hi,
            default,
        }],
    })
}

fn recipe_item8<T: Scalar>(p: &MaterialParams<T>, free: Option<&[T]>) -> Result<Recipe<T>> {
    let (la, tau, ka, nu, mu, theta) = (p.lambda, p.tau, p.kappa, p.nu, p.mu, p.theta_ref);
    let x = nu - ka;
    take_free(8, free, 0)?;
    if !(ka > T::zero())
        || tau == T::zero()
        || !(mu > T::zero())
        || rel_eq(nu, ka)
        || !rel_ge(la * nu * (ka - nu), T::zero())
    {
        return Err(item_violation(
            8,
            "needs kappa > 0, tau != 0, mu > 0, nu != kappa and lambda*nu*(kappa - nu) >= 0",
        ));
    }
    let window = mu_window_item8(p).ok_or_else(|| item_violation(8, "mu window is empty"))?;
    if !window.contains(mu) {
        return Err(item_violation(8, "mu outside its closed window"));
    }
    let dk = -x; // kappa - nu
    let coeffs = FreeEnergyCoeffs {
        alpha1: (tau * tau * dk * dk + ka * la * mu) / (mu * tau * ka * dk * theta),
        alpha2: ka * la * la / (mu * tau * dk * theta),
        alpha3: ka * ka * la / (tau * dk * theta),
        beta1: la / (mu * theta),
        beta2: ka * la / (tau * dk * theta),
        beta3: T::zero(),
        ..FreeEnergyCoeffs::zero()
    };
    Ok(Recipe {
        coeffs: apply_constraints(&coeffs, ka),
        free: Vec::new(),
    })
}

fn recipe_item9<T: Scalar>(p: &MaterialParams<T>, free: Option<&[T]>) -> Result<Recipe<T>> {
    let (la, tau, ka, mu, theta) = (p.lambda, p.tau, p.kappa, p.mu, p.theta_ref);
    let x = p.nu - ka;
    if !(ka > T::zero()) || tau == T::zero() || !(mu > T::zero()) {
        return Err(item_violation(9, "needs mu > 0, kappa > 0 and tau != 0"));
    }
    let free = take_free(9, free, 3)?;

    // beta1: sign pinned by lambda, scale free.
    let beta1_default = la.signum();
    let beta1 = free[0].unwrap_or(beta1_default);
    if !(la * beta1 > T::zero()) {
        return Err(free_out_of_range(
            9,
            "beta1",
            beta1,
            if la > T::zero() { Some(T::zero()) } else { None },
            if la > T::zero() { None } else { Some(T::zero()) },
        ));
    }

    // alpha2: nonzero, with lambda*(tau*alpha2 - lambda*beta1) >= 0. The
    // default solves tau*alpha2 - lambda*beta1 = 2*lambda*|beta1|, which
    // keeps the alpha1 window open.
    let alpha2_default = (T::two() * la * beta1.abs() + la * beta1) / tau;
    let alpha2 = free[1].unwrap_or(alpha2_default);
    if alpha2 == T::zero() || la * (tau * alpha2 - la * beta1) < T::zero() {
        return Err(item_violation(
            9,
            "alpha2 must be nonzero with lambda*(tau*alpha2 - lambda*beta1) >= 0",
        ));
    }

    let a1w = alpha1_window(la, tau, beta1, alpha2)
        .ok_or_else(|| item_violation(9, "alpha1 window is empty"))?;
    let alpha1 = free[2].unwrap_or_else(|| a1w.midpoint());
    if !within(alpha1, Some(a1w.lo), Some(a1w.hi)) {
        return Err(free_out_of_range(9, "alpha1", alpha1, Some(a1w.lo), Some(a1w.hi)));
    }
    let phi = phi_of(la, alpha1, alpha2, beta1);
    if !(phi > T::zero()) {
        return Err(item_violation(9, "coefficient mixing invariant not positive"));
    }

    // kappa floor from the discriminant of the 3x3 minor.
    let u = alpha2 - x * tau * phi * theta;
    let floor = u * u / (T::of(4.0) * la * beta1 * phi * theta);
    if !rel_ge(ka, floor) {
        return Err(item_violation(9, "kappa below the window floor"));
    }

    // mu must sit in the intersection of the three windows.
    let w24 = mu_window_q_grad(p, beta1, alpha2)
        .ok_or_else(|| item_violation(9, "flux/gradient mu window is empty"))?;
    let w23 = mu_window_qdot_grad(p, beta1, alpha2, alpha1)
        .ok_or_else(|| item_violation(9, "rate/gradient mu window is empty"))?;
    let w123 = mu_window_det123(p, beta1, alpha2, alpha1)
        .ok_or_else(|| item_violation(9, "3x3 mu window is empty"))?;
    let inter = w24
        .intersect(&w23)
        .and_then(|w| w.intersect(&w123))
        .ok_or_else(|| item_violation(9, "mu windows have empty intersection"))?;
    if !inter.contains(mu) {
        return Err(item_violation(9, "mu outside the window intersection"));
    }

    let la2 = la * la;
    let coeffs = FreeEnergyCoeffs {
        alpha1,
        alpha2,
        alpha3: ka * ka * alpha1 + T::two() * ka * tau * x * beta1 / la
            + tau * tau * x * x * alpha2 / la2,
        beta1,
        beta2: ka * alpha1 + x * tau * beta1 / la,
        beta3: ka * beta1 + x * tau * alpha2 / la,
        ..FreeEnergyCoeffs::zero()
    };
    Ok(Recipe {
        coeffs: apply_constraints(&coeffs, ka),
        free: vec![
            FreeCoeff {
                name: "beta1",
                lo: if la > T::zero() { Some(T::zero()) } else { None },
                hi: if la > T::zero() { None } else { Some(T::zero()) },
                default: beta1_default,
            },
            FreeCoeff {
                name: "alpha2",
                lo: None,
                hi: None,
                default: alpha2_default,
            },
            FreeCoeff {
                name: "alpha1",
                lo: Some(a1w.lo),
                hi: Some(a1w.hi),
                default: a1w.midpoint(),
            },
        ],
    })
}

// ---------------------------------------------------------------------------
// Numeric feasibility oracle.

/// Result of [`feasibility_search`].
#[derive(Clone, Debug)]
pub struct SearchOutcome<T = f64> {
    /// Coefficients making `A` PSD within tolerance, when found.
    pub coeffs: Option<FreeEnergyCoeffs<T>>,
    /// Argmax of the objective over all starts (even when not accepted).
    pub best_coeffs: FreeEnergyCoeffs<T>,
    /// Best value of `min_eig(A) / max(1, ||A||_F)` found.
    pub best_objective: T,
    /// Total objective evaluations.
    pub evaluations: usize,
}

const SEARCH_SEED: u64 = 0x6865_6174_7261_7465; // ASCII "heatrate"
const SEARCH_STARTS: usize = 64;
const SEARCH_MAX_ITERS: usize = 160;

/// Expand a reduced search point `(alpha1, alpha2, beta1)` into a full
/// coefficient vector. Positive semidefiniteness forces two rank
/// conditions on `A` outright: the (q_dot, grad_theta_dot) off-diagonal
/// minor is a negative square, so it must vanish, and the fourth row must
/// be `kappa` times the second. Solving those for `beta3`, `beta2`,
/// `alpha3` leaves exactly this three-parameter family, which therefore
/// contains every PSD-attainable coefficient vector.
fn coeffs_from_reduced<T: Scalar>(p: &MaterialParams<T>, v: &[T; 3]) -> FreeEnergyCoeffs<T> {
    let [alpha1, alpha2, beta1] = *v;
    let x = p.nu - p.kappa;
    let (la, tau, ka) = (p.lambda, p.tau, p.kappa);
    let beta3 = ka * beta1 + x * tau * alpha2 / la;
    let beta2 = ka * alpha1 + x * tau * beta1 / la;
    let alpha3 =
        ka * ka * alpha1 + T::two() * ka * tau * x * beta1 / la + tau * tau * x * x * alpha2 / (la * la);
    apply_constraints(
        &FreeEnergyCoeffs {
            alpha1,
            alpha2,
            alpha3,
            beta1,
            beta2,
            beta3,
            ..FreeEnergyCoeffs::zero()
        },
        ka,
    )
}

/// Derivative-free search for coefficients making `A` positive
/// semidefinite: 64 deterministic multi-starts of a compass pattern search
/// producing `(alpha1, alpha2, alpha3, beta1, beta2, beta3)`, maximizing
/// the smallest eigenvalue of `A` normalized by `max(1, ||A||_F)`. The
/// search walks the three free directions `(alpha1, alpha2, beta1)` and
/// fills the rest from the rank conditions PSD-ness forces (see
/// [`coeffs_from_reduced`]); on that family the forced zero eigenvalue is
/// exact to roundoff, so feasible parameters score ~0 instead of being
/// approachable only in the limit. Iterates stay clamped to the search
/// box. Succeeds when the best objective clears `-1e-9`; otherwise the
/// best value found serves as an infeasibility certificate.
pub fn feasibility_search<T: Scalar>(p: &MaterialParams<T>) -> Result<SearchOutcome<T>> {
    use rand::Rng;
    use rand::SeedableRng;

    if p.lambda == T::zero() {
        return Err(Error::ZeroLambda);
    }
    let objective = |v: &[T; 3]| -> T {
        let c = coeffs_from_reduced(p, v);
        // lambda != 0 was checked above, so assembly cannot fail.
        let a = build_a(p, &c).expect("lambda checked nonzero");
        a.min_eigenvalue() / T::one().max(a.frobenius_norm())
    };

    // Box half-width: the recipe formulas scale like powers of lambda and
    // tau over theta, so span those magnitudes.
    let width = T::of(4.0)
        * T::one().max(p.lambda.abs())
        * T::one().max(p.tau.abs())
        * T::one().max(T::one() / p.theta_ref);
    let clamp = |y: T| y.max(-width).min(width);
    // Objective values at or above this are indistinguishable from the
    // exact-zero plateau of a feasible family; stop refining.
    let plateau = -T::of(1e-12);

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(SEARCH_SEED);
    let mut best_v = [T::zero(); 3];
    let mut best_obj = objective(&best_v);
    let mut evaluations = 1usize;

    for start in 0..SEARCH_STARTS {
        let mut v = [T::zero(); 3];
        if start > 0 {
            for slot in v.iter_mut() {
                *slot = width * T::of(rng.gen_range(-1.0..1.0));
            }
        }
        let mut fv = objective(&v);
        evaluations += 1;
        let mut step = width / T::of(8.0);
        let floor = width * T::of(1e-7);
        for _ in 0..SEARCH_MAX_ITERS {
            let mut improved = false;
            for i in 0..3 {
                for sign in [T::one(), -T::one()] {
                    let mut y = v;
                    y[i] = clamp(y[i] + sign * step);
                    if y[i] == v[i] {
                        continue;
                    }
                    let fy = objective(&y);
                    evaluations += 1;
                    if fy > fv {
                        v = y;
                        fv = fy;
                        improved = true;
                    }
                }
            }
            if fv >= plateau {
                break;
            }
            if improved {
                step = (step * T::of(1.25)).min(width);
            } else {
                step *= T::half();
                if step < floor {
                    break;
                }
            }
        }
        if fv > best_obj {
            best_obj = fv;
            best_v = v;
        }
        if best_obj >= plateau {
            break;
        }
    }

    let best_coeffs = coeffs_from_reduced(p, &best_v);
    let accepted = best_obj >= -T::of(SEARCH_ACCEPT_REL);
    Ok(SearchOutcome {
        coeffs: accepted.then(|| best_coeffs.clone()),
        best_coeffs,
        best_objective: best_obj,
        evaluations,
    })
}

// ---------------------------------------------------------------------------
// Serializable classification report.

/// JSON-facing classification report; every number is rendered with 17
/// significant digits so the report round-trips exactly.
#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub matched_items: Vec<u8>,
    pub infeasible: bool,
    pub items: Vec<ItemReport>,
    /// Best normalized objective of the feasibility search, when it ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search_best_objective: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search_evaluations: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ItemReport {
    pub item: u8,
    pub conditional: bool,
    pub dynamically_admissible: bool,
    pub conditions: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub predicates: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recipe: Option<RecipeReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RecipeReport {
    /// Coefficient name -> 17-significant-digit value.
    pub coeffs: Vec<(String, String)>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub free: Vec<FreeCoeffReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FreeCoeffReport {
    pub name: String,
    /// `None` encodes an unbounded side.
    pub lo: Option<String>,
    pub hi: Option<String>,
    pub default: String,
}

/// Renders a classification as its serializable report.
pub fn classification_report<T: Scalar>(c: &LsoClassification<T>) -> ClassificationReport {
    let items = c
        .matched
        .iter()
        .map(|m| ItemReport {
            item: m.item,
            conditional: m.conditional,
            dynamically_admissible: m.dynamically_admissible,
            conditions: m.conditions.clone(),
            predicates: m.predicates.clone(),
            recipe: m.recipe.as_ref().map(recipe_report),
        })
        .collect();
    ClassificationReport {
        matched_items: c.matched_items(),
        infeasible: c.infeasible,
        items,
        search_best_objective: c.search.as_ref().map(|s| crate::sig17(s.best_objective)),
        search_evaluations: c.search.as_ref().map(|s| s.evaluations),
    }
}

fn recipe_report<T: Scalar>(r: &Recipe<T>) -> RecipeReport {
    let c = &r.coeffs;
    let coeffs = [
        ("alpha1", c.alpha1),
        ("alpha2", c.alpha2),
        ("alpha3", c.alpha3),
        ("alpha4", c.alpha4),
        ("beta1", c.beta1),
        ("beta2", c.beta2),
        ("beta3", c.beta3),
        ("beta4", c.beta4),
        ("beta5", c.beta5),
        ("beta6", c.beta6),
    ]
    .into_iter()
    .map(|(n, v)| (n.to_string(), crate::sig17(v)))
    .collect();
    let free = r
        .free
        .iter()
        .map(|f| FreeCoeffReport {
            name: f.name.to_string(),
            lo: f.lo.map(crate::sig17),
            hi: f.hi.map(crate::sig17),
            default: crate::sig17(f.default),
        })
        .collect();
    RecipeReport { coeffs, free }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(lambda: f64, tau: f64, mu: f64, nu: f64, kappa: f64) -> MaterialParams {
        MaterialParams {
            lambda,
            tau,
            mu,
            nu,
            kappa,
            rho_cv: 1.0,
            theta_ref: 1.0,
        }
    }

    fn rand_coeffs(rng: &mut ChaCha8Rng) -> FreeEnergyCoeffs {
        FreeEnergyCoeffs {
            alpha1: rng.gen_range(-2.0..2.0),
            alpha2: rng.gen_range(-2.0..2.0),
            alpha3: rng.gen_range(-2.0..2.0),
            beta1: rng.gen_range(-2.0..2.0),
            beta2: rng.gen_range(-2.0..2.0),
            beta3: rng.gen_range(-2.0..2.0),
            ..FreeEnergyCoeffs::zero()
        }
    }

    #[test]
    fn constraint_map_matches_hand_values() {
        let c = FreeEnergyCoeffs {
            beta1: 1.0,
            alpha2: 2.0,
            beta3: 3.0,
            ..FreeEnergyCoeffs::zero()
        };
        let out = apply_constraints(&c, 2.0);
        assert_eq!(out.beta4, 2.0);
        assert_eq!(out.beta5, 4.0);
        assert_eq!(out.beta6, 6.0);
        assert_eq!(out.alpha4, 8.0);
        let zeroed = apply_constraints(&c, 0.0);
        assert_eq!(
            (zeroed.beta4, zeroed.beta5, zeroed.beta6, zeroed.alpha4),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn constraint_map_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let c = rand_coeffs(&mut rng);
            let kappa = rng.gen_range(-3.0..3.0);
            let once = apply_constraints(&c, kappa);
            let twice = apply_constraints(&once, kappa);
            assert_eq!(once, twice);
        }
    }

    #[test]
    fn assembly_zero_coeffs_has_single_entry() {
        let p = params(1.0, 0.7, 0.3, -0.2, 0.9);
        let p = MaterialParams { theta_ref: 0.5, ..p };
        let a = build_a(&p, &FreeEnergyCoeffs::zero()).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let want = if (i, j) == (0, 2) || (i, j) == (2, 0) {
                    -1.0
                } else {
                    0.0
                };
                assert_eq!(a.get(i, j), want, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn assembly_rejects_zero_lambda() {
        let p = params(0.0, 1.0, 1.0, 1.0, 1.0);
        assert!(matches!(
            build_a(&p, &FreeEnergyCoeffs::zero()),
            Err(Error::ZeroLambda)
        ));
    }

    /// With beta1 = tau*alpha2/lambda plus the beta3/beta2 values the branch
    /// forces, the fourth row/column of A vanishes except for A34 (which
    /// needs the matching alpha3 as well); with that alpha3 the row is
    /// identically zero in the remaining free coefficient alpha1.
    #[test]
    fn special_branch_zeroes_fourth_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let p = params(
                rng.gen_range(0.3..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 },
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let la2 = p.lambda * p.lambda;
            let alpha2 = rng.gen_range(-2.0..2.0);
            let mut c = rand_coeffs(&mut rng);
            c.alpha2 = alpha2;
            c.beta1 = p.tau * alpha2 / p.lambda;
            c.beta3 = p.kappa * c.beta1 + p.tau * alpha2 * (p.nu - p.kappa) / p.lambda;
            c.beta2 = (p.nu * p.tau * p.tau + p.kappa * p.lambda) * alpha2 / la2;
            let a = build_a(&p, &c).unwrap();
            let scale = 1.0f64.max(a.frobenius_norm());
            assert!(a.get(1, 1).abs() <= 1e-12 * scale, "A22 = {}", a.get(1, 1));
            for i in [0, 1, 3] {
                assert!(
                    a.get(i, 3).abs() <= 1e-12 * scale,
                    "A({i},4) = {}",
                    a.get(i, 3)
                );
            }
            // Reduced nonzero entries match the expected closed forms.
            assert!((a.get(0, 0) - p.tau * alpha2 / la2).abs() <= 1e-12 * scale);
            assert!((a.get(2, 2) - p.mu * p.tau * p.nu * alpha2 / la2).abs() <= 1e-12 * scale);

            // Completing the branch with the matching alpha3 zeroes the rest
            // of the fourth row, for any alpha1.
            c.alpha3 =
                (p.kappa * p.mu * p.lambda + p.tau * p.tau * p.nu * p.nu) * alpha2 / la2;
            let a = build_a(&p, &c).unwrap();
            let scale = 1.0f64.max(a.frobenius_norm());
            for i in 0..4 {
                assert!(
                    a.get(i, 3).abs() <= 1e-12 * scale,
                    "A({i},4) = {}",
                    a.get(i, 3)
                );
            }
        }
    }

    /// The 2x2 minor that keeps the flux-rate and gradient-rate axes is
    /// minus a perfect square for every coefficient choice.
    #[test]
    fn cross_minor_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..500 {
            let p = params(
                rng.gen_range(0.2..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 },
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            let c = rand_coeffs(&mut rng);
            let a = build_a(&p, &c).unwrap();
            let d13 = a.principal_minors().d2[1]; // deleted pair (1,3)
            let num = p.lambda * (c.beta3 - p.kappa * c.beta1)
                + (p.kappa - p.nu) * p.tau * c.alpha2;
            let expect = -num * num / (4.0 * p.lambda * p.lambda);
            let scale = 1.0f64.max(d13.abs()).max(expect.abs());
            assert!(
                (d13 - expect).abs() <= 1e-12 * scale,
                "d13 {d13} vs {expect}"
            );
        }
    }

    /// The 3x3 minor on (q, q_dot, grad_theta) agrees with its closed-form
    /// quadratic in mu, and the factored discriminant matches p^2 + a*q.
    #[test]
    fn det123_quadratic_matches_minor() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..500 {
            let lambda: f64 = rng.gen_range(0.2..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let beta1 = rng.gen_range(0.2..2.0) * lambda.signum();
            let alpha2 = rng.gen_range(-2.0..2.0);
            let alpha1 = rng.gen_range(-2.0..2.0);
            let p = params(
                lambda,
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(0.2..2.0),
            );
            let x = p.nu - p.kappa;
            // Constrain beta2, beta3, alpha3 the way the coefficient-coupled
            // analysis does, leaving mu as the only free direction.
            let c = FreeEnergyCoeffs {
                alpha1,
                alpha2,
                alpha3: p.kappa * p.kappa * alpha1
                    + 2.0 * p.kappa * p.tau * x * beta1 / lambda
                    + p.tau * p.tau * x * x * alpha2 / (lambda * lambda),
                beta1,
                beta2: p.kappa * alpha1 + x * p.tau * beta1 / lambda,
                beta3: p.kappa * beta1 + x * p.tau * alpha2 / lambda,
                ..FreeEnergyCoeffs::zero()
            };
            let a = build_a(&p, &c).unwrap();
            let d4 = a.principal_minors().d3[3]; // delete the 4th axis
            let (qa, qp, qq) = d4_quadratic(&p, beta1, alpha2, alpha1);
            let by_formula = qa * p.mu * p.mu + 2.0 * qp * p.mu - qq;
            let scale = 1.0f64.max(d4.abs());
            assert!(
                (d4 - by_formula).abs() <= 1e-10 * scale,
                "minor {d4} vs quadratic {by_formula}"
            );
            let disc_factored = d4_discriminant(&p, beta1, alpha2, alpha1);
            let disc_direct = qp * qp + qa * qq;
            let dscale = 1.0f64.max(disc_direct.abs());
            assert!(
                (disc_factored - disc_direct).abs() <= 1e-10 * dscale,
                "discriminant {disc_factored} vs {disc_direct}"
            );
        }
    }

    #[test]
    fn classify_examples() {
        let item1 = classify(&params(1.0, 1.0, 2.0, 2.0, 2.0)).unwrap();
        assert!(item1.matched_items().contains(&1));
        assert!(!item1.infeasible);

        let item4 = classify(&params(1.0, 1.0, 0.0, 2.0, 1.0)).unwrap();
        assert!(item4.matched_items().contains(&4));

        let infeasible = classify(&params(1.0, 1.0, -1.0, 1.0, 1.0)).unwrap();
        assert!(infeasible.matched_items().is_empty());
        assert!(infeasible.infeasible);
        let s = infeasible.search.as_ref().unwrap();
        assert!(s.coeffs.is_none());
        assert!(s.best_objective < -1e-9);
    }

    #[test]
    fn classify_rejects_degenerate_axes() {
        assert!(matches!(
            classify(&params(0.0, 1.0, 1.0, 1.0, 1.0)),
            Err(Error::ExcludedDegenerate { lambda_zero: true, .. })
        ));
        assert!(matches!(
            classify(&params(1.0, 1.0, 1.0, 1.0, 0.0)),
            Err(Error::ExcludedDegenerate { kappa_zero: true, .. })
        ));
    }

    #[test]
    fn recipe_item1_matches_hand_computation() {
        let p = params(1.0, 1.0, 2.0, 2.0, 2.0);
        let lower = 1.0 / 8.0; // lambda^2 / (4 kappa theta tau)
        let c = coeffs_for_item(1, &p, Some(&[lower])).unwrap();
        assert_eq!(c.beta1, 0.125);
        assert_eq!(c.beta3, 0.25);
        assert_eq!(c.alpha1, 0.25);
        assert_eq!(c.alpha3, 1.0);
        assert_eq!(c.beta2, 0.5);
        // constrained block
        assert_eq!(c.beta4, 2.0 * c.beta1);
        assert_eq!(c.beta5, 2.0 * c.alpha2);
        assert_eq!(c.beta6, 2.0 * c.beta3);
        assert_eq!(c.alpha4, 2.0 * c.beta5);
        let a = build_a(&p, &c).unwrap();
        assert!(a.is_psd_default());
    }

    #[test]
    fn recipe_item4_matches_hand_computation() {
        let p = params(1.0, 1.0, 0.0, 2.0, 1.0);
        let c = coeffs_for_item(4, &p, None).unwrap();
        assert_eq!(c.beta1, 0.0);
        assert_eq!(c.beta2, 1.0);
        assert_eq!(c.beta3, 1.0);
        assert_eq!(c.alpha1, 1.0);
        assert_eq!(c.alpha2, 1.0);
        assert_eq!(c.alpha3, 2.0);
        let a = build_a(&p, &c).unwrap();
        // The only nonzero block is on (q_dot, grad_theta_dot).
        assert!((a.get(1, 1) - 1.0).abs() < 1e-15);
        assert!((a.get(1, 3) - 1.0).abs() < 1e-15);
        assert!((a.get(3, 3) - 1.0).abs() < 1e-15);
        assert!(a.is_psd_default());
    }

    #[test]
    fn recipe_rejects_out_of_window_free_values() {
        let p = params(1.0, 1.0, 2.0, 2.0, 2.0);
        // Below the half-infinite window floor for regime 1.
        let err = coeffs_for_item(1, &p, Some(&[0.01])).unwrap_err();
        assert!(matches!(err, Error::FreeCoeffOutOfRange { item: 1, .. }));
        // Wrong regime for these parameters.
        let err = coeffs_for_item(4, &p, None).unwrap_err();
        assert!(matches!(err, Error::ItemConditionViolated { item: 4, .. }));
    }

    #[test]
    fn search_confirms_item1_and_rejects_negative_mu() {
        let p = params(1.0, 1.0, 2.0, 2.0, 2.0);
        let good = feasibility_search(&p).unwrap();
        let c = good.coeffs.as_ref().expect("feasible parameters");
        let a = build_a(&p, c).unwrap();
        assert!(a.is_psd_default(), "objective {}", good.best_objective);
        let bad = feasibility_search(&params(1.0, 1.0, -1.0, 1.0, 1.0)).unwrap();
        assert!(bad.coeffs.is_none(), "objective {}", bad.best_objective);
    }

    #[test]
    fn search_is_deterministic() {
        let p = params(0.8, -0.6, 0.0, 0.4, 1.1);
        let a = feasibility_search(&p).unwrap();
        let b = feasibility_search(&p).unwrap();
        assert_eq!(a.best_objective, b.best_objective);
        assert_eq!(a.evaluations, b.evaluations);
        assert_eq!(a.best_coeffs, b.best_coeffs);
    }

    #[test]
    fn report_serializes_with_17_digits() {
        let c = classify(&params(1.0, 1.0, 2.0, 2.0, 2.0)).unwrap();
        let report = classification_report(&c);
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"matched_items\":[1"));
        // 16 digits after the mantissa's leading digit.
        assert!(json.contains("e0") || json.contains("e-") || json.contains("e1"));
    }
}
