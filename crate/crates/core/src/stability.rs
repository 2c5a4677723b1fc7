//! Modal stability of the linearized conductors.
//!
//! Linearizing the energy balance `rho_cv theta' = -div q` about a rest
//! state and expanding in eigenmodes of `-laplacian` with eigenvalue
//! `Lambda >= 0` collapses each rate equation to a scalar ODE for the
//! mode amplitude; growth or decay is read off a characteristic
//! polynomial in the mode rate `w`. For the two-relaxation-time
//! conductor this is the cubic
//!
//! ```text
//! lambda w^3 + (tau + Lt lambda kappa) w^2 + (1 + Lt tau nu) w + Lt mu,
//! Lt = Lambda / rho_cv
//! ```
//!
//! built by [`characteristic_cubic`]. [`routh_hurwitz`] grades a single
//! cubic and cross-checks the verdict against its computed roots;
//! [`stability_conditions`] answers the all-modes question (every
//! `Lt > 0` at once) analytically; [`mu_admissibility`] returns the
//! admissible interval of the stationary conductivity `mu` per parameter
//! regime; [`oscillatory_tuning`] picks the `mu` that parks a conjugate
//! root pair exactly on the imaginary axis. [`model_characteristic`]
//! produces the analogous polynomial for every catalog model.

use std::fmt;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{check, ConditionCheck, ModelKind};
use crate::params::MaterialParams;
use crate::roots::{poly_eval, solve_poly};
use crate::scalar::Scalar;
use crate::tol::RH_MARGINAL_BAND;

/// Coefficients of `c3 w^3 + c2 w^2 + c1 w + c0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicCoeffs<T = f64> {
    pub c3: T,
    pub c2: T,
    pub c1: T,
    pub c0: T,
}

impl<T: Scalar> CubicCoeffs<T> {
    pub fn new(c3: T, c2: T, c1: T, c0: T) -> Self {
        Self { c3, c2, c1, c0 }
    }

    /// Descending-power coefficient array (the root solver's convention).
    pub fn as_array(&self) -> [T; 4] {
        [self.c3, self.c2, self.c1, self.c0]
    }

    pub fn eval(&self, w: Complex<T>) -> Complex<T> {
        poly_eval(&self.as_array(), w)
    }

    /// `c2 c1 - c3 c0`, the one non-sign Routh-Hurwitz quantity a cubic has.
    pub fn hurwitz_product(&self) -> T {
        self.c2 * self.c1 - self.c3 * self.c0
    }

    /// Largest coefficient magnitude, the normalization behind the
    /// marginality band.
    pub fn scale(&self) -> T {
        self.c3
            .abs()
            .max(self.c2.abs())
            .max(self.c1.abs())
            .max(self.c0.abs())
    }
}

/// Three-way grade of a mode: strict decay, strict growth, or a root
/// within the marginality band of the imaginary axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilityStatus {
    Stable,
    Marginal,
    Unstable,
}

impl fmt::Display for StabilityStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StabilityStatus::Stable => "stable",
            StabilityStatus::Marginal => "marginal",
            StabilityStatus::Unstable => "unstable",
        })
    }
}

/// Verdict for one cubic. `witnesses` names every failing or marginal
/// quantity (with its value) and any offending root; empty for a clean
/// stable verdict.
#[derive(Clone, Debug, Serialize)]
pub struct StabilityVerdict {
    pub status: StabilityStatus,
    pub witnesses: Vec<String>,
}

/// Which closed-form branch of the all-modes analysis applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityRegime {
    /// `kappa, nu > 0`: parabola bound, strict.
    PositiveKappaNu,
    /// `kappa = 0`: linear bound `lambda mu <= tau^2 nu`, inclusive.
    KappaZero,
    /// `nu = 0`: linear bound `mu <= kappa`, inclusive.
    NuZero,
    /// `mu = 0`: zero root per mode, companion quadratic strictly damped.
    MuZero,
    /// `kappa = nu = 0`: only `mu = 0` survives; degenerate.
    KappaNuZero,
}

impl fmt::Display for StabilityRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StabilityRegime::PositiveKappaNu => "positive_kappa_nu",
            StabilityRegime::KappaZero => "kappa_zero",
            StabilityRegime::NuZero => "nu_zero",
            StabilityRegime::MuZero => "mu_zero",
            StabilityRegime::KappaNuZero => "kappa_nu_zero",
        })
    }
}

/// Parameter-level verdict: does every spatial mode decay, for every
/// positive mode weight at once? `pass` holds exactly when all listed
/// conditions are satisfied.
#[derive(Clone, Debug, Serialize)]
pub struct ParameterVerdict {
    pub regime: StabilityRegime,
    pub pass: bool,
    pub conditions: Vec<ConditionCheck>,
    pub notes: String,
}

/// Admissible interval for the stationary conductivity `mu` at fixed
/// `lambda, tau, nu, kappa`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MuRegion<T = f64> {
    pub regime: StabilityRegime,
    pub lo: T,
    pub hi: T,
    pub lo_inclusive: bool,
    pub hi_inclusive: bool,
    /// Set when `kappa = nu = 0`: the region collapses to `{0}`. The
    /// conductor then keeps a zero root per mode, which the
    /// parameter-level verdict does not grade as stable.
    pub degenerate: bool,
}

impl<T: Scalar> MuRegion<T> {
    pub fn contains(&self, mu: T) -> bool {
        let lo_ok = if self.lo_inclusive {
            mu >= self.lo
        } else {
            mu > self.lo
        };
        let hi_ok = if self.hi_inclusive {
            mu <= self.hi
        } else {
            mu < self.hi
        };
        lo_ok && hi_ok
    }
}

/// The `mu` placing a conjugate root pair on the imaginary axis at mode
/// weight `Lambda_bar`, plus the resulting roots.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OscillatoryTuning<T = f64> {
    pub mu: T,
    /// `Lambda_bar / rho_cv`, the weight the cubic actually sees.
    pub lambda_tilde: T,
    /// Ordered as [`mode_roots`] would order them: the imaginary pair
    /// (negative imaginary part first), then the negative real root.
    pub roots: [Complex<T>; 3],
}

/// Characteristic cubic of one spatial mode of the two-relaxation-time
/// conductor, `Lt = Lambda / rho_cv`:
///
/// ```text
/// lambda w^3 + (tau + Lt lambda kappa) w^2 + (1 + Lt tau nu) w + Lt mu
/// ```
///
/// Requires `rho_cv > 0`; `Lambda` is the `-laplacian` eigenvalue of the
/// mode (nonnegative for the physical boundary conditions).
pub fn characteristic_cubic<T: Scalar>(p: &MaterialParams<T>, lambda_n: T) -> CubicCoeffs<T> {
    debug_assert!(p.rho_cv > T::zero(), "rho_cv must be positive");
    let lt = lambda_n / p.rho_cv;
    CubicCoeffs {
        c3: p.lambda,
        c2: p.tau + lt * p.lambda * p.kappa,
        c1: T::one() + lt * p.tau * p.nu,
        c0: lt * p.mu,
    }
}

/// Supremum of admissible `mu` when `kappa, nu > 0`:
/// `(sqrt(lambda kappa) + tau sqrt(nu))^2 / lambda`. At this value the
/// damping quadratic acquires a double positive root (one marginal mode),
/// so the bound is strict.
fn mu_sup<T: Scalar>(lambda: T, tau: T, nu: T, kappa: T) -> T {
    let s = (lambda * kappa).sqrt() + tau * nu.sqrt();
    s * s / lambda
}

/// Routh-Hurwitz grade of a cubic, cross-checked against its computed
/// roots.
///
/// The criterion: all four coefficients share a strict sign and
/// `c2 c1 - c3 c0 > 0`. Each tested quantity is normalized by the
/// coefficient scale; values below `-band` give `Unstable`, values inside
/// `+-band` give `Marginal` (band is relative, 1e-9). The verdict is then
/// compared with the sign pattern of the roots' real parts; a
/// disagreement demotes the result to `Marginal` with both sides quoted.
pub fn routh_hurwitz<T: Scalar>(c: CubicCoeffs<T>) -> Result<StabilityVerdict> {
    if c.c3 == T::zero() {
        return Err(Error::DegenerateCubic);
    }
    let band = T::of(RH_MARGINAL_BAND);
    let scale = c.scale();
    let sigma = if c.c3 > T::zero() {
        T::one()
    } else {
        -T::one()
    };
    let h = c.hurwitz_product();

    let quantities = [
        ("sign-normalized coefficient c2", sigma * c.c2, scale),
        ("sign-normalized coefficient c1", sigma * c.c1, scale),
        ("sign-normalized coefficient c0", sigma * c.c0, scale),
        ("hurwitz product c2*c1 - c3*c0", h, scale * scale),
    ];
    let mut witnesses = Vec::new();
    let mut any_negative = false;
    let mut any_marginal = false;
    for (name, raw, norm) in quantities {
        let t = raw / norm;
        if t < -band {
            any_negative = true;
            witnesses.push(format!("{name} = {raw} must be positive"));
        } else if t <= band {
            any_marginal = true;
            witnesses.push(format!("{name} = {raw} lies within the marginal band"));
        }
    }
    let by_criterion = if any_negative {
        StabilityStatus::Unstable
    } else if any_marginal {
        StabilityStatus::Marginal
    } else {
        StabilityStatus::Stable
    };

    let roots = mode_roots(c)?;
    let mut any_right = false;
    let mut any_on_axis = false;
    for w in roots {
        let wb = band * T::one().max(w.norm());
        if w.re > wb {
            any_right = true;
            witnesses.push(format!("root {w} has positive real part"));
        } else if w.re >= -wb {
            any_on_axis = true;
        }
    }
    let by_roots = if any_right {
        StabilityStatus::Unstable
    } else if any_on_axis {
        StabilityStatus::Marginal
    } else {
        StabilityStatus::Stable
    };

    let status = if by_criterion == by_roots {
        by_criterion
    } else {
        witnesses.push(format!(
            "criterion verdict {by_criterion} disagrees with root verdict {by_roots}"
        ));
        StabilityStatus::Marginal
    };
    Ok(StabilityVerdict { status, witnesses })
}

/// Decides, in closed form, whether every spatial mode decays for every
/// positive mode weight.
///
/// Requirements: `lambda, tau, mu > 0` (or the `mu = 0` branch below),
/// `kappa >= 0`, `nu >= 0`, and positivity of the damping quadratic for
/// all `Lt > 0`. The latter is decided analytically per regime:
///
/// - `kappa, nu > 0`: `mu` strictly below the parabola supremum;
/// - `kappa = 0`: `lambda mu <= tau^2 nu` (equality keeps every finite
///   mode strictly damped);
/// - `nu = 0`: `mu <= kappa` (inclusive, same reason);
/// - `kappa = nu = 0`: impossible for `mu > 0`.
///
/// When `mu = 0` each mode keeps a zero root (a uniform temperature
/// shift) and the companion quadratic is strictly damped exactly when
/// `lambda, tau, kappa, nu` are all positive.
///
/// The verdict does not depend on `rho_cv` (a positive factor only
/// rescales the mode weight).
pub fn stability_conditions<T: Scalar>(p: &MaterialParams<T>) -> ParameterVerdict {
    debug_assert!(p.rho_cv > T::zero(), "rho_cv must be positive");
    let z = T::zero();
    let mut conditions = Vec::new();
    let regime;
    let notes;
    if p.mu == z {
        regime = StabilityRegime::MuZero;
        conditions.push(check("lambda > 0", p.lambda > z));
        conditions.push(check("tau > 0", p.tau > z));
        conditions.push(check("kappa > 0", p.kappa > z));
        conditions.push(check("nu > 0", p.nu > z));
        notes = "mu = 0: every mode keeps one zero root (a uniform temperature shift); \
                 the companion quadratic is strictly damped when lambda, tau, kappa, nu \
                 are all positive"
            .to_string();
    } else {
        conditions.push(check("lambda > 0", p.lambda > z));
        conditions.push(check("tau > 0", p.tau > z));
        conditions.push(check("mu > 0", p.mu > z));
        conditions.push(check("kappa >= 0", p.kappa >= z));
        conditions.push(check("nu >= 0", p.nu >= z));
        // The closed-form damping bound is only meaningful once the sign
        // requirements hold; skipping it otherwise keeps `pass == all
        // conditions satisfied` an exact equivalence.
        let signs_ok = p.lambda > z && p.tau > z && p.mu > z && p.kappa >= z && p.nu >= z;
        if p.kappa == z && p.nu == z {
            regime = StabilityRegime::KappaNuZero;
            if signs_ok {
                conditions.push(check("mu = 0 when kappa = nu = 0", false));
            }
            notes = "kappa = nu = 0: the damping condition degenerates to \
                     tau - lambda mu Lt > 0 for all Lt > 0, impossible for positive mu"
                .to_string();
        } else if p.kappa == z {
            regime = StabilityRegime::KappaZero;
            if signs_ok {
                conditions.push(check(
                    "lambda*mu <= tau^2*nu",
                    p.lambda * p.mu <= p.tau * p.tau * p.nu,
                ));
            }
            notes = "kappa = 0: the damping quadratic is linear in the mode weight; \
                     the bound lambda*mu <= tau^2*nu is inclusive"
                .to_string();
        } else if p.nu == z {
            regime = StabilityRegime::NuZero;
            if signs_ok {
                conditions.push(check("mu <= kappa", p.mu <= p.kappa));
            }
            notes = "nu = 0: the damping quadratic is linear in the mode weight; \
                     the bound mu <= kappa is inclusive"
                .to_string();
        } else {
            regime = StabilityRegime::PositiveKappaNu;
            if signs_ok {
                let sup = mu_sup(p.lambda, p.tau, p.nu, p.kappa);
                conditions.push(check(
                    "mu < (sqrt(lambda*kappa) + tau*sqrt(nu))^2 / lambda",
                    p.mu < sup,
                ));
                notes = format!("kappa, nu > 0: strict supremum for mu is {sup}");
            } else {
                notes = "kappa, nu nonzero: sign requirements fail; the closed-form \
                         bound was not evaluated"
                    .to_string();
            }
        }
    }
    let pass = conditions.iter().all(|c| c.satisfied);
    ParameterVerdict {
        regime,
        pass,
        conditions,
        notes,
    }
}

/// Admissible `mu` interval at fixed `lambda, tau > 0` and
/// `kappa, nu >= 0`:
///
/// - `kappa, nu > 0`: `[0, (sqrt(lambda kappa) + tau sqrt(nu))^2 / lambda)`;
/// - `kappa = 0`: `(0, tau^2 nu / lambda]`;
/// - `nu = 0`: `(0, kappa]`;
/// - `kappa = nu = 0`: the degenerate singleton `{0}`.
///
/// Zero is included exactly when the `mu = 0` branch of
/// [`stability_conditions`] would accept the parameters (it needs
/// `kappa, nu > 0`); the degenerate singleton is the one formal
/// exception and is flagged as such.
pub fn mu_admissibility<T: Scalar>(lambda: T, tau: T, nu: T, kappa: T) -> Result<MuRegion<T>> {
    let z = T::zero();
    if !(lambda > z && tau > z) {
        return Err(Error::PreconditionViolated {
            op: "mu_admissibility",
            what: format!("lambda and tau must be positive (lambda={lambda}, tau={tau})"),
        });
    }
    if !(kappa >= z && nu >= z) {
        return Err(Error::PreconditionViolated {
            op: "mu_admissibility",
            what: format!("kappa and nu must be nonnegative (kappa={kappa}, nu={nu})"),
        });
    }
    Ok(if kappa > z && nu > z {
        MuRegion {
            regime: StabilityRegime::PositiveKappaNu,
            lo: z,
            hi: mu_sup(lambda, tau, nu, kappa),
            lo_inclusive: true,
            hi_inclusive: false,
            degenerate: false,
        }
    } else if kappa == z && nu == z {
        MuRegion {
            regime: StabilityRegime::KappaNuZero,
            lo: z,
            hi: z,
            lo_inclusive: true,
            hi_inclusive: true,
            degenerate: true,
        }
    } else if kappa == z {
        MuRegion {
            regime: StabilityRegime::KappaZero,
            lo: z,
            hi: tau * tau * nu / lambda,
            lo_inclusive: false,
            hi_inclusive: true,
            degenerate: false,
        }
    } else {
        MuRegion {
            regime: StabilityRegime::NuZero,
            lo: z,
            hi: kappa,
            lo_inclusive: false,
            hi_inclusive: true,
            degenerate: false,
        }
    })
}

/// Finds the `mu` making the mode at weight `Lambda_bar` purely
/// oscillatory: the damping quantity `c2 c1 - c3 c0` vanishes there, so
/// the cubic factors as `(lambda w + c2)(w^2 + c1/lambda)` with roots
///
/// ```text
/// w1 = -(tau + Lt lambda kappa) / lambda,   w+- = +-i sqrt((1 + Lt tau nu) / lambda)
/// ```
///
/// `p.mu` is ignored; the returned value replaces it. Requires
/// `lambda, tau, kappa, nu, rho_cv` and `Lambda_bar` all positive, else
/// `NoPositiveSolution` (the factorization needs `c1/lambda > 0` and a
/// positive tuned `mu`, which exactly these signs guarantee).
pub fn oscillatory_tuning<T: Scalar>(
    p: &MaterialParams<T>,
    lambda_bar: T,
) -> Result<OscillatoryTuning<T>> {
    let z = T::zero();
    if !(p.lambda > z && p.tau > z && p.kappa > z && p.nu > z && p.rho_cv > z && lambda_bar > z) {
        return Err(Error::NoPositiveSolution);
    }
    let lt = lambda_bar / p.rho_cv;
    // Solve hurwitz_product == 0 for mu (it enters linearly with
    // coefficient -lambda Lt). The result exceeds the parabola supremum
    // by (Lt sqrt(kappa lambda nu tau) - sqrt(tau))^2 / (Lt lambda) >= 0,
    // so the tuned point always sits at or beyond the admissible region.
    let q0 = p.lambda * p.kappa * p.tau * p.nu * lt * lt
        + (p.tau * p.tau * p.nu + p.lambda * p.kappa) * lt
        + p.tau;
    let mu = q0 / (p.lambda * lt);
    let w1 = -(p.tau + lt * p.lambda * p.kappa) / p.lambda;
    let omega = ((T::one() + lt * p.tau * p.nu) / p.lambda).sqrt();
    Ok(OscillatoryTuning {
        mu,
        lambda_tilde: lt,
        roots: [
            Complex::new(z, -omega),
            Complex::new(z, omega),
            Complex::new(w1, z),
        ],
    })
}

/// The cubic's three roots, ordered by descending real part with ties
/// broken by ascending imaginary part. Each root satisfies the residual
/// bound of the polynomial solver.
pub fn mode_roots<T: Scalar>(c: CubicCoeffs<T>) -> Result<[Complex<T>; 3]> {
    let r = solve_poly(&c.as_array())?;
    Ok([r[0], r[1], r[2]])
}

/// Per-mode characteristic polynomial of any catalog model, descending
/// powers of the mode rate `w`.
///
/// The sub-second-order models carry no heat capacity of their own;
/// their polynomials are normalized to `rho_cv = 1` (conductivities per
/// unit volumetric heat capacity). The full conductor divides by its own
/// `rho_cv`, matching [`characteristic_cubic`].
///
/// Leading coefficients that are exactly zero are trimmed, so a
/// degenerate parameter yields the polynomial of the reduced model
/// (matching [`ModelKind::reduce`]).
pub fn model_characteristic<T: Scalar>(model: &ModelKind<T>, lambda_n: T) -> Vec<T> {
    let l = lambda_n;
    let one = T::one();
    let mut coeffs = match model {
        ModelKind::Fourier(m) => vec![one, m.kappa * l],
        ModelKind::Mcv(m) => vec![m.tau, one, m.kappa * l],
        ModelKind::GnIii(m) => vec![one, m.kappa * l, m.xi * l],
        ModelKind::Jeffreys(m) => vec![m.tau, one + l * m.tau * m.zeta, m.kappa * l],
        ModelKind::Quintanilla(m) => vec![m.tau, one, m.kappa * l, m.xi * l],
        ModelKind::Burgers(m) => vec![m.lambda, m.tau, one + l * m.tau * m.zeta, m.kappa * l],
        ModelKind::Lso(p) => characteristic_cubic(p, l).as_array().to_vec(),
    };
    while coeffs.len() > 1 && coeffs[0] == T::zero() {
        coeffs.remove(0);
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{
        BurgersParams, FourierParams, GnIiiParams, JeffreysParams, McvParams, QuintanillaParams,
    };
    use crate::roots::residual_ok;
    use crate::tol::MODE_REALITY_REL;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mp(lambda: f64, tau: f64, mu: f64, nu: f64, kappa: f64) -> MaterialParams {
        MaterialParams {
            lambda,
            tau,
            mu,
            nu,
            kappa,
            rho_cv: 1.0,
            theta_ref: 300.0,
        }
    }

    fn random_cubic(rng: &mut ChaCha8Rng) -> CubicCoeffs {
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        CubicCoeffs::new(
            sign * rng.gen_range(0.2..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        )
    }

    #[test]
    fn cubic_reference_values() {
        let p = mp(2.5, 0.3, 1.75, -0.4, 0.6);
        let c = characteristic_cubic(&p, 0.0);
        assert_eq!(c.as_array(), [2.5, 0.3, 1.0, 0.0]);

        let unit = mp(1.0, 1.0, 1.0, 1.0, 1.0);
        let c = characteristic_cubic(&unit, 1.0);
        assert_eq!(c.as_array(), [1.0, 2.0, 2.0, 1.0]);
    }

    #[test]
    fn cubic_matches_energy_balance_expansion() {
        // Independent path: the unreduced modal balance
        //   rho_cv (lambda w^3 + tau w^2 + w)
        //     + Lambda (lambda kappa w^2 + tau nu w + mu)
        // must equal rho_cv times the assembled cubic at any w.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cw = |x: f64| Complex::new(x, 0.0);
        for _ in 0..300 {
            let p = MaterialParams {
                lambda: rng.gen_range(-2.0..2.0),
                tau: rng.gen_range(-2.0..2.0),
                mu: rng.gen_range(-2.0..2.0),
                nu: rng.gen_range(-2.0..2.0),
                kappa: rng.gen_range(-2.0..2.0),
                rho_cv: rng.gen_range(0.5..3.0),
                theta_ref: 300.0,
            };
            let big_lambda = rng.gen_range(0.0..10.0);
            let w = Complex::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let physical = cw(p.rho_cv)
                * (cw(p.lambda) * w * w * w + cw(p.tau) * w * w + w)
                + cw(big_lambda)
                    * (cw(p.lambda * p.kappa) * w * w + cw(p.tau * p.nu) * w + cw(p.mu));
            let assembled = cw(p.rho_cv) * characteristic_cubic(&p, big_lambda).eval(w);
            assert!(
                (physical - assembled).norm() <= 1e-12 * physical.norm().max(1.0),
                "mismatch {physical} vs {assembled}"
            );
        }
    }

    #[test]
    fn routh_hurwitz_reference_verdicts() {
        let v = routh_hurwitz(CubicCoeffs::new(1.0, 3.0, 3.0, 1.0)).unwrap();
        assert_eq!(v.status, StabilityStatus::Stable);
        assert!(v.witnesses.is_empty(), "{:?}", v.witnesses);

        let v = routh_hurwitz(CubicCoeffs::new(1.0, 2.0, 2.0, 1.0)).unwrap();
        assert_eq!(v.status, StabilityStatus::Stable);

        let v = routh_hurwitz(CubicCoeffs::new(1.0, 1.0, 1.0, 2.0)).unwrap();
        assert_eq!(v.status, StabilityStatus::Unstable);
        assert!(
            v.witnesses.iter().any(|w| w.contains("c2*c1 - c3*c0 = -1")),
            "{:?}",
            v.witnesses
        );

        let v = routh_hurwitz(CubicCoeffs::new(-1.0, -3.0, -3.0, -1.0)).unwrap();
        assert_eq!(
            v.status,
            StabilityStatus::Stable,
            "a common negative sign is stable"
        );

        // (w + 2)(w^2 + 1): imaginary pair, hurwitz product exactly zero.
        let v = routh_hurwitz(CubicCoeffs::new(1.0, 2.0, 1.0, 2.0)).unwrap();
        assert_eq!(v.status, StabilityStatus::Marginal, "{:?}", v.witnesses);

        // w(w + 1)^2: zero root.
        let v = routh_hurwitz(CubicCoeffs::new(1.0, 2.0, 1.0, 0.0)).unwrap();
        assert_eq!(v.status, StabilityStatus::Marginal);

        assert!(matches!(
            routh_hurwitz(CubicCoeffs::new(0.0, 1.0, 1.0, 1.0)),
            Err(Error::DegenerateCubic)
        ));
    }

    #[test]
    fn stability_conditions_selects_regimes() {
        let v = stability_conditions(&mp(1.0, 1.0, 1.0, 1.0, 1.0));
        assert!(v.pass, "{:?}", v.conditions);
        assert_eq!(v.regime, StabilityRegime::PositiveKappaNu);

        let v = stability_conditions(&mp(1.0, 1.0, 1.0, 1.0, -0.1));
        assert!(!v.pass);
        assert!(
            v.conditions
                .iter()
                .any(|c| c.name == "kappa >= 0" && !c.satisfied),
            "{:?}",
            v.conditions
        );

        let v = stability_conditions(&mp(1.0, 1.0, 0.0, 1.0, 1.0));
        assert!(v.pass, "{:?}", v.conditions);
        assert_eq!(v.regime, StabilityRegime::MuZero);

        // The zero-conductivity branch demands kappa and nu strictly positive.
        assert!(!stability_conditions(&mp(1.0, 1.0, 0.0, 1.0, 0.0)).pass);
        assert!(!stability_conditions(&mp(1.0, 1.0, 0.0, 0.0, 1.0)).pass);

        let v = stability_conditions(&mp(1.0, 1.0, 1.0, 0.0, 0.0));
        assert!(!v.pass);
        assert_eq!(v.regime, StabilityRegime::KappaNuZero);

        // kappa = 0: inclusive linear bound lambda mu <= tau^2 nu.
        let v = stability_conditions(&mp(1.0, 2.0, 4.0, 1.0, 0.0));
        assert!(v.pass, "{:?}", v.conditions);
        assert_eq!(v.regime, StabilityRegime::KappaZero);
        assert!(!stability_conditions(&mp(1.0, 2.0, 4.0 + 1e-9, 1.0, 0.0)).pass);

        // nu = 0: inclusive bound mu <= kappa.
        let v = stability_conditions(&mp(1.0, 1.0, 3.0, 0.0, 3.0));
        assert!(v.pass, "{:?}", v.conditions);
        assert_eq!(v.regime, StabilityRegime::NuZero);
        assert!(!stability_conditions(&mp(1.0, 1.0, 3.0000001, 0.0, 3.0)).pass);

        // kappa, nu > 0: the parabola bound is strict.
        assert!(stability_conditions(&mp(1.0, 1.0, 3.99, 1.0, 1.0)).pass);
        assert!(!stability_conditions(&mp(1.0, 1.0, 4.0, 1.0, 1.0)).pass);
        assert!(!stability_conditions(&mp(1.0, 1.0, -0.5, 1.0, 1.0)).pass);
    }

    #[test]
    fn mu_admissibility_matches_closed_forms() {
        let r = mu_admissibility(1.0, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(r.regime, StabilityRegime::PositiveKappaNu);
        assert_eq!(r.hi, 4.0);
        assert!(r.lo_inclusive && !r.hi_inclusive && !r.degenerate);
        assert!(r.contains(0.0) && r.contains(3.999));
        assert!(!r.contains(4.0) && !r.contains(-0.001));

        let r = mu_admissibility(1.0, 2.0, 1.0, 0.0).unwrap();
        assert_eq!(r.regime, StabilityRegime::KappaZero);
        assert_eq!(r.hi, 4.0);
        assert!(!r.lo_inclusive && r.hi_inclusive);
        assert!(r.contains(4.0) && !r.contains(0.0) && !r.contains(4.0000001));

        let r = mu_admissibility(1.0, 1.0, 0.0, 3.0).unwrap();
        assert_eq!(r.regime, StabilityRegime::NuZero);
        assert_eq!(r.hi, 3.0);
        assert!(r.contains(3.0) && !r.contains(3.0000001) && !r.contains(0.0));

        let r = mu_admissibility(1.0, 1.0, 0.0, 0.0).unwrap();
        assert_eq!(r.regime, StabilityRegime::KappaNuZero);
        assert!(r.degenerate);
        assert!(r.contains(0.0) && !r.contains(1e-12) && !r.contains(-1e-12));

        assert!(matches!(
            mu_admissibility(0.0, 1.0, 1.0, 1.0),
            Err(Error::PreconditionViolated { .. })
        ));
        assert!(matches!(
            mu_admissibility(1.0, -1.0, 1.0, 1.0),
            Err(Error::PreconditionViolated { .. })
        ));
        assert!(matches!(
            mu_admissibility(1.0, 1.0, -0.5, 1.0),
            Err(Error::PreconditionViolated { .. })
        ));
    }

    #[test]
    fn region_membership_matches_condition_verdict() {
        // Two independent code paths must agree: interval membership vs
        // the predicate list. The degenerate singleton {0} is the one
        // documented exception (the parameter verdict refuses mu = 0
        // there), so it is skipped.
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let mut compared = 0usize;
        for _ in 0..300 {
            let lambda = rng.gen_range(0.1..3.0);
            let tau = rng.gen_range(0.1..3.0);
            let kappa = if rng.gen_bool(0.3) {
                0.0
            } else {
                rng.gen_range(0.1..3.0)
            };
            let nu = if rng.gen_bool(0.3) {
                0.0
            } else {
                rng.gen_range(0.1..3.0)
            };
            let region = mu_admissibility(lambda, tau, nu, kappa).unwrap();
            let hi = region.hi;
            for mu in [
                0.0,
                0.5 * hi,
                hi * (1.0 - 1e-6),
                hi * (1.0 + 1e-6),
                hi + 1.0,
                -0.25,
            ] {
                if region.degenerate && mu == 0.0 {
                    continue;
                }
                let p = mp(lambda, tau, mu, nu, kappa);
                assert_eq!(
                    region.contains(mu),
                    stability_conditions(&p).pass,
                    "mu={mu} region={region:?}"
                );
                compared += 1;
            }
        }
        println!("membership comparisons: {compared}");
        assert!(compared > 1000);
    }

    #[test]
    fn mu_bound_is_sharp_on_each_side() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let lambda = rng.gen_range(0.05..4.0);
            let tau = rng.gen_range(0.05..4.0);
            let nu = rng.gen_range(0.05..4.0);
            let kappa = rng.gen_range(0.05..4.0);
            let sup = mu_admissibility(lambda, tau, nu, kappa).unwrap().hi;

            // Just inside: positive damping on a dense log grid of weights.
            let p_in = mp(lambda, tau, 0.99 * sup, nu, kappa);
            let mut lt = 1e-6;
            while lt <= 1e6 {
                let q = characteristic_cubic(&p_in, lt).hurwitz_product();
                assert!(q > 0.0, "q({lt}) = {q} at {p_in:?}");
                lt *= 1.2;
            }

            // Just outside: the quadratic's vertex sits at positive weight
            // between its two real roots, where damping fails.
            let p_out = mp(lambda, tau, 1.01 * sup, nu, kappa);
            let a = lambda * kappa * tau * nu;
            let b = tau * tau * nu + lambda * (kappa - p_out.mu);
            let vertex = -b / (2.0 * a);
            assert!(vertex > 0.0, "vertex {vertex} at {p_out:?}");
            let q = characteristic_cubic(&p_out, vertex).hurwitz_product();
            assert!(q < 0.0, "q(vertex) = {q} at {p_out:?}");
        }
    }

    #[test]
    fn oscillatory_tuning_unit_values() {
        // The stored stationary conductivity is ignored by the tuning.
        let mut p = mp(1.0, 1.0, 123.0, 1.0, 1.0);
        let t = oscillatory_tuning(&p, 1.0).unwrap();
        assert_eq!(t.mu, 4.0);
        assert_eq!(t.lambda_tilde, 1.0);
        assert_eq!(t.roots[2], Complex::new(-2.0, 0.0));
        let s2 = 2.0_f64.sqrt();
        assert!((t.roots[0] - Complex::new(0.0, -s2)).norm() < 1e-15);
        assert!((t.roots[1] - Complex::new(0.0, s2)).norm() < 1e-15);

        p.mu = t.mu;
        let c = characteristic_cubic(&p, 1.0);
        for w in t.roots {
            assert!(residual_ok(&c.as_array(), w), "residual at {w}");
        }

        // Only the ratio Lambda_bar / rho_cv matters.
        p.rho_cv = 5.0;
        let t2 = oscillatory_tuning(&p, 5.0).unwrap();
        assert_eq!(t2.mu, 4.0);
        assert_eq!(t2.lambda_tilde, 1.0);

        for bad in [
            oscillatory_tuning(&mp(1.0, 1.0, 0.0, 1.0, 0.0), 1.0),
            oscillatory_tuning(&mp(-1.0, 1.0, 0.0, 1.0, 1.0), 1.0),
            oscillatory_tuning(&mp(1.0, 1.0, 0.0, 1.0, 1.0), 0.0),
        ] {
            assert!(matches!(bad, Err(Error::NoPositiveSolution)));
        }
    }

    #[test]
    fn oscillatory_tuning_parks_roots_on_the_axis() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..200 {
            let mut p = mp(
                rng.gen_range(0.1..3.0),
                rng.gen_range(0.1..3.0),
                0.0,
                rng.gen_range(0.1..3.0),
                rng.gen_range(0.1..3.0),
            );
            p.rho_cv = rng.gen_range(0.5..2.0);
            let bar = rng.gen_range(0.05..20.0);
            let t = oscillatory_tuning(&p, bar).unwrap();
            p.mu = t.mu;
            let c = characteristic_cubic(&p, bar);

            // The tuning zeroes the hurwitz product ...
            let s = c.scale();
            assert!(
                c.hurwitz_product().abs() <= 1e-12 * s * s,
                "product {} at {p:?}",
                c.hurwitz_product()
            );
            // ... the closed-form roots satisfy the cubic ...
            for w in t.roots {
                assert!(residual_ok(&c.as_array(), w), "residual at {w} for {c:?}");
            }
            // ... and the numerically computed pair stays on the axis.
            let roots = mode_roots(c).unwrap();
            let mut pair = 0;
            for w in roots {
                if w.im.abs() > 1e-6 {
                    pair += 1;
                    assert!(
                        w.re.abs() <= MODE_REALITY_REL * w.norm(),
                        "off-axis root {w} for {c:?}"
                    );
                }
            }
            assert_eq!(pair, 2, "expected a conjugate pair for {c:?}");

            assert_eq!(routh_hurwitz(c).unwrap().status, StabilityStatus::Marginal);
        }
    }

    #[test]
    fn mode_root_reference_cases() {
        // w(w + 1)^2, ordered by descending real part.
        let r = mode_roots(CubicCoeffs::new(1.0, 2.0, 1.0, 0.0)).unwrap();
        assert!(r[0].norm() <= 1e-9, "zero root came out {}", r[0]);
        for w in &r[1..] {
            assert!((w - Complex::new(-1.0, 0.0)).norm() <= 1e-6, "double root {w}");
        }

        let mut rng = ChaCha8Rng::seed_from_u64(37);
        for _ in 0..1000 {
            let c = random_cubic(&mut rng);
            for w in mode_roots(c).unwrap() {
                assert!(residual_ok(&c.as_array(), w), "residual at {w} for {c:?}");
            }
        }
    }

    #[test]
    fn verdicts_match_root_signs_on_random_cubics() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let band = RH_MARGINAL_BAND;
        let mut decided = 0usize;
        for _ in 0..10_000 {
            let c = random_cubic(&mut rng);
            let roots = mode_roots(c).unwrap();
            let mut any_right = false;
            let mut any_on_axis = false;
            for w in roots {
                let wb = band * 1.0_f64.max(w.norm());
                if w.re > wb {
                    any_right = true;
                } else if w.re >= -wb {
                    any_on_axis = true;
                }
            }
            if !any_right && any_on_axis {
                continue; // inside the band: marginal by construction
            }
            decided += 1;
            let expected = if any_right {
                StabilityStatus::Unstable
            } else {
                StabilityStatus::Stable
            };
            let got = routh_hurwitz(c).unwrap();
            assert_eq!(got.status, expected, "c = {c:?}, roots = {roots:?}");
        }
        println!("decided cubics: {decided} / 10000");
        assert!(decided > 9900);
    }

    #[test]
    fn verdict_and_roots_invariant_under_positive_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        for _ in 0..200 {
            let c = random_cubic(&mut rng);
            let base_status = routh_hurwitz(c).unwrap().status;
            let base_roots = mode_roots(c).unwrap();
            for s in [3.7e5, 2.3e-6] {
                let cs = CubicCoeffs::new(s * c.c3, s * c.c2, s * c.c1, s * c.c0);
                assert_eq!(routh_hurwitz(cs).unwrap().status, base_status, "scale {s}");
                let scaled_roots = mode_roots(cs).unwrap();
                let mut used = [false; 3];
                for a in base_roots {
                    let (j, d) = scaled_roots
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| !used[*j])
                        .map(|(j, b)| (j, (a - b).norm()))
                        .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
                        .unwrap();
                    used[j] = true;
                    assert!(
                        d <= 1e-9 * 1.0_f64.max(a.norm()),
                        "root drift {d} at scale {s} for {c:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn model_polynomials_match_reference_forms() {
        // Fourier: first-order decay at rate kappa Lambda (unit capacity).
        let m = ModelKind::Fourier(FourierParams { kappa: 2.0 });
        assert_eq!(model_characteristic(&m, 3.0), vec![1.0, 6.0]);
        let r = solve_poly(&model_characteristic(&m, 3.0)).unwrap();
        assert_eq!(r[0], Complex::new(-6.0, 0.0));

        let m = ModelKind::Mcv(McvParams {
            tau: 0.5,
            kappa: 2.0,
        });
        assert_eq!(model_characteristic(&m, 3.0), vec![0.5, 1.0, 6.0]);

        let m = ModelKind::GnIii(GnIiiParams {
            xi: 1.5,
            kappa: 0.75,
        });
        assert_eq!(model_characteristic(&m, 2.0), vec![1.0, 1.5, 3.0]);

        let m = ModelKind::Jeffreys(JeffreysParams {
            tau: 1.25,
            kappa: 2.0,
            zeta: 0.25,
        });
        assert_eq!(
            model_characteristic(&m, 2.0),
            vec![1.25, 1.0 + 2.0 * 1.25 * 0.25, 4.0]
        );

        let m = ModelKind::Quintanilla(QuintanillaParams {
            tau: 0.5,
            xi: 1.5,
            kappa: 0.75,
        });
        assert_eq!(model_characteristic(&m, 2.0), vec![0.5, 1.0, 1.5, 3.0]);

        // Burgers: lambda w^3 + tau w^2 + w + Lambda (kappa + tau zeta w),
        // grouped vs ungrouped evaluation.
        let m = ModelKind::Burgers(BurgersParams {
            lambda: 0.5,
            tau: 1.25,
            kappa: 2.0,
            zeta: 0.25,
        });
        let coeffs = model_characteristic(&m, 2.0);
        assert_eq!(coeffs, vec![0.5, 1.25, 1.0 + 2.0 * 1.25 * 0.25, 4.0]);
        let w = Complex::new(0.37, -1.2);
        let cw = |x: f64| Complex::new(x, 0.0);
        let ungrouped = cw(0.5) * w * w * w
            + cw(1.25) * w * w
            + w
            + cw(2.0) * (cw(2.0) + cw(1.25 * 0.25) * w);
        assert!((poly_eval(&coeffs, w) - ungrouped).norm() <= 1e-12 * ungrouped.norm().max(1.0));

        // The full conductor delegates to the cubic, heat capacity included.
        let mut p = mp(0.5, 0.25, 2.0, 1.5, 3.0);
        p.rho_cv = 2.0;
        let m = ModelKind::Lso(p);
        assert_eq!(
            model_characteristic(&m, 3.0),
            characteristic_cubic(&p, 3.0).as_array().to_vec()
        );
    }

    #[test]
    fn degenerate_models_match_their_reductions() {
        let cases = [
            ModelKind::Mcv(McvParams {
                tau: 0.0,
                kappa: 2.0,
            }),
            ModelKind::Quintanilla(QuintanillaParams {
                tau: 0.0,
                xi: 1.5,
                kappa: 0.75,
            }),
            ModelKind::Burgers(BurgersParams {
                lambda: 0.0,
                tau: 1.25,
                kappa: 2.0,
                zeta: 0.25,
            }),
            ModelKind::Lso(mp(0.0, 1.25, 2.0, 0.25, 0.6)),
        ];
        for m in cases {
            let reduced = m.reduce().unwrap();
            assert_eq!(
                model_characteristic(&m, 2.0),
                model_characteristic(&reduced, 2.0),
                "{m:?} vs {reduced:?}"
            );
        }
    }

    #[test]
    fn stability_reports_serialize() {
        let r = mu_admissibility(1.0, 1.0, 1.0, 1.0).unwrap();
        let j = serde_json::to_value(r).unwrap();
        assert_eq!(j["regime"], "positive_kappa_nu");
        assert_eq!(j["hi"], 4.0);

        let v = routh_hurwitz(CubicCoeffs::new(1.0, 1.0, 1.0, 2.0)).unwrap();
        let j = serde_json::to_value(&v).unwrap();
        assert_eq!(j["status"], "unstable");

        let pv = stability_conditions(&mp(1.0, 1.0, 1.0, 1.0, 1.0));
        let j = serde_json::to_value(&pv).unwrap();
        assert_eq!(j["regime"], "positive_kappa_nu");
        assert_eq!(j["pass"], true);
    }

    #[test]
    fn works_in_single_precision() {
        let p = MaterialParams::<f32> {
            lambda: 1.0,
            tau: 1.0,
            mu: 1.0,
            nu: 1.0,
            kappa: 1.0,
            rho_cv: 1.0,
            theta_ref: 300.0,
        };
        let c = characteristic_cubic(&p, 1.0f32);
        assert_eq!(c.as_array(), [1.0f32, 2.0, 2.0, 1.0]);
        assert_eq!(routh_hurwitz(c).unwrap().status, StabilityStatus::Stable);
    }
}
