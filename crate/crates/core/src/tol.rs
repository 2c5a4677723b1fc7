//! Numerical tolerances used across the crate.
//!
//! Every acceptance-style check compares against one of these constants so
//! the thresholds live in exactly one place. All values are relative unless
//! stated otherwise; "scale" means the natural magnitude of the quantity
//! being tested (sum of term magnitudes, Frobenius norm, largest
//! coefficient, ...).

/// Entropy-equality residual: `|residual| <= IDENTITY_REL_TOL * scale` where
/// scale sums the magnitudes of the contributing terms.
pub const IDENTITY_REL_TOL: f64 = 1e-10;

/// Step factor for central-difference gradient checks:
/// `h = FD_STEP_FACTOR * max(1, |component|)`.
pub const FD_STEP_FACTOR: f64 = 1e-6;

/// Principal-minor sign test: order-k minors must be
/// `>= -PSD_REL_TOL * max(1, ||A||_F^k)`.
pub const PSD_REL_TOL: f64 = 1e-10;

/// Acceptance threshold for the coefficient feasibility search:
/// smallest eigenvalue `>= -SEARCH_ACCEPT_REL * max(1, ||A||_F)`.
pub const SEARCH_ACCEPT_REL: f64 = 1e-9;

/// Marginality band for Routh-Hurwitz quantities and root real parts,
/// relative to the corresponding coefficient/root scale.
pub const RH_MARGINAL_BAND: f64 = 1e-9;

/// Two polynomial roots closer than `ROOT_CONFLUENCE_REL * max(1, |w|)` are
/// treated as a multiple root and re-polished jointly. A double root is
/// only resolvable to about sqrt(machine epsilon), so the band sits a
/// decade above that.
pub const ROOT_CONFLUENCE_REL: f64 = 1e-7;

/// Residual bound for polished roots:
/// `|p(w)| <= ROOT_RESIDUAL_REL * max_coeff * max(1, |w|)^degree`.
pub const ROOT_RESIDUAL_REL: f64 = 1e-10;

/// Modal amplitudes reconstructed from real data must be real to this
/// relative level; larger imaginary residue flags an ill-conditioned solve.
pub const MODE_REALITY_REL: f64 = 1e-12;

/// Discrete orthonormality defect allowed for the eigenfunction set.
pub const ORTHONORMALITY_TOL: f64 = 1e-12;

/// Dirichlet initial profiles must match the boundary temperature at the
/// endpoints to this relative level. Loose enough for user-sampled data,
/// tight enough to reject genuinely inconsistent boundary values.
pub const DIRICHLET_COMPAT_TOL: f64 = 1e-6;

/// Distinct characteristic-root groups separated by less than
/// `VANDERMONDE_SEP_REL * max(1, |w|)` make the modal coefficient solve
/// ill-conditioned (the confluence band is two decades below, so such a
/// pair is neither merged nor resolvable to working accuracy).
pub const VANDERMONDE_SEP_REL: f64 = 1e-5;

/// Local error target per step of the adaptive finite-difference reference
/// integrator.
pub const FD_LOCAL_ERROR: f64 = 1e-10;

/// Exact-reduction agreement (e.g. the second-order model at kappa = 0
/// against its first-order limit) in relative sup norm.
pub const REDUCTION_MATCH_TOL: f64 = 1e-12;

/// Relative tolerance for the parameter-equality branches of the
/// classifier (cases such as mu = kappa or lambda pinned to a closed form).
/// Anchored at `max(1, |a|, |b|)` so exact-zero branches stay absolute.
pub const CLASSIFY_EQ_REL: f64 = 1e-12;

/// Significant digits for every numeric field written to CSV or report
/// output (f64 round-trips at 17).
pub const OUTPUT_SIG_DIGITS: usize = 17;
