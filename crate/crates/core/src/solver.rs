//! One-dimensional initial-boundary-value solver.
//!
//! The temperature field on a rod is expanded in Laplacian eigenfunctions
//! (sines for fixed-temperature ends, cosines plus a constant for insulated
//! ends). Each modal amplitude obeys the model's characteristic ODE of
//! degree one to three and is evolved exactly through its characteristic
//! roots, including confluent (repeated-root) cases. An independent
//! method-of-lines finite-difference integrator provides a reference
//! solution for cross-validation.
//!
//! Conventions:
//! - Dirichlet problems are solved in deviation form: the series represents
//!   `theta - theta_env` and the boundary value is added back on synthesis.
//!   Neumann problems expand the absolute temperature; the constant mode
//!   carries the mean, which an insulated rod conserves.
//! - Initial modal rates come from the energy balance
//!   `rho_cv * theta_dot = -dq/dX`: the flux profile is projected against
//!   the eigenfunction derivative (integration by parts), never
//!   differentiated numerically.
//! - Non-smooth initial data is accepted as-is; a truncated eigenfunction
//!   series of such data shows the usual Gibbs oscillations near jumps,
//!   which is inherent to the representation and not detected here. The
//!   reported `truncation_tail` indicates how much energy sits in the last
//!   resolved modes.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::ModelKind;
use crate::roots::solve_poly;
use crate::scalar::Scalar;
use crate::stability::model_characteristic;
use crate::tol;

/// Default mode count used by the command-line driver.
pub const DEFAULT_MODES: usize = 64;

/// Boundary condition applied at both ends of the rod.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Boundary<T = f64> {
    /// Both endpoints held at `theta_env`.
    Dirichlet { theta_env: T },
    /// Insulated endpoints: zero flux through the walls.
    Neumann,
}

/// Interval `[0, length]` together with its boundary condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain1D<T = f64> {
    pub length: T,
    pub boundary: Boundary<T>,
}

impl<T: Scalar> Domain1D<T> {
    pub fn new(length: T, boundary: Boundary<T>) -> Result<Self> {
        let d = Domain1D { length, boundary };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > T::zero()) || !self.length.is_finite() {
            return Err(Error::InvalidDomain(format!(
                "length must be positive and finite, got {}",
                self.length
            )));
        }
        if let Boundary::Dirichlet { theta_env } = self.boundary {
            if !theta_env.is_finite() {
                return Err(Error::InvalidDomain(format!(
                    "theta_env must be finite, got {theta_env}"
                )));
            }
        }
        Ok(())
    }

    /// Baseline of the modal expansion: `theta_env` for Dirichlet (the
    /// series holds the deviation), zero for Neumann (the constant mode
    /// holds the mean).
    pub fn theta_base(&self) -> T {
        match self.boundary {
            Boundary::Dirichlet { theta_env } => theta_env,
            Boundary::Neumann => T::zero(),
        }
    }
}

/// Sampled initial profiles. All profiles share `grid`, which must be
/// strictly ascending and span `[0, length]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialData<T = f64> {
    /// Sample positions.
    pub grid: Vec<T>,
    /// Absolute temperature at the sample positions.
    pub theta0: Vec<T>,
    /// Heat flux at the sample positions.
    pub q0: Vec<T>,
    /// Flux rate at the sample positions; required only by models whose
    /// modal ODE is third order, ignored otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qdot0: Option<Vec<T>>,
}

impl<T: Scalar> InitialData<T> {
    /// Uniform temperature, zero flux, zero flux rate.
    pub fn equilibrium(grid: Vec<T>, theta: T) -> Self {
        let n = grid.len();
        InitialData {
            grid,
            theta0: vec![theta; n],
            q0: vec![T::zero(); n],
            qdot0: Some(vec![T::zero(); n]),
        }
    }

    pub fn validate(&self, d: &Domain1D<T>) -> Result<()> {
        let n = self.grid.len();
        if n < 2 {
            return Err(Error::InvalidProfile(
                "need at least two grid samples".into(),
            ));
        }
        let qdot_len_ok = self.qdot0.as_ref().map_or(true, |v| v.len() == n);
        if self.theta0.len() != n || self.q0.len() != n || !qdot_len_ok {
            return Err(Error::InvalidProfile(
                "profiles must share the grid length".into(),
            ));
        }
        for w in self.grid.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::InvalidProfile(format!(
                    "grid must be strictly ascending, got {} after {}",
                    w[1], w[0]
                )));
            }
        }
        let span_tol = T::of(1e-9) * T::one().max(d.length);
        if self.grid[0].abs() > span_tol || (self.grid[n - 1] - d.length).abs() > span_tol {
            return Err(Error::InvalidProfile(format!(
                "grid must span [0, {}], got [{}, {}]",
                d.length,
                self.grid[0],
                self.grid[n - 1]
            )));
        }
        for v in self
            .theta0
            .iter()
            .chain(&self.q0)
            .chain(self.qdot0.iter().flatten())
        {
            if !v.is_finite() {
                return Err(Error::InvalidProfile("profiles must be finite".into()));
            }
        }
        if let Boundary::Dirichlet { theta_env } = d.boundary {
            let ctol = T::of(tol::DIRICHLET_COMPAT_TOL) * T::one().max(theta_env.abs());
            if (self.theta0[0] - theta_env).abs() > ctol
                || (self.theta0[n - 1] - theta_env).abs() > ctol
            {
                return Err(Error::InvalidProfile(format!(
                    "Dirichlet data must match theta_env = {theta_env} at the endpoints"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum ModeKind {
    Sine,
    Cosine,
    Constant,
}

/// One Laplacian eigenfunction with unit L2 norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenMode<T = f64> {
    /// Mode index: 1-based for Dirichlet, 0-based (constant first) for
    /// Neumann.
    pub n: usize,
    /// Spatial eigenvalue `Lambda_n = (n pi / length)^2`.
    pub lambda: T,
    kind: ModeKind,
    length: T,
}

impl<T: Scalar> EigenMode<T> {
    /// `Y_n(x)`.
    pub fn eval(&self, x: T) -> T {
        let norm = (T::two() / self.length).sqrt();
        match self.kind {
            ModeKind::Constant => (T::one() / self.length).sqrt(),
            ModeKind::Sine => norm * (self.wavenumber() * x).sin(),
            ModeKind::Cosine => norm * (self.wavenumber() * x).cos(),
        }
    }

    /// `Y_n'(x)`.
    pub fn eval_deriv(&self, x: T) -> T {
        let norm = (T::two() / self.length).sqrt();
        let k = self.wavenumber();
        match self.kind {
            ModeKind::Constant => T::zero(),
            ModeKind::Sine => norm * k * (k * x).cos(),
            ModeKind::Cosine => -(norm * k * (k * x).sin()),
        }
    }

    fn wavenumber(&self) -> T {
        T::of(self.n as f64) * T::of(std::f64::consts::PI) / self.length
    }
}

/// Modal initial state `(T_n(0), T_n'(0), T_n''(0))` derived from the
/// sampled profiles through the energy balance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModalInit<T = f64> {
    pub value: T,
    pub rate: T,
    pub accel: T,
}

impl<T: Scalar> ModalInit<T> {
    /// First `k` of (value, rate, accel); `k` is the model's temporal order.
    pub fn prefix(&self, k: usize) -> Vec<T> {
        [self.value, self.rate, self.accel][..k].to_vec()
    }
}

/// One summand `coeff * t^power * exp(root * t)` of a modal amplitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModalTerm<T = f64> {
    pub coeff: Complex<T>,
    pub root: Complex<T>,
    /// Nonzero only for confluent roots.
    pub power: u32,
}

impl<T: Scalar> ModalTerm<T> {
    pub fn eval(&self, t: T) -> Complex<T> {
        (self.root.scale(t)).exp().scale(t.powi(self.power as i32)) * self.coeff
    }
}

/// Fully resolved evolution of one mode.
#[derive(Clone, Debug)]
pub struct ModeSolution<T = f64> {
    pub n: usize,
    pub lambda: T,
    /// Characteristic roots, repeated roots listed with multiplicity.
    pub roots: Vec<Complex<T>>,
    /// Amplitudes against the basis `t^power * exp(root * t)`.
    pub terms: Vec<ModalTerm<T>>,
}

impl<T: Scalar> ModeSolution<T> {
    /// `T_n(t)`, real for real initial data.
    pub fn evaluate(&self, t: T) -> T {
        real_combination(&self.terms, t)
    }

    /// Largest real part over the characteristic roots.
    pub fn max_re(&self) -> T {
        self.roots
            .iter()
            .map(|w| w.re)
            .fold(T::neg_infinity(), T::max)
    }
}

/// Temperature on a space-time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemperatureField<T = f64> {
    pub grid: Vec<T>,
    pub times: Vec<T>,
    /// `values[k][j]` is the temperature at `times[k]`, `grid[j]`.
    pub values: Vec<Vec<T>>,
    /// L2 norm of the initial amplitudes of the last eight resolved modes;
    /// a large value means the mode count does not resolve the data. Zero
    /// for finite-difference fields.
    pub truncation_tail: T,
}

/// First `count` eigenfunctions of the domain, eigenvalues ascending.
///
/// Dirichlet yields `sqrt(2/L) sin(n pi x / L)` for `n = 1..=count`;
/// Neumann yields the constant `1/sqrt(L)` followed by
/// `sqrt(2/L) cos(n pi x / L)` for `n = 1..count`.
pub fn eigen_modes<T: Scalar>(d: &Domain1D<T>, count: usize) -> Vec<EigenMode<T>> {
    debug_assert!(count >= 1, "need at least one mode");
    let mk = |n: usize, kind: ModeKind| {
        let k = T::of(n as f64) * T::of(std::f64::consts::PI) / d.length;
        EigenMode {
            n,
            lambda: k * k,
            kind,
            length: d.length,
        }
    };
    match d.boundary {
        Boundary::Dirichlet { .. } => (1..=count).map(|n| mk(n, ModeKind::Sine)).collect(),
        Boundary::Neumann => (0..count)
            .map(|n| {
                mk(
                    n,
                    if n == 0 {
                        ModeKind::Constant
                    } else {
                        ModeKind::Cosine
                    },
                )
            })
            .collect(),
    }
}

/// Project the initial profiles onto the given modes.
///
/// `T_n(0)` is the quadrature of the temperature deviation against `Y_n`.
/// The rates come from the energy balance: `theta_dot = -(dq/dX)/rho_cv`
/// projects, after integration by parts, to
/// `(integral q Y_n' - [q Y_n])/rho_cv`, and the acceleration uses `qdot0`
/// the same way. Models of temporal order below three ignore `qdot0`;
/// order-three models require it.
pub fn project_initial<T: Scalar>(
    model: &ModelKind<T>,
    d: &Domain1D<T>,
    ic: &InitialData<T>,
    modes: &[EigenMode<T>],
) -> Result<Vec<ModalInit<T>>> {
    d.validate()?;
    ic.validate(d)?;
    let order = model_order(model);
    if order >= 3 && ic.qdot0.is_none() {
        return Err(Error::MissingInitialData {
            what: "qdot0 (initial flux rate, required by third-order models)",
        });
    }
    let rho_cv = model_rho_cv(model);
    let base = d.theta_base();
    let dev: Vec<T> = ic.theta0.iter().map(|&v| v - base).collect();
    let mut out = Vec::with_capacity(modes.len());
    for m in modes {
        let value = trapezoid_weighted(&ic.grid, &dev, |x| m.eval(x));
        let rate = if order >= 2 {
            rate_projection(&ic.grid, &ic.q0, m, rho_cv)
        } else {
            T::zero()
        };
        let accel = if order >= 3 {
            rate_projection(&ic.grid, ic.qdot0.as_ref().expect("checked above"), m, rho_cv)
        } else {
            T::zero()
        };
        out.push(ModalInit { value, rate, accel });
    }
    Ok(out)
}

/// Evaluate one modal amplitude at time `t` from its characteristic roots
/// and initial derivatives `ics = (T(0), T'(0), ...)`, one entry per root.
///
/// Roots within `ROOT_CONFLUENCE_REL` of each other are merged and handled
/// with the confluent basis `t^j exp(w t)`. Distinct root groups closer
/// than `VANDERMONDE_SEP_REL` leave the coefficient system ill-conditioned
/// and are rejected.
pub fn evolve_mode<T: Scalar>(roots: &[Complex<T>], ics: &[T], t: T) -> Result<T> {
    if roots.is_empty() || roots.len() > 3 {
        return Err(Error::PreconditionViolated {
            op: "evolve_mode",
            what: format!("supported degrees are 1..=3, got {}", roots.len()),
        });
    }
    if ics.len() != roots.len() {
        return Err(Error::PreconditionViolated {
            op: "evolve_mode",
            what: format!(
                "{} roots need {} initial derivatives, got {}",
                roots.len(),
                roots.len(),
                ics.len()
            ),
        });
    }
    let terms = modal_terms(roots, ics)?;
    Ok(real_combination(&terms, t))
}

/// Project the initial data and resolve every modal amplitude.
///
/// Unless `allow_unstable` is set, a mode with a characteristic root in the
/// open right half plane (beyond the marginal band) aborts with
/// [`Error::UnstableParameters`]. The parameter-level criterion over all
/// mode weights is [`crate::stability_conditions`]; the gate here checks
/// exactly the modes being summed.
pub fn solve_modes<T: Scalar>(
    model: &ModelKind<T>,
    d: &Domain1D<T>,
    ic: &InitialData<T>,
    n_modes: usize,
    allow_unstable: bool,
) -> Result<Vec<ModeSolution<T>>> {
    let modes = eigen_modes(d, n_modes);
    let inits = project_initial(model, d, ic, &modes)?;
    let band = T::of(tol::RH_MARGINAL_BAND);
    let mut out = Vec::with_capacity(modes.len());
    for (m, init) in modes.iter().zip(&inits) {
        let coeffs = model_characteristic(model, m.lambda);
        let roots = solve_poly(&coeffs)?;
        if !allow_unstable {
            let unstable = roots.iter().any(|w| w.re > band * T::one().max(w.norm()));
            if unstable {
                let max_re = roots
                    .iter()
                    .map(|w| w.re)
                    .fold(T::neg_infinity(), T::max);
                return Err(Error::UnstableParameters {
                    mode: m.n,
                    lambda: m.lambda.to_f64().unwrap_or(f64::NAN),
                    max_re: max_re.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        let ics = init.prefix(coeffs.len() - 1);
        let terms = modal_terms(&roots, &ics)?;
        out.push(ModeSolution {
            n: m.n,
            lambda: m.lambda,
            roots,
            terms,
        });
    }
    Ok(out)
}

/// Evolve the initial data and synthesize the temperature on `ic.grid` at
/// the requested times: `theta = base + sum_n Y_n(X) T_n(t)`, summed in
/// ascending mode order so the result is reproducible bit for bit.
pub fn simulate<T: Scalar>(
    model: &ModelKind<T>,
    d: &Domain1D<T>,
    ic: &InitialData<T>,
    times: &[T],
    n_modes: usize,
    allow_unstable: bool,
) -> Result<TemperatureField<T>> {
    validate_times("simulate", times)?;
    let sols = solve_modes(model, d, ic, n_modes, allow_unstable)?;
    let modes = eigen_modes(d, n_modes);
    let base = d.theta_base();
    let shapes: Vec<Vec<T>> = modes
        .iter()
        .map(|m| ic.grid.iter().map(|&x| m.eval(x)).collect())
        .collect();
    let mut values = Vec::with_capacity(times.len());
    for &t in times {
        let amps: Vec<T> = sols.iter().map(|s| s.evaluate(t)).collect();
        let row: Vec<T> = (0..ic.grid.len())
            .map(|j| {
                let mut acc = base;
                for (shape, &a) in shapes.iter().zip(&amps) {
                    acc += shape[j] * a;
                }
                acc
            })
            .collect();
        values.push(row);
    }
    let split = sols.len().saturating_sub(8);
    let tail = sols[split..]
        .iter()
        .map(|s| {
            let v = s.evaluate(T::zero());
            v * v
        })
        .sum::<T>()
        .sqrt();
    Ok(TemperatureField {
        grid: ic.grid.clone(),
        times: times.to_vec(),
        values,
        truncation_tail: tail,
    })
}

/// Independent finite-difference reference solution.
///
/// Method of lines on a staggered grid: temperature at `grid_n + 1` nodes,
/// flux (and flux rate) at the `grid_n` midpoints, so every spatial
/// derivative is a second-order central difference and the flux needs no
/// boundary condition of its own. Dirichlet pins the end nodes; Neumann
/// reflects the flux at the walls. Time integration is adaptive explicit
/// Runge-Kutta (Dormand-Prince 5(4)) at local error `FD_LOCAL_ERROR`.
/// Degenerate parameters (e.g. tau = 0) are first reduced to the
/// lower-order model they equal.
pub fn fd_reference<T: Scalar>(
    model: &ModelKind<T>,
    d: &Domain1D<T>,
    ic: &InitialData<T>,
    times: &[T],
    grid_n: usize,
) -> Result<TemperatureField<T>> {
    d.validate()?;
    ic.validate(d)?;
    validate_times("fd_reference", times)?;
    if grid_n < 16 {
        return Err(Error::PreconditionViolated {
            op: "fd_reference",
            what: format!("grid_n must be at least 16, got {grid_n}"),
        });
    }
    let (form, rho_cv) = fd_form(model);
    if matches!(form, FdForm::Order3 { .. }) && ic.qdot0.is_none() {
        return Err(Error::MissingInitialData {
            what: "qdot0 (initial flux rate, required by third-order models)",
        });
    }
    let mids = grid_n;
    let nodes = grid_n + 1;
    let cells = T::of(grid_n as f64);
    let h = d.length / cells;
    let node_x: Vec<T> = (0..nodes)
        .map(|i| d.length * T::of(i as f64) / cells)
        .collect();
    let mid_x: Vec<T> = (0..mids)
        .map(|i| d.length * (T::of(i as f64) + T::half()) / cells)
        .collect();

    let mut y0: Vec<T> = node_x
        .iter()
        .map(|&x| lerp_sample(&ic.grid, &ic.theta0, x))
        .collect();
    if let Boundary::Dirichlet { theta_env } = d.boundary {
        y0[0] = theta_env;
        y0[nodes - 1] = theta_env;
    }
    if !matches!(form, FdForm::Order1 { .. }) {
        y0.extend(mid_x.iter().map(|&x| lerp_sample(&ic.grid, &ic.q0, x)));
    }
    if matches!(form, FdForm::Order3 { .. }) {
        let qd = ic.qdot0.as_ref().expect("checked above");
        y0.extend(mid_x.iter().map(|&x| lerp_sample(&ic.grid, qd, x)));
    }

    let mut sys = FdSystem {
        form,
        rho_cv,
        boundary: d.boundary,
        h,
        nodes,
        mids,
        g0: vec![T::zero(); mids],
        g1: vec![T::zero(); mids],
        g2: vec![T::zero(); mids],
        tdd: vec![T::zero(); nodes],
        qalg: vec![T::zero(); mids],
    };
    let states = dopri45(
        &mut |y: &[T], dy: &mut [T]| sys.rhs(y, dy),
        &y0,
        times,
        T::of(tol::FD_LOCAL_ERROR),
    )?;
    let values = states.into_iter().map(|s| s[..nodes].to_vec()).collect();
    Ok(TemperatureField {
        grid: node_x,
        times: times.to_vec(),
        values,
        truncation_tail: T::zero(),
    })
}

fn validate_times<T: Scalar>(op: &'static str, times: &[T]) -> Result<()> {
    if let Some(&t0) = times.first() {
        if !(t0 >= T::zero()) {
            return Err(Error::PreconditionViolated {
                op,
                what: format!("times must be nonnegative, got {t0}"),
            });
        }
    }
    for w in times.windows(2) {
        if !(w[1] >= w[0]) {
            return Err(Error::PreconditionViolated {
                op,
                what: format!("times must be ascending, got {} after {}", w[1], w[0]),
            });
        }
    }
    Ok(())
}

/// Heat-capacity density entering the energy balance: the full model
/// carries its own, the reduced models are stated per unit capacity.
fn model_rho_cv<T: Scalar>(model: &ModelKind<T>) -> T {
    match model {
        ModelKind::Lso(p) => {
            debug_assert!(p.rho_cv > T::zero(), "rho_cv must be positive");
            p.rho_cv
        }
        _ => T::one(),
    }
}

/// Temporal order of the modal ODE after leading-coefficient trim.
fn model_order<T: Scalar>(model: &ModelKind<T>) -> usize {
    model_characteristic(model, T::one()).len() - 1
}

/// Composite trapezoid of `vals * w(grid)` over the (possibly nonuniform)
/// grid. On a uniform grid the rule is discretely orthogonal for the
/// eigenfunction products, so band-limited data projects exactly.
fn trapezoid_weighted<T: Scalar>(grid: &[T], vals: &[T], mut w: impl FnMut(T) -> T) -> T {
    let mut acc = T::zero();
    let mut prev = vals[0] * w(grid[0]);
    for i in 1..grid.len() {
        let cur = vals[i] * w(grid[i]);
        acc += (grid[i] - grid[i - 1]) * (prev + cur) * T::half();
        prev = cur;
    }
    acc
}

/// `(integral q Y' - [q Y]_0^L) / rho_cv`: the modal rate induced by a flux
/// profile through the energy balance, with the spatial derivative moved
/// onto the eigenfunction.
fn rate_projection<T: Scalar>(grid: &[T], q: &[T], mode: &EigenMode<T>, rho_cv: T) -> T {
    let integral = trapezoid_weighted(grid, q, |x| mode.eval_deriv(x));
    let last = grid.len() - 1;
    let boundary = q[last] * mode.eval(grid[last]) - q[0] * mode.eval(grid[0]);
    (integral - boundary) / rho_cv
}

/// Piecewise-linear sample of `(grid, vals)` at `x`, clamped to the ends.
fn lerp_sample<T: Scalar>(grid: &[T], vals: &[T], x: T) -> T {
    let last = grid.len() - 1;
    if x <= grid[0] {
        return vals[0];
    }
    if x >= grid[last] {
        return vals[last];
    }
    let mut lo = 0usize;
    let mut hi = last;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if grid[mid] <= x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let f = (x - grid[lo]) / (grid[hi] - grid[lo]);
    vals[lo] + f * (vals[hi] - vals[lo])
}

fn real_combination<T: Scalar>(terms: &[ModalTerm<T>], t: T) -> T {
    let mut acc = Complex::new(T::zero(), T::zero());
    let mut scale = T::one();
    for term in terms {
        let v = term.eval(t);
        acc = acc + v;
        scale = scale.max(v.norm());
    }
    debug_assert!(
        acc.im.abs() <= T::of(tol::MODE_REALITY_REL) * scale,
        "modal value should be real for real data"
    );
    acc.re
}

/// Solve for the term coefficients from the initial derivatives. The cases
/// (distinct, double, triple) are closed forms of the confluent Vandermonde
/// system for degrees one to three.
fn modal_terms<T: Scalar>(roots: &[Complex<T>], ics: &[T]) -> Result<Vec<ModalTerm<T>>> {
    let groups = group_roots(roots);
    let scale = roots.iter().map(|w| w.norm()).fold(T::one(), T::max);
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            let sep = (groups[i].0 - groups[j].0).norm();
            if sep < T::of(tol::VANDERMONDE_SEP_REL) * scale {
                return Err(Error::IllConditionedSystem {
                    detail: format!(
                        "roots {} and {} are separated by {sep}: too far apart to merge, \
                         too close to resolve",
                        groups[i].0, groups[j].0
                    ),
                });
            }
        }
    }
    let c = |k: usize| Complex::new(ics[k], T::zero());
    let term = |coeff: Complex<T>, root: Complex<T>, power: u32| ModalTerm { coeff, root, power };
    let terms = match (roots.len(), groups.as_slice()) {
        (1, [(w, 1)]) => vec![term(c(0), *w, 0)],
        (2, [(a, 1), (b, 1)]) => {
            let c1 = (c(1) - *b * c(0)) / (*a - *b);
            vec![term(c1, *a, 0), term(c(0) - c1, *b, 0)]
        }
        (2, [(w, 2)]) => vec![term(c(0), *w, 0), term(c(1) - *w * c(0), *w, 1)],
        (3, [(a, 1), (b, 1), (d, 1)]) => {
            let part = |a: Complex<T>, b: Complex<T>, d: Complex<T>| {
                (c(2) - (b + d) * c(1) + b * d * c(0)) / ((a - b) * (a - d))
            };
            vec![
                term(part(*a, *b, *d), *a, 0),
                term(part(*b, *a, *d), *b, 0),
                term(part(*d, *a, *b), *d, 0),
            ]
        }
        (3, [(w, 3)]) => {
            let two = Complex::new(T::two(), T::zero());
            let c3 = (c(2) - two * *w * c(1) + *w * *w * c(0)) / two;
            vec![
                term(c(0), *w, 0),
                term(c(1) - *w * c(0), *w, 1),
                term(c3, *w, 2),
            ]
        }
        (3, _) => {
            // one double root a, one simple root b
            let (a, b) = if groups[0].1 == 2 {
                (groups[0].0, groups[1].0)
            } else {
                (groups[1].0, groups[0].0)
            };
            let two = Complex::new(T::two(), T::zero());
            let delta = a - b;
            let cb = (c(2) - two * a * c(1) + a * a * c(0)) / (delta * delta);
            let ca1 = c(0) - cb;
            let ca2 = c(1) - a * c(0) + delta * cb;
            vec![term(ca1, a, 0), term(ca2, a, 1), term(cb, b, 0)]
        }
        _ => unreachable!("degree checked by the caller"),
    };
    Ok(terms)
}

fn group_roots<T: Scalar>(roots: &[Complex<T>]) -> Vec<(Complex<T>, usize)> {
    let mut groups: Vec<(Complex<T>, usize)> = Vec::new();
    for &w in roots {
        let gtol = T::of(tol::ROOT_CONFLUENCE_REL) * T::one().max(w.norm());
        match groups.iter_mut().find(|g| (g.0 - w).norm() <= gtol) {
            Some(g) => g.1 += 1,
            None => groups.push((w, 1)),
        }
    }
    groups
}

/// Normalized flux-rate form of a model for the finite-difference system,
/// produced after exact reduction so every divisor is nonzero.
#[derive(Clone, Copy, Debug)]
enum FdForm<T> {
    /// `theta_dot = -div(-kappa grad theta) / rho_cv`.
    Order1 { kappa: T },
    /// `q_dot = aq q + ag grad theta + agd grad theta_dot`.
    Order2 { aq: T, ag: T, agd: T },
    /// `q_ddot = bq q + bqd q_dot + bg grad theta + bgd grad theta_dot
    ///  + bgdd grad theta_ddot`.
    Order3 { bq: T, bqd: T, bg: T, bgd: T, bgdd: T },
}

fn fd_form<T: Scalar>(model: &ModelKind<T>) -> (FdForm<T>, T) {
    let mut m = *model;
    while let Ok(r) = m.reduce() {
        m = r;
    }
    let one = T::one();
    match m {
        ModelKind::Fourier(p) => (FdForm::Order1 { kappa: p.kappa }, one),
        ModelKind::Mcv(p) => (
            FdForm::Order2 {
                aq: -(one / p.tau),
                ag: -(p.kappa / p.tau),
                agd: T::zero(),
            },
            one,
        ),
        ModelKind::GnIii(p) => (
            FdForm::Order2 {
                aq: T::zero(),
                ag: -p.xi,
                agd: -p.kappa,
            },
            one,
        ),
        ModelKind::Jeffreys(p) => (
            FdForm::Order2 {
                aq: -(one / p.tau),
                ag: -(p.kappa / p.tau),
                agd: -p.zeta,
            },
            one,
        ),
        ModelKind::Quintanilla(p) => (
            FdForm::Order3 {
                bq: T::zero(),
                bqd: -(one / p.tau),
                bg: -(p.xi / p.tau),
                bgd: -(p.kappa / p.tau),
                bgdd: T::zero(),
            },
            one,
        ),
        ModelKind::Burgers(p) => (
            FdForm::Order3 {
                bq: -(one / p.lambda),
                bqd: -(p.tau / p.lambda),
                bg: -(p.kappa / p.lambda),
                bgd: -(p.tau * p.zeta / p.lambda),
                bgdd: T::zero(),
            },
            one,
        ),
        ModelKind::Lso(p) => (
            FdForm::Order3 {
                bq: -(one / p.lambda),
                bqd: -(p.tau / p.lambda),
                bg: -(p.mu / p.lambda),
                bgd: -(p.tau * p.nu / p.lambda),
                bgdd: -p.kappa,
            },
            p.rho_cv,
        ),
    }
}

struct FdSystem<T: Scalar> {
    form: FdForm<T>,
    rho_cv: T,
    boundary: Boundary<T>,
    h: T,
    nodes: usize,
    mids: usize,
    g0: Vec<T>,
    g1: Vec<T>,
    g2: Vec<T>,
    tdd: Vec<T>,
    qalg: Vec<T>,
}

impl<T: Scalar> FdSystem<T> {
    fn state_len(&self) -> usize {
        match self.form {
            FdForm::Order1 { .. } => self.nodes,
            FdForm::Order2 { .. } => self.nodes + self.mids,
            FdForm::Order3 { .. } => self.nodes + 2 * self.mids,
        }
    }

    fn rhs(&mut self, y: &[T], dy: &mut [T]) {
        debug_assert_eq!(y.len(), self.state_len());
        let nodes = self.nodes;
        let mids = self.mids;
        match self.form {
            FdForm::Order1 { kappa } => {
                let theta = &y[..nodes];
                grad_into(theta, self.h, &mut self.g0);
                for i in 0..mids {
                    self.qalg[i] = -(kappa * self.g0[i]);
                }
                energy_rate_into(&self.qalg, self.h, self.rho_cv, &self.boundary, dy);
            }
            FdForm::Order2 { aq, ag, agd } => {
                let (theta, q) = y.split_at(nodes);
                let (dtheta, dq) = dy.split_at_mut(nodes);
                energy_rate_into(q, self.h, self.rho_cv, &self.boundary, dtheta);
                grad_into(theta, self.h, &mut self.g0);
                grad_into(dtheta, self.h, &mut self.g1);
                for i in 0..mids {
                    dq[i] = aq * q[i] + ag * self.g0[i] + agd * self.g1[i];
                }
            }
            FdForm::Order3 {
                bq,
                bqd,
                bg,
                bgd,
                bgdd,
            } => {
                let (theta, rest) = y.split_at(nodes);
                let (q, qd) = rest.split_at(mids);
                let (dtheta, drest) = dy.split_at_mut(nodes);
                let (dq, dqd) = drest.split_at_mut(mids);
                energy_rate_into(q, self.h, self.rho_cv, &self.boundary, dtheta);
                // theta_ddot follows from differentiating the energy balance
                energy_rate_into(qd, self.h, self.rho_cv, &self.boundary, &mut self.tdd);
                grad_into(theta, self.h, &mut self.g0);
                grad_into(dtheta, self.h, &mut self.g1);
                grad_into(&self.tdd, self.h, &mut self.g2);
                for i in 0..mids {
                    dq[i] = qd[i];
                    dqd[i] = bq * q[i]
                        + bqd * qd[i]
                        + bg * self.g0[i]
                        + bgd * self.g1[i]
                        + bgdd * self.g2[i];
                }
            }
        }
    }
}

/// Midpoint gradient of a node field.
fn grad_into<T: Scalar>(field: &[T], h: T, out: &mut [T]) {
    for i in 0..out.len() {
        out[i] = (field[i + 1] - field[i]) / h;
    }
}

/// Node temperature rate from the midpoint flux:
/// `rho_cv theta_dot = -dq/dX`. Dirichlet ends are pinned; Neumann
/// reflects the flux so the wall value is zero, which makes the
/// trapezoid-weighted mean an exact invariant of the semi-discretization.
fn energy_rate_into<T: Scalar>(q: &[T], h: T, rho_cv: T, boundary: &Boundary<T>, out: &mut [T]) {
    let n = out.len();
    for i in 1..n - 1 {
        out[i] = -(q[i] - q[i - 1]) / (rho_cv * h);
    }
    match boundary {
        Boundary::Dirichlet { .. } => {
            out[0] = T::zero();
            out[n - 1] = T::zero();
        }
        Boundary::Neumann => {
            out[0] = -(T::two() * q[0]) / (rho_cv * h);
            out[n - 1] = T::two() * q[n - 2] / (rho_cv * h);
        }
    }
}

// Dormand-Prince 5(4) tableau; the last row is the fifth-order weight
// vector, DP_ERR the difference to the embedded fourth-order weights.
const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_ERR: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrate the autonomous system `y' = f(y)` from `t = 0`, returning the
/// state at each requested time. Step control keeps the rms of the
/// embedded error estimate below `tol` per step (mixed absolute/relative).
fn dopri45<T: Scalar>(
    f: &mut impl FnMut(&[T], &mut [T]),
    y0: &[T],
    times: &[T],
    tol: T,
) -> Result<Vec<Vec<T>>> {
    let n = y0.len();
    let mut out = Vec::with_capacity(times.len());
    if times.is_empty() {
        return Ok(out);
    }
    let mut y = y0.to_vec();
    let mut t = T::zero();
    let t_end = *times.last().expect("nonempty");
    let span = if t_end > T::zero() { t_end } else { T::one() };
    let mut h = span * T::of(1e-3);
    let hmin = T::of(1e-14) * T::one().max(t_end);
    let mut k = vec![vec![T::zero(); n]; 7];
    let mut ytmp = vec![T::zero(); n];
    let mut y5 = vec![T::zero(); n];

    for &target in times {
        while t < target {
            let reaches = h >= target - t;
            let hstep = if reaches { target - t } else { h };
            f(&y, &mut k[0]);
            for s in 1..=5 {
                ytmp.copy_from_slice(&y);
                for (j, &a) in DP_A[s - 1].iter().enumerate().take(s) {
                    if a != 0.0 {
                        let hc = hstep * T::of(a);
                        for i in 0..n {
                            ytmp[i] += hc * k[j][i];
                        }
                    }
                }
                f(&ytmp, &mut k[s]);
            }
            y5.copy_from_slice(&y);
            for (j, &a) in DP_A[5].iter().enumerate() {
                if a != 0.0 {
                    let hc = hstep * T::of(a);
                    for i in 0..n {
                        y5[i] += hc * k[j][i];
                    }
                }
            }
            f(&y5, &mut k[6]);
            for v in ytmp.iter_mut() {
                *v = T::zero();
            }
            for (j, &e) in DP_ERR.iter().enumerate() {
                if e != 0.0 {
                    let c = T::of(e);
                    for i in 0..n {
                        ytmp[i] += c * k[j][i];
                    }
                }
            }
            let mut errsum = T::zero();
            for i in 0..n {
                let sc = tol * (T::one() + y[i].abs().max(y5[i].abs()));
                let r = hstep * ytmp[i] / sc;
                errsum += r * r;
            }
            let err = (errsum / T::of(n as f64)).sqrt();
            let accepted = err.is_finite() && err <= T::one();
            if accepted {
                t = if reaches { target } else { t + hstep };
                std::mem::swap(&mut y, &mut y5);
            }
            let fac = if !err.is_finite() {
                T::of(0.2)
            } else if err == T::zero() {
                T::of(5.0)
            } else {
                (T::of(0.9) * err.powf(T::of(-0.2)))
                    .max(T::of(0.2))
                    .min(T::of(5.0))
            };
            // a step clipped to land on a target must not shrink the
            // working step size it succeeded with
            let hnew = hstep * fac;
            h = if reaches && accepted {
                h.max(hnew).min(span)
            } else {
                hnew.min(span)
            };
            if h < hmin {
                return Err(Error::StepSizeUnderflow {
                    t: t.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}
