//! Rate-type heat conduction model catalog.
//!
//! Seven constitutive laws relating the referential heat flux `q` to the
//! temperature gradient, ordered by the highest flux time derivative they
//! carry:
//!
//! | kind          | rate equation                                                    |
//! |---------------|------------------------------------------------------------------|
//! | `fourier`     | `q = -kappa grad_theta`                                          |
//! | `mcv`         | `tau q' + q = -kappa grad_theta`                                 |
//! | `gniii`       | `q' = -xi grad_theta - kappa grad_theta'`                        |
//! | `jeffreys`    | `tau q' + q = -kappa grad_theta - tau zeta grad_theta'`          |
//! | `quintanilla` | `tau q'' + q' = -xi grad_theta - kappa grad_theta'`              |
//! | `burgers`     | `lambda q'' + tau q' + q = -kappa grad_theta - tau zeta grad_theta'` |
//! | `lso`         | `lambda q'' + tau q' + q = -mu grad_theta - tau nu grad_theta' - lambda kappa grad_theta''` |
//!
//! Each model carries a closed-form flux free energy `psi` (the part of
//! `rho psi` in excess of the purely thermal baseline) and an entropy
//! production `gamma` making the Clausius-Duhem identity
//!
//! ```text
//! rho psi' + q . grad_theta / theta + rho theta gamma = 0
//! ```
//!
//! exact once the rate equation eliminates the highest flux derivative.
//! [`ModelKind::clausius_duhem_residual`] evaluates the left side at a
//! state; it vanishes (to roundoff) precisely because the stored `psi` and
//! `gamma` match the rate equation.
//!
//! Models parse from JSON as a tagged union, e.g.
//! `{"kind": "mcv", "tau": 1.0, "kappa": 2.0}`; unknown fields are
//! rejected.

use serde::{Deserialize, Serialize};

use crate::consistency::{apply_constraints, build_a_at, classify};
use crate::error::{Error, Result};
use crate::params::{FreeEnergyCoeffs, MaterialParams, ThermalState};
use crate::scalar::Scalar;
use crate::vec::SpatialVec;

/// `q = -kappa grad_theta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierParams<T = f64> {
    pub kappa: T,
}

/// `tau q' + q = -kappa grad_theta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McvParams<T = f64> {
    pub tau: T,
    pub kappa: T,
}

/// `q' = -xi grad_theta - kappa grad_theta'`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GnIiiParams<T = f64> {
    pub xi: T,
    pub kappa: T,
}

/// `tau q' + q = -kappa grad_theta - tau zeta grad_theta'`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JeffreysParams<T = f64> {
    pub tau: T,
    pub kappa: T,
    pub zeta: T,
}

/// `tau q'' + q' = -xi grad_theta - kappa grad_theta'`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuintanillaParams<T = f64> {
    pub tau: T,
    pub xi: T,
    pub kappa: T,
}

/// `lambda q'' + tau q' + q = -kappa grad_theta - tau zeta grad_theta'`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BurgersParams<T = f64> {
    pub lambda: T,
    pub tau: T,
    pub kappa: T,
    pub zeta: T,
}

/// Tagged union over the model catalog. The JSON encoding is flat:
/// `{"kind": "<name>", <parameter fields>}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelKind<T = f64> {
    Fourier(FourierParams<T>),
    Mcv(McvParams<T>),
    GnIii(GnIiiParams<T>),
    Jeffreys(JeffreysParams<T>),
    Quintanilla(QuintanillaParams<T>),
    Burgers(BurgersParams<T>),
    Lso(MaterialParams<T>),
}

/// Which of the two admissible Jeffreys potential/production pairs to use.
///
/// `Split` stores energy in `q + zeta grad_theta` scaled by `kappa + zeta`
/// and needs `kappa > 0`, `zeta >= 0`; `Excess` scales by `kappa - zeta`,
/// adds an extra gradient production term, and needs `kappa > zeta >= 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JeffreysBranch {
    Split,
    Excess,
}

/// Outcome of [`ModelKind::check_parameter_consistency`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConsistencyStatus {
    /// Every required predicate holds; a nonnegative-production potential
    /// pair exists for these parameters.
    Consistent,
    /// A required predicate fails for every admissible potential choice.
    Inconsistent,
    /// Consistency depends on data the parameters alone do not fix (the
    /// free-energy coefficients, or a reduction of a degenerate model).
    ConditionallyConsistent,
}

/// One named predicate with its evaluation.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionCheck {
    pub name: String,
    pub satisfied: bool,
}

/// Verdict of a parameter-level consistency check. `status` is
/// `Consistent` exactly when every listed predicate is satisfied.
#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyVerdict {
    pub status: ConsistencyStatus,
    pub conditions_checked: Vec<ConditionCheck>,
    pub notes: String,
}

impl ConsistencyVerdict {
    fn decided(conditions_checked: Vec<ConditionCheck>, notes: String) -> Self {
        let all = conditions_checked.iter().all(|c| c.satisfied);
        ConsistencyVerdict {
            status: if all {
                ConsistencyStatus::Consistent
            } else {
                ConsistencyStatus::Inconsistent
            },
            conditions_checked,
            notes,
        }
    }
}

pub(crate) fn check(name: impl Into<String>, satisfied: bool) -> ConditionCheck {
    ConditionCheck {
        name: name.into(),
        satisfied,
    }
}

/// Internal bundle: the flux potential, its gradients with respect to the
/// four state vectors, and the entropy production, all at the state's
/// temperature.
struct Potentials<T> {
    psi: T,
    d_q: SpatialVec<T>,
    d_qdot: SpatialVec<T>,
    d_grad: SpatialVec<T>,
    d_graddot: SpatialVec<T>,
    /// `rho theta gamma`.
    dissipation: T,
}

impl<T: Scalar> ModelKind<T> {
    /// Stable lowercase name (matches the JSON tag).
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Fourier(_) => "fourier",
            ModelKind::Mcv(_) => "mcv",
            ModelKind::GnIii(_) => "gniii",
            ModelKind::Jeffreys(_) => "jeffreys",
            ModelKind::Quintanilla(_) => "quintanilla",
            ModelKind::Burgers(_) => "burgers",
            ModelKind::Lso(_) => "lso",
        }
    }

    /// Order of the highest flux time derivative in the rate equation.
    pub fn rate_order(&self) -> usize {
        match self {
            ModelKind::Fourier(_) => 0,
            ModelKind::Mcv(_) | ModelKind::GnIii(_) | ModelKind::Jeffreys(_) => 1,
            ModelKind::Quintanilla(_) | ModelKind::Burgers(_) | ModelKind::Lso(_) => 2,
        }
    }

    /// Solves the rate equation for its highest flux time derivative at
    /// the given state (for Fourier, the flux itself).
    ///
    /// Errors with `DegenerateLeadingCoefficient` when the coefficient of
    /// that derivative is exactly zero; callers should then evaluate
    /// [`ModelKind::reduce`] instead.
    pub fn highest_rate(&self, state: &ThermalState<T>) -> Result<SpatialVec<T>> {
        let g = state.grad_theta();
        let gd = state.grad_theta_dot();
        match self {
            ModelKind::Fourier(m) => Ok(g.scale(-m.kappa)),
            ModelKind::Mcv(m) => {
                if m.tau == T::zero() {
                    return Err(Error::DegenerateLeadingCoefficient {
                        model: "mcv",
                        name: "tau",
                    });
                }
                Ok(state.q().add(&g.scale(m.kappa)).scale(-T::one() / m.tau))
            }
            ModelKind::GnIii(m) => Ok(g.scale(-m.xi).add(&gd.scale(-m.kappa))),
            ModelKind::Jeffreys(m) => {
                if m.tau == T::zero() {
                    return Err(Error::DegenerateLeadingCoefficient {
                        model: "jeffreys",
                        name: "tau",
                    });
                }
                let rhs = state
                    .q()
                    .add(&g.scale(m.kappa))
                    .add(&gd.scale(m.tau * m.zeta));
                Ok(rhs.scale(-T::one() / m.tau))
            }
            ModelKind::Quintanilla(m) => {
                if m.tau == T::zero() {
                    return Err(Error::DegenerateLeadingCoefficient {
                        model: "quintanilla",
                        name: "tau",
                    });
                }
                let rhs = state
                    .q_dot()
                    .add(&g.scale(m.xi))
                    .add(&gd.scale(m.kappa));
                Ok(rhs.scale(-T::one() / m.tau))
            }
            ModelKind::Burgers(m) => {
                if m.lambda == T::zero() {
                    return Err(Error::DegenerateLeadingCoefficient {
                        model: "burgers",
                        name: "lambda",
                    });
                }
                let rhs = state
                    .q_dot()
                    .scale(m.tau)
                    .add(&state.q())
                    .add(&g.scale(m.kappa))
                    .add(&gd.scale(m.tau * m.zeta));
                Ok(rhs.scale(-T::one() / m.lambda))
            }
            ModelKind::Lso(p) => {
                if p.lambda == T::zero() {
                    return Err(Error::DegenerateLeadingCoefficient {
                        model: "lso",
                        name: "lambda",
                    });
                }
                let rhs = state
                    .q_dot()
                    .scale(p.tau)
                    .add(&state.q())
                    .add(&g.scale(p.mu))
                    .add(&gd.scale(p.tau * p.nu));
                Ok(rhs
                    .scale(-T::one() / p.lambda)
                    .sub(&state.grad_theta_ddot_or_zero().scale(p.kappa)))
            }
        }
    }

    /// Residual of the rate equation (left side minus right side) at the
    /// state's own derivatives; zero when the state satisfies the model.
    ///
    /// Second-order models need `q_ddot` on the state.
    pub fn rate_equation_residual(&self, state: &ThermalState<T>) -> Result<SpatialVec<T>> {
        let g = state.grad_theta();
        let gd = state.grad_theta_dot();
        let need_qddot = || {
            state.q_ddot().ok_or(Error::MissingInitialData {
                what: "q_ddot (second-order rate equation)",
            })
        };
        Ok(match self {
            ModelKind::Fourier(m) => state.q().add(&g.scale(m.kappa)),
            ModelKind::Mcv(m) => state
                .q_dot()
                .scale(m.tau)
                .add(&state.q())
                .add(&g.scale(m.kappa)),
            ModelKind::GnIii(m) => state
                .q_dot()
                .add(&g.scale(m.xi))
                .add(&gd.scale(m.kappa)),
            ModelKind::Jeffreys(m) => state
                .q_dot()
                .scale(m.tau)
                .add(&state.q())
                .add(&g.scale(m.kappa))
                .add(&gd.scale(m.tau * m.zeta)),
            ModelKind::Quintanilla(m) => need_qddot()?
                .scale(m.tau)
                .add(&state.q_dot())
                .add(&g.scale(m.xi))
                .add(&gd.scale(m.kappa)),
            ModelKind::Burgers(m) => need_qddot()?
                .scale(m.lambda)
                .add(&state.q_dot().scale(m.tau))
                .add(&state.q())
                .add(&g.scale(m.kappa))
                .add(&gd.scale(m.tau * m.zeta)),
            ModelKind::Lso(p) => need_qddot()?
                .scale(p.lambda)
                .add(&state.q_dot().scale(p.tau))
                .add(&state.q())
                .add(&g.scale(p.mu))
                .add(&gd.scale(p.tau * p.nu))
                .add(&state.grad_theta_ddot_or_zero().scale(p.lambda * p.kappa)),
        })
    }

    /// Flux part of the free energy density `rho psi - rho psi_0(theta)`
    /// at the state. `coeffs` is required for `burgers` and `lso` (their
    /// potential is the general quadratic), ignored elsewhere.
    pub fn free_energy(
        &self,
        state: &ThermalState<T>,
        coeffs: Option<&FreeEnergyCoeffs<T>>,
    ) -> Result<T> {
        Ok(self.potentials(state, coeffs, None)?.psi)
    }

    /// Jeffreys-only: the potential of a specific branch.
    pub fn free_energy_with_branch(
        &self,
        state: &ThermalState<T>,
        branch: JeffreysBranch,
    ) -> Result<T> {
        Ok(self.potentials(state, None, Some(branch))?.psi)
    }

    /// Entropy production times `rho theta` at the state (nonnegative
    /// whenever the model's consistency conditions hold). `coeffs` as in
    /// [`ModelKind::free_energy`].
    pub fn entropy_production(
        &self,
        state: &ThermalState<T>,
        coeffs: Option<&FreeEnergyCoeffs<T>>,
    ) -> Result<T> {
        Ok(self.potentials(state, coeffs, None)?.dissipation)
    }

    /// Jeffreys-only: the production of a specific branch.
    pub fn entropy_production_with_branch(
        &self,
        state: &ThermalState<T>,
        branch: JeffreysBranch,
    ) -> Result<T> {
        Ok(self.potentials(state, None, Some(branch))?.dissipation)
    }

    /// Left side of the entropy identity
    /// `rho psi' + q . grad_theta / theta + rho theta gamma`
    /// with the highest flux derivative eliminated through the rate
    /// equation. Exactly zero in exact arithmetic because the stored
    /// `(psi, gamma)` pair matches the model.
    pub fn clausius_duhem_residual(
        &self,
        state: &ThermalState<T>,
        coeffs: Option<&FreeEnergyCoeffs<T>>,
    ) -> Result<T> {
        Ok(self.residual_scaled(state, coeffs, None)?.0)
    }

    /// Same residual together with the magnitude scale
    /// `max(1, sum of |term|)`, for relative comparisons.
    pub fn clausius_duhem_residual_scaled(
        &self,
        state: &ThermalState<T>,
        coeffs: Option<&FreeEnergyCoeffs<T>>,
    ) -> Result<(T, T)> {
        self.residual_scaled(state, coeffs, None)
    }

    /// Jeffreys-only: the residual of a specific branch.
    pub fn clausius_duhem_residual_with_branch(
        &self,
        state: &ThermalState<T>,
        branch: JeffreysBranch,
    ) -> Result<T> {
        Ok(self.residual_scaled(state, None, Some(branch))?.0)
    }

    /// Jeffreys-only: residual and magnitude scale of a specific branch.
    pub fn clausius_duhem_residual_scaled_with_branch(
        &self,
        state: &ThermalState<T>,
        branch: JeffreysBranch,
    ) -> Result<(T, T)> {
        self.residual_scaled(state, None, Some(branch))
    }

    fn residual_scaled(
        &self,
        state: &ThermalState<T>,
        coeffs: Option<&FreeEnergyCoeffs<T>>,
        branch: Option<JeffreysBranch>,
    ) -> Result<(T, T)> {
        let theta = state.theta();
        let g = state.grad_theta();

        // Fourier eliminates the flux itself; the production kappa^2
        // |grad_theta|^2 / (theta kappa) is written with kappa cancelled
        // so kappa = 0 degenerates to 0 rather than 0/0.
        if let ModelKind::Fourier(m) = self {
            let q_eff = g.scale(-m.kappa);
            let supply = q_eff.dot(&g) / theta;
            let production = m.kappa * g.norm_sq() / theta;
            let scale = T::one().max(supply.abs() + production.abs());
            return Ok((supply + production, scale));
        }

        let pot = self.potentials(state, coeffs, branch)?;
        let rate = self.highest_rate(state)?;
        let psi_dot = match self.rate_order() {
            1 => pot.d_q.dot(&rate) + pot.d_grad.dot(&state.grad_theta_dot()),
            2 => {
                pot.d_q.dot(&state.q_dot())
                    + pot.d_qdot.dot(&rate)
                    + pot.d_grad.dot(&state.grad_theta_dot())
                    + pot.d_graddot.dot(&state.grad_theta_ddot_or_zero())
            }
            _ => unreachable!("order 0 handled above"),
        };
        let supply = state.q().dot(&g) / theta;
        let scale = T::one().max(psi_dot.abs() + supply.abs() + pot.dissipation.abs());
        Ok((psi_dot + supply + pot.dissipation, scale))
    }

    fn potentials(
        &self,
        state: &ThermalState<T>,
        coeffs: Option<&FreeEnergyCoeffs<T>>,
        branch: Option<JeffreysBranch>,
    ) -> Result<Potentials<T>> {
        let theta = state.theta();
        let q = state.q();
        let qd = state.q_dot();
        let g = state.grad_theta();
        let zero = q.scale(T::zero());
        let two = T::two();

        match self {
            ModelKind::Fourier(m) => {
                if m.kappa == T::zero() {
                    return Err(Error::PreconditionViolated {
                        op: "entropy_production",
                        what: "fourier production divides by kappa".into(),
                    });
                }
                Ok(Potentials {
                    psi: T::zero(),
                    d_q: zero,
                    d_qdot: zero,
                    d_grad: zero,
                    d_graddot: zero,
                    dissipation: q.norm_sq() / (theta * m.kappa),
                })
            }
            ModelKind::Mcv(m) => {
                if m.kappa == T::zero() {
                    return Err(Error::PreconditionViolated {
                        op: "free_energy",
                        what: "mcv potential divides by kappa".into(),
                    });
                }
                let s = T::one() / (theta * m.kappa);
                Ok(Potentials {
                    psi: m.tau * q.norm_sq() * s * T::half(),
                    d_q: q.scale(m.tau * s),
                    d_qdot: zero,
                    d_grad: zero,
                    d_graddot: zero,
                    dissipation: q.norm_sq() * s,
                })
            }
            ModelKind::GnIii(m) => {
                if m.xi == T::zero() {
                    return Err(Error::SingularXi);
                }
                let w = q.add(&g.scale(m.kappa));
                let s = T::one() / (theta * m.xi);
                Ok(Potentials {
                    psi: w.norm_sq() * s * T::half(),
                    d_q: w.scale(s),
                    d_qdot: zero,
                    d_grad: w.scale(m.kappa * s),
                    d_graddot: zero,
                    dissipation: m.kappa * g.norm_sq() / theta,
                })
            }
            ModelKind::Jeffreys(m) => {
                let branch = match branch {
                    Some(b) => b,
                    None => default_jeffreys_branch(m)?,
                };
                let den = match branch {
                    JeffreysBranch::Split => m.kappa + m.zeta,
                    JeffreysBranch::Excess => m.kappa - m.zeta,
                };
                if den == T::zero() {
                    return Err(Error::PreconditionViolated {
                        op: "free_energy",
                        what: "jeffreys branch denominator kappa +- zeta is zero".into(),
                    });
                }
                let w = q.add(&g.scale(m.zeta));
                let s = m.tau / (theta * den);
                let dissipation = match branch {
                    JeffreysBranch::Split => {
                        (q.norm_sq() + m.zeta * m.kappa * g.norm_sq()) / (theta * den)
                    }
                    JeffreysBranch::Excess => {
                        w.norm_sq() / (theta * den) + m.zeta * g.norm_sq() / theta
                    }
                };
                Ok(Potentials {
                    psi: w.norm_sq() * s * T::half(),
                    d_q: w.scale(s),
                    d_qdot: zero,
                    d_grad: w.scale(m.zeta * s),
                    d_graddot: zero,
                    dissipation,
                })
            }
            ModelKind::Quintanilla(m) => {
                if m.xi == T::zero() {
                    return Err(Error::SingularXi);
                }
                let d = m.kappa - m.tau * m.xi;
                if d == T::zero() {
                    return Err(Error::PreconditionViolated {
                        op: "free_energy",
                        what: "quintanilla potential divides by kappa - tau*xi".into(),
                    });
                }
                let big_g = qd.scale(m.tau).add(&g.scale(m.kappa));
                let s = T::one() / (theta * m.xi);
                let gd_over_d = big_g.scale(T::one() / d);
                let psi = m.kappa * big_g.norm_sq() * s / (two * d)
                    + q.norm_sq() * s * T::half()
                    + big_g.dot(&q) * s;
                let inner = gd_over_d.scale(m.kappa).add(&q);
                Ok(Potentials {
                    psi,
                    d_q: q.add(&big_g).scale(s),
                    d_qdot: inner.scale(m.tau * s),
                    d_grad: inner.scale(m.kappa * s),
                    d_graddot: zero,
                    dissipation: big_g.norm_sq() / (theta * d),
                })
            }
            ModelKind::Burgers(m) => {
                let c = coeffs.ok_or(Error::MissingCoefficients { model: "burgers" })?;
                let p = burgers_as_lso(m);
                quad_potentials(&p, c, state)
            }
            ModelKind::Lso(p) => {
                let c = coeffs.ok_or(Error::MissingCoefficients { model: "lso" })?;
                quad_potentials(p, c, state)
            }
        }
    }

    /// Evaluates the model's parameter-level thermodynamic consistency.
    ///
    /// `status` is `Consistent` exactly when every listed predicate holds.
    /// For `lso` the verdict comes from the regime classifier: a decidable
    /// regime match (or, failing that, a successful numeric feasibility
    /// search) gives `Consistent`; matches only among the
    /// coefficient-conditional regimes give `ConditionallyConsistent`.
    pub fn check_parameter_consistency(&self) -> ConsistencyVerdict {
        match self {
            ModelKind::Fourier(m) => ConsistencyVerdict::decided(
                vec![check("kappa > 0", m.kappa > T::zero())],
                String::new(),
            ),
            ModelKind::Mcv(m) => {
                let notes = if m.tau < T::zero() {
                    "tau < 0 makes the stored flux energy negative; a relaxation \
                     time tau >= 0 is expected"
                        .into()
                } else {
                    String::new()
                };
                ConsistencyVerdict::decided(
                    vec![check("kappa > 0", m.kappa > T::zero())],
                    notes,
                )
            }
            ModelKind::GnIii(m) => {
                let notes = if m.xi < T::zero() {
                    "xi < 0 makes the stored energy negative; xi > 0 is expected".into()
                } else {
                    String::new()
                };
                ConsistencyVerdict::decided(
                    vec![
                        check("kappa > 0", m.kappa > T::zero()),
                        check("xi != 0", m.xi != T::zero()),
                    ],
                    notes,
                )
            }
            ModelKind::Jeffreys(m) => {
                let split = m.kappa > T::zero() && m.zeta >= T::zero();
                let excess = m.kappa > m.zeta && m.zeta >= T::zero();
                let notes = match (split, excess) {
                    (true, true) => "both potential branches are admissible".into(),
                    (true, false) => "admissible via the split branch (kappa > 0, zeta >= 0)".into(),
                    (false, true) => {
                        "admissible via the excess branch (kappa > zeta >= 0)".into()
                    }
                    (false, false) => String::new(),
                };
                ConsistencyVerdict::decided(
                    vec![check(
                        "kappa > 0 and zeta >= 0 (split branch), or kappa > zeta >= 0 \
                         (excess branch)",
                        split || excess,
                    )],
                    notes,
                )
            }
            ModelKind::Quintanilla(m) => {
                let notes = if m.tau <= T::zero() {
                    "a relaxation time tau > 0 is expected".into()
                } else {
                    String::new()
                };
                ConsistencyVerdict::decided(
                    vec![
                        check("xi != 0", m.xi != T::zero()),
                        check("kappa > tau*xi", m.kappa > m.tau * m.xi),
                    ],
                    notes,
                )
            }
            ModelKind::Burgers(m) => {
                let i = m.kappa == T::zero() && m.zeta > T::zero();
                let ii = m.kappa > T::zero()
                    && m.tau * m.tau * m.zeta >= m.lambda * m.kappa;
                let notes = match (i, ii) {
                    (true, _) => "admissible via branch i (kappa = 0, zeta > 0)".into(),
                    (_, true) => {
                        "admissible via branch ii (kappa > 0, tau^2*zeta >= lambda*kappa)"
                            .into()
                    }
                    _ => String::new(),
                };
                ConsistencyVerdict::decided(
                    vec![
                        check("lambda > 0", m.lambda > T::zero()),
                        check("tau > 0", m.tau > T::zero()),
                        check(
                            "kappa = 0 and zeta > 0 (i), or kappa > 0 and tau^2*zeta >= \
                             lambda*kappa (ii)",
                            i || ii,
                        ),
                    ],
                    notes,
                )
            }
            ModelKind::Lso(p) => lso_consistency(p),
        }
    }

    /// Returns the model obtained in the stated degenerate-parameter limit:
    /// `mcv`/`jeffreys` at `tau = 0` become `fourier`, `quintanilla` at
    /// `tau = 0` becomes `gniii`, `burgers` at `lambda = 0` becomes
    /// `jeffreys`, `lso` at `lambda = 0` becomes `jeffreys` and at
    /// `kappa = 0` becomes `burgers`. The flag must be exactly zero.
    pub fn reduce(&self) -> Result<ModelKind<T>> {
        let z = T::zero();
        Ok(match self {
            ModelKind::Mcv(m) if m.tau == z => {
                ModelKind::Fourier(FourierParams { kappa: m.kappa })
            }
            ModelKind::Jeffreys(m) if m.tau == z => {
                ModelKind::Fourier(FourierParams { kappa: m.kappa })
            }
            ModelKind::Quintanilla(m) if m.tau == z => ModelKind::GnIii(GnIiiParams {
                xi: m.xi,
                kappa: m.kappa,
            }),
            ModelKind::Burgers(m) if m.lambda == z => ModelKind::Jeffreys(JeffreysParams {
                tau: m.tau,
                kappa: m.kappa,
                zeta: m.zeta,
            }),
            ModelKind::Lso(p) if p.lambda == z => ModelKind::Jeffreys(JeffreysParams {
                tau: p.tau,
                kappa: p.mu,
                zeta: p.nu,
            }),
            ModelKind::Lso(p) if p.kappa == z => ModelKind::Burgers(BurgersParams {
                lambda: p.lambda,
                tau: p.tau,
                kappa: p.mu,
                zeta: p.nu,
            }),
            _ => return Err(Error::NotReducible { model: self.name() }),
        })
    }
}

/// Picks the potential branch for a Jeffreys model: the first branch whose
/// admissibility conditions hold, else the first with a nonzero
/// denominator.
pub fn default_jeffreys_branch<T: Scalar>(m: &JeffreysParams<T>) -> Result<JeffreysBranch> {
    if m.kappa > T::zero() && m.zeta >= T::zero() {
        Ok(JeffreysBranch::Split)
    } else if m.kappa > m.zeta && m.zeta >= T::zero() {
        Ok(JeffreysBranch::Excess)
    } else if m.kappa + m.zeta != T::zero() {
        Ok(JeffreysBranch::Split)
    } else if m.kappa - m.zeta != T::zero() {
        Ok(JeffreysBranch::Excess)
    } else {
        Err(Error::PreconditionViolated {
            op: "free_energy",
            what: "jeffreys: both branch denominators kappa +- zeta vanish".into(),
        })
    }
}

/// Burgers is the `kappa = 0` section of the two-relaxation-time model:
/// its `kappa` plays the role of `mu` and its `zeta` the role of `nu`.
fn burgers_as_lso<T: Scalar>(m: &BurgersParams<T>) -> MaterialParams<T> {
    MaterialParams {
        lambda: m.lambda,
        tau: m.tau,
        mu: m.kappa,
        nu: m.zeta,
        kappa: T::zero(),
        // Placeholders: the quadratic potential machinery reads the
        // temperature from the state and never touches rho_cv.
        rho_cv: T::one(),
        theta_ref: T::one(),
    }
}

/// The general quadratic potential on `(q, q', grad_theta, grad_theta')`
/// with the gradient-rate block tied to `kappa`, and the matching
/// production form evaluated at the state temperature.
fn quad_potentials<T: Scalar>(
    p: &MaterialParams<T>,
    coeffs: &FreeEnergyCoeffs<T>,
    state: &ThermalState<T>,
) -> Result<Potentials<T>> {
    let c = apply_constraints(coeffs, p.kappa);
    let q = state.q();
    let qd = state.q_dot();
    let g = state.grad_theta();
    let gd = state.grad_theta_dot();
    let half = T::half();
    let psi = half
        * (c.alpha1 * q.norm_sq()
            + c.alpha2 * qd.norm_sq()
            + c.alpha3 * g.norm_sq()
            + c.alpha4 * gd.norm_sq())
        + c.beta1 * q.dot(&qd)
        + c.beta2 * q.dot(&g)
        + c.beta3 * qd.dot(&g)
        + c.beta4 * q.dot(&gd)
        + c.beta5 * qd.dot(&gd)
        + c.beta6 * g.dot(&gd);
    let d_q = q
        .scale(c.alpha1)
        .add(&qd.scale(c.beta1))
        .add(&g.scale(c.beta2))
        .add(&gd.scale(c.beta4));
    let d_qdot = q
        .scale(c.beta1)
        .add(&qd.scale(c.alpha2))
        .add(&g.scale(c.beta3))
        .add(&gd.scale(c.beta5));
    let d_grad = q
        .scale(c.beta2)
        .add(&qd.scale(c.beta3))
        .add(&g.scale(c.alpha3))
        .add(&gd.scale(c.beta6));
    let d_graddot = q
        .scale(c.beta4)
        .add(&qd.scale(c.beta5))
        .add(&g.scale(c.beta6))
        .add(&gd.scale(c.alpha4));
    let a = build_a_at(p, &c, state.theta())?;
    Ok(Potentials {
        psi,
        d_q,
        d_qdot,
        d_grad,
        d_graddot,
        dissipation: a.value(&[q, qd, g, gd]),
    })
}

fn lso_consistency<T: Scalar>(p: &MaterialParams<T>) -> ConsistencyVerdict {
    match classify(p) {
        Err(Error::ExcludedDegenerate {
            lambda_zero,
            kappa_zero,
        }) => ConsistencyVerdict {
            status: ConsistencyStatus::ConditionallyConsistent,
            conditions_checked: vec![
                check("lambda != 0", !lambda_zero),
                check("kappa != 0", !kappa_zero),
            ],
            notes: "degenerate leading/trailing coefficient: classify the reduced \
                    model (reduce) instead"
                .into(),
        },
        Err(e) => ConsistencyVerdict {
            status: ConsistencyStatus::Inconsistent,
            conditions_checked: vec![check("material parameters are valid", false)],
            notes: format!("parameter validation failed: {e}"),
        },
        Ok(cls) => {
            let items = cls.matched_items();
            let decided: Vec<u8> = cls
                .matched
                .iter()
                .filter(|m| !m.conditional)
                .map(|m| m.item)
                .collect();
            let admissible: Vec<u8> = cls
                .matched
                .iter()
                .filter(|m| !m.conditional && m.dynamically_admissible)
                .map(|m| m.item)
                .collect();
            if !decided.is_empty() {
                return ConsistencyVerdict {
                    status: ConsistencyStatus::Consistent,
                    conditions_checked: vec![
                        check("lambda != 0 and kappa != 0", true),
                        check("a decidable consistency regime matches", true),
                    ],
                    notes: format!(
                        "matched regimes {items:?}; decidable {decided:?}; of those, \
                         dynamically admissible {admissible:?}"
                    ),
                };
            }
            if !items.is_empty() {
                return ConsistencyVerdict {
                    status: ConsistencyStatus::ConditionallyConsistent,
                    conditions_checked: vec![
                        check("lambda != 0 and kappa != 0", true),
                        check("a coefficient-conditional regime matches", true),
                    ],
                    notes: format!(
                        "matched conditional regimes {items:?}; feasibility depends on \
                         the free-energy coefficients (run the feasibility search for a \
                         definitive answer)"
                    ),
                };
            }
            match cls.search {
                Some(s) if s.coeffs.is_some() => ConsistencyVerdict {
                    status: ConsistencyStatus::Consistent,
                    conditions_checked: vec![
                        check("lambda != 0 and kappa != 0", true),
                        check(
                            "a positive semidefinite dissipation form is attainable",
                            true,
                        ),
                    ],
                    notes: format!(
                        "no closed-form regime matched; numeric search found admissible \
                         coefficients (objective {:.3e}, {} evaluations)",
                        s.best_objective.to_f64().unwrap_or(f64::NAN),
                        s.evaluations
                    ),
                },
                Some(s) => ConsistencyVerdict {
                    status: ConsistencyStatus::Inconsistent,
                    conditions_checked: vec![
                        check("lambda != 0 and kappa != 0", true),
                        check(
                            "a positive semidefinite dissipation form is attainable",
                            false,
                        ),
                    ],
                    notes: format!(
                        "no regime matched and the numeric search failed (best objective \
                         {:.3e} after {} evaluations)",
                        s.best_objective.to_f64().unwrap_or(f64::NAN),
                        s.evaluations
                    ),
                },
                None => unreachable!("classify searches whenever nothing matched"),
            }
        }
    }
}
