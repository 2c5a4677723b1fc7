//! Material parameters, free-energy coefficients, and thermal states.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::vec::SpatialVec;

/// Coefficients of the second-order rate equation
///
/// ```text
/// lambda q_dd + tau q_d + q = -mu grad(theta) - tau nu grad(theta_d) - lambda kappa grad(theta_dd)
/// ```
///
/// together with the volumetric heat capacity `rho_cv` and the reference
/// temperature `theta_ref` the linearized analysis is carried out at.
///
/// Every field is a plain number; units follow SI (seconds, W/(m K), ...).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams<T = f64> {
    /// Second relaxation time product (s^2); may carry either sign.
    pub lambda: T,
    /// First relaxation time (s).
    pub tau: T,
    /// Stationary conductivity (W/(m K)).
    pub mu: T,
    /// Conductivity paired with the first gradient rate (W/(m K)).
    pub nu: T,
    /// Conductivity paired with the second gradient rate (W/(m K)).
    pub kappa: T,
    /// Volumetric heat capacity rho * c (J/(m^3 K)); must be positive.
    pub rho_cv: T,
    /// Reference temperature (K); must be positive.
    pub theta_ref: T,
}

/// Exact-zero markers for the parameters whose vanishing changes the model
/// family. Comparisons are `== 0.0` on purpose: degeneracy is a structural
/// statement, not a numerical one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DegeneracyFlags {
    pub lambda_zero: bool,
    pub tau_zero: bool,
    pub mu_zero: bool,
    pub nu_zero: bool,
    pub kappa_zero: bool,
}

/// A parameter set that passed [`validate_params`].
#[derive(Debug, Clone, Copy)]
pub struct ValidatedParams<T = f64> {
    params: MaterialParams<T>,
    flags: DegeneracyFlags,
}

impl<T: Scalar> ValidatedParams<T> {
    pub fn params(&self) -> &MaterialParams<T> {
        &self.params
    }

    pub fn flags(&self) -> DegeneracyFlags {
        self.flags
    }
}

/// Checks the sign invariants and records which parameters are exactly zero.
pub fn validate_params<T: Scalar>(p: &MaterialParams<T>) -> Result<ValidatedParams<T>> {
    if p.rho_cv <= T::zero() {
        return Err(Error::NonPositiveHeatCapacity(
            p.rho_cv.to_f64().unwrap_or(f64::NAN),
        ));
    }
    if p.theta_ref <= T::zero() {
        return Err(Error::NonPositiveTemperature(
            p.theta_ref.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let z = T::zero();
    Ok(ValidatedParams {
        params: *p,
        flags: DegeneracyFlags {
            lambda_zero: p.lambda == z,
            tau_zero: p.tau == z,
            mu_zero: p.mu == z,
            nu_zero: p.nu == z,
            kappa_zero: p.kappa == z,
        },
    })
}

/// Coefficients of the quadratic free energy
///
/// ```text
/// rho (psi - psi0) = a1/2 |q|^2 + a2/2 |q_d|^2 + a3/2 |g|^2 + a4/2 |g_d|^2
///                  + b1 q.q_d + b2 q.g + b3 q_d.g + b4 q.g_d + b5 q_d.g_d + b6 g.g_d
/// ```
///
/// with `g = grad(theta)` and `g_d = grad(theta_d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeEnergyCoeffs<T = f64> {
    pub alpha1: T,
    pub alpha2: T,
    pub alpha3: T,
    pub alpha4: T,
    pub beta1: T,
    pub beta2: T,
    pub beta3: T,
    pub beta4: T,
    pub beta5: T,
    pub beta6: T,
}

impl<T: Scalar> FreeEnergyCoeffs<T> {
    /// All-zero coefficients (the baseline `psi = psi0`).
    pub fn zero() -> Self {
        let z = T::zero();
        Self {
            alpha1: z,
            alpha2: z,
            alpha3: z,
            alpha4: z,
            beta1: z,
            beta2: z,
            beta3: z,
            beta4: z,
            beta5: z,
            beta6: z,
        }
    }
}

/// Pointwise thermal state: temperature, flux and gradient histories deep
/// enough for the second-order rate equations.
///
/// All vectors share one dimension (1 or 3). The optional second rates are
/// only consumed by the highest-order identity checks; absent fields are
/// treated as zero there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalState<T = f64> {
    theta: T,
    q: SpatialVec<T>,
    q_dot: SpatialVec<T>,
    grad_theta: SpatialVec<T>,
    grad_theta_dot: SpatialVec<T>,
    q_ddot: Option<SpatialVec<T>>,
    grad_theta_ddot: Option<SpatialVec<T>>,
}

impl<T: Scalar> ThermalState<T> {
    pub fn new(
        theta: T,
        q: SpatialVec<T>,
        q_dot: SpatialVec<T>,
        grad_theta: SpatialVec<T>,
        grad_theta_dot: SpatialVec<T>,
    ) -> Result<Self> {
        if theta <= T::zero() {
            return Err(Error::NonPositiveTemperature(
                theta.to_f64().unwrap_or(f64::NAN),
            ));
        }
        let dim = q.dim();
        for v in [&q_dot, &grad_theta, &grad_theta_dot] {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: v.dim(),
                });
            }
        }
        Ok(Self {
            theta,
            q,
            q_dot,
            grad_theta,
            grad_theta_dot,
            q_ddot: None,
            grad_theta_ddot: None,
        })
    }

    /// Attaches the second flux rate (for second-order identity checks).
    pub fn with_q_ddot(mut self, q_ddot: SpatialVec<T>) -> Result<Self> {
        if q_ddot.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: q_ddot.dim(),
            });
        }
        self.q_ddot = Some(q_ddot);
        Ok(self)
    }

    /// Attaches the second gradient rate (consumed only by the second-order
    /// rate equation; defaults to zero).
    pub fn with_grad_theta_ddot(mut self, g: SpatialVec<T>) -> Result<Self> {
        if g.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: g.dim(),
            });
        }
        self.grad_theta_ddot = Some(g);
        Ok(self)
    }

    /// State with all fluxes and gradients zero at the given temperature.
    pub fn equilibrium(theta: T, dim: usize) -> Result<Self> {
        let z = SpatialVec::zero(dim)?;
        Self::new(theta, z, z, z, z)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    #[inline]
    pub fn theta(&self) -> T {
        self.theta
    }

    #[inline]
    pub fn q(&self) -> SpatialVec<T> {
        self.q
    }

    #[inline]
    pub fn q_dot(&self) -> SpatialVec<T> {
        self.q_dot
    }

    #[inline]
    pub fn grad_theta(&self) -> SpatialVec<T> {
        self.grad_theta
    }

    #[inline]
    pub fn grad_theta_dot(&self) -> SpatialVec<T> {
        self.grad_theta_dot
    }

    #[inline]
    pub fn q_ddot(&self) -> Option<SpatialVec<T>> {
        self.q_ddot
    }

    /// Second gradient rate, zero when not supplied.
    #[inline]
    pub fn grad_theta_ddot_or_zero(&self) -> SpatialVec<T> {
        self.grad_theta_ddot
            .unwrap_or_else(|| SpatialVec::zero(self.dim()).expect("dim validated"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_json_round_trip_and_unknown_field_rejection() {
        let json = r#"{
            "lambda": 1.0, "tau": 0.5, "mu": 2.0, "nu": 1.5, "kappa": 0.25,
            "rho_cv": 1.0e6, "theta_ref": 300.0
        }"#;
        let p: MaterialParams = serde_json::from_str(json).unwrap();
        assert_eq!(p.tau, 0.5);
        let back = serde_json::to_string(&p).unwrap();
        let again: MaterialParams = serde_json::from_str(&back).unwrap();
        assert_eq!(p, again);

        let bad = r#"{
            "lambda": 1.0, "tau": 0.5, "mu": 2.0, "nu": 1.5, "kappa": 0.25,
            "rho_cv": 1.0e6, "theta_ref": 300.0, "extra": 1.0
        }"#;
        assert!(serde_json::from_str::<MaterialParams>(bad).is_err());

        let missing = r#"{ "lambda": 1.0 }"#;
        assert!(serde_json::from_str::<MaterialParams>(missing).is_err());
    }

    #[test]
    fn validation_catches_bad_signs() {
        let mut p = MaterialParams {
            lambda: 1.0,
            tau: 1.0,
            mu: 1.0,
            nu: 1.0,
            kappa: 1.0,
            rho_cv: 1.0,
            theta_ref: 300.0,
        };
        assert!(validate_params(&p).is_ok());

        p.rho_cv = 0.0;
        assert!(matches!(
            validate_params(&p),
            Err(Error::NonPositiveHeatCapacity(_))
        ));
        p.rho_cv = 1.0;
        p.theta_ref = -3.0;
        assert!(matches!(
            validate_params(&p),
            Err(Error::NonPositiveTemperature(_))
        ));
    }

    #[test]
    fn degeneracy_flags_are_exact() {
        let p = MaterialParams {
            lambda: 0.0,
            tau: 1.0e-300,
            mu: 1.0,
            nu: 0.0,
            kappa: -0.0,
            rho_cv: 1.0,
            theta_ref: 1.0,
        };
        let v = validate_params(&p).unwrap();
        let f = v.flags();
        assert!(f.lambda_zero);
        assert!(!f.tau_zero, "tiny but nonzero tau is not degenerate");
        assert!(f.nu_zero);
        assert!(f.kappa_zero, "-0.0 compares equal to zero");
    }

    #[test]
    fn state_construction_validates() {
        let q = SpatialVec::d3(1.0, 0.0, 0.0);
        let g1 = SpatialVec::d1(1.0);
        assert!(matches!(
            ThermalState::new(300.0, q, q, q, g1),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            ThermalState::new(0.0, q, q, q, q),
            Err(Error::NonPositiveTemperature(_))
        ));
        let s = ThermalState::new(300.0, q, q, q, q).unwrap();
        assert_eq!(s.dim(), 3);
        assert_eq!(s.grad_theta_ddot_or_zero().norm_sq(), 0.0);
    }
}
