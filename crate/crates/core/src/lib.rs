//! Rate-type heat conduction: model catalog, thermodynamic consistency,
//! and stability analysis for flux rate equations up to second order.
//!
//! The centerpiece is the two-relaxation-time conductor
//!
//! ```text
//! lambda q'' + tau q' + q = -mu grad_theta - tau nu grad_theta'
//!                           - lambda kappa grad_theta''
//! ```
//!
//! together with the classical laws it generalizes (Fourier,
//! Maxwell-Cattaneo-Vernotte, Green-Naghdi type III, Jeffreys,
//! Quintanilla, Burgers). The crate answers three questions about these
//! models:
//!
//! 1. **Consistency** ([`models`], [`consistency`]): does a free energy
//!    exist whose Clausius-Duhem entropy production is nonnegative? For
//!    the second-order models this reduces to positive semidefiniteness
//!    of a 4x4 quadratic form assembled by [`build_a`], classified in
//!    closed form by [`classify`] and numerically by
//!    [`feasibility_search`].
//! 2. **Stability** ([`stability`]): do spatially periodic perturbations
//!    decay? Routh-Hurwitz analysis of the per-mode characteristic cubic
//!    ([`routh_hurwitz`]), closed-form all-modes conditions
//!    ([`stability_conditions`], [`mu_admissibility`]), and the
//!    oscillatory tuning of the stationary conductivity
//!    ([`oscillatory_tuning`]).
//! 3. **Dynamics** ([`solver`]): modal integration of the coupled
//!    energy-balance/rate-equation system on an interval ([`simulate`]),
//!    with a finite-difference cross-check ([`fd_reference`]).
//!
//! All core types are generic over the floating scalar via [`Scalar`]
//! (`f32` or `f64`); the unparameterized names default to `f64`, and the
//! [`f32`](crate::f32) module holds the single-precision aliases.

pub mod consistency;
pub mod error;
pub mod models;
pub mod params;
pub mod quadform;
pub mod roots;
pub mod scalar;
pub mod solver;
pub mod stability;
pub mod tol;
pub mod vec;

pub use consistency::{
    apply_constraints, build_a, classification_report, classify, coeffs_for_item,
    feasibility_search, is_psd, principal_minors, ClassificationReport, Interval, ItemMatch,
    LsoClassification, Recipe, SearchOutcome,
};
pub use error::{Error, Result};
pub use models::{
    default_jeffreys_branch, BurgersParams, ConditionCheck, ConsistencyStatus,
    ConsistencyVerdict, FourierParams, GnIiiParams, JeffreysBranch, JeffreysParams, McvParams,
    ModelKind, QuintanillaParams,
};
pub use params::{
    validate_params, DegeneracyFlags, FreeEnergyCoeffs, MaterialParams, ThermalState,
    ValidatedParams,
};
pub use quadform::{PrincipalMinors, QuadForm4};
pub use scalar::Scalar;
pub use solver::{
    eigen_modes, evolve_mode, fd_reference, project_initial, simulate, solve_modes, Boundary,
    Domain1D, EigenMode, InitialData, ModalInit, ModalTerm, ModeSolution, TemperatureField,
    DEFAULT_MODES,
};
pub use stability::{
    characteristic_cubic, mode_roots, model_characteristic, mu_admissibility, oscillatory_tuning,
    routh_hurwitz, stability_conditions, CubicCoeffs, MuRegion, OscillatoryTuning,
    ParameterVerdict, StabilityRegime, StabilityStatus, StabilityVerdict,
};
pub use vec::SpatialVec;

/// Single-precision aliases of the core types.
pub mod f32 {
    pub type SpatialVec = crate::vec::SpatialVec<f32>;
    pub type MaterialParams = crate::params::MaterialParams<f32>;
    pub type FreeEnergyCoeffs = crate::params::FreeEnergyCoeffs<f32>;
    pub type ThermalState = crate::params::ThermalState<f32>;
    pub type QuadForm4 = crate::quadform::QuadForm4<f32>;
    pub type ModelKind = crate::models::ModelKind<f32>;
    pub type LsoClassification = crate::consistency::LsoClassification<f32>;
    pub type CubicCoeffs = crate::stability::CubicCoeffs<f32>;
    pub type MuRegion = crate::stability::MuRegion<f32>;
    pub type OscillatoryTuning = crate::stability::OscillatoryTuning<f32>;
    pub type Boundary = crate::solver::Boundary<f32>;
    pub type Domain1D = crate::solver::Domain1D<f32>;
    pub type InitialData = crate::solver::InitialData<f32>;
    pub type EigenMode = crate::solver::EigenMode<f32>;
    pub type ModalInit = crate::solver::ModalInit<f32>;
    pub type ModalTerm = crate::solver::ModalTerm<f32>;
    pub type ModeSolution = crate::solver::ModeSolution<f32>;
    pub type TemperatureField = crate::solver::TemperatureField<f32>;
}

/// Formats a scalar with 17 significant digits (round-trip exact for
/// `f64`), the encoding used in every machine-readable output.
pub fn sig17<T: Scalar>(v: T) -> String {
    format!("{:.16e}", v)
}

#[cfg(test)]
mod tests {
    #[test]
    fn sig17_round_trips_f64() {
        for v in [
            0.1,
            -3.0 / 7.0,
            1.0,
            6.02214076e23,
            f64::MIN_POSITIVE,
            -1.2345678901234567e-300,
        ] {
            let s = super::sig17(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(v, back, "{s}");
        }
    }
}
