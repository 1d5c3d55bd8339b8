//! Steering driftless control systems with orthogonal-polynomial inputs.
//!
//! The numerical core is generic over [`Real`] (`f32` and `f64`). The
//! aliases in [`f64`](mod@crate::f64) fix the scalar for the common case.

// Negated comparisons such as `!(x > 0)` are used on purpose to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod fuel_l1;
pub mod lie;
pub mod optimal_energy;
pub mod orthopoly;
pub mod quadrature;
pub mod scalar;
pub mod signal;
pub mod so3_control;
pub mod steering;
pub mod sturm;

pub use dynamics::{
    coupling_displacement, integrate_gnhi, integrate_nhi, integrate_so3, GnhiState, Interval, NhiState, Trajectory,
};
pub use error::{Error, Result};
pub use fuel_l1::{compare_families, fuel_constants, fuel_min, FuelConstants, FuelReport};
pub use lie::{PiPolicy, Rotation};
pub use optimal_energy::{cheb_optimal_inputs, el_residual, weighted_cost, WeightedCost};
pub use orthopoly::{inner_product, BasisElement, Domain, Family};
pub use scalar::Real;
pub use signal::InputSignal;
pub use so3_control::{constant_omega_plan, underactuated_plan, weighted_rate_plan, AttitudePlan};
pub use steering::{plan_gnhi, plan_nhi, PairIndices, SteeringFamily, SteeringPlan};
pub use sturm::{jacobi_pairing, sl_residual, SLProblem};

/// Double-precision aliases.
pub mod f64 {
    pub type BasisElement = crate::orthopoly::BasisElement<f64>;
    pub type Family = crate::orthopoly::Family<f64>;
    pub type InputSignal = crate::signal::InputSignal<f64>;
    pub type Interval = crate::dynamics::Interval<f64>;
    pub type NhiState = crate::dynamics::NhiState<f64>;
    pub type GnhiState = crate::dynamics::GnhiState<f64>;
    pub type Trajectory = crate::dynamics::Trajectory<f64>;
    pub type SteeringFamily = crate::steering::SteeringFamily<f64>;
    pub type SteeringPlan = crate::steering::SteeringPlan<f64>;
    pub type SLProblem = crate::sturm::SLProblem<f64>;
    pub type WeightedCost = crate::optimal_energy::WeightedCost<f64>;
    pub type FuelReport = crate::fuel_l1::FuelReport<f64>;
    pub type Rotation = crate::lie::Rotation<f64>;
    pub type Mat3 = crate::lie::Mat3<f64>;
    pub type AttitudePlan = crate::so3_control::AttitudePlan<f64>;
}
