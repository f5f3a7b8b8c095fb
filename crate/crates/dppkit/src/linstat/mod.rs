//! Plateau bumps, the energy `Λ`, averaged schedules and variances of linear statistics.

mod bump;
mod lambda;
mod schedule;
mod variance;

pub use bump::{BumpFunction, BumpMixture, ConstantProfile, Profile};
pub use lambda::{
    cross_term, decay_profile, gauss_legendre, lambda_form, nested_cross_term, reference_self_energy, LambdaValue,
    QuadParams,
};
pub use schedule::{build_phi_schedule, PhiSchedule};
pub use variance::{
    analytic_variance_discrete, empirical_variance, kernel_variance, lattice_weights, profile_weights,
    variance_lower_bound, variance_lower_bound_2d, ProductSymbol2d,
};
