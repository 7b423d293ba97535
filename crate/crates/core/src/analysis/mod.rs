//! Closed-form bounds and Monte Carlo campaigns.
//!
//! [`bounds`] evaluates the deviation-probability constants, the optimal
//! finite-`n` epsilon, the variance bound, and the `x̄(n)` root. [`campaigns`]
//! runs the seeded experiments (time constant, deviation rate, sandwich) and
//! [`report`] carries their serializable results.

pub mod bounds;
pub mod campaigns;
pub mod report;

pub use bounds::{
    aks_reference_length, deviation_constants, epsilon_max, optimize_epsilon,
    variance_upper_bound, xbar, DeviationConstants,
};
pub use campaigns::{estimate_deviation, estimate_time_constant, sandwich_experiment};
pub use report::{BoundCheck, CampaignConfig, CampaignReport, RateFit, StatRow};
