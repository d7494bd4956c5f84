//! Horseshoe-prior numerics: density bounds, posterior shrinkage, KL risk,
//! moderate-deviation thresholds, global-scale calibration and the sparse
//! two-groups testing experiment.

pub mod calibration;
pub mod density;
pub mod error;
pub mod hierarchy;
pub mod mixture;
pub mod prior;
pub mod quad;
pub mod risk;
pub mod rng;
pub mod roots;
pub mod shrinkage;
pub mod simulate;
pub mod special;
pub mod threshold;

pub use density::{
    comparison_density, hs_density_bounds, hs_marginal_density, hsplus_marginal_density,
    origin_density_from_mixing, DensityBounds,
};
pub use error::{Error, Result};
pub use prior::{PriorKind, PriorSpec};
pub use quad::QuadratureSpec;
pub use shrinkage::{
    kappa_from_lambda, kappa_posterior_density, kappa_prior_density, lambda_from_kappa,
    posterior_summary, shrinkage_profile, ShrinkageSummary,
};
pub use threshold::{
    abos_threshold, equiboundary_solve, mdp_threshold, mills_tail, oracle_bayes_risk,
    saddle_point_threshold, ThresholdReport,
};
pub use risk::{
    cumulative_kl, kl_location, null_kl_risk, signal_kl_risk, superefficiency_exponent,
    RiskEstimate, SlopeFit,
};
pub use calibration::{
    mmle_tau, obs_marginal_density, tau_posterior, tiao_tan_collapse_rate, TauMethod,
    TauMethodKind, TauPosterior,
};
pub use simulate::{
    apply_rule, bayes_risk, generate_two_groups, regime_sweep, run_experiment, scaling_study, Arm,
    ExperimentConfig, ExperimentResult, RegimeRow, Rule, ScalingRow,
};
pub use hierarchy::{hierarchy_report, HierarchyLevel};
