//! Counterexample spaces: the weak-Lorentz feeder, the three block constructions,
//! interleaved combinations and rescaled bases.

pub mod build;
pub mod combine;
pub mod feeder;
pub mod params;

pub use build::{
    analytic_constants, build, build_lucc_not_qglc, build_qglc_not_lucc, build_tqg_separation, reverify, Certificate,
    ConstructedSpace,
};
pub use combine::{
    build_fqg_not_ucc, combine_ltimes, combine_rtimes, dual_identity_error, flattening_slack, left_coefficients,
    reverify_combined, scale_basis, CombinedInfo, CombinedSpace, FqgParams,
};
pub use feeder::{feeder_m0, feeder_weight, make_feeder, FeederBasis};
pub use params::{plan_params, simulate_layout, ConstructionKind, ConstructionParams, Layout, Mode, ParamReport};
