//! Proof-replay property suites: each displayed step of the arguments is asserted on
//! sampled inputs, with numeric slack reporting.

pub mod equivalence;
pub mod inequalities;
pub mod relations;
pub mod report;
pub mod sample;

pub use equivalence::{block_partition, check_main_equivalence, phi_from_phi1};
pub use inequalities::{
    check_complex_monotone, check_osc_reduction, check_pconvex, check_subadditive_split, check_tgreedy_log,
    triangle_exponent,
};
pub use relations::{check_constant_relations, check_dual_identity, check_flattening, continuity_factor};
pub use report::{CheckReport, Checker, Counterexample, CSV_HEADER, EXACT_TOLERANCE, TOLERANCE};
