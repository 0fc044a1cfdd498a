//! Norm engines on ambient coordinates.

pub mod bounds;
pub mod delta;
pub mod engine;
pub mod lp;

pub use bounds::Bounds;
pub use delta::{
    check_delta_feasible, delta_value, eval_delta, eval_delta_lower, eval_delta_upper, seminorm_delta, DeltaBlock,
    DeltaEval, DeltaFamilySpec, DeltaLower, DeltaVariant, FeasibilityReport,
};
pub use engine::NormEngine;
pub use lp::{conjugate, eval_lp, eval_weak_lp, harmonic_budget, increment};
