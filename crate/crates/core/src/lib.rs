//! Greedy-algorithm constants on finite-dimensional spaces with a basis: norm engines,
//! counterexample constructions, certified constant estimators and proof-replay checks.
//!
//! Indices are 0-based throughout. Core vector, basis and norm types are generic over the
//! scalar; the experiment layers (constructions, constants, verify) work in `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod basis;
pub mod constants;
pub mod constructions;
pub mod error;
pub mod greedy;
pub mod norms;
pub mod scalar;
pub mod sets;
pub mod verify;

pub use basis::{BasisRepr, BasisSpace, Combinator, NamedSet, NamedVector, SpaceMeta};
pub use error::{Error, Result};
pub use greedy::CoeffProfile;
pub use norms::{Bounds, DeltaFamilySpec, NormEngine};
pub use scalar::Scalar;
pub use sets::IndexSet;

pub type Space = BasisSpace<f64>;
pub type Space32 = BasisSpace<f32>;
pub type Engine = NormEngine<f64>;
pub type Engine32 = NormEngine<f32>;
pub type Profile = CoeffProfile<f64>;
pub type Interval = Bounds<f64>;
pub type DeltaSpec = DeltaFamilySpec<f64>;
