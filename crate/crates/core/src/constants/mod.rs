//! Certified lower bounds for the greedy-type constants of a basis, with witnesses that
//! re-evaluate offline, plus a brute-force oracle for small dimensions.

pub mod curves;
pub mod fundamental;
pub mod kind;
pub mod oracle;
pub mod search;
pub mod witness;

pub use curves::{beta_estimate, curve_bundle, monotone_hull, parse_t_grid, phi_curve, CurveBundle, CurveKind};
pub use fundamental::{fundamental_function, FundamentalReport};
pub use kind::ConstantKind;
pub use oracle::oracle_constant;
pub use search::{
    default_grid, estimate_constant, estimate_with, is_lattice_identity, is_symmetric, known_upper, ConstantEstimate,
    SearchConfig,
};
pub use witness::{check_admissible, evaluate_witness, ql_split, Witness};

/// Field constant in `K_lp ≤ Υ A_p K_uc K_lu` for real scalars.
pub const UPSILON_REAL: f64 = 2.0;

/// `A_p = 1/(2^p − 1)^{1/p}`, the p-convexity constant for `0 < p ≤ 1`.
pub fn a_p(p: f64) -> f64 {
    1.0 / (2f64.powf(p) - 1.0).powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convexity_constant() {
        assert_eq!(a_p(1.0), 1.0);
        assert!((a_p(0.5) - 1.0 / (2f64.sqrt() - 1.0).powi(2)).abs() < 1e-12);
    }
}
