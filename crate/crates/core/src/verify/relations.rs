//! Relations between estimated constants, the dual identities of interleaved bases and
//! the pointwise domination behind flattening quasi-greediness.

use rand::Rng;
use serde_json::json;

use crate::constants::{
    a_p, curve_bundle, estimate_constant, known_upper, ConstantKind, CurveKind, Witness, UPSILON_REAL,
};
use crate::constructions::{combine_ltimes, combine_rtimes, dual_identity_error, flattening_slack, CombinedSpace};
use crate::error::{Error, Result};
use crate::greedy::{canonical_greedy, project_coeffs};
use crate::verify::inequalities::triangle_exponent;
use crate::verify::report::{run_trials, CheckReport, Checker, EXACT_TOLERANCE, TOLERANCE};
use crate::verify::sample::random_coeffs;
use crate::Space;

/// `t` values used for the curve relations.
pub const RELATION_T_GRID: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

/// `C(t) = (1 + A_p^p(1−t)^p)^{1/p} / (1 − Φ^p(1) A_p^p (1−t)^p)^{1/p}`, when the denominator is positive.
pub fn continuity_factor(p: f64, phi1: f64, t: f64) -> Option<f64> {
    let w = (a_p(p) * (1.0 - t)).powf(p);
    let denom = 1.0 - phi1.powf(p) * w;
    (denom > 0.0).then(|| ((1.0 + w) / denom).powf(1.0 / p))
}

pub fn check_constant_relations(space: &Space, budget: usize, seed: u64) -> Result<CheckReport> {
    let p = triangle_exponent(space);
    let mut report = CheckReport::new("constant-relations", seed, TOLERANCE);
    let mut c = Checker::new(0, TOLERANCE);
    let est = |k| estimate_constant(space, k, budget, seed);
    let (kuc, klu, klp) = (
        est(ConstantKind::Kuc)?,
        est(ConstantKind::Klu)?,
        est(ConstantKind::Klp)?,
    );
    c.assert_le(
        "lower Kuc <= lower Klp",
        kuc.lower,
        klp.lower,
        || json!({ "Kuc": kuc.lower, "Klp": klp.lower }),
    );
    c.assert_le(
        "lower Klu <= lower Klp",
        klu.lower,
        klp.lower,
        || json!({ "Klu": klu.lower, "Klp": klp.lower }),
    );
    let bound = UPSILON_REAL * a_p(p);
    match (kuc.upper, klu.upper) {
        (Some(uc), Some(lu)) => {
            c.assert_le(
                "lower Klp <= Y A_p upper Kuc upper Klu",
                klp.lower,
                bound * uc * lu,
                || json!({ "Klp": klp.lower, "Kuc": uc, "Klu": lu }),
            );
            if let Some(lp) = klp.upper {
                c.assert_le(
                    "upper Klp <= Y A_p upper Kuc upper Klu",
                    lp,
                    bound * uc * lu,
                    || json!({ "Klp": lp, "Kuc": uc, "Klu": lu }),
                );
            }
        }
        _ => c.note("Klp product bound skipped: no certified uppers for Kuc and Klu"),
    }
    let grid = RELATION_T_GRID;
    let bundle = curve_bundle(space, &grid, budget, seed)?;
    let (big, small, rho) = (
        bundle.curve(CurveKind::PhiBig),
        bundle.curve(CurveKind::PhiSmall),
        bundle.curve(CurveKind::Rho),
    );
    for i in 0..grid.len() {
        let data = || json!({ "t": grid[i], "Phi": big[i].lower, "phi": small[i].lower, "rho": rho[i].lower });
        c.assert_le("lower rho(t) <= lower phi(t)", rho[i].lower, small[i].lower, data);
        c.assert_le("lower phi(t) <= lower Phi(t)", small[i].lower, big[i].lower, data);
        if i + 1 < grid.len() {
            for curve in [big, small, rho] {
                c.assert_le("curve non-increasing in t", curve[i + 1].lower, curve[i].lower, data);
            }
        }
    }
    match klp.upper {
        Some(u) => {
            for (t, e) in grid.iter().zip(rho) {
                if let Some(Witness::Projection { coeffs, set }) = &e.witness {
                    let num = space.norm_coeffs(&project_coeffs(coeffs, set))?.lo;
                    let den = space.norm_coeffs(coeffs)?.hi;
                    c.assert_le(
                        "rho witness vs Klp / t",
                        num,
                        u / t * den,
                        || json!({ "t": t, "coeffs": coeffs, "set": set }),
                    );
                }
            }
        }
        None => c.note("rho witnesses vs Klp skipped: no certified upper for Klp"),
    }
    // smallest c with lower Φ(t) ≤ c (1 − log t)^{1/p} on the grid
    let fit = grid
        .iter()
        .zip(big)
        .map(|(t, e)| e.lower / (1.0 - t.ln()).powf(1.0 / p))
        .fold(0.0, f64::max);
    c.assert_true("finite logarithmic fit", fit.is_finite(), || json!({ "c": fit }));
    report.note(format!("minimal c in Phi(t) <= c(1-log t)^(1/p): {fit:.6}"));
    match known_upper(space, ConstantKind::PhiBig(1.0)) {
        Some(u1) => {
            for (t, e) in grid.iter().zip(big) {
                if let Some(ct) = continuity_factor(p, u1, *t) {
                    c.assert_le(
                        "lower Phi(t) <= C(t) upper Phi(1)",
                        e.lower,
                        ct * u1,
                        || json!({ "t": t, "lower": e.lower, "C(t)": ct }),
                    );
                }
            }
        }
        None => c.note("continuity factor check skipped: no certified upper for Phi(1)"),
    }
    report.note(format!(
        "lower Kuc {:.6}, Klu {:.6}, Klp {:.6}",
        kuc.lower, klu.lower, klp.lower
    ));
    report.absorb(c);
    Ok(report)
}

/// Dual identities of both interleavings of `x` and `y`.
pub fn check_dual_identity(x: &Space, y: &Space) -> Result<CheckReport> {
    if x.dim != y.dim {
        return Err(Error::Dimension {
            expected: x.dim,
            got: y.dim,
        });
    }
    let mut report = CheckReport::new("dual-identity", 0, EXACT_TOLERANCE);
    for (name, cs) in [("ltimes", combine_ltimes(x, y)?), ("rtimes", combine_rtimes(x, y)?)] {
        let mut c = Checker::new(report.trials, EXACT_TOLERANCE);
        let err = dual_identity_error(&cs.space, x, y)?;
        c.assert_close(
            name,
            err,
            0.0,
            EXACT_TOLERANCE,
            || json!({ "combinator": name, "error": err }),
        );
        report.absorb(c);
    }
    Ok(report)
}

/// `|x_n^*(P_X T_A h)| ≤ |x_n^*(P_X h)|` after scaling by `min_A |h|`, on random greedy sets.
pub fn check_flattening(cs: &CombinedSpace, trials: usize, seed: u64) -> Result<CheckReport> {
    let dim = cs.space.dim;
    run_trials("flattening", trials, seed, EXACT_TOLERANCE, |rng, c| {
        let h = random_coeffs(rng, dim, 40.min(dim));
        let supp = h.iter().filter(|v| **v != 0.0).count();
        let a = canonical_greedy(&h, rng.gen_range(1..=supp));
        let slack = flattening_slack(cs, &h, &a)?;
        c.assert_le("pointwise domination", slack, 0.0, || json!({ "coeffs": h, "set": a }));
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::build_fqg_not_ucc;
    use crate::NormEngine;

    #[test]
    fn l2_relations() {
        let space = Space::canonical(4, NormEngine::lp(2.0)).unwrap();
        let r = check_constant_relations(&space, 500, 1).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn dual_identity_l1() {
        let x = Space::canonical(1, NormEngine::lp(1.0)).unwrap();
        let r = check_dual_identity(&x, &x).unwrap();
        assert!(r.passed());
        assert_eq!(r.trials, 2);
        let y = Space::canonical(2, NormEngine::lp(1.0)).unwrap();
        assert!(check_dual_identity(&x, &y).is_err());
    }

    #[test]
    fn flattening_on_fqg() {
        let cs = build_fqg_not_ucc(8, 1.0, 2.0).unwrap();
        assert!(check_flattening(&cs, 200, 4).unwrap().passed());
    }

    #[test]
    fn continuity_factor_at_one() {
        assert_eq!(continuity_factor(1.0, 3.0, 1.0), Some(1.0));
        assert!(continuity_factor(1.0, 3.0, 0.5).is_none());
    }
}
