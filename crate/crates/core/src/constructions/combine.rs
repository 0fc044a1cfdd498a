use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::basis::{BasisRepr, BasisSpace, Combinator, NamedSet, NamedVector, SpaceMeta};
use crate::constructions::build::Certificate;
use crate::error::{check_len, input, Error, Result};
use crate::greedy::truncation_coeffs;
use crate::norms::NormEngine;
use crate::sets::IndexSet;
use crate::Space;

/// Parameters of the flattening-quasi-greedy / non-UCC instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FqgParams {
    pub m: usize,
    pub p_x: f64,
    pub p_y: f64,
}

/// Combinator-specific data kept next to the interleaved space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedInfo {
    pub combinator: Combinator,
    pub half: usize,
    pub fqg: Option<FqgParams>,
    /// `(1 + 2 max{1, α/β}) max{K₁, K₂}` when both parent basis constants are known.
    pub schauder_bound: Option<f64>,
    pub certificates: Vec<Certificate>,
    pub lower_bounds: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
pub struct CombinedSpace {
    pub space: Space,
    pub left: Space,
    pub right: Space,
    pub info: CombinedInfo,
}

/// Basis constant of a parent when it is structurally known.
fn known_basis_constant(s: &Space) -> Option<f64> {
    if s.basis.is_identity() && s.engine.is_lattice() {
        Some(1.0)
    } else {
        s.meta.known_uppers.get("Kb").copied()
    }
}

fn combine(x: &Space, y: &Space, combinator: Combinator) -> Result<CombinedSpace> {
    if x.dim != y.dim {
        return Err(Error::Dimension {
            expected: x.dim,
            got: y.dim,
        });
    }
    let half = x.dim;
    let engine = NormEngine::SupPair {
        left: Box::new(x.engine.clone()),
        right: Box::new(y.engine.clone()),
        split: half,
    };
    let basis = BasisRepr::Interleaved {
        combinator,
        left: Box::new(x.basis.clone()),
        right: Box::new(y.basis.clone()),
        half,
    };
    // interleaved ordering follows the parents' orderings pairwise
    let order: Vec<usize> = x.order.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
    let p_exp = x.p_exponent.min(y.p_exponent);
    let space = BasisSpace::new(2 * half, engine, basis, Some(order), p_exp)?;
    let norms = |s: &Space| -> Vec<f64> { (0..s.dim).map(|k| s.engine.eval(&s.basis_vector(k)).hi).collect() };
    let schauder_bound = match (known_basis_constant(x), known_basis_constant(y), combinator) {
        (Some(k1), Some(k2), Combinator::Ltimes) if x.order == y.order => {
            let alpha = norms(x).into_iter().fold(0.0f64, f64::max);
            let beta = norms(y).into_iter().fold(f64::INFINITY, f64::min);
            Some((1.0 + 2.0 * (alpha / beta).max(1.0)) * k1.max(k2))
        }
        _ => None,
    };
    let mut meta = SpaceMeta {
        label: format!("{combinator:?}").to_lowercase(),
        ..SpaceMeta::default()
    };
    if let Some(b) = schauder_bound {
        meta.known_uppers.insert("Kb".into(), b);
    }
    if combinator == Combinator::Ltimes
        && x.basis.is_identity()
        && y.basis.is_identity()
        && x.engine.is_lattice()
        && y.engine.is_lattice()
        && x.p_exponent == 1.0
        && y.p_exponent == 1.0
    {
        meta.known_uppers.insert("Kfq".into(), 1.0);
    }
    let space = space.with_meta(meta);
    let err = dual_identity_error(&space, x, y)?;
    let certificates = vec![Certificate::le("dual-identity", err, 1e-12)];
    Ok(CombinedSpace {
        space,
        left: x.clone(),
        right: y.clone(),
        info: CombinedInfo {
            combinator,
            half,
            fqg: None,
            schauder_bound,
            certificates,
            lower_bounds: BTreeMap::new(),
        },
    })
}

pub fn combine_ltimes(x: &Space, y: &Space) -> Result<CombinedSpace> {
    combine(x, y, Combinator::Ltimes)
}

pub fn combine_rtimes(x: &Space, y: &Space) -> Result<CombinedSpace> {
    combine(x, y, Combinator::Rtimes)
}

/// Max deviation in the dual identities of an interleaved space with parents `x`, `y`.
///
/// For ⋉: `x_n^*∘P_X = z_{2n-1}^* − z_{2n}^*` and `y_n^*∘P_Y = z_{2n}^*`.
/// For ⋊: `x_n^*∘P_X = w_{2n-1}^*` and `y_n^*∘P_Y = w_{2n-1}^* + w_{2n}^*`.
/// Every functional is compared on every ambient unit vector.
pub fn dual_identity_error(space: &Space, x: &Space, y: &Space) -> Result<f64> {
    let BasisRepr::Interleaved { combinator, half, .. } = &space.basis else {
        return input("dual identity needs an interleaved space");
    };
    let half = *half;
    check_len(2 * half, space.dim)?;
    check_len(half, x.dim)?;
    check_len(half, y.dim)?;
    let mut worst = 0.0f64;
    let mut e = vec![0.0; 2 * half];
    for i in 0..2 * half {
        e[i] = 1.0;
        let z = space.basis.coefficients(&e);
        let (xs, ys) = e.split_at(half);
        let cx = x.basis.coefficients(xs);
        let cy = y.basis.coefficients(ys);
        for n in 0..half {
            let (lx, ly) = match combinator {
                Combinator::Ltimes => (z[2 * n] - z[2 * n + 1], z[2 * n + 1]),
                Combinator::Rtimes => (z[2 * n], z[2 * n] + z[2 * n + 1]),
            };
            worst = worst.max((lx - cx[n]).abs()).max((ly - cy[n]).abs());
        }
        e[i] = 0.0;
    }
    // the synthesized basis vectors must also be the advertised pairs
    let mut c = vec![0.0; 2 * half];
    for k in 0..half {
        for (slot, expect_x, expect_y) in match combinator {
            Combinator::Ltimes => [(2 * k, 1.0, 0.0), (2 * k + 1, -1.0, 1.0)],
            Combinator::Rtimes => [(2 * k, 1.0, 1.0), (2 * k + 1, 0.0, 1.0)],
        } {
            c[slot] = 1.0;
            let v = space.basis.synthesize(&c);
            let xk = x.basis_vector(k);
            let yk = y.basis_vector(k);
            for i in 0..half {
                worst = worst.max((v[i] - expect_x * xk[i]).abs());
                worst = worst.max((v[half + i] - expect_y * yk[i]).abs());
            }
            c[slot] = 0.0;
        }
    }
    Ok(worst)
}

/// ⋉(ℓ_{pX}^m, ℓ_{pY}^m) with the sets `B = {odd positions}`, `D = {even positions}` (1-based).
pub fn build_fqg_not_ucc(m: usize, p_x: f64, p_y: f64) -> Result<CombinedSpace> {
    if m == 0 {
        return input("m must be positive");
    }
    if !(p_x >= 1.0) || !(p_x < p_y) {
        return input(format!("need 1 <= pX < pY, got pX = {p_x}, pY = {p_y}"));
    }
    let x = BasisSpace::canonical(m, NormEngine::lp(p_x))?;
    let y = BasisSpace::canonical(m, NormEngine::lp(p_y))?;
    let mut cs = combine_ltimes(&x, &y)?;
    let b: IndexSet = (0..m).map(|k| 2 * k).collect();
    let d: IndexSet = (0..m).map(|k| 2 * k + 1).collect();
    let bd = b.union(&d);
    let one_b = cs.space.indicator(&vec![1.0; m], &b)?;
    let one_bd = cs.space.indicator(&vec![1.0; 2 * m], &bd)?;
    let nb = cs.space.norm(&one_b)?.lo;
    let nbd = cs.space.norm(&one_bd)?.hi;
    let mf = m as f64;
    cs.info.certificates.push(Certificate::le(
        "indicator-B",
        (nb - mf.powf(1.0 / p_x)).abs(),
        1e-9 * nb.max(1.0),
    ));
    cs.info.certificates.push(Certificate::le(
        "indicator-BuD",
        (nbd - mf.powf(1.0 / p_y)).abs(),
        1e-9 * nbd.max(1.0),
    ));
    cs.info.lower_bounds.insert("Kuc".into(), nb / nbd);
    cs.info.fqg = Some(FqgParams { m, p_x, p_y });
    cs.space.meta.label = "fqg-not-ucc".into();
    cs.space.meta.witness_sets = vec![
        NamedSet {
            name: "B".into(),
            set: b,
        },
        NamedSet {
            name: "D".into(),
            set: d,
        },
        NamedSet {
            name: "BuD".into(),
            set: bd.clone(),
        },
    ];
    let mut ind = vec![0.0; 2 * m];
    for k in bd.iter() {
        ind[k] = 1.0;
    }
    cs.space.meta.witness_vectors = vec![NamedVector {
        name: "1_BuD".into(),
        coeffs: ind,
    }];
    Ok(cs)
}

/// Rebuilds a combined instance from its recorded parameters and compares the recorded data.
pub fn reverify_combined(info: &CombinedInfo, space: &Space) -> Result<()> {
    for c in &info.certificates {
        if !c.holds || !c.recheck() {
            return Err(Error::Integrity(format!("certificate '{}' fails", c.name)));
        }
    }
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
    if let Some(fp) = info.fqg {
        let fresh = build_fqg_not_ucc(fp.m, fp.p_x, fp.p_y)?;
        if fresh.space.engine != space.engine || fresh.space.basis != space.basis {
            return Err(Error::Integrity("combined space differs from a rebuild".into()));
        }
        if fresh.info.certificates.len() != info.certificates.len() {
            return Err(Error::Integrity("certificate list differs from a rebuild".into()));
        }
        for (f, s) in fresh.info.certificates.iter().zip(&info.certificates) {
            if f.name != s.name || !close(f.lhs, s.lhs) || !close(f.rhs, s.rhs) {
                return Err(Error::Integrity(format!("certificate '{}' does not re-verify", s.name)));
            }
        }
        for (k, v) in &info.lower_bounds {
            if !fresh.info.lower_bounds.get(k).is_some_and(|w| close(*v, *w)) {
                return Err(Error::Integrity(format!("recorded bound '{k}' does not re-verify")));
            }
        }
    }
    Ok(())
}

/// Coefficients of `P_X` in the left parent's basis: `x_n^*(P_X h)`.
pub fn left_coefficients(cs: &CombinedSpace, z: &[f64]) -> Result<Vec<f64>> {
    let amb = cs.space.synthesize(z)?;
    Ok(cs.left.basis.coefficients(&amb[..cs.info.half]))
}

/// Pointwise domination behind the flattening estimate: with `m = min_A |h_n|`,
/// `f = T_A(h)/m` and `g = h/m`, every left coefficient satisfies `|x_n^*(P_X f)| ≤ |x_n^*(P_X g)|`.
/// Returns the largest `|f_n| − |g_n|` (nonpositive when the domination holds).
pub fn flattening_slack(cs: &CombinedSpace, h: &[f64], a: &IndexSet) -> Result<f64> {
    if a.is_empty() {
        return Ok(0.0);
    }
    let m = a.iter().map(|n| h[n].abs()).fold(f64::INFINITY, f64::min);
    if m == 0.0 {
        return input("greedy set with a vanishing coefficient");
    }
    let f: Vec<f64> = truncation_coeffs(h, a)?.iter().map(|v| v / m).collect();
    let g: Vec<f64> = h.iter().map(|v| v / m).collect();
    let fx = left_coefficients(cs, &f)?;
    let gx = left_coefficients(cs, &g)?;
    Ok(fx
        .iter()
        .zip(&gx)
        .map(|(a, b)| a.abs() - b.abs())
        .fold(f64::NEG_INFINITY, f64::max))
}

/// Basis rescaled by `α`: vectors `α_n b_n`, functionals `b_n^*/α_n`; returns `K_α = min α / max α`.
pub fn scale_basis(space: &Space, alpha: &[f64]) -> Result<(Space, f64)> {
    check_len(space.dim, alpha.len())?;
    if alpha.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
        return input("scaling factors must be positive and finite");
    }
    let lo = alpha.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = alpha.iter().copied().fold(0.0, f64::max);
    let basis = BasisRepr::Scaled {
        alpha: alpha.to_vec(),
        inner: Box::new(space.basis.clone()),
    };
    let scaled = BasisSpace::new(
        space.dim,
        space.engine.clone(),
        basis,
        Some(space.order.clone()),
        space.p_exponent,
    )?;
    let mut meta = space.meta.clone();
    meta.known_uppers.clear();
    meta.witness_vectors.clear();
    Ok((scaled.with_meta(meta), lo / hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greedy::{canonical_greedy, is_greedy};

    #[test]
    fn ltimes_l1_example() {
        let x = BasisSpace::canonical(1, NormEngine::lp(1.0)).unwrap();
        let cs = combine_ltimes(&x, &x).unwrap();
        assert_eq!(cs.space.basis_vector(1), vec![-1.0, 1.0]);
        assert_eq!(cs.space.dual_row(0), vec![1.0, 1.0]);
        assert_eq!(cs.space.dual_row(1), vec![0.0, 1.0]);
        assert_eq!(dual_identity_error(&cs.space, &x, &x).unwrap(), 0.0);
        let r = combine_rtimes(&x, &x).unwrap();
        assert_eq!(r.space.basis_vector(0), vec![1.0, 1.0]);
        assert_eq!(r.space.basis_vector(1), vec![0.0, 1.0]);
        assert_eq!(dual_identity_error(&r.space, &x, &x).unwrap(), 0.0);
        assert_eq!(cs.info.schauder_bound, Some(3.0));
    }

    #[test]
    fn fqg_bounds() {
        let cs = build_fqg_not_ucc(4, 1.0, 2.0).unwrap();
        assert_eq!(cs.info.lower_bounds["Kuc"], 2.0);
        let cs = build_fqg_not_ucc(100, 1.0, 2.0).unwrap();
        assert!((cs.info.lower_bounds["Kuc"] - 10.0).abs() < 1e-9);
        assert_eq!(build_fqg_not_ucc(1, 1.0, 2.0).unwrap().info.lower_bounds["Kuc"], 1.0);
        assert!(build_fqg_not_ucc(3, 2.0, 1.0).is_err());
        let h = [3.0, -1.0, 0.5, 2.0, -2.5, 0.1, 0.7, 1.2];
        let cs = build_fqg_not_ucc(4, 1.0, 2.0).unwrap();
        for k in 1..=8 {
            let a = canonical_greedy(&h, k);
            assert!(flattening_slack(&cs, &h, &a).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn scaled_example() {
        let s = BasisSpace::canonical(2, NormEngine::lp(2.0)).unwrap();
        let (t, k) = scale_basis(&s, &[1.0, 0.5]).unwrap();
        assert_eq!(k, 0.5);
        assert_eq!(t.coefficients(&[1.0, 1.0]).unwrap(), vec![1.0, 2.0]);
        let (u, k1) = scale_basis(&s, &[1.0, 1.0]).unwrap();
        assert_eq!(k1, 1.0);
        assert_eq!(u.coefficients(&[3.0, -1.0]).unwrap(), vec![3.0, -1.0]);
        assert!(scale_basis(&s, &[1.0, 0.0]).is_err());
        // greedy sets in the scaled basis are K_α-greedy in the original one
        let f = [0.3, 0.25];
        let cf = t.coefficients(&f).unwrap();
        let a = canonical_greedy(&cf, 1);
        assert!(is_greedy(&s.coefficients(&f).unwrap(), &a, k));
    }
}
