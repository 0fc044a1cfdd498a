//! Coefficient-level primitives of the thresholding greedy algorithm.

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::scalar::{cmp_desc, Scalar};
use crate::sets::{subsets, IndexSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub struct CoeffProfile<S> {
    pub coeffs: Vec<S>,
    /// `ε(f)`, with `sgn(0) = +1`.
    pub sign: Vec<S>,
    pub support: IndexSet,
    pub sup_norm: S,
    /// Indices by decreasing modulus, ties by increasing index.
    pub sorted_order: Vec<usize>,
}

pub fn sign_of<S: Scalar>(x: S) -> S {
    if x < S::zero() {
        -S::one()
    } else {
        S::one()
    }
}

pub fn profile<S: Scalar>(coeffs: &[S]) -> Result<CoeffProfile<S>> {
    if coeffs.iter().any(|v| !v.is_finite()) {
        return input("coefficients must be finite");
    }
    Ok(CoeffProfile {
        coeffs: coeffs.to_vec(),
        sign: coeffs.iter().map(|v| sign_of(*v)).collect(),
        support: (0..coeffs.len()).filter(|&n| coeffs[n] != S::zero()).collect(),
        sup_norm: coeffs.iter().fold(S::zero(), |m, v| m.max(v.abs())),
        sorted_order: sorted_order(coeffs),
    })
}

pub fn sorted_order<S: Scalar>(coeffs: &[S]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..coeffs.len()).collect();
    idx.sort_by(|&a, &b| cmp_desc(coeffs[a].abs(), coeffs[b].abs()).then(a.cmp(&b)));
    idx
}

/// `A(f, a, b) = {n : a ≤ |a_n| ≤ b}`.
pub fn level_set<S: Scalar>(coeffs: &[S], a: S, b: S) -> Result<IndexSet> {
    if !(a > S::zero()) || !(a <= b) {
        return input(format!("window needs 0 < a <= b, got ({a}, {b})"));
    }
    Ok((0..coeffs.len())
        .filter(|&n| {
            let m = coeffs[n].abs();
            a <= m && m <= b
        })
        .collect())
}

/// `osc(f, A) = max_A |a_n| / min_A |a_n|` with `0/0 = 1` and `a/0 = ∞`.
pub fn oscillation<S: Scalar>(coeffs: &[S], a: &IndexSet) -> Result<S> {
    if a.is_empty() {
        return input("oscillation over the empty set");
    }
    if a.last().is_some_and(|k| k >= coeffs.len()) {
        return input("index outside the vector");
    }
    let (mut lo, mut hi) = (S::infinity(), S::zero());
    for n in a.iter() {
        let m = coeffs[n].abs();
        lo = lo.min(m);
        hi = hi.max(m);
    }
    Ok(if hi == S::zero() {
        S::one()
    } else if lo == S::zero() {
        S::infinity()
    } else {
        hi / lo
    })
}

pub fn project_coeffs<S: Scalar>(coeffs: &[S], a: &IndexSet) -> Vec<S> {
    let mut out = vec![S::zero(); coeffs.len()];
    for n in a.iter() {
        out[n] = coeffs[n];
    }
    out
}

/// Coefficients of `1_{ε,A}`; `eps` lists one sign per element of `A` in increasing order.
pub fn indicator_coeffs<S: Scalar>(dim: usize, eps: &[S], a: &IndexSet) -> Result<Vec<S>> {
    if eps.len() != a.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            got: eps.len(),
        });
    }
    if eps.iter().any(|e| *e != S::one() && *e != -S::one()) {
        return input("signs must be +1 or -1");
    }
    if a.last().is_some_and(|k| k >= dim) {
        return input("index outside dimension");
    }
    let mut out = vec![S::zero(); dim];
    for (n, e) in a.iter().zip(eps) {
        out[n] = *e;
    }
    Ok(out)
}

/// Coefficients of `R_A(f) = min_{n∈A}|a_n| · 1_{ε(f),A}`.
pub fn restricted_truncation_coeffs<S: Scalar>(coeffs: &[S], a: &IndexSet) -> Result<Vec<S>> {
    if a.is_empty() {
        return input("truncation over the empty set");
    }
    let m = a.iter().map(|n| coeffs[n].abs()).fold(S::infinity(), |x, y| x.min(y));
    let mut out = vec![S::zero(); coeffs.len()];
    for n in a.iter() {
        out[n] = m * sign_of(coeffs[n]);
    }
    Ok(out)
}

/// Coefficients of `T_A(f) = R_A(f) + f − S_A(f)`.
pub fn truncation_coeffs<S: Scalar>(coeffs: &[S], a: &IndexSet) -> Result<Vec<S>> {
    let mut out = restricted_truncation_coeffs(coeffs, a)?;
    for (n, v) in coeffs.iter().enumerate() {
        if !a.contains(n) {
            out[n] = *v;
        }
    }
    Ok(out)
}

/// `min_A |a_n| ≥ t · max_{A^c} |a_n|` (vacuous for `∅` and for the full index set).
pub fn is_greedy<S: Scalar>(coeffs: &[S], a: &IndexSet, t: S) -> bool {
    let mut inside = S::infinity();
    let mut outside = S::zero();
    for (n, v) in coeffs.iter().enumerate() {
        if a.contains(n) {
            inside = inside.min(v.abs());
        } else {
            outside = outside.max(v.abs());
        }
    }
    a.is_empty() || inside >= t * outside
}

/// All t-greedy sets of cardinality at most `max_card`, including `∅`.
///
/// A nonempty t-greedy set with minimum modulus `m` contains every index with modulus
/// `> m/t`, at least one index of modulus `m`, and otherwise any indices with modulus in `[m, m/t]`.
pub fn greedy_sets<S: Scalar>(coeffs: &[S], t: S, max_card: usize) -> Result<Vec<IndexSet>> {
    if !(t > S::zero() && t <= S::one()) {
        return input(format!("t must lie in (0,1], got {t}"));
    }
    let mut out = vec![IndexSet::new()];
    let mut levels: Vec<S> = coeffs.iter().map(|v| v.abs()).collect();
    levels.sort_by(|a, b| cmp_desc(*a, *b));
    levels.dedup();
    for m in levels {
        let upper = if m == S::zero() { S::zero() } else { m / t };
        let forced: Vec<usize> = (0..coeffs.len()).filter(|&n| coeffs[n].abs() > upper).collect();
        if forced.len() > max_card {
            continue;
        }
        let at_level: Vec<usize> = (0..coeffs.len()).filter(|&n| coeffs[n].abs() == m).collect();
        let optional: Vec<usize> = (0..coeffs.len())
            .filter(|&n| {
                let v = coeffs[n].abs();
                v > m && v <= upper
            })
            .collect();
        let room = max_card - forced.len();
        if at_level.len() + optional.len() > 24 {
            return input("too many optional indices to enumerate greedy sets");
        }
        for lev in subsets(&at_level).filter(|s| !s.is_empty() && s.len() <= room) {
            for opt in subsets(&optional).filter(|s| s.len() + lev.len() <= room) {
                let set: IndexSet = forced.iter().copied().chain(lev.iter()).chain(opt.iter()).collect();
                out.push(set);
            }
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// The canonical greedy set of size `m`: the first `m` indices of the sorted order.
pub fn canonical_greedy<S: Scalar>(coeffs: &[S], m: usize) -> IndexSet {
    sorted_order(coeffs).into_iter().take(m).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_examples() {
        let p = profile(&[3.0, -1.0, 0.0]).unwrap();
        assert_eq!(p.sign, vec![1.0, -1.0, 1.0]);
        assert_eq!(p.support.as_slice(), &[0, 1]);
        assert_eq!(p.sup_norm, 3.0);
        let z = profile(&[0.0, 0.0]).unwrap();
        assert!(z.support.is_empty());
        assert_eq!(z.sup_norm, 0.0);
        assert_eq!(z.sign, vec![1.0, 1.0]);
        assert_eq!(profile(&[2.0, 2.0, 1.0]).unwrap().sorted_order, vec![0, 1, 2]);
        assert!(profile(&[f64::NAN]).is_err());
    }

    #[test]
    fn level_and_osc() {
        let c = [4.0, 2.0, 1.0];
        assert_eq!(level_set(&c, 1.0, 2.0).unwrap().as_slice(), &[1, 2]);
        assert_eq!(level_set(&c, 0.5, 4.0).unwrap().as_slice(), &[0, 1, 2]);
        assert!(level_set(&c, 5.0, 6.0).unwrap().is_empty());
        let c = [4.0, 2.0, 1.0, 0.0];
        assert_eq!(oscillation(&c, &IndexSet::from([0, 1])).unwrap(), 2.0);
        assert_eq!(oscillation(&c, &IndexSet::from([0, 3])).unwrap(), f64::INFINITY);
        assert_eq!(oscillation(&[0.0, 0.0], &IndexSet::from([0, 1])).unwrap(), 1.0);
        assert!(oscillation(&c, &IndexSet::new()).is_err());
    }

    #[test]
    fn greedy_examples() {
        let sets = greedy_sets(&[2.0, 2.0, 1.0], 1.0, 3).unwrap();
        let expect: Vec<IndexSet> = vec![
            IndexSet::new(),
            IndexSet::from([0]),
            IndexSet::from([0, 1]),
            IndexSet::from([0, 1, 2]),
            IndexSet::from([1]),
        ];
        assert_eq!(sets, expect);
        let sets = greedy_sets(&[3.0, 2.0, 1.0], 1.0, 3).unwrap();
        assert_eq!(sets.len(), 4);
        assert!(!sets.contains(&IndexSet::from([0, 2])));
        assert!(greedy_sets(&[1.0], 0.0, 1).is_err());
        assert!(greedy_sets(&[1.0], 1.5, 1).is_err());
    }

    #[test]
    fn truncation_examples() {
        let a = IndexSet::from([0, 1]);
        assert_eq!(
            restricted_truncation_coeffs(&[3.0, -1.0, 0.0], &a).unwrap(),
            vec![1.0, -1.0, 0.0]
        );
        assert_eq!(restricted_truncation_coeffs(&[2.0, 2.0], &a).unwrap(), vec![2.0, 2.0]);
        assert_eq!(restricted_truncation_coeffs(&[2.0, 0.0], &a).unwrap(), vec![0.0, 0.0]);
        assert!(restricted_truncation_coeffs(&[2.0, 0.0], &IndexSet::new()).is_err());
        assert_eq!(truncation_coeffs(&[3.0, -1.0, 0.0], &a).unwrap(), vec![1.0, -1.0, 0.0]);
        assert_eq!(truncation_coeffs(&[3.0, -1.0, 5.0], &a).unwrap(), vec![1.0, -1.0, 5.0]);
        let all = IndexSet::from([0, 1, 2]);
        assert_eq!(truncation_coeffs(&[2.0, 2.0, 2.0], &all).unwrap(), vec![2.0, 2.0, 2.0]);
    }
}
