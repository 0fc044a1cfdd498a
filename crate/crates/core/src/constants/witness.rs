use serde::{Deserialize, Serialize};

use crate::constants::kind::ConstantKind;
use crate::error::{input, Error, Result};
use crate::greedy::{indicator_coeffs, is_greedy, project_coeffs, restricted_truncation_coeffs, truncation_coeffs};
use crate::norms::Bounds;
use crate::sets::IndexSet;
use crate::Space;

/// Data realizing a lower bound; everything lives in coefficient coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Witness {
    /// A vector `f` and a set `A` (greedy set, projection set or initial segment).
    Projection {
        coeffs: Vec<f64>,
        set: IndexSet,
    },
    /// `1_{ε,A}` against `1_{ε,A} + tail`.
    Perturbed {
        set: IndexSet,
        signs: Vec<f64>,
        tail: Vec<f64>,
    },
    /// `Σ_A b_n x_n` against `Σ_A a_n x_n`, with `b` and `a` listed along `set`.
    Pair {
        set: IndexSet,
        b: Vec<f64>,
        a: Vec<f64>,
    },
    Indicator {
        set: IndexSet,
        signs: Vec<f64>,
    },
    /// `1_{ε,A}` against `1_{δ,B}`.
    Indicators {
        set: IndexSet,
        signs: Vec<f64>,
        other: IndexSet,
        other_signs: Vec<f64>,
    },
}

/// `num.lo / den.hi`, or `None` when the denominator vanishes.
pub fn ratio(num: Bounds<f64>, den: Bounds<f64>) -> Option<f64> {
    if den.hi > 0.0 {
        Some(num.lo / den.hi)
    } else {
        None
    }
}

fn extremes(f: &[f64], a: &IndexSet) -> (f64, f64) {
    a.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), n| {
        (lo.min(f[n].abs()), hi.max(f[n].abs()))
    })
}

/// `osc(f, A) ≤ bound`, tested as `max ≤ bound · min`.
pub fn osc_within(f: &[f64], a: &IndexSet, bound: f64) -> bool {
    let (lo, hi) = extremes(f, a);
    hi <= bound * lo
}

/// Number of consecutive pieces (in the basis ordering) of oscillation at most `d`
/// that the greedy cut produces on `A`.
pub fn partition_pieces(space: &Space, f: &[f64], a: &IndexSet, d: f64) -> usize {
    let mut ranked: Vec<usize> = a.iter().collect();
    ranked.sort_by_key(|&n| space.rank(n));
    let mut pieces = 0;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for n in ranked {
        let m = f[n].abs();
        let (nlo, nhi) = (lo.min(m), hi.max(m));
        if pieces == 0 || nhi > d * nlo {
            pieces += 1;
            lo = m;
            hi = m;
        } else {
            lo = nlo;
            hi = nhi;
        }
    }
    pieces
}

/// The count constraint: at most as many pieces as the 1-based position of the first element.
pub fn beta_feasible(space: &Space, f: &[f64], a: &IndexSet, big: f64, small: f64) -> bool {
    let first = match a.iter().map(|n| space.rank(n)).min() {
        Some(r) => r,
        None => return false,
    };
    osc_within(f, a, big) && partition_pieces(space, f, a, small) <= first + 1
}

fn sup_norm(f: &[f64]) -> f64 {
    f.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Side conditions of the projection-type constants on `(f, A)`.
pub fn projection_admissible(space: &Space, kind: ConstantKind, f: &[f64], a: &IndexSet) -> bool {
    if a.is_empty() {
        return false;
    }
    match kind {
        ConstantKind::Kq | ConstantKind::Ktq | ConstantKind::Kfq => is_greedy(f, a, 1.0),
        ConstantKind::Kb => *a == space.initial_segment(a.len()),
        ConstantKind::PhiBig(t) => osc_within(f, a, 1.0 / t),
        ConstantKind::PhiSmall(t) => {
            let s = sup_norm(f);
            s > 0.0 && a.iter().all(|n| f[n].abs() >= t * s)
        }
        ConstantKind::Rho(t) => {
            let s = sup_norm(f);
            s > 0.0 && f.iter().all(|v| *v == 0.0 || v.abs() >= t * s) && a.iter().all(|n| f[n] != 0.0)
        }
        ConstantKind::Beta(big, small) => beta_feasible(space, f, a, big, small),
        _ => false,
    }
}

fn unit_signs(s: &[f64]) -> bool {
    s.iter().all(|e| *e == 1.0 || *e == -1.0)
}

fn check_shape(space: &Space, set: &IndexSet, lens: &[usize]) -> Result<()> {
    space.check_set(set)?;
    for &l in lens {
        if l != set.len() {
            return Err(Error::Dimension {
                expected: set.len(),
                got: l,
            });
        }
    }
    Ok(())
}

/// Checks that `w` satisfies the side conditions of `kind`.
pub fn check_admissible(space: &Space, kind: ConstantKind, w: &Witness) -> Result<()> {
    kind.validate()?;
    let ok = match w {
        Witness::Projection { coeffs, set } => {
            if coeffs.len() != space.dim {
                return Err(Error::Dimension {
                    expected: space.dim,
                    got: coeffs.len(),
                });
            }
            space.check_set(set)?;
            coeffs.iter().all(|v| v.is_finite())
                && kind.is_projection_type()
                && projection_admissible(space, kind, coeffs, set)
        }
        Witness::Perturbed { set, signs, tail } => {
            check_shape(space, set, &[signs.len()])?;
            if tail.len() != space.dim {
                return Err(Error::Dimension {
                    expected: space.dim,
                    got: tail.len(),
                });
            }
            kind == ConstantKind::Kql
                && !set.is_empty()
                && unit_signs(signs)
                && tail.iter().all(|v| v.abs() <= 1.0)
                && set.iter().all(|n| tail[n] == 0.0)
        }
        Witness::Pair { set, b, a } => {
            check_shape(space, set, &[b.len(), a.len()])?;
            !set.is_empty()
                && b.iter().chain(a).all(|v| v.is_finite())
                && match kind {
                    ConstantKind::Kuc => unit_signs(a) && b.iter().zip(a).all(|(x, y)| *x == 0.0 || x == y),
                    ConstantKind::Klu => unit_signs(b) && b.iter().zip(a).all(|(x, y)| x * y >= 1.0),
                    ConstantKind::Klp => {
                        let bmax = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                        let amin = a.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
                        bmax <= amin
                    }
                    _ => false,
                }
        }
        Witness::Indicator { set, signs } => {
            check_shape(space, set, &[signs.len()])?;
            matches!(kind, ConstantKind::FundFn(m) if !set.is_empty() && set.len() <= m) && unit_signs(signs)
        }
        Witness::Indicators {
            set,
            signs,
            other,
            other_signs,
        } => {
            check_shape(space, set, &[signs.len()])?;
            check_shape(space, other, &[other_signs.len()])?;
            kind == ConstantKind::DemocracyRatio
                && !set.is_empty()
                && set.len() == other.len()
                && unit_signs(signs)
                && unit_signs(other_signs)
        }
    };
    if ok {
        Ok(())
    } else {
        input(format!("witness is not admissible for {kind}"))
    }
}

fn pair_coeffs(dim: usize, set: &IndexSet, vals: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for (n, v) in set.iter().zip(vals) {
        out[n] = *v;
    }
    out
}

/// Numerator of the projection-type ratio: `S_A f`, `R_A f` or `T_A f`.
pub fn projection_numerator(kind: ConstantKind, f: &[f64], a: &IndexSet) -> Result<Vec<f64>> {
    match kind {
        ConstantKind::Ktq => restricted_truncation_coeffs(f, a),
        ConstantKind::Kfq => truncation_coeffs(f, a),
        _ => Ok(project_coeffs(f, a)),
    }
}

/// The defining ratio at `w`, without admissibility checks. `None` for a vanishing denominator.
pub fn raw_value(space: &Space, kind: ConstantKind, w: &Witness) -> Result<Option<f64>> {
    let dim = space.dim;
    Ok(match w {
        Witness::Projection { coeffs, set } => {
            let num = space.norm_coeffs(&projection_numerator(kind, coeffs, set)?)?;
            ratio(num, space.norm_coeffs(coeffs)?)
        }
        Witness::Perturbed { set, signs, tail } => {
            let ind = indicator_coeffs(dim, signs, set)?;
            let sum: Vec<f64> = ind.iter().zip(tail).map(|(x, y)| x + y).collect();
            ratio(space.norm_coeffs(&ind)?, space.norm_coeffs(&sum)?)
        }
        Witness::Pair { set, b, a } => ratio(
            space.norm_coeffs(&pair_coeffs(dim, set, b))?,
            space.norm_coeffs(&pair_coeffs(dim, set, a))?,
        ),
        Witness::Indicator { set, signs } => Some(space.norm_coeffs(&indicator_coeffs(dim, signs, set)?)?.lo),
        Witness::Indicators {
            set,
            signs,
            other,
            other_signs,
        } => ratio(
            space.norm_coeffs(&indicator_coeffs(dim, signs, set)?)?,
            space.norm_coeffs(&indicator_coeffs(dim, other_signs, other)?)?,
        ),
    })
}

/// Re-evaluates a witness: admissibility first, then the ratio.
pub fn evaluate_witness(space: &Space, kind: ConstantKind, w: &Witness) -> Result<f64> {
    check_admissible(space, kind, w)?;
    raw_value(space, kind, w)?.ok_or_else(|| Error::Input("witness has a vanishing denominator".into()))
}

/// For a `Kql` witness `(A, ε, f)`: the sets `B = {n : |g_n| > 1}` and `A ∪ B` of
/// `g = 1_{ε,A} + f`, and whether both are greedy sets of `g`.
pub fn ql_split(w: &Witness) -> Option<(IndexSet, IndexSet, bool)> {
    let Witness::Perturbed { set, signs, tail } = w else {
        return None;
    };
    let mut g = tail.clone();
    for (n, e) in set.iter().zip(signs) {
        g[n] += *e;
    }
    let b: IndexSet = (0..g.len()).filter(|&n| g[n].abs() > 1.0).collect();
    let ab = set.union(&b);
    let ok = is_greedy(&g, &b, 1.0) && is_greedy(&g, &ab, 1.0);
    Some((b, ab, ok))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::NormEngine;

    #[test]
    fn partition_count() {
        let space = Space::canonical(6, NormEngine::lp(2.0)).unwrap();
        let f = [0.0, 1.0, 2.0, 4.0, 8.0, 0.0];
        let a = IndexSet::from([1, 2, 3, 4]);
        assert_eq!(partition_pieces(&space, &f, &a, 2.0), 2);
        assert_eq!(partition_pieces(&space, &f, &a, 1.5), 4);
        assert!(beta_feasible(&space, &f, &a, 8.0, 2.0));
        assert!(!beta_feasible(&space, &f, &a, 8.0, 1.5));
        assert!(!beta_feasible(&space, &f, &a, 4.0, 2.0));
    }

    #[test]
    fn admissibility() {
        let space = Space::canonical(3, NormEngine::lp(1.0)).unwrap();
        let w = Witness::Projection {
            coeffs: vec![3.0, -1.0, 0.0],
            set: IndexSet::from([0]),
        };
        assert_eq!(evaluate_witness(&space, ConstantKind::Ktq, &w).unwrap(), 0.75);
        let bad = Witness::Projection {
            coeffs: vec![3.0, -1.0, 0.0],
            set: IndexSet::from([1]),
        };
        assert!(evaluate_witness(&space, ConstantKind::Kq, &bad).is_err());
        assert!(evaluate_witness(&space, ConstantKind::Kql, &w).is_err());
        let p = Witness::Pair {
            set: IndexSet::from([0, 1]),
            b: vec![1.0, 0.0],
            a: vec![1.0, -1.0],
        };
        assert_eq!(evaluate_witness(&space, ConstantKind::Kuc, &p).unwrap(), 0.5);
        assert_eq!(evaluate_witness(&space, ConstantKind::Klp, &p).unwrap(), 0.5);
        assert!(evaluate_witness(&space, ConstantKind::Klu, &p).is_err());
        let q = Witness::Perturbed {
            set: IndexSet::from([0]),
            signs: vec![1.0],
            tail: vec![0.0, 2.0, 0.0],
        };
        assert!(evaluate_witness(&space, ConstantKind::Kql, &q).is_err());
    }

    #[test]
    fn split_sets_are_greedy() {
        let w = Witness::Perturbed {
            set: IndexSet::from([1]),
            signs: vec![-1.0],
            tail: vec![0.5, 0.0, 1.0],
        };
        let (b, ab, ok) = ql_split(&w).unwrap();
        assert!(b.is_empty());
        assert_eq!(ab, IndexSet::from([1]));
        assert!(ok);
    }
}
