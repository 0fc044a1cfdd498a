//! Brute-force evaluation of the defining ratios over a finite magnitude grid.
//!
//! Deliberately shares no code with the search: sets are bitmasks, admissibility is
//! tested inline and numerators are assembled by hand.

use crate::constants::kind::ConstantKind;
use crate::error::{input, Error, Result};
use crate::Space;

/// Calls `visit` on every vector in `choices[0] × … × choices[n-1]`.
fn product(choices: &[Vec<f64>], mut visit: impl FnMut(&[f64]) -> Result<()>) -> Result<()> {
    let n = choices.len();
    if choices.iter().any(|c| c.is_empty()) {
        return Ok(());
    }
    let mut idx = vec![0usize; n];
    let mut x: Vec<f64> = choices.iter().map(|c| c[0]).collect();
    loop {
        visit(&x)?;
        let mut i = 0;
        loop {
            if i == n {
                return Ok(());
            }
            idx[i] += 1;
            if idx[i] < choices[i].len() {
                x[i] = choices[i][idx[i]];
                break;
            }
            idx[i] = 0;
            x[i] = choices[i][0];
            i += 1;
        }
    }
}

fn in_mask(mask: u32, n: usize) -> bool {
    mask >> n & 1 == 1
}

/// Exhaustive maximum of the defining ratio of `kind` over coefficients drawn from `grid`.
///
/// For `Kql` the perturbation takes values in `±grid ∪ {0}`; for `Klu` and `Klp` the
/// multipliers `|a_n|` range over the reciprocals of the grid.
pub fn oracle_constant(space: &Space, kind: ConstantKind, grid: &[f64], dim_limit: usize) -> Result<f64> {
    let d = space.dim;
    if grid.is_empty() {
        return input("oracle grid is empty");
    }
    if grid.iter().any(|g| !(*g > 0.0 && *g <= 1.0)) {
        return input("oracle grid magnitudes must lie in (0, 1]");
    }
    if d > dim_limit {
        return input(format!("dimension {d} exceeds the oracle limit {dim_limit}"));
    }
    if !space.engine.is_exact() {
        return input("the oracle needs an exact norm engine");
    }
    let lattice: Vec<f64> = std::iter::once(0.0)
        .chain(grid.iter().flat_map(|g| [*g, -*g]))
        .collect();
    let nrm = |c: &[f64]| space.norm_coeffs(c).map(|b| b.lo);
    let mut best = 0.0f64;
    let full = (1u32 << d) - 1;
    match kind {
        ConstantKind::Kq | ConstantKind::Ktq | ConstantKind::Kfq | ConstantKind::Kb => {
            product(&vec![lattice.clone(); d], |f| {
                let den = nrm(f)?;
                if den == 0.0 {
                    return Ok(());
                }
                for mask in 1..=full {
                    let inside = (0..d)
                        .filter(|&n| in_mask(mask, n))
                        .map(|n| f[n].abs())
                        .fold(f64::INFINITY, f64::min);
                    let outside = (0..d)
                        .filter(|&n| !in_mask(mask, n))
                        .map(|n| f[n].abs())
                        .fold(0.0, f64::max);
                    let admissible = if kind == ConstantKind::Kb {
                        let m = mask.count_ones() as usize;
                        (0..d).all(|n| in_mask(mask, n) == (space.rank(n) < m))
                    } else {
                        inside >= outside
                    };
                    if !admissible {
                        continue;
                    }
                    let num: Vec<f64> = (0..d)
                        .map(|n| match (kind, in_mask(mask, n)) {
                            (ConstantKind::Ktq | ConstantKind::Kfq, true) => {
                                if f[n] < 0.0 {
                                    -inside
                                } else {
                                    inside
                                }
                            }
                            (ConstantKind::Kfq, false) => f[n],
                            (_, true) => f[n],
                            _ => 0.0,
                        })
                        .collect();
                    best = best.max(nrm(&num)? / den);
                }
                Ok(())
            })?;
        }
        ConstantKind::Kql => {
            for mask in 1..=full {
                let choices: Vec<Vec<f64>> = (0..d)
                    .map(|n| {
                        if in_mask(mask, n) {
                            vec![1.0, -1.0]
                        } else {
                            lattice.clone()
                        }
                    })
                    .collect();
                product(&choices, |x| {
                    let ind: Vec<f64> = (0..d).map(|n| if in_mask(mask, n) { x[n] } else { 0.0 }).collect();
                    let den = nrm(x)?;
                    if den > 0.0 {
                        best = best.max(nrm(&ind)? / den);
                    }
                    Ok(())
                })?;
            }
        }
        ConstantKind::Kuc => {
            for mask in 1..=full {
                let choices: Vec<Vec<f64>> = (0..d)
                    .map(|n| if in_mask(mask, n) { vec![1.0, -1.0] } else { vec![0.0] })
                    .collect();
                product(&choices, |eps| {
                    let den = nrm(eps)?;
                    let mut sub = mask;
                    loop {
                        let b: Vec<f64> = (0..d).map(|n| if in_mask(sub, n) { eps[n] } else { 0.0 }).collect();
                        best = best.max(nrm(&b)? / den);
                        if sub == 0 {
                            break;
                        }
                        sub = (sub - 1) & mask;
                    }
                    Ok(())
                })?;
            }
        }
        ConstantKind::Klu | ConstantKind::Klp => {
            let mults: Vec<f64> = grid.iter().map(|g| 1.0 / g).collect();
            let signed: Vec<f64> = mults.iter().flat_map(|t| [*t, -*t]).collect();
            for mask in 1..=full {
                let bs: Vec<Vec<f64>> = (0..d)
                    .map(|n| if in_mask(mask, n) { vec![1.0, -1.0] } else { vec![0.0] })
                    .collect();
                product(&bs, |b| {
                    let choices: Vec<Vec<f64>> = (0..d)
                        .map(|n| {
                            if !in_mask(mask, n) {
                                vec![0.0]
                            } else if kind == ConstantKind::Klu {
                                mults.iter().map(|t| t * b[n]).collect()
                            } else {
                                signed.clone()
                            }
                        })
                        .collect();
                    let num = nrm(b)?;
                    product(&choices, |a| {
                        let den = nrm(a)?;
                        if den > 0.0 {
                            best = best.max(num / den);
                        }
                        Ok(())
                    })
                })?;
            }
        }
        _ => return Err(Error::Unsupported(format!("no oracle for {kind}"))),
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::NormEngine;

    #[test]
    fn l2_ktq_is_one() {
        let space = Space::canonical(3, NormEngine::lp(2.0)).unwrap();
        let v = oracle_constant(&space, ConstantKind::Ktq, &[1.0, 0.5, 0.25], 6).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
        assert!(oracle_constant(&space, ConstantKind::Ktq, &[], 6).is_err());
        assert!(oracle_constant(&space, ConstantKind::Ktq, &[1.0], 2).is_err());
    }

    #[test]
    fn two_dim_polyhedral() {
        // max{|x1|, |x1 + x2|}: monotone for the canonical order, and every signed
        // indicator dominates its restrictions.
        let rows = vec![vec![1.0, 0.0], vec![1.0, 1.0]];
        let space = Space::canonical(2, NormEngine::Polyhedral { rows }).unwrap();
        let grid = [1.0, 0.5, 0.25];
        assert_eq!(oracle_constant(&space, ConstantKind::Kb, &grid, 6).unwrap(), 1.0);
        assert_eq!(oracle_constant(&space, ConstantKind::Kuc, &grid, 6).unwrap(), 1.0);
        assert!(oracle_constant(&space, ConstantKind::Kq, &grid, 6).unwrap() > 1.0);
    }
}
