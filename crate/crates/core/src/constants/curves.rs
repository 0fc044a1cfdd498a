use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::kind::ConstantKind;
use crate::constants::search::{
    candidate_sets, climb, coordinate_options, effective_grid, estimate_with, finish, known_upper, structured_states,
    Best, ConstantEstimate, SearchConfig,
};
use crate::constants::witness::{evaluate_witness, projection_admissible, ratio, Witness};
use crate::error::{input, Error, Result};
use crate::greedy::project_coeffs;
use crate::sets::IndexSet;
use crate::Space;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CurveKind {
    /// `Φ(t)`
    PhiBig,
    /// `φ(t)`
    PhiSmall,
    /// `ρ(t)`
    Rho,
}

impl CurveKind {
    pub fn at(self, t: f64) -> ConstantKind {
        match self {
            CurveKind::PhiBig => ConstantKind::PhiBig(t),
            CurveKind::PhiSmall => ConstantKind::PhiSmall(t),
            CurveKind::Rho => ConstantKind::Rho(t),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "Phi" => Ok(CurveKind::PhiBig),
            "phi" => Ok(CurveKind::PhiSmall),
            "rho" => Ok(CurveKind::Rho),
            _ => input(format!("unknown curve '{s}' (expected Phi, phi or rho)")),
        }
    }

    const ALL: [CurveKind; 3] = [CurveKind::PhiBig, CurveKind::PhiSmall, CurveKind::Rho];
}

/// The three curves estimated jointly on one grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveBundle {
    pub t_grid: Vec<f64>,
    pub phi_big: Vec<ConstantEstimate>,
    pub phi_small: Vec<ConstantEstimate>,
    pub rho: Vec<ConstantEstimate>,
}

impl CurveBundle {
    pub fn curve(&self, which: CurveKind) -> &[ConstantEstimate] {
        match which {
            CurveKind::PhiBig => &self.phi_big,
            CurveKind::PhiSmall => &self.phi_small,
            CurveKind::Rho => &self.rho,
        }
    }
}

/// `"start:end:count"`, evenly spaced and inclusive; every value must lie in `(0, 1]`.
pub fn parse_t_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return input(format!("grid spec '{spec}' is not start:end:count"));
    }
    let bad = || Error::Input(format!("bad grid spec '{spec}'"));
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 {
        return input("grid needs at least one point");
    }
    let grid: Vec<f64> = if n == 1 {
        vec![a]
    } else {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    };
    check_grid(&grid)?;
    Ok(grid)
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.is_empty() {
        return input("t grid is empty");
    }
    if let Some(t) = t_grid.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
        return input(format!("grid value {t} outside (0, 1]"));
    }
    Ok(())
}

/// Per-t, per-curve running maxima.
#[derive(Clone)]
struct Table {
    cells: Vec<[Best; 3]>,
}

impl Table {
    fn new(n: usize) -> Self {
        Self {
            cells: vec![[Best::empty(), Best::empty(), Best::empty()]; n],
        }
    }

    fn merge(&mut self, other: Table) {
        for (a, b) in self.cells.iter_mut().zip(other.cells) {
            for (x, y) in a.iter_mut().zip(b) {
                x.merge(y);
            }
        }
    }
}

/// Evaluates every candidate set of `f` once and offers each ratio to every (t, curve)
/// cell whose side conditions it meets. Returns the value at `target` and the ratios spent.
fn feed(
    space: &Space,
    ts: &[f64],
    f: &[f64],
    table: &mut Table,
    target: Option<(usize, usize)>,
    source: &str,
) -> (Option<f64>, usize) {
    let den = match space.norm_coeffs(f) {
        Ok(d) if d.hi > 0.0 => d,
        _ => return (None, 0),
    };
    let mut sets: BTreeSet<IndexSet> = BTreeSet::new();
    for &t in ts {
        for kind in [ConstantKind::PhiBig(t), ConstantKind::PhiSmall(t)] {
            sets.extend(candidate_sets(space, kind, f, 64));
        }
    }
    let mut at_target: Option<f64> = None;
    let evals = sets.len();
    for a in sets {
        let v = match space
            .norm_coeffs(&project_coeffs(f, &a))
            .ok()
            .and_then(|n| ratio(n, den))
        {
            Some(v) => v,
            None => continue,
        };
        for (i, &t) in ts.iter().enumerate() {
            for (j, c) in CurveKind::ALL.iter().enumerate() {
                if projection_admissible(space, c.at(t), f, &a) {
                    table.cells[i][j].offer(
                        v,
                        || Witness::Projection {
                            coeffs: f.to_vec(),
                            set: a.clone(),
                        },
                        source,
                    );
                    if target == Some((i, j)) && at_target.is_none_or(|b| v > b) {
                        at_target = Some(v);
                    }
                }
            }
        }
    }
    (at_target, evals)
}

/// Joint lower-bound estimates of `Φ`, `φ` and `ρ` on `t_grid`, each post-processed to its
/// non-increasing hull.
pub fn curve_bundle(space: &Space, t_grid: &[f64], budget: usize, seed: u64) -> Result<CurveBundle> {
    check_grid(t_grid)?;
    let cfg = SearchConfig::new(budget, seed);
    let mut grid = effective_grid(space, &cfg);
    grid.extend(t_grid.iter().copied());
    grid.sort_by(|a, b| b.partial_cmp(a).unwrap());
    grid.dedup();
    let opts = coordinate_options(ConstantKind::Kq, &grid);
    let mut table = Table::new(t_grid.len());
    let mut used = 0;
    for v in &space.meta.witness_vectors {
        if v.coeffs.len() == space.dim {
            used += feed(space, t_grid, &v.coeffs, &mut table, None, "stored").1;
        }
    }
    for (x, _) in structured_states(space, ConstantKind::Kq, &grid) {
        used += feed(space, t_grid, &x, &mut table, None, "structured").1;
    }
    let total = (opts.len() as f64).powi(space.dim as i32);
    if total <= 20_000.0 {
        let mut x = vec![0.0; space.dim];
        for code in 0..total as usize {
            let mut c = code;
            for xi in x.iter_mut() {
                *xi = opts[c % opts.len()].0;
                c /= opts.len();
            }
            used += feed(space, t_grid, &x, &mut table, None, "exhaustive").1;
        }
    }
    let targets = 3 * t_grid.len();
    let restarts = cfg.restarts.max(targets);
    let per = budget / restarts;
    if per > 0 {
        let runs: Vec<(Table, usize)> = (0..restarts as u64)
            .into_par_iter()
            .map(|r| {
                let target = ((r as usize / 3) % t_grid.len(), r as usize % 3);
                let mut local = Table::new(t_grid.len());
                let spent = climb(space.dim, &opts, &cfg, r, per, |x, _| {
                    feed(space, t_grid, x, &mut local, Some(target), "search")
                });
                (local, spent)
            })
            .collect();
        for (t, e) in runs {
            table.merge(t);
            used += e;
        }
    }
    let mut curves: Vec<Vec<ConstantEstimate>> = Vec::new();
    for (j, c) in CurveKind::ALL.iter().enumerate() {
        let mut est: Vec<ConstantEstimate> = table
            .cells
            .iter()
            .zip(t_grid)
            .map(|(cell, &t)| finish(space, c.at(t), cell[j].clone(), used, seed))
            .collect();
        monotone_hull(space, t_grid, &mut est);
        curves.push(est);
    }
    let rho = curves.pop().unwrap();
    let phi_small = curves.pop().unwrap();
    let phi_big = curves.pop().unwrap();
    Ok(CurveBundle {
        t_grid: t_grid.to_vec(),
        phi_big,
        phi_small,
        rho,
    })
}

/// Replaces each estimate by the best one at any larger `t`; a witness admissible at `t'`
/// stays admissible at every `t ≤ t'`.
pub fn monotone_hull(space: &Space, t_grid: &[f64], est: &mut [ConstantEstimate]) {
    let mut idx: Vec<usize> = (0..t_grid.len()).collect();
    idx.sort_by(|&a, &b| t_grid[a].partial_cmp(&t_grid[b]).unwrap());
    for w in (0..idx.len().saturating_sub(1)).rev() {
        let (lo, hi) = (idx[w], idx[w + 1]);
        if est[hi].lower > est[lo].lower {
            let Some(wit) = est[hi].witness.clone() else { continue };
            let kind = est[lo].kind;
            if let Ok(v) = evaluate_witness(space, kind, &wit) {
                if v > est[lo].lower {
                    est[lo].lower = v;
                    est[lo].witness = Some(wit);
                    est[lo].source = "hull".into();
                }
            }
        }
    }
}

/// Lower-bound curve for one of `Φ`, `φ`, `ρ`.
pub fn phi_curve(
    space: &Space,
    which: CurveKind,
    t_grid: &[f64],
    budget: usize,
    seed: u64,
) -> Result<Vec<ConstantEstimate>> {
    Ok(curve_bundle(space, t_grid, budget, seed)?.curve(which).to_vec())
}

/// Lower bound on `β(D, d)`.
pub fn beta_estimate(space: &Space, big: f64, small: f64, budget: usize, seed: u64) -> Result<ConstantEstimate> {
    let kind = ConstantKind::Beta(big, small);
    kind.validate()?;
    let mut e = estimate_with(space, kind, &SearchConfig::new(budget, seed))?;
    e.upper = known_upper(space, kind);
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::BasisRepr;
    use crate::NormEngine;

    #[test]
    fn grid_spec() {
        assert_eq!(parse_t_grid("0.25:1:4").unwrap(), vec![0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_t_grid("0.5:0.5:1").unwrap(), vec![0.5]);
        assert!(parse_t_grid("0:1:3").is_err());
        assert!(parse_t_grid("0.5:1").is_err());
        assert!(parse_t_grid("0.5:1:0").is_err());
    }

    #[test]
    fn lp_curves_are_one() {
        let space = Space::canonical(4, NormEngine::lp(2.0)).unwrap();
        let b = curve_bundle(&space, &[0.25, 0.5, 1.0], 600, 3).unwrap();
        for c in CurveKind::ALL {
            for e in b.curve(c) {
                assert_eq!(e.lower, 1.0);
                assert_eq!(e.upper, Some(1.0));
            }
        }
        assert!(curve_bundle(&space, &[1.5], 10, 0).is_err());
    }

    #[test]
    fn orderings_on_a_conditional_basis() {
        // Summing basis of l1 in dimension 4: b_k = e_0 + ... + e_k.
        let n = 4;
        let mut basis = vec![0.0; n * n];
        let mut dual = vec![0.0; n * n];
        for k in 0..n {
            for i in 0..=k {
                basis[i * n + k] = 1.0;
            }
            dual[k * n + k] = 1.0;
            if k + 1 < n {
                dual[k * n + k + 1] = -1.0;
            }
        }
        let space = Space::new(n, NormEngine::lp(1.0), BasisRepr::Dense { basis, dual }, None, 1.0).unwrap();
        let ts = [0.25, 0.5, 1.0];
        let b = curve_bundle(&space, &ts, 2000, 5).unwrap();
        for i in 0..ts.len() {
            assert!(b.rho[i].lower <= b.phi_small[i].lower);
            assert!(b.phi_small[i].lower <= b.phi_big[i].lower);
            if i + 1 < ts.len() {
                assert!(b.phi_big[i].lower >= b.phi_big[i + 1].lower);
            }
            for e in [&b.rho[i], &b.phi_small[i], &b.phi_big[i]] {
                let w = e.witness.as_ref().unwrap();
                assert_eq!(evaluate_witness(&space, e.kind, w).unwrap(), e.lower);
            }
        }
        assert!(b.phi_big[0].lower > 1.0);
    }
}
