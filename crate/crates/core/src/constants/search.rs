use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::kind::ConstantKind;
use crate::constants::witness::{projection_admissible, projection_numerator, ratio, raw_value, Witness};
use crate::error::{input, Result};
use crate::greedy::{canonical_greedy, greedy_sets, sign_of};
use crate::norms::NormEngine;
use crate::sets::{subsets, IndexSet};
use crate::Space;

/// Powers of 1/2 from 1 down to 2⁻⁶.
pub fn default_grid() -> Vec<f64> {
    (0..=6).map(|k| 0.5f64.powi(k)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Ratio evaluations allowed in the randomized phase.
    pub budget: usize,
    pub seed: u64,
    /// Coefficient magnitudes in `(0, 1]`.
    pub grid: Vec<f64>,
    /// Largest lattice (in states) that is enumerated exhaustively.
    pub exhaustive_limit: usize,
    /// Coordinates moved by one random restart.
    pub max_active: usize,
    pub restarts: usize,
    /// Merge magnitudes of stored witness vectors into the grid.
    pub use_stored_magnitudes: bool,
}

impl SearchConfig {
    pub fn new(budget: usize, seed: u64) -> Self {
        Self {
            budget,
            seed,
            grid: default_grid(),
            exhaustive_limit: 250_000,
            max_active: 12,
            restarts: 8,
            use_stored_magnitudes: true,
        }
    }

    pub fn with_grid(mut self, grid: Vec<f64>) -> Self {
        self.grid = grid;
        self.use_stored_magnitudes = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return input("magnitude grid is empty");
        }
        if self.grid.iter().any(|g| !(*g > 0.0 && *g <= 1.0)) {
            return input("grid magnitudes must lie in (0, 1]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub kind: ConstantKind,
    /// Certified lower bound (lo of numerators over hi of denominators).
    pub lower: f64,
    pub upper: Option<f64>,
    pub witness: Option<Witness>,
    pub budget_used: usize,
    pub seed: u64,
    /// Which phase produced the witness.
    pub source: String,
}

/// Best value found so far; ties keep the earlier candidate.
#[derive(Debug, Clone)]
pub(crate) struct Best {
    pub value: f64,
    pub witness: Option<Witness>,
    pub source: String,
}

impl Best {
    pub fn empty() -> Self {
        Self {
            value: 0.0,
            witness: None,
            source: "none".into(),
        }
    }

    pub fn offer(&mut self, value: f64, w: impl FnOnce() -> Witness, source: &str) -> bool {
        if value > self.value || self.witness.is_none() {
            self.value = value;
            self.witness = Some(w());
            self.source = source.to_string();
            true
        } else {
            false
        }
    }

    pub fn merge(&mut self, other: Best) {
        if other.witness.is_some() && (other.value > self.value || self.witness.is_none()) {
            *self = other;
        }
    }
}

/// Lattice norm on the canonical basis: every constant here is at most 1.
pub fn is_lattice_identity(space: &Space) -> bool {
    space.engine.is_lattice() && space.basis.is_identity()
}

/// Symmetric engines on the canonical basis: indicator norms depend only on `|A|`.
pub fn is_symmetric(space: &Space) -> bool {
    space.basis.is_identity()
        && matches!(
            space.engine,
            NormEngine::Lp { .. } | NormEngine::QuasiLp { .. } | NormEngine::Linf | NormEngine::WeakLp { .. }
        )
}

/// Certified upper bound from the engine structure or the space's recorded constants.
pub fn known_upper(space: &Space, kind: ConstantKind) -> Option<f64> {
    let structural = match kind {
        ConstantKind::FundFn(_) | ConstantKind::DemocracyRatio => None,
        _ if is_lattice_identity(space) => Some(1.0f64),
        _ => None,
    };
    let recorded = space.meta.known_uppers.get(&kind.to_string()).copied();
    match (structural, recorded) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

/// One coordinate choice: the value and an auxiliary flag whose meaning depends on the kind.
pub(crate) type Opt = (f64, bool);

pub(crate) fn coordinate_options(kind: ConstantKind, grid: &[f64]) -> Vec<Opt> {
    let mut out: Vec<Opt> = vec![(0.0, false)];
    match kind {
        ConstantKind::Kql => {
            out.extend([(1.0, true), (-1.0, true)]);
            for g in grid {
                out.extend([(*g, false), (-*g, false)]);
            }
        }
        ConstantKind::Kuc => out.extend([(1.0, false), (-1.0, false), (1.0, true), (-1.0, true)]),
        ConstantKind::Klu => {
            for g in grid {
                out.extend([(1.0 / g, false), (-1.0 / g, false)]);
            }
        }
        ConstantKind::Klp => {
            for g in grid {
                let t = 1.0 / g;
                out.extend([(t, true), (-t, true), (t, false), (-t, false)]);
            }
        }
        _ => {
            for g in grid {
                out.extend([(*g, false), (-*g, false)]);
            }
        }
    }
    out
}

/// Witness encoded by a non-projection state, or `None` for an empty set.
pub(crate) fn state_witness(kind: ConstantKind, x: &[f64], mask: &[bool]) -> Option<Witness> {
    let dim = x.len();
    match kind {
        ConstantKind::Kql => {
            let set: IndexSet = (0..dim).filter(|&n| mask[n]).collect();
            if set.is_empty() {
                return None;
            }
            let signs = set.iter().map(|n| x[n]).collect();
            let tail = (0..dim).map(|n| if mask[n] { 0.0 } else { x[n] }).collect();
            Some(Witness::Perturbed { set, signs, tail })
        }
        ConstantKind::Kuc | ConstantKind::Klu | ConstantKind::Klp => {
            let set: IndexSet = (0..dim).filter(|&n| x[n] != 0.0).collect();
            if set.is_empty() {
                return None;
            }
            let a: Vec<f64> = set.iter().map(|n| x[n]).collect();
            let b = set
                .iter()
                .map(|n| match kind {
                    ConstantKind::Kuc => {
                        if mask[n] {
                            x[n]
                        } else {
                            0.0
                        }
                    }
                    ConstantKind::Klu => sign_of(x[n]),
                    _ => {
                        if mask[n] {
                            sign_of(x[n])
                        } else {
                            -sign_of(x[n])
                        }
                    }
                })
                .collect();
            Some(Witness::Pair { set, b, a })
        }
        _ => None,
    }
}

fn support(f: &[f64]) -> Vec<usize> {
    (0..f.len()).filter(|&n| f[n] != 0.0).collect()
}

/// Greedy sets of `f` that avoid zero coefficients; sets reaching into the zeros only
/// reproduce `f` itself (or vanish) and are represented by the support.
fn greedy_candidates(f: &[f64], cap: usize) -> Vec<IndexSet> {
    let supp = support(f);
    if supp.is_empty() {
        return Vec::new();
    }
    let compressed: Vec<f64> = supp.iter().map(|&n| f[n]).collect();
    // With t = 1 a greedy set is the levels above some modulus plus a nonempty part of that level.
    let mut mods: Vec<f64> = compressed.iter().map(|v| v.abs()).collect();
    mods.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut count = 0.0f64;
    for run in mods.chunk_by(|a, b| a == b) {
        count += 2f64.powi(run.len().min(60) as i32) - 1.0;
    }
    let sets = if count <= cap as f64 {
        greedy_sets(&compressed, 1.0, compressed.len()).unwrap_or_default()
    } else {
        (1..=compressed.len())
            .map(|m| canonical_greedy(&compressed, m))
            .collect()
    };
    sets.into_iter()
        .filter(|s| !s.is_empty())
        .take(cap)
        .map(|s| s.iter().map(|i| supp[i]).collect())
        .collect()
}

/// Nonempty subsets of oscillation windows `[v, ratio·v]` anchored at each distinct magnitude.
fn window_candidates(space: &Space, f: &[f64], ratio: f64, top_only: bool, cap: usize) -> Vec<IndexSet> {
    let mut levels: Vec<f64> = f.iter().map(|v| v.abs()).filter(|v| *v > 0.0).collect();
    levels.sort_by(|a, b| b.partial_cmp(a).unwrap());
    levels.dedup();
    let mut out: Vec<IndexSet> = Vec::new();
    let s = levels.first().copied().unwrap_or(0.0);
    for &v in &levels {
        if top_only && v < ratio * s {
            break;
        }
        let win: Vec<usize> = if top_only {
            (0..f.len()).filter(|&n| f[n] != 0.0 && f[n].abs() >= v).collect()
        } else {
            (0..f.len())
                .filter(|&n| f[n].abs() >= v && f[n].abs() <= ratio * v)
                .collect()
        };
        if win.len() <= 10 {
            out.extend(subsets(&win).filter(|a| !a.is_empty() && a.iter().any(|n| f[n].abs() == v)));
        } else {
            let mut ranked = win.clone();
            ranked.sort_by_key(|&n| space.rank(n));
            for m in 1..=ranked.len() {
                out.push(ranked[..m].iter().copied().collect());
                out.push(ranked[ranked.len() - m..].iter().copied().collect());
            }
            for skip in 0..ranked.len().min(16) {
                out.push(
                    ranked
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != skip)
                        .map(|(_, n)| *n)
                        .collect(),
                );
            }
        }
        if out.len() >= cap {
            break;
        }
    }
    out.sort();
    out.dedup();
    out.truncate(cap);
    out
}

/// Candidate sets for a projection-type kind at `f`, already filtered for admissibility.
pub(crate) fn candidate_sets(space: &Space, kind: ConstantKind, f: &[f64], cap: usize) -> Vec<IndexSet> {
    let raw = match kind {
        ConstantKind::Kq | ConstantKind::Ktq | ConstantKind::Kfq => greedy_candidates(f, cap),
        ConstantKind::Kb => {
            let mut ms: Vec<usize> = support(f).into_iter().map(|n| space.rank(n) + 1).collect();
            ms.sort_unstable();
            ms.into_iter().map(|m| space.initial_segment(m)).collect()
        }
        ConstantKind::PhiBig(t) => window_candidates(space, f, 1.0 / t, false, cap),
        ConstantKind::PhiSmall(t) | ConstantKind::Rho(t) => window_candidates(space, f, t, true, cap),
        ConstantKind::Beta(big, _) => window_candidates(space, f, big, false, cap),
        _ => Vec::new(),
    };
    raw.into_iter()
        .filter(|a| projection_admissible(space, kind, f, a))
        .collect()
}

/// Evaluates a state; returns the best value with its witness and the number of ratios computed.
pub(crate) fn eval_state(
    space: &Space,
    kind: ConstantKind,
    x: &[f64],
    mask: &[bool],
    set_cap: usize,
) -> (Option<(f64, Witness)>, usize) {
    if kind.is_projection_type() {
        let den = match space.norm_coeffs(x) {
            Ok(d) if d.hi > 0.0 => d,
            _ => return (None, 0),
        };
        let mut best: Option<(f64, IndexSet)> = None;
        let sets = candidate_sets(space, kind, x, set_cap);
        let evals = sets.len();
        for a in sets {
            let num = match projection_numerator(kind, x, &a).and_then(|c| space.norm_coeffs(&c)) {
                Ok(n) => n,
                Err(_) => continue,
            };
            if let Some(v) = ratio(num, den) {
                if best.as_ref().is_none_or(|(b, _)| v > *b) {
                    best = Some((v, a));
                }
            }
        }
        (
            best.map(|(v, a)| {
                (
                    v,
                    Witness::Projection {
                        coeffs: x.to_vec(),
                        set: a,
                    },
                )
            }),
            evals,
        )
    } else {
        match state_witness(kind, x, mask) {
            Some(w) => match raw_value(space, kind, &w) {
                Ok(Some(v)) => (Some((v, w)), 1),
                _ => (None, 1),
            },
            None => (None, 0),
        }
    }
}

pub(crate) fn restart_rng(seed: u64, r: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ r.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Coordinate ascent from a random state on a random set of active coordinates, with
/// random kicks when a sweep stalls. `eval` returns the objective and the ratios it spent.
pub(crate) fn climb(
    dim: usize,
    opts: &[Opt],
    cfg: &SearchConfig,
    r: u64,
    budget: usize,
    mut eval: impl FnMut(&[f64], &[bool]) -> (Option<f64>, usize),
) -> usize {
    let mut rng = restart_rng(cfg.seed, r);
    let active: Vec<usize> = if dim <= cfg.max_active {
        (0..dim).collect()
    } else {
        let mut v = sample(&mut rng, dim, cfg.max_active).into_vec();
        v.sort_unstable();
        v
    };
    let mut x = vec![0.0; dim];
    let mut mask = vec![false; dim];
    for &i in &active {
        let o = opts[rng.gen_range(0..opts.len())];
        x[i] = o.0;
        mask[i] = o.1;
    }
    let (v0, e0) = eval(&x, &mask);
    let mut used = e0.max(1);
    let mut current = v0.unwrap_or(f64::NEG_INFINITY);
    while used < budget {
        let mut improved = false;
        for &i in &active {
            let keep = (x[i], mask[i]);
            let mut best_opt = keep;
            for &o in opts {
                if o == keep || used >= budget {
                    continue;
                }
                x[i] = o.0;
                mask[i] = o.1;
                let (v, e) = eval(&x, &mask);
                used += e.max(1);
                if let Some(val) = v {
                    if val > current {
                        current = val;
                        best_opt = o;
                        improved = true;
                    }
                }
            }
            x[i] = best_opt.0;
            mask[i] = best_opt.1;
        }
        if !improved && used < budget {
            for _ in 0..2.min(active.len()) {
                let i = active[rng.gen_range(0..active.len())];
                let o = opts[rng.gen_range(0..opts.len())];
                x[i] = o.0;
                mask[i] = o.1;
            }
            let (v, e) = eval(&x, &mask);
            used += e.max(1);
            current = v.unwrap_or(f64::NEG_INFINITY);
        }
    }
    used
}

pub(crate) fn local_search(
    space: &Space,
    kind: ConstantKind,
    opts: &[Opt],
    cfg: &SearchConfig,
    r: u64,
    budget: usize,
) -> (Best, usize) {
    let mut best = Best::empty();
    let used = climb(space.dim, opts, cfg, r, budget, |x, mask| {
        let (v, e) = eval_state(space, kind, x, mask, 64);
        match v {
            Some((val, w)) => {
                best.offer(val, || w, "search");
                (Some(val), e)
            }
            None => (None, e),
        }
    });
    (best, used)
}

/// Enumerates the whole option lattice when it is small enough.
pub(crate) fn exhaustive(space: &Space, kind: ConstantKind, opts: &[Opt], limit: usize) -> Option<(Best, usize)> {
    let dim = space.dim;
    let total = (opts.len() as f64).powi(dim as i32);
    if total > limit as f64 {
        return None;
    }
    let total = total as usize;
    let mut best = Best::empty();
    let mut used = 0;
    let mut x = vec![0.0; dim];
    let mut mask = vec![false; dim];
    for code in 0..total {
        let mut c = code;
        for i in 0..dim {
            let o = opts[c % opts.len()];
            c /= opts.len();
            x[i] = o.0;
            mask[i] = o.1;
        }
        let (v, e) = eval_state(space, kind, &x, &mask, usize::MAX);
        used += e;
        if let Some((val, w)) = v {
            best.offer(val, || w, "exhaustive");
        }
    }
    Some((best, used))
}

fn stored_magnitudes(space: &Space) -> Vec<f64> {
    let mut out = Vec::new();
    for v in &space.meta.witness_vectors {
        let s = v.coeffs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if s > 0.0 {
            out.extend(v.coeffs.iter().filter(|x| **x != 0.0).map(|x| x.abs() / s));
        }
    }
    out.sort_by(|a, b| b.partial_cmp(a).unwrap());
    out.dedup();
    out.truncate(8);
    out
}

pub(crate) fn effective_grid(space: &Space, cfg: &SearchConfig) -> Vec<f64> {
    let mut g = cfg.grid.clone();
    if cfg.use_stored_magnitudes {
        g.extend(stored_magnitudes(space));
    }
    g.sort_by(|a, b| b.partial_cmp(a).unwrap());
    g.dedup();
    g
}

/// Witnesses assembled from the vectors and sets stored with a constructed space.
fn stored_candidates(space: &Space, kind: ConstantKind) -> Vec<Witness> {
    let dim = space.dim;
    let vecs: Vec<&Vec<f64>> = space
        .meta
        .witness_vectors
        .iter()
        .map(|v| &v.coeffs)
        .filter(|v| v.len() == dim)
        .collect();
    let sets: Vec<&IndexSet> = space
        .meta
        .witness_sets
        .iter()
        .map(|s| &s.set)
        .filter(|s| s.last().is_none_or(|k| k < dim))
        .collect();
    let mut out = Vec::new();
    match kind {
        ConstantKind::Kql => {
            for s in &sets {
                if s.is_empty() {
                    continue;
                }
                out.push(Witness::Perturbed {
                    set: (*s).clone(),
                    signs: vec![1.0; s.len()],
                    tail: vec![0.0; dim],
                });
                for v in &vecs {
                    let signs: Vec<f64> = s.iter().map(|n| if v[n] < 0.0 { -1.0 } else { 1.0 }).collect();
                    let tail: Vec<f64> = (0..dim).map(|n| if s.contains(n) { 0.0 } else { v[n] }).collect();
                    if tail.iter().all(|t| t.abs() <= 1.0) {
                        out.push(Witness::Perturbed {
                            set: (*s).clone(),
                            signs,
                            tail,
                        });
                    }
                }
            }
        }
        ConstantKind::Kuc => {
            for big in &sets {
                for small in &sets {
                    if small.is_subset(big) && !small.is_empty() {
                        let a = vec![1.0; big.len()];
                        let b = big.iter().map(|n| if small.contains(n) { 1.0 } else { 0.0 }).collect();
                        out.push(Witness::Pair {
                            set: (*big).clone(),
                            b,
                            a,
                        });
                    }
                }
            }
        }
        ConstantKind::Klu | ConstantKind::Klp => {
            for v in &vecs {
                let set: IndexSet = (0..dim).filter(|&n| v[n] != 0.0).collect();
                if set.is_empty() {
                    continue;
                }
                let m = set.iter().fold(f64::INFINITY, |m, n| m.min(v[n].abs()));
                let a: Vec<f64> = set.iter().map(|n| v[n] / m).collect();
                let b = a.iter().map(|x| sign_of(*x)).collect();
                out.push(Witness::Pair { set, b, a });
            }
        }
        _ => {}
    }
    out
}

/// Structured states: indicators of initial and final segments with flat tails.
pub(crate) fn structured_states(space: &Space, kind: ConstantKind, grid: &[f64]) -> Vec<(Vec<f64>, Vec<bool>)> {
    let dim = space.dim;
    let mut out = Vec::new();
    let tails: Vec<f64> = std::iter::once(0.0)
        .chain(grid.iter().copied().filter(|g| *g < 1.0))
        .collect();
    for m in 1..=dim.min(16) {
        let heads = [space.order[..m].to_vec(), space.order[dim - m..].to_vec()];
        for head in heads {
            let rest: Vec<usize> = space
                .order
                .iter()
                .copied()
                .filter(|n| !head.contains(n))
                .take(16)
                .collect();
            for &g in &tails {
                let mut x = vec![0.0; dim];
                let mut mask = vec![false; dim];
                match kind {
                    ConstantKind::Kuc => {
                        for (j, &n) in head.iter().enumerate() {
                            x[n] = if g == 0.0 || j % 2 == 0 { 1.0 } else { -1.0 };
                            mask[n] = j < m.div_ceil(2);
                        }
                    }
                    ConstantKind::Klu | ConstantKind::Klp => {
                        let t = if g == 0.0 { 1.0 } else { 1.0 / g };
                        for (j, &n) in head.iter().enumerate() {
                            x[n] = if j == 0 { 1.0 } else { t };
                            mask[n] = true;
                        }
                    }
                    _ => {
                        for &n in &head {
                            x[n] = 1.0;
                            mask[n] = true;
                        }
                        for &n in &rest {
                            x[n] = g;
                        }
                    }
                }
                out.push((x, mask));
            }
        }
    }
    for k in 0..dim.min(32) {
        let mut x = vec![0.0; dim];
        let mut mask = vec![false; dim];
        x[k] = 1.0;
        mask[k] = true;
        out.push((x, mask));
    }
    out
}

/// Lower bound on a ratio constant by stored witnesses, structured candidates,
/// exhaustive enumeration of small lattices and budgeted randomized local search.
pub fn estimate_constant(space: &Space, kind: ConstantKind, budget: usize, seed: u64) -> Result<ConstantEstimate> {
    estimate_with(space, kind, &SearchConfig::new(budget, seed))
}

pub fn estimate_with(space: &Space, kind: ConstantKind, cfg: &SearchConfig) -> Result<ConstantEstimate> {
    kind.validate()?;
    cfg.validate()?;
    match kind {
        ConstantKind::FundFn(m) => {
            let rep =
                crate::constants::fundamental::fundamental_function(space, m.min(space.dim), cfg.budget, cfg.seed)?;
            let mut e = rep.values[m.min(space.dim) - 1].clone();
            e.kind = kind;
            return Ok(e);
        }
        ConstantKind::DemocracyRatio => {
            let rep =
                crate::constants::fundamental::fundamental_function(space, space.dim.min(16), cfg.budget, cfg.seed)?;
            return Ok(rep.democracy);
        }
        ConstantKind::Klp => return estimate_lpu(space, cfg),
        _ => {}
    }
    let (best, used) = search(space, kind, cfg);
    Ok(finish(space, kind, best, used, cfg.seed))
}

pub(crate) fn finish(space: &Space, kind: ConstantKind, best: Best, used: usize, seed: u64) -> ConstantEstimate {
    ConstantEstimate {
        kind,
        lower: best.value,
        upper: known_upper(space, kind),
        witness: best.witness,
        budget_used: used,
        seed,
        source: best.source,
    }
}

/// All search phases for one kind.
pub(crate) fn search(space: &Space, kind: ConstantKind, cfg: &SearchConfig) -> (Best, usize) {
    let grid = effective_grid(space, cfg);
    let opts = coordinate_options(kind, &grid);
    let mut best = Best::empty();
    let mut used = 0;
    for w in stored_candidates(space, kind) {
        used += 1;
        if crate::constants::witness::check_admissible(space, kind, &w).is_ok() {
            if let Ok(Some(v)) = raw_value(space, kind, &w) {
                best.offer(v, || w, "stored");
            }
        }
    }
    if kind.is_projection_type() {
        for v in &space.meta.witness_vectors {
            if v.coeffs.len() == space.dim {
                let (r, e) = eval_state(space, kind, &v.coeffs, &vec![false; space.dim], 256);
                used += e;
                if let Some((val, w)) = r {
                    best.offer(val, || w, "stored");
                }
            }
        }
    }
    for (x, mask) in structured_states(space, kind, &grid) {
        let (r, e) = eval_state(space, kind, &x, &mask, 64);
        used += e;
        if let Some((val, w)) = r {
            best.offer(val, || w, "structured");
        }
    }
    if let Some((b, e)) = exhaustive(space, kind, &opts, cfg.exhaustive_limit) {
        used += e;
        best.merge(b);
    }
    let restarts = cfg.restarts.max(1);
    let per = cfg.budget / restarts;
    if per > 0 {
        let results: Vec<(Best, usize)> = (0..restarts as u64)
            .into_par_iter()
            .map(|r| local_search(space, kind, &opts, cfg, r, per))
            .collect();
        for (b, e) in results {
            used += e;
            best.merge(b);
        }
    }
    (best, used)
}

/// `K_lp` dominates `K_uc` and `K_lu`: their witnesses are forwarded before the own search.
fn estimate_lpu(space: &Space, cfg: &SearchConfig) -> Result<ConstantEstimate> {
    let mut best = Best::empty();
    let mut used = 0;
    for sub in [ConstantKind::Kuc, ConstantKind::Klu] {
        let (b, e) = search(space, sub, cfg);
        used += e;
        if let Some(w) = b.witness {
            let source = format!("forwarded:{sub}");
            best.offer(b.value, || w, &source);
        }
    }
    let (own, e) = search(space, ConstantKind::Klp, cfg);
    used += e;
    best.merge(own);
    Ok(finish(space, ConstantKind::Klp, best, used, cfg.seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::witness::evaluate_witness;

    #[test]
    fn lp_constants_are_one() {
        let space = Space::canonical(4, NormEngine::lp(2.0)).unwrap();
        for kind in [
            ConstantKind::Ktq,
            ConstantKind::Kq,
            ConstantKind::Kql,
            ConstantKind::Kuc,
            ConstantKind::Klp,
        ] {
            let e = estimate_constant(&space, kind, 500, 1).unwrap();
            assert_eq!(e.lower, 1.0, "{kind}");
            assert_eq!(e.upper, Some(1.0));
            let w = e.witness.unwrap();
            assert_eq!(evaluate_witness(&space, kind, &w).unwrap(), e.lower);
        }
    }

    #[test]
    fn greedy_candidates_skip_zeros() {
        let sets = greedy_candidates(&[0.0, 2.0, 1.0, 0.0], 64);
        assert_eq!(sets, vec![IndexSet::from([1]), IndexSet::from([1, 2])]);
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let rows = vec![vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0], vec![0.3, -0.7, 1.0]];
        let space = Space::canonical(3, NormEngine::Polyhedral { rows }).unwrap();
        let cfg = SearchConfig {
            exhaustive_limit: 0,
            ..SearchConfig::new(2000, 9)
        };
        let a = estimate_with(&space, ConstantKind::Kq, &cfg).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| estimate_with(&space, ConstantKind::Kq, &cfg).unwrap());
        assert_eq!(a, b);
        assert!(a.lower >= 1.0);
    }
}
