//! Block seminorms over the Δ-family and their certified evaluation.
//!
//! A block consists of an anchor `n`, an interval part `I_n` and a budget part `B_n`.
//! Admissible Δ satisfy, per block:
//! `|δ| ≤ 1`, `w_n δ_n + Σ_{I_n} c_k δ_k + Σ_{B_n} δ_k = 0`, `|δ_k| ≤ k^{-1/p'}` on `I_n`,
//! and the sorted partial sums of `|δ|` on `B_n` are dominated by `Σ_{k≤m} k^{-1/p'}`.
//! Indices are 0-based; the weight exponent uses the 1-based position `k = index + 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, input, Result};
use crate::norms::lp::{conjugate, increment};
use crate::scalar::{cmp_desc, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaVariant {
    /// Anchors carry interval and budget parts.
    Full,
    /// Interval parts only; anchor weights are 1.
    IntervalOnly,
    /// Budget parts only.
    BudgetOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub struct DeltaBlock<S> {
    pub anchor: usize,
    pub anchor_weight: S,
    pub interval: Vec<usize>,
    pub interval_weights: Vec<S>,
    pub budget: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub struct DeltaFamilySpec<S> {
    pub dim: usize,
    /// Exponent of the outer block sum; the weights use its conjugate.
    pub p: S,
    pub variant: DeltaVariant,
    pub blocks: Vec<DeltaBlock<S>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Anchor,
    Interval,
    Budget,
}

/// Per-block data in the block order: anchor first, then `I ∪ B` by index.
#[derive(Debug, Clone)]
struct BlockData<S> {
    members: Vec<usize>,
    role: Vec<Role>,
    eq: Vec<S>,
    cap: Vec<S>,
    budget_steps: Vec<S>,
}

impl<S: Scalar> DeltaFamilySpec<S> {
    pub fn pprime(&self) -> S {
        conjugate(self.p)
    }

    /// `k^{-1/p'}` cap of a 0-based index.
    pub fn cap(&self, index: usize) -> S {
        increment(index + 1, self.pprime())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > S::one()) || self.p.is_infinite() {
            return input("delta family needs a finite exponent p > 1");
        }
        let mut seen = vec![false; self.dim];
        let mut mark = |k: usize| -> Result<()> {
            if k >= self.dim {
                return input(format!("delta index {k} outside dimension {}", self.dim));
            }
            if seen[k] {
                return input(format!("delta index {k} used twice"));
            }
            seen[k] = true;
            Ok(())
        };
        for b in &self.blocks {
            mark(b.anchor)?;
            for &k in b.interval.iter().chain(&b.budget) {
                mark(k)?;
            }
            if b.interval.len() != b.interval_weights.len() {
                return input("interval weights do not match interval length");
            }
            if !(b.anchor_weight > S::zero()) || !b.anchor_weight.is_finite() {
                return input("anchor weights must be positive");
            }
            if b.interval_weights.iter().any(|c| !(*c > S::zero()) || !c.is_finite()) {
                return input("interval weights must be positive");
            }
            if !strictly_increasing(&b.interval) || !strictly_increasing(&b.budget) {
                return input("block parts must be listed in increasing index order");
            }
            match self.variant {
                DeltaVariant::IntervalOnly => {
                    if !b.budget.is_empty() || b.anchor_weight != S::one() {
                        return input("interval-only variant takes no budget parts and unit anchor weights");
                    }
                }
                DeltaVariant::BudgetOnly => {
                    if !b.interval.is_empty() {
                        return input("budget-only variant takes no interval parts");
                    }
                }
                DeltaVariant::Full => {}
            }
        }
        // layout: every anchor precedes every non-anchor, and I_n < B_n < I_{n+1}
        let anchors: Vec<usize> = self.blocks.iter().map(|b| b.anchor).collect();
        if !strictly_increasing(&anchors) {
            return input("anchors must be increasing");
        }
        let mut last = anchors.last().copied();
        for b in &self.blocks {
            for &k in b.interval.iter().chain(&b.budget) {
                if let Some(prev) = last {
                    if k <= prev {
                        return input("blocks must satisfy A < I_1 < B_1 < I_2 < ...");
                    }
                }
                last = Some(k);
            }
        }
        // interval weights nonincreasing along the index order
        let ws: Vec<S> = self
            .blocks
            .iter()
            .flat_map(|b| b.interval_weights.iter().copied())
            .collect();
        if ws.windows(2).any(|w| w[1] > w[0]) {
            return input("interval weights must be nonincreasing");
        }
        Ok(())
    }

    /// Sorted index universe `E_M`.
    pub fn universe(&self) -> Vec<usize> {
        let mut u: Vec<usize> = self
            .blocks
            .iter()
            .flat_map(|b| {
                std::iter::once(b.anchor)
                    .chain(b.interval.iter().copied())
                    .chain(b.budget.iter().copied())
            })
            .collect();
        u.sort_unstable();
        u
    }

    /// Members of block `n` in the block order: anchor, then `I_n ∪ B_n` by index.
    pub fn members(&self, n: usize) -> Vec<usize> {
        self.block_data(n).members
    }

    fn block_data(&self, n: usize) -> BlockData<S> {
        let b = &self.blocks[n];
        let mut rest: Vec<(usize, Role, S, S)> = b
            .interval
            .iter()
            .zip(&b.interval_weights)
            .map(|(&k, &c)| (k, Role::Interval, c, self.cap(k)))
            .chain(b.budget.iter().map(|&k| (k, Role::Budget, S::one(), S::one())))
            .collect();
        rest.sort_by_key(|r| r.0);
        let mut data = BlockData {
            members: vec![b.anchor],
            role: vec![Role::Anchor],
            eq: vec![b.anchor_weight],
            cap: vec![S::one()],
            budget_steps: (1..=b.budget.len()).map(|k| increment(k, self.pprime())).collect(),
        };
        for (k, r, a, c) in rest {
            data.members.push(k);
            data.role.push(r);
            data.eq.push(a);
            data.cap.push(c);
        }
        data
    }

    fn all_blocks(&self) -> Vec<BlockData<S>> {
        (0..self.blocks.len()).map(|n| self.block_data(n)).collect()
    }
}

fn strictly_increasing(v: &[usize]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

fn sgn<S: Scalar>(x: S) -> S {
    if x < S::zero() {
        -S::one()
    } else {
        S::one()
    }
}

/// `‖f‖_{Δ,n,l}`: full block sums over blocks before `n`, and the partial sum of block `n`
/// over its members up to and including the index `l`.
pub fn seminorm_delta<S: Scalar>(spec: &DeltaFamilySpec<S>, delta: &[S], f: &[S], n: usize, l: usize) -> Result<S> {
    check_len(spec.dim, delta.len())?;
    check_len(spec.dim, f.len())?;
    if n >= spec.blocks.len() {
        return input(format!("block {n} does not exist"));
    }
    let members = spec.members(n);
    let Some(pos) = members.iter().position(|&k| k == l) else {
        return input(format!("index {l} is not in block {n}"));
    };
    let p = spec.p;
    let mut acc = S::zero();
    for j in 0..n {
        let s: S = spec.members(j).iter().map(|&k| delta[k] * f[k]).sum();
        acc = acc + s.abs().powf(p);
    }
    let partial: S = members[..=pos].iter().map(|&k| delta[k] * f[k]).sum();
    acc = acc + partial.abs().powf(p);
    Ok(acc.powf(p.recip()))
}

/// Value `sup_{n,l} ‖f‖_{Δ,n,l}` for a fixed Δ, with the maximizing `(block, l)`.
pub fn delta_value<S: Scalar>(spec: &DeltaFamilySpec<S>, delta: &[S], f: &[S]) -> (S, usize, usize) {
    let p = spec.p;
    let mut prefix = S::zero();
    let mut best = (S::zero(), 0usize, spec.blocks.first().map(|b| b.anchor).unwrap_or(0));
    for n in 0..spec.blocks.len() {
        let members = spec.members(n);
        let mut partial = S::zero();
        for &k in &members {
            partial = partial + delta[k] * f[k];
            let cand = prefix + partial.abs().powf(p);
            if cand > best.0 {
                best = (cand, n, k);
            }
        }
        prefix = prefix + partial.abs().powf(p);
    }
    (best.0.powf(p.recip()), best.1, best.2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport<S> {
    pub feasible: bool,
    /// Largest constraint excess observed (0 when every constraint holds exactly).
    pub worst_excess: S,
    pub violations: Vec<String>,
}

/// Checks the four constraint families for `delta` (entries outside `E_M` must vanish).
pub fn check_delta_feasible<S: Scalar>(spec: &DeltaFamilySpec<S>, delta: &[S]) -> Result<FeasibilityReport<S>> {
    check_len(spec.dim, delta.len())?;
    let tol = S::norm_tol();
    let mut worst = S::zero();
    let mut violations = Vec::new();
    let mut note = |excess: S, msg: String, worst: &mut S| {
        if excess > *worst {
            *worst = excess;
        }
        if excess > tol {
            violations.push(msg);
        }
    };
    let universe = spec.universe();
    for (k, d) in delta.iter().enumerate() {
        if universe.binary_search(&k).is_err() && *d != S::zero() {
            note(
                d.abs(),
                format!("index {k} outside the universe carries {d}"),
                &mut worst,
            );
        }
    }
    for (n, _) in spec.blocks.iter().enumerate() {
        let data = spec.block_data(n);
        let mut eq = S::zero();
        let mut scale = S::one();
        let mut budget = Vec::new();
        for (i, &k) in data.members.iter().enumerate() {
            let d = delta[k];
            eq = eq + data.eq[i] * d;
            scale = scale.max((data.eq[i] * d).abs());
            match data.role[i] {
                Role::Anchor => note(d.abs() - S::one(), format!("|delta_{k}| = {} > 1", d.abs()), &mut worst),
                Role::Interval => {
                    note(d.abs() - S::one(), format!("|delta_{k}| > 1"), &mut worst);
                    note(
                        d.abs() - data.cap[i],
                        format!("|delta_{k}| = {} exceeds cap {}", d.abs(), data.cap[i]),
                        &mut worst,
                    );
                }
                Role::Budget => {
                    note(d.abs() - S::one(), format!("|delta_{k}| > 1"), &mut worst);
                    budget.push(d.abs());
                }
            }
        }
        note(
            eq.abs() / scale,
            format!("block {n}: balance residual {eq}"),
            &mut worst,
        );
        budget.sort_by(|a, b| cmp_desc(*a, *b));
        let mut sum = S::zero();
        let mut cap = S::zero();
        for (m, v) in budget.iter().enumerate() {
            sum = sum + *v;
            cap = cap + data.budget_steps[m];
            note(
                sum - cap,
                format!("block {n}: top-{} budget sum {sum} exceeds {cap}", m + 1),
                &mut worst,
            );
        }
    }
    Ok(FeasibilityReport {
        feasible: violations.is_empty(),
        worst_excess: worst,
        violations,
    })
}

/// Relaxed upper bound: drop the balance constraint, then bound each block by
/// `|f_n| + Σ_I k^{-1/p'}|f_k| + (rearrangement pairing of |f| on B with k^{-1/p'})`.
pub fn eval_delta_upper<S: Scalar>(spec: &DeltaFamilySpec<S>, f: &[S]) -> Result<S> {
    check_len(spec.dim, f.len())?;
    let p = spec.p;
    let mut acc = S::zero();
    for n in 0..spec.blocks.len() {
        let data = spec.block_data(n);
        let mut u = S::zero();
        let mut budget = Vec::new();
        for (i, &k) in data.members.iter().enumerate() {
            match data.role[i] {
                Role::Budget => budget.push(f[k].abs()),
                _ => u = u + data.cap[i] * f[k].abs(),
            }
        }
        budget.sort_by(|a, b| cmp_desc(*a, *b));
        u = u + budget.iter().zip(&data.budget_steps).map(|(a, h)| *a * *h).sum();
        acc = acc + u.powf(p);
    }
    Ok(acc.powf(p.recip()))
}

/// Solution of one block problem `max w·δ` over the block's admissible set.
#[derive(Debug, Clone)]
struct BlockSolution<S> {
    value: S,
    upper: S,
    delta: Vec<S>,
}

/// Exact block solver. The maximum of `w·δ` equals `min_λ g(λ)` where
/// `g(λ) = Σ_{anchor,I} |w_i − λ a_i| cap_i + Σ_r h_r (|w_B − λ|)*_r` is convex and piecewise
/// linear; every `g(λ)` is an upper bound, and the two one-sided maximizers at the minimizing
/// breakpoint are mixed into a primal point satisfying the balance constraint.
fn solve_block<S: Scalar>(data: &BlockData<S>, w: &[S]) -> BlockSolution<S> {
    let size = data.members.len();
    let mut nz: Vec<usize> = Vec::new();
    let mut zero_mass = S::zero();
    let mut budget: Vec<usize> = Vec::new();
    for i in 0..size {
        match data.role[i] {
            Role::Budget => budget.push(i),
            _ => {
                if w[i] != S::zero() {
                    nz.push(i);
                } else {
                    zero_mass = zero_mass + data.eq[i] * data.cap[i];
                }
            }
        }
    }
    let g = |lam: S| -> S {
        let mut v = lam.abs() * zero_mass;
        for &i in &nz {
            v = v + (w[i] - lam * data.eq[i]).abs() * data.cap[i];
        }
        if !budget.is_empty() {
            let mut mags: Vec<S> = budget.iter().map(|&i| (w[i] - lam).abs()).collect();
            mags.sort_by(|a, b| cmp_desc(*a, *b));
            v = v + mags.iter().zip(&data.budget_steps).map(|(a, h)| *a * *h).sum();
        }
        v
    };
    // maximizer of (w − λa)·δ over the box/budget set, and its balance value a·δ
    let argmax = |lam: S| -> (Vec<S>, S) {
        let mut delta = vec![S::zero(); size];
        for i in 0..size {
            if data.role[i] != Role::Budget {
                delta[i] = sgn(w[i] - lam * data.eq[i]) * data.cap[i];
            }
        }
        let mut order: Vec<usize> = budget.clone();
        order.sort_by(|&a, &b| cmp_desc((w[a] - lam).abs(), (w[b] - lam).abs()));
        for (r, &i) in order.iter().enumerate() {
            delta[i] = sgn(w[i] - lam) * data.budget_steps[r];
        }
        let s: S = (0..size).map(|i| data.eq[i] * delta[i]).sum();
        (delta, s)
    };

    let mut bps: Vec<S> = nz.iter().map(|&i| w[i] / data.eq[i]).collect();
    if zero_mass > S::zero() {
        bps.push(S::zero());
    }
    for (x, &i) in budget.iter().enumerate() {
        bps.push(w[i]);
        if budget.len() <= 400 {
            for &j in &budget[x + 1..] {
                if w[i] != w[j] {
                    bps.push((w[i] + w[j]) / S::lit(2.0));
                }
            }
        }
    }
    if bps.is_empty() {
        return BlockSolution {
            value: S::zero(),
            upper: S::zero(),
            delta: vec![S::zero(); size],
        };
    }
    bps.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    bps.dedup();
    let k = bps.len();
    // unimodal search over the sorted breakpoints
    let (mut lo, mut hi) = (0usize, k - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if g(bps[mid]) <= g(bps[mid + 1]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let mut i = lo;
    let probe = |i: usize| -> (S, S) {
        let left = if i > 0 {
            (bps[i - 1] + bps[i]) / S::lit(2.0)
        } else {
            bps[0] - S::one().max(bps[0].abs())
        };
        let right = if i + 1 < k {
            (bps[i] + bps[i + 1]) / S::lit(2.0)
        } else {
            bps[k - 1] + S::one().max(bps[k - 1].abs())
        };
        (left, right)
    };
    let (mut dl, mut sl, mut dr, mut sr);
    let mut steps = 0;
    loop {
        let (l, r) = probe(i);
        let a = argmax(l);
        let b = argmax(r);
        (dl, sl, dr, sr) = (a.0, a.1, b.0, b.1);
        steps += 1;
        if sl < S::zero() && i > 0 && steps <= k + 2 {
            i -= 1;
        } else if sr > S::zero() && i + 1 < k && steps <= k + 2 {
            i += 1;
        } else {
            break;
        }
    }
    let denom = sl - sr;
    let theta = if denom > S::zero() {
        (sl / denom).max(S::zero()).min(S::one())
    } else {
        S::lit(0.5)
    };
    let mut delta: Vec<S> = dr
        .iter()
        .zip(&dl)
        .map(|(r, l)| theta * *r + (S::one() - theta) * *l)
        .collect();
    let mut value: S = (0..size).map(|j| w[j] * delta[j]).sum();
    if value < S::zero() {
        value = -value;
        delta.iter_mut().for_each(|d| *d = -*d);
    }
    let upper_raw = g(bps[i]);
    let pad = upper_raw * S::epsilon() * S::from_index(4 * size + 8);
    BlockSolution {
        value,
        upper: upper_raw + pad,
        delta,
    }
}

/// Certified enclosure of the ◁-seminorm together with the lower witness.
#[derive(Debug, Clone)]
pub struct DeltaEval<S> {
    pub lo: S,
    pub hi: S,
    pub witness: Vec<S>,
    pub block: usize,
    pub l: usize,
}

/// Evaluates the ◁-seminorm by solving every block problem exactly (full block sums and
/// the prefix sums that matter), then combining blocks through the outer p-sum.
pub fn eval_delta<S: Scalar>(spec: &DeltaFamilySpec<S>, f: &[S]) -> Result<DeltaEval<S>> {
    check_len(spec.dim, f.len())?;
    let p = spec.p;
    let blocks = spec.all_blocks();
    let mut witness = vec![S::zero(); spec.dim];
    if blocks.is_empty() {
        return Ok(DeltaEval {
            lo: S::zero(),
            hi: S::zero(),
            witness,
            block: 0,
            l: 0,
        });
    }
    let mut prefix_lo = S::zero();
    let mut prefix_hi = S::zero();
    let mut best_lo = (S::neg_infinity(), 0usize, 0usize);
    let mut best_hi = S::zero();
    let mut best_block_delta: Vec<S> = Vec::new();
    let mut full_deltas: Vec<Vec<S>> = Vec::with_capacity(blocks.len());
    for (n, data) in blocks.iter().enumerate() {
        let w: Vec<S> = data.members.iter().map(|&k| f[k]).collect();
        let last_nz = w.iter().rposition(|v| *v != S::zero()).unwrap_or(0);
        let mut cuts: Vec<usize> = (0..=last_nz).filter(|&q| q == 0 || w[q] != S::zero()).collect();
        if cuts.last() != Some(&last_nz) {
            cuts.push(last_nz);
        }
        let mut full: Option<BlockSolution<S>> = None;
        for &q in &cuts {
            let mut wq = w.clone();
            wq[q + 1..].iter_mut().for_each(|v| *v = S::zero());
            let sol = solve_block(data, &wq);
            let cand_lo = prefix_lo + sol.value.powf(p);
            let cand_hi = prefix_hi + sol.upper.powf(p);
            if cand_lo > best_lo.0 {
                best_lo = (cand_lo, n, data.members[q]);
                best_block_delta = sol.delta.clone();
            }
            if cand_hi > best_hi {
                best_hi = cand_hi;
            }
            if q == last_nz {
                full = Some(sol);
            }
        }
        let full = full.expect("last cut always solved");
        prefix_lo = prefix_lo + full.value.powf(p);
        prefix_hi = prefix_hi + full.upper.powf(p);
        full_deltas.push(full.delta);
    }
    let (_, bn, bl) = best_lo;
    for (n, data) in blocks.iter().enumerate().take(bn) {
        for (i, &k) in data.members.iter().enumerate() {
            witness[k] = full_deltas[n][i];
        }
    }
    for (i, &k) in blocks[bn].members.iter().enumerate() {
        witness[k] = best_block_delta[i];
    }
    let lo = seminorm_delta(spec, &witness, f, bn, bl)?;
    let relaxed = eval_delta_upper(spec, f)?;
    let hi = best_hi.powf(p.recip()).min(relaxed).max(lo);
    Ok(DeltaEval {
        lo,
        hi,
        witness,
        block: bn,
        l: bl,
    })
}

/// Lower bound with a feasible witness, for callers that want the full search trail.
#[derive(Debug, Clone)]
pub struct DeltaLower<S> {
    pub value: S,
    pub delta: Vec<S>,
    pub block: usize,
    pub l: usize,
    pub source: String,
}

/// Explicit sign-matched witnesses: budget parts filled with the increments in the order of
/// decreasing `|f|` and balanced by the anchor, and anchor-driven witnesses balanced on the
/// members where `f` vanishes (both with full and with half anchor mass).
pub fn explicit_witnesses<S: Scalar>(spec: &DeltaFamilySpec<S>, f: &[S]) -> Vec<(String, Vec<S>)> {
    let mut out = Vec::new();
    let blocks = spec.all_blocks();
    for with_interval in [false, true] {
        let mut delta = vec![S::zero(); spec.dim];
        for data in &blocks {
            let mut order: Vec<usize> = (0..data.members.len())
                .filter(|&i| data.role[i] == Role::Budget)
                .collect();
            order.sort_by(|&a, &b| cmp_desc(f[data.members[a]].abs(), f[data.members[b]].abs()));
            let mut local = vec![S::zero(); data.members.len()];
            for (r, &i) in order.iter().enumerate() {
                local[i] = sgn(f[data.members[i]]) * data.budget_steps[r];
            }
            if with_interval {
                for i in 0..data.members.len() {
                    if data.role[i] == Role::Interval {
                        local[i] = sgn(f[data.members[i]]) * data.cap[i];
                    }
                }
            }
            let rest: S = (1..local.len()).map(|i| data.eq[i] * local[i]).sum();
            let anchor = -rest / data.eq[0];
            let scale = if anchor.abs() > S::one() {
                anchor.abs().recip()
            } else {
                S::one()
            };
            local[0] = anchor;
            for (i, &k) in data.members.iter().enumerate() {
                delta[k] = local[i] * scale;
            }
        }
        let name = if with_interval {
            "budget-and-interval-matched"
        } else {
            "budget-matched"
        };
        out.push((name.to_string(), delta));
    }
    for half in [false, true] {
        let mut delta = vec![S::zero(); spec.dim];
        for data in &blocks {
            let anchor_val = f[data.members[0]];
            // capacity of the members where f vanishes
            let mut free_budget = 0usize;
            let mut cap = S::zero();
            for i in 1..data.members.len() {
                if f[data.members[i]] == S::zero() {
                    match data.role[i] {
                        Role::Interval => cap = cap + data.eq[i] * data.cap[i],
                        Role::Budget => free_budget += 1,
                        Role::Anchor => {}
                    }
                }
            }
            cap = cap + data.budget_steps[..free_budget].iter().copied().sum::<S>();
            let mut rho = (cap / data.eq[0]).min(S::one());
            if half {
                rho = rho.min(S::lit(0.5));
            }
            let target = data.eq[0] * rho;
            let theta = if cap > S::zero() { target / cap } else { S::zero() };
            let s = sgn(anchor_val);
            let mut r = 0usize;
            for i in 0..data.members.len() {
                let k = data.members[i];
                match data.role[i] {
                    Role::Anchor => delta[k] = s * rho,
                    Role::Interval if f[k] == S::zero() => delta[k] = -s * theta * data.cap[i],
                    Role::Budget if f[k] == S::zero() => {
                        delta[k] = -s * theta * data.budget_steps[r];
                        r += 1;
                    }
                    _ => {}
                }
            }
        }
        let name = if half { "anchor-half" } else { "anchor-max" };
        out.push((name.to_string(), delta));
    }
    out
}

/// Certified lower bound: the best of the explicit witnesses, the exact block solution,
/// and a budgeted multi-start projected coordinate ascent. Every returned witness is feasible.
pub fn eval_delta_lower<S: Scalar>(
    spec: &DeltaFamilySpec<S>,
    f: &[S],
    budget: usize,
    seed: u64,
) -> Result<DeltaLower<S>> {
    check_len(spec.dim, f.len())?;
    spec.validate()?;
    let mut candidates: Vec<(String, Vec<S>)> = explicit_witnesses(spec, f);
    let exact = eval_delta(spec, f)?;
    candidates.push(("block-exact".to_string(), exact.witness));
    if budget > 0 {
        candidates.extend(coordinate_ascent(spec, f, budget, seed));
    }
    let mut best: Option<DeltaLower<S>> = None;
    for (source, delta) in candidates {
        if !check_delta_feasible(spec, &delta)?.feasible {
            continue;
        }
        let (value, block, l) = delta_value(spec, &delta, f);
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(DeltaLower {
                value,
                delta,
                block,
                l,
                source,
            });
        }
    }
    Ok(best.unwrap_or_else(|| DeltaLower {
        value: S::zero(),
        delta: vec![S::zero(); spec.dim],
        block: 0,
        l: spec.blocks.first().map(|b| b.anchor).unwrap_or(0),
        source: "zero".to_string(),
    }))
}

fn block_feasible<S: Scalar>(data: &BlockData<S>, local: &[S]) -> bool {
    let tol = S::norm_tol();
    let mut budget = Vec::new();
    for i in 0..local.len() {
        if local[i].abs() > data.cap[i] + tol {
            return false;
        }
        if data.role[i] == Role::Budget {
            budget.push(local[i].abs());
        }
    }
    budget.sort_by(|a, b| cmp_desc(*a, *b));
    let mut sum = S::zero();
    let mut cap = S::zero();
    for (m, v) in budget.iter().enumerate() {
        sum = sum + *v;
        cap = cap + data.budget_steps[m];
        if sum > cap + tol {
            return false;
        }
    }
    true
}

fn coordinate_ascent<S: Scalar>(spec: &DeltaFamilySpec<S>, f: &[S], budget: usize, seed: u64) -> Vec<(String, Vec<S>)> {
    let blocks = spec.all_blocks();
    if blocks.is_empty() {
        return Vec::new();
    }
    let restarts = (budget / 200).clamp(1, 16);
    let steps = budget / restarts;
    let p = spec.p;
    (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64));
            let target = if r % 2 == 0 {
                blocks.len() - 1
            } else {
                rng.gen_range(0..blocks.len())
            };
            let tdata = &blocks[target];
            let cut = if r % 2 == 0 {
                tdata.members.len() - 1
            } else {
                rng.gen_range(0..tdata.members.len())
            };
            // feasible start from an exactly solved random direction per block
            let mut locals: Vec<Vec<S>> = blocks
                .iter()
                .enumerate()
                .map(|(n, data)| {
                    let w: Vec<S> = data
                        .members
                        .iter()
                        .enumerate()
                        .map(|(i, &k)| {
                            let keep = n < target || i <= cut;
                            let base = if keep { f[k] } else { S::zero() };
                            base + S::lit(rng.gen_range(-0.5..0.5))
                        })
                        .collect();
                    solve_block(data, &w).delta
                })
                .collect();
            let weight = |n: usize, i: usize| -> S {
                if n < target || (n == target && i <= cut) {
                    f[blocks[n].members[i]]
                } else {
                    S::zero()
                }
            };
            let block_term = |n: usize, local: &[S]| -> S {
                let s: S = local.iter().enumerate().map(|(i, d)| *d * weight(n, i)).sum();
                s.abs().powf(p)
            };
            for _ in 0..steps {
                let n = rng.gen_range(0..=target);
                let data = &blocks[n];
                let size = data.members.len();
                if size < 2 {
                    continue;
                }
                let i = rng.gen_range(0..size);
                let mut j = rng.gen_range(0..size - 1);
                if j >= i {
                    j += 1;
                }
                let step = S::lit(rng.gen_range(-1.0..1.0) * 0.5f64.powi(rng.gen_range(0..12)));
                let before = block_term(n, &locals[n]);
                let mut trial = locals[n].clone();
                trial[i] = trial[i] + step;
                trial[j] = trial[j] - step * data.eq[i] / data.eq[j];
                if block_feasible(data, &trial) && block_term(n, &trial) > before {
                    locals[n] = trial;
                }
            }
            let mut delta = vec![S::zero(); spec.dim];
            for (n, data) in blocks.iter().enumerate().take(target + 1) {
                for (i, &k) in data.members.iter().enumerate() {
                    delta[k] = locals[n][i];
                }
            }
            (format!("ascent-{r}"), delta)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// One anchor with weight 2.05 followed by a two-element budget part (p = 2).
    fn budget_toy() -> DeltaFamilySpec<f64> {
        DeltaFamilySpec {
            dim: 3,
            p: 2.0,
            variant: DeltaVariant::BudgetOnly,
            blocks: vec![DeltaBlock {
                anchor: 0,
                anchor_weight: 2.05,
                interval: vec![],
                interval_weights: vec![],
                budget: vec![1, 2],
            }],
        }
    }

    #[test]
    fn toy_witness_value() {
        let spec = budget_toy();
        let h2 = 1.0 + 0.5f64.sqrt();
        let delta = [-h2 / 2.05, 1.0, 0.5f64.sqrt()];
        assert!(check_delta_feasible(&spec, &delta).unwrap().feasible);
        let v = seminorm_delta(&spec, &delta, &[1.0, 1.0, 1.0], 0, 2).unwrap();
        assert!((v - h2 * (1.0 - 1.0 / 2.05)).abs() < 1e-12);
        assert!((v - 0.87437).abs() < 1e-5);
    }

    #[test]
    fn infeasible_budget() {
        let spec = budget_toy();
        let r = check_delta_feasible(&spec, &[-2.0 / 2.05, 1.0, 1.0]).unwrap();
        assert!(!r.feasible);
        assert!(check_delta_feasible(&spec, &[0.0; 3]).unwrap().feasible);
    }

    #[test]
    fn relaxation_matches_arithmetic() {
        let spec = budget_toy();
        let u = eval_delta_upper(&spec, &[2.05, 1.0, 1.0]).unwrap();
        assert!((u - (2.05 + 1.0 + 0.5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn exact_block_values() {
        let spec = budget_toy();
        let e = eval_delta(&spec, &[1.0, 1.0, 1.0]).unwrap();
        assert!((e.lo - 0.874_371_77).abs() < 1e-7, "{}", e.lo);
        assert!(e.hi >= e.lo && e.hi - e.lo < 1e-12);
        // f0: the full block sum vanishes, the best partial is the budget head
        let e0 = eval_delta(&spec, &[2.05, 1.0, 1.0]).unwrap();
        assert!((e0.lo - (1.0 + 0.5f64.sqrt())).abs() < 1e-9, "{}", e0.lo);
        assert!(check_delta_feasible(&spec, &e0.witness).unwrap().feasible);
    }

    #[test]
    fn zero_vector() {
        let spec = budget_toy();
        let e = eval_delta(&spec, &[0.0; 3]).unwrap();
        assert_eq!(e.lo, 0.0);
        assert!(e.hi.abs() < 1e-15);
        assert_eq!(eval_delta_lower(&spec, &[0.0; 3], 100, 1).unwrap().value, 0.0);
    }

    #[test]
    fn bad_l_rejected() {
        let spec = budget_toy();
        assert!(seminorm_delta(&spec, &[0.0; 3], &[0.0; 3], 0, 7).is_err());
    }
}
