use serde::{Deserialize, Serialize};

use crate::constructions::feeder::{feeder_m0, feeder_weight};
use crate::error::{input, Error, Result};
use crate::norms::{conjugate, harmonic_budget, increment};
use crate::sets::IndexSet;

/// Largest ambient dimension a plan may ask for.
pub const MAX_DIM: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConstructionKind {
    /// Anchors with interval and budget blocks: a basis that is QGLC and LPU but not TQG.
    #[serde(rename = "tqg-sep")]
    TqgSeparation,
    /// Interval blocks only: LPU but not QGLC.
    #[serde(rename = "lucc-not-qglc")]
    LuccNotQglc,
    /// Budget blocks only: QGLC and democratic but not LUCC.
    #[serde(rename = "qglc-not-lucc")]
    QglcNotLucc,
}

impl ConstructionKind {
    pub fn name(self) -> &'static str {
        match self {
            ConstructionKind::TqgSeparation => "tqg-sep",
            ConstructionKind::LuccNotQglc => "lucc-not-qglc",
            ConstructionKind::QglcNotLucc => "qglc-not-lucc",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "tqg-sep" => Ok(ConstructionKind::TqgSeparation),
            "lucc-not-qglc" => Ok(ConstructionKind::LuccNotQglc),
            "qglc-not-lucc" => Ok(ConstructionKind::QglcNotLucc),
            _ => input(format!("unknown construction '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Toy,
    Fidelity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub kind: ConstructionKind,
    pub p: f64,
    pub mode: Mode,
    /// Target separation level `M` (fidelity mode).
    pub level: f64,
    /// Number of anchors (toy mode).
    pub m1: usize,
    /// `M₂·c_{m₁}` (toy mode, and fidelity mode for the budget-only construction); must exceed 2.
    pub m2_margin: f64,
    pub c_max: f64,
}

impl ConstructionParams {
    pub fn toy(kind: ConstructionKind, p: f64, m1: usize, m2_margin: f64, c_max: f64) -> Self {
        Self {
            kind,
            p,
            mode: Mode::Toy,
            level: 0.0,
            m1,
            m2_margin,
            c_max,
        }
    }

    pub fn fidelity(kind: ConstructionKind, p: f64, level: f64, c_max: f64) -> Self {
        Self {
            kind,
            p,
            mode: Mode::Fidelity,
            level,
            m1: 0,
            m2_margin: 2.05,
            c_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(Error::Unsupported(format!(
                "constructions need 1 < p < inf, got {}",
                self.p
            )));
        }
        if !(self.c_max > 0.0 && self.c_max <= 1.0) {
            return input(format!("c_max must lie in (0,1], got {}", self.c_max));
        }
        match self.mode {
            Mode::Toy => {
                if self.m1 == 0 {
                    return input("toy mode needs m1 >= 1");
                }
                if self.kind != ConstructionKind::LuccNotQglc && !(self.m2_margin > 2.0) {
                    return input(format!("M2 margin must exceed 2, got {}", self.m2_margin));
                }
            }
            Mode::Fidelity => {
                if !(self.level >= 0.0) || !self.level.is_finite() {
                    return input("separation level must be finite and nonnegative");
                }
                if self.kind == ConstructionKind::QglcNotLucc && !(self.m2_margin > 2.0) {
                    return input(format!("M2 margin must exceed 2, got {}", self.m2_margin));
                }
            }
        }
        Ok(())
    }
}

/// Index layout of a construction (0-based ambient indices).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub anchors: Vec<usize>,
    pub intervals: Vec<IndexSet>,
    pub budgets: Vec<IndexSet>,
    /// The Schauder ordering: anchor, its interval, its budget, next anchor, ...
    pub order: Vec<usize>,
    pub dim: usize,
    /// Last index of the last block.
    pub l1: usize,
}

impl Layout {
    pub fn a(&self) -> IndexSet {
        self.anchors.iter().copied().collect()
    }

    pub fn i(&self) -> IndexSet {
        self.intervals.iter().flat_map(|s| s.iter()).collect()
    }

    pub fn b(&self) -> IndexSet {
        self.budgets.iter().flat_map(|s| s.iter()).collect()
    }

    /// Number of violations of `A < I_1 < B_1 < I_2 < ...` and of the order being a permutation.
    pub fn structural_violations(&self) -> usize {
        let mut bad = 0;
        let mut last: Option<usize> = self.anchors.last().copied();
        bad += self.anchors.windows(2).filter(|w| w[0] >= w[1]).count();
        for (iv, bv) in self.intervals.iter().zip(&self.budgets) {
            for k in iv.iter().chain(bv.iter()) {
                if last.is_some_and(|l| k <= l) {
                    bad += 1;
                }
                last = Some(k);
            }
        }
        let mut seen = vec![false; self.dim];
        for &k in &self.order {
            if k >= self.dim || seen[k] {
                bad += 1;
            } else {
                seen[k] = true;
            }
        }
        bad + seen.iter().filter(|s| !**s).count()
    }
}

/// `M₂` of a parameter set.
pub fn anchor_factor(params: &ConstructionParams, m1: usize) -> f64 {
    let c_last = feeder_weight(params.p, params.c_max, m1 - 1);
    match (params.kind, params.mode) {
        (ConstructionKind::LuccNotQglc, _) => 1.0,
        (ConstructionKind::TqgSeparation, Mode::Fidelity) => 5.0 / c_last,
        _ => params.m2_margin / c_last,
    }
}

/// Greedy block selection: intervals extend until their target is met, budgets are the largest
/// lengths whose harmonic budget stays below the anchor weight.
pub fn simulate_layout(
    kind: ConstructionKind,
    p: f64,
    c_max: f64,
    m1: usize,
    m2: f64,
    max_dim: usize,
) -> Result<Layout> {
    let pprime = conjugate(p);
    let c = |i: usize| feeder_weight(p, c_max, i);
    let anchors: Vec<usize> = (0..m1).collect();
    let mut next = m1;
    let mut intervals = Vec::with_capacity(m1);
    let mut budgets = Vec::with_capacity(m1);
    let mut order = Vec::new();
    let too_big = |n: usize| Error::NotRealizable(format!("layout exceeds {max_dim} indices (block {n})"));
    for n in 0..m1 {
        order.push(n);
        let mut iv = Vec::new();
        let target = match kind {
            ConstructionKind::TqgSeparation => Some(2.0 * m2 * c(n)),
            ConstructionKind::LuccNotQglc => Some(1.0),
            ConstructionKind::QglcNotLucc => None,
        };
        if let Some(target) = target {
            // late-start guard: the first term must not be able to overshoot the upper window
            let slack = match kind {
                ConstructionKind::TqgSeparation => m2 * c(m1 - 1),
                _ => 0.5,
            };
            if c(next) * increment(next + 1, pprime) > slack * (1.0 + 1e-12) {
                return input(format!("block {n} would start with a term above the window slack"));
            }
            let mut sum = 0.0;
            let crossed = |s: f64| match kind {
                ConstructionKind::TqgSeparation => s >= target,
                _ => s > target,
            };
            while !crossed(sum) {
                if next >= max_dim {
                    return Err(too_big(n));
                }
                sum += c(next) * increment(next + 1, pprime);
                iv.push(next);
                next += 1;
            }
        }
        let mut bv = Vec::new();
        if kind != ConstructionKind::LuccNotQglc {
            let w = m2 * c(n);
            let mut h = 0.0;
            loop {
                let step = increment(bv.len() + 1, pprime);
                if h + step > w {
                    break;
                }
                if next >= max_dim {
                    return Err(too_big(n));
                }
                h += step;
                bv.push(next);
                next += 1;
            }
        }
        order.extend(iv.iter().copied());
        order.extend(bv.iter().copied());
        intervals.push(IndexSet::from(iv));
        budgets.push(IndexSet::from(bv));
    }
    Ok(Layout {
        anchors,
        intervals,
        budgets,
        order,
        dim: next,
        l1: next - 1,
    })
}

/// Sizes a construction would need, computed without building it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamReport {
    pub construction: ConstructionKind,
    pub mode: Mode,
    pub level: f64,
    pub p: f64,
    pub c_max: f64,
    pub m0: f64,
    /// `ln m₁`; finite even when `m₁` itself does not fit a machine integer.
    pub ln_m1: f64,
    pub m1: Option<usize>,
    pub m2: Option<f64>,
    pub interval_lengths: Vec<usize>,
    pub budget_lengths: Vec<usize>,
    /// `ln dim`, absent when it overflows; `ln ln dim` is always reported.
    pub ln_dim: Option<f64>,
    pub ln_ln_dim: f64,
    pub dim: Option<usize>,
    pub realizable: bool,
    pub note: String,
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Smallest `m ≥ floor` with `H_m > target` (harmonic numbers), in log form when huge.
fn harmonic_inverse(target: f64, floor: usize) -> (f64, Option<usize>) {
    if target < 16.0 {
        let mut h = 0.0;
        let mut m = 0usize;
        while m < floor || h <= target {
            m += 1;
            h += 1.0 / m as f64;
        }
        ((m as f64).ln(), Some(m))
    } else {
        let ln_m = (target - EULER_GAMMA).max((floor as f64).ln());
        (ln_m, None)
    }
}

/// Log-space dimension estimate for layouts too large to simulate.
fn estimate_ln_dim(
    kind: ConstructionKind,
    p: f64,
    c_max: f64,
    ln_m1: f64,
    m1: Option<usize>,
    m2_at_last: f64,
) -> (Option<f64>, f64) {
    let Some(m1) = m1.filter(|&m| m <= 1_000_000) else {
        // Σ_n target_n / c_max grows like a multiple of m₁
        let per = match kind {
            ConstructionKind::TqgSeparation => 2.0 * m2_at_last * conjugate(p),
            ConstructionKind::LuccNotQglc => 1.0 / c_max,
            ConstructionKind::QglcNotLucc => 1.0,
        };
        let ln_ln = ln_m1 + per.ln().max(0.0);
        let ln_dim = ln_ln.exp();
        return (ln_dim.is_finite().then_some(ln_dim), ln_ln);
    };
    let c = |i: usize| feeder_weight(p, c_max, i);
    let m2 = m2_at_last / c(m1 - 1);
    let mut ln_end = (m1 as f64).ln();
    for n in 0..m1 {
        let target = match kind {
            ConstructionKind::TqgSeparation => 2.0 * m2 * c(n),
            ConstructionKind::LuccNotQglc => 1.0,
            ConstructionKind::QglcNotLucc => 0.0,
        };
        ln_end += target / c_max;
        if kind != ConstructionKind::LuccNotQglc {
            let budget_len = (m2 * c(n) / p).powf(p) + 1.0;
            ln_end += (budget_len * (-ln_end).exp()).ln_1p();
        }
    }
    (Some(ln_end), ln_end.max(1e-300).ln())
}

/// Fidelity sizes for a parameter set; toy parameters are simulated exactly.
pub fn plan_params(params: &ConstructionParams) -> Result<ParamReport> {
    params.validate()?;
    let p = params.p;
    let k = 1.0f64;
    let m0 = feeder_m0(p, params.c_max);
    let (ln_m1, m1) = match params.mode {
        Mode::Toy => ((params.m1 as f64).ln(), Some(params.m1)),
        Mode::Fidelity => {
            let m = params.level;
            match params.kind {
                ConstructionKind::TqgSeparation => {
                    harmonic_inverse((10.0 * m * m * m0).powf(p) / params.c_max.powf(p), 4)
                }
                ConstructionKind::QglcNotLucc => harmonic_inverse((8.0 * m0 * m).powf(p) / params.c_max.powf(p), 1),
                ConstructionKind::LuccNotQglc => {
                    let c = lpu_constant(p, k);
                    let x = (3.0 * m * c * m0).powf(p);
                    if x < 1e15 {
                        let m1 = x.floor() as usize + 1;
                        ((m1 as f64).ln(), Some(m1))
                    } else {
                        (x.ln(), None)
                    }
                }
            }
        }
    };
    let margin = match (params.kind, params.mode) {
        (ConstructionKind::TqgSeparation, Mode::Fidelity) => 5.0,
        (ConstructionKind::LuccNotQglc, _) => 0.0,
        _ => params.m2_margin,
    };
    let mut report = ParamReport {
        construction: params.kind,
        mode: params.mode,
        level: params.level,
        p,
        c_max: params.c_max,
        m0,
        ln_m1,
        m1,
        m2: m1.map(|m| anchor_factor(params, m)),
        interval_lengths: Vec::new(),
        budget_lengths: Vec::new(),
        ln_dim: None,
        ln_ln_dim: 0.0,
        dim: None,
        realizable: false,
        note: String::new(),
    };
    let (ln_dim, ln_ln_dim) = estimate_ln_dim(params.kind, p, params.c_max, ln_m1, m1, margin.max(1.0));
    report.ln_dim = ln_dim;
    report.ln_ln_dim = ln_ln_dim;
    let cap_ln = (MAX_DIM as f64).ln();
    match (m1, ln_dim) {
        (Some(m1), Some(l)) if l <= cap_ln + 1.0 => {
            let m2 = anchor_factor(params, m1);
            match simulate_layout(params.kind, p, params.c_max, m1, m2, MAX_DIM) {
                Ok(layout) => {
                    report.interval_lengths = layout.intervals.iter().map(|s| s.len()).collect();
                    report.budget_lengths = layout.budgets.iter().map(|s| s.len()).collect();
                    report.ln_dim = Some((layout.dim as f64).ln());
                    report.ln_ln_dim = (layout.dim as f64).ln().max(1e-300).ln();
                    report.dim = Some(layout.dim);
                    report.realizable = true;
                    report.note = format!("simulated layout with {} indices", layout.dim);
                }
                Err(e) => report.note = e.to_string(),
            }
        }
        _ => {
            report.note = format!(
                "estimated ln(dim) = {} exceeds ln({MAX_DIM})",
                fmt_ln(ln_dim, ln_ln_dim)
            );
        }
    }
    Ok(report)
}

fn fmt_ln(ln_dim: Option<f64>, ln_ln: f64) -> String {
    match ln_dim {
        Some(v) => format!("{v:.6e}"),
        None => format!("exp({ln_ln:.6e})"),
    }
}

/// `max{2^{1/p} p, K}·(3K^{2p}/2 + 2^p)^{1/p}`: LPU constant of the interval-only construction.
pub fn lpu_constant(p: f64, k: f64) -> f64 {
    (2f64.powf(1.0 / p) * p).max(k) * (1.5 * k.powf(2.0 * p) + 2f64.powf(p)).powf(1.0 / p)
}

/// `Σ_{j≤m} j^{-1/p'}`.
pub fn budget_mass(p: f64, m: usize) -> f64 {
    harmonic_budget(m, conjugate(p))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_layouts() {
        let l = simulate_layout(ConstructionKind::QglcNotLucc, 2.0, 1.0, 1, 2.05, MAX_DIM).unwrap();
        assert_eq!(l.dim, 3);
        assert_eq!(l.budgets[0].as_slice(), &[1, 2]);
        assert_eq!(l.order, vec![0, 1, 2]);
        let l = simulate_layout(ConstructionKind::LuccNotQglc, 2.0, 1.0, 1, 1.0, MAX_DIM).unwrap();
        assert_eq!(l.intervals[0].as_slice(), &[1, 2, 3]);
        let l = simulate_layout(ConstructionKind::LuccNotQglc, 2.0, 1.0, 3, 1.0, MAX_DIM).unwrap();
        assert_eq!(l.intervals[0].first(), Some(3));
        assert_eq!(l.structural_violations(), 0);
        assert_eq!(l.order[..2], [0, 3]);
    }

    #[test]
    fn plans() {
        let r = plan_params(&ConstructionParams::fidelity(
            ConstructionKind::TqgSeparation,
            2.0,
            1.0,
            0.125,
        ))
        .unwrap();
        assert!(!r.realizable);
        let r = plan_params(&ConstructionParams::toy(
            ConstructionKind::QglcNotLucc,
            2.0,
            1,
            2.05,
            1.0,
        ))
        .unwrap();
        assert!(r.realizable);
        assert_eq!(r.dim, Some(3));
        let r = plan_params(&ConstructionParams::fidelity(
            ConstructionKind::LuccNotQglc,
            2.0,
            0.0,
            1.0,
        ))
        .unwrap();
        assert_eq!(r.m1, Some(1));
        assert!(r.realizable);
        let r = plan_params(&ConstructionParams::fidelity(
            ConstructionKind::TqgSeparation,
            2.0,
            2.0,
            1.0,
        ))
        .unwrap();
        assert!(!r.realizable);
    }
}
