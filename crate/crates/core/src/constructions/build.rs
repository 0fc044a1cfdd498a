use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisRepr, BasisSpace, NamedSet, NamedVector, SpaceMeta};
use crate::constructions::feeder::{feeder_weight, make_feeder, FeederBasis};
use crate::constructions::params::{
    anchor_factor, budget_mass, lpu_constant, plan_params, simulate_layout, ConstructionKind, ConstructionParams,
    Layout, Mode, MAX_DIM,
};
use crate::error::{Error, Result};
use crate::norms::{
    check_delta_feasible, conjugate, eval_delta_upper, increment, seminorm_delta, DeltaBlock, DeltaFamilySpec,
    DeltaVariant, NormEngine,
};
use crate::sets::IndexSet;
use crate::{DeltaSpec, Space};

/// A named inequality `lhs ≤ rhs` (or `lhs < rhs`) checked at build time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub strict: bool,
    pub holds: bool,
}

impl Certificate {
    pub fn le(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let holds = lhs <= rhs + 1e-9 * rhs.abs().max(1.0);
        Self {
            name: name.into(),
            lhs,
            rhs,
            strict: false,
            holds,
        }
    }

    pub fn lt(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        Self {
            name: name.into(),
            lhs,
            rhs,
            strict: true,
            holds: lhs < rhs,
        }
    }

    /// Re-evaluates the relation from the stored sides.
    pub fn recheck(&self) -> bool {
        if self.strict {
            self.lhs < self.rhs
        } else {
            self.lhs <= self.rhs + 1e-9 * self.rhs.abs().max(1.0)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructedSpace {
    pub params: ConstructionParams,
    pub m2: f64,
    pub feeder: FeederBasis,
    pub layout: Layout,
    pub spec: DeltaSpec,
    #[serde(skip)]
    pub space: Option<Space>,
    pub certificates: Vec<Certificate>,
    /// Certified lower bounds on greedy constants, keyed by constant name.
    pub lower_bounds: BTreeMap<String, f64>,
    pub analytic_constants: BTreeMap<String, f64>,
}

impl ConstructedSpace {
    pub fn space(&self) -> &Space {
        self.space.as_ref().expect("constructed space carries its basis space")
    }

    pub fn certificate(&self, name: &str) -> Option<&Certificate> {
        self.certificates.iter().find(|c| c.name == name)
    }

    pub fn all_hold(&self) -> bool {
        self.certificates.iter().all(|c| c.holds && c.recheck())
    }
}

pub fn build(params: &ConstructionParams) -> Result<ConstructedSpace> {
    params.validate()?;
    let m1 = match params.mode {
        Mode::Toy => params.m1,
        Mode::Fidelity => {
            let report = plan_params(params)?;
            match (report.realizable, report.m1) {
                (true, Some(m1)) => m1,
                _ => {
                    let json = serde_json::to_string(&report).unwrap_or_default();
                    return Err(Error::NotRealizable(json));
                }
            }
        }
    };
    let m2 = anchor_factor(params, m1);
    let layout = simulate_layout(params.kind, params.p, params.c_max, m1, m2, MAX_DIM)?;
    let feeder = make_feeder(params.p, params.c_max, layout.dim)?;
    let spec = delta_spec(params, &layout, m2);
    spec.validate()?;
    let engine = space_engine(params.kind, params.p, &layout, &spec);
    let space =
        BasisSpace::new(layout.dim, engine, BasisRepr::Identity, Some(layout.order.clone()), 1.0)?.normalized()?;
    let mut out = ConstructedSpace {
        params: params.clone(),
        m2,
        feeder,
        layout,
        spec,
        space: None,
        certificates: Vec::new(),
        lower_bounds: BTreeMap::new(),
        analytic_constants: analytic_constants(params.kind, params.p, 1.0),
    };
    let meta = certify(&mut out, &space)?;
    out.space = Some(space.with_meta(meta));
    Ok(out)
}

pub fn build_tqg_separation(params: &ConstructionParams) -> Result<ConstructedSpace> {
    build(&ConstructionParams {
        kind: ConstructionKind::TqgSeparation,
        ..params.clone()
    })
}

pub fn build_lucc_not_qglc(params: &ConstructionParams) -> Result<ConstructedSpace> {
    build(&ConstructionParams {
        kind: ConstructionKind::LuccNotQglc,
        ..params.clone()
    })
}

pub fn build_qglc_not_lucc(params: &ConstructionParams) -> Result<ConstructedSpace> {
    build(&ConstructionParams {
        kind: ConstructionKind::QglcNotLucc,
        ..params.clone()
    })
}

fn delta_spec(params: &ConstructionParams, layout: &Layout, m2: f64) -> DeltaSpec {
    let variant = match params.kind {
        ConstructionKind::TqgSeparation => DeltaVariant::Full,
        ConstructionKind::LuccNotQglc => DeltaVariant::IntervalOnly,
        ConstructionKind::QglcNotLucc => DeltaVariant::BudgetOnly,
    };
    let c = |i: usize| feeder_weight(params.p, params.c_max, i);
    let blocks = (0..layout.anchors.len())
        .map(|n| DeltaBlock {
            anchor: layout.anchors[n],
            anchor_weight: if variant == DeltaVariant::IntervalOnly {
                1.0
            } else {
                m2 * c(n)
            },
            interval: layout.intervals[n].as_slice().to_vec(),
            interval_weights: layout.intervals[n].iter().map(c).collect(),
            budget: layout.budgets[n].as_slice().to_vec(),
        })
        .collect();
    DeltaFamilySpec {
        dim: layout.dim,
        p: params.p,
        variant,
        blocks,
    }
}

fn space_engine(kind: ConstructionKind, p: f64, layout: &Layout, spec: &DeltaSpec) -> NormEngine<f64> {
    let weak = |set: IndexSet| NormEngine::Restrict {
        indices: set.into_vec(),
        inner: Box::new(NormEngine::WeakLp { p }),
    };
    let mut components = vec![NormEngine::Linf];
    if kind != ConstructionKind::LuccNotQglc {
        components.push(weak(layout.a()));
    }
    if kind != ConstructionKind::QglcNotLucc {
        components.push(weak(layout.i()));
    }
    components.push(NormEngine::DeltaNorm {
        spec: Box::new(spec.clone()),
    });
    NormEngine::CompositeMax { components }
}

/// Constants attached to each construction with feeder constant `k`.
pub fn analytic_constants(kind: ConstructionKind, p: f64, k: f64) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    let k2p = k.powf(2.0 * p);
    match kind {
        ConstructionKind::TqgSeparation => {
            m.insert("C1".into(), (3f64.powf(1.0 / p) * p).max(k));
            m.insert("C2".into(), ((4.0 * p).powf(p) + 2.0 * k2p).powf(1.0 / p));
            m.insert("C3".into(), ((2.0 + p.powf(p)) * k2p + (2.0 * p).powf(p)).powf(1.0 / p));
        }
        ConstructionKind::LuccNotQglc => {
            m.insert("C_upper".into(), (2f64.powf(1.0 / p) * p).max(k));
            m.insert("C_lower".into(), (1.5 * k2p + 2f64.powf(p)).powf(1.0 / p));
            m.insert("C".into(), lpu_constant(p, k));
        }
        ConstructionKind::QglcNotLucc => {
            m.insert("C_upper".into(), (2f64.powf(1.0 / p) * p).max(k));
            m.insert("C_qglc".into(), (k2p + (4.0 * p).powf(p)).powf(1.0 / p));
        }
    }
    m
}

/// Budget parts filled with the increments in increasing index order, anchors balancing.
fn budget_witness(spec: &DeltaSpec, eps: impl Fn(usize) -> f64) -> Vec<f64> {
    let pprime = spec.pprime();
    let mut delta = vec![0.0; spec.dim];
    for b in &spec.blocks {
        let mut total = 0.0;
        for (j, &k) in b.budget.iter().enumerate() {
            delta[k] = increment(j + 1, pprime) * eps(k);
            total += delta[k];
        }
        delta[b.anchor] = -total / b.anchor_weight;
    }
    delta
}

/// Anchors at `1/2` (sign-matched), balanced on the intervals proportionally to the caps.
fn half_anchor_witness(spec: &DeltaSpec, eps: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut delta = vec![0.0; spec.dim];
    for b in &spec.blocks {
        let mass: f64 = b
            .interval
            .iter()
            .zip(&b.interval_weights)
            .map(|(&k, c)| c * spec.cap(k))
            .sum();
        if mass < 0.5 * b.anchor_weight {
            continue;
        }
        let s = eps(b.anchor);
        delta[b.anchor] = 0.5 * s;
        let theta = 0.5 * b.anchor_weight / mass;
        for &k in &b.interval {
            delta[k] = -s * theta * spec.cap(k);
        }
    }
    delta
}

fn indicator(dim: usize, set: &IndexSet) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    for k in set.iter() {
        v[k] = 1.0;
    }
    v
}

/// `max_m lo(‖S_m f‖) / hi(‖f‖)` over sparse random `f` and all prefix lengths of the ordering.
fn monotone_ratio(space: &Space, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = space.dim;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let mut f = vec![0.0; dim];
        for _ in 0..dim.min(10) {
            f[rng.gen_range(0..dim)] = rng.gen_range(-1.0..1.0);
        }
        let full = space.norm(&f).expect("dimension matches");
        if full.hi == 0.0 {
            continue;
        }
        let mut prefix = vec![0.0; dim];
        for pos in 0..dim {
            let k = space.order[pos];
            if f[k] == 0.0 {
                continue;
            }
            prefix[k] = f[k];
            let part = space.norm(&prefix).expect("dimension matches");
            worst = worst.max(part.lo / full.hi);
        }
    }
    worst
}

fn certify(out: &mut ConstructedSpace, space: &Space) -> Result<SpaceMeta> {
    let p = out.params.p;
    let m2 = out.m2;
    let layout = out.layout.clone();
    let spec = out.spec.clone();
    let feeder = out.feeder.clone();
    let dim = layout.dim;
    let c = |i: usize| feeder_weight(p, out.params.c_max, i);
    let pprime = conjugate(p);
    let mut certs = Vec::new();
    let mut meta = SpaceMeta {
        label: out.params.kind.name().to_string(),
        ..SpaceMeta::default()
    };

    certs.push(Certificate::le(
        "layout-structure",
        layout.structural_violations() as f64,
        0.0,
    ));
    certs.push(Certificate::le("feeder-m0", feeder.m0_numeric, feeder.m0));
    certs.push(Certificate::le(
        "feeder-divergence",
        out.params.c_max.powf(p) * (dim as f64).ln() * (1.0 - 1e-6),
        feeder.lp_mass,
    ));
    certs.push(Certificate::le("basis-monotone", monotone_ratio(space, 6, 0x5eed), 1.0));

    let interval_mass = |n: usize| -> f64 {
        layout.intervals[n]
            .iter()
            .map(|k| c(k) * increment(k + 1, pprime))
            .sum()
    };
    match out.params.kind {
        ConstructionKind::TqgSeparation => {
            for n in 0..layout.anchors.len() {
                let w = m2 * c(n);
                let s = interval_mass(n);
                let len = layout.budgets[n].len();
                certs.push(Certificate::lt(format!("anchor-margin[{n}]"), 2.0, w));
                certs.push(Certificate::le(format!("interval-mass-lower[{n}]"), 2.0 * w, s));
                certs.push(Certificate::le(format!("interval-mass-upper[{n}]"), s, 3.0 * w));
                certs.push(Certificate::le(
                    format!("budget-length-lower[{n}]"),
                    budget_mass(p, len),
                    w,
                ));
                certs.push(Certificate::le(
                    format!("budget-length-upper[{n}]"),
                    w,
                    budget_mass(p, len + 1),
                ));
            }
            let (a, i, b) = (layout.a(), layout.i(), layout.b());
            let one_b = indicator(dim, &b);
            let one_ab = indicator(dim, &a.union(&b));
            let mut f0 = one_b.clone();
            for (n, k) in a.iter().enumerate() {
                f0[k] = m2 * c(n);
            }
            for k in i.iter() {
                f0[k] = c(k);
            }
            let wit = budget_witness(&spec, |_| 1.0);
            let feas = check_delta_feasible(&spec, &wit)?;
            certs.push(Certificate::le("budget-witness-feasible", feas.worst_excess, 1e-9));
            let last = layout.anchors.len() - 1;
            let lower_b = seminorm_delta(&spec, &wit, &one_b, last, layout.l1)?;
            let target: f64 = (0..layout.anchors.len())
                .map(|n| (m2 * c(n) / 2.0).powf(p))
                .sum::<f64>()
                .powf(1.0 / p);
            certs.push(Certificate::le("indicator-budget-lower", target, lower_b));
            let f0_hi = space.norm(&f0)?.hi;
            certs.push(Certificate::le("f0-upper", f0_hi, 5.0 * m2 * feeder.m0));
            let ab_hi = space.norm(&one_ab)?.hi;
            let ktq = (target / ab_hi).max((target / f0_hi).sqrt());
            out.lower_bounds.insert("Ktq".into(), ktq);
            out.lower_bounds.insert("indicator_B".into(), target);
            let consts = &out.analytic_constants;
            let (c1, c2, c3) = (consts["C1"], consts["C2"], consts["C3"]);
            meta.known_uppers.insert("Kql".into(), c1 * c2);
            if out.params.c_max <= 1.0 / (4.0 * p) {
                for key in ["Klp", "Kuc", "Klu"] {
                    meta.known_uppers.insert(key.into(), c1 * c3);
                }
            }
            meta.witness_vectors = vec![
                NamedVector {
                    name: "f0".into(),
                    coeffs: f0,
                },
                NamedVector {
                    name: "1_B".into(),
                    coeffs: one_b,
                },
                NamedVector {
                    name: "1_AuB".into(),
                    coeffs: one_ab,
                },
            ];
            meta.witness_sets = vec![
                NamedSet {
                    name: "A".into(),
                    set: a,
                },
                NamedSet {
                    name: "I".into(),
                    set: i,
                },
                NamedSet {
                    name: "B".into(),
                    set: b,
                },
            ];
        }
        ConstructionKind::LuccNotQglc => {
            let mut max_term = 0.0f64;
            for n in 0..layout.anchors.len() {
                let s = interval_mass(n);
                certs.push(Certificate::lt(format!("window-lower[{n}]"), 1.0, s));
                certs.push(Certificate::lt(format!("window-upper[{n}]"), s, 1.5));
                for k in layout.intervals[n].iter() {
                    max_term = max_term.max(c(k) * increment(k + 1, pprime));
                }
            }
            let (a, i) = (layout.a(), layout.i());
            let one_a = indicator(dim, &a);
            let mut g = vec![0.0; dim];
            for k in i.iter() {
                g[k] = c(k);
            }
            let sum: Vec<f64> = one_a.iter().zip(&g).map(|(x, y)| x + y).collect();
            let wit = half_anchor_witness(&spec, |_| 1.0);
            let feas = check_delta_feasible(&spec, &wit)?;
            certs.push(Certificate::le("half-anchor-witness-feasible", feas.worst_excess, 1e-9));
            let last = layout.anchors.len() - 1;
            let lower_a = seminorm_delta(&spec, &wit, &one_a, last, layout.l1)?;
            let m1 = layout.anchors.len() as f64;
            let target = m1.powf(1.0 / p) / 2.0;
            certs.push(Certificate::le("indicator-anchor-lower", target, lower_a + 1e-12));
            let sum_hi = space.norm(&sum)?.hi;
            certs.push(Certificate::le("witness-upper", sum_hi, 3.0 * feeder.m0));
            out.lower_bounds.insert("Kql".into(), target / (3.0 * feeder.m0));
            out.lower_bounds.insert("Kql_computed".into(), lower_a / sum_hi);
            let consts = &out.analytic_constants;
            if max_term < 0.5 {
                for key in ["Klp", "Kuc", "Klu"] {
                    meta.known_uppers.insert(key.into(), consts["C"]);
                }
            }
            meta.witness_vectors = vec![
                NamedVector {
                    name: "1_A".into(),
                    coeffs: one_a,
                },
                NamedVector {
                    name: "g".into(),
                    coeffs: g,
                },
                NamedVector {
                    name: "1_A+g".into(),
                    coeffs: sum,
                },
            ];
            meta.witness_sets = vec![
                NamedSet {
                    name: "A".into(),
                    set: a,
                },
                NamedSet {
                    name: "I".into(),
                    set: i,
                },
            ];
        }
        ConstructionKind::QglcNotLucc => {
            for n in 0..layout.anchors.len() {
                let w = m2 * c(n);
                let len = layout.budgets[n].len();
                certs.push(Certificate::lt(format!("anchor-margin[{n}]"), 2.0, w));
                certs.push(Certificate::le(
                    format!("budget-length-lower[{n}]"),
                    budget_mass(p, len),
                    w,
                ));
                certs.push(Certificate::le(
                    format!("budget-length-upper[{n}]"),
                    w,
                    budget_mass(p, len + 1),
                ));
            }
            let (a, b) = (layout.a(), layout.b());
            let f1 = vec![1.0; dim];
            let mut f0 = indicator(dim, &b);
            for (n, k) in a.iter().enumerate() {
                f0[k] = m2 * c(n);
            }
            let wit = budget_witness(&spec, |_| 1.0);
            let feas = check_delta_feasible(&spec, &wit)?;
            certs.push(Certificate::le("budget-witness-feasible", feas.worst_excess, 1e-9));
            let last = layout.anchors.len() - 1;
            let lower_f1 = seminorm_delta(&spec, &wit, &f1, last, layout.l1)?;
            let target: f64 = (0..layout.anchors.len())
                .map(|n| (m2 * c(n) / 4.0).powf(p))
                .sum::<f64>()
                .powf(1.0 / p);
            certs.push(Certificate::le("f1-lower", target, lower_f1));
            let relaxed = eval_delta_upper(&spec, &f0)?;
            certs.push(Certificate::le("f0-delta-relaxation", relaxed, 2.0 * m2 * c(0)));
            let f0_hi = space.norm(&f0)?.hi;
            certs.push(Certificate::le("f0-upper", f0_hi, 2.0 * m2 * feeder.m0));
            out.lower_bounds.insert("Klu".into(), lower_f1 / f0_hi);
            out.lower_bounds.insert("f1_explicit".into(), lower_f1);
            let consts = &out.analytic_constants;
            let up = consts["C_upper"] * consts["C_qglc"];
            meta.known_uppers.insert("Kql".into(), up);
            meta.known_uppers.insert("Kuc".into(), up);
            meta.witness_vectors = vec![
                NamedVector {
                    name: "f0".into(),
                    coeffs: f0,
                },
                NamedVector {
                    name: "f1".into(),
                    coeffs: f1,
                },
            ];
            meta.witness_sets = vec![
                NamedSet {
                    name: "A".into(),
                    set: a,
                },
                NamedSet {
                    name: "B".into(),
                    set: b,
                },
            ];
        }
    }
    out.certificates = certs;
    Ok(meta)
}

/// Rebuilds from the stored parameters and compares layout, family and certificates.
pub fn reverify(stored: &ConstructedSpace) -> Result<ConstructedSpace> {
    let fresh = build(&stored.params)?;
    if fresh.layout != stored.layout || fresh.spec != stored.spec {
        return Err(Error::Integrity(
            "layout or constraint family differs from a rebuild".into(),
        ));
    }
    if fresh.certificates.len() != stored.certificates.len() {
        return Err(Error::Integrity("certificate list differs from a rebuild".into()));
    }
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0);
    for (f, s) in fresh.certificates.iter().zip(&stored.certificates) {
        if f.name != s.name
            || f.strict != s.strict
            || f.holds != s.holds
            || !close(f.lhs, s.lhs)
            || !close(f.rhs, s.rhs)
        {
            return Err(Error::Integrity(format!("certificate '{}' does not re-verify", s.name)));
        }
        if !s.recheck() {
            return Err(Error::Integrity(format!("certificate '{}' fails", s.name)));
        }
    }
    for (k, v) in &stored.lower_bounds {
        if !fresh.lower_bounds.get(k).is_some_and(|w| close(*v, *w)) {
            return Err(Error::Integrity(format!("recorded bound '{k}' does not re-verify")));
        }
    }
    Ok(fresh)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_only_toy() {
        let cs = build(&ConstructionParams::toy(
            ConstructionKind::QglcNotLucc,
            2.0,
            1,
            2.05,
            1.0,
        ))
        .unwrap();
        assert_eq!(cs.layout.dim, 3);
        assert!(cs.all_hold(), "{:?}", cs.certificates);
        let f1 = cs.certificate("f1-lower").unwrap();
        assert!((f1.rhs - 0.874_372).abs() < 1e-5);
        let r = cs.certificate("f0-delta-relaxation").unwrap();
        assert!((r.lhs - 3.757_11).abs() < 1e-4);
    }

    #[test]
    fn full_toy() {
        let cs = build(&ConstructionParams::toy(
            ConstructionKind::TqgSeparation,
            2.0,
            1,
            2.05,
            1.0,
        ))
        .unwrap();
        assert!(
            cs.all_hold(),
            "{:?}",
            cs.certificates.iter().filter(|c| !c.holds).collect::<Vec<_>>()
        );
        assert_eq!(cs.layout.budgets[0].len(), 2);
        assert!((cs.lower_bounds["indicator_B"] - 1.025).abs() < 1e-12);
        assert!(reverify(&cs).is_ok());
    }

    #[test]
    fn interval_only_toys() {
        let mut last = 0.0;
        for m1 in 1..=3 {
            let cs = build(&ConstructionParams::toy(
                ConstructionKind::LuccNotQglc,
                2.0,
                m1,
                2.05,
                1.0,
            ))
            .unwrap();
            assert!(cs.all_hold());
            let kql = cs.lower_bounds["Kql"];
            assert!((kql - (m1 as f64).sqrt() / (6.0 * cs.feeder.m0)).abs() < 1e-9);
            assert!(kql > last);
            last = kql;
        }
    }

    #[test]
    fn fidelity_not_realizable() {
        let e = build(&ConstructionParams::fidelity(
            ConstructionKind::TqgSeparation,
            2.0,
            2.0,
            1.0,
        ))
        .unwrap_err();
        assert!(matches!(e, Error::NotRealizable(_)));
    }
}
