use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constants::kind::ConstantKind;
use crate::constants::search::{is_symmetric, restart_rng, ConstantEstimate};
use crate::constants::witness::Witness;
use crate::error::{input, Result};
use crate::greedy::indicator_coeffs;
use crate::norms::Bounds;
use crate::sets::IndexSet;
use crate::Space;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundamentalReport {
    /// `FundFn(m)` for `m = 1..=m_max`.
    pub values: Vec<ConstantEstimate>,
    /// Worst ratio found between equal-size indicator norms.
    pub democracy: ConstantEstimate,
    /// Whether the values are exact by symmetry or full enumeration.
    pub exact: bool,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Next `k`-combination of `0..n` in lexicographic order.
fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

struct SizeStats {
    max_lo: f64,
    max_hi: f64,
    max_w: (IndexSet, Vec<f64>),
    min_hi: f64,
    min_w: (IndexSet, Vec<f64>),
}

impl SizeStats {
    fn new() -> Self {
        Self {
            max_lo: f64::NEG_INFINITY,
            max_hi: 0.0,
            max_w: (IndexSet::new(), Vec::new()),
            min_hi: f64::INFINITY,
            min_w: (IndexSet::new(), Vec::new()),
        }
    }

    fn offer(&mut self, a: &IndexSet, signs: &[f64], b: Bounds<f64>) {
        if b.lo > self.max_lo {
            self.max_lo = b.lo;
            self.max_w = (a.clone(), signs.to_vec());
        }
        self.max_hi = self.max_hi.max(b.hi);
        if b.hi < self.min_hi {
            self.min_hi = b.hi;
            self.min_w = (a.clone(), signs.to_vec());
        }
    }
}

/// `φ_u(m)` for `m ≤ m_max` together with a super-democracy lower bound.
pub fn fundamental_function(space: &Space, m_max: usize, budget: usize, seed: u64) -> Result<FundamentalReport> {
    let dim = space.dim;
    if m_max == 0 || m_max > dim {
        return input(format!("m_max must lie in 1..={dim}, got {m_max}"));
    }
    let norm = |a: &IndexSet, s: &[f64]| -> Result<Bounds<f64>> { space.norm_coeffs(&indicator_coeffs(dim, s, a)?) };
    let mut stats: Vec<SizeStats> = Vec::new();
    let mut used = 0;
    let symmetric = is_symmetric(space);
    let per_size = (budget / m_max).max(64);
    let mut enumerated = true;
    let mut rng = restart_rng(seed, 0xf00d);
    for k in 1..=m_max {
        let mut st = SizeStats::new();
        if symmetric {
            let a = IndexSet::range(0, k);
            let s = vec![1.0; k];
            st.offer(&a, &s, norm(&a, &s)?);
            used += 1;
        } else if binomial(dim, k) * 2f64.powi(k as i32) <= per_size as f64 {
            let mut c: Vec<usize> = (0..k).collect();
            loop {
                let a: IndexSet = c.iter().copied().collect();
                for code in 0u64..(1 << k) {
                    let s: Vec<f64> = (0..k).map(|i| if code >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
                    st.offer(&a, &s, norm(&a, &s)?);
                    used += 1;
                }
                if !next_combination(&mut c, dim) {
                    break;
                }
            }
        } else {
            enumerated = false;
            let mut cands: Vec<(IndexSet, Vec<f64>)> = Vec::new();
            for seg in [space.order[..k].to_vec(), space.order[dim - k..].to_vec()] {
                let a: IndexSet = seg.into_iter().collect();
                cands.push((a.clone(), vec![1.0; k]));
                cands.push((a, (0..k).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect()));
            }
            while cands.len() < per_size {
                let a: IndexSet = sample(&mut rng, dim, k).into_iter().collect();
                let s = (0..k).map(|_| if rng.gen::<bool>() { 1.0 } else { -1.0 }).collect();
                cands.push((a, s));
            }
            for (a, s) in cands {
                st.offer(&a, &s, norm(&a, &s)?);
                used += 1;
            }
        }
        stats.push(st);
    }
    let exact = symmetric || enumerated;
    let mut values = Vec::new();
    let (mut run_lo, mut run_hi, mut run_w) = (f64::NEG_INFINITY, 0.0f64, None);
    for (k, st) in stats.iter().enumerate() {
        if st.max_lo > run_lo {
            run_lo = st.max_lo;
            run_w = Some(Witness::Indicator {
                set: st.max_w.0.clone(),
                signs: st.max_w.1.clone(),
            });
        }
        run_hi = run_hi.max(st.max_hi);
        values.push(ConstantEstimate {
            kind: ConstantKind::FundFn(k + 1),
            lower: run_lo,
            upper: if exact { Some(run_hi) } else { None },
            witness: run_w.clone(),
            budget_used: used,
            seed,
            source: if symmetric {
                "symmetric"
            } else if exact {
                "exhaustive"
            } else {
                "search"
            }
            .into(),
        });
    }
    let mut demo = ConstantEstimate {
        kind: ConstantKind::DemocracyRatio,
        lower: 0.0,
        upper: if symmetric { Some(1.0) } else { None },
        witness: None,
        budget_used: used,
        seed,
        source: if symmetric {
            "symmetric"
        } else if exact {
            "exhaustive"
        } else {
            "search"
        }
        .into(),
    };
    for st in &stats {
        let r = st.max_lo / st.min_hi;
        if demo.witness.is_none() || r > demo.lower {
            demo.lower = r;
            demo.witness = Some(Witness::Indicators {
                set: st.max_w.0.clone(),
                signs: st.max_w.1.clone(),
                other: st.min_w.0.clone(),
                other_signs: st.min_w.1.clone(),
            });
        }
    }
    Ok(FundamentalReport {
        values,
        democracy: demo,
        exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::witness::evaluate_witness;
    use crate::NormEngine;

    #[test]
    fn weak_l2_and_l1() {
        let space = Space::canonical(6, NormEngine::WeakLp { p: 2.0 }).unwrap();
        let r = fundamental_function(&space, 4, 100, 0).unwrap();
        assert!((r.values[3].lower - 2.0).abs() < 1e-12);
        assert!(r.exact);
        assert_eq!(r.democracy.lower, 1.0);
        let l1 = Space::canonical(5, NormEngine::lp(1.0)).unwrap();
        let r = fundamental_function(&l1, 5, 100, 0).unwrap();
        for (m, e) in r.values.iter().enumerate() {
            assert!((e.lower - (m + 1) as f64).abs() < 1e-12);
        }
        assert!(fundamental_function(&l1, 6, 100, 0).is_err());
    }

    #[test]
    fn enumerated_polyhedral() {
        let rows = vec![vec![1.0, 0.0, 0.0], vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]];
        let space = Space::canonical(3, NormEngine::Polyhedral { rows }).unwrap();
        let r = fundamental_function(&space, 3, 1000, 0).unwrap();
        assert!(r.exact);
        assert_eq!(r.values[1].lower, 2.0);
        for e in r.values.iter().chain(std::iter::once(&r.democracy)) {
            assert_eq!(
                evaluate_witness(&space, e.kind, e.witness.as_ref().unwrap()).unwrap(),
                e.lower
            );
        }
        assert!(r.democracy.lower >= 2.0);
    }

    #[test]
    fn combinations() {
        let mut c = vec![0, 1];
        let mut n = 1;
        while next_combination(&mut c, 4) {
            n += 1;
        }
        assert_eq!(n, 6);
    }
}
