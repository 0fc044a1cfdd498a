use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{conjugate, NormEngine};

/// Weak-Lorentz feeder with weights `c_n = c_max · n^{-1/p}` (1-based `n`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeederBasis {
    pub p: f64,
    pub c_max: f64,
    pub dim: usize,
    pub c: Vec<f64>,
    /// Unconditionality, TQG and LPU constant of the renormed weak-Lorentz basis.
    pub k: f64,
    /// `1 + p'·c_max`; the supremum over all segments, attained in the limit.
    pub m0: f64,
    /// `1 + max_{k≤m≤dim} ‖Σ_{n=k}^m c_n y_n‖`.
    pub m0_numeric: f64,
    /// `Σ_{n≤dim} c_n^p`.
    pub lp_mass: f64,
    pub divergence_ok: bool,
}

pub fn feeder_weight(p: f64, c_max: f64, index: usize) -> f64 {
    c_max * ((index + 1) as f64).powf(-1.0 / p)
}

pub fn feeder_m0(p: f64, c_max: f64) -> f64 {
    1.0 + conjugate(p) * c_max
}

pub fn make_feeder(p: f64, c_max: f64, dim: usize) -> Result<FeederBasis> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Unsupported(format!("feeder needs 1 < p < inf, got {p}")));
    }
    if !(c_max > 0.0 && c_max <= 1.0) {
        return Err(Error::Input(format!("c_max must lie in (0,1], got {c_max}")));
    }
    if dim == 0 {
        return Err(Error::Input("feeder dimension must be positive".into()));
    }
    let c: Vec<f64> = (0..dim).map(|i| feeder_weight(p, c_max, i)).collect();
    // c is nonincreasing, so the segment [k, m] is dominated by the prefix of the same
    // length and the weak-Lorentz norm of a prefix is its own prefix-sum ratio.
    let inv_pp = 1.0 - 1.0 / p;
    let mut sum = 0.0;
    let mut seg = 0.0f64;
    for (j, cj) in c.iter().enumerate() {
        sum += cj;
        seg = seg.max(sum / ((j + 1) as f64).powf(inv_pp));
    }
    let lp_mass: f64 = c.iter().map(|v| v.powf(p)).sum();
    let divergence_ok = lp_mass >= c_max.powf(p) * (dim as f64).ln() * (1.0 - 1e-6);
    Ok(FeederBasis {
        p,
        c_max,
        dim,
        c,
        k: 1.0,
        m0: feeder_m0(p, c_max),
        m0_numeric: 1.0 + seg,
        lp_mass,
        divergence_ok,
    })
}

impl FeederBasis {
    pub fn engine(&self) -> NormEngine<f64> {
        NormEngine::WeakLp { p: self.p }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::eval_weak_lp;

    #[test]
    fn feeder_examples() {
        let f = make_feeder(2.0, 1.0, 1000).unwrap();
        assert_eq!(f.k, 1.0);
        assert_eq!(f.m0, 3.0);
        assert!(f.m0_numeric <= 3.0 && f.m0_numeric > 2.5);
        assert!(f.divergence_ok);
        let g = make_feeder(2.0, 0.125, 10).unwrap();
        assert_eq!(g.c[0], 0.125);
        assert!(matches!(make_feeder(1.0, 1.0, 5), Err(Error::Unsupported(_))));
    }

    #[test]
    fn segment_sup_matches_brute_force() {
        let f = make_feeder(3.0, 0.7, 40).unwrap();
        let mut best = 0.0f64;
        for k in 0..40 {
            for m in k..40 {
                best = best.max(eval_weak_lp(3.0, &f.c[k..=m]).unwrap());
            }
        }
        assert!((1.0 + best - f.m0_numeric).abs() < 1e-12);
    }
}
