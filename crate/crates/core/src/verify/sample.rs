//! Random inputs for the property suites.

use rand::seq::index::sample;
use rand::Rng;

use crate::basis::{BasisRepr, BasisSpace};
use crate::error::Result;
use crate::sets::IndexSet;
use crate::{NormEngine, Space};

/// Sparse coefficient vector: support of size `1..=max_support`, log-uniform magnitudes in
/// `[2^-6, 1]`, random signs, and occasional ties.
pub fn random_coeffs<R: Rng>(rng: &mut R, dim: usize, max_support: usize) -> Vec<f64> {
    let k = rng.gen_range(1..=max_support.clamp(1, dim));
    let mut c = vec![0.0; dim];
    let idx = sample(rng, dim, k).into_vec();
    let mut prev: Option<f64> = None;
    for n in idx {
        let m = match prev {
            Some(v) if rng.gen_bool(0.2) => v,
            _ => 2f64.powf(-6.0 * rng.gen::<f64>()),
        };
        prev = Some(m);
        c[n] = if rng.gen() { m } else { -m };
    }
    c
}

pub fn random_signs<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    (0..k).map(|_| if rng.gen() { 1.0 } else { -1.0 }).collect()
}

/// Uniformly random subset of `0..dim` of size `1..=max_len`.
pub fn random_set<R: Rng>(rng: &mut R, dim: usize, max_len: usize) -> IndexSet {
    let k = rng.gen_range(1..=max_len.clamp(1, dim));
    sample(rng, dim, k).into_iter().collect()
}

fn random_dense<R: Rng>(rng: &mut R, dim: usize) -> Result<BasisRepr<f64>> {
    // unit diagonal plus a small perturbation keeps the matrix well conditioned
    let m: Vec<f64> = (0..dim * dim)
        .map(|t| {
            if t / dim == t % dim {
                1.0
            } else {
                rng.gen_range(-0.4..0.4) / dim as f64
            }
        })
        .collect();
    BasisRepr::dense(m, dim)
}

fn random_polyhedral<R: Rng>(rng: &mut R, dim: usize) -> NormEngine<f64> {
    let mut rows: Vec<Vec<f64>> = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _ in 0..rng.gen_range(1..=dim + 1) {
        rows.push((0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect());
    }
    NormEngine::Polyhedral { rows }
}

/// A random space with an exact engine and `p`-exponent 1 or, for the quasi-ℓ_p engine, `p`.
///
/// Covers ℓ_p and weak ℓ_p on the canonical basis, polyhedral norms, maxima of engines,
/// dense perturbed bases and quasi-ℓ_{1/2}.
pub fn random_exact_space<R: Rng>(rng: &mut R, dim: usize) -> Result<Space> {
    let pick = rng.gen_range(0..7);
    let p_list = [1.0, 1.5, 2.0, 3.0, f64::INFINITY];
    let lp = |rng: &mut R| NormEngine::lp(p_list[rng.gen_range(0..p_list.len())]);
    let space = match pick {
        0 => BasisSpace::canonical(dim, lp(rng))?,
        1 => BasisSpace::new(dim, lp(rng), random_dense(rng, dim)?, None, 1.0)?,
        2 => BasisSpace::canonical(dim, random_polyhedral(rng, dim))?,
        3 => BasisSpace::new(dim, random_polyhedral(rng, dim), random_dense(rng, dim)?, None, 1.0)?,
        4 => {
            let components = vec![NormEngine::lp(1.0), random_polyhedral(rng, dim)];
            BasisSpace::canonical(dim, NormEngine::CompositeMax { components })?
        }
        5 => BasisSpace::canonical(dim, NormEngine::WeakLp { p: 2.0 })?,
        _ => BasisSpace::new(dim, NormEngine::QuasiLp { p: 0.5 }, BasisRepr::Identity, None, 0.5)?,
    };
    Ok(space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::report::trial_rng;

    #[test]
    fn shapes() {
        let mut rng = trial_rng(1, "sample", 0);
        for _ in 0..50 {
            let c = random_coeffs(&mut rng, 9, 4);
            let k = c.iter().filter(|v| **v != 0.0).count();
            assert!((1..=4).contains(&k));
            assert!(c.iter().all(|v| v.abs() <= 1.0));
            let s = random_exact_space(&mut rng, 4).unwrap();
            assert!(s.engine.is_exact());
            assert!(s.p_exponent <= s.engine.convexity());
        }
    }
}
