use crate::error::{input, Result};
use crate::scalar::{cmp_desc, Scalar};

/// ℓ_p norm for finite `p ≥ 1`, or the max norm when `p` is infinite.
pub fn eval_lp<S: Scalar>(p: S, x: &[S]) -> Result<S> {
    if p.is_nan() || p < S::one() {
        return input(format!("lp exponent must be >= 1, got {p}"));
    }
    Ok(lp_unchecked(p, x))
}

pub(crate) fn lp_unchecked<S: Scalar>(p: S, x: &[S]) -> S {
    if p.is_infinite() {
        return linf(x);
    }
    if p == S::one() {
        return x.iter().map(|v| v.abs()).sum();
    }
    // scale by the max entry to avoid overflow for large p
    let m = linf(x);
    if m == S::zero() {
        return S::zero();
    }
    let s: S = x.iter().map(|v| (v.abs() / m).powf(p)).sum();
    m * s.powf(p.recip())
}

pub(crate) fn linf<S: Scalar>(x: &[S]) -> S {
    x.iter().fold(S::zero(), |acc, v| acc.max(v.abs()))
}

/// Conjugate exponent `p' = p/(p-1)`.
pub fn conjugate<S: Scalar>(p: S) -> S {
    p / (p - S::one())
}

/// Weak-Lorentz norm `sup_m m^{-1/p'} Σ_{i≤m} x*_i` with `x*` the decreasing rearrangement of `|x|`.
pub fn eval_weak_lp<S: Scalar>(p: S, x: &[S]) -> Result<S> {
    if p.is_nan() || p <= S::one() || p.is_infinite() {
        return input(format!("weak-lp exponent must be in (1, inf), got {p}"));
    }
    Ok(weak_lp_unchecked(p, x))
}

pub(crate) fn weak_lp_unchecked<S: Scalar>(p: S, x: &[S]) -> S {
    let mut mags: Vec<S> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| cmp_desc(*a, *b));
    let inv_pp = S::one() - p.recip();
    let mut best = S::zero();
    let mut sum = S::zero();
    for (i, m) in mags.iter().enumerate() {
        if *m == S::zero() {
            break;
        }
        sum = sum + *m;
        let v = sum / S::from_index(i + 1).powf(inv_pp);
        if v > best {
            best = v;
        }
    }
    best
}

/// `Σ_{k≤m} k^{-1/p'}`: the majorization budget of the first `m` slots.
pub fn harmonic_budget<S: Scalar>(m: usize, pprime: S) -> S {
    (1..=m).map(|k| increment(k, pprime)).sum()
}

/// `k^{-1/p'}` for a 1-based slot `k`.
pub fn increment<S: Scalar>(k: usize, pprime: S) -> S {
    S::from_index(k).powf(-pprime.recip())
}
