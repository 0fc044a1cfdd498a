use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Enclosure `lo ≤ value ≤ hi` of a norm value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds<S> {
    pub lo: S,
    pub hi: S,
}

impl<S: Scalar> Bounds<S> {
    pub fn exact(v: S) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn new(lo: S, hi: S) -> Self {
        debug_assert!(lo <= hi, "inverted bounds {lo} > {hi}");
        Self { lo, hi }
    }

    pub fn zero() -> Self {
        Self::exact(S::zero())
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> S {
        self.hi - self.lo
    }

    pub fn max(self, other: Self) -> Self {
        Self {
            lo: self.lo.max(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn scale(self, c: S) -> Self {
        let c = c.abs();
        Self {
            lo: self.lo * c,
            hi: self.hi * c,
        }
    }

    /// `(Σ b_i^p)^{1/p}` applied endpoint-wise; monotone, hence sound.
    pub fn p_sum(parts: &[Self], p: S) -> Self {
        if p.is_infinite() {
            return parts.iter().fold(Self::zero(), |acc, b| acc.max(*b));
        }
        let lo: S = parts.iter().map(|b| b.lo.powf(p)).sum();
        let hi: S = parts.iter().map(|b| b.hi.powf(p)).sum();
        Self {
            lo: lo.powf(p.recip()),
            hi: hi.powf(p.recip()),
        }
    }
}
