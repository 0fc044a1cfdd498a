use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::norms::bounds::Bounds;
use crate::norms::delta::{eval_delta, DeltaFamilySpec};
use crate::norms::lp::{linf, lp_unchecked, weak_lp_unchecked};
use crate::scalar::Scalar;

/// Norm on ambient coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
#[serde(bound = "S: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub enum NormEngine<S> {
    Lp {
        p: S,
    },
    Linf,
    /// `(Σ|x_i|^p)^{1/p}` for `0 < p ≤ 1`: a p-norm, not a norm when `p < 1`.
    QuasiLp {
        p: S,
    },
    WeakLp {
        p: S,
    },
    /// `(Σ ‖x_i‖^p)^{1/p}` over consecutive coordinate blocks of the given lengths.
    DirectSum {
        parts: Vec<(usize, NormEngine<S>)>,
        p: S,
    },
    /// `max{‖x[..split]‖_left, ‖x[split..]‖_right}`.
    SupPair {
        left: Box<NormEngine<S>>,
        right: Box<NormEngine<S>>,
        split: usize,
    },
    CompositeMax {
        components: Vec<NormEngine<S>>,
    },
    /// Seminorm `x ↦ ‖(x_i)_{i∈indices}‖_inner`.
    Restrict {
        indices: Vec<usize>,
        inner: Box<NormEngine<S>>,
    },
    /// `max_r |⟨row_r, x⟩|`; a norm whenever the rows span.
    Polyhedral {
        rows: Vec<Vec<S>>,
    },
    /// The ◁-seminorm of a Δ-family.
    DeltaNorm {
        spec: Box<DeltaFamilySpec<S>>,
    },
}

impl<S: Scalar> NormEngine<S> {
    pub fn lp(p: S) -> Self {
        if p.is_infinite() {
            NormEngine::Linf
        } else {
            NormEngine::Lp { p }
        }
    }

    /// Checks parameters against the ambient dimension.
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            NormEngine::Lp { p } => {
                if !(*p >= S::one()) {
                    return input(format!("lp engine needs p >= 1, got {p}"));
                }
            }
            NormEngine::Linf => {}
            NormEngine::QuasiLp { p } => {
                if !(*p > S::zero() && *p <= S::one()) {
                    return input(format!("quasi-lp engine needs 0 < p <= 1, got {p}"));
                }
            }
            NormEngine::WeakLp { p } => {
                if !(*p > S::one()) || p.is_infinite() {
                    return input(format!("weak-lp engine needs 1 < p < inf, got {p}"));
                }
            }
            NormEngine::DirectSum { parts, p } => {
                if !(*p > S::zero()) {
                    return input("direct sum needs p > 0");
                }
                let total: usize = parts.iter().map(|(n, _)| *n).sum();
                if total != dim {
                    return input(format!("direct sum covers {total} coordinates, space has {dim}"));
                }
                for (n, e) in parts {
                    e.validate(*n)?;
                }
            }
            NormEngine::SupPair { left, right, split } => {
                if *split > dim {
                    return input("sup-pair split beyond dimension");
                }
                left.validate(*split)?;
                right.validate(dim - split)?;
            }
            NormEngine::CompositeMax { components } => {
                if components.is_empty() {
                    return input("composite max needs at least one component");
                }
                for c in components {
                    c.validate(dim)?;
                }
            }
            NormEngine::Restrict { indices, inner } => {
                if indices.iter().any(|&i| i >= dim) {
                    return input("restriction index beyond dimension");
                }
                inner.validate(indices.len())?;
            }
            NormEngine::Polyhedral { rows } => {
                if rows.iter().any(|r| r.len() != dim) {
                    return input("polyhedral row length differs from dimension");
                }
            }
            NormEngine::DeltaNorm { spec } => {
                if spec.dim != dim {
                    return input("delta spec dimension differs from space dimension");
                }
                spec.validate()?;
            }
        }
        Ok(())
    }

    /// True when every evaluation collapses to a single value.
    pub fn is_exact(&self) -> bool {
        match self {
            NormEngine::DeltaNorm { .. } => false,
            NormEngine::DirectSum { parts, .. } => parts.iter().all(|(_, e)| e.is_exact()),
            NormEngine::SupPair { left, right, .. } => left.is_exact() && right.is_exact(),
            NormEngine::CompositeMax { components } => components.iter().all(|e| e.is_exact()),
            NormEngine::Restrict { inner, .. } => inner.is_exact(),
            _ => true,
        }
    }

    /// 1-unconditional with respect to the ambient coordinates (lattice norm).
    pub fn is_lattice(&self) -> bool {
        match self {
            NormEngine::Lp { .. } | NormEngine::QuasiLp { .. } | NormEngine::Linf | NormEngine::WeakLp { .. } => true,
            NormEngine::DirectSum { parts, .. } => parts.iter().all(|(_, e)| e.is_lattice()),
            NormEngine::SupPair { left, right, .. } => left.is_lattice() && right.is_lattice(),
            NormEngine::CompositeMax { components } => components.iter().all(|e| e.is_lattice()),
            NormEngine::Restrict { inner, .. } => inner.is_lattice(),
            NormEngine::Polyhedral { .. } | NormEngine::DeltaNorm { .. } => false,
        }
    }

    /// Evaluates on an ambient vector of the validated dimension.
    pub fn eval(&self, x: &[S]) -> Bounds<S> {
        match self {
            NormEngine::Lp { p } | NormEngine::QuasiLp { p } => Bounds::exact(lp_unchecked(*p, x)),
            NormEngine::Linf => Bounds::exact(linf(x)),
            NormEngine::WeakLp { p } => Bounds::exact(weak_lp_unchecked(*p, x)),
            NormEngine::DirectSum { parts, p } => {
                let mut start = 0;
                let vals: Vec<Bounds<S>> = parts
                    .iter()
                    .map(|(n, e)| {
                        let b = e.eval(&x[start..start + n]);
                        start += n;
                        b
                    })
                    .collect();
                Bounds::p_sum(&vals, *p)
            }
            NormEngine::SupPair { left, right, split } => left.eval(&x[..*split]).max(right.eval(&x[*split..])),
            NormEngine::CompositeMax { components } => {
                components.iter().fold(Bounds::zero(), |acc, c| acc.max(c.eval(x)))
            }
            NormEngine::Restrict { indices, inner } => {
                let sub: Vec<S> = indices.iter().map(|&i| x[i]).collect();
                inner.eval(&sub)
            }
            NormEngine::Polyhedral { rows } => Bounds::exact(rows.iter().fold(S::zero(), |acc, r| {
                let s: S = r.iter().zip(x).map(|(a, b)| *a * *b).sum();
                acc.max(s.abs())
            })),
            NormEngine::DeltaNorm { spec } => {
                let e = eval_delta(spec, x).expect("validated delta spec");
                Bounds::new(e.lo, e.hi)
            }
        }
    }

    /// Largest `q ≤ 1` for which the engine is a q-norm.
    pub fn convexity(&self) -> S {
        match self {
            NormEngine::QuasiLp { p } => *p,
            NormEngine::DirectSum { parts, p } => parts.iter().fold(p.min(S::one()), |m, (_, e)| m.min(e.convexity())),
            NormEngine::SupPair { left, right, .. } => left.convexity().min(right.convexity()),
            NormEngine::CompositeMax { components } => components.iter().fold(S::one(), |m, e| m.min(e.convexity())),
            NormEngine::Restrict { inner, .. } => inner.convexity(),
            _ => S::one(),
        }
    }

    /// The Δ-family carried by this engine, if any.
    pub fn delta_spec(&self) -> Option<&DeltaFamilySpec<S>> {
        match self {
            NormEngine::DeltaNorm { spec } => Some(spec),
            NormEngine::CompositeMax { components } => components.iter().find_map(|c| c.delta_spec()),
            NormEngine::Restrict { inner, .. } => inner.delta_spec(),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composite_and_pair() {
        let e = NormEngine::CompositeMax {
            components: vec![
                NormEngine::Linf,
                NormEngine::Restrict {
                    indices: vec![0, 1],
                    inner: Box::new(NormEngine::Lp { p: 1.0 }),
                },
            ],
        };
        e.validate(3).unwrap();
        assert_eq!(e.eval(&[1.0, -2.0, 5.0]), Bounds::exact(5.0));
        assert_eq!(e.eval(&[1.0, -2.0, 0.5]), Bounds::exact(3.0));
        let s = NormEngine::SupPair {
            left: Box::new(NormEngine::Lp { p: 1.0 }),
            right: Box::new(NormEngine::Lp { p: 2.0 }),
            split: 2,
        };
        s.validate(4).unwrap();
        assert_eq!(s.eval(&[1.0, 1.0, 3.0, 4.0]), Bounds::exact(5.0));
        assert!(s.validate(5).is_ok());
        let d = NormEngine::DirectSum {
            parts: vec![(1, NormEngine::Linf), (2, NormEngine::Lp { p: 2.0 })],
            p: 2.0,
        };
        assert!(d.validate(3).is_ok());
        assert!(d.validate(4).is_err());
        assert!((d.eval(&[3.0f64, 0.0, 4.0]).lo - 5.0).abs() < 1e-15);
    }

    #[test]
    fn zero_and_exactness() {
        let e: NormEngine<f64> = NormEngine::lp(2.0);
        assert_eq!(e.eval(&[0.0, 0.0]), Bounds::zero());
        assert!(e.is_exact() && e.is_lattice());
        assert!(!NormEngine::<f64>::Polyhedral { rows: vec![vec![1.0]] }.is_lattice());
    }
}
