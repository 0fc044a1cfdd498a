use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, input, Error, Result};
use crate::norms::{Bounds, NormEngine};
use crate::scalar::Scalar;
use crate::sets::IndexSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Combinator {
    /// `z_{2k-1} = (x_k, 0)`, `z_{2k} = (-x_k, y_k)`.
    Ltimes,
    /// `w_{2k-1} = (x_k, y_k)`, `w_{2k} = (0, y_k)`.
    Rtimes,
}

/// A basis of the ambient space together with its dual functionals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound = "S: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub enum BasisRepr<S> {
    Identity,
    /// Row-major matrices: `basis` has the basis vectors as columns, `dual` the functionals as rows.
    Dense {
        basis: Vec<S>,
        dual: Vec<S>,
    },
    /// Interleaving of two bases of equal length on `X ⊕ Y` (`half` = dim X = dim Y).
    Interleaved {
        combinator: Combinator,
        left: Box<BasisRepr<S>>,
        right: Box<BasisRepr<S>>,
        half: usize,
    },
    /// Basis vectors `α_n b_n`, dual functionals `b_n^*/α_n`.
    Scaled {
        alpha: Vec<S>,
        inner: Box<BasisRepr<S>>,
    },
}

impl<S: Scalar> BasisRepr<S> {
    /// Dense basis from a row-major matrix whose columns are the basis vectors.
    pub fn dense(basis: Vec<S>, dim: usize) -> Result<Self> {
        check_len(dim * dim, basis.len())?;
        let m = DMatrix::from_fn(dim, dim, |i, j| basis[i * dim + j].as_f64());
        let inv = m
            .try_inverse()
            .ok_or_else(|| Error::Input("basis matrix is singular".into()))?;
        let dual = (0..dim * dim).map(|t| S::lit(inv[(t / dim, t % dim)])).collect();
        Ok(BasisRepr::Dense { basis, dual })
    }

    /// Coefficients `(b_n^*(x))_n`.
    pub fn coefficients(&self, x: &[S]) -> Vec<S> {
        match self {
            BasisRepr::Identity => x.to_vec(),
            BasisRepr::Dense { dual, .. } => mat_vec(dual, x),
            BasisRepr::Interleaved {
                combinator,
                left,
                right,
                half,
            } => {
                let cx = left.coefficients(&x[..*half]);
                let cy = right.coefficients(&x[*half..]);
                let mut c = vec![S::zero(); 2 * half];
                for k in 0..*half {
                    match combinator {
                        Combinator::Ltimes => {
                            c[2 * k] = cx[k] + cy[k];
                            c[2 * k + 1] = cy[k];
                        }
                        Combinator::Rtimes => {
                            c[2 * k] = cx[k];
                            c[2 * k + 1] = cy[k] - cx[k];
                        }
                    }
                }
                c
            }
            BasisRepr::Scaled { alpha, inner } => {
                inner.coefficients(x).iter().zip(alpha).map(|(c, a)| *c / *a).collect()
            }
        }
    }

    /// `Σ_n c_n b_n` in ambient coordinates.
    pub fn synthesize(&self, c: &[S]) -> Vec<S> {
        match self {
            BasisRepr::Identity => c.to_vec(),
            BasisRepr::Dense { basis, .. } => mat_vec(basis, c),
            BasisRepr::Interleaved {
                combinator,
                left,
                right,
                half,
            } => {
                let mut cx = vec![S::zero(); *half];
                let mut cy = vec![S::zero(); *half];
                for k in 0..*half {
                    match combinator {
                        Combinator::Ltimes => {
                            cx[k] = c[2 * k] - c[2 * k + 1];
                            cy[k] = c[2 * k + 1];
                        }
                        Combinator::Rtimes => {
                            cx[k] = c[2 * k];
                            cy[k] = c[2 * k] + c[2 * k + 1];
                        }
                    }
                }
                let mut x = left.synthesize(&cx);
                x.extend(right.synthesize(&cy));
                x
            }
            BasisRepr::Scaled { alpha, inner } => {
                let scaled: Vec<S> = c.iter().zip(alpha).map(|(c, a)| *c * *a).collect();
                inner.synthesize(&scaled)
            }
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, BasisRepr::Identity)
    }
}

fn mat_vec<S: Scalar>(m: &[S], x: &[S]) -> Vec<S> {
    let n = x.len();
    (0..n)
        .map(|i| m[i * n..(i + 1) * n].iter().zip(x).map(|(a, b)| *a * *b).sum())
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NamedVector {
    pub name: String,
    /// Coefficient vector.
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NamedSet {
    pub name: String,
    pub set: IndexSet,
}

/// Metadata carried along with a space: analytic upper bounds and stored witnesses.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpaceMeta {
    pub label: String,
    /// Certified upper bounds keyed by constant name (e.g. `Ktq`, `Phi(1)`).
    pub known_uppers: BTreeMap<String, f64>,
    pub witness_vectors: Vec<NamedVector>,
    pub witness_sets: Vec<NamedSet>,
}

/// Finite-dimensional space with a norm engine, a basis and a Schauder ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpace<S> {
    pub dim: usize,
    pub engine: NormEngine<S>,
    pub basis: BasisRepr<S>,
    /// `order[i]` is the basis index in position `i`.
    pub order: Vec<usize>,
    /// p-Banach exponent in `(0, 1]`.
    pub p_exponent: S,
    pub normalized: bool,
    pub meta: SpaceMeta,
    rank: Vec<usize>,
}

impl<S: Scalar> BasisSpace<S> {
    pub fn new(
        dim: usize,
        engine: NormEngine<S>,
        basis: BasisRepr<S>,
        order: Option<Vec<usize>>,
        p_exponent: S,
    ) -> Result<Self> {
        if dim == 0 {
            return input("dimension must be positive");
        }
        engine.validate(dim)?;
        if !(p_exponent > S::zero() && p_exponent <= S::one()) {
            return input(format!("p-exponent must lie in (0,1], got {p_exponent}"));
        }
        let order = order.unwrap_or_else(|| (0..dim).collect());
        check_len(dim, order.len())?;
        let mut rank = vec![usize::MAX; dim];
        for (pos, &k) in order.iter().enumerate() {
            if k >= dim || rank[k] != usize::MAX {
                return input("order is not a permutation");
            }
            rank[k] = pos;
        }
        let space = Self {
            dim,
            engine,
            basis,
            order,
            p_exponent,
            normalized: false,
            meta: SpaceMeta::default(),
            rank,
        };
        space.check_basis_shape()?;
        if let BasisRepr::Dense { .. } = space.basis {
            let err = space.biorthogonality_error();
            if err > S::basis_tol() {
                return Err(Error::Input(format!(
                    "dual times basis deviates from identity by {err}"
                )));
            }
        }
        Ok(space)
    }

    /// Canonical basis with the given engine.
    pub fn canonical(dim: usize, engine: NormEngine<S>) -> Result<Self> {
        Self::new(dim, engine, BasisRepr::Identity, None, S::one())
    }

    fn check_basis_shape(&self) -> Result<()> {
        fn walk<S: Scalar>(b: &BasisRepr<S>, dim: usize) -> Result<()> {
            match b {
                BasisRepr::Identity => Ok(()),
                BasisRepr::Dense { basis, dual } => {
                    check_len(dim * dim, basis.len())?;
                    check_len(dim * dim, dual.len())
                }
                BasisRepr::Interleaved { left, right, half, .. } => {
                    check_len(dim, 2 * half)?;
                    walk(left, *half)?;
                    walk(right, *half)
                }
                BasisRepr::Scaled { alpha, inner } => {
                    check_len(dim, alpha.len())?;
                    if alpha.iter().any(|a| !(*a > S::zero())) {
                        return input("scaling factors must be positive");
                    }
                    walk(inner, dim)
                }
            }
        }
        walk(&self.basis, self.dim)
    }

    /// Marks the basis normalized after checking `‖b_k‖ = 1` within tolerance.
    pub fn normalized(mut self) -> Result<Self> {
        for k in 0..self.dim {
            let b = self.engine.eval(&self.basis_vector(k));
            if (b.lo - S::one()).abs() > S::norm_tol() || (b.hi - S::one()).abs() > S::norm_tol() {
                return input(format!("basis vector {k} has norm [{}, {}]", b.lo, b.hi));
            }
        }
        self.normalized = true;
        Ok(self)
    }

    pub fn with_meta(mut self, meta: SpaceMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn coefficients(&self, x: &[S]) -> Result<Vec<S>> {
        check_len(self.dim, x.len())?;
        if x.iter().any(|v| !v.is_finite()) {
            return input("vector has non-finite entries");
        }
        Ok(self.basis.coefficients(x))
    }

    pub fn synthesize(&self, c: &[S]) -> Result<Vec<S>> {
        check_len(self.dim, c.len())?;
        Ok(self.basis.synthesize(c))
    }

    pub fn basis_vector(&self, k: usize) -> Vec<S> {
        let mut e = vec![S::zero(); self.dim];
        e[k] = S::one();
        self.basis.synthesize(&e)
    }

    /// Row `k` of the dual matrix in ambient coordinates.
    pub fn dual_row(&self, k: usize) -> Vec<S> {
        (0..self.dim)
            .map(|i| {
                let mut e = vec![S::zero(); self.dim];
                e[i] = S::one();
                self.basis.coefficients(&e)[k]
            })
            .collect()
    }

    /// Max entrywise deviation of `dual · basis` from the identity.
    pub fn biorthogonality_error(&self) -> S {
        let mut worst = S::zero();
        for k in 0..self.dim {
            let c = self.basis.coefficients(&self.basis_vector(k));
            for (n, v) in c.iter().enumerate() {
                let target = if n == k { S::one() } else { S::zero() };
                worst = worst.max((*v - target).abs());
            }
        }
        worst
    }

    pub fn norm(&self, x: &[S]) -> Result<Bounds<S>> {
        check_len(self.dim, x.len())?;
        Ok(self.engine.eval(x))
    }

    /// Norm of `Σ c_n b_n`.
    pub fn norm_coeffs(&self, c: &[S]) -> Result<Bounds<S>> {
        check_len(self.dim, c.len())?;
        Ok(self.engine.eval(&self.basis.synthesize(c)))
    }

    /// `S_A f` in ambient coordinates.
    pub fn project(&self, f: &[S], a: &IndexSet) -> Result<Vec<S>> {
        let c = self.coefficients(f)?;
        self.check_set(a)?;
        Ok(self.basis.synthesize(&crate::greedy::project_coeffs(&c, a)))
    }

    /// `1_{ε,A} = Σ_{n∈A} ε_n b_n`, with `eps` listed in the order of `A`.
    pub fn indicator(&self, eps: &[S], a: &IndexSet) -> Result<Vec<S>> {
        self.check_set(a)?;
        let c = crate::greedy::indicator_coeffs(self.dim, eps, a)?;
        Ok(self.basis.synthesize(&c))
    }

    /// `R_A(f)`: the signs of `f` on `A` scaled by `min_{n∈A} |a_n|`.
    pub fn restricted_truncation(&self, f: &[S], a: &IndexSet) -> Result<Vec<S>> {
        let c = self.coefficients(f)?;
        self.check_set(a)?;
        Ok(self
            .basis
            .synthesize(&crate::greedy::restricted_truncation_coeffs(&c, a)?))
    }

    /// `T_A(f) = R_A(f) + f − S_A(f)`.
    pub fn truncation_op(&self, f: &[S], a: &IndexSet) -> Result<Vec<S>> {
        let c = self.coefficients(f)?;
        self.check_set(a)?;
        Ok(self.basis.synthesize(&crate::greedy::truncation_coeffs(&c, a)?))
    }

    pub fn check_set(&self, a: &IndexSet) -> Result<()> {
        match a.last() {
            Some(k) if k >= self.dim => input(format!("index {k} outside dimension {}", self.dim)),
            _ => Ok(()),
        }
    }

    /// Position of basis index `k` in the Schauder ordering.
    pub fn rank(&self, k: usize) -> usize {
        self.rank[k]
    }

    /// The first `m` basis indices of the ordering.
    pub fn initial_segment(&self, m: usize) -> IndexSet {
        self.order[..m.min(self.dim)].iter().copied().collect()
    }
}
