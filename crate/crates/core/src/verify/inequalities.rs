//! Replays of the supporting inequalities: p-convexity, splitting of bounded-oscillation sets,
//! the oscillation-reduction step, t-greedy splitting and the complex monotonicity bound.

use num_complex::Complex64;
use rand::Rng;
use serde_json::json;

use crate::constants::{a_p, known_upper, ConstantKind};
use crate::error::{input, Result};
use crate::greedy::{canonical_greedy, indicator_coeffs, is_greedy, project_coeffs};
use crate::sets::{subsets, IndexSet};
use crate::verify::report::{run_trials, CheckReport, EXACT_TOLERANCE, TOLERANCE};
use crate::verify::sample::{random_coeffs, random_set};
use crate::Space;

/// The exponent used in p-triangle steps: the space's declared exponent capped by the engine's.
pub fn triangle_exponent(space: &Space) -> f64 {
    space.p_exponent.min(space.engine.convexity())
}

pub(crate) fn extremes(f: &[f64], a: &IndexSet) -> (f64, f64) {
    a.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), n| {
        (lo.min(f[n].abs()), hi.max(f[n].abs()))
    })
}

pub(crate) fn pow_lo(space: &Space, c: &[f64], p: f64) -> Result<f64> {
    Ok(space.norm_coeffs(c)?.lo.powf(p))
}

pub(crate) fn pow_hi(space: &Space, c: &[f64], p: f64) -> Result<f64> {
    Ok(space.norm_coeffs(c)?.hi.powf(p))
}

/// Fills `A` with magnitudes `max · r^u`, `u ∈ [0,1]`, keeping the signs of `f`; one entry
/// is exactly `max` and, when `|A| > 1`, one is exactly `max · r`.
pub(crate) fn fill_window<R: Rng>(rng: &mut R, f: &mut [f64], a: &IndexSet, max: f64, r: f64) {
    let items = a.as_slice();
    for (i, &n) in items.iter().enumerate() {
        let m = match i {
            0 => max,
            1 if rng.gen_bool(0.5) => max * r,
            _ => max * r.powf(rng.gen::<f64>()),
        };
        f[n] = if rng.gen() { m } else { -m };
    }
}

/// `‖Σ a_n f_n‖ ≤ A_p max_{B} ‖Σ_{n∈B} f_n‖` for random families of ambient vectors and
/// `0 ≤ a_n ≤ 1`. Signed coefficients are excluded: `f = (e₁, −e₁)`, `a = (1, −1)` gives
/// `2 > A_1 · 1`.
pub fn check_pconvex(space: &Space, family_size: usize, trials: usize, seed: u64) -> Result<CheckReport> {
    if !space.engine.is_exact() {
        return input("p-convexity replay needs an exact norm engine");
    }
    if !(1..=12).contains(&family_size) {
        return input(format!("family size must lie in 1..=12, got {family_size}"));
    }
    let p = triangle_exponent(space);
    let ap = a_p(p);
    let dim = space.dim;
    run_trials("pconvex", trials, seed, TOLERANCE, |rng, c| {
        let n = rng.gen_range(1..=family_size);
        let fam: Vec<Vec<f64>> = (0..n)
            .map(|_| space.synthesize(&random_coeffs(rng, dim, dim)))
            .collect::<Result<_>>()?;
        let a: Vec<f64> = (0..n)
            .map(|_| match rng.gen_range(0..5) {
                0 => 1.0,
                1 => 0.0,
                _ => rng.gen_range(0.0..=1.0),
            })
            .collect();
        let mut combo = vec![0.0; dim];
        for (f, w) in fam.iter().zip(&a) {
            for (x, v) in combo.iter_mut().zip(f) {
                *x += w * v;
            }
        }
        let lhs = space.norm(&combo)?.lo;
        let mut sup = 0.0f64;
        for mask in 1u32..1 << n {
            let mut s = vec![0.0; dim];
            for (k, f) in fam.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    for (x, v) in s.iter_mut().zip(f) {
                        *x += v;
                    }
                }
            }
            sup = sup.max(space.norm(&s)?.hi);
        }
        c.assert_le("pconvex", lhs, ap * sup, || json!({ "family": fam, "a": a, "p": p }));
        Ok(())
    })
}

/// Splitting a set of oscillation `1/(t₁t₂)` into a top window of oscillation `1/t₁` and
/// the rest, of oscillation `1/t₂`.
pub fn check_subadditive_split(space: &Space, trials: usize, seed: u64) -> Result<CheckReport> {
    let p = triangle_exponent(space);
    let dim = space.dim;
    run_trials("subadditive-split", trials, seed, TOLERANCE, |rng, c| {
        let mut t = [0.0; 2];
        for v in &mut t {
            *v = if rng.gen_bool(0.15) {
                1.0
            } else {
                rng.gen_range(0.1..1.0)
            };
        }
        let [t1, t2] = t;
        let mut f = random_coeffs(rng, dim, 10);
        let a = random_set(rng, dim, 8);
        let top = 2f64.powf(-3.0 * rng.gen::<f64>());
        fill_window(rng, &mut f, &a, top, t1 * t2);
        let data = || json!({ "coeffs": f, "set": a, "t1": t1, "t2": t2 });
        let (lo, hi) = extremes(&f, &a);
        c.assert_le("osc(f,A)<=1/(t1t2)", hi, lo / (t1 * t2), data);
        let a1: IndexSet = a.iter().filter(|&n| f[n].abs() >= hi * t1).collect();
        let a2 = a.difference(&a1);
        c.assert_true(
            "partition",
            a1.is_disjoint(&a2) && a1.union(&a2) == a && !a1.is_empty(),
            data,
        );
        let (lo1, hi1) = extremes(&f, &a1);
        c.assert_le("osc(f,A1)<=1/t1", hi1, lo1 / t1, data);
        if !a2.is_empty() {
            let (lo2, hi2) = extremes(&f, &a2);
            c.assert_le("osc(f,A2)<=1/t2", hi2, lo2 / t2, data);
        }
        let lhs = pow_lo(space, &project_coeffs(&f, &a), p)?;
        let rhs = pow_hi(space, &project_coeffs(&f, &a1), p)? + pow_hi(space, &project_coeffs(&f, &a2), p)?;
        c.assert_le("p-triangle", lhs, rhs, data);
        Ok(())
    })
}

/// The oscillation-reduction step: `g = f − (1−b)S_D f` with `D = A(f, b, 1)`.
pub fn check_osc_reduction(space: &Space, trials: usize, seed: u64) -> Result<CheckReport> {
    let p = triangle_exponent(space);
    let dim = space.dim;
    let max_set = if space.engine.is_exact() { 8 } else { 6 };
    run_trials("osc-reduction", trials, seed, TOLERANCE, |rng, c| {
        let (a, b) = match rng.gen_range(0..10) {
            0 => (1.0, 1.0),
            1 => (rng.gen_range(0.1..=1.0), 1.0),
            _ => {
                let x: f64 = rng.gen_range(0.1..=1.0);
                let y: f64 = rng.gen_range(0.1..=1.0);
                (x.min(y), x.max(y))
            }
        };
        let mut f = random_coeffs(rng, dim, 10);
        let set = random_set(rng, dim, max_set);
        fill_window(rng, &mut f, &set, 1.0, a * b);
        let data = || json!({ "coeffs": f, "set": set, "a": a, "b": b });
        let d: IndexSet = (0..dim).filter(|&n| b <= f[n].abs() && f[n].abs() <= 1.0).collect();
        let g: Vec<f64> = (0..dim)
            .map(|n| if d.contains(n) { f[n] - (1.0 - b) * f[n] } else { f[n] })
            .collect();
        let bset = set.intersection(&d);
        if b == 1.0 {
            c.assert_true("b=1 leaves f unchanged", g == f, data);
        }
        c.assert_true("B nonempty", !bset.is_empty(), data);
        let (glo, ghi) = extremes(&g, &set);
        c.assert_le("osc(g,A)<=1/a", ghi, glo / a, data);
        let (flo, fhi) = extremes(&f, &bset);
        c.assert_le("osc(f,B)<=1/b", fhi, flo / b, data);
        // S_A g = S_A f − (1−b) S_B f, coefficientwise
        let sag = project_coeffs(&g, &set);
        let sbf = project_coeffs(&f, &bset);
        let saf = project_coeffs(&f, &set);
        let worst = (0..dim)
            .map(|n| (sag[n] - (saf[n] - (1.0 - b) * sbf[n])).abs())
            .fold(0.0, f64::max);
        c.assert_close("S_A g identity", worst, 0.0, EXACT_TOLERANCE, data);
        let wb = (1.0 - b).powf(p);
        let lhs1 = pow_lo(space, &g, p)?;
        let rhs1 = pow_hi(space, &f, p)? + wb * pow_hi(space, &project_coeffs(&f, &d), p)?;
        c.assert_le("g bound", lhs1, rhs1, data);
        let lhs2 = pow_lo(space, &saf, p)?;
        let rhs2 = pow_hi(space, &sag, p)? + wb * pow_hi(space, &sbf, p)?;
        c.assert_le("S_A f split", lhs2, rhs2, data);
        let phi_a = known_upper(space, ConstantKind::PhiBig(a));
        let phi_b = known_upper(space, ConstantKind::PhiBig(b));
        if let (Some(ua), Some(ub)) = (phi_a, phi_b) {
            let rhs = ua.powf(p) * pow_hi(space, &g, p)? + wb * ub.powf(p) * pow_hi(space, &f, p)?;
            c.assert_le("certified chain", lhs2, rhs, data);
        } else {
            c.note("certified chain skipped: no certified upper for Phi(a) and Phi(b)");
        }
        Ok(())
    })
}

/// A t-greedy set against the greedy set of the same size: the symmetric difference has
/// oscillation at most `1/t` and the projection splits accordingly.
pub fn check_tgreedy_log(space: &Space, t_grid: &[f64], trials: usize, seed: u64) -> Result<CheckReport> {
    if t_grid.is_empty() || t_grid.iter().any(|t| !(*t > 0.0 && *t <= 1.0)) {
        return input("t-grid values must lie in (0, 1]");
    }
    let p = triangle_exponent(space);
    let dim = space.dim;
    run_trials("tgreedy-split", trials, seed, TOLERANCE, |rng, c| {
        let t = t_grid[rng.gen_range(0..t_grid.len())];
        let f = random_coeffs(rng, dim, 10);
        let supp: Vec<usize> = (0..dim).filter(|&n| f[n] != 0.0).collect();
        let m = rng.gen_range(1..=supp.len());
        let mut a = canonical_greedy(&f, m);
        for _ in 0..12 {
            let out: Vec<usize> = a.iter().collect();
            let x = out[rng.gen_range(0..out.len())];
            let y = rng.gen_range(0..dim);
            if a.contains(y) {
                continue;
            }
            let cand: IndexSet = a.iter().filter(|&n| n != x).chain(std::iter::once(y)).collect();
            if is_greedy(&f, &cand, t) {
                a = cand;
            }
        }
        let b = canonical_greedy(&f, a.len());
        let data = || json!({ "coeffs": f, "set": a, "t": t });
        c.assert_true("A is t-greedy", is_greedy(&f, &a, t), data);
        c.assert_true(
            "B is greedy of size |A|",
            is_greedy(&f, &b, 1.0) && b.len() == a.len(),
            data,
        );
        let (amb, bma) = (a.difference(&b), b.difference(&a));
        if !amb.is_empty() {
            let (lo_ab, hi_ab) = extremes(&f, &amb);
            let (lo_ba, hi_ba) = extremes(&f, &bma);
            c.assert_true("min(B\\A) >= max(A\\B)", lo_ba >= hi_ab, data);
            c.assert_true("min(A\\B) >= t max(B\\A)", lo_ab >= t * hi_ba, data);
            let (lo, hi) = extremes(&f, &amb.union(&bma));
            c.assert_le("osc(f,AΔB)<=1/t", hi, lo / t, data);
        }
        let mut diff = project_coeffs(&f, &amb);
        for n in bma.iter() {
            diff[n] = -f[n];
        }
        let sbf = project_coeffs(&f, &b);
        let saf = project_coeffs(&f, &a);
        let recombined: Vec<f64> = sbf.iter().zip(&diff).map(|(x, y)| x + y).collect();
        c.assert_true("S_A f = S_B f + S_(A\\B) f − S_(B\\A) f", recombined == saf, data);
        let lhs = pow_lo(space, &saf, p)?;
        let rhs = pow_hi(space, &sbf, p)? + pow_hi(space, &diff, p)?;
        c.assert_le("p-triangle", lhs, rhs, data);
        Ok(())
    })
}

/// `|z₁ − z₂| ≤ |t₁z₁ − t₂z₂|` for `|z₁| ≤ |z₂|` and `1 ≤ t₁ ≤ t₂`.
pub fn check_complex_monotone(trials: usize, seed: u64) -> Result<CheckReport> {
    run_trials("complex-monotone", trials, seed, EXACT_TOLERANCE, |rng, c| {
        let mut z = [Complex64::new(0.0, 0.0); 2];
        for v in &mut z {
            let r = 2f64.powf(rng.gen_range(-4.0..=4.0));
            *v = Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU));
        }
        if rng.gen_bool(0.05) {
            z[0] = z[1] * rng.gen_range(0.0..=1.0);
        }
        let [mut z1, mut z2] = z;
        if z1.norm() > z2.norm() {
            std::mem::swap(&mut z1, &mut z2);
        }
        let (t1, t2) = match rng.gen_range(0..10) {
            0 => (1.0, 1.0),
            1 => {
                let s = 1.0 + rng.gen::<f64>() * 4.0;
                (s, s)
            }
            _ => {
                let x = 1.0 + rng.gen::<f64>() * 4.0;
                let y = 1.0 + rng.gen::<f64>() * 4.0;
                (x.min(y), x.max(y))
            }
        };
        let lhs = (z1 - z2).norm();
        let rhs = (z1 * t1 - z2 * t2).norm();
        c.assert_le(
            "complex",
            lhs,
            rhs,
            || json!({ "z1": [z1.re, z1.im], "z2": [z2.re, z2.im], "t1": t1, "t2": t2 }),
        );
        Ok(())
    })
}

/// `max_{E ⊆ A} ‖1_{ε,E}‖` (upper enclosures) with a maximizing `E`; `eps` is indexed by coordinate.
pub(crate) fn best_indicator(space: &Space, eps: &[f64], a: &IndexSet) -> Result<(f64, IndexSet)> {
    let mut best = (0.0f64, IndexSet::new());
    for e in subsets(a.as_slice()).filter(|e| !e.is_empty()) {
        let s: Vec<f64> = e.iter().map(|n| eps[n]).collect();
        let v = space.norm_coeffs(&indicator_coeffs(space.dim, &s, &e)?)?.hi;
        if v > best.0 {
            best = (v, e);
        }
    }
    Ok(best)
}

/// `max_{E ⊆ A} ‖S_E f‖` as (largest lower enclosure, largest upper enclosure).
pub(crate) fn best_projection(space: &Space, f: &[f64], a: &IndexSet) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    for e in subsets(a.as_slice()) {
        let b = space.norm_coeffs(&project_coeffs(f, &e))?;
        lo = lo.max(b.lo);
        hi = hi.max(b.hi);
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::NormEngine;

    fn l1(dim: usize) -> Space {
        Space::canonical(dim, NormEngine::lp(1.0)).unwrap()
    }

    #[test]
    fn pconvex_on_l1_and_quasi() {
        let r = check_pconvex(&l1(4), 6, 200, 1).unwrap();
        assert!(r.passed(), "{r:?}");
        let q = Space::new(4, NormEngine::QuasiLp { p: 0.5 }, crate::BasisRepr::Identity, None, 0.5).unwrap();
        assert!(check_pconvex(&q, 8, 200, 2).unwrap().passed());
        assert!(check_pconvex(&q, 13, 1, 2).is_err());
    }

    #[test]
    fn signed_coefficients_break_the_convexity_bound() {
        use crate::verify::report::Checker;
        let space = l1(1);
        let (f1, f2) = ([1.0], [-1.0]);
        let lhs = space.norm(&[f1[0] - f2[0]]).unwrap().lo;
        let sup = [f1[0], f2[0], f1[0] + f2[0]]
            .iter()
            .map(|v| space.norm(&[*v]).unwrap().hi)
            .fold(0.0, f64::max);
        let mut c = Checker::new(0, TOLERANCE);
        assert!(!c.assert_le("signed", lhs, a_p(1.0) * sup, || serde_json::Value::Null));
        assert_eq!(c.failures(), 1);
    }

    #[test]
    fn splits_pass_on_dense_basis() {
        let rows = vec![
            vec![1.0, 0.0, 0.0, 0.0],
            vec![1.0, 1.0, 0.0, 0.0],
            vec![0.0, 1.0, -1.0, 0.5],
            vec![0.0, 0.0, 0.0, 1.0],
        ];
        let space = Space::canonical(4, NormEngine::Polyhedral { rows }).unwrap();
        for r in [
            check_subadditive_split(&space, 300, 3).unwrap(),
            check_osc_reduction(&space, 300, 3).unwrap(),
            check_tgreedy_log(&space, &[0.25, 0.5, 1.0], 300, 3).unwrap(),
        ] {
            assert!(r.passed(), "{r:?}");
            assert_eq!(r.trials, 300);
        }
    }

    #[test]
    fn complex_examples() {
        let r = check_complex_monotone(2000, 5).unwrap();
        assert!(r.passed());
        let (z1, z2) = (Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0));
        assert!(((z1 - z2).norm() - 2f64.sqrt()).abs() < 1e-15);
        assert!(((z1 - z2 * 2.0).norm() - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn tgreedy_example() {
        let f = [2.0, 1.1, 1.0];
        let a: IndexSet = [0, 2].into_iter().collect();
        assert!(is_greedy(&f, &a, 0.5));
        let b = canonical_greedy(&f, 2);
        assert_eq!(b.as_slice(), &[0, 1]);
        let d = a.symmetric_difference(&b);
        assert_eq!(d.as_slice(), &[1, 2]);
        let (lo, hi) = extremes(&f, &d);
        assert!(hi / lo <= 2.0);
    }
}
