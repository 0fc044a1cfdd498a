use greedylab::constants::{curve_bundle, evaluate_witness, monotone_hull, CurveKind};
use greedylab::greedy::{
    canonical_greedy, greedy_sets, is_greedy, level_set, oscillation, project_coeffs, restricted_truncation_coeffs,
    truncation_coeffs,
};
use greedylab::verify::sample::random_exact_space;
use greedylab::verify::triangle_exponent;
use greedylab::{BasisRepr, BasisSpace, IndexSet, NormEngine, Space, Space32};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn space_from(seed: u64, dim: usize) -> Space {
    random_exact_space(&mut ChaCha8Rng::seed_from_u64(seed), dim).unwrap()
}

fn coeffs(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![Just(0.0), -4.0..4.0f64, Just(1.0), Just(-1.0)], dim)
}

fn set_of(dim: usize) -> impl Strategy<Value = IndexSet> {
    prop::collection::vec(any::<bool>(), dim)
        .prop_map(|m| m.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn homogeneity(seed in any::<u64>(), (x, lam) in (coeffs(5), -8.0..8.0f64)) {
        let space = space_from(seed, 5);
        let a = space.norm_coeffs(&x).unwrap().lo;
        let scaled: Vec<f64> = x.iter().map(|v| v * lam).collect();
        let b = space.norm_coeffs(&scaled).unwrap().lo;
        prop_assert!((b - lam.abs() * a).abs() <= 1e-9 * (1.0 + b.abs()));
    }

    #[test]
    fn p_triangle(seed in any::<u64>(), x in coeffs(5), y in coeffs(5)) {
        let space = space_from(seed, 5);
        let p = triangle_exponent(&space);
        let n = |v: &[f64]| space.norm_coeffs(v).unwrap().lo;
        let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        prop_assert!(n(&s).powf(p) <= n(&x).powf(p) + n(&y).powf(p) + 1e-9);
    }

    #[test]
    fn weak_lp_is_unconditional(x in coeffs(7), perm in Just((0..7).collect::<Vec<usize>>()).prop_shuffle(), flips in prop::collection::vec(any::<bool>(), 7), p in 1.1..5.0f64) {
        let space = Space::canonical(7, NormEngine::WeakLp { p }).unwrap();
        let moved: Vec<f64> = perm.iter().zip(&flips).map(|(&i, &f)| if f { -x[i] } else { x[i] }).collect();
        prop_assert_eq!(space.norm_coeffs(&x).unwrap().lo, space.norm_coeffs(&moved).unwrap().lo);
    }

    #[test]
    fn dense_bases_are_biorthogonal(seed in any::<u64>()) {
        let space = space_from(seed, 6);
        prop_assert!(space.biorthogonality_error() <= 1e-10);
    }

    #[test]
    fn projections_compose(x in coeffs(8), a in set_of(8), b in set_of(8)) {
        let sa = project_coeffs(&x, &a);
        prop_assert_eq!(project_coeffs(&sa, &a), sa.clone());
        prop_assert_eq!(project_coeffs(&sa, &b), project_coeffs(&x, &a.intersection(&b)));
    }

    #[test]
    fn flat_truncation_is_projection(x in coeffs(8), a in set_of(8), level in 0.1..3.0f64) {
        prop_assume!(!a.is_empty());
        let flat: Vec<f64> = x.iter().enumerate().map(|(n, v)| if a.contains(n) { if *v < 0.0 { -level } else { level } } else { *v }).collect();
        prop_assert_eq!(truncation_coeffs(&flat, &a).unwrap(), flat.clone());
        prop_assert_eq!(restricted_truncation_coeffs(&flat, &a).unwrap(), project_coeffs(&flat, &a));
    }

    #[test]
    fn greedy_sets_dominate_their_complement(x in coeffs(7)) {
        for a in greedy_sets(&x, 1.0, 7).unwrap() {
            for n in a.iter() {
                for k in (0..7).filter(|k| !a.contains(*k)) {
                    prop_assert!(x[n].abs() >= x[k].abs(), "{a:?} {x:?}");
                }
            }
        }
        for m in 0..=7 {
            prop_assert!(is_greedy(&x, &canonical_greedy(&x, m), 1.0));
        }
    }

    #[test]
    fn oscillation_on_level_sets(x in coeffs(8), lo in 0.05..2.0f64, ratio in 1.0..6.0f64) {
        let window = level_set(&x, lo, lo * ratio).unwrap();
        prop_assume!(!window.is_empty());
        prop_assert!(oscillation(&x, &window).unwrap() <= ratio * (1.0 + 1e-15));
    }

    #[test]
    fn single_precision_tracks_double(x in coeffs(5)) {
        let d = Space::canonical(5, NormEngine::lp(2.0)).unwrap();
        let s = Space32::canonical(5, NormEngine::lp(2.0f32)).unwrap();
        let x32: Vec<f32> = x.iter().map(|v| *v as f32).collect();
        let (a, b) = (d.norm_coeffs(&x).unwrap().lo, s.norm_coeffs(&x32).unwrap().lo as f64);
        prop_assert!((a - b).abs() <= 1e-5 * (1.0 + a));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn curve_witnesses_reproduce_their_values(seed in any::<u64>()) {
        let space = space_from(seed, 3);
        let grid = [0.3, 0.6, 1.0];
        let bundle = curve_bundle(&space, &grid, 400, seed).unwrap();
        for which in [CurveKind::PhiBig, CurveKind::PhiSmall, CurveKind::Rho] {
            for e in bundle.curve(which) {
                if let Some(w) = &e.witness {
                    let v = evaluate_witness(&space, e.kind, w).unwrap();
                    prop_assert!((v - e.lower).abs() <= 1e-9 * v.max(1.0), "{:?}: {v} vs {}", e.kind, e.lower);
                }
            }
        }
    }

    #[test]
    fn monotone_hull_never_lowers(seed in any::<u64>()) {
        let space = space_from(seed, 3);
        let grid = [0.25, 0.5, 1.0];
        let raw = curve_bundle(&space, &grid, 200, seed).unwrap().phi_big;
        // scramble the raw estimates so the hull has work to do
        let mut est = raw.clone();
        est.rotate_left(1);
        for (e, t) in est.iter_mut().zip(grid) {
            e.kind = CurveKind::PhiBig.at(t);
        }
        let before: Vec<f64> = est.iter().map(|e| e.lower).collect();
        monotone_hull(&space, &grid, &mut est);
        for (b, e) in before.iter().zip(&est) {
            prop_assert!(e.lower >= *b);
        }
    }
}

#[test]
fn generic_space_accepts_dense_f32_basis() {
    let basis = BasisRepr::dense(vec![1.0f32, 0.5, 0.0, 1.0], 2).unwrap();
    let s = BasisSpace::new(2, NormEngine::lp(1.0f32), basis, None, 1.0).unwrap();
    assert!(s.biorthogonality_error() < 1e-6);
}
