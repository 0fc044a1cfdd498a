//! Acceptance criteria, one pass/fail line each. Runs without the libtest harness so the
//! report is printed even when output capture is on.

use std::time::{Duration, Instant};

use greedylab::constants::{
    curve_bundle, estimate_constant, estimate_with, oracle_constant, ql_split, ConstantKind, CurveKind, SearchConfig,
};
use greedylab::constructions::{build, build_fqg_not_ucc, ConstructedSpace, ConstructionKind, ConstructionParams};
use greedylab::greedy::indicator_coeffs;
use greedylab::verify::sample::{random_exact_space, random_set, random_signs};
use greedylab::verify::{
    check_complex_monotone, check_dual_identity, check_flattening, check_main_equivalence, check_osc_reduction,
    check_pconvex, check_subadditive_split, check_tgreedy_log, CheckReport,
};
use greedylab::{NormEngine, Space};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn clean(r: &CheckReport) -> Result<(), String> {
    ensure(r.passed(), || {
        format!(
            "{} failed {} of {} trials: {:?}",
            r.suite, r.failures, r.trials, r.first_counterexample
        )
    })
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn toy(kind: ConstructionKind, m1: usize) -> Result<ConstructedSpace, String> {
    build(&ConstructionParams::toy(kind, 2.0, m1, 2.05, 1.0)).map_err(err)
}

fn cert(cs: &ConstructedSpace, name: &str) -> Result<(f64, f64), String> {
    let c = cs
        .certificate(name)
        .ok_or_else(|| format!("missing certificate {name}"))?;
    ensure(c.holds && c.recheck(), || {
        format!("certificate {name} fails: {} vs {}", c.lhs, c.rhs)
    })?;
    Ok((c.lhs, c.rhs))
}

fn dual_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for pair in 0..50 {
        let d = rng.gen_range(1..=8);
        let (x, y) = (
            random_exact_space(&mut rng, d).map_err(err)?,
            random_exact_space(&mut rng, d).map_err(err)?,
        );
        clean(&check_dual_identity(&x, &y).map_err(err)?).map_err(|e| format!("pair {pair}: {e}"))?;
    }
    Ok("50 parent pairs, both interleavings, error <= 1e-12".into())
}

fn weak_lp_fundamental() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut checked = 0;
    for p in [1.5, 2.0, 4.0] {
        let space = Space::canonical(20, NormEngine::WeakLp { p }).map_err(err)?;
        for m in 1..=20usize {
            let want = (m as f64).powf(1.0 / p);
            for _ in 0..40 {
                let a = random_set(&mut rng, 20, m);
                let eps = random_signs(&mut rng, a.len());
                let got = space
                    .norm_coeffs(&indicator_coeffs(20, &eps, &a).map_err(err)?)
                    .map_err(err)?
                    .lo;
                let want = (a.len() as f64).powf(1.0 / p);
                ensure((got - want).abs() <= 1e-12, || {
                    format!("p = {p}, |A| = {}: {got} vs {want}", a.len())
                })?;
                checked += 1;
            }
            let head: Vec<f64> = (0..20).map(|n| if n < m { 1.0 } else { 0.0 }).collect();
            let got = space.norm_coeffs(&head).map_err(err)?.lo;
            ensure((got - want).abs() <= 1e-12, || {
                format!("p = {p}, m = {m}: {got} vs {want}")
            })?;
        }
    }
    Ok(format!("{checked} random signed indicators plus initial segments"))
}

fn pconvex() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut trials = 0;
    let mut quasi = 0;
    for k in 0..40 {
        let d = rng.gen_range(2..=6);
        let space = if k % 2 == 0 {
            greedylab::BasisSpace::new(
                d,
                NormEngine::QuasiLp { p: 0.5 },
                greedylab::BasisRepr::Identity,
                None,
                0.5,
            )
            .map_err(err)?
        } else {
            random_exact_space(&mut rng, d).map_err(err)?
        };
        if space.p_exponent < 1.0 {
            quasi += 1;
        }
        let family = rng.gen_range(1..=12);
        let r = check_pconvex(&space, family, 25, 1000 + k).map_err(err)?;
        clean(&r)?;
        trials += r.trials;
    }
    ensure(trials == 1000, || format!("ran {trials} trials"))?;
    Ok(format!(
        "{trials} families of size <= 12 in 40 spaces ({quasi} with p = 1/2), coefficients in [0, 1]"
    ))
}

fn complex_monotone() -> Outcome {
    let r = check_complex_monotone(100_000, 104).map_err(err)?;
    clean(&r)?;
    ensure(r.tolerance <= 1e-12, || format!("tolerance {}", r.tolerance))?;
    Ok(format!("{} samples", r.trials))
}

fn fqg_separation() -> Outcome {
    let mut parts = Vec::new();
    for m in [4usize, 100, 10_000] {
        let cs = build_fqg_not_ucc(m, 1.0, 2.0).map_err(err)?;
        let kuc = cs.info.lower_bounds["Kuc"];
        let want = (m as f64).sqrt();
        ensure((kuc - want).abs() <= 1e-9 * want, || {
            format!("m = {m}: Kuc {kuc} vs {want}")
        })?;
        clean(&check_flattening(&cs, 1000, 105 + m as u64).map_err(err)?).map_err(|e| format!("m = {m}: {e}"))?;
        parts.push(format!("m = {m}: {kuc}"));
    }
    Ok(format!(
        "Kuc lower bounds {}; flattening 1000 trials each",
        parts.join(", ")
    ))
}

fn budget_toy() -> Outcome {
    let cs = toy(ConstructionKind::QglcNotLucc, 1)?;
    let h2 = 1.0 + 2f64.powf(-0.5);
    let h3 = h2 + 3f64.powf(-0.5);
    let (lo, w) = cert(&cs, "budget-length-lower[0]")?;
    let (w2, hi) = cert(&cs, "budget-length-upper[0]")?;
    ensure((lo - h2).abs() <= 1e-9 && (hi - h3).abs() <= 1e-9, || {
        format!("budget masses {lo}, {hi}")
    })?;
    ensure((w - 2.05).abs() <= 1e-9 && (w2 - 2.05).abs() <= 1e-9, || {
        format!("budget level {w}")
    })?;
    let f1 = cs.lower_bounds["f1_explicit"];
    ensure((f1 - 0.87443).abs() <= 1e-4, || format!("explicit lower bound {f1}"))?;
    ensure((f1 - h2 * (1.0 - 1.0 / 2.05)).abs() <= 1e-9, || {
        format!("explicit lower bound {f1} vs closed form")
    })?;
    let (relaxed, cap) = cert(&cs, "f0-delta-relaxation")?;
    ensure(
        (relaxed - (2.05 + h2)).abs() <= 1e-4 && (relaxed - 3.75711).abs() <= 1e-4,
        || format!("relaxation {relaxed}"),
    )?;
    ensure((cap - 4.1).abs() <= 1e-12, || format!("relaxation cap {cap}"))?;
    Ok(format!(
        "{lo:.5} <= {w} <= {hi:.5}; f1 >= {f1:.5}; f0 relaxation {relaxed:.5} <= {cap}"
    ))
}

fn interval_toys() -> Outcome {
    let mut prev = 0.0;
    let mut values = Vec::new();
    for m1 in 1..=6 {
        let cs = toy(ConstructionKind::LuccNotQglc, m1)?;
        for n in 0..m1 {
            let (one, s) = cert(&cs, &format!("window-lower[{n}]"))?;
            let (s2, half) = cert(&cs, &format!("window-upper[{n}]"))?;
            ensure(one == 1.0 && half == 1.5 && s == s2 && 1.0 < s && s < 1.5, || {
                format!("m1 = {m1}, block {n}: window mass {s}")
            })?;
        }
        let (sum, bound) = cert(&cs, "witness-upper")?;
        ensure(bound == 3.0 * cs.feeder.m0, || format!("witness bound {bound}"))?;
        ensure(sum <= bound, || format!("witness {sum} > {bound}"))?;
        let kql = cs.lower_bounds["Kql"];
        let want = (m1 as f64).sqrt() / (6.0 * cs.feeder.m0);
        ensure((kql - want).abs() <= 1e-6, || format!("m1 = {m1}: Kql {kql} vs {want}"))?;
        ensure(kql > prev, || format!("Kql not increasing at m1 = {m1}"))?;
        prev = kql;
        values.push(format!("{kql:.5}"));
    }
    Ok(format!("Kql lower bounds [{}]", values.join(", ")))
}

fn anchored_toy() -> Outcome {
    let cs = toy(ConstructionKind::TqgSeparation, 1)?;
    ensure(cs.all_hold(), || "a certificate fails".into())?;
    for c in &cs.certificates {
        ensure(c.recheck(), || format!("certificate {} does not re-verify", c.name))?;
    }
    cert(&cs, "interval-mass-lower[0]")?;
    cert(&cs, "interval-mass-upper[0]")?;
    cert(&cs, "budget-length-lower[0]")?;
    cert(&cs, "budget-length-upper[0]")?;
    let (target, lower) = cert(&cs, "indicator-budget-lower")?;
    ensure(
        (target - 2.05 / 2.0).abs() <= 1e-6 && (cs.lower_bounds["indicator_B"] - 1.025).abs() <= 1e-6,
        || format!("target {target}"),
    )?;
    let space = cs.space();
    let seed = 108;
    let mut reports = check_main_equivalence(space, 1000, &[0.25, 0.5, 0.75, 1.0], seed).map_err(err)?;
    reports.truncate(3);
    reports.push(check_subadditive_split(space, 1000, seed).map_err(err)?);
    reports.push(check_osc_reduction(space, 1000, seed).map_err(err)?);
    reports.push(check_tgreedy_log(space, &[0.25, 0.5, 0.75, 1.0], 1000, seed).map_err(err)?);
    for r in &reports {
        clean(r)?;
        ensure(r.trials == 1000, || format!("{} ran {} trials", r.suite, r.trials))?;
    }
    Ok(format!(
        "dim {}, {} certificates, indicator lower {lower:.6} >= {target}, {} suites x 1000 trials",
        space.dim,
        cs.certificates.len(),
        reports.len()
    ))
}

fn oracle_equivalence() -> Outcome {
    let grid = vec![1.0, 0.6, 0.3];
    let kinds = [
        ConstantKind::Ktq,
        ConstantKind::Kql,
        ConstantKind::Kuc,
        ConstantKind::Klu,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let mut worst: f64 = 0.0;
    for s in 0..50u64 {
        let d = rng.gen_range(2..=4);
        let space = random_exact_space(&mut rng, d).map_err(err)?;
        for kind in kinds {
            let oracle = oracle_constant(&space, kind, &grid, 6).map_err(err)?;
            let est =
                estimate_with(&space, kind, &SearchConfig::new(10_000, s).with_grid(grid.clone())).map_err(err)?;
            ensure(est.lower <= oracle * (1.0 + 1e-12), || {
                format!("space {s} {kind}: estimate {} above oracle {oracle}", est.lower)
            })?;
            ensure(est.lower >= oracle * (1.0 - 1e-6), || {
                format!("space {s} {kind}: estimate {} below oracle {oracle}", est.lower)
            })?;
            worst = worst.max((oracle - est.lower) / oracle);
        }
    }
    Ok(format!("50 spaces x 4 kinds, worst relative gap {worst:.2e}"))
}

fn monotone_orderings() -> Outcome {
    let mut spaces: Vec<(String, Space)> = vec![
        (
            "anchored toy".into(),
            toy(ConstructionKind::TqgSeparation, 1)?.space().clone(),
        ),
        (
            "budget toy".into(),
            toy(ConstructionKind::QglcNotLucc, 1)?.space().clone(),
        ),
    ];
    for m1 in 1..=3 {
        spaces.push((
            format!("interval toy m1 = {m1}"),
            toy(ConstructionKind::LuccNotQglc, m1)?.space().clone(),
        ));
    }
    for m in [4, 100] {
        spaces.push((
            format!("interleaved m = {m}"),
            build_fqg_not_ucc(m, 1.0, 2.0).map_err(err)?.space,
        ));
    }
    let grid = [0.125, 0.25, 0.5, 0.75, 1.0];
    let mut ql_witnesses = 0;
    for (name, space) in &spaces {
        let (budget, seed) = (2000, 110);
        let bundle = curve_bundle(space, &grid, budget, seed).map_err(err)?;
        for which in [CurveKind::PhiBig, CurveKind::PhiSmall, CurveKind::Rho] {
            let c = bundle.curve(which);
            ensure(c.windows(2).all(|w| w[1].lower <= w[0].lower), || {
                format!("{name}: {which:?} increases")
            })?;
        }
        for i in 0..grid.len() {
            ensure(bundle.rho[i].lower <= bundle.phi_small[i].lower, || {
                format!("{name}: rho > phi at t = {}", grid[i])
            })?;
        }
        let est = |k| estimate_constant(space, k, budget, seed).map_err(err);
        let (kuc, klu, klp) = (
            est(ConstantKind::Kuc)?,
            est(ConstantKind::Klu)?,
            est(ConstantKind::Klp)?,
        );
        ensure(kuc.lower <= klp.lower && klu.lower <= klp.lower, || {
            format!("{name}: Kuc {} Klu {} Klp {}", kuc.lower, klu.lower, klp.lower)
        })?;
        let kql = est(ConstantKind::Kql)?;
        if let Some(w) = &kql.witness {
            let (_, _, ok) = ql_split(w).ok_or_else(|| format!("{name}: Kql witness has the wrong shape"))?;
            ensure(ok, || format!("{name}: Kql witness splits into non-greedy sets"))?;
            ql_witnesses += 1;
        }
    }
    Ok(format!(
        "{} spaces, {ql_witnesses} Kql witnesses split into greedy sets",
        spaces.len()
    ))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 10] = [
        (
            "dual identity of interleaved bases",
            Duration::from_secs(1),
            dual_identity,
        ),
        (
            "weak-lp fundamental function",
            Duration::from_secs(1),
            weak_lp_fundamental,
        ),
        ("p-convexity of families", Duration::from_secs(30), pconvex),
        ("complex monotonicity", Duration::from_secs(5), complex_monotone),
        (
            "flattening quasi-greedy but not UCC at scale",
            Duration::from_secs(60),
            fqg_separation,
        ),
        ("budget-only toy instance", Duration::from_secs(1), budget_toy),
        ("interval-only toy instances", Duration::from_secs(60), interval_toys),
        (
            "anchored toy instance and proof replays",
            Duration::from_secs(300),
            anchored_toy,
        ),
        (
            "search against the brute-force oracle",
            Duration::from_secs(600),
            oracle_equivalence,
        ),
        (
            "curve monotonicity and witness orderings",
            Duration::from_secs(60),
            monotone_orderings,
        ),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = run();
        let elapsed = t0.elapsed();
        let outcome = outcome.and_then(|m| {
            if elapsed <= *limit {
                Ok(m)
            } else {
                Err(format!("{m}; took {elapsed:.2?}, limit {limit:?}"))
            }
        });
        match outcome {
            Ok(m) => println!("criterion {:>2} PASS  {name} ({elapsed:.2?}): {m}", i + 1),
            Err(m) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({elapsed:.2?}): {m}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
