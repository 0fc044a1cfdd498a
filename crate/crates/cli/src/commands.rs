use std::collections::BTreeMap;
use std::path::Path;

use anyhow::anyhow;
use greedylab::constants::{
    curve_bundle, estimate_constant, fundamental_function, known_upper, parse_t_grid, ConstantEstimate, ConstantKind,
    CurveKind,
};
use greedylab::constructions::{
    build as build_construction, build_fqg_not_ucc, plan_params, ConstructionKind, ConstructionParams,
};
use greedylab::verify::{
    check_complex_monotone, check_constant_relations, check_dual_identity, check_flattening, check_main_equivalence,
    check_osc_reduction, check_pconvex, check_subadditive_split, check_tgreedy_log, CheckReport, CSV_HEADER,
};
use greedylab::{BasisRepr, BasisSpace, Engine, Error, NormEngine, Space};
use serde::Serialize;
use serde_json::json;

use crate::io::{emit, read_space, sci, to_json, Loaded, SpaceFile};
use crate::{BuildArgs, CurveArgs, EstimateArgs, Failure, Format, ModeArg, ReportArgs, VerifyArgs};

/// Suites accepted by `verify --suite`, in the order `all` runs them.
pub const SUITES: [&str; 9] = [
    "thm-main",
    "pconvex",
    "subadditive-split",
    "osc-reduction",
    "tgreedy-split",
    "complex-monotone",
    "constant-relations",
    "dual-identity",
    "flattening",
];

/// Family size for the p-convexity suite.
const PCONVEX_FAMILY: usize = 6;

pub fn build(a: &BuildArgs) -> Result<(), Failure> {
    let file = match a.construction.as_str() {
        "fqg-not-ucc" => {
            let m = a.m.ok_or_else(|| anyhow!("fqg-not-ucc needs --m"))?;
            SpaceFile::combined(&build_fqg_not_ucc(m, a.p_x, a.p_y)?)
        }
        "lp" | "weak-lp" | "quasi-lp" => SpaceFile::plain(&reference_space(&a.construction, a.dim, a.p)?),
        name => {
            let kind = ConstructionKind::parse(name)?;
            let params = match a.mode {
                ModeArg::Toy => ConstructionParams::toy(kind, a.p, a.m1, a.m2_margin, a.c_max),
                ModeArg::Fidelity => {
                    let level = a.level.ok_or_else(|| anyhow!("fidelity mode needs --M"))?;
                    let mut params = ConstructionParams::fidelity(kind, a.p, level, a.c_max);
                    params.m2_margin = a.m2_margin;
                    params
                }
            };
            match build_construction(&params) {
                Ok(cs) => SpaceFile::constructed(&cs),
                Err(Error::NotRealizable(_)) => {
                    // print the plan in full precision rather than the error's rendering
                    let report = plan_params(&params)?;
                    return Err(Failure::NotRealizable(to_json(&report)?.trim_end().to_string()));
                }
                Err(e) => return Err(e.into()),
            }
        }
    };
    emit(a.out.as_deref(), &to_json(&file)?)?;
    Ok(())
}

fn reference_space(name: &str, dim: usize, p: f64) -> greedylab::Result<Space> {
    match name {
        "lp" => Space::canonical(dim, NormEngine::lp(p)),
        "weak-lp" => Space::canonical(dim, NormEngine::WeakLp { p }),
        _ => {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::Input(format!("quasi-lp needs 0 < p <= 1, got {p}")));
            }
            BasisSpace::new(dim, Engine::QuasiLp { p }, BasisRepr::Identity, None, p)
        }
    }
}

fn load(path: &Path) -> Result<Loaded, Failure> {
    Ok(read_space(path)?.load()?)
}

fn estimate_csv(rows: &[(&str, f64, &ConstantEstimate)]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["curve", "t", "kind", "lower", "upper", "budget_used", "seed", "source"])?;
    for (curve, t, e) in rows {
        let t = if t.is_nan() { String::new() } else { sci(*t) };
        let upper = e.upper.map(sci).unwrap_or_default();
        w.write_record([
            curve.to_string(),
            t,
            e.kind.to_string(),
            sci(e.lower),
            upper,
            e.budget_used.to_string(),
            e.seed.to_string(),
            e.source.clone(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn estimate(a: &EstimateArgs) -> Result<(), Failure> {
    let kind: ConstantKind = a.constant.parse()?;
    let loaded = load(&a.space)?;
    let est = estimate_constant(&loaded.space, kind, a.budget, a.seed)?;
    let text = match a.format {
        Format::Json => to_json(&est)?,
        Format::Csv => estimate_csv(&[("", f64::NAN, &est)])?,
    };
    emit(a.out.as_deref(), &text)?;
    Ok(())
}

pub fn curve(a: &CurveArgs) -> Result<(), Failure> {
    let grid = parse_t_grid(&a.t_grid)?;
    let which: Vec<CurveKind> = match a.curve.as_str() {
        "all" => vec![CurveKind::PhiBig, CurveKind::PhiSmall, CurveKind::Rho],
        s => vec![CurveKind::parse(s)?],
    };
    let loaded = load(&a.space)?;
    let bundle = curve_bundle(&loaded.space, &grid, a.budget, a.seed)?;
    let label = |k: CurveKind| match k {
        CurveKind::PhiBig => "Phi",
        CurveKind::PhiSmall => "phi",
        CurveKind::Rho => "rho",
    };
    let text = match a.format {
        Format::Json => {
            let curves: BTreeMap<&str, &[ConstantEstimate]> =
                which.iter().map(|k| (label(*k), bundle.curve(*k))).collect();
            to_json(&json!({ "t_grid": grid, "curves": curves }))?
        }
        Format::Csv => {
            let rows: Vec<_> = which
                .iter()
                .flat_map(|k| grid.iter().zip(bundle.curve(*k)).map(move |(t, e)| (label(*k), *t, e)))
                .collect();
            estimate_csv(&rows)?
        }
    };
    emit(a.out.as_deref(), &text)?;
    Ok(())
}

fn default_space() -> greedylab::Result<Space> {
    Space::canonical(8, NormEngine::lp(2.0))
}

fn run_suite(
    name: &str,
    loaded: &Loaded,
    a: &VerifyArgs,
    grid: &[f64],
    skip_inapplicable: bool,
) -> Result<Vec<CheckReport>, Failure> {
    let space = &loaded.space;
    let (n, seed) = (a.trials, a.seed);
    let one = |r: greedylab::Result<CheckReport>| -> Result<Vec<CheckReport>, Failure> { Ok(vec![r?]) };
    match name {
        "thm-main" => Ok(check_main_equivalence(space, n, grid, seed)?),
        "pconvex" => {
            if skip_inapplicable && !space.engine.is_exact() {
                eprintln!("note: pconvex skipped (needs an exact norm engine)");
                return Ok(Vec::new());
            }
            one(check_pconvex(space, PCONVEX_FAMILY.min(space.dim), n, seed))
        }
        "subadditive-split" => one(check_subadditive_split(space, n, seed)),
        "osc-reduction" => one(check_osc_reduction(space, n, seed)),
        "tgreedy-split" => one(check_tgreedy_log(space, grid, n, seed)),
        "complex-monotone" => one(check_complex_monotone(n.saturating_mul(100), seed)),
        "constant-relations" => one(check_constant_relations(space, a.budget, seed)),
        "dual-identity" => match &loaded.combined {
            Some(cs) => one(check_dual_identity(&cs.left, &cs.right)),
            None => one(check_dual_identity(space, space)),
        },
        "flattening" => match &loaded.combined {
            Some(cs) => one(check_flattening(cs, n, seed)),
            None if skip_inapplicable => {
                eprintln!("note: flattening skipped (needs an interleaved space)");
                Ok(Vec::new())
            }
            None => Err(Failure::Usage(anyhow!(
                "flattening needs an interleaved space (build fqg-not-ucc)"
            ))),
        },
        _ => unreachable!("suite names are checked before dispatch"),
    }
}

fn reports_csv(reports: &[CheckReport]) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in reports {
        w.write_record(r.csv_row())?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn verify(a: &VerifyArgs) -> Result<(), Failure> {
    if a.suite != "all" && !SUITES.contains(&a.suite.as_str()) {
        return Err(Failure::Usage(anyhow!(
            "unknown suite '{}' (expected one of {} or all)",
            a.suite,
            SUITES.join(", ")
        )));
    }
    if a.trials == 0 {
        return Err(Failure::Usage(anyhow!("--trials must be positive")));
    }
    let grid = parse_t_grid(&a.t_grid)?;
    let loaded = match &a.space {
        Some(p) => load(p)?,
        None => Loaded {
            space: default_space()?,
            construction: None,
            combined: None,
        },
    };
    let mut reports = Vec::new();
    if a.suite == "all" {
        for name in SUITES {
            reports.extend(run_suite(name, &loaded, a, &grid, true)?);
        }
    } else {
        reports.extend(run_suite(&a.suite, &loaded, a, &grid, false)?);
    }
    let format = a.format.unwrap_or(match a.out.as_deref().and_then(Path::extension) {
        Some(ext) if ext == "json" => Format::Json,
        _ => Format::Csv,
    });
    let text = match format {
        Format::Json => to_json(&reports)?,
        Format::Csv => reports_csv(&reports)?,
    };
    emit(a.out.as_deref(), &text)?;
    for r in reports.iter().filter(|r| !r.passed()) {
        eprintln!("suite {} failed {} of {} trials", r.suite, r.failures, r.trials);
    }
    match reports.iter().filter(|r| !r.passed()).count() {
        0 => Ok(()),
        k => Err(Failure::SuiteFailed(k)),
    }
}

#[derive(Serialize)]
struct Report<'a> {
    dim: usize,
    label: &'a str,
    engine_exact: bool,
    p_exponent: f64,
    certificates_hold: bool,
    recorded_lower_bounds: BTreeMap<String, f64>,
    known_uppers: BTreeMap<String, f64>,
    estimates: Vec<ConstantEstimate>,
    curves: greedylab::constants::CurveBundle,
    fundamental: greedylab::constants::FundamentalReport,
}

/// Constants reported for every space.
const REPORT_KINDS: [ConstantKind; 7] = [
    ConstantKind::Kb,
    ConstantKind::Kq,
    ConstantKind::Ktq,
    ConstantKind::Kql,
    ConstantKind::Kuc,
    ConstantKind::Klu,
    ConstantKind::Klp,
];

pub fn report(a: &ReportArgs) -> Result<(), Failure> {
    let grid = parse_t_grid(&a.t_grid)?;
    let file = read_space(&a.space)?;
    let loaded = file.load()?;
    let space = &loaded.space;
    let estimates = REPORT_KINDS
        .iter()
        .map(|k| estimate_constant(space, *k, a.budget, a.seed))
        .collect::<greedylab::Result<Vec<_>>>()?;
    let mut recorded = BTreeMap::new();
    if let Some(c) = &loaded.construction {
        recorded.extend(c.lower_bounds.clone());
    }
    if let Some(c) = &loaded.combined {
        recorded.extend(c.info.lower_bounds.clone());
    }
    let mut known = space.meta.known_uppers.clone();
    for k in REPORT_KINDS {
        if let Some(u) = known_upper(space, k) {
            known.entry(k.to_string()).or_insert(u);
        }
    }
    let out = Report {
        dim: space.dim,
        label: &space.meta.label,
        engine_exact: space.engine.is_exact(),
        p_exponent: space.p_exponent,
        certificates_hold: file.certificates.iter().all(|c| c.holds),
        recorded_lower_bounds: recorded,
        known_uppers: known,
        estimates,
        curves: curve_bundle(space, &grid, a.budget, a.seed)?,
        fundamental: fundamental_function(space, space.dim.min(8), a.budget, a.seed)?,
    };
    emit(a.out.as_deref(), &to_json(&out)?)?;
    Ok(())
}
