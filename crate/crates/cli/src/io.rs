//! Space files and float formatting.

use std::io::Write;
use std::path::Path;

use anyhow::Context;
use greedylab::constructions::{
    build_fqg_not_ucc, combine_ltimes, combine_rtimes, reverify, reverify_combined, Certificate, CombinedInfo,
    CombinedSpace, ConstructedSpace,
};
use greedylab::{BasisRepr, BasisSpace, Combinator, Engine, Error, Space, SpaceMeta};
use serde::{Deserialize, Serialize};

/// JSON formatter that prints every float with 17 significant digits.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        write!(writer, "{:.16e}", value as f64)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf)?)
}

pub fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes to `path`, or to standard output when absent.
pub fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CombinedFile {
    pub info: CombinedInfo,
    pub left: Box<SpaceFile>,
    pub right: Box<SpaceFile>,
}

/// On-disk space: engine, basis (omitted for the canonical basis), ordering and metadata,
/// plus the construction record when the space came from a builder.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceFile {
    pub dim: usize,
    pub engine: Engine,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<BasisRepr<f64>>,
    pub order: Vec<usize>,
    pub p_exponent: f64,
    #[serde(default)]
    pub meta: SpaceMeta,
    #[serde(default)]
    pub certificates: Vec<Certificate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<ConstructedSpace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combined: Option<CombinedFile>,
}

/// A loaded space together with whatever it was built from.
pub struct Loaded {
    pub space: Space,
    pub construction: Option<ConstructedSpace>,
    pub combined: Option<CombinedSpace>,
}

impl SpaceFile {
    pub fn plain(space: &Space) -> Self {
        Self {
            dim: space.dim,
            engine: space.engine.clone(),
            basis: (!matches!(space.basis, BasisRepr::Identity)).then(|| space.basis.clone()),
            order: space.order.clone(),
            p_exponent: space.p_exponent,
            meta: space.meta.clone(),
            certificates: Vec::new(),
            construction: None,
            combined: None,
        }
    }

    pub fn constructed(cs: &ConstructedSpace) -> Self {
        let mut f = Self::plain(cs.space());
        f.certificates = cs.certificates.clone();
        f.construction = Some(cs.clone());
        f
    }

    pub fn combined(cs: &CombinedSpace) -> Self {
        let mut f = Self::plain(&cs.space);
        f.certificates = cs.info.certificates.clone();
        f.combined = Some(CombinedFile {
            info: cs.info.clone(),
            left: Box::new(Self::plain(&cs.left)),
            right: Box::new(Self::plain(&cs.right)),
        });
        f
    }

    fn raw_space(&self) -> greedylab::Result<Space> {
        let basis = self.basis.clone().unwrap_or(BasisRepr::Identity);
        Ok(BasisSpace::new(
            self.dim,
            self.engine.clone(),
            basis,
            Some(self.order.clone()),
            self.p_exponent,
        )?
        .with_meta(self.meta.clone()))
    }

    /// Rebuilds the space and re-verifies every recorded certificate.
    pub fn load(&self) -> greedylab::Result<Loaded> {
        let integrity = |m: &str| Err(Error::Integrity(m.into()));
        let stored = self.raw_space()?;
        if let Some(c) = &self.construction {
            let fresh = reverify(c)?;
            let space = fresh.space();
            if space.engine != stored.engine || space.basis != stored.basis || space.order != stored.order {
                return integrity("space data differs from a rebuild of the recorded construction");
            }
            if !same_certificates(&self.certificates, &fresh.certificates) {
                return integrity("top-level certificates differ from a rebuild");
            }
            return Ok(Loaded {
                space: space.clone(),
                construction: Some(fresh),
                combined: None,
            });
        }
        if let Some(cf) = &self.combined {
            let (left, right) = (cf.left.raw_space()?, cf.right.raw_space()?);
            let mut fresh = match (cf.info.fqg, cf.info.combinator) {
                (Some(p), _) => build_fqg_not_ucc(p.m, p.p_x, p.p_y)?,
                (None, Combinator::Ltimes) => combine_ltimes(&left, &right)?,
                (None, Combinator::Rtimes) => combine_rtimes(&left, &right)?,
            };
            reverify_combined(&cf.info, &stored)?;
            if fresh.space.engine != stored.engine
                || fresh.space.basis != stored.basis
                || fresh.space.order != stored.order
            {
                return integrity("space data differs from a rebuild of the recorded combination");
            }
            if !same_certificates(&self.certificates, &fresh.info.certificates)
                || !same_certificates(&cf.info.certificates, &fresh.info.certificates)
            {
                return integrity("certificates differ from a rebuild");
            }
            if cf.info.lower_bounds != fresh.info.lower_bounds && cf.info.fqg.is_none() {
                return integrity("recorded bounds differ from a rebuild");
            }
            fresh.space = fresh.space.with_meta(stored.meta.clone());
            return Ok(Loaded {
                space: fresh.space.clone(),
                construction: None,
                combined: Some(fresh),
            });
        }
        if !self.certificates.iter().all(|c| c.holds && c.recheck()) {
            return integrity("a recorded certificate fails");
        }
        Ok(Loaded {
            space: stored,
            construction: None,
            combined: None,
        })
    }
}

fn same_certificates(a: &[Certificate], b: &[Certificate]) -> bool {
    let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1.0);
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| x.name == y.name && x.holds == y.holds && close(x.lhs, y.lhs) && close(x.rhs, y.rhs))
}

pub fn read_space(path: &Path) -> anyhow::Result<SpaceFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use greedylab::constructions::{build, ConstructionKind, ConstructionParams};
    use greedylab::NormEngine;

    #[test]
    fn floats_keep_all_digits() {
        let s = to_json(&vec![0.1f64, 1.0 / 3.0, 2.0]).unwrap();
        assert_eq!(
            s.trim(),
            "[1.0000000000000001e-1,3.3333333333333331e-1,2.0000000000000000e0]"
        );
        let back: Vec<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![0.1, 1.0 / 3.0, 2.0]);
    }

    #[test]
    fn round_trips() {
        let cs = build(&ConstructionParams::toy(
            ConstructionKind::QglcNotLucc,
            2.0,
            1,
            2.05,
            1.0,
        ))
        .unwrap();
        let text = to_json(&SpaceFile::constructed(&cs)).unwrap();
        let back: SpaceFile = serde_json::from_str(&text).unwrap();
        let loaded = back.load().unwrap();
        assert_eq!(loaded.space.engine, cs.space().engine);
        let mut tampered = back.clone();
        tampered.construction.as_mut().unwrap().certificates[1].rhs *= 0.5;
        assert!(matches!(tampered.load(), Err(Error::Integrity(_))));
        let mut top = back;
        top.certificates[0].lhs += 1.0;
        assert!(matches!(top.load(), Err(Error::Integrity(_))));

        let fqg = build_fqg_not_ucc(4, 1.0, 2.0).unwrap();
        let text = to_json(&SpaceFile::combined(&fqg)).unwrap();
        let back: SpaceFile = serde_json::from_str(&text).unwrap();
        let loaded = back.load().unwrap();
        assert_eq!(loaded.combined.unwrap().info.lower_bounds["Kuc"], 2.0);

        let plain = Space::canonical(3, NormEngine::WeakLp { p: 2.0 }).unwrap();
        let back: SpaceFile = serde_json::from_str(&to_json(&SpaceFile::plain(&plain)).unwrap()).unwrap();
        assert_eq!(back.load().unwrap().space, plain);
    }
}
