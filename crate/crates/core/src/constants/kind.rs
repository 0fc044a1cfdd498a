use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};

/// The constants the estimators know how to bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ConstantKind {
    /// Quasi-greedy: `‖S_A f‖ ≤ C‖f‖` over greedy `A`.
    Kq,
    /// Truncation quasi-greedy: `min_A |a_n| ‖1_{ε(f),A}‖ ≤ C‖f‖`.
    Ktq,
    /// Quasi-greedy for largest coefficients: `‖1_{ε,A}‖ ≤ C‖1_{ε,A} + f‖`.
    Kql,
    /// Unconditional for constant coefficients: `‖1_{ε,B}‖ ≤ C‖1_{ε,A}‖`, `B ⊆ A`.
    Kuc,
    /// Lower unconditional for constant coefficients.
    Klu,
    /// Lattice partially unconditional.
    Klp,
    /// Flattening quasi-greedy: `‖T_A f‖ ≤ C‖f‖`.
    Kfq,
    /// Basis constant `sup_m ‖S_m‖`.
    Kb,
    /// `Φ(t) = β(1/t, 1/t)`.
    PhiBig(f64),
    /// Nearly unconditional `φ(t)`.
    PhiSmall(f64),
    /// `ρ(t)`: `φ(t)` restricted to vectors supported in the window.
    Rho(f64),
    /// Bounded-oscillation constant `β(D, d)`.
    Beta(f64, f64),
    /// `sup{‖1_{ε,A}‖ : |A| ≤ m}`.
    FundFn(usize),
    /// `sup_m max_{|A|=m} ‖1_{ε,A}‖ / min_{|B|=m} ‖1_{δ,B}‖`.
    DemocracyRatio,
}

impl ConstantKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ConstantKind::PhiBig(t) | ConstantKind::PhiSmall(t) | ConstantKind::Rho(t) => {
                if !(t > 0.0 && t <= 1.0) {
                    return input(format!("t must lie in (0,1], got {t}"));
                }
            }
            ConstantKind::Beta(big, small) => {
                if !(small >= 1.0) || !(small <= big) || big.is_infinite() {
                    return input(format!("beta needs 1 <= d <= D < inf, got D = {big}, d = {small}"));
                }
            }
            ConstantKind::FundFn(m) => {
                if m == 0 {
                    return input("fundamental function needs m >= 1");
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Kinds whose witnesses are a coefficient vector plus an admissible set.
    pub fn is_projection_type(&self) -> bool {
        matches!(
            self,
            ConstantKind::Kq
                | ConstantKind::Ktq
                | ConstantKind::Kfq
                | ConstantKind::Kb
                | ConstantKind::PhiBig(_)
                | ConstantKind::PhiSmall(_)
                | ConstantKind::Rho(_)
                | ConstantKind::Beta(..)
        )
    }

    /// True for the `t`-parameterized curve kinds.
    pub fn curve_parameter(&self) -> Option<f64> {
        match *self {
            ConstantKind::PhiBig(t) | ConstantKind::PhiSmall(t) | ConstantKind::Rho(t) => Some(t),
            _ => None,
        }
    }
}

impl fmt::Display for ConstantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstantKind::Kq => write!(f, "Kq"),
            ConstantKind::Ktq => write!(f, "Ktq"),
            ConstantKind::Kql => write!(f, "Kql"),
            ConstantKind::Kuc => write!(f, "Kuc"),
            ConstantKind::Klu => write!(f, "Klu"),
            ConstantKind::Klp => write!(f, "Klp"),
            ConstantKind::Kfq => write!(f, "Kfq"),
            ConstantKind::Kb => write!(f, "Kb"),
            ConstantKind::PhiBig(t) => write!(f, "Phi({t})"),
            ConstantKind::PhiSmall(t) => write!(f, "phi({t})"),
            ConstantKind::Rho(t) => write!(f, "rho({t})"),
            ConstantKind::Beta(big, small) => write!(f, "beta({big},{small})"),
            ConstantKind::FundFn(m) => write!(f, "FundFn({m})"),
            ConstantKind::DemocracyRatio => write!(f, "DemocracyRatio"),
        }
    }
}

fn parse_real(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Input(format!("not a number: '{s}'")))
}

impl FromStr for ConstantKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let kind = match s {
            "Kq" => ConstantKind::Kq,
            "Ktq" => ConstantKind::Ktq,
            "Kql" => ConstantKind::Kql,
            "Kuc" => ConstantKind::Kuc,
            "Klu" => ConstantKind::Klu,
            "Klp" => ConstantKind::Klp,
            "Kfq" => ConstantKind::Kfq,
            "Kb" => ConstantKind::Kb,
            "DemocracyRatio" => ConstantKind::DemocracyRatio,
            _ => {
                let (head, rest) = s
                    .split_once('(')
                    .ok_or_else(|| Error::Input(format!("unknown constant '{s}'")))?;
                let args = rest
                    .strip_suffix(')')
                    .ok_or_else(|| Error::Input(format!("unbalanced parameters in '{s}'")))?;
                match head {
                    "Phi" => ConstantKind::PhiBig(parse_real(args)?),
                    "phi" => ConstantKind::PhiSmall(parse_real(args)?),
                    "rho" => ConstantKind::Rho(parse_real(args)?),
                    "beta" => {
                        let (a, b) = args
                            .split_once(',')
                            .ok_or_else(|| Error::Input("beta takes two parameters".into()))?;
                        ConstantKind::Beta(parse_real(a)?, parse_real(b)?)
                    }
                    "FundFn" => ConstantKind::FundFn(
                        args.trim()
                            .parse()
                            .map_err(|_| Error::Input(format!("bad size in '{s}'")))?,
                    ),
                    _ => return input(format!("unknown constant '{s}'")),
                }
            }
        };
        kind.validate()?;
        Ok(kind)
    }
}

impl TryFrom<String> for ConstantKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ConstantKind> for String {
    fn from(k: ConstantKind) -> String {
        k.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_names() {
        for s in [
            "Kq",
            "Ktq",
            "Kql",
            "Kuc",
            "Klu",
            "Klp",
            "Kfq",
            "Kb",
            "Phi(0.5)",
            "phi(1)",
            "rho(0.25)",
            "beta(4,2)",
            "FundFn(3)",
            "DemocracyRatio",
        ] {
            let k: ConstantKind = s.parse().unwrap();
            assert_eq!(k.to_string(), s);
        }
        assert!("Kz".parse::<ConstantKind>().is_err());
        assert!("Phi(0)".parse::<ConstantKind>().is_err());
        assert!("Phi(1.5)".parse::<ConstantKind>().is_err());
        assert!("beta(2,3)".parse::<ConstantKind>().is_err());
        assert!("FundFn(0)".parse::<ConstantKind>().is_err());
        assert!("Phi(0.5".parse::<ConstantKind>().is_err());
    }
}
