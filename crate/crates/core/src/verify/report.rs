use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;
use crate::norms::Bounds;

/// Default tolerance for inequalities between computed norms.
pub const TOLERANCE: f64 = 1e-9;
/// Tolerance for exact identities.
pub const EXACT_TOLERANCE: f64 = 1e-12;

/// A recorded violation: `lhs ≤ rhs` failed beyond the tolerance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub trial: usize,
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
    /// The sampled inputs, in coefficient coordinates.
    pub data: Value,
}

impl Counterexample {
    pub fn is_violation(&self) -> bool {
        relative_excess(self.lhs, self.rhs) > self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub suite: String,
    pub trials: usize,
    pub failures: usize,
    pub first_counterexample: Option<Counterexample>,
    /// Largest `(lhs − rhs)/max(1, |rhs|)` over all numeric checks; negative means every
    /// inequality held with room to spare.
    pub max_slack: Option<f64>,
    pub tolerance: f64,
    pub seed: u64,
    pub notes: Vec<String>,
}

pub const CSV_HEADER: [&str; 6] = ["suite", "trials", "failures", "max_slack", "tolerance", "seed"];

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

impl CheckReport {
    pub fn new(suite: impl Into<String>, seed: u64, tolerance: f64) -> Self {
        Self {
            suite: suite.into(),
            trials: 0,
            failures: 0,
            first_counterexample: None,
            max_slack: None,
            tolerance,
            seed,
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn csv_row(&self) -> [String; 6] {
        [
            self.suite.clone(),
            self.trials.to_string(),
            self.failures.to_string(),
            self.max_slack.map(sci).unwrap_or_default(),
            sci(self.tolerance),
            self.seed.to_string(),
        ]
    }

    /// Folds a later batch of trials into this report; the earliest counterexample is kept.
    pub fn absorb(&mut self, other: Checker) {
        self.trials += 1;
        self.failures += other.failures;
        if self.first_counterexample.is_none() {
            self.first_counterexample = other.first;
        }
        self.max_slack = match (self.max_slack, other.max_slack) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        for n in other.notes {
            if !self.notes.contains(&n) {
                self.notes.push(n);
            }
        }
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        if !self.notes.contains(&msg) {
            self.notes.push(msg);
        }
    }
}

fn relative_excess(lhs: f64, rhs: f64) -> f64 {
    if lhs.is_nan() || rhs.is_nan() {
        return f64::INFINITY;
    }
    if rhs == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    (lhs - rhs) / rhs.abs().max(1.0)
}

/// Per-trial accumulator of assertions.
#[derive(Debug, Clone)]
pub struct Checker {
    trial: usize,
    tolerance: f64,
    failures: usize,
    first: Option<Counterexample>,
    max_slack: Option<f64>,
    notes: Vec<String>,
}

impl Checker {
    pub fn new(trial: usize, tolerance: f64) -> Self {
        Self {
            trial,
            tolerance,
            failures: 0,
            first: None,
            max_slack: None,
            notes: Vec::new(),
        }
    }

    pub fn failures(&self) -> usize {
        self.failures
    }

    fn record(&mut self, check: &str, lhs: f64, rhs: f64, tolerance: f64, data: impl FnOnce() -> Value) -> bool {
        let excess = relative_excess(lhs, rhs);
        if excess > tolerance {
            self.failures += 1;
            if self.first.is_none() {
                self.first = Some(Counterexample {
                    trial: self.trial,
                    check: check.into(),
                    lhs,
                    rhs,
                    tolerance,
                    data: data(),
                });
            }
            false
        } else {
            true
        }
    }

    /// Asserts `lhs ≤ rhs` up to the relative tolerance and tracks the slack.
    pub fn assert_le(&mut self, check: &str, lhs: f64, rhs: f64, data: impl FnOnce() -> Value) -> bool {
        let excess = relative_excess(lhs, rhs);
        if excess.is_finite() {
            self.max_slack = Some(self.max_slack.map_or(excess, |m| m.max(excess)));
        }
        self.record(check, lhs, rhs, self.tolerance, data)
    }

    /// `small ≤ big` for enclosures: only a certain violation (`small.lo > big.hi`) fails.
    pub fn assert_bounds_le(
        &mut self,
        check: &str,
        small: Bounds<f64>,
        big: Bounds<f64>,
        data: impl FnOnce() -> Value,
    ) -> bool {
        self.assert_le(check, small.lo, big.hi, data)
    }

    /// `|a − b| ≤ tolerance · max(1, |b|)`.
    pub fn assert_close(&mut self, check: &str, a: f64, b: f64, tolerance: f64, data: impl FnOnce() -> Value) -> bool {
        self.record(check, (a - b).abs() / b.abs().max(1.0), 0.0, tolerance, data)
    }

    pub fn assert_true(&mut self, check: &str, ok: bool, data: impl FnOnce() -> Value) -> bool {
        self.record(check, if ok { 0.0 } else { 1.0 }, 0.0, 0.0, data)
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        if !self.notes.contains(&msg) {
            self.notes.push(msg);
        }
    }
}

pub(crate) fn trial_rng(seed: u64, suite: &str, trial: usize) -> ChaCha8Rng {
    use rand::SeedableRng;
    let salt = suite
        .bytes()
        .fold(0xcbf29ce484222325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt);
    rng.set_stream(trial as u64);
    rng
}

/// Runs `trials` independent trials in parallel and merges them in trial order.
pub(crate) fn run_trials<F>(suite: &str, trials: usize, seed: u64, tolerance: f64, body: F) -> Result<CheckReport>
where
    F: Fn(&mut ChaCha8Rng, &mut Checker) -> Result<()> + Sync,
{
    let results: Vec<Result<Checker>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, suite, i);
            let mut c = Checker::new(i, tolerance);
            body(&mut rng, &mut c)?;
            Ok(c)
        })
        .collect();
    let mut report = CheckReport::new(suite, seed, tolerance);
    for r in results {
        report.absorb(r?);
    }
    Ok(report)
}
