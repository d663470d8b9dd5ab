use std::collections::BTreeMap;

use serde::Serialize;

/// Relative tolerance of every inequality comparison.
pub const REL_TOL: f64 = 1e-9;

/// How a check result should be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    /// Both sides computed exactly; a failure is a counterexample.
    Check,
    /// The left side bounds an operator norm from below by a finite test
    /// family; passing is necessary, not sufficient.
    LowerEstimate,
    /// Out-of-contract exploration; never gates a run.
    Probe,
    /// Recorded quantity without a bound.
    Report,
}

impl CheckKind {
    /// Whether a failure of this kind should fail a run.
    pub fn gates(self) -> bool {
        matches!(self, CheckKind::Check | CheckKind::LowerEstimate)
    }
}

/// One evaluated instance of an inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub instance_id: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `(rhs − lhs)/|rhs|`, or `−lhs` when `rhs = 0`.
    pub slack: f64,
    pub pass: bool,
    pub kind: CheckKind,
    /// No instance of the hypothesis occurred (empty family, no qualifying
    /// point); such results pass.
    pub vacuous: bool,
    pub params: BTreeMap<String, f64>,
    /// The expression the right side was assembled from.
    pub provenance: String,
}

impl CheckResult {
    pub fn new(name: &str, instance_id: &str, lhs: f64, rhs: f64) -> Self {
        let slack = if rhs != 0.0 { (rhs - lhs) / rhs.abs() } else { -lhs };
        Self {
            name: name.to_string(),
            instance_id: instance_id.to_string(),
            lhs,
            rhs,
            slack,
            pass: passes(lhs, rhs),
            kind: CheckKind::Check,
            vacuous: false,
            params: BTreeMap::new(),
            provenance: String::new(),
        }
    }

    /// A pass with nothing to compare.
    pub fn vacuous(name: &str, instance_id: &str) -> Self {
        let mut r = Self::new(name, instance_id, 0.0, 0.0);
        r.vacuous = true;
        r
    }

    pub fn kind(mut self, kind: CheckKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn provenance(mut self, text: impl Into<String>) -> Self {
        self.provenance = text.into();
        self
    }

    /// A gating failure.
    pub fn fails_run(&self) -> bool {
        !self.pass && self.kind.gates()
    }
}

/// `lhs ≤ rhs·(1 + 1e−9)`, with the tolerance taken on the side of `|rhs|`.
pub fn passes(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + REL_TOL * rhs.abs()
}
