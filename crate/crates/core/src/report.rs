//! Outcome records for lemma and inequality checks.

use std::collections::BTreeMap;

use serde::Serialize;

/// Acceptance floor for inequality margins.
pub const MARGIN_TOL: f64 = 1e-9;
/// Tolerance for exact algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-10;

/// Where a worst-case margin was attained.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// A normalized trace-free spectrum, ascending.
    Spectrum { n: usize, mu: Vec<f64> },
    /// A point of a one-dimensional sweep.
    Scalar { n: usize, x: f64 },
    /// A curvature configuration `(n, H, c, S̊)`.
    Config { n: usize, h: f64, c: f64, ring_s: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub check_id: String,
    pub passed: bool,
    pub worst_margin: f64,
    pub tolerance: f64,
    pub witness: Option<Witness>,
    pub samples: u64,
    pub seed: u64,
    /// Named auxiliary values (endpoint values, extremal functionals, counts).
    pub metrics: BTreeMap<String, f64>,
}

impl VerificationReport {
    /// `passed` is derived as `worst_margin ≥ −tolerance`; NaN margins fail.
    pub fn new(check_id: impl Into<String>, worst_margin: f64, tolerance: f64) -> Self {
        Self {
            check_id: check_id.into(),
            passed: worst_margin >= -tolerance,
            worst_margin,
            tolerance,
            witness: None,
            samples: 0,
            seed: 0,
            metrics: BTreeMap::new(),
        }
    }

    pub fn with_witness(mut self, witness: Option<Witness>) -> Self {
        self.witness = witness;
        self
    }

    pub fn with_samples(mut self, samples: u64) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn metric(mut self, name: impl Into<String>, value: f64) -> Self {
        self.metrics.insert(name.into(), value);
        self
    }

    /// Forces failure regardless of margin, for checks with a non-margin failure mode.
    pub fn fail(mut self) -> Self {
        self.passed = false;
        self
    }
}

/// Running minimum of a margin together with the point attaining it.
///
/// Ties keep the earlier candidate, so a fixed visiting order gives a fixed witness.
#[derive(Debug, Clone)]
pub struct WorstCase<W> {
    pub margin: f64,
    pub witness: Option<W>,
    pub count: u64,
}

impl<W> Default for WorstCase<W> {
    fn default() -> Self {
        Self { margin: f64::INFINITY, witness: None, count: 0 }
    }
}

impl<W> WorstCase<W> {
    pub fn observe(&mut self, margin: f64, witness: impl FnOnce() -> W) {
        self.count += 1;
        if margin < self.margin || (margin.is_nan() && !self.margin.is_nan()) {
            self.margin = margin;
            self.witness = Some(witness());
        }
    }

    pub fn merge(mut self, other: Self) -> Self {
        self.count += other.count;
        if other.margin < self.margin || (other.margin.is_nan() && !self.margin.is_nan()) {
            self.margin = other.margin;
            self.witness = other.witness;
        }
        self
    }
}

/// Rounds to 12 significant digits; the shortest decimal form of the result is what gets printed.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}
