//! One-dimensional certification of the `f(η)` argument behind the Lemma 2 bounds.
//!
//! Under the hypothesis `√((n−1)/n)·φ ≤ B_n/2`, Lemma 1 gives
//! `√((n−1)/n)·φ ≥ f(η)`. An `n`-free envelope below `f` that stays above
//! `B_n/2` on `[η_threshold, η_cap]` rules that interval out for `η`.

use serde::Serialize;

use crate::constants::{b_n, require_theorem_dim};
use crate::error::{usage, Error, Result};
use crate::report::{VerificationReport, Witness};

/// Second-difference step for the concavity sweep.
pub const CONCAVITY_STEP: f64 = 1e-4;
/// Second differences must stay below this value.
pub const CONCAVITY_CEILING: f64 = -1e-6;
/// Slack allowed in envelope dominance.
pub const DOMINANCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CaseId {
    /// `4 ≤ n ≤ 20`
    SmallN,
    /// `n > 20`
    LargeN,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeCase {
    pub case_id: CaseId,
    pub eta_cap: f64,
    pub eta_threshold: f64,
    pub floor: f64,
}

impl EnvelopeCase {
    pub const SMALL_N: EnvelopeCase = EnvelopeCase {
        case_id: CaseId::SmallN,
        eta_cap: 0.2,
        eta_threshold: 0.0445,
        floor: 0.1,
    };
    pub const LARGE_N: EnvelopeCase = EnvelopeCase {
        case_id: CaseId::LargeN,
        eta_cap: 0.11,
        eta_threshold: 0.04305,
        floor: 0.098,
    };

    pub fn for_dim(n: usize) -> Result<Self> {
        require_theorem_dim(n)?;
        Ok(if n <= 20 { Self::SMALL_N } else { Self::LARGE_N })
    }

    pub fn envelope(&self, eta: f64) -> Result<f64> {
        match self.case_id {
            CaseId::SmallN => envelope_small(eta),
            CaseId::LargeN => envelope_large(eta),
        }
    }

    /// Dimensions swept by [`certify_case`]. `10⁶` stands in for `n → ∞`.
    pub fn sample_dims(&self) -> Vec<usize> {
        match self.case_id {
            CaseId::SmallN => (4..=20).collect(),
            CaseId::LargeN => vec![21, 30, 50, 100, 1_000_000],
        }
    }

    fn label(&self) -> &'static str {
        match self.case_id {
            CaseId::SmallN => "small_n",
            CaseId::LargeN => "large_n",
        }
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Domain {
            n: 0,
            h: f64::NAN,
            c: f64::NAN,
            reason: format!("η = {eta} is outside [0, 1]"),
        });
    }
    Ok(())
}

/// `f(η) = η(3 − 3(n+1)/n·η − 2√(2(n−1)η/n))`.
pub fn f_eta(n: usize, eta: f64) -> Result<f64> {
    require_theorem_dim(n)?;
    check_eta(eta)?;
    let nf = n as f64;
    Ok(eta * (3.0 - 3.0 * (nf + 1.0) / nf * eta - 2.0 * (2.0 * (nf - 1.0) * eta / nf).sqrt()))
}

/// `η(3 − (15/4)η − √(38η/5))`, a lower bound for `f` when `n ≤ 20`.
pub fn envelope_small(eta: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(eta * (3.0 - 15.0 / 4.0 * eta - (38.0 * eta / 5.0).sqrt()))
}

/// `η(3 − (66/21)η − 2√(2η))`, a lower bound for `f` when `n > 20`.
pub fn envelope_large(eta: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(eta * (3.0 - 66.0 / 21.0 * eta - 2.0 * (2.0 * eta).sqrt()))
}

/// `η ≤ n/(10(n−2))` for `n ≤ 20` and `η ≤ 49n/(500(n−2))` for `n > 20`.
pub fn eta_cap_check(n: usize) -> Result<f64> {
    require_theorem_dim(n)?;
    let nf = n as f64;
    Ok(if n <= 20 { nf / (10.0 * (nf - 2.0)) } else { 49.0 * nf / (500.0 * (nf - 2.0)) })
}

/// Closed grid of `points` values on `[lo, hi]`, endpoints exact.
pub fn closed_grid(lo: f64, hi: f64, points: usize) -> impl Iterator<Item = f64> {
    let last = points.saturating_sub(1).max(1);
    (0..points).map(move |i| {
        if i == last {
            hi
        } else {
            lo + (hi - lo) * i as f64 / last as f64
        }
    })
}

fn central_second_difference<F: Fn(f64) -> Result<f64>>(f: F, x: f64, h: f64) -> Result<f64> {
    Ok((f(x + h)? - 2.0 * f(x)? + f(x - h)?) / (h * h))
}

/// Margins of the four sub-checks; each must be nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaseMargins {
    /// `min f(n, η) − envelope(η) + tol` over the grid and sampled `n`.
    pub dominance: f64,
    /// `−max(second difference) + ceiling`, over `f` for every sampled `n` and the envelope.
    pub concavity: f64,
    /// `min over grid − min of endpoint values + 1e−12` on `[threshold, cap]`.
    pub endpoint_minimum: f64,
    /// `min(endpoint values) − floor`.
    pub floor: f64,
    /// `min envelope on [threshold, cap] − B_n/2`, worst over sampled `n`.
    pub contradiction: f64,
    /// `bound − max cap(n) + tol` over sampled `n`; the bound is attained at `n = 4`.
    pub cap: f64,
}

/// Certifies dominance, concavity, endpoint minimality, the floor and the
/// contradiction step for one case.
pub fn certify_case(case: EnvelopeCase, grid_points: usize) -> Result<VerificationReport> {
    if grid_points < 1000 {
        return Err(usage(format!("grid_points must be at least 1000, got {grid_points}")));
    }
    let dims = case.sample_dims();
    let env = |eta: f64| case.envelope(eta);

    // (a) dominance on [0, cap]
    let mut dominance = (f64::INFINITY, Witness::Scalar { n: 0, x: f64::NAN });
    for &n in &dims {
        for eta in closed_grid(0.0, case.eta_cap, grid_points) {
            let m = f_eta(n, eta)? - env(eta)? + DOMINANCE_TOL;
            if m < dominance.0 {
                dominance = (m, Witness::Scalar { n, x: eta });
            }
        }
    }

    // (b) concavity of f and of the envelope, on grid points where η − h ≥ 0
    let h = CONCAVITY_STEP;
    let mut concavity = (f64::INFINITY, Witness::Scalar { n: 0, x: f64::NAN });
    for eta in closed_grid(h, case.eta_cap, grid_points) {
        let m = CONCAVITY_CEILING - central_second_difference(env, eta, h)?;
        if m < concavity.0 {
            concavity = (m, Witness::Scalar { n: 0, x: eta });
        }
        for &n in &dims {
            let m = CONCAVITY_CEILING - central_second_difference(|x| f_eta(n, x), eta, h)?;
            if m < concavity.0 {
                concavity = (m, Witness::Scalar { n, x: eta });
            }
        }
    }

    // (c) minimum over [threshold, cap] sits at an endpoint and clears the floor
    let low_end = env(case.eta_threshold)?;
    let high_end = env(case.eta_cap)?;
    let end_min = low_end.min(high_end);
    let mut grid_min = (f64::INFINITY, f64::NAN);
    for eta in closed_grid(case.eta_threshold, case.eta_cap, grid_points) {
        let v = env(eta)?;
        if v < grid_min.0 {
            grid_min = (v, eta);
        }
    }
    let endpoint_minimum = grid_min.0 - end_min + 1e-12;
    let floor = end_min - case.floor;

    // (d) envelope exceeds √((n−1)/n)·φ_threshold = B_n/2, and cap(n) stays below the case cap
    let mut contradiction = f64::INFINITY;
    let mut cap = f64::INFINITY;
    for &n in &dims {
        contradiction = contradiction.min(grid_min.0 - b_n(n)? / 2.0);
        cap = cap.min(case.eta_cap - eta_cap_check(n)? + DOMINANCE_TOL);
    }

    let margins = CaseMargins {
        dominance: dominance.0,
        concavity: concavity.0,
        endpoint_minimum,
        floor,
        contradiction,
        cap,
    };
    let parts = [
        (margins.dominance, dominance.1.clone()),
        (margins.concavity, concavity.1.clone()),
        (margins.endpoint_minimum, Witness::Scalar { n: 0, x: grid_min.1 }),
        (margins.floor, Witness::Scalar { n: 0, x: if low_end <= high_end { case.eta_threshold } else { case.eta_cap } }),
        (margins.contradiction, Witness::Scalar { n: 0, x: grid_min.1 }),
        (margins.cap, Witness::Scalar { n: 0, x: case.eta_cap }),
    ];
    let (worst, witness) = parts
        .into_iter()
        .fold((f64::INFINITY, None), |acc, (m, w)| if m < acc.0 { (m, Some(w)) } else { acc });

    // strict inequalities: every sub-margin must be positive
    let mut report = VerificationReport::new(format!("envelope.{}", case.label()), worst, 0.0)
        .with_witness(witness)
        .with_samples((grid_points * dims.len()) as u64)
        .metric("endpoint_low", low_end)
        .metric("endpoint_high", high_end)
        .metric("grid_min", grid_min.0)
        .metric("margin_dominance", margins.dominance)
        .metric("margin_concavity", margins.concavity)
        .metric("margin_endpoint_minimum", margins.endpoint_minimum)
        .metric("margin_floor", margins.floor)
        .metric("margin_contradiction", margins.contradiction)
        .metric("margin_cap", margins.cap);
    if !(worst > 0.0) {
        report = report.fail();
    }
    Ok(report)
}
