//! The trace-free spectrum manifold `{Σμᵢ = 0, Σμᵢ² = 1}` and the functionals
//! `φ`, `η`, `σ` defined on it.
//!
//! A spectrum `μ` is what remains of the principal curvatures `λᵢ` after
//! removing the mean curvature and normalizing: `μᵢ = (λᵢ − H)/√S̊`.

mod search;

pub use search::{
    counterexample_search, local_descent, DescentOutcome, Objective, SearchConfig,
};

use serde::Serialize;

use crate::constants::{b_n, require_theorem_dim};
use crate::error::{usage, Error, Result};

/// Lemma 2's lower bound `2/(3 − 3⁻⁹)` on `(μ₂ − μ₁)/√(n/(n−1))`.
pub const GAP_CONSTANT: f64 = 2.0 / (3.0 - 1.0 / 19683.0);
/// The explicit case-(i) bound `0.667` on the same ratio for `4 ≤ n ≤ 20`.
pub const GAP_CONSTANT_SMALL_N: f64 = 0.667;
/// Upper bound on `η` under the Lemma 2 hypothesis.
pub const ETA_BOUND: f64 = 0.0445;
/// Upper bound on `σ` under the Lemma 2 hypothesis.
pub const SIGMA_BOUND: f64 = 0.295;

/// Sorted, centered, unit-norm vector of trace-free principal curvatures.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct TraceFreeSpectrum {
    mu: Vec<f64>,
}

impl TraceFreeSpectrum {
    /// Projects `raw` onto the manifold: subtract the mean, divide by the norm, sort ascending.
    pub fn new(raw: &[f64]) -> Result<Self> {
        let n = raw.len();
        if n < 3 {
            return Err(usage(format!("a spectrum needs n >= 3 entries, got {n}")));
        }
        if raw.iter().any(|x| !x.is_finite()) {
            return Err(usage("spectrum entries must be finite"));
        }
        let scale = raw.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if scale == 0.0 {
            return Err(Error::Degenerate("zero vector".into()));
        }
        let mut mu: Vec<f64> = raw.iter().map(|x| x / scale).collect();
        // two passes leave |Σμ| and |Σμ² − 1| at a few ulps even for badly scaled input
        for _ in 0..2 {
            center(&mut mu);
            let norm = norm2(&mu);
            if !(norm > 1e-13) {
                return Err(Error::Degenerate(
                    "input is proportional to the all-ones vector; nothing is left after removing the trace".into(),
                ));
            }
            mu.iter_mut().for_each(|x| *x /= norm);
        }
        mu.sort_unstable_by(f64::total_cmp);
        Ok(Self { mu })
    }

    /// Two-valued spectrum with the bottom value repeated `k` times.
    ///
    /// `k = 1` is the equality case `φ = η = σ = 0` of Lemma 1.
    pub fn two_valued(n: usize, k: usize) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(usage(format!("two-valued spectrum needs 1 <= k <= n-1, got k={k}, n={n}")));
        }
        let low = -((n - k) as f64);
        let high = k as f64;
        let raw: Vec<f64> = (0..n).map(|i| if i < k { low } else { high }).collect();
        Self::new(&raw)
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.mu
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.mu
    }

    /// Smallest entry `μ₁`.
    pub fn mu1(&self) -> f64 {
        self.mu[0]
    }

    /// Second smallest entry `μ₂`.
    pub fn mu2(&self) -> f64 {
        self.mu[1]
    }

    pub fn functionals(&self) -> SpectrumFunctionals {
        functionals(self)
    }
}

pub(crate) fn center(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Projection of `raw` onto the manifold; see [`TraceFreeSpectrum::new`].
pub fn make_spectrum(raw: &[f64]) -> Result<TraceFreeSpectrum> {
    TraceFreeSpectrum::new(raw)
}

/// `√(n/(n−1))`, `√(n(n−1))` and `(n−2)/√(n(n−1))`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DimConstants {
    pub n: f64,
    pub r: f64,
    pub q: f64,
    pub phi_shift: f64,
}

impl DimConstants {
    pub fn new(n: usize) -> Self {
        let nf = n as f64;
        let q = (nf * (nf - 1.0)).sqrt();
        Self { n: nf, r: (nf / (nf - 1.0)).sqrt(), q, phi_shift: (nf - 2.0) / q }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumFunctionals {
    pub phi: f64,
    pub eta: f64,
    pub sigma: f64,
}

/// `φ = Σμᵢ³ + (n−2)/√(n(n−1))`, `η = √(n/(n−1))·μ₁ + 1`,
/// `σ = [Σ_{i≥2} (μᵢ + μ₁/(n−1))²]^{1/2}`.
pub fn functionals(s: &TraceFreeSpectrum) -> SpectrumFunctionals {
    let mu = s.as_slice();
    let k = DimConstants::new(mu.len());
    let mu1 = mu[0];
    let shift = mu1 / (k.n - 1.0);
    SpectrumFunctionals {
        phi: mu.iter().map(|x| x * x * x).sum::<f64>() + k.phi_shift,
        eta: k.r * mu1 + 1.0,
        sigma: mu[1..].iter().map(|x| (x + shift).powi(2)).sum::<f64>().sqrt(),
    }
}

/// `σ² − η(2 − η)`; vanishes identically on the manifold.
pub fn sigma_eta_residual(s: &TraceFreeSpectrum) -> f64 {
    let f = functionals(s);
    f.sigma * f.sigma - f.eta * (2.0 - f.eta)
}

/// The three margins of Lemma 1, each nonnegative on the whole manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma1Margins {
    /// `√(n(n−1))/(n−2)·φ − η`
    pub left: f64,
    /// `η − σ²/2`
    pub right: f64,
    /// `√(n(n−1))·φ − η[3n − 3(n+1)η − 2√(n(n−1))σ]`
    pub second: f64,
}

impl Lemma1Margins {
    pub fn min(&self) -> f64 {
        self.left.min(self.right).min(self.second)
    }
}

pub fn lemma1_margins(s: &TraceFreeSpectrum) -> Lemma1Margins {
    let f = functionals(s);
    let k = DimConstants::new(s.n());
    Lemma1Margins {
        left: k.q / (k.n - 2.0) * f.phi - f.eta,
        right: f.eta - f.sigma * f.sigma / 2.0,
        second: k.q * f.phi
            - f.eta * (3.0 * k.n - 3.0 * (k.n + 1.0) * f.eta - 2.0 * k.q * f.sigma),
    }
}

/// `Σᵢ (μᵢ + μ₁/(n−1))²(μᵢ − μ₁) − [φ − (n−2)/√(n(n−1))·η + μ₁/(n−1)·σ²]`.
pub fn phi_decomposition_residual(s: &TraceFreeSpectrum) -> f64 {
    let mu = s.as_slice();
    let k = DimConstants::new(mu.len());
    let mu1 = mu[0];
    let shift = mu1 / (k.n - 1.0);
    let lhs: f64 = mu.iter().map(|x| (x + shift).powi(2) * (x - mu1)).sum();
    let f = functionals(s);
    lhs - (f.phi - k.phi_shift * f.eta + shift * f.sigma * f.sigma)
}

/// `φ − [(n−2)/√(n(n−1))·η + σ²(μ₂ − n/(n−1)·μ₁)]`, nonnegative on the manifold.
pub fn phi_lower_chain_margin(s: &TraceFreeSpectrum) -> f64 {
    let f = functionals(s);
    let k = DimConstants::new(s.n());
    let tail = f.sigma * f.sigma * (s.mu2() - k.n / (k.n - 1.0) * s.mu1());
    f.phi - (k.phi_shift * f.eta + tail)
}

/// `(μ₂ − μ₁) − √(n/(n−1))·(1 − η − √(19/20)·σ)`.
///
/// The bound uses `σ ≤ √(n/(n−1))·√(19/20)·σ`, valid only for `n ≤ 20`.
pub fn gap_chain_margin(s: &TraceFreeSpectrum) -> Result<f64> {
    let n = s.n();
    require_theorem_dim(n)?;
    if n > 20 {
        return Err(usage(format!("the √(19/20) gap chain holds only for n <= 20, got n={n}")));
    }
    let f = functionals(s);
    let k = DimConstants::new(n);
    Ok(s.mu2() - s.mu1() - k.r * (1.0 - f.eta - (19.0f64 / 20.0).sqrt() * f.sigma))
}

/// `√(n(n−1))·φ − 2nη`, nonnegative whenever `3η + 2σ < 3/4`.
pub fn eta_linear_chain_margin(s: &TraceFreeSpectrum) -> f64 {
    let f = functionals(s);
    let k = DimConstants::new(s.n());
    k.q * f.phi - 2.0 * k.n * f.eta
}

/// `(B_n/2)·√(n/(n−1))`, the largest `φ` allowed by the Lemma 2 hypothesis.
pub fn lemma2_threshold(n: usize) -> Result<f64> {
    Ok(b_n(n)? / 2.0 * DimConstants::new(n).r)
}

pub fn lemma2_hypothesis(s: &TraceFreeSpectrum) -> Result<bool> {
    Ok(functionals(s).phi <= lemma2_threshold(s.n())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma2Conclusions {
    pub eta_ok: bool,
    pub sigma_ok: bool,
    pub gap_ok: bool,
    pub eta: f64,
    pub sigma: f64,
    /// `(μ₂ − μ₁) − 2/(3−3⁻⁹)·√(n/(n−1))`.
    pub gap_margin: f64,
}

impl Lemma2Conclusions {
    pub fn all(&self) -> bool {
        self.eta_ok && self.sigma_ok && self.gap_ok
    }
}

/// Checks `η < 0.0445`, `σ < 0.295` and the eigenvalue gap; usage error when the hypothesis fails.
pub fn lemma2_conclusions(s: &TraceFreeSpectrum) -> Result<Lemma2Conclusions> {
    if !lemma2_hypothesis(s)? {
        return Err(usage(format!(
            "Lemma 2 hypothesis fails: φ = {} exceeds {}",
            functionals(s).phi,
            lemma2_threshold(s.n())?
        )));
    }
    let f = functionals(s);
    let gap_margin = s.mu2() - s.mu1() - GAP_CONSTANT * DimConstants::new(s.n()).r;
    Ok(Lemma2Conclusions {
        eta_ok: f.eta < ETA_BOUND,
        sigma_ok: f.sigma < SIGMA_BOUND,
        gap_ok: gap_margin > 0.0,
        eta: f.eta,
        sigma: f.sigma,
        gap_margin,
    })
}
