//! Named groups of checks run by `cmc-gap verify`.
//!
//! Every suite returns its reports in a fixed order, so a given [`SuiteConfig`]
//! always produces the same list.

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::constants::{
    alpha_general, alpha_k, delta_band, lemma3_sides, problem_gap_check, ring_alpha,
    ring_alpha_root_oracle, SpaceFormContext,
};
use crate::envelope::{certify_case, envelope_large, envelope_small, eta_cap_check, EnvelopeCase};
use crate::error::{usage, Error, Result};
use crate::gap::{
    band_sweep, boundary_model, classify, clifford_for_mean_curvature, simons_rhs, spectrum_of_model,
    GapTag,
};
use crate::report::{VerificationReport, Witness, WorstCase, IDENTITY_TOL, MARGIN_TOL};
use crate::spectrum::{
    counterexample_search, eta_linear_chain_margin, functionals, gap_chain_margin, lemma2_conclusions,
    lemma2_hypothesis, phi_decomposition_residual, phi_lower_chain_margin, sigma_eta_residual,
    Objective, SearchConfig, TraceFreeSpectrum, ETA_BOUND, SIGMA_BOUND,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Lemma1,
    Lemma2,
    Lemma3,
    Envelope,
    Band,
    Identities,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 7] = ["lemma1", "lemma2", "lemma3", "envelope", "band", "identities", "all"];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Lemma1 => "lemma1",
            Self::Lemma2 => "lemma2",
            Self::Lemma3 => "lemma3",
            Self::Envelope => "envelope",
            Self::Band => "band",
            Self::Identities => "identities",
            Self::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lemma1" => Self::Lemma1,
            "lemma2" => Self::Lemma2,
            "lemma3" => Self::Lemma3,
            "envelope" => Self::Envelope,
            "band" => Self::Band,
            "identities" => Self::Identities,
            "all" => Self::All,
            other => {
                return Err(usage(format!("unknown suite '{other}', expected one of {}", Self::NAMES.join(", "))))
            }
        })
    }
}

pub const LEMMA1_DIMS: [usize; 6] = [4, 5, 10, 20, 21, 50];
pub const LEMMA2_DIMS: [usize; 5] = [4, 10, 20, 21, 50];
/// `η` bound for `n > 20` obtained from the large-`n` envelope.
pub const ETA_BOUND_LARGE_N: f64 = 0.04305;
/// `σ = √(η(2−η))` at `η = 0.04305`, rounded up.
pub const SIGMA_BOUND_LARGE_N: f64 = 0.29026;
/// Margin the σ propagation was expected to clear; reported, not enforced.
pub const SIGMA_PROPAGATION_TARGET: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteConfig {
    /// Random starts per search, and random spectra per sampled identity.
    pub samples: u64,
    pub seed: u64,
    /// Points per band sweep.
    pub grid: usize,
    /// Points per envelope sweep.
    pub envelope_grid: usize,
    /// Overrides the dimensions searched by the lemma suites.
    pub dims: Option<Vec<usize>>,
    pub search: SearchConfig,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            samples: 5_000,
            seed: 0,
            grid: 1_000,
            envelope_grid: 10_000,
            dims: None,
            search: SearchConfig::default(),
        }
    }
}

impl SuiteConfig {
    fn search_config(&self) -> SearchConfig {
        SearchConfig { samples: self.samples, seed: self.seed, ..self.search }
    }

    fn dims_or(&self, default: &[usize]) -> Vec<usize> {
        self.dims.clone().unwrap_or_else(|| default.to_vec())
    }
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    if cfg.samples == 0 {
        return Err(usage("samples must be at least 1"));
    }
    match suite {
        Suite::Lemma1 => lemma1_suite(cfg),
        Suite::Lemma2 => lemma2_suite(cfg),
        Suite::Lemma3 => lemma3_suite(),
        Suite::Envelope => envelope_suite(cfg),
        Suite::Band => band_suite(cfg),
        Suite::Identities => identities_suite(cfg),
        Suite::All => {
            let mut out = Vec::new();
            for s in [Suite::Lemma3, Suite::Identities, Suite::Envelope, Suite::Band, Suite::Lemma1, Suite::Lemma2] {
                out.extend(run_suite(s, cfg)?);
            }
            Ok(out)
        }
    }
}

pub fn lemma1_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let search = cfg.search_config();
    let mut out = Vec::new();
    for n in cfg.dims_or(&LEMMA1_DIMS) {
        for obj in Objective::LEMMA1 {
            out.push(counterexample_search(n, obj, &search)?);
        }
    }
    Ok(out)
}

/// Searches the three conclusions, then for `n > 20` checks the sharper case bounds
/// `η < 0.04305` and `σ < 0.29026` against the same search results.
pub fn lemma2_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let search = cfg.search_config();
    let mut out = Vec::new();
    for n in cfg.dims_or(&LEMMA2_DIMS) {
        let mut worst_eta = f64::NAN;
        let mut worst_sigma = f64::NAN;
        let mut eta_witness = None;
        let mut sigma_witness = None;
        for obj in Objective::LEMMA2 {
            let r = counterexample_search(n, obj, &search)?;
            match obj {
                Objective::Lemma2Eta => {
                    worst_eta = ETA_BOUND - r.worst_margin;
                    eta_witness = r.witness.clone();
                }
                Objective::Lemma2Sigma => {
                    worst_sigma = SIGMA_BOUND - r.worst_margin;
                    sigma_witness = r.witness.clone();
                }
                _ => {}
            }
            out.push(r);
        }
        if n > 20 {
            let eta = VerificationReport::new(format!("lemma2.eta_large_n.n{n}"), ETA_BOUND_LARGE_N - worst_eta, 0.0)
                .with_witness(eta_witness)
                .with_samples(cfg.samples)
                .with_seed(cfg.seed)
                .metric("max_eta", worst_eta);
            let sigma =
                VerificationReport::new(format!("lemma2.sigma_large_n.n{n}"), SIGMA_BOUND_LARGE_N - worst_sigma, 0.0)
                    .with_witness(sigma_witness)
                    .with_samples(cfg.samples)
                    .with_seed(cfg.seed)
                    .metric("max_sigma", worst_sigma);
            out.push(strict(eta));
            out.push(strict(sigma));
        }
    }
    Ok(out)
}

/// Marks a report failed unless its margin is strictly positive.
fn strict(r: VerificationReport) -> VerificationReport {
    if r.worst_margin > 0.0 {
        r
    } else {
        r.fail()
    }
}

/// `(n, H, c)` with `n ∈ 4..=50`, `H ∈ {0.1, …, 10}`, `c ∈ {−0.5, 0, 1}` and `H² + c > 0`.
fn lemma3_grid() -> impl Iterator<Item = (SpaceFormContext, f64)> {
    (4..=50usize).flat_map(|n| {
        [-0.5, 0.0, 1.0].into_iter().flat_map(move |c| {
            let ctx = SpaceFormContext::new(n, c).expect("n >= 4");
            (1..=100)
                .map(|i| i as f64 / 10.0)
                .filter(move |&h| ctx.admits(h))
                .map(move |h| (ctx, h))
        })
    })
}

fn config_witness(ctx: SpaceFormContext, h: f64, ring_s: f64) -> Witness {
    Witness::Config { n: ctx.n, h, c: ctx.c, ring_s }
}

pub fn lemma3_suite() -> Result<Vec<VerificationReport>> {
    let mut identity = WorstCase::default();
    let mut oracle = WorstCase::default();
    let mut special = WorstCase::default();
    let mut rhs_sign = WorstCase::default();
    for (ctx, h) in lemma3_grid() {
        let sides = lemma3_sides(ctx, h)?;
        let ring = ring_alpha(ctx, h)?;
        identity.observe(-sides.relative_residual(), || config_witness(ctx, h, ring));
        rhs_sign.observe(sides.rhs / sides.rhs.abs().max(1.0), || config_witness(ctx, h, ring));
        let scale = ring.abs().max(1.0);
        let root = ring_alpha_root_oracle(ctx, h, 1e-15 * scale)?;
        oracle.observe(-(root - ring).abs() / scale, || config_witness(ctx, h, ring));
        if ctx.c == 1.0 {
            let a = alpha_general(ctx, h)?;
            let a1 = alpha_k(ctx.n, h, 1)?;
            special.observe(-(a - a1).abs() / a.abs().max(1.0), || config_witness(ctx, h, ring));
        }
    }
    let finish = |id: &str, w: WorstCase<Witness>, tol: f64| {
        VerificationReport::new(id, w.margin, tol).with_witness(w.witness).with_samples(w.count)
    };
    Ok(vec![
        finish("lemma3.identity", identity, IDENTITY_TOL),
        finish("lemma3.rhs_nonnegative", rhs_sign, 1e-12),
        finish("lemma3.root_oracle", oracle, 1e-12),
        finish("lemma3.unit_sphere_specialization", special, 1e-12),
    ])
}

/// Random spectrum of dimension `n`: Gaussian, or a perturbation of the
/// `k = 1` two-valued spectrum of relative size up to `spread`.
fn sample_spectrum(rng: &mut ChaCha8Rng, n: usize, spread: Option<f64>) -> Result<TraceFreeSpectrum> {
    let mut raw: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    if let Some(spread) = spread {
        let norm = raw.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
        let eps = spread * rng.random::<f64>() / norm;
        let base = TraceFreeSpectrum::two_valued(n, 1)?;
        for (r, b) in raw.iter_mut().zip(base.as_slice()) {
            *r = b + eps * *r;
        }
    }
    TraceFreeSpectrum::new(&raw)
}

fn spectrum_witness(s: &TraceFreeSpectrum) -> Witness {
    Witness::Spectrum { n: s.n(), mu: s.as_slice().to_vec() }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 << 32 | stream);
    rng
}

pub fn identities_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();

    // Identities and unconditional chains on Gaussian spectra, n ∈ 4..=30.
    let mut rng = rng_for(cfg.seed, 0);
    let mut sigma_eta = WorstCase::default();
    let mut decomposition = WorstCase::default();
    let mut lower_chain = WorstCase::default();
    for i in 0..cfg.samples {
        let n = 4 + (i % 27) as usize;
        let s = sample_spectrum(&mut rng, n, None)?;
        sigma_eta.observe(-sigma_eta_residual(&s).abs(), || spectrum_witness(&s));
        decomposition.observe(-phi_decomposition_residual(&s).abs(), || spectrum_witness(&s));
        lower_chain.observe(phi_lower_chain_margin(&s), || spectrum_witness(&s));
    }
    let sampled = |id: &str, w: WorstCase<Witness>, tol: f64| {
        VerificationReport::new(id, w.margin, tol).with_witness(w.witness).with_samples(w.count).with_seed(cfg.seed)
    };
    out.push(sampled("identities.sigma_eta", sigma_eta, IDENTITY_TOL));
    out.push(sampled("identities.phi_decomposition", decomposition, IDENTITY_TOL));
    out.push(sampled("identities.phi_lower_chain", lower_chain, MARGIN_TOL));

    // Conditional chains near the two-valued extremal, where their hypotheses hold.
    let mut rng = rng_for(cfg.seed, 1);
    let mut gap_chain = WorstCase::default();
    let mut linear_chain = WorstCase::default();
    for i in 0..cfg.samples {
        let n = 4 + (i % 27) as usize;
        let s = sample_spectrum(&mut rng, n, Some(0.5))?;
        if n <= 20 && lemma2_hypothesis(&s)? {
            let m = gap_chain_margin(&s)?;
            gap_chain.observe(m, || spectrum_witness(&s));
        }
        let f = functionals(&s);
        if 3.0 * f.eta + 2.0 * f.sigma < 0.75 {
            linear_chain.observe(eta_linear_chain_margin(&s), || spectrum_witness(&s));
        }
    }
    for (id, w) in [("identities.gap_chain", gap_chain), ("identities.eta_linear_chain", linear_chain)] {
        let count = w.count;
        let r = sampled(id, w, MARGIN_TOL).metric("admissible_samples", count as f64);
        out.push(if count == 0 { r.fail() } else { r });
    }

    // α_1 < … < α_{n−1}, each step above 1e−9.
    let mut ordering = WorstCase::default();
    for n in 4..=30usize {
        for h in [0.01, 0.1, 1.0, 10.0] {
            let a: Vec<f64> = (1..n).map(|k| alpha_k(n, h, k)).collect::<Result<_>>()?;
            for (k, w) in a.windows(2).enumerate() {
                ordering.observe(w[1] - w[0] - 1e-9, || Witness::Scalar { n, x: (k + 1) as f64 });
            }
        }
    }
    out.push(strict(
        VerificationReport::new("identities.alpha_k_ordering", ordering.margin, 0.0)
            .with_witness(ordering.witness)
            .with_samples(ordering.count),
    ));

    // α̊ against nH²/(n−1): above it for c = 1, at or below it for c ≤ 0.
    let mut remark = WorstCase::default();
    for n in 4..=30usize {
        for c in [-0.25, 0.0, 1.0] {
            let ctx = SpaceFormContext::new(n, c)?;
            for i in 1..=100 {
                let h = i as f64 / 10.0;
                if !ctx.admits(h) {
                    continue;
                }
                let ring = ring_alpha(ctx, h)?;
                let q = n as f64 * h * h / (n as f64 - 1.0);
                let scale = ring.abs().max(q).max(1.0);
                let m = if c > 0.0 { (ring - q) / scale } else { (q - ring) / scale };
                remark.observe(m, || config_witness(ctx, h, ring));
            }
        }
    }
    out.push(
        VerificationReport::new("identities.delta_branch", remark.margin, 1e-12)
            .with_witness(remark.witness)
            .with_samples(remark.count),
    );

    // 2n + 3nH² > α_{⌊n/2⌋}(n, H).
    let mut problem = WorstCase::default();
    for n in 4..=30usize {
        for i in 1..=40 {
            let h = i as f64 * 0.05;
            problem.observe(problem_gap_check(n, h)?, || Witness::Scalar { n, x: h });
        }
    }
    out.push(strict(
        VerificationReport::new("identities.problem_gap", problem.margin, 0.0)
            .with_witness(problem.witness)
            .with_samples(problem.count),
    ));

    // Clifford tori realize H and α_k.
    let mut clifford_h = WorstCase::default();
    let mut clifford_s = WorstCase::default();
    for n in 4..=30usize {
        for h in [0.1, 0.5, 1.0, 2.0] {
            for k in 1..n {
                let m = clifford_for_mean_curvature(n, k, h)?;
                let want = alpha_k(n, h, k)?;
                let w = || Witness::Config { n, h, c: 1.0, ring_s: k as f64 };
                clifford_h.observe(-(m.h - h).abs(), w);
                clifford_s.observe(-(m.s - want).abs() / want.abs().max(f64::MIN_POSITIVE), w);
            }
        }
    }
    out.push(
        VerificationReport::new("identities.clifford_mean_curvature", clifford_h.margin, 1e-9)
            .with_witness(clifford_h.witness)
            .with_samples(clifford_h.count),
    );
    out.push(
        VerificationReport::new("identities.clifford_scalar_curvature", clifford_s.margin, 1e-8)
            .with_witness(clifford_s.witness)
            .with_samples(clifford_s.count),
    );

    // k = 1 models in every space form sit exactly on S = α and classify as RigidBoundary.
    let mut boundary = WorstCase::default();
    let mut misclassified = 0u64;
    for (ctx, h) in band_grid() {
        let m = boundary_model(ctx, h)?;
        let alpha = alpha_general(ctx, h)?;
        boundary.observe(-(m.s - alpha).abs() / alpha.abs().max(1.0), || config_witness(ctx, h, m.ring_s()));
        if classify(ctx, h, m.s)?.tag != GapTag::RigidBoundary {
            misclassified += 1;
        }
    }
    let r = VerificationReport::new("identities.boundary_model", boundary.margin, 1e-12)
        .with_witness(boundary.witness)
        .with_samples(boundary.count)
        .metric("misclassified", misclassified as f64);
    out.push(if misclassified > 0 { r.fail() } else { r });

    Ok(out)
}

pub fn envelope_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    let mut out = vec![
        certify_case(EnvelopeCase::SMALL_N, cfg.envelope_grid)?,
        certify_case(EnvelopeCase::LARGE_N, cfg.envelope_grid)?,
    ];

    // Endpoint values clear their floors by more than 1e−5.
    let ends = [
        (envelope_small(0.0445)?, 0.1, 0.0445),
        (envelope_small(0.2)?, 0.1, 0.2),
        (envelope_large(0.04305)?, 0.098, 0.04305),
        (envelope_large(0.11)?, 0.098, 0.11),
    ];
    let mut floor = WorstCase::default();
    for (v, f, eta) in ends {
        floor.observe(v - f - 1e-5, || Witness::Scalar { n: 0, x: eta });
    }
    out.push(strict(
        VerificationReport::new("envelope.floor_strictness", floor.margin, 0.0)
            .with_witness(floor.witness)
            .with_samples(4)
            .metric("small_at_threshold", ends[0].0)
            .metric("small_at_cap", ends[1].0)
            .metric("large_at_threshold", ends[2].0)
            .metric("large_at_cap", ends[3].0),
    ));

    // σ = √(η(2−η)) at the η thresholds stays below the σ bounds.
    let sigma = |eta: f64| (eta * (2.0 - eta)).sqrt();
    let small = SIGMA_BOUND - sigma(ETA_BOUND);
    let large = SIGMA_BOUND_LARGE_N - sigma(ETA_BOUND_LARGE_N);
    let (worst, at) = if small <= large { (small, ETA_BOUND) } else { (large, ETA_BOUND_LARGE_N) };
    out.push(strict(
        VerificationReport::new("envelope.sigma_propagation", worst, 0.0)
            .with_witness(Some(Witness::Scalar { n: 0, x: at }))
            .with_samples(2)
            .metric("sigma_at_small_threshold", sigma(ETA_BOUND))
            .metric("sigma_at_large_threshold", sigma(ETA_BOUND_LARGE_N))
            .metric("margin_small", small)
            .metric("margin_large", large)
            .metric("target_margin", SIGMA_PROPAGATION_TARGET),
    ));

    // η caps stay inside the case intervals for every n.
    let mut cap = WorstCase::default();
    for n in 4..=1000usize {
        let bound = EnvelopeCase::for_dim(n)?.eta_cap;
        cap.observe(bound - eta_cap_check(n)?, || Witness::Scalar { n, x: bound });
    }
    out.push(
        VerificationReport::new("envelope.eta_cap", cap.margin, 1e-12)
            .with_witness(cap.witness)
            .with_samples(cap.count),
    );
    Ok(out)
}

/// `(n, H, c)` with `n ∈ 4..=30`, `H ∈ {0.1, 1, 2}`, `c ∈ {−0.5, 0, 1}` and `H² + c > 0`.
fn band_grid() -> impl Iterator<Item = (SpaceFormContext, f64)> {
    (4..=30usize).flat_map(|n| {
        [0.1, 1.0, 2.0].into_iter().flat_map(move |h| {
            [-0.5, 0.0, 1.0]
                .into_iter()
                .map(move |c| (SpaceFormContext::new(n, c).expect("n >= 4"), h))
                .filter(|(ctx, h)| ctx.admits(*h))
        })
    })
}

pub fn band_suite(cfg: &SuiteConfig) -> Result<Vec<VerificationReport>> {
    if cfg.grid == 0 {
        return Err(usage("grid must be at least 1"));
    }
    let mut phi = WorstCase::default();
    let mut eta = WorstCase::default();
    let mut balance = WorstCase::default();
    let mut delta = WorstCase::default();
    let mut spectrum = WorstCase::default();
    let mut hypothesis_failures = 0u64;
    for (ctx, h) in band_grid() {
        let sweep = band_sweep(ctx, h, cfg.grid)?;
        phi.observe(sweep.phi_margin, || sweep.phi_witness.clone());
        eta.observe(sweep.eta_margin, || sweep.eta_witness.clone());

        let ring = ring_alpha(ctx, h)?;
        let scale = ring.abs().max(1.0) * (ctx.n as f64 * (h * h + ctx.c)).abs().max(1.0);
        balance.observe(-simons_rhs(ctx, h, ring)?.abs() / scale, || config_witness(ctx, h, ring));

        let d = delta_band(ctx, h)?;
        delta.observe(d, || config_witness(ctx, h, ring + d));

        let model = boundary_model(ctx, h)?;
        let s = spectrum_of_model(&model)?;
        match lemma2_conclusions(&s) {
            Ok(c) => {
                let m = (ETA_BOUND - c.eta).min(SIGMA_BOUND - c.sigma).min(c.gap_margin);
                spectrum.observe(m, || spectrum_witness(&s));
            }
            Err(_) => hypothesis_failures += 1,
        }
    }
    let points = (cfg.grid as u64) * phi.count;
    let delta_ok = delta.margin > 0.0;
    let delta_report = VerificationReport::new("band.delta_positive", delta.margin, 0.0)
        .with_witness(delta.witness)
        .with_samples(delta.count);
    let spectrum_report = VerificationReport::new("band.boundary_spectrum", spectrum.margin, 0.0)
        .with_witness(spectrum.witness)
        .with_samples(spectrum.count)
        .metric("hypothesis_failures", hypothesis_failures as f64);
    Ok(vec![
        VerificationReport::new("band.phi_bound", phi.margin, MARGIN_TOL)
            .with_witness(phi.witness)
            .with_samples(points),
        VerificationReport::new("band.eta_coefficient", eta.margin, MARGIN_TOL)
            .with_witness(eta.witness)
            .with_samples(points),
        VerificationReport::new("band.simons_balance_at_boundary", balance.margin, 1e-9)
            .with_witness(balance.witness)
            .with_samples(balance.count),
        if delta_ok { delta_report } else { delta_report.fail() },
        if hypothesis_failures > 0 { spectrum_report.fail() } else { strict(spectrum_report) },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for name in Suite::NAMES {
            assert_eq!(name.parse::<Suite>().unwrap().as_str(), name);
        }
        assert!("lemma4".parse::<Suite>().is_err());
    }

    #[test]
    fn deterministic_suites_pass() {
        let cfg = SuiteConfig { samples: 500, ..SuiteConfig::default() };
        for suite in [Suite::Lemma3, Suite::Identities, Suite::Envelope, Suite::Band] {
            for r in run_suite(suite, &cfg).unwrap() {
                assert!(r.passed, "{r:?}");
            }
        }
    }

    #[test]
    fn envelope_suite_reports_endpoint_values() {
        let r = envelope_suite(&SuiteConfig::default()).unwrap();
        let small = r[0].metrics["endpoint_low"];
        let large = r[1].metrics["endpoint_low"];
        assert!((small - 0.10019).abs() < 1e-4, "{small}");
        assert!((large - 0.09806).abs() < 1e-4, "{large}");
    }

    #[test]
    fn lemma2_dims_below_four_are_rejected() {
        let cfg = SuiteConfig { samples: 10, dims: Some(vec![3]), ..SuiteConfig::default() };
        assert!(lemma2_suite(&cfg).is_err());
    }
}
