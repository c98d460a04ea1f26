//! Multi-start falsification search for the Lemma 1 and Lemma 2 margins.
//!
//! Starts are the `n − 1` two-valued spectra followed by `samples` Gaussian
//! draws. Draw `i` uses its own ChaCha stream `(seed, i)`, so the outcome does
//! not depend on how rayon splits the index range. From each start a projected
//! descent runs on the manifold: the objective gradient is projected onto the
//! tangent space `{v : Σvᵢ = 0, Σμᵢvᵢ = 0}`, a step of fixed length is taken
//! along its negative direction, and the point is re-centered and re-normalized.
//! Non-improving steps halve the step length.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::{
    center, lemma2_threshold, norm2, DimConstants, TraceFreeSpectrum, ETA_BOUND, GAP_CONSTANT,
    SIGMA_BOUND,
};
use crate::constants::require_theorem_dim;
use crate::error::{usage, Result};
use crate::report::{VerificationReport, WorstCase, Witness, MARGIN_TOL};

/// The margin a search drives down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// `√(n(n−1))/(n−2)·φ − η`
    Lemma1Left,
    /// `η − σ²/2`
    Lemma1Right,
    /// `√(n(n−1))·φ − η[3n − 3(n+1)η − 2√(n(n−1))σ]`
    Lemma1Second,
    /// `0.0445 − η` subject to the Lemma 2 hypothesis.
    Lemma2Eta,
    /// `0.295 − σ` subject to the Lemma 2 hypothesis.
    Lemma2Sigma,
    /// `(μ₂ − μ₁) − 2/(3−3⁻⁹)·√(n/(n−1))` subject to the Lemma 2 hypothesis.
    Lemma2Gap,
}

impl Objective {
    pub const LEMMA1: [Objective; 3] = [Self::Lemma1Left, Self::Lemma1Right, Self::Lemma1Second];
    pub const LEMMA2: [Objective; 3] = [Self::Lemma2Eta, Self::Lemma2Sigma, Self::Lemma2Gap];

    pub fn id(self) -> &'static str {
        match self {
            Self::Lemma1Left => "lemma1.left",
            Self::Lemma1Right => "lemma1.right",
            Self::Lemma1Second => "lemma1.second",
            Self::Lemma2Eta => "lemma2.eta",
            Self::Lemma2Sigma => "lemma2.sigma",
            Self::Lemma2Gap => "lemma2.gap",
        }
    }

    pub fn is_constrained(self) -> bool {
        matches!(self, Self::Lemma2Eta | Self::Lemma2Sigma | Self::Lemma2Gap)
    }

    fn min_dim(self) -> usize {
        if self.is_constrained() {
            4
        } else {
            3
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchConfig {
    pub samples: u64,
    pub seed: u64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_iters: usize,
    /// Multiplier on the hypothesis violation `max(0, φ − threshold)`.
    pub penalty: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            seed: 0,
            initial_step: 0.1,
            min_step: 1e-12,
            max_iters: 200,
            penalty: 1e4,
        }
    }
}

/// Objective evaluation on an unsorted point of the manifold.
struct Evaluator {
    objective: Objective,
    k: DimConstants,
    threshold: f64,
    penalty: f64,
}

#[derive(Debug, Clone, Copy)]
struct Point {
    /// Penalized objective.
    value: f64,
    /// Unpenalized margin.
    margin: f64,
    feasible: bool,
}

/// Indices of the smallest and second smallest entries.
fn two_smallest(mu: &[f64]) -> (usize, usize) {
    let (mut i1, mut i2) = if mu[0] <= mu[1] { (0, 1) } else { (1, 0) };
    for (i, &x) in mu.iter().enumerate().skip(2) {
        if x < mu[i1] {
            i2 = i1;
            i1 = i;
        } else if x < mu[i2] {
            i2 = i;
        }
    }
    (i1, i2)
}

impl Evaluator {
    fn new(n: usize, objective: Objective, penalty: f64) -> Result<Self> {
        let threshold = if objective.is_constrained() { lemma2_threshold(n)? } else { f64::INFINITY };
        Ok(Self { objective, k: DimConstants::new(n), threshold, penalty })
    }

    fn eval(&self, mu: &[f64]) -> Point {
        let k = &self.k;
        let (i1, i2) = two_smallest(mu);
        let mu1 = mu[i1];
        let shift = mu1 / (k.n - 1.0);
        let mut cubes = 0.0;
        let mut sigma2 = 0.0;
        for (i, &x) in mu.iter().enumerate() {
            cubes += x * x * x;
            if i != i1 {
                sigma2 += (x + shift) * (x + shift);
            }
        }
        let phi = cubes + k.phi_shift;
        let eta = k.r * mu1 + 1.0;
        let sigma = sigma2.sqrt();
        let margin = match self.objective {
            Objective::Lemma1Left => k.q / (k.n - 2.0) * phi - eta,
            Objective::Lemma1Right => eta - sigma2 / 2.0,
            Objective::Lemma1Second => {
                k.q * phi - eta * (3.0 * k.n - 3.0 * (k.n + 1.0) * eta - 2.0 * k.q * sigma)
            }
            Objective::Lemma2Eta => ETA_BOUND - eta,
            Objective::Lemma2Sigma => SIGMA_BOUND - sigma,
            Objective::Lemma2Gap => mu[i2] - mu1 - GAP_CONSTANT * k.r,
        };
        let violation = (phi - self.threshold).max(0.0);
        Point {
            value: margin + self.penalty * violation,
            margin,
            feasible: violation == 0.0,
        }
    }

    /// Ambient gradient of the penalized objective.
    ///
    /// On the manifold `σ² = η(2 − η)`, so `σ` is differentiated as a function of `μ₁`;
    /// both expressions share the same tangential gradient.
    fn grad(&self, mu: &[f64], out: &mut [f64]) {
        let k = &self.k;
        let (i1, i2) = two_smallest(mu);
        let eta = k.r * mu[i1] + 1.0;
        let sigma = (eta * (2.0 - eta)).max(0.0).sqrt();
        let phi = mu.iter().map(|x| x * x * x).sum::<f64>() + k.phi_shift;
        // dσ/dη, guarded at the extremal point where σ = 0
        let dsigma = (1.0 - eta) / sigma.max(1e-12);

        let (phi_coef, d_eta) = match self.objective {
            Objective::Lemma1Left => (k.q / (k.n - 2.0), -1.0),
            Objective::Lemma1Right => (0.0, eta),
            Objective::Lemma1Second => {
                let d_eta_sigma = if sigma > 0.0 { sigma + eta * dsigma } else { 0.0 };
                (
                    k.q,
                    -3.0 * k.n + 6.0 * (k.n + 1.0) * eta + 2.0 * k.q * d_eta_sigma,
                )
            }
            Objective::Lemma2Eta => (0.0, -1.0),
            Objective::Lemma2Sigma => (0.0, -dsigma),
            Objective::Lemma2Gap => (0.0, 0.0),
        };
        let phi_coef = if phi > self.threshold { phi_coef + self.penalty } else { phi_coef };
        for (g, &x) in out.iter_mut().zip(mu) {
            *g = 3.0 * phi_coef * x * x;
        }
        out[i1] += d_eta * k.r;
        if self.objective == Objective::Lemma2Gap {
            out[i1] -= 1.0;
            out[i2] += 1.0;
        }
    }
}

/// Removes the components of `g` along the all-ones vector and along `mu`.
fn project_tangent(mu: &[f64], g: &mut [f64]) {
    center(g);
    let along: f64 = g.iter().zip(mu).map(|(a, b)| a * b).sum();
    g.iter_mut().zip(mu).for_each(|(a, b)| *a -= along * b);
}

/// Re-centers and re-normalizes in place; false if the point collapsed.
fn retract(v: &mut [f64]) -> bool {
    center(v);
    let norm = norm2(v);
    if !(norm > 0.0) || !norm.is_finite() {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    true
}

/// Result of one projected descent run.
#[derive(Debug, Clone, PartialEq)]
pub struct DescentOutcome {
    pub spectrum: TraceFreeSpectrum,
    /// Penalized objective at the final point.
    pub value: f64,
    pub iterations: usize,
    /// Penalized objective at the start and after every accepted step.
    pub accepted_values: Vec<f64>,
}

struct Workspace {
    grad: Vec<f64>,
    trial: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self { grad: vec![0.0; n], trial: vec![0.0; n] }
    }
}

/// Runs the descent from `mu` (modified in place), calling `visit` on the start
/// and on every accepted iterate. Returns the iteration count.
fn descend(
    eval: &Evaluator,
    cfg: &SearchConfig,
    mu: &mut Vec<f64>,
    ws: &mut Workspace,
    mut visit: impl FnMut(&[f64], Point),
) -> usize {
    let mut current = eval.eval(mu);
    visit(mu, current);
    let mut step = cfg.initial_step;
    let mut iters = 0;
    while iters < cfg.max_iters && step >= cfg.min_step {
        iters += 1;
        eval.grad(mu, &mut ws.grad);
        project_tangent(mu, &mut ws.grad);
        let gnorm = norm2(&ws.grad);
        if !(gnorm > 0.0) || !gnorm.is_finite() {
            break;
        }
        for ((t, &x), &g) in ws.trial.iter_mut().zip(mu.iter()).zip(&ws.grad) {
            *t = x - step * g / gnorm;
        }
        if !retract(&mut ws.trial) {
            step *= 0.5;
            continue;
        }
        let candidate = eval.eval(&ws.trial);
        if candidate.value < current.value {
            std::mem::swap(mu, &mut ws.trial);
            current = candidate;
            visit(mu, current);
        } else {
            step *= 0.5;
        }
    }
    iters
}

/// Projected descent of `objective` from `start`, keeping the full accepted-value trace.
pub fn local_descent(
    start: &TraceFreeSpectrum,
    objective: Objective,
    cfg: &SearchConfig,
) -> Result<DescentOutcome> {
    let n = start.n();
    if n < objective.min_dim() {
        return Err(usage(format!("{} needs n >= {}, got {n}", objective.id(), objective.min_dim())));
    }
    let eval = Evaluator::new(n, objective, cfg.penalty)?;
    let mut mu = start.as_slice().to_vec();
    let mut ws = Workspace::new(n);
    let mut accepted_values = Vec::new();
    let iterations = descend(&eval, cfg, &mut mu, &mut ws, |_, p| accepted_values.push(p.value));
    let value = *accepted_values.last().expect("start is always visited");
    Ok(DescentOutcome {
        spectrum: TraceFreeSpectrum::new(&mu)?,
        value,
        iterations,
        accepted_values,
    })
}

/// Standard-normal start for sample `index`, drawn from stream `(seed, index)`.
fn gaussian_start(n: usize, seed: u64, index: u64, out: &mut [f64]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    for x in out.iter_mut().take(n) {
        *x = rng.sample(StandardNormal);
    }
}

#[derive(Debug, Clone)]
struct Found {
    mu: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
struct Tally {
    worst: WorstCase<Found>,
    feasible: u64,
    iterations: u64,
}

impl Tally {
    fn merge(mut self, other: Self) -> Self {
        self.worst = self.worst.merge(other.worst);
        self.feasible += other.feasible;
        self.iterations += other.iterations;
        self
    }
}

fn run_start(eval: &Evaluator, cfg: &SearchConfig, mut mu: Vec<f64>) -> Tally {
    let mut tally = Tally::default();
    let mut ws = Workspace::new(mu.len());
    if !retract(&mut mu) {
        return tally;
    }
    let iters = descend(eval, cfg, &mut mu, &mut ws, |x, p| {
        if p.feasible {
            tally.feasible += 1;
            tally.worst.observe(p.margin, || Found { mu: x.to_vec() });
        }
    });
    tally.iterations = iters as u64;
    tally
}

/// Minimizes the selected margin over deterministic two-valued seeds plus `cfg.samples`
/// Gaussian starts. The report fails when the worst feasible margin is below `−1e−9`.
pub fn counterexample_search(
    n: usize,
    objective: Objective,
    cfg: &SearchConfig,
) -> Result<VerificationReport> {
    if n < objective.min_dim() {
        return Err(usage(format!("{} needs n >= {}, got {n}", objective.id(), objective.min_dim())));
    }
    if objective.is_constrained() {
        require_theorem_dim(n)?;
    }
    if cfg.samples == 0 {
        return Err(usage("samples must be at least 1"));
    }
    let eval = Evaluator::new(n, objective, cfg.penalty)?;

    let seeded = (1..n)
        .map(|k| {
            let s = TraceFreeSpectrum::two_valued(n, k).expect("k in range");
            run_start(&eval, cfg, s.into_vec())
        })
        .fold(Tally::default(), Tally::merge);

    let sampled = (0..cfg.samples)
        .into_par_iter()
        .map(|i| {
            let mut start = vec![0.0; n];
            gaussian_start(n, cfg.seed, i, &mut start);
            run_start(&eval, cfg, start)
        })
        .reduce(Tally::default, Tally::merge);

    let tally = seeded.merge(sampled);
    let witness = tally
        .worst
        .witness
        .as_ref()
        .and_then(|f| TraceFreeSpectrum::new(&f.mu).ok());

    let mut report = VerificationReport::new(
        format!("{}.n{n}", objective.id()),
        tally.worst.margin,
        MARGIN_TOL,
    )
    .with_samples(cfg.samples)
    .with_seed(cfg.seed)
    .metric("n", n as f64)
    .metric("deterministic_seeds", (n - 1) as f64)
    .metric("feasible_points", tally.feasible as f64)
    .metric("descent_iterations", tally.iterations as f64);

    if let Some(w) = &witness {
        let f = w.functionals();
        let extremal = TraceFreeSpectrum::two_valued(n, 1).expect("n >= 3");
        let dist = w
            .as_slice()
            .iter()
            .zip(extremal.as_slice())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        report = report
            .metric("witness_phi", f.phi)
            .metric("witness_eta", f.eta)
            .metric("witness_sigma", f.sigma)
            .metric("witness_gap", w.mu2() - w.mu1())
            .metric("distance_to_extremal", dist);
    }
    if tally.feasible == 0 {
        // no admissible point was reached, so nothing was tested
        report = report.fail();
    }
    Ok(report.with_witness(witness.map(|w| Witness::Spectrum { n, mu: w.into_vec() })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{functionals, lemma1_margins};

    #[test]
    fn two_smallest_handles_order() {
        assert_eq!(two_smallest(&[3.0, 1.0, 2.0, 0.5]), (3, 1));
        assert_eq!(two_smallest(&[0.0, 1.0, 2.0]), (0, 1));
        assert_eq!(two_smallest(&[2.0, 1.0, 0.0]), (2, 1));
    }

    #[test]
    fn evaluator_matches_public_margins() {
        let s = TraceFreeSpectrum::new(&[0.3, -1.2, 0.8, 0.1, -0.4, 0.9]).unwrap();
        let m = lemma1_margins(&s);
        let mut shuffled = s.as_slice().to_vec();
        shuffled.reverse();
        for (obj, want) in [
            (Objective::Lemma1Left, m.left),
            (Objective::Lemma1Right, m.right),
            (Objective::Lemma1Second, m.second),
        ] {
            let e = Evaluator::new(6, obj, 1e4).unwrap();
            let got = e.eval(&shuffled).margin;
            assert!((got - want).abs() < 1e-13, "{obj:?}: {got} vs {want}");
        }
    }

    /// Central differences of the on-manifold objective along tangent directions.
    #[test]
    fn tangential_gradient_matches_finite_differences() {
        let base = TraceFreeSpectrum::new(&[0.7, -1.1, 0.2, 0.35, -0.15]).unwrap();
        let mu = base.as_slice().to_vec();
        let dirs = [[1.0, -2.0, 0.5, 0.3, 0.2], [0.0, 1.0, -1.0, 0.4, -0.4]];
        for obj in [
            Objective::Lemma1Left,
            Objective::Lemma1Right,
            Objective::Lemma1Second,
            Objective::Lemma2Eta,
            Objective::Lemma2Sigma,
            Objective::Lemma2Gap,
        ] {
            let e = Evaluator { penalty: 0.0, ..Evaluator::new(5, obj, 0.0).unwrap() };
            let mut g = vec![0.0; 5];
            e.grad(&mu, &mut g);
            project_tangent(&mu, &mut g);
            for d in dirs {
                let mut d = d.to_vec();
                project_tangent(&mu, &mut d);
                let h = 1e-6;
                let along = |t: f64| {
                    let mut p: Vec<f64> = mu.iter().zip(&d).map(|(a, b)| a + t * b).collect();
                    assert!(retract(&mut p));
                    e.eval(&p).margin
                };
                let fd = (along(h) - along(-h)) / (2.0 * h);
                let analytic: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
                assert!((fd - analytic).abs() < 1e-5 * (1.0 + fd.abs()), "{obj:?}: fd {fd} vs {analytic}");
            }
        }
    }

    #[test]
    fn descent_never_increases_objective() {
        let cfg = SearchConfig::default();
        for (i, obj) in Objective::LEMMA1.into_iter().chain(Objective::LEMMA2).enumerate() {
            let mut raw = vec![0.0; 8];
            gaussian_start(8, 7, i as u64, &mut raw);
            let start = TraceFreeSpectrum::new(&raw).unwrap();
            let out = local_descent(&start, obj, &cfg).unwrap();
            assert!(out.accepted_values.windows(2).all(|w| w[1] < w[0]));
            assert!(out.iterations <= cfg.max_iters);
            assert!(out.value <= out.accepted_values[0]);
        }
    }

    #[test]
    fn descent_reaches_lemma1_equality_case() {
        let cfg = SearchConfig::default();
        let start = TraceFreeSpectrum::new(&[-2.0, 0.3, 0.5, 0.4, 0.8]).unwrap();
        let out = local_descent(&start, Objective::Lemma1Left, &cfg).unwrap();
        let f = functionals(&out.spectrum);
        assert!(out.value < 1e-3, "left margin after descent {}", out.value);
        assert!(f.eta < 1e-2);
    }

    #[test]
    fn search_is_reproducible_and_seed_sensitive() {
        let cfg = SearchConfig { samples: 200, seed: 11, ..SearchConfig::default() };
        let a = counterexample_search(6, Objective::Lemma1Second, &cfg).unwrap();
        let b = counterexample_search(6, Objective::Lemma1Second, &cfg).unwrap();
        assert_eq!(a, b);
        let mut x = vec![0.0; 6];
        let mut y = vec![0.0; 6];
        gaussian_start(6, 11, 3, &mut x);
        gaussian_start(6, 12, 3, &mut y);
        assert_ne!(x, y);
    }

    #[test]
    fn search_rejects_bad_arguments() {
        let cfg = SearchConfig { samples: 0, ..SearchConfig::default() };
        assert!(counterexample_search(5, Objective::Lemma1Left, &cfg).is_err());
        let cfg = SearchConfig::default();
        assert!(counterexample_search(3, Objective::Lemma2Eta, &cfg).is_err());
        assert!(counterexample_search(2, Objective::Lemma1Left, &cfg).is_err());
    }

    #[test]
    fn small_lemma2_search_stays_feasible() {
        let cfg = SearchConfig { samples: 300, ..SearchConfig::default() };
        let r = counterexample_search(10, Objective::Lemma2Eta, &cfg).unwrap();
        assert!(r.passed, "{r:?}");
        let Some(Witness::Spectrum { mu, .. }) = &r.witness else { panic!("no witness") };
        let s = TraceFreeSpectrum::new(mu).unwrap();
        assert!(functionals(&s).phi <= lemma2_threshold(10).unwrap() + 1e-12);
    }
}
