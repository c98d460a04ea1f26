use proptest::prelude::*;

use cmc_gap::constants::{
    alpha_general, alpha_k, lemma3_sides, ring_alpha, ring_alpha_root_oracle, SpaceFormContext,
};
use cmc_gap::envelope::{envelope_large, envelope_small, f_eta, EnvelopeCase};
use cmc_gap::gap::{classify, clifford_model, spectrum_of_model, GapTag};
use cmc_gap::range::{IntRange, RealRange};
use cmc_gap::spectrum::{
    functionals, lemma1_margins, lemma2_conclusions, lemma2_hypothesis, make_spectrum, phi_decomposition_residual,
    phi_lower_chain_margin, TraceFreeSpectrum,
};

/// Smaller root of `(a − x)² = Kx`, written as `2a²/((2a+K) + √(K(4a+K)))` to avoid cancellation.
fn ring_alpha_oracle(n: usize, h: f64, c: f64) -> f64 {
    let nf = n as f64;
    let a = nf * (h * h + c);
    let k = (nf - 2.0).powi(2) * nf / (nf - 1.0) * h * h;
    2.0 * a * a / ((2.0 * a + k) + (k * (4.0 * a + k)).sqrt())
}

fn raw_vec() -> impl Strategy<Value = Vec<f64>> {
    (3usize..40).prop_flat_map(|n| prop::collection::vec(-10.0f64..10.0, n))
}

fn spectrum() -> impl Strategy<Value = TraceFreeSpectrum> {
    raw_vec().prop_filter_map("degenerate", |v| TraceFreeSpectrum::new(&v).ok())
}

/// Spectra within `spread` of the two-valued extremal, where the Lemma 2 hypothesis tends to hold.
fn near_extremal() -> impl Strategy<Value = TraceFreeSpectrum> {
    (4usize..40).prop_flat_map(|n| (prop::collection::vec(-1.0f64..1.0, n), 0.0f64..0.3)).prop_filter_map(
        "degenerate",
        |(noise, spread)| {
            let base = TraceFreeSpectrum::two_valued(noise.len(), 1).ok()?;
            let raw: Vec<f64> = base.as_slice().iter().zip(&noise).map(|(b, e)| b + spread * e).collect();
            TraceFreeSpectrum::new(&raw).ok()
        },
    )
}

fn admissible_config() -> impl Strategy<Value = (usize, f64, f64)> {
    (4usize..60, 0.01f64..10.0, -1.0f64..2.0).prop_filter("H² + c > 0", |(_, h, c)| h * h + c > 1e-3)
}

proptest! {
    #[test]
    fn spectra_lie_on_the_manifold(raw in raw_vec()) {
        if let Ok(s) = make_spectrum(&raw) {
            let mu = s.as_slice();
            prop_assert!(mu.iter().sum::<f64>().abs() < 1e-12);
            prop_assert!((mu.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(mu.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn normalization_is_scale_and_shift_invariant(raw in raw_vec(), t in 0.01f64..100.0, shift in -5.0f64..5.0) {
        if let (Ok(a), Ok(b)) = (make_spectrum(&raw), make_spectrum(&raw.iter().map(|x| t * x + shift).collect::<Vec<_>>())) {
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn sigma_eta_identity(s in spectrum()) {
        let f = functionals(&s);
        prop_assert!((f.sigma * f.sigma - f.eta * (2.0 - f.eta)).abs() < 1e-10);
        prop_assert!(phi_decomposition_residual(&s).abs() < 1e-10);
    }

    #[test]
    fn lemma1_margins_nonnegative(s in spectrum()) {
        let m = lemma1_margins(&s);
        prop_assert!(m.min() >= -1e-9, "{m:?}");
        prop_assert!(phi_lower_chain_margin(&s) >= -1e-9);
    }

    #[test]
    fn lemma2_conclusions_follow_from_hypothesis(s in near_extremal()) {
        if lemma2_hypothesis(&s).unwrap() {
            let c = lemma2_conclusions(&s).unwrap();
            prop_assert!(c.all(), "{c:?}");
        } else {
            prop_assert!(lemma2_conclusions(&s).is_err());
        }
    }

    #[test]
    fn alpha_k_strictly_increasing(n in 4usize..40, h in 0.001f64..20.0) {
        let a: Vec<f64> = (1..n).map(|k| alpha_k(n, h, k).unwrap()).collect();
        prop_assert!(a.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn ring_alpha_matches_independent_root((n, h, c) in admissible_config()) {
        let ctx = SpaceFormContext::new(n, c).unwrap();
        let ring = ring_alpha(ctx, h).unwrap();
        let scale = ring.abs().max(1.0);
        prop_assert!((ring - ring_alpha_oracle(n, h, c)).abs() / scale < 1e-10);
        prop_assert!((ring - ring_alpha_root_oracle(ctx, h, 1e-15 * scale).unwrap()).abs() / scale < 1e-10);
        prop_assert!(ring >= -1e-12 * scale);
    }

    #[test]
    fn lemma3_identity((n, h, c) in admissible_config()) {
        let ctx = SpaceFormContext::new(n, c).unwrap();
        prop_assert!(lemma3_sides(ctx, h).unwrap().relative_residual() < 1e-10);
    }

    #[test]
    fn unit_sphere_alpha_is_alpha_1(n in 4usize..60, h in 0.0f64..10.0) {
        let a = alpha_general(SpaceFormContext::sphere(n).unwrap(), h).unwrap();
        prop_assert!((a - alpha_k(n, h, 1).unwrap()).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn classification_is_monotone_in_s((n, h, c) in admissible_config(), a in 0.0f64..50.0, b in 0.0f64..50.0) {
        let ctx = SpaceFormContext::new(n, c).unwrap();
        let floor = n as f64 * h * h;
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let rank = |t: GapTag| t as u8;
        let r_lo = classify(ctx, h, floor + lo).unwrap();
        let r_hi = classify(ctx, h, floor + hi).unwrap();
        prop_assert!(rank(r_lo.tag) <= rank(r_hi.tag));
        prop_assert_eq!(classify(ctx, h, r_lo.alpha).unwrap().tag, GapTag::RigidBoundary);
    }

    #[test]
    fn clifford_models_are_consistent(n in 4usize..30, k_frac in 0.0f64..1.0, lambda in 0.05f64..20.0) {
        let k = 1 + ((n - 2) as f64 * k_frac) as usize;
        let m = clifford_model(n, k, lambda).unwrap();
        let (nf, kf) = (n as f64, k as f64);
        let h = ((nf - kf) * lambda - kf / lambda) / nf;
        prop_assert!((m.h - h.abs()).abs() < 1e-12 * lambda.max(1.0 / lambda));
        let sum_sq: f64 = m.principal_curvatures.iter().map(|x| x * x).sum();
        prop_assert!((m.s - sum_sq).abs() <= 1e-12 * m.s);
        if let Ok(s) = spectrum_of_model(&m) {
            prop_assert_eq!(s.n(), n);
        }
    }

    #[test]
    fn envelopes_sit_below_f(n in 4usize..2000, eta in 0.0f64..0.2) {
        let case = EnvelopeCase::for_dim(n).unwrap();
        if eta <= case.eta_cap {
            let env = if n <= 20 { envelope_small(eta) } else { envelope_large(eta) }.unwrap();
            prop_assert!(env <= f_eta(n, eta).unwrap() + 1e-12);
        }
    }

    #[test]
    fn real_range_counts(a in -10.0f64..10.0, len in 0.0f64..5.0, step in 0.01f64..1.0) {
        let r: RealRange = format!("{a}..{}:{step}", a + len).parse().unwrap();
        let v = r.values();
        prop_assert_eq!(v.len(), ((len / step) + 1e-9).floor() as usize + 1);
        prop_assert!(v.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn int_range_counts(a in 0usize..100, len in 0usize..100, step in 1usize..10) {
        let r: IntRange = format!("{a}..{}:{step}", a + len).parse().unwrap();
        prop_assert_eq!(r.values().len(), len / step + 1);
    }
}
