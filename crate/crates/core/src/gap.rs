//! Gap-theorem machinery at the level of evaluable algebra: the Simons balance,
//! the two inequality chains used inside the forbidden band, classification of
//! `(n, H, c, S)` and the two-curvature model hypersurfaces that realize the
//! boundary values.

use serde::Serialize;

use crate::constants::{
    alpha_general, alpha_k, b_n, delta_band, lambda_k, ring_alpha, CmcInvariants, SpaceFormContext,
};
use crate::envelope::closed_grid;
use crate::error::{usage, Error, Result};
use crate::report::Witness;
use crate::spectrum::TraceFreeSpectrum;

/// Default relative tolerance of [`classify`], scaled by `max(1, α)`.
pub const CLASSIFY_REL_TOL: f64 = 1e-6;

fn require_band_context(ctx: SpaceFormContext, h: f64) -> Result<()> {
    ctx.require_theorem_range()?;
    if !ctx.admits(h) {
        return Err(usage(format!("H² + c = {} must be positive", h * h + ctx.c)));
    }
    Ok(())
}

/// Right side of `|∇h|² + nH·S̊^{3/2}·φ = S̊[S̊ − n(H²+c) + (n−2)√(n/(n−1)·S̊)·H]`.
pub fn simons_rhs(ctx: SpaceFormContext, h: f64, ring_s: f64) -> Result<f64> {
    if !(ring_s >= 0.0) {
        return Err(Error::InvalidInvariants(format!("S̊ = {ring_s} must be nonnegative")));
    }
    Ok(ring_s * balance_bracket(ctx, h.abs(), ring_s))
}

fn balance_bracket(ctx: SpaceFormContext, h: f64, ring_s: f64) -> f64 {
    let n = ctx.n as f64;
    ring_s - n * (h * h + ctx.c) + (n - 2.0) * (n / (n - 1.0) * ring_s).sqrt() * h
}

/// Interval `[α̊, α̊ + δ]` of admissible `S̊` inside the forbidden band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandInterval {
    pub ring_alpha: f64,
    pub delta: f64,
}

impl BandInterval {
    pub fn new(ctx: SpaceFormContext, h: f64) -> Result<Self> {
        require_band_context(ctx, h)?;
        Ok(Self { ring_alpha: ring_alpha(ctx, h)?, delta: delta_band(ctx, h)? })
    }

    pub fn contains(&self, ring_s: f64) -> bool {
        let tol = 1e-12 * self.ring_alpha.abs().max(1.0);
        ring_s >= self.ring_alpha - tol && ring_s <= self.ring_alpha + self.delta + tol
    }

    /// `points` values of `S̊` covering the band, endpoints included.
    pub fn grid(&self, points: usize) -> impl Iterator<Item = f64> {
        closed_grid(self.ring_alpha, self.ring_alpha + self.delta, points)
    }
}

fn band_member(ctx: SpaceFormContext, h: f64, ring_s: f64) -> Result<()> {
    let band = BandInterval::new(ctx, h)?;
    if band.contains(ring_s) {
        Ok(())
    } else {
        Err(usage(format!(
            "S̊ = {ring_s} lies outside the band [{}, {}]",
            band.ring_alpha,
            band.ring_alpha + band.delta
        )))
    }
}

/// `(lhs, rhs)` of `S̊ − n(H²+c) + (n−2)√(n/(n−1)·S̊)·H ≤ (B_n·n/2)·√(n/(n−1)·S̊)·H`.
///
/// Together with the Simons balance this forces `φ ≤ (B_n/2)·√(n/(n−1))`.
pub fn band_phi_bound(ctx: SpaceFormContext, h: f64, ring_s: f64) -> Result<(f64, f64)> {
    band_member(ctx, h, ring_s)?;
    let h = h.abs();
    let n = ctx.n as f64;
    let lhs = balance_bracket(ctx, h, ring_s);
    let rhs = b_n(ctx.n)? * n / 2.0 * (n / (n - 1.0) * ring_s).sqrt() * h;
    Ok((lhs, rhs))
}

/// `(value, floor)` of `√((n−1)/n)·(n(H²+c) − S̊) − 2(n−1)H√S̊ ≥ −(6/5)·nH√S̊`.
pub fn band_eta_coefficient(ctx: SpaceFormContext, h: f64, ring_s: f64) -> Result<(f64, f64)> {
    band_member(ctx, h, ring_s)?;
    let h = h.abs();
    let n = ctx.n as f64;
    let root = ring_s.sqrt();
    let value = ((n - 1.0) / n).sqrt() * (n * (h * h + ctx.c) - ring_s) - 2.0 * (n - 1.0) * h * root;
    let floor = -1.2 * n * h * root;
    Ok((value, floor))
}

/// Worst margins of both band inequalities over a grid of the band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandSweep {
    /// `min(rhs − lhs)` of [`band_phi_bound`].
    pub phi_margin: f64,
    /// `min(value − floor)` of [`band_eta_coefficient`].
    pub eta_margin: f64,
    pub phi_witness: Witness,
    pub eta_witness: Witness,
    pub points: usize,
}

pub fn band_sweep(ctx: SpaceFormContext, h: f64, points: usize) -> Result<BandSweep> {
    if points == 0 {
        return Err(usage("band sweep needs at least one point"));
    }
    let band = BandInterval::new(ctx, h)?;
    let at = |ring_s| Witness::Config { n: ctx.n, h, c: ctx.c, ring_s };
    let mut phi = (f64::INFINITY, at(f64::NAN));
    let mut eta = (f64::INFINITY, at(f64::NAN));
    for ring_s in band.grid(points) {
        let (lhs, rhs) = band_phi_bound(ctx, h, ring_s)?;
        if rhs - lhs < phi.0 {
            phi = (rhs - lhs, at(ring_s));
        }
        let (value, floor) = band_eta_coefficient(ctx, h, ring_s)?;
        if value - floor < eta.0 {
            eta = (value - floor, at(ring_s));
        }
    }
    Ok(BandSweep {
        phi_margin: phi.0,
        eta_margin: eta.0,
        phi_witness: phi.1,
        eta_witness: eta.1,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GapTag {
    /// `S < α`
    Subcritical,
    /// `S = α` within tolerance
    RigidBoundary,
    /// `α < S ≤ α + δ`: excluded for complete hypersurfaces with constant H and S
    ForbiddenBand,
    /// `S > α + δ`
    Above,
}

impl GapTag {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Subcritical => "Subcritical",
            Self::RigidBoundary => "RigidBoundary",
            Self::ForbiddenBand => "ForbiddenBand",
            Self::Above => "Above",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapRegion {
    pub tag: GapTag,
    pub alpha: f64,
    pub band_top: f64,
    /// `S − α`
    pub to_alpha: f64,
    /// `S − (α + δ)`
    pub to_band_top: f64,
    pub tolerance: f64,
}

/// Classifies the full squared norm `S` against `α` and `α + δ`.
///
/// The band is open at `α` and closed at `α + δ`; `rel_tol` is scaled by `max(1, α)`.
pub fn classify_with_tol(ctx: SpaceFormContext, h: f64, s: f64, rel_tol: f64) -> Result<GapRegion> {
    require_band_context(ctx, h)?;
    CmcInvariants::new(ctx.n, h, s)?;
    if !(rel_tol >= 0.0) {
        return Err(usage(format!("tolerance {rel_tol} must be nonnegative")));
    }
    let alpha = alpha_general(ctx, h)?;
    let band_top = alpha + delta_band(ctx, h)?;
    let tol = rel_tol * alpha.abs().max(1.0);
    let tag = if s < alpha - tol {
        GapTag::Subcritical
    } else if (s - alpha).abs() <= tol {
        GapTag::RigidBoundary
    } else if s <= band_top + tol {
        GapTag::ForbiddenBand
    } else {
        GapTag::Above
    };
    Ok(GapRegion { tag, alpha, band_top, to_alpha: s - alpha, to_band_top: s - band_top, tolerance: tol })
}

pub fn classify(ctx: SpaceFormContext, h: f64, s: f64) -> Result<GapRegion> {
    classify_with_tol(ctx, h, s, CLASSIFY_REL_TOL)
}

/// Isoparametric model with two principal curvatures:
/// `λ` with multiplicity `n − k` and `−c/λ` with multiplicity `k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelHypersurface {
    pub n: usize,
    pub k: usize,
    pub lambda: f64,
    pub c: f64,
    /// Ascending; all signs flipped when needed to make `H ≥ 0`.
    pub principal_curvatures: Vec<f64>,
    pub h: f64,
    pub s: f64,
    pub flipped: bool,
}

impl ModelHypersurface {
    pub fn new(n: usize, k: usize, lambda: f64, c: f64) -> Result<Self> {
        SpaceFormContext::new(n, c)?;
        if k == 0 || k >= n {
            return Err(usage(format!("k={k} must satisfy 1 <= k <= n-1")));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(usage(format!("principal curvature parameter λ={lambda} must be positive")));
        }
        let other = -c / lambda;
        let (nf, kf) = (n as f64, k as f64);
        let h = ((nf - kf) * lambda + kf * other) / nf;
        let s = (nf - kf) * lambda * lambda + kf * other * other;
        let flipped = h < 0.0;
        let sign = if flipped { -1.0 } else { 1.0 };
        let mut principal_curvatures: Vec<f64> = std::iter::repeat_n(sign * lambda, n - k)
            .chain(std::iter::repeat_n(sign * other, k))
            .collect();
        principal_curvatures.sort_unstable_by(f64::total_cmp);
        Ok(Self { n, k, lambda, c, principal_curvatures, h: sign * h, s, flipped })
    }

    pub fn ring_s(&self) -> f64 {
        (self.s - self.n as f64 * self.h * self.h).max(0.0)
    }
}

/// Clifford torus `S^{n−k} × S^k` in the unit sphere, curvatures `{λ ×(n−k), −1/λ ×k}`.
pub fn clifford_model(n: usize, k: usize, lambda: f64) -> Result<ModelHypersurface> {
    ModelHypersurface::new(n, k, lambda, 1.0)
}

/// Clifford torus with `λ = λ_k(n, H)`, so that its mean curvature is `|H|` and `S = α_k(n, H)`.
pub fn clifford_for_mean_curvature(n: usize, k: usize, h: f64) -> Result<ModelHypersurface> {
    clifford_model(n, k, lambda_k(n, h, k)?)
}

/// The `k = 1` model in `F^{n+1}(c)` with mean curvature `|H|`; its `S` equals `α(n, H, c)`.
pub fn boundary_model(ctx: SpaceFormContext, h: f64) -> Result<ModelHypersurface> {
    let n = ctx.n as f64;
    let nh = n * h.abs();
    let radicand = nh * nh + 4.0 * (n - 1.0) * ctx.c;
    if radicand < 0.0 {
        return Err(Error::Domain {
            n: ctx.n,
            h,
            c: ctx.c,
            reason: "no real principal curvature solves (n−1)λ² − nHλ − c = 0".into(),
        });
    }
    let lambda = (nh + radicand.sqrt()) / (2.0 * (n - 1.0));
    ModelHypersurface::new(ctx.n, 1, lambda, ctx.c)
}

/// `S = (g − 1)n` for a closed minimal isoparametric hypersurface of the unit sphere
/// with `g` distinct principal curvatures.
pub fn muenzner_s(n: usize, g: usize) -> Result<f64> {
    if !matches!(g, 1 | 2 | 3 | 4 | 6) {
        return Err(usage(format!("g={g} is not one of 1, 2, 3, 4, 6")));
    }
    Ok(((g - 1) * n) as f64)
}

/// `μᵢ = (λᵢ − H)/√S̊` for the model's principal curvatures.
pub fn spectrum_of_model(m: &ModelHypersurface) -> Result<TraceFreeSpectrum> {
    let ring = m.ring_s();
    if ring <= 1e-14 * m.s.max(1.0) {
        return Err(Error::Degenerate(format!(
            "model (n={}, k={}, λ={}) is totally umbilical, S̊ = {ring}",
            m.n, m.k, m.lambda
        )));
    }
    let scale = ring.sqrt();
    let raw: Vec<f64> = m.principal_curvatures.iter().map(|l| (l - m.h) / scale).collect();
    TraceFreeSpectrum::new(&raw)
}

/// Nearest unit-sphere Clifford torus to `S` at mean curvature `H`: `(k, λ_k, α_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NearestModel {
    pub k: usize,
    pub lambda: f64,
    pub s: f64,
}

pub fn nearest_model(ctx: SpaceFormContext, h: f64, s: f64) -> Result<NearestModel> {
    if ctx.c == 1.0 {
        let mut best: Option<NearestModel> = None;
        for k in 1..ctx.n {
            let cand = NearestModel { k, lambda: lambda_k(ctx.n, h, k)?, s: alpha_k(ctx.n, h, k)? };
            if best.is_none_or(|b| (cand.s - s).abs() < (b.s - s).abs()) {
                best = Some(cand);
            }
        }
        best.ok_or_else(|| usage("no model for n < 2"))
    } else {
        let m = boundary_model(ctx, h)?;
        Ok(NearestModel { k: 1, lambda: m.lambda, s: m.s })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::PinchingProfile;
    use crate::spectrum::{functionals, lemma2_conclusions};
    use approx::assert_abs_diff_eq;

    fn sphere4() -> SpaceFormContext {
        SpaceFormContext::sphere(4).unwrap()
    }

    const RING_ALPHA_4: f64 = 3.611_329_837_161_092;
    const RING_TOP_4: f64 = 3.877_996_503_827_758;

    #[test]
    fn simons_rhs_examples() {
        let at_boundary = simons_rhs(sphere4(), 1.0, ring_alpha(sphere4(), 1.0).unwrap()).unwrap();
        assert!(at_boundary.abs() < 1e-9 * RING_ALPHA_4);
        assert_abs_diff_eq!(simons_rhs(sphere4(), 1.0, RING_TOP_4).unwrap(), 1.651_306_926_588, epsilon = 1e-10);
        assert_abs_diff_eq!(simons_rhs(sphere4(), 1.0, RING_TOP_4).unwrap(), 1.651_22, epsilon = 1e-4);
        assert_eq!(simons_rhs(sphere4(), 1.0, 0.0).unwrap(), 0.0);
        assert!(simons_rhs(sphere4(), 1.0, -1.0).is_err());
    }

    #[test]
    fn band_phi_examples() {
        let (lhs, rhs) = band_phi_bound(sphere4(), 1.0, RING_ALPHA_4).unwrap();
        assert_abs_diff_eq!(lhs, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rhs, 0.877_734_032_568, epsilon = 1e-11);
        let (lhs, rhs) = band_phi_bound(sphere4(), 1.0, RING_TOP_4).unwrap();
        assert_abs_diff_eq!(lhs, 0.425_814_444_381, epsilon = 1e-11);
        assert_abs_diff_eq!(rhs, 0.909_563_588_111, epsilon = 1e-11);
        assert!(lhs <= rhs);
        assert!(matches!(band_phi_bound(sphere4(), 1.0, 3.0), Err(Error::Usage(_))));
        assert!(matches!(band_phi_bound(sphere4(), 1.0, 3.9), Err(Error::Usage(_))));
    }

    #[test]
    fn band_eta_examples() {
        let (value, floor) = band_eta_coefficient(sphere4(), 1.0, RING_ALPHA_4).unwrap();
        assert_abs_diff_eq!(value, -7.601_399_699_699, epsilon = 1e-10);
        assert_abs_diff_eq!(floor, -9.121_679_639_638, epsilon = 1e-10);
        assert!(value >= floor);
    }

    #[test]
    fn band_collapses_at_zero_mean_curvature() {
        let band = BandInterval::new(sphere4(), 0.0).unwrap();
        assert_eq!(band.delta, 0.0);
        let sweep = band_sweep(sphere4(), 0.0, 10).unwrap();
        assert_abs_diff_eq!(sweep.phi_margin, 0.0, epsilon = 1e-12);
        assert!(sweep.eta_margin >= 0.0);
    }

    #[test]
    fn classify_examples() {
        let tag = |s| classify(sphere4(), 1.0, s).unwrap().tag;
        assert_eq!(tag(7.0), GapTag::Subcritical);
        assert_eq!(tag(7.611_33), GapTag::RigidBoundary);
        assert_eq!(tag(7.7), GapTag::ForbiddenBand);
        assert_eq!(tag(7.877_99), GapTag::ForbiddenBand);
        assert_eq!(tag(7.9), GapTag::Above);
        assert_eq!(tag(12.0), GapTag::Above);
        let r = classify(sphere4(), 1.0, 7.7).unwrap();
        assert_abs_diff_eq!(r.alpha, 7.611_33, epsilon = 1e-5);
        assert_abs_diff_eq!(r.band_top, 7.878_00, epsilon = 1e-5);
        assert!(matches!(classify(sphere4(), 1.0, 3.0), Err(Error::InvalidInvariants(_))));
        let hyp = SpaceFormContext::new(4, -1.0).unwrap();
        assert!(classify(hyp, 0.5, 2.0).is_err());
    }

    #[test]
    fn classify_with_tight_tolerance_separates_rounded_input() {
        let r = classify_with_tol(sphere4(), 1.0, 7.611_33, 1e-9).unwrap();
        assert_eq!(r.tag, GapTag::ForbiddenBand);
        let exact = alpha_general(sphere4(), 1.0).unwrap();
        assert_eq!(classify_with_tol(sphere4(), 1.0, exact, 1e-9).unwrap().tag, GapTag::RigidBoundary);
    }

    #[test]
    fn clifford_examples() {
        let m = clifford_model(4, 1, 1.548_58).unwrap();
        assert_abs_diff_eq!(m.h, 1.0, epsilon = 1e-5);
        assert_abs_diff_eq!(m.s, 7.611_39, epsilon = 1e-4);
        let m = clifford_model(4, 2, 1.0).unwrap();
        assert_eq!(m.h, 0.0);
        assert_eq!(m.s, 4.0);
        assert_eq!(m.s, muenzner_s(4, 2).unwrap());
        let m = clifford_for_mean_curvature(10, 3, 0.5).unwrap();
        assert_abs_diff_eq!(m.h, 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(m.s, alpha_k(10, 0.5, 3).unwrap(), epsilon = 1e-8);
        assert!(clifford_model(4, 1, 0.0).is_err());
        assert!(clifford_model(4, 4, 1.0).is_err());
    }

    #[test]
    fn orientation_flip_keeps_h_nonnegative() {
        let m = clifford_model(5, 2, 0.3).unwrap();
        assert!(m.flipped);
        assert!(m.h > 0.0);
        let sum: f64 = m.principal_curvatures.iter().sum();
        assert_abs_diff_eq!(sum / 5.0, m.h, epsilon = 1e-14);
    }

    #[test]
    fn boundary_models_realize_alpha_for_all_c() {
        for c in [-3.0, -0.5, 0.0, 0.4, 1.0] {
            for n in [4, 7, 12] {
                for h in [0.9, 2.0] {
                    let ctx = SpaceFormContext::new(n, c).unwrap();
                    if !ctx.admits(h) {
                        continue;
                    }
                    let m = boundary_model(ctx, h).unwrap();
                    let alpha = alpha_general(ctx, h).unwrap();
                    assert_abs_diff_eq!(m.h, h, epsilon = 1e-12);
                    assert!((m.s - alpha).abs() < 1e-10 * alpha.max(1.0), "n={n} c={c} h={h}");
                }
            }
        }
    }

    #[test]
    fn muenzner_values() {
        assert_eq!(muenzner_s(4, 1).unwrap(), 0.0);
        assert_eq!(muenzner_s(4, 2).unwrap(), 4.0);
        assert_eq!(muenzner_s(6, 3).unwrap(), 12.0);
        // equals 2n + 3nH² at H = 0
        assert_eq!(muenzner_s(6, 3).unwrap(), 2.0 * 6.0);
        assert!(muenzner_s(6, 5).is_err());
        assert!(muenzner_s(6, 0).is_err());
    }

    #[test]
    fn model_spectra() {
        let s = spectrum_of_model(&clifford_for_mean_curvature(4, 1, 1.0).unwrap()).unwrap();
        let expected = [-(3f64.sqrt()) / 2.0, 0.5 / 3f64.sqrt(), 0.5 / 3f64.sqrt(), 0.5 / 3f64.sqrt()];
        for (a, b) in s.as_slice().iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-9);
        }
        let f = functionals(&s);
        assert!(f.phi.abs() < 1e-9 && f.eta.abs() < 1e-9 && f.sigma.abs() < 1e-7);

        let s = spectrum_of_model(&clifford_for_mean_curvature(4, 3, 1.0).unwrap()).unwrap();
        assert_abs_diff_eq!(functionals(&s).phi, 1.154_70, epsilon = 1e-4);

        let s = spectrum_of_model(&clifford_model(4, 2, 1.0).unwrap()).unwrap();
        for (a, b) in s.as_slice().iter().zip([-0.5, -0.5, 0.5, 0.5]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(functionals(&s).phi, 2.0 / 12f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn umbilical_model_has_no_spectrum() {
        // λ = 1, c = −1, k = 1: all curvatures equal 1
        let m = ModelHypersurface::new(4, 1, 1.0, -1.0).unwrap();
        assert!(matches!(spectrum_of_model(&m), Err(Error::Degenerate(_))));
    }

    #[test]
    fn boundary_spectrum_satisfies_lemma2_strictly() {
        for n in [4, 9, 20, 21, 35] {
            let m = clifford_for_mean_curvature(n, 1, 0.7).unwrap();
            let c = lemma2_conclusions(&spectrum_of_model(&m).unwrap()).unwrap();
            assert!(c.all());
            assert!(c.gap_margin > 0.1);
        }
    }

    #[test]
    fn nearest_model_choice() {
        let m = nearest_model(sphere4(), 1.0, 11.0).unwrap();
        assert_eq!(m.k, 2);
        assert_abs_diff_eq!(m.s, 12.0, epsilon = 1e-12);
        let m = nearest_model(sphere4(), 1.0, 7.61133).unwrap();
        assert_eq!(m.k, 1);
        assert_abs_diff_eq!(m.lambda, 1.548_58, epsilon = 1e-5);
        let flat = SpaceFormContext::new(5, 0.0).unwrap();
        let m = nearest_model(flat, 1.0, 9.0).unwrap();
        assert_abs_diff_eq!(m.s, alpha_general(flat, 1.0).unwrap(), epsilon = 1e-10);
    }

    #[test]
    fn delta_positive_for_nonzero_h() {
        for n in 4..=30 {
            for h in [0.01, 0.5, 3.0] {
                let p = PinchingProfile::new(SpaceFormContext::sphere(n).unwrap(), h).unwrap();
                assert!(p.delta > 0.0);
            }
        }
    }
}
