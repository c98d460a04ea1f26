//! Closed-form pinching constants for CMC hypersurfaces in space forms.
//!
//! Every constant is a pure function of the dimension `n`, the mean curvature
//! `H` and the ambient curvature `c`. Only `H²` and `|H|` enter the formulas,
//! so the sign of `H` never matters.

use serde::Serialize;

use crate::error::{usage, Error, Result};

/// Ambient space form `F^{n+1}(c)`: hypersurface dimension and sectional curvature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpaceFormContext {
    pub n: usize,
    pub c: f64,
}

impl SpaceFormContext {
    /// Smallest dimension for which the constants are evaluated.
    pub const MIN_DIM: usize = 3;
    /// Smallest dimension covered by the gap theorems.
    pub const MIN_THEOREM_DIM: usize = 4;

    pub fn new(n: usize, c: f64) -> Result<Self> {
        if n < Self::MIN_DIM {
            return Err(usage(format!("dimension n={n} is below the minimum {}", Self::MIN_DIM)));
        }
        if !c.is_finite() {
            return Err(usage(format!("ambient curvature c={c} is not finite")));
        }
        Ok(Self { n, c })
    }

    /// Unit-sphere ambient, `c = 1`.
    pub fn sphere(n: usize) -> Result<Self> {
        Self::new(n, 1.0)
    }

    pub fn require_theorem_range(&self) -> Result<()> {
        require_theorem_dim(self.n)
    }

    /// `H² + c > 0`, the standing hypothesis of the gap theorem.
    pub fn admits(&self, h: f64) -> bool {
        h * h + self.c > 0.0
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }
}

pub(crate) fn require_theorem_dim(n: usize) -> Result<()> {
    if n < SpaceFormContext::MIN_THEOREM_DIM {
        Err(usage(format!(
            "dimension n={n} is below {}, the range of the gap theorems",
            SpaceFormContext::MIN_THEOREM_DIM
        )))
    } else {
        Ok(())
    }
}

fn require_finite(h: f64) -> Result<()> {
    if h.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("mean curvature H={h} is not finite")))
    }
}

/// Mean curvature, squared length of the second fundamental form and its trace-free part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CmcInvariants {
    pub h: f64,
    pub s: f64,
    pub ring_s: f64,
}

impl CmcInvariants {
    /// Rejects `S < nH²` beyond a relative rounding slack; tiny negative `S̊` is clamped to 0.
    pub fn new(n: usize, h: f64, s: f64) -> Result<Self> {
        require_finite(h)?;
        if !s.is_finite() || s < 0.0 {
            return Err(Error::InvalidInvariants(format!("S={s} must be finite and nonnegative")));
        }
        let umbilic = n as f64 * h * h;
        let ring_s = s - umbilic;
        if ring_s < -1e-12 * umbilic.max(1.0) {
            return Err(Error::InvalidInvariants(format!(
                "S={s} is below nH²={umbilic}, the trace-free part would be negative"
            )));
        }
        Ok(Self { h, s, ring_s: ring_s.max(0.0) })
    }

    pub fn is_umbilical(&self) -> bool {
        self.ring_s <= 1e-14 * self.s.max(1.0)
    }
}

/// `α(n, H, c)`, the first pinching constant.
pub fn alpha_general(ctx: SpaceFormContext, h: f64) -> Result<f64> {
    require_finite(h)?;
    let n = ctx.nf();
    let h2 = h * h;
    let radicand = n * n * h2 * h2 + 4.0 * (n - 1.0) * ctx.c * h2;
    if radicand < 0.0 {
        return Err(Error::Domain {
            n: ctx.n,
            h,
            c: ctx.c,
            reason: format!("negative radicand n²H⁴ + 4(n-1)cH² = {radicand}"),
        });
    }
    Ok(n * ctx.c + n.powi(3) * h2 / (2.0 * (n - 1.0))
        - n * (n - 2.0) / (2.0 * (n - 1.0)) * radicand.sqrt())
}

/// `α̊ = α − nH²`.
pub fn ring_alpha(ctx: SpaceFormContext, h: f64) -> Result<f64> {
    Ok(alpha_general(ctx, h)? - ctx.nf() * h * h)
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k >= n {
        Err(usage(format!("index k={k} must satisfy 1 <= k <= n-1 = {}", n.saturating_sub(1))))
    } else {
        Ok(())
    }
}

/// `α_k(n, H)` for the unit-sphere ambient. `α_1 = α(n, H, 1)` and `α_{n-1} = β(n, H)`.
pub fn alpha_k(n: usize, h: f64, k: usize) -> Result<f64> {
    require_finite(h)?;
    check_k(n, k)?;
    let nf = n as f64;
    let kf = k as f64;
    let split = kf * (nf - kf);
    let h2 = h * h;
    let root = (nf * nf * h2 * h2 + 4.0 * split * h2).sqrt();
    Ok(nf + nf.powi(3) / (2.0 * split) * h2 - nf * (nf - 2.0 * kf) / (2.0 * split) * root)
}

/// `β(n, H)`, the upper pinching constant for the unit sphere.
pub fn beta(n: usize, h: f64) -> Result<f64> {
    require_finite(h)?;
    if n < SpaceFormContext::MIN_DIM {
        return Err(usage(format!("dimension n={n} is below the minimum {}", SpaceFormContext::MIN_DIM)));
    }
    let nf = n as f64;
    let h2 = h * h;
    let root = (nf * nf * h2 * h2 + 4.0 * (nf - 1.0) * h2).sqrt();
    Ok(nf + nf.powi(3) / (2.0 * (nf - 1.0)) * h2 + nf * (nf - 2.0) / (2.0 * (nf - 1.0)) * root)
}

/// `B_n` as an exact fraction `(numerator, denominator)`.
pub fn b_n_fraction(n: usize) -> Result<(u32, u32)> {
    require_theorem_dim(n)?;
    Ok(if n <= 20 { (1, 5) } else { (49, 250) })
}

/// `B_n`: 1/5 for 4 ≤ n ≤ 20 and 49/250 for n > 20, correctly rounded.
pub fn b_n(n: usize) -> Result<f64> {
    let (num, den) = b_n_fraction(n)?;
    Ok(f64::from(num) / f64::from(den))
}

/// Width `δ = B_n·min{nH²/(n−1), α̊}` of the forbidden band above `α`.
pub fn delta_band(ctx: SpaceFormContext, h: f64) -> Result<f64> {
    ctx.require_theorem_range()?;
    let ring = ring_alpha(ctx, h)?;
    let n = ctx.nf();
    Ok(b_n(ctx.n)? * (n * h * h / (n - 1.0)).min(ring))
}

/// `λ_k`, the large principal curvature of the `k`-th Clifford torus with mean curvature `|H|`.
pub fn lambda_k(n: usize, h: f64, k: usize) -> Result<f64> {
    require_finite(h)?;
    check_k(n, k)?;
    let nf = n as f64;
    let kf = k as f64;
    let nh = nf * h.abs();
    Ok((nh + (nh * nh + 4.0 * kf * (nf - kf)).sqrt()) / (2.0 * (nf - kf)))
}

/// Both sides of `(n−2)√(n/(n−1)·H²·α̊) = n(H²+c) − α̊`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma3Sides {
    pub lhs: f64,
    pub rhs: f64,
}

impl Lemma3Sides {
    pub fn residual(&self) -> f64 {
        self.lhs - self.rhs
    }

    /// Residual scaled by `max(1, rhs)`.
    pub fn relative_residual(&self) -> f64 {
        self.residual().abs() / self.rhs.abs().max(1.0)
    }
}

pub fn lemma3_sides(ctx: SpaceFormContext, h: f64) -> Result<Lemma3Sides> {
    if !ctx.admits(h) {
        return Err(Error::IdentityDomain(format!(
            "H² + c = {} is not positive (n={}, H={h}, c={})",
            h * h + ctx.c,
            ctx.n,
            ctx.c
        )));
    }
    let ring = ring_alpha(ctx, h)?;
    let n = ctx.nf();
    let scale = (n * (h * h + ctx.c)).abs().max(1.0);
    if ring < -1e-12 * scale {
        return Err(Error::IdentityDomain(format!("α̊ = {ring} is negative (n={}, H={h}, c={})", ctx.n, ctx.c)));
    }
    let ring = ring.max(0.0);
    let lhs = (n - 2.0) * (n / (n - 1.0) * h * h * ring).sqrt();
    let rhs = n * (h * h + ctx.c) - ring;
    if rhs < -1e-12 * scale {
        return Err(Error::IdentityDomain(format!(
            "n(H²+c) − α̊ = {rhs} is negative (n={}, H={h}, c={})",
            ctx.n, ctx.c
        )));
    }
    Ok(Lemma3Sides { lhs, rhs })
}

/// `lhs − rhs` of the α̊ identity; zero up to rounding whenever `H² + c > 0`.
pub fn lemma3_residual(ctx: SpaceFormContext, h: f64) -> Result<f64> {
    Ok(lemma3_sides(ctx, h)?.residual())
}

/// Bisection on a bracketing interval `[lo, hi]` with `f(lo) ≥ 0 ≥ f(hi)` or the reverse.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    for _ in 0..2000 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `α̊` recovered as the smaller root of `(n(H²+c) − x)² = (n−2)²·n/(n−1)·H²·x` by bisection.
///
/// The quadratic is decreasing on `[0, n(H²+c)]` and changes sign there, so the
/// root found is independent of the closed form in [`ring_alpha`].
pub fn ring_alpha_root_oracle(ctx: SpaceFormContext, h: f64, tol: f64) -> Result<f64> {
    if !ctx.admits(h) {
        return Err(Error::IdentityDomain(format!(
            "H² + c = {} is not positive (n={}, H={h}, c={})",
            h * h + ctx.c,
            ctx.n,
            ctx.c
        )));
    }
    let n = ctx.nf();
    let top = n * (h * h + ctx.c);
    let slope = (n - 2.0).powi(2) * n / (n - 1.0) * h * h;
    let g = |x: f64| (top - x).powi(2) - slope * x;
    Ok(bisect(g, 0.0, top, tol))
}

/// `(2n + 3nH²) − α_{⌊n/2⌋}(n, H)`; positive across the tested range.
pub fn problem_gap_check(n: usize, h: f64) -> Result<f64> {
    require_theorem_dim(n)?;
    let nf = n as f64;
    Ok(2.0 * nf + 3.0 * nf * h * h - alpha_k(n, h, n / 2)?)
}

/// All constants attached to one `(n, H, c)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PinchingProfile {
    pub alpha: f64,
    pub ring_alpha: f64,
    /// `β(n, H)`, the unit-sphere constant (independent of `c`).
    pub beta: f64,
    /// `α_k(n, H)` for `k = 1..n−1`, unit-sphere ambient.
    pub alpha_k: Vec<f64>,
    pub b_n: f64,
    pub delta: f64,
    /// `λ_k(n, H)` for `k = 1..n−1`.
    pub lambda_k: Vec<f64>,
}

impl PinchingProfile {
    pub fn new(ctx: SpaceFormContext, h: f64) -> Result<Self> {
        ctx.require_theorem_range()?;
        let alpha = alpha_general(ctx, h)?;
        let n = ctx.n;
        Ok(Self {
            alpha,
            ring_alpha: alpha - ctx.nf() * h * h,
            beta: beta(n, h)?,
            alpha_k: (1..n).map(|k| alpha_k(n, h, k)).collect::<Result<_>>()?,
            b_n: b_n(n)?,
            delta: delta_band(ctx, h)?,
            lambda_k: (1..n).map(|k| lambda_k(n, h, k)).collect::<Result<_>>()?,
        })
    }

    /// Upper end `α + δ` of the forbidden band.
    pub fn band_top(&self) -> f64 {
        self.alpha + self.delta
    }
}
