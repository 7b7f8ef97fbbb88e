//! The parabolic strip `Ω_t`, the explicit locally convex sub-solution of
//! the extremal problem on it, and the numerical checks surrounding it:
//! seam continuity, midpoint-convexity fuzzing, segment geometry, Bellman
//! induction down the dyadic tree, and the closed-form lower bound `A(t)`.

mod oracle;
mod slope;

pub use oracle::{bellman_oracle, OracleResult};
pub use slope::SlopeFunction;

use rand::Rng;

use crate::dyadic::DyadicSimpleFunction;
use crate::error::{Error, Result};
use crate::gauge::OscillationGauge;
use crate::oscillation::{bmo_dyadic, moment_tree};
use crate::util::rng_for;

/// Membership in `Ω_t = {x₁² ≤ x₂ ≤ x₁² + t²}` with 1e-12 slack on both
/// inequalities.
pub fn omega_contains(x1: f64, x2: f64, t: f64) -> bool {
    let tol = 1e-12 * (1.0 + x1 * x1 + t * t);
    x1 * x1 <= x2 + tol && x2 <= x1 * x1 + t * t + tol
}

/// Evaluator for the three-branch sub-solution at a fixed parameter `t`,
/// owning the slope-function cache for branch 3.
#[derive(Debug)]
pub struct GEvaluator {
    t: f64,
    slope: SlopeFunction,
}

impl GEvaluator {
    pub fn new(t: f64, gauge: &OscillationGauge) -> Result<Self> {
        gauge.require("vanishes_at_zero")?;
        gauge.require("increasing")?;
        gauge.require("concave")?;
        Ok(Self { t, slope: SlopeFunction::new(t, gauge.clone(), 1e-9)? })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn gauge(&self) -> &OscillationGauge {
        self.slope.gauge()
    }

    pub fn slope(&self) -> &SlopeFunction {
        &self.slope
    }

    /// `G_t(x₁, x₂)` together with the branch that produced it
    /// (1, 2 or 3; 0 for the exact zero at the origin).
    pub fn eval_with_branch(&self, x1: f64, x2: f64) -> Result<(f64, u8)> {
        let t = self.t;
        if !omega_contains(x1, x2, t) {
            return Err(Error::OutOfDomain { x1, x2, t });
        }
        let h = self.slope.gauge();
        let x1 = x1.abs(); // even extension
        if x2 <= 0.0 {
            // x₂ = 0 forces x₁ = 0 inside the domain
            return Ok((0.0, 0));
        }
        if x1 < 1e-14 {
            // the x₂ < 2tx₁ condition is vacuous on the axis
            return Ok((x2 / (4.0 * t * t) * h.eval(2.0 * t), 2));
        }
        if x2 < 2.0 * t * x1 {
            return Ok((x1 * x1 / x2 * h.eval(x2 / x1), 1));
        }
        if x1 <= t {
            return Ok((x2 / (4.0 * t * t) * h.eval(2.0 * t), 2));
        }
        let radicand = (t * t - x2 + x1 * x1).max(0.0);
        let u = x1 + t - radicand.sqrt();
        let m = self.slope.eval(u)?;
        Ok((h.eval(u) + (x1 - u) * m, 3))
    }

    pub fn eval(&self, x1: f64, x2: f64) -> Result<f64> {
        Ok(self.eval_with_branch(x1, x2)?.0)
    }
}

/// One-shot evaluation of the sub-solution; fuzz loops should hold a
/// `GEvaluator` instead so the slope cache is reused.
pub fn g_eval(x1: f64, x2: f64, t: f64, h: &OscillationGauge) -> Result<f64> {
    GEvaluator::new(t, h)?.eval(x1, x2)
}

/// `A(t) ≥ 2^{-(n+2)} h(2^{(n+2)/2} t)`, the closed-form lower bound for
/// the extremal problem at `(0, t²)`. Equals the sub-solution evaluated at
/// `(0, t²)` with parameter `2^{n/2} t` (an independent code path).
pub fn lower_bound_a(t: f64, h: &OscillationGauge, n: usize) -> f64 {
    let p = (n + 2) as f64;
    0.5f64.powf(p) * h.eval(2.0f64.powf(p / 2.0) * t)
}

/// Worst absolute gap between branch closed forms across the seams
/// `x₂ = 2t·x₁` (both the branch-1/2 and branch-1/3 parts) and the
/// reflection seam `x₁ = 0`.
pub fn seam_continuity_check(t: f64, h: &OscillationGauge, samples: usize) -> Result<f64> {
    let ev = GEvaluator::new(t, h)?;
    let mut worst = 0.0f64;
    for i in 0..samples {
        let x1 = 2.0 * t * (i as f64 + 0.5) / samples as f64;
        let x2 = 2.0 * t * x1;
        let br1 = x1 * x1 / x2 * h.eval(x2 / x1);
        let other = if x1 <= t {
            x2 / (4.0 * t * t) * h.eval(2.0 * t)
        } else {
            let radicand = (t * t - x2 + x1 * x1).max(0.0);
            let u = x1 + t - radicand.sqrt();
            h.eval(u) + (x1 - u) * ev.slope().eval(u)?
        };
        worst = worst.max((br1 - other).abs());
        // reflection seam: even extension must be exact
        let x2r = x1 * x1 + 0.5 * t * t;
        worst = worst.max((ev.eval(x1, x2r)? - ev.eval(-x1, x2r)?).abs());
    }
    Ok(worst)
}

/// Returns true when every point of a dense sample of `[U, V]` lies in
/// `Ω_{√2·t}`. Preconditions: both endpoints above the parabola and the
/// midpoint inside `Ω_t`.
pub fn segment_domain_check(u: (f64, f64), v: (f64, f64), t: f64) -> Result<bool> {
    if u.1 < u.0 * u.0 - 1e-12 || v.1 < v.0 * v.0 - 1e-12 {
        return Err(Error::Precondition("segment endpoints must lie above the parabola".into()));
    }
    let mid = ((u.0 + v.0) / 2.0, (u.1 + v.1) / 2.0);
    if !omega_contains(mid.0, mid.1, t) {
        return Err(Error::Precondition("segment midpoint must lie in Ω_t".into()));
    }
    let enlarged = std::f64::consts::SQRT_2 * t;
    // 1024 interior points plus both endpoints; Ω membership along a
    // segment is governed by quadratic inequalities, so violations are
    // not needle-shaped
    for k in 0..=1025 {
        let s = k as f64 / 1025.0;
        let x1 = u.0 + s * (v.0 - u.0);
        let x2 = u.1 + s * (v.1 - u.1);
        if !omega_contains(x1, x2, enlarged) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Draws random segments entirely inside `Ω_t` and returns the worst signed
/// midpoint-convexity margin `(G(U)+G(V))/2 - G((U+V)/2)` (should be
/// ≥ -1e-8 for a locally convex `G_t`).
pub fn local_convexity_fuzz(
    t: f64,
    h: &OscillationGauge,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let ev = GEvaluator::new(t, h)?;
    let mut rng = rng_for(seed, "convexity-fuzz", 0);
    let mut worst = f64::INFINITY;
    let mut accepted = 0usize;
    let mut attempts = 0usize;
    while accepted < trials {
        attempts += 1;
        if attempts > trials * 200 {
            return Err(Error::Precondition("segment sampler rejection rate too high".into()));
        }
        let u1: f64 = rng.gen_range(-4.0 * t..4.0 * t);
        let u2 = u1 * u1 + rng.gen_range(0.0..t * t);
        let d1: f64 = rng.gen_range(-t..t);
        let v1 = u1 + d1;
        let v2 = v1 * v1 + rng.gen_range(0.0..t * t);
        let mid = ((u1 + v1) / 2.0, (u2 + v2) / 2.0);
        if !omega_contains(mid.0, mid.1, t) {
            continue;
        }
        // dense containment in Ω_t itself: convexity is only claimed on
        // convex subsets of the strip
        let mut inside = true;
        for k in 0..=256 {
            let s = k as f64 / 256.0;
            let x1 = u1 + s * (v1 - u1);
            let x2 = u2 + s * (v2 - u2);
            if !omega_contains(x1, x2, t) {
                inside = false;
                break;
            }
        }
        if !inside {
            continue;
        }
        accepted += 1;
        let margin =
            0.5 * (ev.eval(u1, u2)? + ev.eval(v1, v2)?) - ev.eval(mid.0, mid.1)?;
        worst = worst.min(margin);
    }
    Ok(worst)
}

/// Bellman induction margin: with `G = G_{2^{n/2} t}`,
/// `Σ_{J ∈ D_k} 2^{-nk} G(⟨φ⟩_J, ⟨φ²⟩_J) - G(⟨φ⟩_Q, ⟨φ²⟩_Q)`.
/// Must be ≥ -1e-8 when `‖φ‖_{BMO^d} ≤ t`.
pub fn bellman_induction_check(
    phi: &DyadicSimpleFunction,
    t: f64,
    h: &OscillationGauge,
    k: u32,
) -> Result<f64> {
    if k > phi.depth() {
        return Err(Error::DepthMismatch { cube: k, function: phi.depth() });
    }
    let norm = bmo_dyadic(phi).value;
    if norm > t + 1e-12 {
        return Err(Error::NormExceedsT { norm, t });
    }
    let n = phi.n() as u32;
    let big_t = 2.0f64.powf(n as f64 / 2.0) * t;
    let ev = GEvaluator::new(big_t, h)?;
    let tree = moment_tree(phi);
    let root_cnt = (1u64 << (n * phi.depth())) as f64;
    let (s1, s2) = tree[0][0];
    let lhs = ev.eval(s1 / root_cnt, s2 / root_cnt)?;
    let cnt = (1u64 << (n * (phi.depth() - k))) as f64;
    let weight = 0.5f64.powi((n * k) as i32);
    let mut rhs = 0.0;
    for &(s1, s2) in &tree[k as usize] {
        rhs += weight * ev.eval(s1 / cnt, s2 / cnt)?;
    }
    Ok(rhs - lhs)
}
