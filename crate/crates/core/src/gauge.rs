//! Oscillation gauges `h : [0,∞) → [0,∞)` — the built-in families, their
//! declared analytic properties, derivative evaluation, inversion, and the
//! sampling audits that back every declared flag.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};

type EvalFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Declared analytic properties of a gauge. Operations that rely on a
/// property refuse gauges that do not declare it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GaugeFlags {
    pub vanishes_at_zero: bool,
    pub increasing: bool,
    pub concave: bool,
    pub third_derivative_positive: bool,
    pub tends_to_infinity: bool,
    pub continuous: bool,
}

impl GaugeFlags {
    pub fn all() -> Self {
        Self {
            vanishes_at_zero: true,
            increasing: true,
            concave: true,
            third_derivative_positive: true,
            tends_to_infinity: true,
            continuous: true,
        }
    }

    pub fn none() -> Self {
        Self::default()
    }
}

/// A gauge function with optional closed-form derivatives.
#[derive(Clone)]
pub struct OscillationGauge {
    name: String,
    eval: EvalFn,
    derivs: Option<[EvalFn; 3]>,
    flags: GaugeFlags,
}

impl fmt::Debug for OscillationGauge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OscillationGauge")
            .field("name", &self.name)
            .field("flags", &self.flags)
            .field("has_derivatives", &self.derivs.is_some())
            .finish()
    }
}

impl OscillationGauge {
    pub fn from_fn(
        name: impl Into<String>,
        flags: GaugeFlags,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), eval: Arc::new(eval), derivs: None, flags }
    }

    pub fn with_derivatives(
        mut self,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d3: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.derivs = Some([Arc::new(d1), Arc::new(d2), Arc::new(d3)]);
        self
    }

    /// `h(t) = t^p` for `0 < p ≤ 1`. For `p = 1` the third derivative is
    /// identically zero, so `third_derivative_positive` is withheld.
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::Precondition(format!("power gauge needs p in (0,1], got {p}")));
        }
        let mut flags = GaugeFlags::all();
        if p == 1.0 {
            flags.third_derivative_positive = false;
        }
        Ok(Self::from_fn(format!("power:p={p}"), flags, move |t| t.powf(p)).with_derivatives(
            move |t| p * t.powf(p - 1.0),
            move |t| p * (p - 1.0) * t.powf(p - 2.0),
            move |t| p * (p - 1.0) * (p - 2.0) * t.powf(p - 3.0),
        ))
    }

    /// `h(t) = log(1 + t)`.
    pub fn log1p() -> Self {
        Self::from_fn("log1p", GaugeFlags::all(), |t| t.ln_1p()).with_derivatives(
            |t| 1.0 / (1.0 + t),
            |t| -1.0 / ((1.0 + t) * (1.0 + t)),
            |t| 2.0 / ((1.0 + t) * (1.0 + t) * (1.0 + t)),
        )
    }

    /// Piecewise-linear gauge from `(t, h(t))` pairs with strictly increasing
    /// `t` starting at 0. Flags are inferred by a sampling audit.
    pub fn from_table(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 || points[0].0 != 0.0 {
            return Err(Error::Precondition(
                "table gauge needs ≥ 2 points with t starting at 0".into(),
            ));
        }
        for w in points.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Precondition("table abscissae must be strictly increasing".into()));
            }
        }
        if points.iter().any(|&(t, v)| !t.is_finite() || !v.is_finite() || v < 0.0) {
            return Err(Error::Precondition("table values must be finite and non-negative".into()));
        }
        let pts = points.clone();
        let hi = pts.last().unwrap().0;
        let mut g = Self::from_fn("table", GaugeFlags::none(), move |t| {
            let t = t.min(hi);
            let i = match pts.binary_search_by(|p| p.0.partial_cmp(&t).unwrap()) {
                Ok(i) => return pts[i].1,
                Err(i) => i,
            };
            let (t0, v0) = pts[i - 1];
            let (t1, v1) = pts[i];
            v0 + (v1 - v0) * (t - t0) / (t1 - t0)
        });
        g.flags.continuous = true;
        g.flags.vanishes_at_zero = points[0].1 == 0.0;
        g.flags.increasing = points.windows(2).all(|w| w[1].1 >= w[0].1);
        // concavity of a polyline: non-increasing chord slopes
        let slopes: Vec<f64> = points
            .windows(2)
            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
            .collect();
        g.flags.concave = slopes.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        Ok(g)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn flags(&self) -> GaugeFlags {
        self.flags
    }

    pub fn has_derivatives(&self) -> bool {
        self.derivs.is_some()
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    fn fd_step(t: f64) -> f64 {
        1e-6f64.max(1e-6 * t)
    }

    /// First derivative: closed form if supplied, centered difference otherwise.
    pub fn d1(&self, t: f64) -> f64 {
        match &self.derivs {
            Some(d) => (d[0])(t),
            None => {
                let s = Self::fd_step(t).min(t.max(1e-9)); // stay inside [0,∞)
                (self.eval(t + s) - self.eval(t - s)) / (2.0 * s)
            }
        }
    }

    pub fn d2(&self, t: f64) -> f64 {
        match &self.derivs {
            Some(d) => (d[1])(t),
            None => {
                let s = Self::fd_step(t).min((t / 2.0).max(1e-9));
                (self.eval(t + s) - 2.0 * self.eval(t) + self.eval(t - s)) / (s * s)
            }
        }
    }

    pub fn d3(&self, t: f64) -> f64 {
        match &self.derivs {
            Some(d) => (d[2])(t),
            None => {
                let s = Self::fd_step(t).min((t / 3.0).max(1e-9));
                (self.eval(t + 2.0 * s) - 2.0 * self.eval(t + s) + 2.0 * self.eval(t - s)
                    - self.eval(t - 2.0 * s))
                    / (2.0 * s * s * s)
            }
        }
    }

    pub fn require(&self, flag: &'static str) -> Result<()> {
        let ok = match flag {
            "vanishes_at_zero" => self.flags.vanishes_at_zero,
            "increasing" => self.flags.increasing,
            "concave" => self.flags.concave,
            "third_derivative_positive" => self.flags.third_derivative_positive,
            "tends_to_infinity" => self.flags.tends_to_infinity,
            "continuous" => self.flags.continuous,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::FlagMissing { gauge: self.name.clone(), flag })
        }
    }

    /// The unique `t` with `h(t) = y`, by bracketing bisection to relative
    /// tolerance 1e-12. Returns `+∞` when `y` exceeds `sup h`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        self.require("increasing")?;
        self.require("continuous")?;
        self.require("vanishes_at_zero")?;
        if y <= 0.0 {
            return Ok(0.0);
        }
        let mut hi = 1.0f64;
        while self.eval(hi) < y {
            hi *= 2.0;
            if hi > 1e300 {
                return Ok(f64::INFINITY);
            }
        }
        let mut lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) < y {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * hi.max(1.0) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// Result of the triangle-inequality audit `h(|s+t|) ≤ h(|s|) + h(|t|)`.
#[derive(Debug, Clone, Copy)]
pub struct TriangleAudit {
    pub samples: usize,
    pub worst_margin: f64,
    pub worst_pair: (f64, f64),
}

/// Checks `h(|s+t|) ≤ h(|s|) + h(|t|)` on random pairs in `[-1e6, 1e6]²`.
/// The reported margin is `min(rhs - lhs)` and must be `≥ -1e-12`.
pub fn triangle_inequality_audit(
    h: &OscillationGauge,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<TriangleAudit> {
    h.require("increasing")?;
    h.require("concave")?;
    h.require("vanishes_at_zero")?;
    let mut worst = f64::INFINITY;
    let mut worst_pair = (0.0, 0.0);
    for _ in 0..samples {
        let s: f64 = rng.gen_range(-1e6..1e6);
        let t: f64 = rng.gen_range(-1e6..1e6);
        let margin = h.eval(s.abs()) + h.eval(t.abs()) - h.eval((s + t).abs());
        if margin < worst {
            worst = margin;
            worst_pair = (s, t);
        }
    }
    Ok(TriangleAudit { samples, worst_margin: worst, worst_pair })
}

/// Per-flag sampling audit outcome.
#[derive(Debug, Clone, Default)]
pub struct FlagAuditReport {
    pub failures: Vec<(&'static str, f64)>,
}

impl FlagAuditReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Audits every declared flag by sampling: monotonicity on a 1e4-point log
/// grid, concavity on 1e4 random triples, third finite difference > -1e-9,
/// plus the derivative/finite-difference consistency check when closed-form
/// derivatives are present.
pub fn audit_flags(h: &OscillationGauge, rng: &mut impl Rng) -> FlagAuditReport {
    let mut report = FlagAuditReport::default();
    let flags = h.flags();
    let grid: Vec<f64> = log_grid(1e-6, 1e6, 10_000);
    if flags.vanishes_at_zero && h.eval(0.0).abs() > 1e-12 {
        report.failures.push(("vanishes_at_zero", h.eval(0.0).abs()));
    }
    if flags.increasing {
        let mut worst = f64::INFINITY;
        for w in grid.windows(2) {
            worst = worst.min(h.eval(w[1]) - h.eval(w[0]));
        }
        if worst < -1e-9 {
            report.failures.push(("increasing", worst));
        }
    }
    if flags.concave {
        let mut worst = f64::INFINITY;
        for _ in 0..10_000 {
            let s = 10f64.powf(rng.gen_range(-6.0..6.0));
            let t = 10f64.powf(rng.gen_range(-6.0..6.0));
            let m = h.eval(0.5 * (s + t)) - 0.5 * (h.eval(s) + h.eval(t));
            let scale = 1.0f64.max(h.eval(s).abs()).max(h.eval(t).abs());
            worst = worst.min(m / scale);
        }
        if worst < -1e-9 {
            report.failures.push(("concave", worst));
        }
    }
    if flags.third_derivative_positive {
        let mut worst = f64::INFINITY;
        for &t in grid.iter().filter(|&&t| t > 1e-3) {
            // wide stencil: the third difference cancels ~f·eps/s³ of noise
            let s = (t / 10.0).max(1e-3);
            let d3 = (h.eval(t + 2.0 * s) - 2.0 * h.eval(t + s) + 2.0 * h.eval(t - s)
                - h.eval(t - 2.0 * s))
                / (2.0 * s * s * s);
            worst = worst.min(d3);
        }
        if worst < -1e-9 {
            report.failures.push(("third_derivative_positive", worst));
        }
    }
    if flags.tends_to_infinity {
        // crude witness: the gauge must clear 10 somewhere reachable
        if h.eval(1e12) < 10.0 {
            report.failures.push(("tends_to_infinity", h.eval(1e12)));
        }
    }
    if h.has_derivatives() {
        let mut worst = 0.0f64;
        for &t in log_grid(1e-2, 1e4, 60).iter() {
            let s = OscillationGauge::fd_step(t).min(t / 2.0);
            let fd = (h.eval(t + s) - h.eval(t - s)) / (2.0 * s);
            let rel = (h.d1(t) - fd).abs() / fd.abs().max(1e-12);
            worst = worst.max(rel);
        }
        if worst > 1e-5 {
            report.failures.push(("derivative_consistency", worst));
        }
    }
    report
}

pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (llo + (lhi - llo) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::rng_for;

    #[test]
    fn power_examples() {
        let h = OscillationGauge::power(0.5).unwrap();
        assert!((h.eval(4.0) - 2.0).abs() < 1e-15);
        assert!((h.inverse(2.0).unwrap() - 4.0).abs() < 1e-10);
        let lin = OscillationGauge::power(1.0).unwrap();
        assert!(!lin.flags().third_derivative_positive);
        assert!(OscillationGauge::power(0.0).is_err());
        assert!(OscillationGauge::power(1.5).is_err());
    }

    #[test]
    fn log_examples() {
        let h = OscillationGauge::log1p();
        assert_eq!(h.eval(0.0), 0.0);
        assert!((h.eval(std::f64::consts::E - 1.0) - 1.0).abs() < 1e-15);
        let k = 0.7;
        assert!((h.inverse(k).unwrap() - (k.exp() - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn inverse_examples() {
        let h = OscillationGauge::power(0.5).unwrap();
        assert!((h.inverse(3.0).unwrap() - 9.0).abs() < 1e-10);
        assert_eq!(h.inverse(0.0).unwrap(), 0.0);
        let l = OscillationGauge::log1p();
        assert!((l.inverse(4.0).unwrap() - (4f64.exp() - 1.0)).abs() < 1e-8);
        // bounded gauge: values above sup map to infinity
        let b = OscillationGauge::from_fn(
            "bounded",
            GaugeFlags { increasing: true, continuous: true, vanishes_at_zero: true, ..GaugeFlags::none() },
            |t| t / (1.0 + t),
        );
        assert!(b.inverse(2.0).unwrap().is_infinite());
    }

    #[test]
    fn inverse_refuses_unflagged() {
        let g = OscillationGauge::from_fn("raw", GaugeFlags::none(), |t| t);
        assert!(matches!(g.inverse(1.0), Err(Error::FlagMissing { .. })));
    }

    #[test]
    fn inverse_round_trip() {
        for h in [OscillationGauge::power(0.5).unwrap(), OscillationGauge::power(1.0).unwrap(), OscillationGauge::log1p()] {
            for &t in &[1e-6, 1e-3, 0.5, 1.0, 17.0, 1e3, 1e6] {
                let back = h.inverse(h.eval(t)).unwrap();
                assert!(
                    (back - t).abs() <= 1e-10 * t.max(1.0),
                    "{}: t={t}, back={back}",
                    h.name()
                );
            }
        }
    }

    #[test]
    fn triangle_audit_passes_for_builtins() {
        for h in [OscillationGauge::power(0.5).unwrap(), OscillationGauge::log1p()] {
            let mut rng = rng_for(7, "triangle", 0);
            let audit = triangle_inequality_audit(&h, 5000, &mut rng).unwrap();
            assert!(audit.worst_margin >= -1e-12, "{:?}", audit);
        }
    }

    #[test]
    fn triangle_audit_spot_values() {
        let h = OscillationGauge::power(0.5).unwrap();
        assert!(h.eval(25.0) <= h.eval(9.0) + h.eval(16.0) + 1e-12);
        let l = OscillationGauge::log1p();
        assert!(l.eval(0.0) <= 2.0 * l.eval(1.0));
    }

    #[test]
    fn flag_audits_pass_for_builtins() {
        for h in [
            OscillationGauge::power(0.5).unwrap(),
            OscillationGauge::power(1.0 / 3.0).unwrap(),
            OscillationGauge::power(1.0).unwrap(),
            OscillationGauge::log1p(),
        ] {
            let mut rng = rng_for(11, "flags", 0);
            let rep = audit_flags(&h, &mut rng);
            assert!(rep.passed(), "{}: {:?}", h.name(), rep.failures);
        }
    }

    #[test]
    fn flag_audit_catches_false_declaration() {
        // convex function falsely flagged concave
        let bad = OscillationGauge::from_fn(
            "bad",
            GaugeFlags { concave: true, ..GaugeFlags::none() },
            |t| t * t,
        );
        let mut rng = rng_for(1, "flags", 1);
        assert!(!audit_flags(&bad, &mut rng).passed());
    }

    #[test]
    fn table_gauge_basics() {
        let g = OscillationGauge::from_table(vec![(0.0, 0.0), (1.0, 1.0), (3.0, 2.0)]).unwrap();
        assert!((g.eval(0.5) - 0.5).abs() < 1e-15);
        assert!((g.eval(2.0) - 1.5).abs() < 1e-15);
        assert!(g.flags().increasing && g.flags().concave);
        assert!(!g.has_derivatives());
        assert!(OscillationGauge::from_table(vec![(0.5, 0.0), (1.0, 1.0)]).is_err());
        assert!(OscillationGauge::from_table(vec![(0.0, 0.0), (0.0, 1.0)]).is_err());
    }

    #[test]
    fn finite_difference_fallback_tracks_truth() {
        let g = OscillationGauge::from_fn("sqrt-no-deriv", GaugeFlags::all(), |t| t.sqrt());
        for &t in &[0.5f64, 1.0, 4.0, 100.0] {
            let exact = 0.5 / t.sqrt();
            assert!((g.d1(t) - exact).abs() < 1e-5 * exact.max(1.0));
        }
    }
}
