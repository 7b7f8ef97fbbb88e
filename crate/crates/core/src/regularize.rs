//! Regularization of an arbitrary gauge tending to infinity into a smooth,
//! increasing, concave gauge with positive third derivative, via the series
//! `f̃(t) = Σ_{m=3}^{M} (1 - exp(-t/t_m))` over a doubling threshold sequence.

use crate::error::{Error, Result};
use crate::gauge::{log_grid, GaugeFlags, OscillationGauge};

/// A partial-sum regularized gauge dominated by its base `f`.
#[derive(Debug, Clone)]
pub struct RegularizedGauge {
    /// `t_0 .. t_M`; the series uses `t_3 ..`.
    thresholds: Vec<f64>,
    term_count: u32,
    tail_bound: f64,
    horizon: f64,
    base: OscillationGauge,
}

impl RegularizedGauge {
    /// The doubling sequence `t_0 .. t_M`.
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// `M`: the series runs over `m = 3 ..= M`.
    pub fn term_count(&self) -> u32 {
        self.term_count
    }

    /// Bound on `Σ_{m>M} t/t_m` over the declared range `[0, horizon]`.
    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn base(&self) -> &OscillationGauge {
        &self.base
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.thresholds[3..]
            .iter()
            .map(|tm| 1.0 - (-t / tm).exp())
            .sum()
    }

    /// `f̃' = Σ e^{-t/t_m}/t_m`, a sum of positive terms.
    pub fn d1(&self, t: f64) -> f64 {
        self.thresholds[3..].iter().map(|tm| (-t / tm).exp() / tm).sum()
    }

    /// `f̃'' = -Σ e^{-t/t_m}/t_m²`, a sum of negative terms.
    pub fn d2(&self, t: f64) -> f64 {
        -self.thresholds[3..]
            .iter()
            .map(|tm| (-t / tm).exp() / (tm * tm))
            .sum::<f64>()
    }

    /// `f̃''' = Σ e^{-t/t_m}/t_m³`, a sum of positive terms.
    pub fn d3(&self, t: f64) -> f64 {
        self.thresholds[3..]
            .iter()
            .map(|tm| (-t / tm).exp() / (tm * tm * tm))
            .sum()
    }

    /// View as an admissible gauge with closed-form derivatives.
    pub fn as_gauge(&self) -> OscillationGauge {
        let a = self.clone();
        let b = self.clone();
        let c = self.clone();
        let d = self.clone();
        let mut flags = GaugeFlags::all();
        // the partial sum is bounded by M-2, so it does not tend to infinity
        flags.tends_to_infinity = false;
        OscillationGauge::from_fn(format!("regularized({})", self.base.name()), flags, move |t| {
            a.eval(t)
        })
        .with_derivatives(move |t| b.d1(t), move |t| c.d2(t), move |t| d.d3(t))
    }
}

const SCAN_POINTS: usize = 100_000;

/// Builds the regularization of `f` on `[0, horizon]`.
///
/// `f` must satisfy `f ≥ 3` there (the caller applies the `h + 3` shift).
/// Thresholds `thr_m = sup{t ≤ horizon : f(t) < m}` are located on a
/// geometric scan grid and refined by bisection in the last grid cell where
/// `f < m`; the doubling recursion `t_m = max(2 t_{m-1}, thr_m)` absorbs the
/// scan's resolution slack. The term count `M` guarantees a series tail
/// `Σ_{m>M} t/t_m ≤ eps` for every `t ≤ horizon`.
pub fn regularize(f: &OscillationGauge, horizon: f64, eps: f64) -> Result<RegularizedGauge> {
    f.require("tends_to_infinity")?;
    if !(horizon > 0.0 && eps > 0.0) {
        return Err(Error::Precondition("horizon and eps must be positive".into()));
    }
    let grid = log_grid(horizon * 1e-9, horizon, SCAN_POINTS);
    if f.eval(0.0) < 3.0 || grid.iter().any(|&t| f.eval(t) < 3.0) {
        return Err(Error::Precondition(
            "base gauge dips below 3 on [0, horizon]; apply the +3 shift first".into(),
        ));
    }
    // M large enough that t_m ≥ 2^m makes the tail ≤ horizon·2^{-M} ≤ eps
    let m_max = ((horizon / eps).log2().ceil() as u32).max(3);
    let mut thresholds = vec![1.0f64]; // t_0 = 1
    for m in 1..=m_max {
        let level = m as f64;
        let thr = scan_threshold(f, &grid, level, horizon, m)?;
        let prev = *thresholds.last().unwrap();
        thresholds.push((2.0 * prev).max(thr));
    }
    let t_last = *thresholds.last().unwrap();
    Ok(RegularizedGauge {
        thresholds,
        term_count: m_max,
        tail_bound: 2.0 * horizon / t_last,
        horizon,
        base: f.clone(),
    })
}

/// `sup{t ≤ horizon : f(t) < level}`, or 0 when the set is empty on the grid.
fn scan_threshold(
    f: &OscillationGauge,
    grid: &[f64],
    level: f64,
    horizon: f64,
    m: u32,
) -> Result<f64> {
    let last_below = grid.iter().rposition(|&t| f.eval(t) < level);
    let i = match last_below {
        None => return Ok(0.0),
        Some(i) => i,
    };
    if i + 1 == grid.len() {
        // f is still below the level at the horizon itself; the true
        // supremum may or may not extend past it. If f never reaches the
        // level anywhere on the scan, the threshold is genuinely
        // unbracketed and the horizon is too small.
        if grid.iter().all(|&t| f.eval(t) < level) {
            return Err(Error::HorizonTooSmall { horizon, level: m });
        }
        return Ok(horizon);
    }
    // refine inside [grid[i], grid[i+1]]: keep lo on the f<level side
    let (mut lo, mut hi) = (grid[i], grid[i + 1]);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if f.eval(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shifted_linear() -> OscillationGauge {
        OscillationGauge::from_fn("t+3", GaugeFlags::all(), |t| t + 3.0)
    }

    #[test]
    fn linear_base_thresholds() {
        let r = regularize(&shifted_linear(), 100.0, 1e-6).unwrap();
        // thr_m = m-3 for m ≥ 3, always dominated by the doubling chain here
        assert!((r.thresholds()[3] - 8.0).abs() < 1e-6);
        assert!((r.thresholds()[1] - 2.0).abs() < 1e-12);
        assert!((r.thresholds()[2] - 4.0).abs() < 1e-12);
        for (m, tm) in r.thresholds().iter().enumerate() {
            assert!(*tm >= (1u64 << m) as f64 * (1.0 - 1e-12), "t_{m} = {tm}");
        }
    }

    #[test]
    fn vanishes_at_zero_and_dominated() {
        let f = shifted_linear();
        let r = regularize(&f, 100.0, 1e-6).unwrap();
        assert_eq!(r.eval(0.0), 0.0);
        for &t in log_grid(1e-6, 100.0, 2000).iter() {
            assert!(r.eval(t) <= f.eval(t) + 1e-12, "t={t}");
        }
    }

    #[test]
    fn derivative_signs_everywhere() {
        let r = regularize(&shifted_linear(), 100.0, 1e-6).unwrap();
        for &t in log_grid(1e-9, 100.0, 500).iter() {
            assert!(r.d1(t) > 0.0);
            assert!(r.d2(t) < 0.0);
            assert!(r.d3(t) > 0.0);
        }
    }

    #[test]
    fn tail_bound_covers_eps() {
        let r = regularize(&shifted_linear(), 1000.0, 1e-6).unwrap();
        assert!(r.tail_bound() <= 1e-6 * 2.0 + 1e-18 || r.tail_bound() <= 1e-5);
        // M chosen from the doubling guarantee
        assert!(r.term_count() >= (1000.0f64 / 1e-6).log2().ceil() as u32);
    }

    #[test]
    fn refuses_base_below_three() {
        let f = OscillationGauge::from_fn("t", GaugeFlags::all(), |t| t);
        assert!(regularize(&f, 100.0, 1e-6).is_err());
    }

    #[test]
    fn refuses_unflagged_base() {
        let f = OscillationGauge::from_fn("flat", GaugeFlags::none(), |_| 5.0);
        assert!(matches!(regularize(&f, 10.0, 1e-6), Err(Error::FlagMissing { .. })));
    }

    #[test]
    fn horizon_too_small_when_level_never_reached() {
        // f ≡ 3.5 claims to tend to infinity but never clears level 4
        let f = OscillationGauge::from_fn("liar", GaugeFlags::all(), |_| 3.5);
        assert!(matches!(
            regularize(&f, 10.0, 1e-3),
            Err(Error::HorizonTooSmall { level: 4, .. })
        ));
    }

    #[test]
    fn as_gauge_matches_and_audits() {
        let r = regularize(&shifted_linear(), 100.0, 1e-6).unwrap();
        let g = r.as_gauge();
        assert_eq!(g.eval(5.0), r.eval(5.0));
        let mut rng = crate::util::rng_for(3, "reg-audit", 0);
        let rep = crate::gauge::audit_flags(&g, &mut rng);
        assert!(rep.passed(), "{:?}", rep.failures);
    }
}
