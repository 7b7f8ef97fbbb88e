//! The slope function `m` of the third branch of the sub-solution: the
//! unique solution of the Cauchy problem
//! `t·m'(u) + m(u) = h'(u)`, `m(2t) = h(2t)/(2t)`,
//! evaluated on `u ≥ 2t` through the integrating-factor form
//! `m(u) = e^{(2t-u)/t} h(2t)/(2t) + (1/t) ∫_{2t}^u e^{(s-u)/t} h'(s) ds`
//! with adaptive quadrature and a monotonically refined node cache.

use std::sync::RwLock;

use crate::error::{Error, Result};
use crate::gauge::OscillationGauge;

/// Evaluation context for `m`, memoizing node values on a uniform grid so
/// fuzz loops can call it millions of times.
#[derive(Debug)]
pub struct SlopeFunction {
    t: f64,
    gauge: OscillationGauge,
    tol: f64,
    du: f64,
    /// `m` at nodes `u_j = 2t + j·du`; extended on demand, never mutated.
    nodes: RwLock<Vec<f64>>,
}

impl SlopeFunction {
    pub fn new(t: f64, gauge: OscillationGauge, tol: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::Precondition(format!("slope function needs t > 0, got {t}")));
        }
        let m0 = gauge.eval(2.0 * t) / (2.0 * t);
        Ok(Self { t, du: t / 16.0, tol, gauge, nodes: RwLock::new(vec![m0]) })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn gauge(&self) -> &OscillationGauge {
        &self.gauge
    }

    /// True when `h'` comes from centered differences rather than a supplied
    /// derivative evaluator.
    pub fn uses_finite_differences(&self) -> bool {
        !self.gauge.has_derivatives()
    }

    fn hp(&self, s: f64) -> f64 {
        self.gauge.d1(s)
    }

    /// `(1/t) ∫_{a}^{b} e^{(s-b)/t} h'(s) ds` by adaptive Simpson.
    fn weighted_integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let g = |s: f64| ((s - b) / self.t).exp() * self.hp(s);
        adaptive_simpson(&g, a, b, self.tol) / self.t
    }

    fn ensure_nodes(&self, j: usize) {
        {
            let nodes = self.nodes.read().unwrap();
            if nodes.len() > j {
                return;
            }
        }
        let mut nodes = self.nodes.write().unwrap();
        while nodes.len() <= j {
            let k = nodes.len();
            let u0 = 2.0 * self.t + (k - 1) as f64 * self.du;
            let u1 = u0 + self.du;
            let decay = (-self.du / self.t).exp();
            let next = decay * nodes[k - 1] + self.weighted_integral(u0, u1);
            nodes.push(next);
        }
    }

    /// `m(u)` for `u ≥ 2t` (tiny negative excursions below `2t` are clamped).
    pub fn eval(&self, u: f64) -> Result<f64> {
        let base = 2.0 * self.t;
        if u < base - 1e-9 * self.t.max(1.0) {
            return Err(Error::Precondition(format!(
                "slope function evaluated at u = {u} < 2t = {base}"
            )));
        }
        let u = u.max(base);
        let j = ((u - base) / self.du).floor() as usize;
        self.ensure_nodes(j);
        let mj = self.nodes.read().unwrap()[j];
        let uj = base + j as f64 * self.du;
        if u == uj {
            return Ok(mj);
        }
        Ok(((uj - u) / self.t).exp() * mj + self.weighted_integral(uj, u))
    }

    /// Residual `t·m'(u) + m(u) - h'(u)` with `m'` from finite differences
    /// (centered in the interior, second-order one-sided at `u = 2t`).
    pub fn ode_residual(&self, u: f64) -> Result<f64> {
        let s = 1e-6 * self.t.max(1.0);
        let mp = if u - s >= 2.0 * self.t {
            (self.eval(u + s)? - self.eval(u - s)?) / (2.0 * s)
        } else {
            (-3.0 * self.eval(u)? + 4.0 * self.eval(u + s)? - self.eval(u + 2.0 * s)?) / (2.0 * s)
        };
        Ok(self.t * mp + self.eval(u)? - self.hp(u))
    }
}

fn adaptive_simpson(g: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = g(a);
    let fb = g(b);
    let m = 0.5 * (a + b);
    let fm = g(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(g, a, b, fa, fm, fb, whole, tol, 30)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    g: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = g(lm);
    let frm = g(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(g, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson_rec(g, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_condition() {
        let t = 0.7;
        let h = OscillationGauge::power(0.5).unwrap();
        let m = SlopeFunction::new(t, h.clone(), 1e-9).unwrap();
        let expect = h.eval(2.0 * t) / (2.0 * t);
        assert!((m.eval(2.0 * t).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn linear_gauge_gives_constant_one() {
        // h(s) = s: m ≡ 1 solves t·0 + 1 = 1 with m(2t) = 1
        let h = OscillationGauge::power(1.0).unwrap();
        let m = SlopeFunction::new(1.0, h, 1e-10).unwrap();
        for &u in &[2.0, 2.5, 3.0, 5.0, 12.0] {
            assert!((m.eval(u).unwrap() - 1.0).abs() < 1e-8, "m({u})");
        }
    }

    #[test]
    fn matches_runge_kutta_oracle() {
        // independent RK4 integration of the Cauchy problem
        let t = 1.0;
        let h = OscillationGauge::power(0.5).unwrap();
        let m = SlopeFunction::new(t, h.clone(), 1e-10).unwrap();
        let f = |u: f64, y: f64| (h.d1(u) - y) / t;
        let mut u = 2.0 * t;
        let mut y = h.eval(2.0 * t) / (2.0 * t);
        let step = 1e-4;
        while u < 3.0 - step / 2.0 {
            let k1 = f(u, y);
            let k2 = f(u + step / 2.0, y + step / 2.0 * k1);
            let k3 = f(u + step / 2.0, y + step / 2.0 * k2);
            let k4 = f(u + step, y + step * k3);
            y += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            u += step;
        }
        assert!((m.eval(3.0).unwrap() - y).abs() < 1e-8, "quad {} vs rk {}", m.eval(3.0).unwrap(), y);
    }

    #[test]
    fn ode_residual_small() {
        let t = 1.0;
        for h in [OscillationGauge::power(0.5).unwrap(), OscillationGauge::log1p()] {
            let m = SlopeFunction::new(t, h, 1e-10).unwrap();
            for i in 0..100 {
                let u = 2.0 * t + 18.0 * t * i as f64 / 99.0;
                assert!(m.ode_residual(u).unwrap().abs() < 1e-7, "u={u}");
            }
        }
    }

    #[test]
    fn rejects_below_two_t() {
        let m = SlopeFunction::new(1.0, OscillationGauge::log1p(), 1e-9).unwrap();
        assert!(m.eval(1.5).is_err());
    }

    #[test]
    fn finite_difference_warning_flag() {
        let bare = OscillationGauge::from_fn("sqrt", crate::gauge::GaugeFlags::all(), |t| t.sqrt());
        let m = SlopeFunction::new(1.0, bare, 1e-9).unwrap();
        assert!(m.uses_finite_differences());
        let with = SlopeFunction::new(1.0, OscillationGauge::power(0.5).unwrap(), 1e-9).unwrap();
        assert!(!with.uses_finite_differences());
    }
}
