//! Rising-sun decomposition at level `λ` for one-dimensional step functions:
//! finitely many disjoint intervals `{L_k}` with `⟨φ⟩_{L_k} = λ` exactly and
//! `φ ≤ λ` off their union.
//!
//! Worked on the primitive `F(x) = ∫_0^x (φ - λ)`: with
//! `G = min(F(0), suffix-max of F)`, the components of `{F ≠ G}` are the
//! `L_k`. `G` is non-increasing and constant across each component, which
//! yields `F(a) = F(b)` (the exact-mean condition) at the endpoints; off the
//! components `F = G` is non-increasing, which is `φ ≤ λ` a.e.

use crate::dyadic::DyadicSimpleFunction;
use crate::error::{Error, Result};

/// Disjoint subintervals of `[0,1]` with `⟨φ⟩ = λ`, covering `{φ > λ}` up to
/// a null set. Requires `n = 1` and `⟨φ⟩_Q ≤ λ`.
pub fn rising_sun(phi: &DyadicSimpleFunction, lambda: f64) -> Result<Vec<(f64, f64)>> {
    if phi.n() != 1 {
        return Err(Error::DimensionMismatch(phi.n(), 1));
    }
    let w = 1.0 / phi.leaves().len() as f64;
    let pieces: Vec<(f64, f64)> = phi.leaves().iter().map(|&v| (w, v)).collect();
    rising_sun_pieces(&pieces, lambda)
}

/// Same decomposition for an arbitrary piecewise-constant function given as
/// `(width, value)` pieces; the returned intervals live in `[0, Σ widths]`.
pub fn rising_sun_pieces(pieces: &[(f64, f64)], lambda: f64) -> Result<Vec<(f64, f64)>> {
    let total: f64 = pieces.iter().map(|p| p.0).sum();
    if !(total > 0.0) || pieces.iter().any(|&(w, _)| w < 0.0) {
        return Err(Error::Precondition("rising_sun needs positive total width".into()));
    }
    let mean = pieces.iter().map(|&(w, v)| w * v).sum::<f64>() / total;
    if mean > lambda + 1e-12 * (1.0 + lambda.abs() + mean.abs()) {
        return Err(Error::Precondition(format!(
            "rising_sun needs ⟨φ⟩_Q ≤ λ, got mean {mean} > {lambda}"
        )));
    }
    let m = pieces.len();
    // breakpoints and primitive F(x) = ∫_0^x (φ - λ)
    let mut xs = vec![0.0f64; m + 1];
    let mut f = vec![0.0f64; m + 1];
    for (i, &(w, v)) in pieces.iter().enumerate() {
        xs[i + 1] = xs[i] + w;
        f[i + 1] = f[i] + (v - lambda) * w;
    }
    // suffix max at breakpoints
    let mut smax = vec![f64::NEG_INFINITY; m + 1];
    smax[m] = f[m];
    for i in (0..m).rev() {
        smax[i] = f[i].max(smax[i + 1]);
    }
    let scale = f.iter().fold(1.0f64, |mx, v| mx.max(v.abs()));
    let tol = 1e-13 * scale;

    // Sub-breakpoints: piece boundaries plus the interior points where the
    // linear piece of F crosses 0 or the next suffix max; D = F - G is
    // linear between consecutive ones.
    let mut pts: Vec<(f64, f64)> = Vec::new(); // (x, D(x))
    let d_at = |x: f64, i: usize, f: &[f64]| -> f64 {
        let fi = f[i] + (pieces[i].1 - lambda) * (x - xs[i]);
        let s = fi.max(smax[i + 1]);
        fi - s.min(0.0)
    };
    for i in 0..m {
        let (x0, x1) = (xs[i], xs[i + 1]);
        let slope = pieces[i].1 - lambda;
        let mut cuts = vec![x0];
        if slope.abs() > 0.0 {
            for target in [0.0, smax[i + 1]] {
                let x = x0 + (target - f[i]) / slope;
                if x > x0 + 1e-15 && x < x1 - 1e-15 {
                    cuts.push(x);
                }
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for x in cuts {
            pts.push((x, d_at(x, i, &f)));
        }
    }
    pts.push((total, f[m] - f[m].min(0.0)));

    // walk the linear segments of D and extract components of {D ≠ 0}
    let mut intervals = Vec::new();
    let mut start: Option<f64> = None;
    for k in 0..pts.len() - 1 {
        let (x0, d0) = pts[k];
        let (x1, d1) = pts[k + 1];
        let z0 = d0.abs() <= tol;
        let z1 = d1.abs() <= tol;
        match (z0, z1) {
            (true, true) => {
                if let Some(a) = start.take() {
                    intervals.push((a, x0));
                }
            }
            (true, false) => {
                if start.is_none() {
                    start = Some(x0);
                }
            }
            (false, true) => {
                if start.is_none() {
                    start = Some(x0); // component began exactly at a sub-breakpoint
                }
                intervals.push((start.take().unwrap(), x1));
            }
            (false, false) => {
                if d0.signum() != d1.signum() {
                    // linear crossing splits two components
                    let z = x0 + (x1 - x0) * d0 / (d0 - d1);
                    intervals.push((start.take().unwrap_or(x0), z));
                    start = Some(z);
                } else if start.is_none() {
                    start = Some(x0);
                }
            }
        }
    }
    if let Some(a) = start.take() {
        intervals.push((a, total));
    }
    Ok(intervals.into_iter().filter(|(a, b)| b - a > 1e-12 * total.max(1.0)).collect())
}
