//! The oscillation functionals: dyadic BMO norm and `K^d_h` by exhaustive
//! tree scan, grid-approximated continuous norms (lower bounds of the true
//! suprema, exact for `n = 1` when the grid refines the mesh), and the
//! truncation comparison checks.

use crate::dyadic::{check_caps, DyadicCube, DyadicSimpleFunction};
use crate::error::{Error, Result};
use crate::gauge::OscillationGauge;

/// Where a supremum was attained.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    Cube(DyadicCube),
    /// `n = 1` interval `[a, b)`, possibly with refined real endpoints.
    Interval { a: f64, b: f64 },
    /// `n ≥ 2` grid cube: lower corner and side length.
    GridCube { corner: Vec<f64>, side: f64 },
}

/// Per-cube row of the exhaustive dyadic table.
#[derive(Debug, Clone)]
pub struct PerCubeRow {
    pub depth: u32,
    pub index: Vec<u64>,
    pub mean: f64,
    pub variance: f64,
    pub k_h_local: Option<f64>,
}

/// A supremum together with its witness.
#[derive(Debug, Clone)]
pub struct OscillationReport {
    pub value: f64,
    pub witness: Witness,
    pub per_cube: Option<Vec<PerCubeRow>>,
}

impl OscillationReport {
    /// Recompute the local value at the stored witness.
    pub fn reevaluate(&self, phi: &DyadicSimpleFunction, h: Option<&OscillationGauge>) -> Result<f64> {
        match &self.witness {
            Witness::Cube(j) => {
                let mean = phi.average(j)?;
                match h {
                    None => {
                        let var = (phi.second_moment(j)? - mean * mean).max(0.0);
                        Ok(var.sqrt())
                    }
                    Some(h) => {
                        let cnt = (1u64
                            << ((phi.depth() - j.depth()) * phi.n() as u32))
                            as f64;
                        Ok(phi.fold_cube(j, &|v| h.eval((v - mean).abs()))? / cnt)
                    }
                }
            }
            Witness::Interval { a, b } => {
                let mean = phi.mean_of_on(*a, *b, &|v| v);
                match h {
                    None => {
                        let var = phi.mean_of_on(*a, *b, &|v| (v - mean) * (v - mean)).max(0.0);
                        Ok(var.sqrt())
                    }
                    Some(h) => Ok(phi.mean_of_on(*a, *b, &|v| h.eval((v - mean).abs()))),
                }
            }
            Witness::GridCube { .. } => Err(Error::Precondition(
                "grid-cube witnesses re-evaluate through the grid scan".into(),
            )),
        }
    }
}

/// Per-depth tree of (sum, sum of squares) for every dyadic cube,
/// `tree[d][flat]` with flat indices axis-0-fastest.
pub(crate) fn moment_tree(phi: &DyadicSimpleFunction) -> Vec<Vec<(f64, f64)>> {
    let n = phi.n();
    let depth = phi.depth();
    let mut tree: Vec<Vec<(f64, f64)>> = Vec::with_capacity(depth as usize + 1);
    tree.push(phi.leaves().iter().map(|&v| (v, v * v)).collect());
    for d in (0..depth).rev() {
        let fine = &tree[0];
        let fside = 1usize << (d + 1);
        let cside = 1usize << d;
        let mut level = vec![(0.0, 0.0); 1 << (n as u32 * d)];
        for (flat, slot) in level.iter_mut().enumerate() {
            let mut rem = flat;
            let mut base = [0usize; 3];
            for b in base.iter_mut().take(n) {
                *b = (rem % cside) * 2;
                rem /= cside;
            }
            let mut s1 = 0.0;
            let mut s2 = 0.0;
            for bits in 0..(1usize << n) {
                let mut fine_flat = 0usize;
                for a in (0..n).rev() {
                    fine_flat = fine_flat * fside + base[a] + ((bits >> a) & 1);
                }
                s1 += fine[fine_flat].0;
                s2 += fine[fine_flat].1;
            }
            *slot = (s1, s2);
        }
        tree.insert(0, level);
    }
    tree
}

fn cube_from_flat(n: usize, d: u32, flat: usize) -> DyadicCube {
    let side = 1usize << d;
    let mut rem = flat;
    let mut index = vec![0u64; n];
    for c in index.iter_mut() {
        *c = (rem % side) as u64;
        rem /= side;
    }
    DyadicCube::new(n, d, index).expect("flat index in range")
}

/// Exact supremum of `sqrt(⟨φ²⟩_J - ⟨φ⟩_J²)` over all dyadic subcubes of
/// depth `≤ φ.depth`, by one bottom-up tree pass. Ties break to the smallest
/// depth, then lexicographic index.
pub fn bmo_dyadic(phi: &DyadicSimpleFunction) -> OscillationReport {
    let tree = moment_tree(phi);
    let n = phi.n() as u32;
    let mut best = f64::NEG_INFINITY;
    let mut best_at = (0u32, 0usize);
    for (d, level) in tree.iter().enumerate() {
        let cnt = (1u64 << (n * (phi.depth() - d as u32))) as f64;
        for (flat, &(s1, s2)) in level.iter().enumerate() {
            let mean = s1 / cnt;
            let var = (s2 / cnt - mean * mean).max(0.0);
            if var > best {
                best = var;
                best_at = (d as u32, flat);
            }
        }
    }
    OscillationReport {
        value: best.max(0.0).sqrt(),
        witness: Witness::Cube(cube_from_flat(phi.n(), best_at.0, best_at.1)),
        per_cube: None,
    }
}

/// Exact supremum of `⟨h(|φ - ⟨φ⟩_J|)⟩_J` over all dyadic subcubes.
pub fn k_h_dyadic(phi: &DyadicSimpleFunction, h: &OscillationGauge) -> OscillationReport {
    let tree = moment_tree(phi);
    let n = phi.n() as u32;
    let mut best = f64::NEG_INFINITY;
    let mut best_at = (0u32, 0usize);
    for (d, level) in tree.iter().enumerate() {
        let cnt = (1u64 << (n * (phi.depth() - d as u32))) as f64;
        for (flat, &(s1, _)) in level.iter().enumerate() {
            let mean = s1 / cnt;
            let cube = cube_from_flat(phi.n(), d as u32, flat);
            let val = phi
                .fold_cube(&cube, &|v| h.eval((v - mean).abs()))
                .expect("cube within function")
                / cnt;
            if val > best {
                best = val;
                best_at = (d as u32, flat);
            }
        }
    }
    OscillationReport {
        value: best,
        witness: Witness::Cube(cube_from_flat(phi.n(), best_at.0, best_at.1)),
        per_cube: None,
    }
}

/// Exhaustive per-cube table (CSV-facing).
pub fn per_cube_table(phi: &DyadicSimpleFunction, h: Option<&OscillationGauge>) -> Vec<PerCubeRow> {
    let tree = moment_tree(phi);
    let n = phi.n() as u32;
    let mut rows = Vec::new();
    for (d, level) in tree.iter().enumerate() {
        let cnt = (1u64 << (n * (phi.depth() - d as u32))) as f64;
        for (flat, &(s1, s2)) in level.iter().enumerate() {
            let mean = s1 / cnt;
            let variance = (s2 / cnt - mean * mean).max(0.0);
            let cube = cube_from_flat(phi.n(), d as u32, flat);
            let k_h_local = h.map(|h| {
                phi.fold_cube(&cube, &|v| h.eval((v - mean).abs())).expect("in range") / cnt
            });
            rows.push(PerCubeRow {
                depth: d as u32,
                index: cube.index().to_vec(),
                mean,
                variance,
                k_h_local,
            });
        }
    }
    rows
}

/// Grid resolution caps (the scans are quadratic in the cell count).
fn check_grid_caps(n: usize, g: u32) -> Result<()> {
    let cap = match n {
        1 => 12,
        2 => 6,
        3 => 4,
        _ => 0,
    };
    if g > cap {
        return Err(Error::CapExceeded { n, depth: g });
    }
    Ok(())
}

fn grid_objective(
    phi: &DyadicSimpleFunction,
    a: f64,
    b: f64,
    h: Option<&OscillationGauge>,
) -> f64 {
    // exact zero where the function is constant on [a, b]: the mean itself
    // carries rounding noise from the fractional endpoint weights
    let w = 0.5f64.powi(phi.depth() as i32);
    let i0 = ((a / w).floor() as usize).min(phi.leaves().len() - 1);
    let i1 = ((b / w).ceil() as usize).max(i0 + 1).min(phi.leaves().len());
    let slice = &phi.leaves()[i0..i1];
    if slice.iter().all(|&v| v == slice[0]) {
        return match h {
            None => 0.0,
            Some(h) => h.eval(0.0),
        };
    }
    let mean = phi.mean_of_on(a, b, &|v| v);
    match h {
        None => phi.mean_of_on(a, b, &|v| (v - mean) * (v - mean)).max(0.0).sqrt(),
        Some(h) => phi.mean_of_on(a, b, &|v| h.eval((v - mean).abs())),
    }
}

/// One local ternary search per endpoint around the best grid interval.
/// Step functions attain the continuous supremum only in the limit of
/// endpoint perturbation; this documents the residual gap.
fn refine_interval(
    phi: &DyadicSimpleFunction,
    a: f64,
    b: f64,
    cell: f64,
    h: Option<&OscillationGauge>,
) -> (f64, f64, f64) {
    let mut best = (grid_objective(phi, a, b, h), a, b);
    for endpoint in 0..2 {
        let (mut lo, mut hi) = if endpoint == 0 {
            ((best.1 - cell).max(0.0), (best.1 + cell).min(best.2 - 1e-12))
        } else {
            ((best.2 - cell).max(best.1 + 1e-12), (best.2 + cell).min(1.0))
        };
        for _ in 0..80 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            let f1 = if endpoint == 0 {
                grid_objective(phi, m1, best.2, h)
            } else {
                grid_objective(phi, best.1, m1, h)
            };
            let f2 = if endpoint == 0 {
                grid_objective(phi, m2, best.2, h)
            } else {
                grid_objective(phi, best.1, m2, h)
            };
            if f1 < f2 {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        let x = 0.5 * (lo + hi);
        let v = if endpoint == 0 {
            grid_objective(phi, x, best.2, h)
        } else {
            grid_objective(phi, best.1, x, h)
        };
        if v > best.0 {
            if endpoint == 0 {
                best = (v, x, best.2);
            } else {
                best = (v, best.1, x);
            }
        }
    }
    best
}

/// Scan at resolutions `1 ..= g` and keep the best report, so the returned
/// value is non-decreasing in `g` by construction (the endpoint refinement
/// window scales with the cell size, so a single-resolution scan is not).
fn grid_scan_1d(
    phi: &DyadicSimpleFunction,
    g: u32,
    h: Option<&OscillationGauge>,
) -> Result<OscillationReport> {
    check_grid_caps(1, g)?;
    let mut best: Option<OscillationReport> = None;
    for gi in 1..=g.max(1) {
        let rep = grid_scan_1d_at(phi, gi, h)?;
        if best.as_ref().map_or(true, |b| rep.value > b.value) {
            best = Some(rep);
        }
    }
    Ok(best.expect("at least one resolution scanned"))
}

fn grid_scan_1d_at(
    phi: &DyadicSimpleFunction,
    g: u32,
    h: Option<&OscillationGauge>,
) -> Result<OscillationReport> {
    let work = if g > phi.depth() { phi.refine(g)? } else { phi.clone() };
    let d = work.depth();
    let step = 1usize << (d - g); // leaves per grid cell
    let cells = 1usize << g;
    let leaves = work.leaves();
    // prefix sums for the variance fast path
    let mut p1 = vec![0.0; leaves.len() + 1];
    let mut p2 = vec![0.0; leaves.len() + 1];
    for (i, &v) in leaves.iter().enumerate() {
        p1[i + 1] = p1[i] + v;
        p2[i + 1] = p2[i] + v * v;
    }
    let cell = 0.5f64.powi(g as i32);
    let mut best = f64::NEG_INFINITY;
    let mut best_ij = (0usize, 1usize);
    for i in 0..cells {
        for j in (i + 1)..=cells {
            let (lo, hi) = (i * step, j * step);
            let cnt = (hi - lo) as f64;
            let val = match h {
                None => {
                    let mean = (p1[hi] - p1[lo]) / cnt;
                    ((p2[hi] - p2[lo]) / cnt - mean * mean).max(0.0).sqrt()
                }
                Some(h) => {
                    let mean = (p1[hi] - p1[lo]) / cnt;
                    let mut acc = 0.0;
                    for &v in &leaves[lo..hi] {
                        acc += h.eval((v - mean).abs());
                    }
                    acc / cnt
                }
            };
            if val > best {
                best = val;
                best_ij = (i, j);
            }
        }
    }
    let (a, b) = (best_ij.0 as f64 * cell, best_ij.1 as f64 * cell);
    let (value, ra, rb) = refine_interval(&work, a, b, cell, h);
    Ok(OscillationReport {
        value: value.max(best),
        witness: Witness::Interval { a: ra, b: rb },
        per_cube: None,
    })
}

fn grid_scan_nd(
    phi: &DyadicSimpleFunction,
    g: u32,
    h: Option<&OscillationGauge>,
) -> Result<OscillationReport> {
    let n = phi.n();
    check_grid_caps(n, g)?;
    let work = if g > phi.depth() { phi.refine(g)? } else { phi.clone() };
    let d = work.depth();
    let step = 1u64 << (d - g);
    let cells = 1u64 << g;
    let cell = 0.5f64.powi(g as i32);
    let mut best = f64::NEG_INFINITY;
    let mut best_cube: Option<(Vec<u64>, u64)> = None;
    let mut corner = vec![0u64; n];
    // equal side lengths only, matching the cube-based norm
    for side in 1..=cells {
        let span = cells - side + 1;
        corner.iter_mut().for_each(|c| *c = 0);
        'pos: loop {
            let val = cube_value(&work, &corner, side, step, h);
            if val > best {
                best = val;
                best_cube = Some((corner.clone(), side));
            }
            let mut a = 0;
            loop {
                if a == n {
                    break 'pos;
                }
                corner[a] += 1;
                if corner[a] < span {
                    break;
                }
                corner[a] = 0;
                a += 1;
            }
        }
    }
    let (c, side) = best_cube.expect("at least one cube scanned");
    Ok(OscillationReport {
        value: best,
        witness: Witness::GridCube {
            corner: c.iter().map(|&x| x as f64 * cell).collect(),
            side: side as f64 * cell,
        },
        per_cube: None,
    })
}

/// Mean-oscillation value over the grid cube with lower corner `corner`
/// (in cells) and side `side` cells, at leaf scale `step` leaves per cell.
fn cube_value(
    work: &DyadicSimpleFunction,
    corner: &[u64],
    side: u64,
    step: u64,
    h: Option<&OscillationGauge>,
) -> f64 {
    let n = work.n();
    let d = work.depth();
    let leaf_side = 1u64 << d;
    let lo: Vec<u64> = corner.iter().map(|&c| c * step).collect();
    let len = side * step;
    let leaves = work.leaves();
    let count = (len as f64).powi(n as i32);
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let mut coords = vec![0u64; n];
    loop {
        let mut flat = 0u64;
        for a in (0..n).rev() {
            flat = flat * leaf_side + lo[a] + coords[a];
        }
        let v = leaves[flat as usize];
        s1 += v;
        s2 += v * v;
        let mut a = 0;
        loop {
            if a == n {
                let mean = s1 / count;
                return match h {
                    None => (s2 / count - mean * mean).max(0.0).sqrt(),
                    Some(h) => {
                        // second pass for the gauge integrand
                        let mut acc = 0.0;
                        let mut cs = vec![0u64; n];
                        loop {
                            let mut fl = 0u64;
                            for ax in (0..n).rev() {
                                fl = fl * leaf_side + lo[ax] + cs[ax];
                            }
                            acc += h.eval((leaves[fl as usize] - mean).abs());
                            let mut ax = 0;
                            loop {
                                if ax == n {
                                    return acc / count;
                                }
                                cs[ax] += 1;
                                if cs[ax] < len {
                                    break;
                                }
                                cs[ax] = 0;
                                ax += 1;
                            }
                        }
                    }
                };
            }
            coords[a] += 1;
            if coords[a] < len {
                break;
            }
            coords[a] = 0;
            a += 1;
        }
    }
}

/// Supremum of `sqrt(variance)` over axis-aligned subcubes with corners on
/// the `2^{-g}` grid. A lower bound of the continuous norm; exact in `n = 1`
/// when `g ≥ φ.depth` up to the endpoint-refinement residual.
pub fn bmo_grid(phi: &DyadicSimpleFunction, g: u32) -> Result<OscillationReport> {
    if phi.n() == 1 {
        grid_scan_1d(phi, g, None)
    } else {
        grid_scan_nd(phi, g, None)
    }
}

/// Same scan with the `K_h` integrand.
pub fn k_h_grid(
    phi: &DyadicSimpleFunction,
    h: &OscillationGauge,
    g: u32,
) -> Result<OscillationReport> {
    if phi.n() == 1 {
        grid_scan_1d(phi, g, Some(h))
    } else {
        grid_scan_nd(phi, g, Some(h))
    }
}

/// Margins for the two truncation comparison bounds.
#[derive(Debug, Clone, Copy)]
pub struct TruncationGapReport {
    pub k_full: f64,
    pub k_truncated: f64,
    pub diff_norm: f64,
    /// `2 K^d(φ) - K^d(φ_m)`; must be ≥ -1e-10.
    pub doubling_margin: f64,
    /// `K^d(φ) + h(‖φ-φ_m‖) - K^d(φ_m)`; must be ≥ -1e-10.
    pub lipschitz_margin: f64,
}

/// Evaluates both sides of the truncation bounds
/// `K^d(φ_m) ≤ 2 K^d(φ)` and `K^d(φ_m) ≤ K^d(φ) + h(‖φ-φ_m‖_{BMO^d})`.
pub fn truncation_gap_check(
    phi: &DyadicSimpleFunction,
    h: &OscillationGauge,
    m: u32,
) -> Result<TruncationGapReport> {
    h.require("vanishes_at_zero")?;
    h.require("increasing")?;
    h.require("concave")?;
    let truncated = phi.truncate(m).refine(phi.depth())?;
    let k_full = k_h_dyadic(phi, h).value;
    let k_truncated = k_h_dyadic(&truncated, h).value;
    let diff = phi.axpy(-1.0, &truncated)?;
    let diff_norm = bmo_dyadic(&diff).value;
    Ok(TruncationGapReport {
        k_full,
        k_truncated,
        diff_norm,
        doubling_margin: 2.0 * k_full - k_truncated,
        lipschitz_margin: k_full + h.eval(diff_norm) - k_truncated,
    })
}

/// Convenience: dyadic BMO norm as a number.
pub fn bmo_dyadic_norm(phi: &DyadicSimpleFunction) -> f64 {
    bmo_dyadic(phi).value
}

/// Caps re-exported for callers that size scans.
pub fn grid_cap(n: usize) -> u32 {
    match n {
        1 => 12,
        2 => 6,
        3 => 4,
        _ => 0,
    }
}

#[allow(unused)]
fn unused_check_caps_guard() {
    let _ = check_caps(1, 0);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicSimpleFunction as Dsf;

    fn phi_pm2() -> Dsf {
        Dsf::new(1, 3, vec![-2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0]).unwrap()
    }

    fn haar_step() -> Dsf {
        Dsf::new(1, 1, vec![-1.0, 1.0]).unwrap()
    }

    #[test]
    fn bmo_dyadic_examples() {
        let r = bmo_dyadic(&haar_step());
        assert_eq!(r.value, 1.0);
        assert_eq!(r.witness, Witness::Cube(DyadicCube::root(1)));
        assert_eq!(bmo_dyadic(&Dsf::constant(1, 3, 4.0).unwrap()).value, 0.0);
        // brute-force oracle over all 15 dyadic intervals of depth ≤ 3
        let phi = phi_pm2();
        let mut brute = 0.0f64;
        for c in crate::dyadic::all_cubes(1, 3) {
            let m = phi.average(&c).unwrap();
            brute = brute.max((phi.second_moment(&c).unwrap() - m * m).max(0.0).sqrt());
        }
        assert!((brute - 1.0).abs() < 1e-12);
        let r = bmo_dyadic(&phi);
        assert!((r.value - brute).abs() < 1e-12);
        // tie-break: variance 1 at Q, [0,1/4], [3/4,1] → smallest depth wins
        assert_eq!(r.witness, Witness::Cube(DyadicCube::root(1)));
    }

    #[test]
    fn k_h_dyadic_examples() {
        let h = OscillationGauge::power(0.5).unwrap();
        let r = k_h_dyadic(&haar_step(), &h);
        assert!((r.value - 1.0).abs() < 1e-12);
        assert_eq!(k_h_dyadic(&Dsf::constant(1, 2, 3.0).unwrap(), &h).value, 0.0);
        // sharpness witness at J = Q: value h(2)/4
        let phi = phi_pm2();
        let q = DyadicCube::root(1);
        let mean = phi.average(&q).unwrap();
        let at_q = phi.fold_cube(&q, &|v| h.eval((v - mean).abs())).unwrap() / 8.0;
        assert!((at_q - h.eval(2.0) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn witness_reproduces_value() {
        let phi = phi_pm2();
        let h = OscillationGauge::log1p();
        let r = bmo_dyadic(&phi);
        assert!((r.reevaluate(&phi, None).unwrap() - r.value).abs() < 1e-12);
        let rk = k_h_dyadic(&phi, &h);
        assert!((rk.reevaluate(&phi, Some(&h)).unwrap() - rk.value).abs() < 1e-12);
    }

    #[test]
    fn bmo_grid_examples() {
        let r = bmo_grid(&haar_step(), 3).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
        assert_eq!(bmo_grid(&Dsf::constant(1, 2, 7.0).unwrap(), 3).unwrap().value, 0.0);
        // exhaustive scan for the ±2 witness: continuous and dyadic agree
        let r = bmo_grid(&phi_pm2(), 3).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9, "got {}", r.value);
    }

    #[test]
    fn k_h_grid_examples() {
        let h = OscillationGauge::power(0.5).unwrap();
        assert_eq!(k_h_grid(&Dsf::constant(1, 1, 0.0).unwrap(), &h, 2).unwrap().value, 0.0);
        let r = k_h_grid(&haar_step(), &h, 3).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
        // dyadic sup never exceeds the grid sup
        let phi = phi_pm2();
        let kd = k_h_dyadic(&phi, &h).value;
        let kg = k_h_grid(&phi, &h, 3).unwrap().value;
        assert!(kd <= kg + 1e-12);
    }

    #[test]
    fn grid_monotone_in_resolution() {
        let phi = Dsf::new(1, 3, vec![0.3, -1.0, 2.0, 0.0, 0.5, -0.7, 1.1, 0.2]).unwrap();
        let mut prev = 0.0;
        for g in 3..=6 {
            let v = bmo_grid(&phi, g).unwrap().value;
            assert!(v >= prev - 1e-9, "g={g}: {v} < {prev}");
            prev = v;
        }
    }

    #[test]
    fn grid_caps_enforced() {
        let phi = haar_step();
        assert!(matches!(bmo_grid(&phi, 13), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn grid_2d_basics() {
        // checkerboard on the 2x2 mesh
        let phi = Dsf::new(2, 1, vec![1.0, -1.0, -1.0, 1.0]).unwrap();
        let r = bmo_grid(&phi, 2).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert_eq!(bmo_dyadic(&phi).value, 1.0);
    }

    #[test]
    fn truncation_gap_margins() {
        let h = OscillationGauge::power(0.5).unwrap();
        let phi = phi_pm2();
        for m in 0..=3 {
            let rep = truncation_gap_check(&phi, &h, m).unwrap();
            assert!(rep.doubling_margin >= -1e-10, "m={m}: {rep:?}");
            assert!(rep.lipschitz_margin >= -1e-10, "m={m}: {rep:?}");
        }
        // m ≥ depth: truncation is the identity
        let rep = truncation_gap_check(&phi, &h, 5).unwrap();
        assert!((rep.k_full - rep.k_truncated).abs() < 1e-12);
        // m = 0: constant truncation has K^d = 0
        let rep = truncation_gap_check(&phi, &h, 0).unwrap();
        assert_eq!(rep.k_truncated, 0.0);
    }

    #[test]
    fn truncation_refuses_unflagged_gauge() {
        let g = OscillationGauge::from_fn("raw", Default::default(), |t| t);
        assert!(truncation_gap_check(&phi_pm2(), &g, 1).is_err());
    }

    #[test]
    fn per_cube_table_covers_all_cubes() {
        let phi = phi_pm2();
        let rows = per_cube_table(&phi, Some(&OscillationGauge::log1p()));
        assert_eq!(rows.len(), 1 + 2 + 4 + 8);
        let best = rows.iter().map(|r| r.variance.sqrt()).fold(0.0f64, f64::max);
        assert!((best - bmo_dyadic(&phi).value).abs() < 1e-12);
    }
}
