//! Dyadic geometry on the unit cube `Q = [0,1]^n` and the class of
//! dyadic-simple functions (constant on every depth-`m` dyadic cube).
//!
//! All cubes are rescaled to the unit cube; the functionals computed on top
//! of this module are scale- and shift-invariant, so nothing is lost.
//! Dyadic intervals are half-open `[a, b)` except at the right edge of `Q`;
//! boundary choices never affect averages of simple functions.

use crate::error::{Error, Result};
use crate::util::{pairwise_sum, pairwise_sum_by};

/// Desk-scale depth cap for a given dimension.
pub fn max_depth(n: usize) -> u32 {
    match n {
        1 => 22,
        2 => 10,
        3 => 6,
        _ => 0,
    }
}

/// Rejects dimensions and depths outside the supported desk-scale range.
pub fn check_caps(n: usize, depth: u32) -> Result<()> {
    if !(1..=3).contains(&n) || depth > max_depth(n) {
        return Err(Error::CapExceeded { n, depth });
    }
    Ok(())
}
// Note: the n=1 cap is 22 rather than a rounder 20 so that ten-term Haar
// series (orders up to 20) fit on a depth-21 mesh.

/// An index into the dyadic mesh of the unit cube: dimension `n`, depth `k`,
/// and one coordinate per axis, each in `[0, 2^k)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyadicCube {
    n: usize,
    depth: u32,
    index: Vec<u64>,
}

impl DyadicCube {
    pub fn new(n: usize, depth: u32, index: Vec<u64>) -> Result<Self> {
        check_caps(n, depth)?;
        if index.len() != n {
            return Err(Error::DimensionMismatch(index.len(), n));
        }
        let side = 1u64 << depth;
        if index.iter().any(|&c| c >= side) {
            return Err(Error::Precondition(format!(
                "cube index {index:?} out of range at depth {depth}"
            )));
        }
        Ok(Self { n, depth, index })
    }

    /// The whole unit cube.
    pub fn root(n: usize) -> Self {
        Self { n, depth: 0, index: vec![0; n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn index(&self) -> &[u64] {
        &self.index
    }

    /// Lebesgue measure, exactly `2^{-nk}`.
    pub fn measure(&self) -> f64 {
        0.5f64.powi((self.n as u32 * self.depth) as i32)
    }

    /// The `2^n` children at depth `k+1`, in lexicographic order with the
    /// first axis fastest.
    pub fn children(&self) -> Vec<DyadicCube> {
        let mut out = Vec::with_capacity(1 << self.n);
        for bits in 0u64..(1 << self.n) {
            let index = (0..self.n)
                .map(|a| 2 * self.index[a] + ((bits >> a) & 1))
                .collect();
            out.push(DyadicCube { n: self.n, depth: self.depth + 1, index });
        }
        out
    }

    /// Endpoints `[a, b)` for `n = 1`.
    pub fn interval(&self) -> (f64, f64) {
        debug_assert_eq!(self.n, 1);
        let w = 0.5f64.powi(self.depth as i32);
        (self.index[0] as f64 * w, (self.index[0] as f64 + 1.0) * w)
    }

    /// Flat indices (axis 0 fastest) of the depth-`m` leaves covered by this
    /// cube, in lexicographic order.
    pub fn covered_leaves(&self, m: u32) -> Vec<usize> {
        debug_assert!(m >= self.depth);
        let shift = m - self.depth;
        let block = 1usize << shift;
        let side = 1usize << m;
        let mut out = Vec::with_capacity(block.pow(self.n as u32));
        let starts: Vec<usize> = (0..self.n).map(|a| (self.index[a] << shift) as usize).collect();
        let mut coords = vec![0usize; self.n];
        loop {
            let mut flat = 0usize;
            for a in (0..self.n).rev() {
                flat = flat * side + (starts[a] + coords[a]);
            }
            out.push(flat);
            // odometer over the per-axis offsets, axis 0 fastest
            let mut a = 0;
            loop {
                if a == self.n {
                    return out;
                }
                coords[a] += 1;
                if coords[a] < block {
                    break;
                }
                coords[a] = 0;
                a += 1;
            }
        }
    }
}

/// All dyadic subcubes of the unit cube with depth `≤ max_d`, grouped by depth.
pub fn all_cubes(n: usize, max_d: u32) -> Vec<DyadicCube> {
    let mut level = vec![DyadicCube::root(n)];
    let mut out = level.clone();
    for _ in 0..max_d {
        let mut next = Vec::new();
        for c in &level {
            next.extend(c.children());
        }
        out.extend(next.iter().cloned());
        level = next;
    }
    out
}

/// A function constant on depth-`m` dyadic cubes of `[0,1]^n`, stored as a
/// flat array of `2^{nm}` leaf values (axis 0 fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicSimpleFunction {
    n: usize,
    depth: u32,
    leaves: Vec<f64>,
}

impl DyadicSimpleFunction {
    pub fn new(n: usize, depth: u32, leaves: Vec<f64>) -> Result<Self> {
        check_caps(n, depth)?;
        let want = 1usize << (n as u32 * depth);
        if leaves.len() != want {
            return Err(Error::Precondition(format!(
                "expected {want} leaves for n={n}, depth={depth}, got {}",
                leaves.len()
            )));
        }
        if leaves.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("non-finite leaf value".into()));
        }
        Ok(Self { n, depth, leaves })
    }

    pub fn constant(n: usize, depth: u32, c: f64) -> Result<Self> {
        check_caps(n, depth)?;
        let len = 1usize << (n as u32 * depth);
        Self::new(n, depth, vec![c; len])
    }

    /// The `L^∞`-normalized Haar function `h_k` of the interval
    /// `J_k = (2^{-k}, 2^{-k+1})`: `-1` on the left half, `+1` on the right
    /// half, `0` elsewhere. Requires `depth ≥ k + 1`.
    pub fn haar(k: u32, depth: u32) -> Result<Self> {
        if depth < k + 1 {
            return Err(Error::DepthTooSmall { order: k, depth });
        }
        check_caps(1, depth)?;
        let len = 1usize << depth;
        let mut leaves = vec![0.0; len];
        let lo = 1usize << (depth - k); // leaf index of 2^{-k}
        let hi = 1usize << (depth - k + 1); // leaf index of 2^{-k+1}
        let mid = (lo + hi) / 2;
        for v in &mut leaves[lo..mid] {
            *v = -1.0;
        }
        for v in &mut leaves[mid..hi] {
            *v = 1.0;
        }
        Self::new(1, depth, leaves)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn leaves(&self) -> &[f64] {
        &self.leaves
    }

    fn check_cube(&self, cube: &DyadicCube) -> Result<()> {
        if cube.n() != self.n {
            return Err(Error::DimensionMismatch(cube.n(), self.n));
        }
        if cube.depth() > self.depth {
            return Err(Error::DepthMismatch { cube: cube.depth(), function: self.depth });
        }
        Ok(())
    }

    /// Pairwise sum of `f(leaf)` over the leaves covered by `cube`.
    pub fn fold_cube(&self, cube: &DyadicCube, f: &dyn Fn(f64) -> f64) -> Result<f64> {
        self.check_cube(cube)?;
        if self.n == 1 {
            // contiguous slice, no gather needed
            let shift = self.depth - cube.depth();
            let lo = (cube.index()[0] << shift) as usize;
            let hi = lo + (1usize << shift);
            return Ok(pairwise_sum_by(&self.leaves[lo..hi], f));
        }
        let idx = cube.covered_leaves(self.depth);
        let gathered: Vec<f64> = idx.iter().map(|&i| self.leaves[i]).collect();
        Ok(pairwise_sum_by(&gathered, f))
    }

    /// Arithmetic mean of the leaves covered by `cube` (balanced pairwise).
    pub fn average(&self, cube: &DyadicCube) -> Result<f64> {
        self.check_cube(cube)?;
        let shift = (self.depth - cube.depth()) * self.n as u32;
        let count = 1u64 << shift;
        Ok(self.fold_cube(cube, &|v| v)? / count as f64)
    }

    /// Mean of squared leaves over `cube`.
    pub fn second_moment(&self, cube: &DyadicCube) -> Result<f64> {
        self.check_cube(cube)?;
        let shift = (self.depth - cube.depth()) * self.n as u32;
        let count = 1u64 << shift;
        Ok(self.fold_cube(cube, &|v| v * v)? / count as f64)
    }

    /// Mean over the whole cube.
    pub fn mean(&self) -> f64 {
        pairwise_sum(&self.leaves) / self.leaves.len() as f64
    }

    /// Dyadic truncation of order `m`: leaves are replaced by their depth-`m`
    /// dyadic averages. Averages over cubes of depth `≤ m` are preserved.
    pub fn truncate(&self, m: u32) -> DyadicSimpleFunction {
        let m = m.min(self.depth);
        let mut cur = self.leaves.clone();
        let mut d = self.depth;
        while d > m {
            cur = coarsen_once(self.n, d, &cur);
            d -= 1;
        }
        DyadicSimpleFunction { n: self.n, depth: m, leaves: cur }
    }

    /// Cut-off at height `M`: each leaf clamped into `[-M, M]`.
    pub fn clamp(&self, m: f64) -> Result<DyadicSimpleFunction> {
        if !(m >= 0.0) {
            return Err(Error::NegativeClamp(m));
        }
        let leaves = self.leaves.iter().map(|v| v.clamp(-m, m)).collect();
        Ok(DyadicSimpleFunction { n: self.n, depth: self.depth, leaves })
    }

    /// Refine the mesh to `depth ≥ self.depth` without changing the function.
    pub fn refine(&self, depth: u32) -> Result<DyadicSimpleFunction> {
        check_caps(self.n, depth)?;
        let mut cur = self.clone();
        while cur.depth < depth {
            let d = cur.depth + 1;
            let side = 1usize << d;
            let mut leaves = vec![0.0; 1 << (self.n as u32 * d)];
            for (flat, v) in leaves.iter_mut().enumerate() {
                // parent flat index: halve every axis coordinate
                let mut rem = flat;
                let mut parent = 0usize;
                let pside = side / 2;
                let mut stride = 1usize;
                for _ in 0..self.n {
                    let c = rem % side;
                    rem /= side;
                    parent += (c / 2) * stride;
                    stride *= pside;
                }
                *v = cur.leaves[parent];
            }
            cur = DyadicSimpleFunction { n: self.n, depth: d, leaves };
        }
        Ok(cur)
    }

    /// Pointwise linear combination; depths and dimensions must match.
    pub fn axpy(&self, a: f64, other: &DyadicSimpleFunction) -> Result<DyadicSimpleFunction> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(other.n, self.n));
        }
        if self.depth != other.depth {
            return Err(Error::DepthMismatch { cube: other.depth, function: self.depth });
        }
        let leaves = self
            .leaves
            .iter()
            .zip(&other.leaves)
            .map(|(x, y)| x + a * y)
            .collect();
        Ok(DyadicSimpleFunction { n: self.n, depth: self.depth, leaves })
    }

    /// `(1/(b-a)) ∫_a^b f(φ)` for `n = 1` and arbitrary `0 ≤ a < b ≤ 1`.
    pub fn mean_of_on(&self, a: f64, b: f64, f: &dyn Fn(f64) -> f64) -> f64 {
        debug_assert_eq!(self.n, 1);
        debug_assert!(a < b);
        let w = 0.5f64.powi(self.depth as i32);
        let i0 = ((a / w).floor() as usize).min(self.leaves.len() - 1);
        let i1 = (((b / w).ceil() as usize).max(i0 + 1)).min(self.leaves.len());
        let mut acc = 0.0;
        for i in i0..i1 {
            let lo = (i as f64 * w).max(a);
            let hi = ((i as f64 + 1.0) * w).min(b);
            if hi > lo {
                acc += (hi - lo) * f(self.leaves[i]);
            }
        }
        acc / (b - a)
    }

    /// Serialize in the DSF text format: `n`, `m`, then the leaf values.
    pub fn to_dsf_string(&self) -> String {
        let mut s = format!("{}\n{}\n", self.n, self.depth);
        for (i, v) in self.leaves.iter().enumerate() {
            if i > 0 {
                s.push(if i % 8 == 0 { '\n' } else { ' ' });
            }
            s.push_str(&format!("{v:?}"));
        }
        s.push('\n');
        s
    }

    /// Parse the DSF text format. Rejects wrong counts and non-finite values.
    pub fn from_dsf_str(text: &str) -> Result<Self> {
        let mut n = None;
        let mut depth = None;
        let mut leaves = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if n.is_none() {
                n = Some(line.parse::<usize>().map_err(|e| Error::Parse {
                    line: lineno + 1,
                    msg: format!("bad dimension: {e}"),
                })?);
            } else if depth.is_none() {
                depth = Some(line.parse::<u32>().map_err(|e| Error::Parse {
                    line: lineno + 1,
                    msg: format!("bad depth: {e}"),
                })?);
            } else {
                for tok in line.split_whitespace() {
                    let v = tok.parse::<f64>().map_err(|e| Error::Parse {
                        line: lineno + 1,
                        msg: format!("bad leaf value '{tok}': {e}"),
                    })?;
                    if !v.is_finite() {
                        return Err(Error::Parse {
                            line: lineno + 1,
                            msg: format!("non-finite leaf value '{tok}'"),
                        });
                    }
                    leaves.push(v);
                }
            }
        }
        let (n, depth) = match (n, depth) {
            (Some(n), Some(d)) => (n, d),
            _ => {
                return Err(Error::Parse { line: 1, msg: "missing header lines".into() });
            }
        };
        Self::new(n, depth, leaves)
    }
}

/// One coarsening step: each parent leaf becomes the mean of its `2^n`
/// children (pairwise over the gathered child block).
fn coarsen_once(n: usize, depth: u32, fine: &[f64]) -> Vec<f64> {
    let cside = 1usize << (depth - 1);
    let fside = 1usize << depth;
    let count = 1usize << n;
    let mut out = vec![0.0; 1 << (n as u32 * (depth - 1))];
    let mut buf = vec![0.0; count];
    for (flat, slot) in out.iter_mut().enumerate() {
        // decode parent coordinates
        let mut rem = flat;
        let mut base = vec![0usize; n];
        for b in base.iter_mut() {
            *b = (rem % cside) * 2;
            rem /= cside;
        }
        for (bits, b) in buf.iter_mut().enumerate() {
            let mut fine_flat = 0usize;
            for a in (0..n).rev() {
                fine_flat = fine_flat * fside + base[a] + ((bits >> a) & 1);
            }
            *b = fine[fine_flat];
        }
        *slot = pairwise_sum(&buf) / count as f64;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phi_pm2() -> DyadicSimpleFunction {
        DyadicSimpleFunction::new(1, 3, vec![-2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0]).unwrap()
    }

    fn haar_step() -> DyadicSimpleFunction {
        DyadicSimpleFunction::new(1, 1, vec![-1.0, 1.0]).unwrap()
    }

    #[test]
    fn cube_basics() {
        let root = DyadicCube::root(2);
        assert_eq!(root.measure(), 1.0);
        let kids = root.children();
        assert_eq!(kids.len(), 4);
        let total: f64 = kids.iter().map(|c| c.measure()).sum();
        assert!((total - 1.0).abs() < 1e-15);
        // children partition the leaves
        let mut all: Vec<usize> = kids.iter().flat_map(|c| c.covered_leaves(2)).collect();
        all.sort();
        assert_eq!(all, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn average_examples() {
        let q = DyadicCube::root(1);
        assert_eq!(haar_step().average(&q).unwrap(), 0.0);
        let c = DyadicSimpleFunction::constant(1, 4, 2.5).unwrap();
        let j = DyadicCube::new(1, 2, vec![3]).unwrap();
        assert_eq!(c.average(&j).unwrap(), 2.5);
        let j0 = DyadicCube::new(1, 2, vec![0]).unwrap();
        assert_eq!(phi_pm2().average(&j0).unwrap(), -1.0);
    }

    #[test]
    fn second_moment_examples() {
        let q = DyadicCube::root(1);
        assert_eq!(haar_step().second_moment(&q).unwrap(), 1.0);
        let c = DyadicSimpleFunction::constant(1, 2, -3.0).unwrap();
        assert_eq!(c.second_moment(&q).unwrap(), 9.0);
        assert_eq!(phi_pm2().second_moment(&q).unwrap(), 1.0);
    }

    #[test]
    fn average_errors() {
        let f = haar_step();
        let deep = DyadicCube::new(1, 2, vec![0]).unwrap();
        assert!(matches!(f.average(&deep), Err(Error::DepthMismatch { .. })));
        let wrong_dim = DyadicCube::root(2);
        assert!(matches!(f.average(&wrong_dim), Err(Error::DimensionMismatch(..))));
    }

    #[test]
    fn truncate_examples() {
        let f = phi_pm2();
        let t0 = f.truncate(0);
        assert_eq!(t0.leaves(), &[0.0]);
        assert_eq!(f.truncate(3), f);
        assert_eq!(f.truncate(2).leaves(), &[-1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn truncate_preserves_coarse_averages() {
        let f = DyadicSimpleFunction::new(2, 2, (0..16).map(|i| (i as f64).cos()).collect())
            .unwrap();
        let t = f.truncate(1);
        for cube in all_cubes(2, 1) {
            let a = f.average(&cube).unwrap();
            let b = t.average(&cube).unwrap();
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn clamp_examples() {
        assert_eq!(haar_step().clamp(1.0).unwrap(), haar_step());
        let f = DyadicSimpleFunction::new(1, 2, vec![-2.0, 0.0, 0.0, 2.0]).unwrap();
        assert_eq!(f.clamp(1.0).unwrap().leaves(), &[-1.0, 0.0, 0.0, 1.0]);
        assert_eq!(f.clamp(0.0).unwrap().leaves(), &[0.0; 4]);
        assert!(matches!(f.clamp(-1.0), Err(Error::NegativeClamp(_))));
        // idempotent
        assert_eq!(f.clamp(1.0).unwrap().clamp(1.0).unwrap(), f.clamp(1.0).unwrap());
    }

    #[test]
    fn haar_examples() {
        let h1 = DyadicSimpleFunction::haar(1, 3).unwrap();
        // -1 on (1/2,3/4], +1 on (3/4,1], 0 on [0,1/2]
        assert_eq!(h1.leaves(), &[0.0, 0.0, 0.0, 0.0, -1.0, -1.0, 1.0, 1.0]);
        for k in 1..4 {
            let h = DyadicSimpleFunction::haar(k, 5).unwrap();
            let q = DyadicCube::root(1);
            assert_eq!(h.average(&q).unwrap(), 0.0);
            let l1: f64 = h.mean_of_on(0.0, 1.0, &|v| v.abs());
            assert!((l1 - 0.5f64.powi(k as i32)).abs() < 1e-15);
        }
        assert!(matches!(
            DyadicSimpleFunction::haar(3, 3),
            Err(Error::DepthTooSmall { .. })
        ));
    }

    #[test]
    fn partition_identity() {
        let f = DyadicSimpleFunction::new(1, 4, (0..16).map(|i| ((i * 7) % 5) as f64).collect())
            .unwrap();
        for k in 0..=4u32 {
            let mut acc = 0.0;
            for i in 0..(1u64 << k) {
                let j = DyadicCube::new(1, k, vec![i]).unwrap();
                acc += j.measure() * f.average(&j).unwrap();
            }
            assert!((acc - f.mean()).abs() < 1e-12);
        }
    }

    #[test]
    fn refine_is_identity_on_averages() {
        let f = phi_pm2();
        let r = f.refine(5).unwrap();
        for cube in all_cubes(1, 3) {
            assert!((f.average(&cube).unwrap() - r.average(&cube).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn dsf_round_trip_and_rejects() {
        let f = phi_pm2();
        let s = f.to_dsf_string();
        let g = DyadicSimpleFunction::from_dsf_str(&s).unwrap();
        assert_eq!(f, g);
        assert!(DyadicSimpleFunction::from_dsf_str("1\n1\n0.5").is_err()); // wrong count
        assert!(DyadicSimpleFunction::from_dsf_str("1\n0\ninf").is_err());
        assert!(DyadicSimpleFunction::from_dsf_str("1\n").is_err());
    }

    #[test]
    fn caps_enforced() {
        assert!(DyadicSimpleFunction::constant(1, 23, 0.0).is_err());
        assert!(DyadicSimpleFunction::constant(2, 11, 0.0).is_err());
        assert!(DyadicSimpleFunction::constant(3, 7, 0.0).is_err());
        assert!(DyadicSimpleFunction::constant(3, 6, 0.0).is_ok());
    }

    #[test]
    fn mean_on_interval_matches_average() {
        let f = phi_pm2();
        assert!((f.mean_of_on(0.0, 0.25, &|v| v) - -1.0).abs() < 1e-15);
        assert!((f.mean_of_on(0.0, 1.0, &|v| v * v) - 1.0).abs() < 1e-15);
        // straddling a leaf boundary
        let m = f.mean_of_on(0.0625, 0.1875, &|v| v);
        assert!((m - (-2.0 * 0.0625 + 0.0 * 0.0625) / 0.125).abs() < 1e-15);
    }
}
