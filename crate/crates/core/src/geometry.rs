//! Index-set geometry for blockwise estimators.
//!
//! Indices in this module are 1-based and intervals are closed, so
//! `Interval::new(1, 4)` is `{1, 2, 3, 4}`. Conversion to 0-based storage
//! happens in [`Interval::range`] and in [`restrict`].

use std::ops::Range;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Closed, non-empty integer interval `[start, end]`, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    start: usize,
    end: usize,
}

impl Interval {
    pub fn new(start: usize, end: usize) -> Result<Self> {
        if start == 0 || end < start {
            return Err(Error::arg(format!("invalid interval [{start}, {end}]")));
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, i: usize) -> bool {
        self.start <= i && i <= self.end
    }

    /// 0-based half-open range for storage access.
    pub fn range(&self) -> Range<usize> {
        (self.start - 1)..self.end
    }
}

/// Rectangular block `I × J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndexBlock {
    pub rows: Interval,
    pub cols: Interval,
}

impl IndexBlock {
    pub fn new(rows: Interval, cols: Interval) -> Self {
        Self { rows, cols }
    }

    /// Square block `I × I`.
    pub fn diagonal(i: Interval) -> Self {
        Self { rows: i, cols: i }
    }

    pub fn full(d: usize) -> Result<Self> {
        let i = Interval::new(1, d)?;
        Ok(Self::diagonal(i))
    }

    /// `|B| = |I|·|J|`.
    pub fn size(&self) -> usize {
        self.rows.len() * self.cols.len()
    }

    /// True when the block straddles the diagonal as `I × I`.
    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
    }

    pub fn check_within(&self, d: usize) -> Result<()> {
        if self.rows.end > d || self.cols.end > d {
            return Err(Error::arg(format!(
                "block [{}..{}]x[{}..{}] exceeds dimension {d}",
                self.rows.start, self.rows.end, self.cols.start, self.cols.end
            )));
        }
        Ok(())
    }
}

/// A set of matrix cells, queried with 1-based indices.
pub trait Region {
    fn contains(&self, i: usize, j: usize) -> bool;
}

impl Region for IndexBlock {
    fn contains(&self, i: usize, j: usize) -> bool {
        self.rows.contains(i) && self.cols.contains(j)
    }
}

/// Partition of `[1, d]` into `⌈d/k⌉` consecutive intervals of length `k`
/// (the last may be shorter).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BandPartition {
    dim: usize,
    block_size: usize,
    intervals: Vec<Interval>,
}

impl BandPartition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn num_blocks(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// `I_{k,l}`, 1-based `l`.
    pub fn interval(&self, l: usize) -> Interval {
        self.intervals[l - 1]
    }

    /// `B_{k;l} = I_l × I_l`.
    pub fn diagonal_block(&self, l: usize) -> IndexBlock {
        IndexBlock::diagonal(self.interval(l))
    }

    /// `B_{k;l+} = I_l × I_{l+1}`, absent for the last `l`.
    pub fn super_block(&self, l: usize) -> Option<IndexBlock> {
        (l < self.num_blocks()).then(|| IndexBlock::new(self.interval(l), self.interval(l + 1)))
    }

    /// Blocks estimated by the tridiagonal estimator: every diagonal block
    /// followed by its super-diagonal neighbour, in order of `l`.
    pub fn upper_tridiagonal_blocks(&self) -> Vec<IndexBlock> {
        let mut out = Vec::with_capacity(2 * self.num_blocks());
        for l in 1..=self.num_blocks() {
            out.push(self.diagonal_block(l));
            if let Some(b) = self.super_block(l) {
                out.push(b);
            }
        }
        out
    }

    /// Index `l` of the interval containing coordinate `i`.
    pub fn block_of(&self, i: usize) -> usize {
        (i - 1) / self.block_size + 1
    }
}

pub fn band_partition(d: usize, k: usize) -> Result<BandPartition> {
    if d == 0 || k == 0 {
        return Err(Error::arg(format!(
            "band partition needs d >= 1 and k >= 1 (got d={d}, k={k})"
        )));
    }
    let n_blocks = d.div_ceil(k);
    let intervals = (1..=n_blocks)
        .map(|l| Interval::new(1 + (l - 1) * k, (l * k).min(d)))
        .collect::<Result<Vec<_>>>()?;
    Ok(BandPartition {
        dim: d,
        block_size: k,
        intervals,
    })
}

/// Boolean `d × d` cell indicator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegionMask {
    dim: usize,
    cells: Vec<bool>,
}

impl RegionMask {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            cells: vec![false; dim * dim],
        }
    }

    pub fn full(dim: usize) -> Self {
        Self {
            dim,
            cells: vec![true; dim * dim],
        }
    }

    pub fn from_region(dim: usize, region: &impl Region) -> Self {
        let mut m = Self::empty(dim);
        for i in 1..=dim {
            for j in 1..=dim {
                m.cells[(i - 1) * dim + (j - 1)] = region.contains(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn insert(&mut self, i: usize, j: usize) {
        self.cells[(i - 1) * self.dim + (j - 1)] = true;
    }

    pub fn insert_block(&mut self, b: &IndexBlock) {
        for i in b.rows.start..=b.rows.end {
            for j in b.cols.start..=b.cols.end {
                self.insert(i, j);
            }
        }
    }

    pub fn insert_region(&mut self, r: &impl Region) {
        for i in 1..=self.dim {
            for j in 1..=self.dim {
                if r.contains(i, j) {
                    self.insert(i, j);
                }
            }
        }
    }

    /// Adds the transpose of every cell.
    pub fn symmetrize(&mut self) {
        for i in 1..=self.dim {
            for j in (i + 1)..=self.dim {
                let v = self.contains(i, j) || self.contains(j, i);
                self.cells[(i - 1) * self.dim + (j - 1)] = v;
                self.cells[(j - 1) * self.dim + (i - 1)] = v;
            }
        }
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn union(&self, other: &RegionMask) -> RegionMask {
        assert_eq!(self.dim, other.dim);
        RegionMask {
            dim: self.dim,
            cells: self.cells.iter().zip(&other.cells).map(|(a, b)| *a || *b).collect(),
        }
    }

    pub fn intersects(&self, other: &RegionMask) -> bool {
        self.cells.iter().zip(&other.cells).any(|(a, b)| *a && *b)
    }

    pub fn is_subset_of(&self, other: &RegionMask) -> bool {
        self.cells.iter().zip(&other.cells).all(|(a, b)| !*a || *b)
    }

    /// Cells where `m` is non-zero.
    pub fn support_of(m: &Matrix) -> RegionMask {
        assert!(m.is_square());
        RegionMask {
            dim: m.rows(),
            cells: m.data().iter().map(|v| *v != 0.0).collect(),
        }
    }
}

impl Region for RegionMask {
    fn contains(&self, i: usize, j: usize) -> bool {
        i >= 1 && j >= 1 && i <= self.dim && j <= self.dim && self.cells[(i - 1) * self.dim + (j - 1)]
    }
}

/// Zeroes every cell of `m` outside `s`. For rectangular input the cells are
/// addressed relative to `(row_offset, col_offset)` (0-based), so a block
/// extracted from a larger matrix can be restricted with a global region.
pub fn restrict_offset(m: &Matrix, s: &impl Region, row_offset: usize, col_offset: usize) -> Matrix {
    Matrix::from_fn(m.rows(), m.cols(), |i, j| {
        if s.contains(row_offset + i + 1, col_offset + j + 1) {
            m.get(i, j)
        } else {
            0.0
        }
    })
}

/// `M[S]`: entries outside `s` set to zero.
pub fn restrict(m: &Matrix, s: &impl Region) -> Matrix {
    restrict_offset(m, s, 0, 0)
}

/// Union of `B_{k;l}`, `B_{k;l+}` and `B_{k;l-}` over all `l`.
pub fn tridiagonal_mask(p: &BandPartition) -> RegionMask {
    let mut mask = RegionMask::empty(p.dim());
    for b in p.upper_tridiagonal_blocks() {
        mask.insert_block(&b);
    }
    mask.symmetrize();
    mask
}

/// L-shaped region `Γ^m_{l+} = B^m_{l+} \ B^{m-1}_{2l+}` (upper triangle).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GammaRegion {
    pub level: usize,
    pub l: usize,
    /// `B^m_{l+}`.
    pub block: IndexBlock,
    /// `B^{m-1}_{2l+}`, removed from `block`; `None` if it does not exist.
    pub corner: Option<IndexBlock>,
}

impl GammaRegion {
    pub fn cell_count(&self) -> usize {
        let removed = self.corner.map_or(0, |c| {
            let r = overlap(c.rows, self.block.rows);
            let cc = overlap(c.cols, self.block.cols);
            r * cc
        });
        self.block.size() - removed
    }
}

fn overlap(a: Interval, b: Interval) -> usize {
    let lo = a.start.max(b.start);
    let hi = a.end.min(b.end);
    if hi >= lo {
        hi - lo + 1
    } else {
        0
    }
}

impl Region for GammaRegion {
    fn contains(&self, i: usize, j: usize) -> bool {
        self.block.contains(i, j) && !self.corner.is_some_and(|c| c.contains(i, j))
    }
}

/// Multi-level partition with block sizes `k_m = 2^m k0`.
#[derive(Debug, Clone)]
pub struct HierarchicalPartition {
    dim: usize,
    base_size: usize,
    max_level: usize,
    levels: Vec<BandPartition>,
    gammas: Vec<Vec<GammaRegion>>,
}

impl HierarchicalPartition {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn base_size(&self) -> usize {
        self.base_size
    }

    /// `M`; levels `0..M` are materialized.
    pub fn max_level(&self) -> usize {
        self.max_level
    }

    pub fn level(&self, m: usize) -> &BandPartition {
        &self.levels[m]
    }

    pub fn block_size(&self, m: usize) -> usize {
        self.levels[m].block_size()
    }

    /// Γ regions for level `m ≥ 1`, one per `l` with `B^m_{l+}` defined.
    pub fn gammas(&self, m: usize) -> &[GammaRegion] {
        assert!(m >= 1, "Γ regions start at level 1");
        &self.gammas[m - 1]
    }

    pub fn all_gammas(&self) -> impl Iterator<Item = &GammaRegion> {
        self.gammas.iter().flatten()
    }

    /// Level-0 tridiagonal band `𝓑_0`.
    pub fn base_band_mask(&self) -> RegionMask {
        tridiagonal_mask(&self.levels[0])
    }

    /// `𝓑_0` plus every Γ region (and mirror) up to level `m`.
    pub fn union_mask_up_to(&self, m: usize) -> RegionMask {
        let mut mask = self.base_band_mask();
        for level in 1..=m {
            for g in self.gammas(level) {
                mask.insert_region(g);
            }
        }
        mask.symmetrize();
        mask
    }
}

/// Builds the doubling partition used by the adaptive estimator, with
/// `M = max{m ≥ 1 : 2^m k0 ≤ min(c0·n, d)} + 1` (`M = 1` if no `m` qualifies).
pub fn hierarchical_partition(d: usize, k0: usize, n: usize, c0: f64) -> Result<HierarchicalPartition> {
    if k0 == 0 {
        return Err(Error::arg("base block size k0 must be at least 1"));
    }
    if d < k0 {
        return Err(Error::arg(format!("dimension {d} is smaller than base block size {k0}")));
    }
    if !(c0 > 0.0) {
        return Err(Error::arg("c0 must be positive"));
    }
    let cap = (c0 * n as f64).min(d as f64);
    let mut max_m = 0usize;
    let mut m = 1usize;
    while let Some(km) = k0.checked_shl(m as u32).filter(|_| m < usize::BITS as usize) {
        if km as f64 > cap {
            break;
        }
        max_m = m;
        m += 1;
    }
    let max_level = max_m + 1;

    let levels = (0..max_level)
        .map(|m| band_partition(d, k0 << m))
        .collect::<Result<Vec<_>>>()?;

    let mut gammas = Vec::with_capacity(max_level.saturating_sub(1));
    for m in 1..max_level {
        let cur = &levels[m];
        let prev = &levels[m - 1];
        let regions = (1..cur.num_blocks())
            .map(|l| {
                let block = cur.super_block(l).expect("l < N_m");
                let corner = if 2 * l < prev.num_blocks() {
                    prev.super_block(2 * l)
                } else {
                    None
                };
                GammaRegion {
                    level: m,
                    l,
                    block,
                    corner,
                }
            })
            .collect();
        gammas.push(regions);
    }

    Ok(HierarchicalPartition {
        dim: d,
        base_size: k0,
        max_level,
        levels,
        gammas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ivs(p: &BandPartition) -> Vec<(usize, usize)> {
        p.intervals().iter().map(|i| (i.start(), i.end())).collect()
    }

    #[test]
    fn band_partition_examples() {
        let p = band_partition(10, 4).unwrap();
        assert_eq!(p.num_blocks(), 3);
        assert_eq!(ivs(&p), vec![(1, 4), (5, 8), (9, 10)]);

        let p = band_partition(4, 4).unwrap();
        assert_eq!(ivs(&p), vec![(1, 4)]);

        let p = band_partition(7, 2).unwrap();
        assert_eq!(p.num_blocks(), 4);
        assert_eq!(ivs(&p)[3], (7, 7));
    }

    #[test]
    fn band_partition_k_exceeds_d() {
        let p = band_partition(3, 10).unwrap();
        assert_eq!(ivs(&p), vec![(1, 3)]);
        assert!(p.super_block(1).is_none());
        assert_eq!(p.upper_tridiagonal_blocks().len(), 1);
    }

    #[test]
    fn band_partition_rejects_zero() {
        assert!(band_partition(0, 1).is_err());
        assert!(band_partition(5, 0).is_err());
    }

    #[test]
    fn tridiagonal_mask_examples() {
        assert_eq!(tridiagonal_mask(&band_partition(4, 2).unwrap()).count(), 16);
        assert_eq!(tridiagonal_mask(&band_partition(3, 3).unwrap()).count(), 9);
    }

    #[test]
    fn tridiagonal_mask_d6_k2_brute_force() {
        // cells (i,j) whose 2-blocks differ by at most one
        let expected = (1..=6)
            .flat_map(|i| (1..=6).map(move |j| (i, j)))
            .filter(|(i, j): &(usize, usize)| ((i - 1) / 2).abs_diff((j - 1) / 2) <= 1)
            .count();
        assert_eq!(expected, 28);
        assert_eq!(tridiagonal_mask(&band_partition(6, 2).unwrap()).count(), expected);
    }

    #[test]
    fn hierarchical_levels() {
        let h = hierarchical_partition(50, 7, 500, 0.25).unwrap();
        assert_eq!(h.max_level(), 3);
        assert_eq!(h.block_size(2), 28);

        let h = hierarchical_partition(8, 8, 100, 0.5).unwrap();
        assert_eq!(h.max_level(), 1);
        assert_eq!(h.all_gammas().count(), 0);

        assert!(hierarchical_partition(3, 4, 100, 0.5).is_err());
    }

    #[test]
    fn gamma_shape_is_l() {
        let h = hierarchical_partition(16, 2, 1000, 0.5).unwrap();
        let g = h.gammas(1)[0];
        // B^1_{1+} = [1,4]x[5,8], corner B^0_{2+} = [3,4]x[5,6]
        assert_eq!(g.cell_count(), 16 - 4);
        assert!(g.contains(1, 5));
        assert!(!g.contains(3, 5));
        assert!(g.contains(4, 7));
    }

    #[test]
    fn restrict_examples() {
        let a = Matrix::from_fn(3, 3, |i, j| (i * 3 + j + 1) as f64);
        assert_eq!(restrict(&a, &RegionMask::full(3)), a);
        let off = IndexBlock::new(Interval::new(1, 1).unwrap(), Interval::new(2, 3).unwrap());
        let id = Matrix::identity(3);
        assert_eq!(restrict(&id, &off), Matrix::zeros(3, 3));
    }
}
