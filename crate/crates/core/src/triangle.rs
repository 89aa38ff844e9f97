//! The triangular-array operation game.
//!
//! `T_r` has entries `T_r(i,j) = r + 2 - i - j` for `i in [r]`, `j in [r+1-i]`.
//! A row operation on row `i` lowers every entry of that row by one, a column
//! operation likewise for a column. After `a_i` row and `b_j` column operations an
//! entry is *fixed* when it is `<= 0`, *weak* when it equals `1`, and *open* otherwise.
//! Entry `(i,j)` corresponds to the scarce row pair `(i, m+1-j)`.
//!
//! The searches below are exact. For a fixed row vector `a`, every column's
//! contribution depends only on its own `b_j`, so each column is optimized on its
//! own and the outer loop enumerates the `(r+1)^r` capped row vectors. Operation
//! counts above `r` never help because no entry exceeds `r`.

use thiserror::Error;

/// Largest `r` accepted by the exhaustive searches.
pub const EXHAUSTIVE_MAX_R: usize = 5;
/// Largest `r` accepted in extended mode.
pub const EXTENDED_MAX_R: usize = 7;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TriangleError {
    #[error("r = {r} is outside the supported range 1..={max} for {mode} search")]
    Size { r: usize, max: usize, mode: &'static str },
    #[error("operation vectors must both have length r = {r}")]
    Shape { r: usize },
    #[error("pair ({i},{j}) is not a scarce pair for m = {m}, r = {r}")]
    NotScarce { m: usize, r: usize, i: usize, j: usize },
}

/// Search range: exhaustive for `r <= 5`, or extended up to `r <= 7`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SearchMode {
    #[default]
    Exhaustive,
    Extended,
}

impl SearchMode {
    fn check(self, r: usize) -> Result<(), TriangleError> {
        let (max, mode) = match self {
            SearchMode::Exhaustive => (EXHAUSTIVE_MAX_R, "exhaustive"),
            SearchMode::Extended => (EXTENDED_MAX_R, "extended"),
        };
        if r == 0 || r > max {
            return Err(TriangleError::Size { r, max, mode });
        }
        Ok(())
    }

    pub fn label(self) -> &'static str {
        match self {
            SearchMode::Exhaustive => "exhaustive",
            SearchMode::Extended => "extended",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntryStatus {
    Fixed,
    Weak,
    Open,
}

impl EntryStatus {
    pub fn of_value(v: i64) -> Self {
        match v {
            v if v <= 0 => EntryStatus::Fixed,
            1 => EntryStatus::Weak,
            _ => EntryStatus::Open,
        }
    }
}

/// Row operation counts `a_1..a_r` and column operation counts `b_1..b_r`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriangleOps {
    r: usize,
    a: Vec<u32>,
    b: Vec<u32>,
}

impl TriangleOps {
    pub fn new(r: usize, a: Vec<u32>, b: Vec<u32>) -> Result<Self, TriangleError> {
        if a.len() != r || b.len() != r {
            return Err(TriangleError::Shape { r });
        }
        Ok(TriangleOps { r, a, b })
    }

    pub fn zero(r: usize) -> Self {
        TriangleOps { r, a: vec![0; r], b: vec![0; r] }
    }

    /// Operations induced by the standard layout: 0-non-edges on all pairs of
    /// rows `1..=r1+1` and 1-non-edges on all pairs of the last `r2+1` rows.
    pub fn from_layout(r: usize, r1: usize, r2: usize) -> Self {
        let a = (1..=r).map(|i| (r1 + 1).saturating_sub(i) as u32).collect();
        let b = (1..=r).map(|j| (r2 + 1).saturating_sub(j) as u32).collect();
        TriangleOps { r, a, b }
    }

    pub fn r(&self) -> usize {
        self.r
    }
    pub fn a(&self) -> &[u32] {
        &self.a
    }
    pub fn b(&self) -> &[u32] {
        &self.b
    }

    /// Total number of operations `N`.
    pub fn total(&self) -> u64 {
        self.a.iter().chain(&self.b).map(|&x| x as u64).sum()
    }

    /// Entry `(i,j)` (1-indexed) after all operations.
    pub fn value(&self, i: usize, j: usize) -> i64 {
        debug_assert!(i >= 1 && j >= 1 && i + j <= self.r + 1);
        (self.r + 2 - i - j) as i64 - self.a[i - 1] as i64 - self.b[j - 1] as i64
    }

    /// Row and column roles exchanged.
    pub fn transposed(&self) -> Self {
        TriangleOps { r: self.r, a: self.b.clone(), b: self.a.clone() }
    }

    pub fn grid(&self) -> StatusGrid {
        let r = self.r;
        let mut values = Vec::with_capacity(r);
        let (mut fixed, mut weak) = (0, 0);
        for i in 1..=r {
            let row: Vec<i64> = (1..=r + 1 - i).map(|j| self.value(i, j)).collect();
            for &v in &row {
                match EntryStatus::of_value(v) {
                    EntryStatus::Fixed => fixed += 1,
                    EntryStatus::Weak => weak += 1,
                    EntryStatus::Open => {}
                }
            }
            values.push(row);
        }
        StatusGrid { values, fixed, weak, ops: self.total() }
    }
}

/// Entry values after the operations, with the fixed count `M`, weak count `W`
/// and operation count `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StatusGrid {
    pub values: Vec<Vec<i64>>,
    pub fixed: usize,
    pub weak: usize,
    pub ops: u64,
}

impl StatusGrid {
    pub fn status(&self, i: usize, j: usize) -> EntryStatus {
        EntryStatus::of_value(self.values[i - 1][j - 1])
    }

    pub fn open(&self) -> usize {
        self.values.iter().map(|row| row.len()).sum::<usize>() - self.fixed - self.weak
    }

    /// `M - N`.
    pub fn gain(&self) -> i64 {
        self.fixed as i64 - self.ops as i64
    }
}

pub fn status_grid(ops: &TriangleOps) -> StatusGrid {
    ops.grid()
}

/// Calls `f` on every row vector in `[0, cap]^r`, in lexicographic order.
fn for_each_capped(r: usize, cap: u32, mut f: impl FnMut(&[u32])) {
    let mut v = vec![0u32; r];
    loop {
        f(&v);
        let mut k = r;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if v[k] < cap {
                v[k] += 1;
                break;
            }
            v[k] = 0;
        }
    }
}

/// Entries of column `j` that become non-positive with `bj` column operations.
fn column_fixed(r: usize, a: &[u32], j: usize, bj: u32) -> usize {
    (1..=r + 1 - j)
        .filter(|&i| a[i - 1] as i64 + bj as i64 >= (r + 2 - i - j) as i64)
        .count()
}

/// Exact `max (M - N)` over all operation vectors, with the lexicographically
/// smallest `(a, b)` attaining it.
pub fn max_m_minus_n(r: usize, mode: SearchMode) -> Result<(i64, TriangleOps), TriangleError> {
    mode.check(r)?;
    let cap = r as u32;
    let mut best: Option<(i64, TriangleOps)> = None;
    for_each_capped(r, cap, |a| {
        let mut gain = -(a.iter().map(|&x| x as i64).sum::<i64>());
        let mut b = vec![0u32; r];
        for j in 1..=r {
            let (mut best_bj, mut best_col) = (0u32, column_fixed(r, a, j, 0) as i64);
            for bj in 1..=cap {
                let col = column_fixed(r, a, j, bj) as i64 - bj as i64;
                if col > best_col {
                    best_col = col;
                    best_bj = bj;
                }
            }
            b[j - 1] = best_bj;
            gain += best_col;
        }
        if best.as_ref().is_none_or(|(g, _)| gain > *g) {
            best = Some((gain, TriangleOps { r, a: a.to_vec(), b }));
        }
    });
    Ok(best.expect("at least the zero vector is enumerated"))
}

/// Smallest column operations making every entry `<= 1` given row operations `a`.
fn min_weak_columns(r: usize, a: &[u32]) -> Vec<u32> {
    (1..=r)
        .map(|j| {
            (1..=r + 1 - j)
                .map(|i| (r + 1 - i - j) as i64 - a[i - 1] as i64)
                .max()
                .unwrap_or(0)
                .max(0) as u32
        })
        .collect()
}

/// Exact minimum number of operations leaving no open entry, with the
/// lexicographically smallest witness.
pub fn min_ops_all_weak(r: usize, mode: SearchMode) -> Result<(u64, TriangleOps), TriangleError> {
    mode.check(r)?;
    let mut best: Option<(u64, TriangleOps)> = None;
    for_each_capped(r, r as u32, |a| {
        let b = min_weak_columns(r, a);
        let n: u64 = a.iter().chain(&b).map(|&x| x as u64).sum();
        if best.as_ref().is_none_or(|(bn, _)| n < *bn) {
            best = Some((n, TriangleOps { r, a: a.to_vec(), b }));
        }
    });
    Ok(best.expect("at least the zero vector is enumerated"))
}

/// Outcome of checking the weak-entry count for every all-weak operation vector
/// with at most `N_r` operations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InductionCheck {
    pub holds: bool,
    /// Operation vectors examined (no open entry, `N <= N_r`).
    pub examined: u64,
    /// First violating vector, if any.
    pub counterexample: Option<TriangleOps>,
}

/// Checks that every operation vector with `N = N_r - t` operations, `t >= 0`,
/// and no open entry has `t <= ceil(r/2)` and at least `t (floor(r/2) + 1)` weak entries.
pub fn verify_induction(r: usize, mode: SearchMode) -> Result<InductionCheck, TriangleError> {
    mode.check(r)?;
    let nr = crate::formulas::n_r(r as u64);
    let per_t = (r / 2 + 1) as u64;
    let cap = r as u32;
    let mut examined = 0u64;
    let mut counterexample = None;

    for_each_capped(r, cap, |a| {
        if counterexample.is_some() {
            return;
        }
        let sum_a: u64 = a.iter().map(|&x| x as u64).sum();
        let bmin = min_weak_columns(r, a);
        let base = sum_a + bmin.iter().map(|&x| x as u64).sum::<u64>();
        if base > nr {
            return;
        }
        let mut b = bmin.clone();
        extend_columns(r, &bmin, cap, &mut b, 0, nr - base, &mut |b| {
            if counterexample.is_some() {
                return;
            }
            examined += 1;
            let ops = TriangleOps { r, a: a.to_vec(), b: b.to_vec() };
            let grid = ops.grid();
            let t = nr - grid.ops;
            if t > r.div_ceil(2) as u64 || (grid.weak as u64) < t * per_t {
                counterexample = Some(ops);
            }
        });
    });
    Ok(InductionCheck { holds: counterexample.is_none(), examined, counterexample })
}

/// Enumerates `b >= bmin` coordinate-wise with `b_j <= cap` and at most `budget` extra operations.
#[allow(clippy::too_many_arguments)]
fn extend_columns(
    r: usize,
    bmin: &[u32],
    cap: u32,
    b: &mut Vec<u32>,
    j: usize,
    budget: u64,
    f: &mut dyn FnMut(&[u32]),
) {
    if j == r {
        f(b);
        return;
    }
    let lo = bmin[j];
    for extra in 0..=budget.min(cap.saturating_sub(lo) as u64) {
        b[j] = lo + extra as u32;
        extend_columns(r, bmin, cap, b, j + 1, budget - extra, f);
    }
    b[j] = lo;
}

/// Triangle coordinates `(i, m+1-j)` of the scarce pair `(i, j)`.
pub fn scarce_to_triangle(m: usize, r: usize, i: usize, j: usize) -> Result<(usize, usize), TriangleError> {
    let err = TriangleError::NotScarce { m, r, i, j };
    if i < 1 || i >= j || j > m || i - 1 + (m - j) >= r {
        return Err(err);
    }
    Ok((i, m + 1 - j))
}

/// Row pair `(i, m+1-j)` for triangle coordinates `(i, j)`.
pub fn triangle_to_scarce(m: usize, r: usize, ti: usize, tj: usize) -> Result<(usize, usize), TriangleError> {
    let err = TriangleError::NotScarce { m, r, i: ti, j: tj };
    if ti < 1 || tj < 1 || ti + tj > r + 1 || tj > m || ti >= m + 1 - tj {
        return Err(err);
    }
    Ok((ti, m + 1 - tj))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ops(a: &[u32], b: &[u32]) -> TriangleOps {
        TriangleOps::new(a.len(), a.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn grid_examples() {
        let g = ops(&[1, 0], &[0, 0]).grid();
        assert_eq!(g.values, vec![vec![1, 0], vec![1]]);
        assert_eq!((g.fixed, g.weak, g.ops), (1, 2, 1));

        let g = ops(&[1, 0], &[1, 0]).grid();
        assert!(g.values.iter().flatten().all(|&v| v <= 0));
        assert_eq!((g.fixed, g.ops), (3, 2));

        let g = TriangleOps::zero(1).grid();
        assert_eq!((g.values.clone(), g.weak, g.fixed), (vec![vec![1]], 1, 0));
        assert_eq!(g.status(1, 1), EntryStatus::Weak);
    }

    #[test]
    fn shape_checked() {
        assert_eq!(TriangleOps::new(2, vec![0], vec![0, 0]), Err(TriangleError::Shape { r: 2 }));
    }

    #[test]
    fn small_optima() {
        let (v, w) = max_m_minus_n(2, SearchMode::Exhaustive).unwrap();
        assert_eq!(v, 1);
        assert_eq!(w, ops(&[1, 0], &[1, 0]));
        assert_eq!(max_m_minus_n(3, SearchMode::Exhaustive).unwrap().0, 2);
        assert_eq!(max_m_minus_n(4, SearchMode::Exhaustive).unwrap().0, 4);

        // (a, b) = ((1,0), (0,0)) also uses one operation; the smaller tuple wins the tie
        let (n, w) = min_ops_all_weak(2, SearchMode::Exhaustive).unwrap();
        assert_eq!((n, w), (1, ops(&[0, 0], &[1, 0])));
        assert_eq!(ops(&[1, 0], &[0, 0]).grid().open(), 0);
        let (n, w) = min_ops_all_weak(3, SearchMode::Exhaustive).unwrap();
        assert_eq!((n, w), (2, ops(&[1, 0, 0], &[1, 0, 0])));
        assert_eq!(min_ops_all_weak(1, SearchMode::Exhaustive).unwrap().0, 0);
    }

    fn brute_force(r: usize) -> (i64, TriangleOps, u64, TriangleOps) {
        let mut max: Option<(i64, TriangleOps)> = None;
        let mut min: Option<(u64, TriangleOps)> = None;
        for_each_capped(2 * r, r as u32, |v| {
            let o = ops(&v[..r], &v[r..]);
            let g = o.grid();
            if max.as_ref().is_none_or(|(best, _)| g.gain() > *best) {
                max = Some((g.gain(), o.clone()));
            }
            if g.open() == 0 && min.as_ref().is_none_or(|(best, _)| g.ops < *best) {
                min = Some((g.ops, o));
            }
        });
        let (mx, wx) = max.unwrap();
        let (mn, wn) = min.unwrap();
        (mx, wx, mn, wn)
    }

    #[test]
    fn searches_match_brute_force() {
        for r in 1..=3 {
            let (mx, wx, mn, wn) = brute_force(r);
            assert_eq!(max_m_minus_n(r, SearchMode::Exhaustive).unwrap(), (mx, wx));
            assert_eq!(min_ops_all_weak(r, SearchMode::Exhaustive).unwrap(), (mn, wn));
        }
    }

    #[test]
    fn transposition_preserves_optima() {
        for r in 1..=4 {
            let (mx, wx) = max_m_minus_n(r, SearchMode::Exhaustive).unwrap();
            assert_eq!(wx.transposed().grid().gain(), mx);
            let (mn, wn) = min_ops_all_weak(r, SearchMode::Exhaustive).unwrap();
            let t = wn.transposed().grid();
            assert_eq!((t.ops, t.open()), (mn, 0));
        }
    }

    #[test]
    fn closed_forms_and_induction() {
        for r in 1..=5u64 {
            let rr = r as usize;
            let (mx, _) = max_m_minus_n(rr, SearchMode::Exhaustive).unwrap();
            assert_eq!(mx, (r * r / 4) as i64);
            assert_eq!(mx, (r * (r + 1) / 2) as i64 - crate::formulas::n_r(r) as i64);
            let (mn, _) = min_ops_all_weak(rr, SearchMode::Exhaustive).unwrap();
            assert!(mn + r.div_ceil(2) >= crate::formulas::n_r(r));
            let check = verify_induction(rr, SearchMode::Exhaustive).unwrap();
            assert!(check.holds, "r = {r}: {:?}", check.counterexample);
            assert!(check.examined > 0);
        }
    }

    #[test]
    fn size_limits() {
        assert!(max_m_minus_n(6, SearchMode::Exhaustive).is_err());
        assert!(min_ops_all_weak(0, SearchMode::Exhaustive).is_err());
        assert!(verify_induction(8, SearchMode::Extended).is_err());
        assert!(max_m_minus_n(6, SearchMode::Extended).is_ok());
    }

    #[test]
    fn layout_operations_attain_maximum() {
        for r in 1..=5 {
            let layout = TriangleOps::from_layout(r, r.div_ceil(2), r / 2);
            let g = layout.grid();
            assert_eq!(g.fixed, r * (r + 1) / 2);
            assert_eq!(g.ops, crate::formulas::n_r(r as u64));
            assert_eq!(g.gain(), max_m_minus_n(r, SearchMode::Exhaustive).unwrap().0);
        }
    }

    #[test]
    fn scarce_pair_coordinates() {
        assert_eq!(scarce_to_triangle(8, 2, 1, 7).unwrap(), (1, 2));
        assert_eq!(scarce_to_triangle(8, 2, 2, 8).unwrap(), (2, 1));
        assert!(scarce_to_triangle(8, 2, 1, 6).is_err());
        for m in 4..12 {
            for r in 0..=(m - 2) / 2 {
                let mut seen = 0;
                for i in 1..=m {
                    for j in i + 1..=m {
                        if let Ok((ti, tj)) = scarce_to_triangle(m, r, i, j) {
                            seen += 1;
                            assert!(ti + tj <= r + 1);
                            assert_eq!(triangle_to_scarce(m, r, ti, tj).unwrap(), (i, j));
                        }
                    }
                }
                assert_eq!(seen, r * (r + 1) / 2);
            }
        }
    }
}
