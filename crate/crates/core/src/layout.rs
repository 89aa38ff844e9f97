//! Lower-bound constructions built from non-edge layouts.
//!
//! A layout fixes which row pairs are 0-non-edges (assigned 00) and 1-non-edges
//! (assigned 11); every other pair is assigned 01. The constructions take all
//! columns with no mark plus, for each pair, some columns whose only mark is at
//! that pair. Since a column with a single mark at `(i,j)` only adds to the count
//! of the assigned vector on `(i,j)`, the per-pair quotas are exactly the caps.
//!
//! Columns are enumerated row by row, rejecting any digit that would create a
//! mark outside the allowed pair. A 2 never creates a mark, so every partial
//! column extends and the enumeration visits no dead ends. Digits are tried in
//! the order 0, 1, 2, so output comes out in canonical order and a truncated
//! enumeration yields the lexicographically smallest columns.
//!
//! Every construction is checked after assembly: the result must be simple, avoid
//! the target configuration, and have the predicted size and per-pair counts.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use rayon::prelude::*;
use thiserror::Error;

use crate::containment::{avoids_2rowed, row_pairs, P00, P01, P11};
use crate::decompose::Assignment;
use crate::formulas::{binom, n_r, no_mark_count, notalways_value, prelim_count, prop_lower_value, r_of_p, FormulaError};
use crate::matrix::{Column, SMatrix};
use crate::triangle::TriangleOps;

/// Largest row count accepted by the generators (`2^16 + 16 * 2^15` unmarked columns).
pub const MAX_GEN_ROWS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LayoutError {
    #[error("invalid layout: {0}")]
    Shape(String),
    #[error("m = {0} is outside the generator range 2..={MAX_GEN_ROWS}")]
    TooLarge(usize),
    #[error("insufficient columns: pair ({i},{j}) has {available} one-mark columns, {want} requested")]
    Insufficient { i: usize, j: usize, want: u64, available: u64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("verification failed: simple={simple} avoids={avoids} counts_match={counts_match} ({detail})")]
    Verification { simple: bool, avoids: bool, counts_match: bool, detail: String },
    #[error(transparent)]
    Formula(#[from] FormulaError),
}

/// 0-non-edges and 1-non-edges on `[m]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonEdgeLayout {
    m: usize,
    zero: BTreeSet<(usize, usize)>,
    one: BTreeSet<(usize, usize)>,
}

fn block_pairs(lo: usize, hi: usize) -> impl Iterator<Item = (usize, usize)> {
    (lo..=hi).flat_map(move |i| (i + 1..=hi).map(move |j| (i, j)))
}

impl NonEdgeLayout {
    pub fn new(m: usize, zero: &[(usize, usize)], one: &[(usize, usize)]) -> Result<Self, LayoutError> {
        let check = |&(i, j): &(usize, usize)| {
            if 1 <= i && i < j && j <= m {
                Ok((i, j))
            } else {
                Err(LayoutError::Shape(format!("pair ({i},{j}) is not 1 <= i < j <= {m}")))
            }
        };
        let zero: BTreeSet<_> = zero.iter().map(check).collect::<Result<_, _>>()?;
        let one: BTreeSet<_> = one.iter().map(check).collect::<Result<_, _>>()?;
        if let Some(&(i, j)) = zero.intersection(&one).next() {
            return Err(LayoutError::Shape(format!("pair ({i},{j}) is both a 0-non-edge and a 1-non-edge")));
        }
        Ok(NonEdgeLayout { m, zero, one })
    }

    pub fn empty(m: usize) -> Self {
        NonEdgeLayout { m, zero: BTreeSet::new(), one: BTreeSet::new() }
    }

    /// 0-non-edges on all pairs within rows `1..=r1+1`, 1-non-edges on all pairs within rows `m-r2..=m`.
    pub fn standard(m: usize, r1: usize, r2: usize) -> Result<Self, LayoutError> {
        if m < 2 || r1 + r2 > m - 2 {
            return Err(LayoutError::Shape(format!("standard layout needs r1 + r2 <= m - 2, got m={m}, r1={r1}, r2={r2}")));
        }
        Ok(NonEdgeLayout { m, zero: block_pairs(1, r1 + 1).collect(), one: block_pairs(m - r2, m).collect() })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn zero_nonedges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.zero.iter().copied()
    }

    pub fn one_nonedges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.one.iter().copied()
    }

    /// Number of non-edges `N`.
    pub fn nonedges(&self) -> usize {
        self.zero.len() + self.one.len()
    }

    /// `(r1, r2)` when this is a standard prefix/suffix layout.
    pub fn standard_params(&self) -> Option<(usize, usize)> {
        let r1 = self.zero.iter().map(|&(_, j)| j - 1).max().unwrap_or(0);
        let r2 = self.one.iter().map(|&(i, _)| self.m - i).max().unwrap_or(0);
        let candidate = NonEdgeLayout::standard(self.m, r1, r2).ok()?;
        (candidate == *self).then_some((r1, r2))
    }

    /// 0-non-edges `(i,k)` with `i < k`.
    pub fn a(&self, i: usize) -> usize {
        self.zero.iter().filter(|&&(x, _)| x == i).count()
    }

    /// 1-non-edges `(k, m+1-j)` with `k < m+1-j`.
    pub fn b(&self, j: usize) -> usize {
        let col = self.m + 1 - j;
        self.one.iter().filter(|&&(_, y)| y == col).count()
    }

    /// Whether 0-non-edges sit in rows `1..=N+1` and 1-non-edges in rows `m-N..=m`.
    pub fn satisfies_location(&self) -> bool {
        let n = self.nonedges();
        self.zero.iter().all(|&(_, j)| j <= n + 1) && self.one.iter().all(|&(i, _)| i + n >= self.m)
    }

    pub fn pattern(&self, i: usize, j: usize) -> usize {
        if self.zero.contains(&(i, j)) {
            P00
        } else if self.one.contains(&(i, j)) {
            P11
        } else {
            P01
        }
    }

    pub fn assignment(&self) -> Assignment {
        let patterns = row_pairs(self.m).map(|(i, j)| self.pattern(i, j)).collect();
        Assignment::from_patterns(self.m, patterns)
    }

    /// Row and column operation counts this layout induces on `T_r`.
    pub fn triangle_ops(&self, r: usize) -> TriangleOps {
        let a = (1..=r).map(|i| if i <= self.m { self.a(i) as u32 } else { 0 }).collect();
        let b = (1..=r).map(|j| if j <= self.m { self.b(j) as u32 } else { 0 }).collect();
        TriangleOps::new(r, a, b).expect("both vectors have length r")
    }

    fn require_standard(&self) -> Result<(), LayoutError> {
        if self.m < 2 || self.m > MAX_GEN_ROWS {
            return Err(LayoutError::TooLarge(self.m));
        }
        if self.standard_params().is_none() {
            return Err(LayoutError::Shape("generation needs a standard prefix/suffix layout".into()));
        }
        Ok(())
    }
}

/// Depth-first enumeration of columns whose marks are exactly `allowed` (at most one pair).
struct Enumerator<'a> {
    m: usize,
    asg: &'a Assignment,
    forced: Vec<Option<u8>>,
    allowed: Option<(usize, usize)>,
    limit: u64,
    digits: Vec<u8>,
    found: u64,
}

impl Enumerator<'_> {
    fn creates_mark(&self, i: usize, j: usize, x: u8, y: u8) -> bool {
        x <= 1 && y <= 1 && (x * 2 + y) as usize == self.asg.get(i, j) && self.allowed != Some((i, j))
    }

    fn acceptable(&self, row: usize, d: u8) -> bool {
        if (1..row).any(|k| self.creates_mark(k, row, self.digits[k], d)) {
            return false;
        }
        !(row + 1..=self.m).any(|f| matches!(self.forced[f], Some(y) if self.creates_mark(row, f, d, y)))
    }

    fn run(&mut self, row: usize, emit: &mut dyn FnMut(Column)) {
        if self.found >= self.limit {
            return;
        }
        if row > self.m {
            self.found += 1;
            emit(Column::from_digits(&self.digits[1..]));
            return;
        }
        let choices: &[u8] = match self.forced[row] {
            Some(0) => &[0],
            Some(1) => &[1],
            _ => &[0, 1, 2],
        };
        for &d in choices {
            if self.acceptable(row, d) {
                self.digits[row] = d;
                self.run(row + 1, emit);
            }
        }
    }
}

fn enumerate(asg: &Assignment, allowed: Option<(usize, usize)>, limit: u64, emit: &mut dyn FnMut(Column)) -> u64 {
    let m = asg.m();
    let mut forced = vec![None; m + 1];
    if let Some((i, j)) = allowed {
        let pat = asg.get(i, j) as u8;
        forced[i] = Some(pat >> 1);
        forced[j] = Some(pat & 1);
    }
    let mut e = Enumerator { m, asg, forced, allowed, limit, digits: vec![0; m + 1], found: 0 };
    e.run(1, emit);
    e.found
}

/// All columns with no mark under the layout, in canonical order.
pub fn gen_nomark(layout: &NonEdgeLayout) -> Result<SMatrix, LayoutError> {
    layout.require_standard()?;
    let m = layout.m();
    let mut cols = Vec::new();
    enumerate(&layout.assignment(), None, u64::MAX, &mut |c| cols.push(c));
    let expected = no_mark_count(m as u64);
    if BigInt::from(cols.len()) != expected {
        return Err(LayoutError::Verification {
            simple: true,
            avoids: true,
            counts_match: false,
            detail: format!("{} unmarked columns, expected {expected}", cols.len()),
        });
    }
    Ok(SMatrix::from_packed(m, 3, cols).expect("generated digits are ternary"))
}

/// Number of columns whose only mark is at `(i,j)`, counting at most `limit`.
pub fn count_onemark(layout: &NonEdgeLayout, i: usize, j: usize, limit: u64) -> Result<u64, LayoutError> {
    layout.require_standard()?;
    check_pair(layout.m(), i, j)?;
    Ok(enumerate(&layout.assignment(), Some((i, j)), limit, &mut |_| {}))
}

/// The `want` lexicographically smallest columns whose only mark is at `(i,j)`.
pub fn gen_onemark(layout: &NonEdgeLayout, i: usize, j: usize, want: u64) -> Result<Vec<Column>, LayoutError> {
    layout.require_standard()?;
    check_pair(layout.m(), i, j)?;
    onemark_columns(&layout.assignment(), i, j, want)
}

fn onemark_columns(asg: &Assignment, i: usize, j: usize, want: u64) -> Result<Vec<Column>, LayoutError> {
    let mut cols = Vec::new();
    let found = enumerate(asg, Some((i, j)), want, &mut |c| cols.push(c));
    if found < want {
        return Err(LayoutError::Insufficient { i, j, want, available: found });
    }
    let m = asg.m();
    assert!(cols.iter().all(|&c| asg.marks(c) == [(i, j)]), "one-mark column with a stray mark");
    debug_assert!(cols.iter().all(|&c| c.0 >> (2 * m) == 0));
    Ok(cols)
}

fn check_pair(m: usize, i: usize, j: usize) -> Result<(), LayoutError> {
    if 1 <= i && i < j && j <= m {
        Ok(())
    } else {
        Err(LayoutError::Shape(format!("pair ({i},{j}) is not 1 <= i < j <= {m}")))
    }
}

/// One-mark columns a non-non-edge pair can receive: `2^(i+j'-2+a_i+b_j')` for a
/// scarce pair with `j' = m+1-j`, and at least `p-1` for an abundant one.
pub fn edge_availability(layout: &NonEdgeLayout, r: usize, p: u64, i: usize, j: usize) -> u64 {
    let m = layout.m();
    if i - 1 + (m - j) >= r {
        return p.saturating_sub(1);
    }
    let tj = m + 1 - j;
    let e = i + tj - 2 + layout.a(i) + layout.b(tj);
    if e >= 63 {
        u64::MAX
    } else {
        1u64 << e
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    Prelim,
    PropLower,
    NotAlways,
}

impl Construction {
    pub fn name(self) -> &'static str {
        match self {
            Construction::Prelim => "prelim",
            Construction::PropLower => "prop-lower",
            Construction::NotAlways => "notalways",
        }
    }
}

/// A verified construction.
#[derive(Clone, Debug)]
pub struct ConstructionReport {
    pub construction: Construction,
    pub layout: NonEdgeLayout,
    /// Target `(a, b, c, d)` of `F(a,b,c,d)`.
    pub target: (usize, usize, usize, usize),
    /// Canonically ordered columns.
    pub matrix: SMatrix,
    pub predicted_count: BigInt,
    pub nomark: usize,
    /// One-mark columns at each pair, in pair order.
    pub onemark: Vec<((usize, usize), u64)>,
    pub simple: bool,
    pub avoids: bool,
    pub counts_match: bool,
}

impl ConstructionReport {
    pub fn verified(&self) -> bool {
        self.simple && self.avoids && self.counts_match
    }

    pub fn summary(&self) -> String {
        let (a, b, c, d) = self.target;
        format!(
            "construction={} m={} columns={} predicted={} target=F({a},{b},{c},{d}) simple={} avoids={} counts_match={}",
            self.construction.name(),
            self.matrix.m(),
            self.matrix.ncols(),
            self.predicted_count,
            self.simple,
            self.avoids,
            self.counts_match
        )
    }
}

fn assemble(
    construction: Construction,
    layout: NonEdgeLayout,
    target: (usize, usize, usize, usize),
    wants: Vec<((usize, usize), u64)>,
    predicted_count: BigInt,
) -> Result<ConstructionReport, LayoutError> {
    let m = layout.m();
    let nomark = gen_nomark(&layout)?;
    let asg = layout.assignment();
    let groups: Vec<Vec<Column>> = wants
        .par_iter()
        .map(|&((i, j), want)| onemark_columns(&asg, i, j, want))
        .collect::<Result<_, _>>()?;

    let nomark_len = nomark.ncols();
    let mut cols = nomark.into_columns();
    cols.extend(groups.into_iter().flatten());
    let matrix = SMatrix::from_packed(m, 3, cols).expect("generated digits are ternary").canonical();

    let simple = matrix.is_simple();
    let (a, b, c, d) = target;
    let avoids = avoids_2rowed(&matrix, a, b, c, d);

    let mut per_pair = vec![0u64; wants.len()];
    let mut unmarked = 0usize;
    let mut multi = 0usize;
    let index: std::collections::HashMap<(usize, usize), usize> =
        wants.iter().enumerate().map(|(k, &(pair, _))| (pair, k)).collect();
    for &col in matrix.columns() {
        let marks = asg.marks(col);
        match marks.as_slice() {
            [] => unmarked += 1,
            [pair] => per_pair[index[pair]] += 1,
            _ => multi += 1,
        }
    }
    let onemark: Vec<((usize, usize), u64)> = wants.iter().map(|&(pair, _)| pair).zip(per_pair.iter().copied()).collect();
    let counts_match = BigInt::from(matrix.ncols()) == predicted_count
        && multi == 0
        && unmarked == nomark_len
        && wants.iter().zip(&per_pair).all(|(&(_, w), &got)| w == got);

    if !(simple && avoids && counts_match) {
        return Err(LayoutError::Verification {
            simple,
            avoids,
            counts_match,
            detail: format!("{} columns, predicted {predicted_count}", matrix.ncols()),
        });
    }
    Ok(ConstructionReport {
        construction,
        layout,
        target,
        matrix,
        predicted_count,
        nomark: nomark_len,
        onemark,
        simple,
        avoids,
        counts_match,
    })
}

fn check_rows(m: usize) -> Result<(), LayoutError> {
    if (2..=MAX_GEN_ROWS).contains(&m) {
        Ok(())
    } else {
        Err(LayoutError::TooLarge(m))
    }
}

/// Quotas: `min(p-1, availability)` on each 01 pair and the given amounts on non-edges.
fn quotas(layout: &NonEdgeLayout, p: u64, r: usize, zero_quota: u64, one_quota: u64) -> Vec<((usize, usize), u64)> {
    row_pairs(layout.m())
        .map(|(i, j)| {
            let want = match layout.pattern(i, j) {
                P00 => zero_quota,
                P11 => one_quota,
                _ => (p - 1).min(edge_availability(layout, r, p, i, j)),
            };
            ((i, j), want)
        })
        .collect()
}

/// All unmarked columns plus `min(p-1, 2^(m-1+i-j))` one-mark columns per pair,
/// every pair assigned 01. Avoids `p I_2`.
pub fn gen_prelim(m: usize, p: usize) -> Result<ConstructionReport, LayoutError> {
    check_rows(m)?;
    if p == 0 {
        return Err(LayoutError::Precondition("p >= 1".into()));
    }
    let layout = NonEdgeLayout::empty(m);
    let r = if p >= 2 { r_of_p(p as u64)? as usize } else { 0 };
    let wants = quotas(&layout, p as u64, r, 0, 0);
    let predicted = prelim_count(m as u64, p as u64)?;
    assemble(Construction::Prelim, layout, (0, p, p, 0), wants, predicted)
}

/// The standard layout with parameters `(r1, r2)`, avoiding `F(p-q0, p, p, p-q1)`.
pub fn gen_prop_lower(m: usize, p: usize, q0: usize, q1: usize, r1: usize, r2: usize) -> Result<ConstructionReport, LayoutError> {
    check_rows(m)?;
    if p < 2 {
        return Err(LayoutError::Precondition(format!("p >= 2, got {p}")));
    }
    if q0 > q1 || q1 > p - 1 {
        return Err(LayoutError::Precondition(format!(
            "0 <= q0 <= q1 <= p-1 (swap 0 and 1 and reverse the rows for q0 > q1), got q0={q0}, q1={q1}, p={p}"
        )));
    }
    let predicted = prop_lower_value(m as u64, p as u64, q0 as u64, q1 as u64, r1 as u64, r2 as u64)?;
    if !predicted.valid {
        return Err(LayoutError::Precondition(format!("m >= 2C(r1+1,2)+2C(r2+1,2)+2, got m={m}")));
    }
    let r = r_of_p(p as u64)? as usize;
    let layout = NonEdgeLayout::standard(m, r1, r2)?;
    let wants = quotas(&layout, p as u64, r, (p - q0 - 1) as u64, (p - q1 - 1) as u64);
    assemble(Construction::PropLower, layout, (p - q0, p, p, p - q1), wants, predicted.value)
}

/// The layout with `r1 = ceil(r/2)`, `r2 = floor(r/2) - 1`, avoiding `F(p-q, p, p, p-q)`.
/// Weakly fixed scarce pairs receive all `2^(r-1)` of their one-mark columns.
pub fn gen_notalways(m: usize, p: usize, q: usize) -> Result<ConstructionReport, LayoutError> {
    check_rows(m)?;
    if p < 2 || q > p - 1 {
        return Err(LayoutError::Precondition(format!("p >= 2 and q <= p-1, got p={p}, q={q}")));
    }
    let r = r_of_p(p as u64)? as usize;
    if r < 2 {
        return Err(LayoutError::Precondition(format!("r >= 2, got r={r}")));
    }
    let d = q as i128 - (r.div_ceil(2) as i128 + 1) * (p as i128 - 1 - (1i128 << (r - 1)));
    if d <= 0 {
        return Err(LayoutError::Precondition(format!("d > 0, got d={d}")));
    }
    let nr = n_r(r as u64) as usize;
    if m < 2 * nr + 2 {
        return Err(LayoutError::Precondition(format!("m >= 2N_r+2 = {}, got m={m}", 2 * nr + 2)));
    }
    let predicted = notalways_value(m as u64, p as u64, q as u64)?;
    let layout = NonEdgeLayout::standard(m, r.div_ceil(2), r / 2 - 1)?;
    let quota = (p - q - 1) as u64;
    let wants = quotas(&layout, p as u64, r, quota, quota);
    assemble(Construction::NotAlways, layout, (p - q, p, p, p - q), wants, predicted.value)
}

/// Swaps 0 and 1 and reverses the row order, mapping `F(a,b,c,d)`-avoiders to `F(d,b,c,a)`-avoiders.
pub fn complement_reverse(a: &SMatrix) -> SMatrix {
    let perm: Vec<usize> = (1..=a.m()).rev().collect();
    a.swap_zero_one().permute_rows(&perm)
}

/// Number of scarce pairs the layout leaves unfixed, as counted on `T_r`.
pub fn unfixed_scarce(layout: &NonEdgeLayout, r: usize) -> usize {
    let g = layout.triangle_ops(r).grid();
    g.values.iter().map(|row| row.len()).sum::<usize>() - g.fixed
}

/// `C(r1+1,2) + C(r2+1,2)`.
pub fn standard_nonedges(r1: usize, r2: usize) -> BigInt {
    binom(r1 as u64 + 1, 2) + binom(r2 as u64 + 1, 2)
}

/// Columns of the `m = 2r+2` universe whose marks under the all-01 assignment
/// are all at scarce pairs, grouped by shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScarceCensus {
    pub r: usize,
    pub m: usize,
    /// Columns with exactly one mark, at a scarce pair.
    pub onemark: u64,
    /// `(b, c)` to the number of columns whose `bc` marks come from `c` 0's above `b` 1's.
    pub by_shape: BTreeMap<(usize, usize), u64>,
    /// Columns with only scarce marks that are not of that shape.
    pub irregular: u64,
}

/// Largest `r` for [`scarce_census`] (a `3^12` universe).
pub const CENSUS_MAX_R: usize = 5;

pub fn scarce_census(r: usize) -> Result<ScarceCensus, LayoutError> {
    if r == 0 || r > CENSUS_MAX_R {
        return Err(LayoutError::Precondition(format!("census needs 1 <= r <= {CENSUS_MAX_R}, got {r}")));
    }
    let m = 2 * r + 2;
    let universe = SMatrix::universe(m, 3).expect("m <= 12");
    let mut by_shape = BTreeMap::new();
    let mut irregular = 0;
    for &col in universe.columns() {
        let digits = col.digits(m);
        let marks: Vec<(usize, usize)> = row_pairs(m).filter(|&(x, y)| digits[x - 1] == 0 && digits[y - 1] == 1).collect();
        if marks.is_empty() || marks.iter().any(|&(x, y)| x - 1 + (m - y) >= r) {
            continue;
        }
        let tops: BTreeSet<usize> = marks.iter().map(|&(x, _)| x).collect();
        let bottoms: BTreeSet<usize> = marks.iter().map(|&(_, y)| y).collect();
        let (c, b) = (tops.len(), bottoms.len());
        if marks.len() == b * c && tops.last() < bottoms.first() {
            *by_shape.entry((b, c)).or_insert(0) += 1;
        } else {
            irregular += 1;
        }
    }
    let onemark = by_shape.get(&(1, 1)).copied().unwrap_or(0);
    Ok(ScarceCensus { r, m, onemark, by_shape, irregular })
}
