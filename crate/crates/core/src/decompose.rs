//! Mark assignment and the standard decomposition `A = [B | C]`.
//!
//! Every row pair `i < j` of a matrix avoiding `F(a,p,p,d)` gets one of the
//! vectors 00, 01, 10, 11 whose count on those rows stays below its threshold
//! (`a`, `p`, `p`, `d`). A column has a mark at `(i,j)` when it shows the assigned
//! vector there. `B` holds the unmarked columns, `C` the rest, and `T` is the
//! digraph with `i -> j` for pairs assigned 01 and `j -> i` for pairs assigned 10.
//!
//! When several vectors qualify, the pair takes the first of 01, 10, 00, 11.
//! Reports call this the canonical-priority assignment.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use num_bigint::BigInt;
use thiserror::Error;

use crate::containment::{num_pairs, pair_counts, pair_index, row_pairs, PairCounts, P00, P01, P10, P11};
use crate::formulas::{binom, no_mark_count, pow2, r_of_p};
use crate::matrix::{Column, SMatrix};
use crate::triangle::EntryStatus;

/// Label used in reports for the tie-break convention.
pub const ASSIGNMENT_LABEL: &str = "canonical-priority";

/// Order in which vectors are tried for each pair.
pub const PRIORITY: [usize; 4] = [P01, P10, P00, P11];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecomposeError {
    #[error("matrix contains F({a},{p},{p},{d}) on rows ({i},{j})")]
    ContainsF { a: usize, p: usize, d: usize, i: usize, j: usize },
    #[error("decomposition needs a 3-matrix with at least 2 rows")]
    Shape,
    #[error("T is not transitive: {i}->{j}->{k} without {i}->{k}")]
    NotTransitive { i: usize, j: usize, k: usize },
}

pub fn pattern_name(pattern: usize) -> &'static str {
    ["00", "01", "10", "11"][pattern]
}

/// The vector assigned to each row pair, indexed like [`pair_index`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Assignment {
    m: usize,
    patterns: Vec<usize>,
}

impl Assignment {
    /// Every pair assigned 01.
    pub fn all_edges(m: usize) -> Self {
        Assignment { m, patterns: vec![P01; num_pairs(m)] }
    }

    pub fn from_patterns(m: usize, patterns: Vec<usize>) -> Self {
        assert_eq!(patterns.len(), num_pairs(m), "one pattern per pair");
        assert!(patterns.iter().all(|&p| p < 4), "patterns are 2-bit indices");
        Assignment { m, patterns }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> usize {
        self.patterns[pair_index(self.m, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, pattern: usize) {
        assert!(pattern < 4);
        self.patterns[pair_index(self.m, i, j)] = pattern;
    }

    pub fn patterns(&self) -> &[usize] {
        &self.patterns
    }

    #[inline]
    pub fn is_mark(&self, col: Column, i: usize, j: usize) -> bool {
        col.pair_pattern(self.m, i, j) == Some(self.get(i, j))
    }

    /// Pairs at which `col` carries a mark, in pair order.
    pub fn marks(&self, col: Column) -> Vec<(usize, usize)> {
        row_pairs(self.m).filter(|&(i, j)| self.is_mark(col, i, j)).collect()
    }

    pub fn mark_count(&self, col: Column) -> usize {
        row_pairs(self.m).filter(|&(i, j)| self.is_mark(col, i, j)).count()
    }

    pub fn is_nonedge(&self, i: usize, j: usize) -> bool {
        matches!(self.get(i, j), P00 | P11)
    }
}

/// Directed graph on rows `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    n: usize,
    adj: Vec<Vec<bool>>,
}

impl Digraph {
    pub fn new(n: usize) -> Self {
        Digraph { n, adj: vec![vec![false; n + 1]; n + 1] }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Digraph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add_edge(&mut self, u: usize, v: usize) {
        assert!(u != v && (1..=self.n).contains(&u) && (1..=self.n).contains(&v));
        self.adj[u][v] = true;
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u][v]
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 1..=self.n {
            for v in 1..=self.n {
                if self.adj[u][v] {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// First triple (in lexicographic order) with `i -> j -> k` but no `i -> k`.
    pub fn transitivity_violation(&self) -> Option<(usize, usize, usize)> {
        let n = self.n;
        for i in 1..=n {
            for j in 1..=n {
                if !self.adj[i][j] {
                    continue;
                }
                for k in 1..=n {
                    if k != i && self.adj[j][k] && !self.adj[i][k] {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }
}

pub fn is_transitive(t: &Digraph) -> bool {
    t.transitivity_violation().is_none()
}

/// The standard decomposition of a matrix avoiding `F(a,p,p,d)`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub a: usize,
    pub p: usize,
    pub d: usize,
    pub assignment: Assignment,
    pub counts: PairCounts,
    /// Marked pairs of every column, in matrix column order.
    pub marks: Vec<Vec<(usize, usize)>>,
    pub matrix: SMatrix,
    pub t: Digraph,
}

impl Decomposition {
    pub fn m(&self) -> usize {
        self.matrix.m()
    }

    /// Unmarked columns.
    pub fn b(&self) -> SMatrix {
        self.select(|marks| marks.is_empty())
    }

    /// Columns with at least one mark.
    pub fn c(&self) -> SMatrix {
        self.select(|marks| !marks.is_empty())
    }

    fn select(&self, keep: impl Fn(&[(usize, usize)]) -> bool) -> SMatrix {
        let cols = self
            .matrix
            .columns()
            .iter()
            .zip(&self.marks)
            .filter(|(_, mk)| keep(mk))
            .map(|(&c, _)| c)
            .collect();
        SMatrix::from_packed(self.m(), self.matrix.s(), cols).expect("columns come from a valid matrix")
    }

    pub fn b_size(&self) -> usize {
        self.marks.iter().filter(|mk| mk.is_empty()).count()
    }

    pub fn c_size(&self) -> usize {
        self.marks.len() - self.b_size()
    }

    pub fn zero_nonedges(&self) -> Vec<(usize, usize)> {
        row_pairs(self.m()).filter(|&(i, j)| self.assignment.get(i, j) == P00).collect()
    }

    pub fn one_nonedges(&self) -> Vec<(usize, usize)> {
        row_pairs(self.m()).filter(|&(i, j)| self.assignment.get(i, j) == P11).collect()
    }

    /// Number of non-edges `N`.
    pub fn nonedges(&self) -> usize {
        self.assignment.patterns().iter().filter(|&&p| p == P00 || p == P11).count()
    }

    /// Sum over columns of the number of marks.
    pub fn total_marks(&self) -> u64 {
        self.marks.iter().map(|mk| mk.len() as u64).sum()
    }

    /// Sum over pairs of the count of the assigned vector, from the pair counts.
    pub fn assigned_occurrences(&self) -> u64 {
        self.counts.by_index().iter().zip(self.assignment.patterns()).map(|(cnt, &p)| cnt[p] as u64).sum()
    }

    /// `(p-1) C(m,2) - N (p - max(a,d))`, the bound on `|C|` when `a, d <= p`.
    pub fn c_bound(&self) -> Option<BigInt> {
        let (a, p, d) = (self.a, self.p, self.d);
        if a > p || d > p {
            return None;
        }
        let m = self.m() as u64;
        Some(BigInt::from(p.saturating_sub(1)) * binom(m, 2) - BigInt::from(self.nonedges() * (p - a.max(d))))
    }

    /// `0`-non-edges `(i,k)` with `i < k`, for every row `i`.
    pub fn a_counts(&self) -> Vec<usize> {
        let m = self.m();
        let mut a = vec![0; m + 1];
        for (i, _) in self.zero_nonedges() {
            a[i] += 1;
        }
        a
    }

    /// `1`-non-edges `(k, m+1-j)` with `k < m+1-j`, for every `j`.
    pub fn b_counts(&self) -> Vec<usize> {
        let m = self.m();
        let mut b = vec![0; m + 1];
        for (_, k) in self.one_nonedges() {
            b[m + 1 - k] += 1;
        }
        b
    }
}

/// Assigns a vector to every pair and splits the columns by marks.
pub fn assign_marks(mat: &SMatrix, a: usize, p: usize, d: usize) -> Result<Decomposition, DecomposeError> {
    if mat.m() < 2 || mat.s() != 3 {
        return Err(DecomposeError::Shape);
    }
    let m = mat.m();
    let counts = pair_counts(mat);
    let threshold = |pattern: usize| match pattern {
        P00 => a,
        P01 | P10 => p,
        _ => d,
    };
    let mut assignment = Assignment::all_edges(m);
    let mut t = Digraph::new(m);
    for (i, j) in row_pairs(m) {
        let cnt = counts.get(i, j);
        let chosen = PRIORITY
            .iter()
            .copied()
            .find(|&pat| (cnt[pat] as usize) < threshold(pat))
            .ok_or(DecomposeError::ContainsF { a, p, d, i, j })?;
        assignment.set(i, j, chosen);
        match chosen {
            P01 => t.add_edge(i, j),
            P10 => t.add_edge(j, i),
            _ => {}
        }
    }
    let marks = mat.columns().iter().map(|&c| assignment.marks(c)).collect();
    Ok(Decomposition { a, p, d, assignment, counts, marks, matrix: mat.clone(), t })
}

/// Outcome of checking that a large `B` forces a transitive `T`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitiveReport {
    pub b_size: usize,
    /// `2^m + m 2^(m-1) - 2^(m-3)`, times 8 to keep it integral.
    pub threshold_times_8: BigInt,
    /// Whether `|B|` exceeds the threshold.
    pub applies: bool,
    pub transitive: bool,
    pub violation: Option<(usize, usize, usize)>,
}

impl TransitiveReport {
    pub fn passed(&self) -> bool {
        !self.applies || self.transitive
    }
}

pub fn transitive_threshold_times_8(m: usize) -> BigInt {
    BigInt::from(8) * no_mark_count(m as u64) - pow2(m as u64)
}

pub fn check_transitive_lemma(dec: &Decomposition) -> TransitiveReport {
    let b_size = dec.b_size();
    let threshold_times_8 = transitive_threshold_times_8(dec.m());
    let applies = BigInt::from(8 * b_size) > threshold_times_8;
    let violation = dec.t.transitivity_violation();
    TransitiveReport { b_size, threshold_times_8, applies, transitive: violation.is_none(), violation }
}

/// Row order listing every vertex after its `T`-predecessors, ties by original index.
///
/// The permutation follows [`SMatrix::permute_rows`]: new row `k` is old row `perm[k-1]`.
pub fn reorder_rows(dec: &Decomposition) -> Result<(Vec<usize>, SMatrix), DecomposeError> {
    if let Some((i, j, k)) = dec.t.transitivity_violation() {
        return Err(DecomposeError::NotTransitive { i, j, k });
    }
    let m = dec.m();
    let mut indegree = vec![0usize; m + 1];
    for (_, v) in dec.t.edges() {
        indegree[v] += 1;
    }
    let mut ready: BinaryHeap<Reverse<usize>> = (1..=m).filter(|&v| indegree[v] == 0).map(Reverse).collect();
    let mut perm = Vec::with_capacity(m);
    while let Some(Reverse(u)) = ready.pop() {
        perm.push(u);
        for (v, deg) in indegree.iter_mut().enumerate().skip(1) {
            if dec.t.has_edge(u, v) {
                *deg -= 1;
                if *deg == 0 {
                    ready.push(Reverse(v));
                }
            }
        }
    }
    // a transitive relation without 2-cycles is acyclic; 2-cycles cannot occur
    // because each pair gets a single vector
    debug_assert_eq!(perm.len(), m);
    let reordered = dec.matrix.permute_rows(&perm);
    Ok((perm, reordered))
}

/// Result of one structural property: `None` when it holds, else a witness.
pub type Witness = Option<Vec<(usize, usize)>>;

/// Closure and location properties of the non-edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonEdgeReport {
    pub nonedges: usize,
    /// `i<j<k`, `(j,k)` a 0-non-edge implies `(i,j)` or `(i,k)` a 0-non-edge;
    /// `(i,j)` a 1-non-edge implies `(i,k)` or `(j,k)` a 1-non-edge.
    pub transitive1: Witness,
    /// `i<j<k`, `(i,k)` a non-edge implies `(i,j)` or `(j,k)` a non-edge.
    pub transitive2: Witness,
    /// 0-non-edges inside rows `1..=N+1`, 1-non-edges inside rows `m-N..=m`.
    pub location: Witness,
}

impl NonEdgeReport {
    pub fn passed(&self) -> bool {
        self.transitive1.is_none() && self.transitive2.is_none() && self.location.is_none()
    }
}

pub fn check_nonedge_structure(dec: &Decomposition) -> NonEdgeReport {
    let m = dec.m();
    let asg = &dec.assignment;
    let is = |i: usize, j: usize, pat: usize| asg.get(i, j) == pat;

    let mut transitive1 = None;
    let mut transitive2 = None;
    'outer: for i in 1..=m {
        for j in i + 1..=m {
            for k in j + 1..=m {
                if transitive1.is_none() {
                    if is(j, k, P00) && !is(i, j, P00) && !is(i, k, P00) {
                        transitive1 = Some(vec![(j, k), (i, j), (i, k)]);
                    } else if is(i, j, P11) && !is(i, k, P11) && !is(j, k, P11) {
                        transitive1 = Some(vec![(i, j), (i, k), (j, k)]);
                    }
                }
                if transitive2.is_none() && asg.is_nonedge(i, k) && !asg.is_nonedge(i, j) && !asg.is_nonedge(j, k) {
                    transitive2 = Some(vec![(i, k), (i, j), (j, k)]);
                }
                if transitive1.is_some() && transitive2.is_some() {
                    break 'outer;
                }
            }
        }
    }

    let n = dec.nonedges();
    let misplaced: Vec<(usize, usize)> = dec
        .zero_nonedges()
        .into_iter()
        .filter(|&(_, j)| j > n + 1)
        .chain(dec.one_nonedges().into_iter().filter(|&(i, _)| i + n < m))
        .collect();
    let location = (!misplaced.is_empty()).then_some(misplaced);
    NonEdgeReport { nonedges: n, transitive1, transitive2, location }
}

/// Role of a row pair relative to `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairClass {
    Abundant,
    /// Scarce pair at triangle coordinates `(ti, tj)`.
    Scarce { ti: usize, tj: usize, status: EntryStatus },
}

/// Classification of every pair in pair order. `p <= 2` leaves every pair abundant.
pub fn classify_pairs(m: usize, p: usize, dec: &Decomposition) -> Vec<((usize, usize), PairClass)> {
    let r = if p >= 2 { r_of_p(p as u64).expect("p >= 2") as usize } else { 0 };
    let a = dec.a_counts();
    let b = dec.b_counts();
    row_pairs(m)
        .map(|(i, j)| {
            if i - 1 + (m - j) >= r {
                return ((i, j), PairClass::Abundant);
            }
            let tj = m + 1 - j;
            let value = (r + 2 - i - tj) as i64 - a[i] as i64 - b[tj] as i64;
            ((i, j), PairClass::Scarce { ti: i, tj, status: EntryStatus::of_value(value) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::containment::avoids_2rowed;

    fn no_zero_above_one(m: usize) -> SMatrix {
        let u = SMatrix::universe(m, 3).unwrap();
        let cols = u
            .columns()
            .iter()
            .copied()
            .filter(|&c| row_pairs(m).all(|(i, j)| c.pair_pattern(m, i, j) != Some(P01)))
            .collect();
        SMatrix::from_packed(m, 3, cols).unwrap()
    }

    #[test]
    fn all_edges_on_no_zero_above_one() {
        let a = no_zero_above_one(3);
        let dec = assign_marks(&a, 0, 2, 0).unwrap();
        assert!(dec.assignment.patterns().iter().all(|&p| p == P01));
        assert_eq!((dec.nonedges(), dec.b_size(), dec.c_size()), (0, 20, 0));
        assert_eq!(dec.b(), a);
    }

    #[test]
    fn priority_and_failure() {
        let u = SMatrix::universe(2, 3).unwrap();
        let dec = assign_marks(&u, 2, 2, 2).unwrap();
        assert_eq!(dec.assignment.get(1, 2), P01);
        assert_eq!(dec.t.edges(), vec![(1, 2)]);

        let f = crate::matrix::ConfigurationF::K(2).expand().repeat(2);
        let f3 = SMatrix::from_packed(2, 3, f.columns().to_vec()).unwrap();
        assert_eq!(assign_marks(&f3, 1, 2, 1).unwrap_err(), DecomposeError::ContainsF { a: 1, p: 2, d: 1, i: 1, j: 2 });
        assert!(!avoids_2rowed(&f3, 1, 2, 2, 1));
    }

    #[test]
    fn falls_back_through_priority() {
        // two each of 01 and 10 on the pair: with p = 2 both are saturated
        let a = SMatrix::from_columns(2, 3, &[[0, 1], [0, 1], [1, 0], [1, 0], [1, 1]]).unwrap();
        let dec = assign_marks(&a, 1, 2, 2).unwrap();
        assert_eq!(dec.assignment.get(1, 2), P00);
        assert_eq!(dec.zero_nonedges(), vec![(1, 2)]);
        let dec = assign_marks(&a, 0, 2, 2).unwrap();
        assert_eq!(dec.assignment.get(1, 2), P11);
        assert_eq!(dec.marks.iter().filter(|m| !m.is_empty()).count(), 1);
    }

    #[test]
    fn transitivity() {
        let chain = Digraph::from_edges(3, &[(1, 2), (2, 3), (1, 3)]);
        assert!(is_transitive(&chain));
        let cycle = Digraph::from_edges(3, &[(1, 2), (2, 3), (3, 1)]);
        assert!(!is_transitive(&cycle));
        assert_eq!(cycle.transitivity_violation(), Some((1, 2, 3)));
        let path = Digraph::from_edges(3, &[(1, 2), (2, 3)]);
        assert!(!is_transitive(&path));
    }

    #[test]
    fn reorder_reverses_a_single_edge() {
        // c10 = 0 < c01: with p = 1 only 10 qualifies, giving the edge 2 -> 1
        let a = SMatrix::from_columns(2, 3, &[[0, 1], [2, 2]]).unwrap();
        let dec = assign_marks(&a, 0, 1, 0).unwrap();
        assert_eq!(dec.t.edges(), vec![(2, 1)]);
        let (perm, a2) = reorder_rows(&dec).unwrap();
        assert_eq!(perm, vec![2, 1]);
        let dec2 = assign_marks(&a2, 0, 1, 0).unwrap();
        assert_eq!(dec2.t.edges(), vec![(1, 2)]);
    }

    #[test]
    fn reorder_identity_cases() {
        let a = no_zero_above_one(4);
        let dec = assign_marks(&a, 0, 2, 0).unwrap();
        assert_eq!(reorder_rows(&dec).unwrap().0, vec![1, 2, 3, 4]);

        let u = SMatrix::universe(3, 3).unwrap();
        let dec = assign_marks(&u, 4, 2, 4).unwrap();
        assert!(dec.t.edges().is_empty());
        assert_eq!(dec.nonedges(), 3);
        assert_eq!(reorder_rows(&dec).unwrap().0, vec![1, 2, 3]);
    }

    #[test]
    fn reorder_rejects_cycle() {
        let mut dec = assign_marks(&no_zero_above_one(3), 0, 2, 0).unwrap();
        dec.t = Digraph::from_edges(3, &[(1, 2), (2, 3), (3, 1)]);
        assert!(matches!(reorder_rows(&dec), Err(DecomposeError::NotTransitive { .. })));
    }

    #[test]
    fn nonedge_checks_without_nonedges() {
        let dec = assign_marks(&no_zero_above_one(4), 0, 2, 0).unwrap();
        let rep = check_nonedge_structure(&dec);
        assert!(rep.passed());
        assert_eq!(rep.nonedges, 0);
    }

    #[test]
    fn nonedge_checks_find_witnesses() {
        let mut dec = assign_marks(&no_zero_above_one(4), 0, 2, 0).unwrap();
        dec.assignment.set(2, 3, P00);
        let rep = check_nonedge_structure(&dec);
        assert_eq!(rep.transitive1, Some(vec![(2, 3), (1, 2), (1, 3)]));
        assert!(rep.transitive2.is_none());
        assert_eq!(rep.location, Some(vec![(2, 3)]));

        dec.assignment = Assignment::all_edges(4);
        dec.assignment.set(1, 4, P11);
        let rep = check_nonedge_structure(&dec);
        assert_eq!(rep.transitive2, Some(vec![(1, 4), (1, 2), (2, 4)]));
        assert_eq!(rep.location, Some(vec![(1, 4)]));
    }

    #[test]
    fn classification_examples() {
        let dec = assign_marks(&no_zero_above_one(8), 0, 5, 0).unwrap();
        let classes = classify_pairs(8, 5, &dec);
        let scarce: Vec<_> = classes
            .iter()
            .filter_map(|&(pair, c)| match c {
                PairClass::Scarce { status, .. } => Some((pair, status)),
                PairClass::Abundant => None,
            })
            .collect();
        assert_eq!(
            scarce,
            vec![((1, 7), EntryStatus::Weak), ((1, 8), EntryStatus::Open), ((2, 8), EntryStatus::Weak)]
        );

        let p2 = classify_pairs(8, 2, &dec);
        assert!(p2.iter().all(|(_, c)| *c == PairClass::Abundant));
    }

    #[test]
    fn mark_identity_and_c_bound() {
        let u = SMatrix::universe(3, 3).unwrap();
        let kept: Vec<Column> = u.columns().iter().copied().step_by(2).collect();
        let a = SMatrix::from_packed(3, 3, kept).unwrap();
        let dec = assign_marks(&a, 2, 3, 2).unwrap();
        assert_eq!(dec.total_marks(), dec.assigned_occurrences());
        assert_eq!(dec.b_size() + dec.c_size(), a.ncols());
        assert!(BigInt::from(dec.c_size()) <= dec.c_bound().unwrap());
        assert!(BigInt::from(dec.b_size()) <= no_mark_count(3));
    }
}
