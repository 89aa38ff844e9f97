//! Configuration containment `F ≺ A`.
//!
//! Two routes: per-pair pattern counting for 2-rowed 0/1 configurations, and a
//! generic checker that enumerates injective row maps. They are independent and
//! the test suite checks them against each other.

use thiserror::Error;

use crate::matrix::SMatrix;

/// Generic checker limits: at most this many rows in `F` ...
pub const GENERIC_MAX_F_ROWS: usize = 4;
/// ... and at most this many rows in `A`.
pub const GENERIC_MAX_A_ROWS: usize = 12;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ContainmentError {
    #[error("too large for generic checker: F has {f_rows} rows, A has {a_rows} (limits {GENERIC_MAX_F_ROWS} and {GENERIC_MAX_A_ROWS})")]
    TooLarge { f_rows: usize, a_rows: usize },
}

/// Pattern slots used throughout: index `2*x + y` for the entries `(x, y)` of rows `(i, j)`.
pub const P00: usize = 0;
pub const P01: usize = 1;
pub const P10: usize = 2;
pub const P11: usize = 3;

/// Dense index of the pair `1 <= i < j <= m`, row-major over `i`.
#[inline]
pub fn pair_index(m: usize, i: usize, j: usize) -> usize {
    debug_assert!(1 <= i && i < j && j <= m);
    (i - 1) * (2 * m - i) / 2 + (j - i - 1)
}

/// All pairs `(i, j)` with `1 <= i < j <= m`, in [`pair_index`] order.
pub fn row_pairs(m: usize) -> impl Iterator<Item = (usize, usize)> {
    (1..=m).flat_map(move |i| (i + 1..=m).map(move |j| (i, j)))
}

#[inline]
pub fn num_pairs(m: usize) -> usize {
    m * m.saturating_sub(1) / 2
}

/// For every row pair, how many columns show 00, 01, 10, 11 on those rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairCounts {
    m: usize,
    counts: Vec<[u32; 4]>,
}

impl PairCounts {
    pub fn m(&self) -> usize {
        self.m
    }

    /// Counts indexed by [`P00`], [`P01`], [`P10`], [`P11`].
    pub fn get(&self, i: usize, j: usize) -> [u32; 4] {
        self.counts[pair_index(self.m, i, j)]
    }

    pub fn c00(&self, i: usize, j: usize) -> u32 {
        self.get(i, j)[P00]
    }
    pub fn c01(&self, i: usize, j: usize) -> u32 {
        self.get(i, j)[P01]
    }
    pub fn c10(&self, i: usize, j: usize) -> u32 {
        self.get(i, j)[P10]
    }
    pub fn c11(&self, i: usize, j: usize) -> u32 {
        self.get(i, j)[P11]
    }

    pub fn by_index(&self) -> &[[u32; 4]] {
        &self.counts
    }
}

/// Exact per-pair counts. Entries of 2 or more disqualify a column for that pair.
pub fn pair_counts(a: &SMatrix) -> PairCounts {
    let m = a.m();
    let mut counts = vec![[0u32; 4]; num_pairs(m)];
    let mut digits = vec![0u8; m + 1];
    for &col in a.columns() {
        for (row, d) in digits.iter_mut().enumerate().skip(1) {
            *d = col.digit(m, row);
        }
        let mut idx = 0;
        for i in 1..=m {
            let x = digits[i];
            if x > 1 {
                idx += m - i;
                continue;
            }
            for &y in &digits[i + 1..=m] {
                if y <= 1 {
                    counts[idx][(x * 2 + y) as usize] += 1;
                }
                idx += 1;
            }
        }
    }
    PairCounts { m, counts }
}

/// Whether counts `[c00, c01, c10, c11]` of one pair meet either row ordering of `F(a,b,c,d)`.
#[inline]
pub fn pair_meets(cnt: [u32; 4], a: usize, b: usize, c: usize, d: usize) -> bool {
    let ge = |slot: usize, t: usize| cnt[slot] as usize >= t;
    let base = ge(P00, a) && ge(P11, d);
    base && ((ge(P10, b) && ge(P01, c)) || (ge(P10, c) && ge(P01, b)))
}

/// First pair (in pair order) at which `F(a,b,c,d)` occurs, if any.
pub fn violating_pair(counts: &PairCounts, a: usize, b: usize, c: usize, d: usize) -> Option<(usize, usize)> {
    row_pairs(counts.m).zip(counts.counts.iter()).find(|(_, &cnt)| pair_meets(cnt, a, b, c, d)).map(|(p, _)| p)
}

/// True iff `A` avoids the 2-rowed configuration `F(a,b,c,d)`.
pub fn avoids_2rowed(a_mat: &SMatrix, a: usize, b: usize, c: usize, d: usize) -> bool {
    violating_pair(&pair_counts(a_mat), a, b, c, d).is_none()
}

/// Generic containment test: some injective row map sends every column of `F`
/// to a distinct column of `A`.
pub fn contains_generic(f: &SMatrix, a: &SMatrix) -> Result<bool, ContainmentError> {
    let (k, m) = (f.m(), a.m());
    if k > GENERIC_MAX_F_ROWS || m > GENERIC_MAX_A_ROWS {
        return Err(ContainmentError::TooLarge { f_rows: k, a_rows: m });
    }
    if k > m {
        return Ok(false);
    }
    if f.is_empty() {
        return Ok(true);
    }
    if f.ncols() > a.ncols() {
        return Ok(false);
    }

    // F columns are already k-rowed codes < 4^k.
    let slots = 1usize << (2 * k);
    let mut need = vec![0u32; slots];
    for &c in f.columns() {
        need[c.0 as usize] += 1;
    }
    let needed: Vec<(usize, u32)> = need.iter().enumerate().filter(|(_, &n)| n > 0).map(|(c, &n)| (c, n)).collect();

    let mut have = vec![0u32; slots];
    let mut phi = Vec::with_capacity(k);
    let mut used = vec![false; m + 1];
    Ok(search_maps(a, k, &needed, &mut have, &mut phi, &mut used))
}

fn search_maps(
    a: &SMatrix,
    k: usize,
    needed: &[(usize, u32)],
    have: &mut [u32],
    phi: &mut Vec<usize>,
    used: &mut [bool],
) -> bool {
    let m = a.m();
    if phi.len() == k {
        have.iter_mut().for_each(|h| *h = 0);
        for &col in a.columns() {
            let mut code = 0usize;
            for &row in phi.iter() {
                code = (code << 2) | col.digit(m, row) as usize;
            }
            have[code] += 1;
        }
        return needed.iter().all(|&(code, n)| have[code] >= n);
    }
    for row in 1..=m {
        if used[row] {
            continue;
        }
        used[row] = true;
        phi.push(row);
        let found = search_maps(a, k, needed, have, phi, used);
        phi.pop();
        used[row] = false;
        if found {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{Column, ConfigurationF};

    fn no_zero_above_one(m: usize) -> SMatrix {
        let u = SMatrix::universe(m, 3).unwrap();
        let cols: Vec<Column> = u
            .columns()
            .iter()
            .copied()
            .filter(|&c| row_pairs(m).all(|(i, j)| c.pair_pattern(m, i, j) != Some(P01)))
            .collect();
        SMatrix::from_packed(m, 3, cols).unwrap()
    }

    #[test]
    fn pair_indexing() {
        for m in 2..8 {
            let idx: Vec<usize> = row_pairs(m).map(|(i, j)| pair_index(m, i, j)).collect();
            assert_eq!(idx, (0..num_pairs(m)).collect::<Vec<_>>());
        }
    }

    #[test]
    fn counts_on_small_matrices() {
        let u = SMatrix::universe(2, 3).unwrap();
        assert_eq!(pair_counts(&u).get(1, 2), [1, 1, 1, 1]);
        let k2 = ConfigurationF::K(2).expand();
        assert_eq!(pair_counts(&k2).get(1, 2), [1, 1, 1, 1]);

        let b = no_zero_above_one(3);
        assert_eq!(b.ncols(), 20);
        let pc = pair_counts(&b);
        for (i, j) in row_pairs(3) {
            assert_eq!(pc.c01(i, j), 0);
            let total: u32 = pc.get(i, j).iter().sum();
            assert!(total as usize <= b.ncols());
        }
    }

    #[test]
    fn binary_counts_cover_every_column() {
        let u = SMatrix::universe(4, 2).unwrap();
        let pc = pair_counts(&u);
        for (i, j) in row_pairs(4) {
            assert_eq!(pc.get(i, j).iter().sum::<u32>() as usize, u.ncols());
        }
    }

    #[test]
    fn two_rowed_avoidance() {
        let u = SMatrix::universe(2, 3).unwrap();
        assert!(!avoids_2rowed(&u, 1, 1, 1, 1));
        assert!(avoids_2rowed(&u, 2, 2, 2, 2));
        let without_11: Vec<Column> = u.columns().iter().copied().filter(|&c| c != Column::from_digits(&[1, 1])).collect();
        let a = SMatrix::from_packed(2, 3, without_11).unwrap();
        assert!(avoids_2rowed(&a, 1, 1, 1, 1));
        assert_eq!(a.ncols(), 8);
    }

    #[test]
    fn orientation_disjuncts() {
        // two 10 columns and one 01 column: contains F(0,2,1,0) in one ordering and F(0,1,2,0) in the other
        let a = SMatrix::from_columns(2, 3, &[[1, 0], [1, 0], [0, 1]]).unwrap();
        assert!(!avoids_2rowed(&a, 0, 2, 1, 0));
        assert!(!avoids_2rowed(&a, 0, 1, 2, 0));
        assert!(avoids_2rowed(&a, 0, 2, 2, 0));
    }

    #[test]
    fn generic_examples() {
        let i2 = ConfigurationF::I(2).expand();
        let zero = SMatrix::from_columns(3, 3, &[[0, 0, 0]]).unwrap();
        assert!(!contains_generic(&i2, &zero).unwrap());
        assert!(contains_generic(&i2, &ConfigurationF::K(2).expand()).unwrap());

        // pair counts c10 = 2, c01 = 1 on the only pair
        let a = SMatrix::from_columns(2, 3, &[[1, 0], [1, 0], [0, 1], [2, 2]]).unwrap();
        let two_i2 = ConfigurationF::PI2(2).expand();
        assert!(!contains_generic(&two_i2, &a).unwrap());
        assert!(avoids_2rowed(&a, 0, 2, 2, 0));
    }

    #[test]
    fn generic_size_guard() {
        let f = ConfigurationF::K(5).expand();
        let a = SMatrix::universe(5, 2).unwrap();
        assert_eq!(contains_generic(&f, &a), Err(ContainmentError::TooLarge { f_rows: 5, a_rows: 5 }));
        let k2 = ConfigurationF::K(2).expand();
        let big = SMatrix::empty(13, 3).unwrap();
        assert!(contains_generic(&k2, &big).is_err());
    }

    #[test]
    fn generic_three_rowed() {
        let k3 = ConfigurationF::K(3).expand();
        assert!(contains_generic(&k3, &SMatrix::universe(3, 3).unwrap()).unwrap());
        // 7 of the 8 binary columns cannot host K_3
        let u = SMatrix::universe(3, 2).unwrap();
        let seven = SMatrix::from_packed(3, 2, u.columns()[1..].to_vec()).unwrap();
        assert!(!contains_generic(&k3, &seven).unwrap());
        let i3 = ConfigurationF::I(3).expand();
        assert!(contains_generic(&i3, &seven.permute_rows(&[2, 3, 1])).unwrap());
    }
}
